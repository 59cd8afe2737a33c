#pragma once

#include <cstdint>
#include <cstring>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sdiot {

using Bytes = std::vector<std::uint8_t>;
using Tick = std::uint64_t;

// Opaque 32-bit entity identifier. Id 0 is the gateway.
struct NodeId {
    std::uint32_t id = 0;
    auto operator<=>(const NodeId&) const = default;
};

inline constexpr NodeId kGatewayId{0};
inline constexpr std::uint32_t kWildcardNode = 0xFFFFFFFFu;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CodecError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---- big-endian byte helpers ----------------------------------------------

inline void put_u8(Bytes& out, std::uint8_t v) { out.push_back(v); }

inline void put_u16(Bytes& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

inline void put_u32(Bytes& out, std::uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

inline void put_u64(Bytes& out, std::uint64_t v) {
    for (int s = 56; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

// Cursor over a byte span; throws CodecError on underrun.
class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

    std::uint8_t u8() { return take(1)[0]; }
    std::uint16_t u16() {
        auto b = take(2);
        return static_cast<std::uint16_t>(b[0]) << 8 | b[1];
    }
    std::uint32_t u32() {
        std::uint32_t v = 0;
        for (auto b : take(4)) v = v << 8 | b;
        return v;
    }
    std::uint64_t u64() {
        std::uint64_t v = 0;
        for (auto b : take(8)) v = v << 8 | b;
        return v;
    }
    Bytes bytes(std::size_t n) {
        auto b = take(n);
        return Bytes(b.begin(), b.end());
    }
    std::size_t remaining() const { return data_.size() - pos_; }
    bool done() const { return pos_ == data_.size(); }

private:
    std::span<const std::uint8_t> take(std::size_t n) {
        if (pos_ + n > data_.size()) throw CodecError("message truncated");
        auto s = data_.subspan(pos_, n);
        pos_ += n;
        return s;
    }
    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
};

// ---- deterministic RNG -----------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Seeded stream with platform-independent sampling. mt19937_64 output is
// fully specified by the standard; std::uniform_* distributions are not,
// so bounded draws are implemented here.
class DetRng {
public:
    explicit DetRng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // Uniform in [0, bound). Rejection sampling on the top slice.
    std::uint64_t below(std::uint64_t bound) {
        if (bound == 0) throw ConfigError("rng bound must be positive");
        std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t v;
        do {
            v = eng_();
        } while (v >= limit);
        return v % bound;
    }

    // Bernoulli with probability num/den.
    bool chance(std::uint64_t num, std::uint64_t den) { return below(den) < num; }

    // Probability p in [0,1], quantized to 1/2^32.
    bool chance(double p) {
        if (p <= 0.0) return false;
        if (p >= 1.0) return true;
        auto threshold = static_cast<std::uint64_t>(p * 4294967296.0);
        return below(4294967296ull) < threshold;
    }

    Bytes bytes(std::size_t n) {
        Bytes out(n);
        for (std::size_t i = 0; i < n; i += 8) {
            std::uint64_t v = eng_();
            for (std::size_t j = 0; j < 8 && i + j < n; ++j)
                out[i + j] = static_cast<std::uint8_t>(v >> (56 - 8 * j));
        }
        return out;
    }

private:
    std::mt19937_64 eng_;
};

// Fixed derivation rule: one master seed, one independent stream per
// (domain, index) pair. Stable under topology growth.
inline DetRng derive_rng(std::uint64_t master_seed, std::string_view domain, std::uint64_t index) {
    std::uint64_t h = master_seed;
    for (char c : domain) h = splitmix64(h ^ static_cast<std::uint8_t>(c));
    return DetRng(splitmix64(h ^ index));
}

inline std::string to_hex(std::span<const std::uint8_t> data) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s;
    s.reserve(data.size() * 2);
    for (auto b : data) {
        s.push_back(digits[b >> 4]);
        s.push_back(digits[b & 0xF]);
    }
    return s;
}

}  // namespace sdiot
