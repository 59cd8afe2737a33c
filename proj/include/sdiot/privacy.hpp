#pragma once

#include <map>

#include "sdiot/ecc.hpp"
#include "sdiot/hash.hpp"
#include "sdiot/util.hpp"

namespace sdiot::privacy {

using ecc::Curve;
using ecc::CurvePoint;
using ecc::Int;

// 2^61 − 1, Mersenne prime. Leaves headroom for 50 devices × 2^48 readings.
inline const Int& default_smc_modulus() {
    static const Int q = (Int(1) << 61) - 1;
    return q;
}

inline constexpr Tick kDefaultCredentialLifetime = 10000;

struct PrivacyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Credential {
    NodeId node;
    ecc::KeyPair device_keypair;
    CurvePoint gateway_pub;
    Int smc_modulus;
    Tick valid_from = 0;
    Tick valid_to = 0;

    bool live_at(Tick t) const { return t >= valid_from && t < valid_to; }
};

// node u32 ‖ ephemeral point ‖ ct_len u16 ‖ ct ‖ sig (2 × scalar fixed width)
struct CipherPacket {
    NodeId node;
    CurvePoint ephemeral_pub;
    Bytes ciphertext;
    ecc::Signature signature;
};

inline Bytes signed_region(const Curve& c, const CipherPacket& pkt) {
    Bytes buf = ecc::encode_point(c, pkt.ephemeral_pub);
    buf.insert(buf.end(), pkt.ciphertext.begin(), pkt.ciphertext.end());
    return buf;
}

inline Bytes encode_cipher_packet(const Curve& c, const CipherPacket& pkt) {
    Bytes out;
    put_u32(out, pkt.node.id);
    Bytes ep = ecc::encode_point(c, pkt.ephemeral_pub);
    out.insert(out.end(), ep.begin(), ep.end());
    if (pkt.ciphertext.size() > 0xFFFF) throw CodecError("ciphertext too large");
    put_u16(out, static_cast<std::uint16_t>(pkt.ciphertext.size()));
    out.insert(out.end(), pkt.ciphertext.begin(), pkt.ciphertext.end());
    std::size_t sw = c.scalar_bytes();
    Bytes e = ecc::int_to_bytes(pkt.signature.e, sw);
    Bytes s = ecc::int_to_bytes(pkt.signature.s, sw);
    out.insert(out.end(), e.begin(), e.end());
    out.insert(out.end(), s.begin(), s.end());
    return out;
}

inline CipherPacket decode_cipher_packet(const Curve& c, std::span<const std::uint8_t> data) {
    ByteReader r(data);
    CipherPacket pkt;
    pkt.node = {r.u32()};
    pkt.ephemeral_pub = ecc::read_point(c, r);
    pkt.ciphertext = r.bytes(r.u16());
    std::size_t sw = c.scalar_bytes();
    pkt.signature.e = ecc::bytes_to_int(r.bytes(sw));
    pkt.signature.s = ecc::bytes_to_int(r.bytes(sw));
    if (!r.done()) throw CodecError("trailing bytes in cipher packet");
    return pkt;
}

// Hybrid protection: ephemeral ECDH against the gateway key, counter-mode
// keystream over the shared key, Schnorr signature by the device secret
// over ephemeral_pub ‖ ciphertext.
inline CipherPacket protect_payload(const Curve& c, const Credential& cred, Bytes plaintext,
                                    Tick now, DetRng& rng) {
    if (!cred.live_at(now)) throw PrivacyError("credential expired or not yet valid");
    CipherPacket pkt;
    pkt.node = cred.node;
    ecc::KeyPair eph = ecc::generate_keypair(c, rng);
    pkt.ephemeral_pub = eph.pub;
    auto key = ecc::derive_shared(c, eph.secret, cred.gateway_pub);
    Bytes pad = keystream(key, plaintext.size());
    xor_in_place(plaintext, pad);
    pkt.ciphertext = std::move(plaintext);
    pkt.signature = ecc::schnorr_sign(c, cred.device_keypair.secret, signed_region(c, pkt), rng);
    return pkt;
}

inline CipherPacket protect_reading(const Curve& c, const Credential& cred, std::uint64_t value,
                                    Tick now, DetRng& rng) {
    Bytes plaintext;
    put_u64(plaintext, value);
    return protect_payload(c, cred, std::move(plaintext), now, rng);
}

enum class OpenStatus { ok, bad_signature, bad_point };

struct Opened {
    OpenStatus status = OpenStatus::bad_signature;
    Bytes plaintext;
};

// Gateway side: verify the device signature, then strip the keystream.
inline Opened open_payload(const Curve& c, const Int& gateway_secret,
                           const CurvePoint& device_pub, const CipherPacket& pkt) {
    if (pkt.ephemeral_pub.infinity()) return {OpenStatus::bad_point, {}};
    if (!ecc::schnorr_verify(c, device_pub, signed_region(c, pkt), pkt.signature))
        return {OpenStatus::bad_signature, {}};
    auto key = ecc::derive_shared(c, gateway_secret, pkt.ephemeral_pub);
    Bytes plain = pkt.ciphertext;
    xor_in_place(plain, keystream(key, plain.size()));
    return {OpenStatus::ok, std::move(plain)};
}

// ---- SMC: additive secret sharing over F_q -----------------------------------

struct SmcShareSet {
    NodeId owner;
    std::vector<Int> shares;  // one per aggregator index; Σ ≡ input mod q
};

inline Int uniform_field_element(const Int& q, DetRng& rng) {
    std::size_t width = ecc::byte_width(q);
    for (;;) {
        Int v = ecc::bytes_to_int(rng.bytes(width));
        if (v < q) return v;
    }
}

// m−1 uniform elements plus the balancing share.
inline SmcShareSet smc_split(NodeId owner, const Int& value, std::size_t m, const Int& q,
                             DetRng& rng) {
    if (m < 2) throw PrivacyError("aggregator count must be >= 2");
    if (value < 0 || value >= q) throw PrivacyError("value out of field range");
    SmcShareSet set;
    set.owner = owner;
    Int acc = 0;
    for (std::size_t i = 0; i + 1 < m; ++i) {
        Int r = uniform_field_element(q, rng);
        acc = (acc + r) % q;
        set.shares.push_back(std::move(r));
    }
    set.shares.push_back(ecc::mod(value - acc, q));
    return set;
}

enum class AggregateMode { sum, mean, count };

inline const char* to_string(AggregateMode m) {
    switch (m) {
        case AggregateMode::sum: return "sum";
        case AggregateMode::mean: return "mean";
        case AggregateMode::count: return "count";
    }
    return "?";
}

struct AggregateResult {
    AggregateMode mode = AggregateMode::sum;
    Int sum = 0;
    std::uint64_t device_count = 0;
    double value = 0.0;  // the mode-reduced result
};

// TTP-side combine: add the per-aggregator subtotals mod q. The modulus is
// sized so the true aggregate never wraps.
inline AggregateResult smc_combine(const std::vector<std::optional<Int>>& per_aggregator_sums,
                                   const Int& q, AggregateMode mode, std::uint64_t device_count) {
    AggregateResult out;
    out.mode = mode;
    out.device_count = device_count;
    Int total = 0;
    for (const auto& sub : per_aggregator_sums) {
        if (!sub.has_value()) throw PrivacyError("missing aggregator subtotal: aggregation aborted");
        total = (total + ecc::mod(*sub, q)) % q;
    }
    out.sum = total;
    switch (mode) {
        case AggregateMode::sum:
            out.value = static_cast<double>(total);
            break;
        case AggregateMode::mean:
            if (device_count == 0) throw PrivacyError("mean over zero devices");
            out.value = static_cast<double>(total) / static_cast<double>(device_count);
            break;
        case AggregateMode::count:
            out.value = static_cast<double>(device_count);
            break;
    }
    return out;
}

// ---- credential store ----------------------------------------------------------

class CredentialStore {
public:
    CredentialStore(const Curve& curve, CurvePoint gateway_pub, Tick lifetime = kDefaultCredentialLifetime)
        : curve_(curve), gateway_pub_(std::move(gateway_pub)), lifetime_(lifetime) {}

    const Credential& issue(NodeId node, Tick now, DetRng& rng) {
        auto it = store_.find(node.id);
        if (it != store_.end() && it->second.live_at(now))
            throw PrivacyError("node already holds a live credential");
        Credential cred;
        cred.node = node;
        cred.device_keypair = ecc::generate_keypair(curve_, rng);
        cred.gateway_pub = gateway_pub_;
        cred.smc_modulus = default_smc_modulus();
        cred.valid_from = now;
        cred.valid_to = now + lifetime_;
        auto [pos, _] = store_.insert_or_assign(node.id, std::move(cred));
        return pos->second;
    }

    void expire(NodeId node, Tick now) {
        auto it = store_.find(node.id);
        if (it != store_.end()) it->second.valid_to = std::min(it->second.valid_to, now);
    }

    const Credential* find(NodeId node) const {
        auto it = store_.find(node.id);
        return it == store_.end() ? nullptr : &it->second;
    }

    std::size_t size() const { return store_.size(); }

private:
    const Curve& curve_;
    CurvePoint gateway_pub_;
    Tick lifetime_;
    std::map<std::uint32_t, Credential> store_;
};

}  // namespace sdiot::privacy
