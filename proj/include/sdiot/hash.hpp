#pragma once

#include <openssl/evp.h>
#include <openssl/hmac.h>

#include <array>

#include "sdiot/util.hpp"

namespace sdiot {

using Digest = std::array<std::uint8_t, 32>;

// SHA-256 is the single project-wide hash: keystream PRF, MAC and the
// Schnorr challenge all derive from it.
inline Digest sha256(std::span<const std::uint8_t> data) {
    Digest out{};
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr);
    return out;
}

inline Digest hmac_sha256(std::span<const std::uint8_t> key, std::span<const std::uint8_t> msg) {
    Digest out{};
    unsigned int len = 0;
    HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), msg.data(), msg.size(),
         out.data(), &len);
    return out;
}

// Counter-mode keystream: block i = SHA256(key ‖ i_be64).
inline Bytes keystream(std::span<const std::uint8_t> key, std::size_t n) {
    Bytes out;
    out.reserve(n);
    std::uint64_t counter = 0;
    while (out.size() < n) {
        Bytes block(key.begin(), key.end());
        put_u64(block, counter++);
        Digest d = sha256(block);
        for (std::size_t i = 0; i < d.size() && out.size() < n; ++i) out.push_back(d[i]);
    }
    return out;
}

inline void xor_in_place(Bytes& data, std::span<const std::uint8_t> pad) {
    for (std::size_t i = 0; i < data.size(); ++i) data[i] ^= pad[i];
}

}  // namespace sdiot
