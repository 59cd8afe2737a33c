#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <optional>

#include "sdiot/hash.hpp"
#include "sdiot/util.hpp"

namespace sdiot::ecc {

using Int = boost::multiprecision::cpp_int;

struct EccError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Short-Weierstrass point; empty coordinates mean the point at infinity.
struct CurvePoint {
    std::optional<std::pair<Int, Int>> xy;

    bool infinity() const { return !xy.has_value(); }
    const Int& x() const { return xy->first; }
    const Int& y() const { return xy->second; }

    bool operator==(const CurvePoint&) const = default;

    static CurvePoint at_infinity() { return {}; }
    static CurvePoint affine(Int x, Int y) { return {{{std::move(x), std::move(y)}}}; }
};

inline Int mod(Int v, const Int& m) {
    v %= m;
    if (v < 0) v += m;
    return v;
}

inline Int mod_inv(const Int& v, const Int& m) {
    // extended Euclid; m prime throughout this project
    Int a = mod(v, m), b = m;
    Int x0 = 1, x1 = 0;
    while (b != 0) {
        Int quot = a / b;
        Int t = a - quot * b;
        a = b;
        b = t;
        t = x0 - quot * x1;
        x0 = x1;
        x1 = t;
    }
    if (a != 1) throw EccError("element not invertible");
    return mod(x0, m);
}

inline std::size_t byte_width(const Int& v) {
    std::size_t n = 1;
    Int t = v >> 8;
    while (t > 0) {
        ++n;
        t >>= 8;
    }
    return n;
}

inline Bytes int_to_bytes(const Int& v, std::size_t width) {
    Bytes out(width, 0);
    Int t = v;
    for (std::size_t i = 0; i < width && t > 0; ++i) {
        out[width - 1 - i] = static_cast<std::uint8_t>(t & 0xFF);
        t >>= 8;
    }
    if (t > 0) throw EccError("value does not fit encoding width");
    return out;
}

inline Int bytes_to_int(std::span<const std::uint8_t> b) {
    Int v = 0;
    for (auto byte : b) v = (v << 8) | byte;
    return v;
}

// y² = x³ + ax + b over F_p, with base point G of prime order n.
struct Curve {
    std::string name;
    Int p, a, b;
    CurvePoint base;
    Int n;

    std::size_t field_bytes() const { return byte_width(p); }
    std::size_t scalar_bytes() const { return byte_width(n); }
    std::size_t point_bytes() const { return 1 + 2 * field_bytes(); }

    bool on_curve(const CurvePoint& pt) const {
        if (pt.infinity()) return true;
        Int lhs = mod(pt.y() * pt.y(), p);
        Int rhs = mod(pt.x() * pt.x() * pt.x() + a * pt.x() + b, p);
        return lhs == rhs;
    }
};

// Enumerable test curve: 19 points including infinity, so the full group
// can be checked by brute force.
inline const Curve& toy_curve() {
    static const Curve c{"toy17", 17, 2, 2, CurvePoint::affine(5, 1), 19};
    return c;
}

// NIST P-192, the ≥192-bit profile for realistic runs.
inline const Curve& p192_curve() {
    static const Curve c = [] {
        Curve k;
        k.name = "p192";
        k.p = Int("0xfffffffffffffffffffffffffffffffeffffffffffffffff");
        k.a = k.p - 3;
        k.b = Int("0x64210519e59c80e70fa7e9ab72243049feb8deecc146b9b1");
        k.base = CurvePoint::affine(Int("0x188da80eb03090f67cbf20eb43a18800f4ff0afd82ff1012"),
                                    Int("0x07192b95ffc8da78631011ed6b24cdd573f977a11e794811"));
        k.n = Int("0xffffffffffffffffffffffff99def836146bc9b1b4d22831");
        return k;
    }();
    return c;
}

// 61-bit supersingular curve y² = x³ + x with a prime-order subgroup;
// the default simulation profile. Fast at desk scale while keeping the
// chance of a random signature passing verification around 2⁻⁵⁹.
// Not for real-world use (MOV attack applies; constant time is a non-goal).
inline const Curve& sim61_curve() {
    static const Curve c = [] {
        Curve k;
        k.name = "sim61";
        k.p = Int("2305843009213703347");
        k.a = 1;
        k.b = 0;
        k.base = CurvePoint::affine(Int("836472976453214664"), Int("1082201457823212795"));
        k.n = Int("576460752303425837");  // cofactor 4
        return k;
    }();
    return c;
}

inline const Curve& curve_by_name(std::string_view name) {
    if (name == "toy17") return toy_curve();
    if (name == "sim61") return sim61_curve();
    if (name == "p192") return p192_curve();
    throw ConfigError("unknown curve profile: " + std::string(name));
}

inline CurvePoint point_add(const Curve& c, const CurvePoint& P, const CurvePoint& Q) {
    if (!c.on_curve(P) || !c.on_curve(Q)) throw EccError("point not on curve");
    if (P.infinity()) return Q;
    if (Q.infinity()) return P;
    if (P.x() == Q.x() && mod(P.y() + Q.y(), c.p) == 0) return CurvePoint::at_infinity();
    Int lambda;
    if (P == Q) {
        if (P.y() == 0) return CurvePoint::at_infinity();
        lambda = mod((3 * P.x() * P.x() + c.a) * mod_inv(2 * P.y(), c.p), c.p);
    } else {
        lambda = mod((Q.y() - P.y()) * mod_inv(Q.x() - P.x(), c.p), c.p);
    }
    Int x3 = mod(lambda * lambda - P.x() - Q.x(), c.p);
    Int y3 = mod(lambda * (P.x() - x3) - P.y(), c.p);
    return CurvePoint::affine(x3, y3);
}

inline CurvePoint point_negate(const Curve& c, const CurvePoint& P) {
    if (P.infinity()) return P;
    return CurvePoint::affine(P.x(), mod(-P.y(), c.p));
}

// Double-and-add.
inline CurvePoint scalar_mul(const Curve& c, Int k, const CurvePoint& P) {
    if (!c.on_curve(P)) throw EccError("point not on curve");
    if (k < 0) throw EccError("negative scalar");
    CurvePoint acc = CurvePoint::at_infinity();
    CurvePoint addend = P;
    while (k > 0) {
        if ((k & 1) != 0) acc = point_add(c, acc, addend);
        addend = point_add(c, addend, addend);
        k >>= 1;
    }
    return acc;
}

// ---- encoding: 0x00 = infinity, else 0x04 ‖ x ‖ y, fixed-width BE ----------

inline Bytes encode_point(const Curve& c, const CurvePoint& P) {
    Bytes out;
    if (P.infinity()) {
        put_u8(out, 0x00);
        return out;
    }
    put_u8(out, 0x04);
    auto xb = int_to_bytes(P.x(), c.field_bytes());
    auto yb = int_to_bytes(P.y(), c.field_bytes());
    out.insert(out.end(), xb.begin(), xb.end());
    out.insert(out.end(), yb.begin(), yb.end());
    return out;
}

// Points in wire frames are self-delimiting: the tag byte says whether
// coordinates follow.
inline CurvePoint read_point(const Curve& c, ByteReader& r) {
    std::uint8_t tag = r.u8();
    if (tag == 0x00) return CurvePoint::at_infinity();
    if (tag != 0x04) throw CodecError("bad point encoding tag");
    std::size_t fw = c.field_bytes();
    Int x = bytes_to_int(r.bytes(fw));
    Int y = bytes_to_int(r.bytes(fw));
    CurvePoint pt = CurvePoint::affine(std::move(x), std::move(y));
    if (!c.on_curve(pt)) throw EccError("decoded point off curve");
    return pt;
}

inline CurvePoint decode_point(const Curve& c, std::span<const std::uint8_t> data) {
    ByteReader r(data);
    CurvePoint pt = read_point(c, r);
    if (!r.done()) throw CodecError("trailing bytes after point");
    return pt;
}

// ---- keys ------------------------------------------------------------------

struct KeyPair {
    Int secret;        // in [1, n-1]; never serialized
    CurvePoint pub;    // secret·G
};

// Uniform in [1, n-1] by rejection sampling on the seeded stream.
inline Int random_scalar(const Curve& c, DetRng& rng) {
    const std::size_t width = c.scalar_bytes();
    for (;;) {
        Int k = bytes_to_int(rng.bytes(width));
        if (k >= 1 && k < c.n) return k;
    }
}

inline KeyPair generate_keypair(const Curve& c, DetRng& rng) {
    Int d = random_scalar(c, rng);
    return {d, scalar_mul(c, d, c.base)};
}

using SharedSecret = Digest;

// ECDH: shared point secret·peer; the symmetric key is the hash of the
// fixed-width x-coordinate.
inline SharedSecret derive_shared(const Curve& c, const Int& secret, const CurvePoint& peer) {
    if (peer.infinity()) throw EccError("peer public point is infinity");
    CurvePoint shared = scalar_mul(c, mod(secret, c.n), peer);
    if (shared.infinity()) throw EccError("shared point degenerated to infinity");
    return sha256(int_to_bytes(shared.x(), c.field_bytes()));
}

// ---- Schnorr signatures ----------------------------------------------------

struct Signature {
    Int e, s;
    bool operator==(const Signature&) const = default;
};

inline Int challenge_scalar(const Curve& c, const CurvePoint& R, std::span<const std::uint8_t> msg) {
    Bytes buf = encode_point(c, R);
    buf.insert(buf.end(), msg.begin(), msg.end());
    return mod(bytes_to_int(sha256(buf)), c.n);
}

inline Signature schnorr_sign(const Curve& c, const Int& secret, std::span<const std::uint8_t> msg,
                              DetRng& rng) {
    for (;;) {
        Int k = random_scalar(c, rng);
        CurvePoint R = scalar_mul(c, k, c.base);
        Int e = challenge_scalar(c, R, msg);
        if (e == 0) continue;
        return {e, mod(k + e * secret, c.n)};
    }
}

inline bool schnorr_verify(const Curve& c, const CurvePoint& pub, std::span<const std::uint8_t> msg,
                           const Signature& sig) {
    if (sig.e <= 0 || sig.e >= c.n || sig.s < 0 || sig.s >= c.n) return false;
    if (pub.infinity() || !c.on_curve(pub)) return false;
    // R' = s·G − e·P
    CurvePoint R = point_add(c, scalar_mul(c, sig.s, c.base),
                             point_negate(c, scalar_mul(c, sig.e, pub)));
    if (R.infinity()) return false;
    return challenge_scalar(c, R, msg) == sig.e;
}

}  // namespace sdiot::ecc
