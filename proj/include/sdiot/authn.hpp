#pragma once

#include <array>
#include <map>
#include <set>

#include "sdiot/hash.hpp"
#include "sdiot/util.hpp"

namespace sdiot::authn {

struct AuthError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr Tick kDefaultSessionTimeout = 50;

using Nonce = std::array<std::uint8_t, 16>;
using Proof = Digest;  // 32-byte MAC

struct ServiceAccessKey {
    std::uint32_t principal = 0;
    Digest key{};  // ECDH-derived via keymgmt, gateway acting as broker
    Tick issued_at = 0;
};

enum class SessionState { issued, half_authenticated, mutual, failed };

inline const char* to_string(SessionState s) {
    switch (s) {
        case SessionState::issued: return "issued";
        case SessionState::half_authenticated: return "half-authenticated";
        case SessionState::mutual: return "mutual";
        case SessionState::failed: return "failed";
    }
    return "?";
}

enum class Role { initiator, responder };

struct ChallengeSession {
    std::uint64_t id = 0;
    std::uint32_t initiator = 0;
    std::uint32_t responder = 0;
    Nonce nonce_i{};
    Nonce nonce_r{};
    bool nonce_r_issued = false;
    SessionState state = SessionState::issued;
    Tick expiry = 0;
    std::string fail_reason;
};

// proof = MAC(key, nonce ‖ prover_id_be32)
inline Proof make_proof(const Digest& key, const Nonce& nonce, std::uint32_t prover) {
    Bytes msg(nonce.begin(), nonce.end());
    put_u32(msg, prover);
    return hmac_sha256(key, msg);
}

struct VerifyResult {
    SessionState state = SessionState::failed;
    std::string reason;
};

// Mutual challenge-response broker. Both directions must verify before a
// session reaches mutual; nonces are single-use and sessions expire.
class AuthBroker {
public:
    explicit AuthBroker(Tick timeout = kDefaultSessionTimeout) : timeout_(timeout) {}

    void install_key(std::uint32_t principal, const Digest& key, Tick now) {
        keys_[principal] = {principal, key, now};
    }

    void revoke_key(std::uint32_t principal) { keys_.erase(principal); }

    bool has_key(std::uint32_t principal) const { return keys_.count(principal) > 0; }

    ChallengeSession& begin(std::uint32_t initiator, std::uint32_t responder, Tick now,
                            DetRng& rng) {
        if (!keys_.count(initiator)) throw AuthError("initiator holds no live service access key");
        ChallengeSession s;
        s.id = next_id_++;
        s.initiator = initiator;
        s.responder = responder;
        s.nonce_i = fresh_nonce(rng);
        s.expiry = now + timeout_;
        auto [it, _] = sessions_.emplace(s.id, std::move(s));
        return it->second;
    }

    struct Response {
        Proof proof{};
        Nonce counter_challenge{};
    };

    // Responder answers nonce_i and issues its counter-challenge.
    Response respond(std::uint64_t session_id, const Digest& responder_key, Tick now,
                     DetRng& rng) {
        auto& s = session(session_id);
        if (now >= s.expiry) {
            fail(s, "expired");
            throw AuthError("session expired");
        }
        if (s.state != SessionState::issued) {
            fail(s, "replay");
            throw AuthError("session not awaiting response");
        }
        Response r;
        r.proof = make_proof(responder_key, s.nonce_i, s.responder);
        s.nonce_r = fresh_nonce(rng);
        s.nonce_r_issued = true;
        r.counter_challenge = s.nonce_r;
        return r;
    }

    VerifyResult verify(std::uint64_t session_id, const Proof& proof, Role role, Tick now) {
        auto& s = session(session_id);
        if (s.state == SessionState::failed) return {SessionState::failed, s.fail_reason};
        if (now >= s.expiry) {
            fail(s, "expired");
            return {SessionState::failed, "expired"};
        }
        if (seen_proofs_.count(proof)) {
            fail(s, "replay");
            return {SessionState::failed, "replay"};
        }
        if (role == Role::responder) {
            if (s.state != SessionState::issued) {
                fail(s, "out-of-order");
                return {SessionState::failed, "out-of-order"};
            }
            auto kit = keys_.find(s.responder);
            if (kit == keys_.end() || make_proof(kit->second.key, s.nonce_i, s.responder) != proof) {
                fail(s, "bad-proof");
                return {SessionState::failed, "bad-proof"};
            }
            s.state = SessionState::half_authenticated;
        } else {
            if (s.state != SessionState::half_authenticated || !s.nonce_r_issued) {
                fail(s, "out-of-order");
                return {SessionState::failed, "out-of-order"};
            }
            auto kit = keys_.find(s.initiator);
            if (kit == keys_.end() || make_proof(kit->second.key, s.nonce_r, s.initiator) != proof) {
                fail(s, "bad-proof");
                return {SessionState::failed, "bad-proof"};
            }
            s.state = SessionState::mutual;
        }
        seen_proofs_.insert(proof);
        return {s.state, "ok"};
    }

    const ChallengeSession* find(std::uint64_t id) const {
        auto it = sessions_.find(id);
        return it == sessions_.end() ? nullptr : &it->second;
    }

    std::size_t session_count() const { return sessions_.size(); }

private:
    ChallengeSession& session(std::uint64_t id) {
        auto it = sessions_.find(id);
        if (it == sessions_.end()) throw AuthError("unknown session");
        return it->second;
    }

    void fail(ChallengeSession& s, std::string reason) {
        s.state = SessionState::failed;
        s.fail_reason = std::move(reason);
    }

    Nonce fresh_nonce(DetRng& rng) {
        for (;;) {
            Bytes b = rng.bytes(16);
            Nonce n;
            std::copy(b.begin(), b.end(), n.begin());
            if (used_nonces_.insert(n).second) return n;  // single-use, enforced
        }
    }

    Tick timeout_;
    std::uint64_t next_id_ = 1;
    std::map<std::uint32_t, ServiceAccessKey> keys_;
    std::map<std::uint64_t, ChallengeSession> sessions_;
    std::set<Nonce> used_nonces_;
    std::set<Proof> seen_proofs_;
};

}  // namespace sdiot::authn
