#pragma once

#include <map>
#include <set>

#include "sdiot/ecc.hpp"
#include "sdiot/southbound.hpp"
#include "sdiot/util.hpp"

namespace sdiot::keymgmt {

using ecc::Curve;
using ecc::CurvePoint;
using ecc::Int;

struct KeyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr Tick kDefaultKeyLifetime = 10000;
// Renewal kicks in at 80% of the lifetime.
inline constexpr double kRenewalFraction = 0.8;

enum class KeyState { live, revoked };

struct KeyStoreEntry {
    NodeId node;
    CurvePoint pub;
    std::map<std::uint32_t, ecc::SharedSecret> pairwise;  // peer id → derived key
    KeyState state = KeyState::live;
    std::uint32_t epoch = 0;
    Tick issued_at = 0;
};

struct RevocationReceipt {
    std::vector<std::uint32_t> nodes;
    std::string reason;
    RevokeMsg wire;
};

// Gateway-side key store. Secret halves are returned to the joining device
// and never persisted here; only public points and derived pairwise keys
// live in the store.
class KeyManager {
public:
    explicit KeyManager(const Curve& curve, Tick lifetime = kDefaultKeyLifetime)
        : curve_(curve), lifetime_(lifetime) {}

    struct Issued {
        KeyStoreEntry entry;
        Int secret;  // handed to the device, not stored
    };

    Issued generate_for(NodeId node, Tick now, DetRng& rng) {
        auto it = entries_.find(node.id);
        if (it != entries_.end() && it->second.state == KeyState::revoked &&
            !reregistered_.count(node.id))
            throw KeyError("revoked node must re-register before key generation");
        ecc::KeyPair kp = ecc::generate_keypair(curve_, rng);
        KeyStoreEntry entry;
        entry.node = node;
        entry.pub = kp.pub;
        entry.state = KeyState::live;
        entry.epoch = (it == entries_.end() ? 0 : it->second.epoch) + 1;
        entry.issued_at = now;
        entries_[node.id] = entry;
        reregistered_.erase(node.id);
        return {entry, kp.secret};
    }

    // Device-generated key arriving in a JoinRequest.
    void register_public(NodeId node, const CurvePoint& pub, Tick now) {
        auto it = entries_.find(node.id);
        if (it != entries_.end() && it->second.state == KeyState::revoked &&
            !reregistered_.count(node.id))
            throw KeyError("revoked node must re-register");
        if (pub.infinity() || !curve_.on_curve(pub)) throw KeyError("bad public point");
        KeyStoreEntry entry;
        entry.node = node;
        entry.pub = pub;
        entry.epoch = (it == entries_.end() ? 0 : it->second.epoch) + 1;
        entry.issued_at = now;
        entries_[node.id] = entry;
        reregistered_.erase(node.id);
    }

    // ECDH between `a` (whose secret the caller holds) and stored peer `b`.
    // Only public points ever cross the wire; this derives and caches a's side.
    ecc::SharedSecret establish_pairwise(NodeId a, const Int& a_secret, NodeId b) {
        auto& ea = live_entry(a);
        auto& eb = live_entry(b);
        auto key = ecc::derive_shared(curve_, a_secret, eb.pub);
        ea.pairwise[b.id] = key;
        return key;
    }

    RevocationReceipt revoke(const std::vector<NodeId>& nodes, std::string reason) {
        RevocationReceipt receipt;
        receipt.reason = std::move(reason);
        for (auto n : nodes) {
            auto it = entries_.find(n.id);
            if (it == entries_.end()) throw KeyError("cannot revoke unknown node");
            it->second.state = KeyState::revoked;
            it->second.pairwise.clear();
            receipt.nodes.push_back(n.id);
            receipt.wire.nodes.push_back(n.id);
        }
        return receipt;
    }

    // Explicit re-registration is required after revocation.
    void allow_reregistration(NodeId node) { reregistered_.insert(node.id); }

    bool is_live(NodeId node) const {
        auto it = entries_.find(node.id);
        return it != entries_.end() && it->second.state == KeyState::live;
    }

    bool needs_renewal(NodeId node, Tick now) const {
        auto it = entries_.find(node.id);
        if (it == entries_.end() || it->second.state != KeyState::live) return false;
        return now >= it->second.issued_at + static_cast<Tick>(lifetime_ * kRenewalFraction);
    }

    const KeyStoreEntry* find(NodeId node) const {
        auto it = entries_.find(node.id);
        return it == entries_.end() ? nullptr : &it->second;
    }

    const Curve& curve() const { return curve_; }

private:
    KeyStoreEntry& live_entry(NodeId n) {
        auto it = entries_.find(n.id);
        if (it == entries_.end()) throw KeyError("no key entry for node " + std::to_string(n.id));
        if (it->second.state != KeyState::live) throw KeyError("key revoked for node " + std::to_string(n.id));
        return it->second;
    }

    const Curve& curve_;
    Tick lifetime_;
    std::map<std::uint32_t, KeyStoreEntry> entries_;
    std::set<std::uint32_t> reregistered_;
};

}  // namespace sdiot::keymgmt
