#pragma once

#include <map>
#include <numeric>

#include "sdiot/util.hpp"

namespace sdiot::trust {

// Reputation for an ordered (observer, subject) pair. R starts at the
// neutral prior 0.5 and moves by EWMA on each encounter, so it stays in
// [0,1] as a convex combination.
struct TrustState {
    NodeId observer;
    NodeId subject;
    double reputation = 0.5;
    std::uint64_t encounter_count = 0;
};

inline constexpr double kDefaultAlpha = 0.1;
inline constexpr double kDefaultThreshold = 0.7;

inline TrustState record_encounter(TrustState state, int outcome, double alpha = kDefaultAlpha) {
    if (outcome != 0 && outcome != 1) throw ConfigError("encounter outcome must be 0 or 1");
    if (alpha <= 0.0 || alpha > 1.0) throw ConfigError("alpha must be in (0,1]");
    state.reputation = (1.0 - alpha) * state.reputation + alpha * outcome;
    state.encounter_count += 1;
    return state;
}

inline double trust_value(const TrustState& state) { return state.reputation; }

struct NeighborWeights {
    std::vector<std::pair<NodeId, double>> entries;

    void normalize() {
        double total = 0.0;
        for (const auto& [n, w] : entries) {
            if (w < 0.0) throw ConfigError("negative neighbor weight");
            total += w;
        }
        if (total <= 0.0) throw ConfigError("neighbor weights sum to zero");
        for (auto& [n, w] : entries) w /= total;
    }
};

// T(target) = Σᵢ wᵢ·Tᵢ over the neighbors' pairwise trust toward the target.
inline double weighted_trust(const NeighborWeights& neighbors,
                             const std::map<std::uint32_t, TrustState>& toward_target) {
    if (neighbors.entries.empty()) throw ConfigError("empty neighbor set: trust undefined");
    double acc = 0.0;
    for (const auto& [n, w] : neighbors.entries) {
        auto it = toward_target.find(n.id);
        if (it == toward_target.end())
            throw ConfigError("neighbor " + std::to_string(n.id) + " has no trust state");
        acc += w * trust_value(it->second);
    }
    return acc;
}

// Per-run store of ordered-pair states, mutated only on the controller path.
class TrustStore {
public:
    explicit TrustStore(double alpha = kDefaultAlpha) : alpha_(alpha) {}

    TrustState& state(NodeId observer, NodeId subject) {
        auto key = std::make_pair(observer.id, subject.id);
        auto it = states_.find(key);
        if (it == states_.end())
            it = states_.emplace(key, TrustState{observer, subject}).first;
        return it->second;
    }

    void observe(NodeId observer, NodeId subject, int outcome) {
        auto& s = state(observer, subject);
        s = record_encounter(s, outcome, alpha_);
    }

    double value(NodeId observer, NodeId subject) {
        return trust_value(state(observer, subject));
    }

    // Trust of `target` as seen through `neighbors`, each weighing its own
    // history with the target.
    double assess(NodeId target, const NeighborWeights& neighbors) {
        std::map<std::uint32_t, TrustState> toward;
        for (const auto& [n, w] : neighbors.entries) toward[n.id] = state(n, target);
        return weighted_trust(neighbors, toward);
    }

    double alpha() const { return alpha_; }
    const std::map<std::pair<std::uint32_t, std::uint32_t>, TrustState>& all() const {
        return states_;
    }

private:
    double alpha_;
    std::map<std::pair<std::uint32_t, std::uint32_t>, TrustState> states_;
};

}  // namespace sdiot::trust
