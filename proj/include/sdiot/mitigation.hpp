#pragma once

#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "sdiot/southbound.hpp"
#include "sdiot/util.hpp"

namespace sdiot::mitigation {

struct DetectorConfig {
    Tick window = 100;
    double dos_rate_multiplier = 5.0;   // θ
    std::uint32_t scan_fanout_limit = 8;  // k
    std::uint32_t auth_failure_limit = 3;
    std::uint32_t integrity_failure_limit = 3;
    std::uint32_t baseline_learning_windows = 5;

    void validate() const {
        if (window == 0 || dos_rate_multiplier <= 0.0 || scan_fanout_limit == 0 ||
            auth_failure_limit == 0 || integrity_failure_limit == 0 ||
            baseline_learning_windows == 0)
            throw ConfigError("detector thresholds must be positive");
    }
};

struct FlowKey {
    std::uint32_t src = 0;
    std::uint32_t dst = 0;
    std::uint8_t type = 0;
    auto operator<=>(const FlowKey&) const = default;
};

struct FlowEvent {
    Tick tick = 0;
    FlowKey flow;
    std::uint64_t bytes = 0;
    bool auth_failure = false;
    bool integrity_failure = false;
    bool spoofed = false;  // invalid signature claiming a registered id
};

enum class AlertKind { scan, spoofing, injection, impersonation, dos, ddos };

inline const char* to_string(AlertKind k) {
    switch (k) {
        case AlertKind::scan: return "scan";
        case AlertKind::spoofing: return "spoofing";
        case AlertKind::injection: return "injection";
        case AlertKind::impersonation: return "impersonation";
        case AlertKind::dos: return "dos";
        case AlertKind::ddos: return "ddos";
    }
    return "?";
}

struct Alert {
    std::uint64_t id = 0;
    AlertKind kind = AlertKind::dos;
    std::optional<FlowKey> flow;       // flow-scoped alerts
    std::optional<std::uint32_t> node;  // node-scoped alerts
    Tick window_start = 0;
    Tick window_end = 0;
    std::map<std::string, std::uint64_t> evidence;
};

enum class CounterAction { install_drop_rule, revoke_keys, quarantine };

struct Countermeasure {
    CounterAction action = CounterAction::install_drop_rule;
    FlowModMsg drop_rule;                // install_drop_rule
    std::vector<std::uint32_t> nodes;    // revoke_keys
    std::uint32_t quarantine_node = 0;   // quarantine
    std::uint64_t cause_alert = 0;
};

// Monitoring agent + threshold flow analyzer. Baseline is the mean per-flow
// per-window packet rate over the first N windows; enforcement is disabled
// while learning.
class MitigationAgent {
public:
    explicit MitigationAgent(DetectorConfig cfg = {}) : cfg_(cfg) { cfg_.validate(); }

    const DetectorConfig& config() const { return cfg_; }

    void ingest(const FlowEvent& ev) {
        flow_counts_[ev.flow] += 1;
        fanout_[ev.flow.src].insert(ev.flow.dst);
        if (ev.auth_failure) auth_failures_[ev.flow.src] += 1;
        if (ev.integrity_failure) integrity_failures_[ev.flow.src] += 1;
        if (ev.spoofed) spoofed_[ev.flow.src] += 1;
        std::ostringstream os;
        os << "tick=" << ev.tick << " comp=mitigation ev=audit src=" << ev.flow.src
           << " dst=" << ev.flow.dst << " type=" << static_cast<int>(ev.flow.type)
           << " bytes=" << ev.bytes << " auth_fail=" << (ev.auth_failure ? 1 : 0)
           << " integ_fail=" << (ev.integrity_failure ? 1 : 0)
           << " spoof=" << (ev.spoofed ? 1 : 0);
        audit_.push_back(os.str());
    }

    bool enforcing() const { return windows_seen_ >= cfg_.baseline_learning_windows; }
    double baseline() const { return baseline_; }

    // Runs at a window boundary: evaluates thresholds over the closing
    // window, then rolls the counters.
    std::vector<Alert> analyze(Tick window_start, Tick window_end) {
        std::vector<Alert> alerts;
        const bool was_enforcing = enforcing();
        if (was_enforcing) {
            double threshold = cfg_.dos_rate_multiplier * std::max(baseline_, 1.0);
            std::map<std::uint32_t, std::set<std::uint32_t>> dos_sources_by_dst;
            for (const auto& [flow, count] : flow_counts_) {
                if (static_cast<double>(count) > threshold) {
                    Alert a = make_alert(AlertKind::dos, window_start, window_end);
                    a.flow = flow;
                    a.evidence["packets"] = count;
                    a.evidence["threshold"] = static_cast<std::uint64_t>(threshold);
                    alerts.push_back(std::move(a));
                    dos_sources_by_dst[flow.dst].insert(flow.src);
                }
            }
            // DDoS = the dos condition met by ≥2 distinct sources on one destination
            for (const auto& [dst, sources] : dos_sources_by_dst) {
                if (sources.size() >= 2) {
                    Alert a = make_alert(AlertKind::ddos, window_start, window_end);
                    a.node = dst;
                    a.evidence["sources"] = sources.size();
                    alerts.push_back(std::move(a));
                }
            }
            for (const auto& [src, dsts] : fanout_) {
                if (dsts.size() > cfg_.scan_fanout_limit) {
                    Alert a = make_alert(AlertKind::scan, window_start, window_end);
                    a.node = src;
                    a.evidence["fanout"] = dsts.size();
                    alerts.push_back(std::move(a));
                }
            }
            for (const auto& [node, count] : spoofed_) {
                if (count > 0) {  // zero tolerance
                    Alert a = make_alert(AlertKind::spoofing, window_start, window_end);
                    a.node = node;
                    a.evidence["spoofed_packets"] = count;
                    alerts.push_back(std::move(a));
                }
            }
            for (const auto& [node, count] : integrity_failures_) {
                if (count > cfg_.integrity_failure_limit) {
                    Alert a = make_alert(AlertKind::injection, window_start, window_end);
                    a.node = node;
                    a.evidence["integrity_failures"] = count;
                    alerts.push_back(std::move(a));
                }
            }
            for (const auto& [node, count] : auth_failures_) {
                if (count > cfg_.auth_failure_limit) {
                    Alert a = make_alert(AlertKind::impersonation, window_start, window_end);
                    a.node = node;
                    a.evidence["auth_failures"] = count;
                    alerts.push_back(std::move(a));
                }
            }
        } else {
            for (const auto& [flow, count] : flow_counts_) {
                learned_samples_ += 1;
                learned_total_ += count;
            }
        }
        windows_seen_ += 1;
        if (!was_enforcing && windows_seen_ == cfg_.baseline_learning_windows && learned_samples_ > 0)
            baseline_ = static_cast<double>(learned_total_) / static_cast<double>(learned_samples_);
        for (const auto& a : alerts) {
            std::ostringstream os;
            os << "tick=" << window_end << " comp=mitigation ev=alert kind=" << to_string(a.kind);
            if (a.node) os << " node=" << *a.node;
            if (a.flow) os << " src=" << a.flow->src << " dst=" << a.flow->dst;
            audit_.push_back(os.str());
        }
        flow_counts_.clear();
        fanout_.clear();
        auth_failures_.clear();
        integrity_failures_.clear();
        spoofed_.clear();
        return alerts;
    }

    // Maps alerts to actions; a (kind, subject) that already produced a
    // countermeasure is suppressed.
    std::vector<Countermeasure> countermeasures(const std::vector<Alert>& alerts) {
        std::vector<Countermeasure> out;
        for (const auto& a : alerts) {
            auto key = dedup_key(a);
            if (!dispatched_.insert(key).second) continue;
            Countermeasure cm;
            cm.cause_alert = a.id;
            switch (a.kind) {
                case AlertKind::dos: {
                    cm.action = CounterAction::install_drop_rule;
                    cm.drop_rule = drop_rule_for(*a.flow);
                    break;
                }
                case AlertKind::ddos: {
                    cm.action = CounterAction::install_drop_rule;
                    cm.drop_rule.op = 0;
                    cm.drop_rule.priority = next_priority_++;
                    cm.drop_rule.match = {kWildcardNode, *a.node, kWildcardType};
                    cm.drop_rule.action = {ActionKind::drop, 0};
                    break;
                }
                case AlertKind::scan: {
                    cm.action = CounterAction::install_drop_rule;
                    cm.drop_rule.op = 0;
                    cm.drop_rule.priority = next_priority_++;
                    cm.drop_rule.match = {*a.node, kWildcardNode, kWildcardType};
                    cm.drop_rule.action = {ActionKind::drop, 0};
                    break;
                }
                case AlertKind::spoofing:
                case AlertKind::injection:
                    cm.action = CounterAction::revoke_keys;
                    cm.nodes = {*a.node};
                    break;
                case AlertKind::impersonation:
                    cm.action = CounterAction::quarantine;
                    cm.quarantine_node = *a.node;
                    break;
            }
            out.push_back(std::move(cm));
        }
        return out;
    }

    const std::vector<std::string>& audit_trail() const { return audit_; }
    std::uint64_t windows_seen() const { return windows_seen_; }

private:
    Alert make_alert(AlertKind kind, Tick start, Tick end) {
        Alert a;
        a.id = next_alert_id_++;
        a.kind = kind;
        a.window_start = start;
        a.window_end = end;
        return a;
    }

    FlowModMsg drop_rule_for(const FlowKey& flow) {
        FlowModMsg m;
        m.op = 0;
        m.priority = next_priority_++;
        m.match = {flow.src, flow.dst, flow.type};
        m.action = {ActionKind::drop, 0};
        return m;
    }

    using DedupKey = std::tuple<AlertKind, std::uint64_t, std::uint64_t, std::uint64_t>;
    DedupKey dedup_key(const Alert& a) const {
        if (a.flow) return {a.kind, a.flow->src, a.flow->dst, a.flow->type};
        return {a.kind, *a.node, 0, 0};
    }

    DetectorConfig cfg_;
    std::map<FlowKey, std::uint64_t> flow_counts_;
    std::map<std::uint32_t, std::set<std::uint32_t>> fanout_;
    std::map<std::uint32_t, std::uint64_t> auth_failures_;
    std::map<std::uint32_t, std::uint64_t> integrity_failures_;
    std::map<std::uint32_t, std::uint64_t> spoofed_;
    std::vector<std::string> audit_;
    std::uint64_t windows_seen_ = 0;
    std::uint64_t learned_samples_ = 0;
    std::uint64_t learned_total_ = 0;
    double baseline_ = 0.0;
    std::uint64_t next_alert_id_ = 1;
    std::uint16_t next_priority_ = 1000;
    std::set<DedupKey> dispatched_;
};

}  // namespace sdiot::mitigation
