#pragma once

#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "sdiot/abac.hpp"
#include "sdiot/authn.hpp"
#include "sdiot/keymgmt.hpp"
#include "sdiot/mitigation.hpp"
#include "sdiot/privacy.hpp"
#include "sdiot/simnet.hpp"
#include "sdiot/southbound.hpp"
#include "sdiot/trust.hpp"

namespace sdiot::gateway {

using mitigation::FlowKey;

struct ModuleFlags {
    bool privacy = true;
    bool trust = true;
    bool keymgmt = true;
    bool authn = true;
    bool abac = true;
    bool mitigation = true;

    void validate() const {
        if (privacy && !keymgmt) throw ConfigError("privacy requires keymgmt");
    }
};

enum class DeviceStatus { pending, registered, revoked };

inline const char* to_string(DeviceStatus s) {
    switch (s) {
        case DeviceStatus::pending: return "pending";
        case DeviceStatus::registered: return "registered";
        case DeviceStatus::revoked: return "revoked";
    }
    return "?";
}

struct DeviceRecord {
    NodeId node;
    DeviceStatus status = DeviceStatus::pending;
    bool has_credential = false;
    bool has_policy = false;
    Tick registered_at = 0;
    std::uint32_t cluster = 0;
};

struct FlowRecord {
    FlowKey flow_id;
    std::uint64_t packets = 0;
    std::uint64_t bytes = 0;
    Tick first_seen = 0;
    Tick last_seen = 0;
    std::uint64_t auth_failures = 0;
    std::uint64_t integrity_failures = 0;
};

// In-sim stand-in for the cloud back end: records aggregates and per-flow
// delivery counts per analyzer window.
struct PlaintextReading {
    std::uint32_t src = 0;
    std::uint32_t seq = 0;
    std::uint64_t value = 0;
};

struct Sink {
    std::vector<privacy::AggregateResult> aggregates;
    std::vector<PlaintextReading> plaintext_readings;  // privacy-off path only
    std::map<FlowKey, std::map<std::uint64_t, std::uint64_t>> delivered_per_window;
    std::map<FlowKey, std::uint64_t> delivered_total;

    void deliver(const FlowKey& flow, std::uint64_t window_idx) {
        delivered_per_window[flow][window_idx] += 1;
        delivered_total[flow] += 1;
    }
};

struct GatewayConfig {
    std::string curve = "toy17";
    ModuleFlags modules;
    double trust_alpha = trust::kDefaultAlpha;
    double trust_threshold = trust::kDefaultThreshold;
    mitigation::DetectorConfig detector;
    Tick credential_lifetime = privacy::kDefaultCredentialLifetime;
    std::size_t aggregator_count = 3;
    privacy::AggregateMode aggregate_mode = privacy::AggregateMode::sum;
    // Access-tree templates; ${name} binds device attributes at derivation.
    std::string device_policy_template =
        "(and (= role sensor) (= cluster ${cluster}) (= dst 0) (in msg_type reading auth service))";
    std::string storage_policy_template = "(= role admin)";
};

struct RegisterResult {
    bool ok = false;
    std::string reason;
};

struct ServiceDecision {
    bool allow = false;
    std::string reason;
    std::map<std::uint32_t, double> per_node_trust;
};

// The two co-located controllers: IoT controller (collection, aggregation,
// sink relay) and SDN security controller (registration, flow accounting,
// module dispatch). Single-writer: only the simulation event loop calls in.
class GatewayController {
public:
    GatewayController(GatewayConfig cfg, std::uint64_t seed)
        : cfg_(std::move(cfg)),
          curve_(ecc::curve_by_name(cfg_.curve)),
          rng_(derive_rng(seed, "gateway", 0)),
          keys_(curve_),
          trust_(cfg_.trust_alpha),
          agent_(cfg_.detector) {
        cfg_.modules.validate();
        gw_keys_ = ecc::generate_keypair(curve_, rng_);
        device_template_ = abac::parse_tree(cfg_.device_policy_template);
        storage_template_ = abac::parse_tree(cfg_.storage_policy_template);
    }

    const ecc::Curve& curve() const { return curve_; }
    const ecc::CurvePoint& public_point() const { return gw_keys_.pub; }
    const GatewayConfig& config() const { return cfg_; }
    const ModuleFlags& modules() const { return cfg_.modules; }

    // ---- registration (Privacy Module steps 1-2, Key Management step 2) ----

    RegisterResult register_device(const JoinRequestMsg& join, std::uint32_t cluster, Tick now) {
        NodeId node{join.node};
        auto it = records_.find(node.id);
        if (it != records_.end() && it->second.status == DeviceStatus::registered) {
            // A live device asking again is a renewal only when its key aged out.
            if (cfg_.modules.keymgmt && keys_.needs_renewal(node, now))
                return renew_device(join, now);
            return {false, "duplicate-registration"};
        }
        if (it != records_.end() && it->second.status == DeviceStatus::revoked &&
            !rejoin_allowed_.count(node.id))
            return {false, "revoked-without-reregistration"};

        DeviceRecord rec;
        rec.node = node;
        rec.cluster = cluster;
        try {
            if (cfg_.modules.keymgmt) {
                auto pub = ecc::decode_point(curve_, join.pubkey);
                keys_.register_public(node, pub, now);
                // service access key: ECDH of the gateway secret against the
                // device's registered point
                auto sak = ecc::derive_shared(curve_, gw_keys_.secret, pub);
                broker_.install_key(node.id, sak, now);
                rec.has_credential = true;
                credential_epoch_[node.id] = keys_.find(node)->epoch;
            }
            if (cfg_.modules.abac) {
                abac::AttributeSet attrs = device_attributes(node, cluster);
                abac::Policy p;
                p.subject = node.id;
                p.tree = abac::instantiate(device_template_, attrs);
                p.effect = abac::Effect::permit;
                p.stored_at = now;
                policies_.put(std::move(p));
                rec.has_policy = true;
            }
        } catch (const std::exception& e) {
            return {false, e.what()};
        }
        rec.status = DeviceStatus::registered;
        rec.registered_at = now;
        records_[node.id] = rec;
        rejoin_allowed_.erase(node.id);
        quarantined_.erase(node.id);
        log(now, "gateway", "register", {{"node", std::to_string(node.id)},
                                         {"cluster", std::to_string(cluster)}});
        return {true, "registered"};
    }

    void allow_rejoin(NodeId node) {
        rejoin_allowed_.insert(node.id);
        keys_.allow_reregistration(node);
    }

    const DeviceRecord* record(NodeId node) const {
        auto it = records_.find(node.id);
        return it == records_.end() ? nullptr : &it->second;
    }

    abac::AttributeSet device_attributes(NodeId node, std::uint32_t cluster) const {
        abac::AttributeSet attrs;
        attrs["role"] = std::string("sensor");
        attrs["cluster"] = static_cast<std::int64_t>(cluster);
        auto ce = credential_epoch_.find(node.id);
        attrs["epoch"] = static_cast<std::int64_t>(ce == credential_epoch_.end() ? 0 : ce->second);
        return attrs;
    }

    // ---- data plane ---------------------------------------------------------

    // Gateway node handler: control frames carry southbound messages from
    // cluster heads, anything else is a data frame the head forwarded.
    void handle_frame(Network& net, const Frame& frame, NodeId hop_from) {
        if (frame.type == MsgType::control && hop_from == frame.src &&
            net.role_of(hop_from) == NodeRole::cluster_head) {
            // control channel from a head
            try {
                auto msg = decode(frame.payload);
                handle_southbound(net, hop_from, msg);
                return;
            } catch (const CodecError&) {
                // malformed control traffic falls through to accounting
            }
        }
        handle_data(net, frame, net.now());
    }

    void handle_southbound(Network& net, NodeId head, const SouthboundMessage& msg) {
        if (const auto* pin = std::get_if<PacketInMsg>(&msg)) {
            handle_packet_in(net, head, pin->frame);
        }
        // StatsReport/Hello are accepted silently; heads never send other kinds.
    }

    void handle_packet_in(Network& net, NodeId head, const Frame& inner) {
        Tick now = net.now();
        if (inner.type == MsgType::join) {
            JoinRequestMsg join;
            try {
                auto msg = decode(inner.payload);
                join = std::get<JoinRequestMsg>(msg);
            } catch (const std::exception&) {
                log(now, "gateway", "join-malformed", {{"src", std::to_string(inner.src.id)}});
                return;
            }
            auto res = register_device(join, net.cluster_of(inner.src), now);
            if (!res.ok)
                log(now, "gateway", "join-rejected", {{"node", std::to_string(join.node)},
                                                      {"reason", res.reason}});
            return;
        }

        // Reactive flow setup: authorize the new flow, install the matching
        // rule on the head, and process this first packet inline.
        FlowKey key{inner.src.id, inner.dst.id, static_cast<std::uint8_t>(inner.type)};
        if (programmed_.count(key)) {
            // rule already pushed (burst of packet-ins before the mod landed)
            handle_data(net, inner, now);
            return;
        }
        programmed_.insert(key);
        bool permit = true;
        std::string reason = "abac-disabled";
        if (cfg_.modules.abac) {
            auto rec = record(inner.src);
            abac::AttributeSet attrs =
                abac::flow_attributes(device_attributes(inner.src, rec ? rec->cluster : 0),
                                      inner.src, inner.dst, inner.type);
            auto d = policies_.authorize(inner.src.id, attrs);
            permit = d.permitted;
            reason = d.reason;
        }
        FlowModMsg mod;
        mod.op = 0;
        mod.priority = next_flow_priority_++;
        mod.match = {key.src, key.dst, key.type};
        if (permit) {
            mod.action = {ActionKind::forward, 0};  // port 0 = uplink to gateway
        } else {
            mod.action = {ActionKind::drop, 0};
            denied_flows_[key] += 1;
            log(now, "abac", "deny", {{"src", std::to_string(key.src)},
                                      {"dst", std::to_string(key.dst)},
                                      {"type", std::to_string(key.type)},
                                      {"reason", reason}});
        }
        send_southbound(net, head, mod);
        if (permit) {
            handle_data(net, inner, now);
        } else {
            // denied flows are still accounted so the analyzer sees them
            account(key, inner.payload.size(), now, false, false, false, "abac-deny");
        }
    }

    void handle_data(Network& net, const Frame& frame, Tick now) {
        FlowKey key{frame.src.id, frame.dst.id, static_cast<std::uint8_t>(frame.type)};
        bool auth_failure = false;
        bool integrity_failure = false;
        bool spoofed = false;
        std::string verdict = "ok";

        if (quarantined_.count(frame.src.id)) {
            verdict = "quarantined";
            account(key, frame.payload.size(), now, true, false, false, verdict);
            return;
        }

        switch (frame.type) {
            case MsgType::reading:
                process_reading(frame, now, auth_failure, integrity_failure, spoofed, verdict);
                break;
            case MsgType::auth:
                process_auth(frame, now, auth_failure, verdict);
                break;
            case MsgType::service:
            case MsgType::control:
            case MsgType::join:
                // accounted below; semantics handled by the scenario layer
                break;
        }

        account(key, frame.payload.size(), now, auth_failure, integrity_failure, spoofed, verdict);
        sink_.deliver(key, now / cfg_.detector.window);

        if (cfg_.modules.trust && frame.type == MsgType::reading &&
            records_.count(frame.src.id)) {
            // delivery success + integrity pass = cooperate
            int outcome = (verdict == "ok") ? 1 : 0;
            NodeId observer = net.head_of_cluster(net.cluster_of(frame.src));
            trust_.observe(observer, frame.src, outcome);
        }
    }

    // ---- privacy path --------------------------------------------------------

    void process_reading(const Frame& frame, [[maybe_unused]] Tick now, bool& auth_failure,
                         bool& integrity_failure, bool& spoofed, std::string& verdict) {
        if (!cfg_.modules.privacy) {
            // plaintext path: 'R''D' ‖ seq u32 ‖ value u64
            if (frame.payload.size() == 14 && frame.payload[0] == 'R' && frame.payload[1] == 'D') {
                ByteReader r(frame.payload);
                r.bytes(2);
                std::uint32_t seq = r.u32();
                sink_.plaintext_readings.push_back({frame.src.id, seq, r.u64()});
            }
            return;
        }
        if (cfg_.modules.keymgmt && !keys_.is_live(frame.src)) {
            auth_failure = true;
            verdict = "key-revoked";
            return;
        }
        const auto* entry = keys_.find(frame.src);
        if (!entry) {
            auth_failure = true;
            verdict = "unregistered";
            return;
        }
        privacy::CipherPacket pkt;
        try {
            pkt = privacy::decode_cipher_packet(curve_, frame.payload);
        } catch (const std::exception&) {
            integrity_failure = true;
            spoofed = records_.count(frame.src.id) > 0;
            verdict = "malformed-cipher";
            return;
        }
        auto opened = privacy::open_payload(curve_, gw_keys_.secret, entry->pub, pkt);
        if (opened.status != privacy::OpenStatus::ok) {
            integrity_failure = true;
            spoofed = records_.count(frame.src.id) > 0;  // invalid sig under a registered id
            verdict = "bad-signature";
            return;
        }
        // share payload: agg_index u8 ‖ seq u32 ‖ share u64
        try {
            ByteReader r(opened.plaintext);
            std::uint8_t agg = r.u8();
            std::uint32_t seq = r.u32();
            std::uint64_t share = r.u64();
            if (!r.done() || agg >= cfg_.aggregator_count) throw CodecError("bad share");
            if (!seen_shares_.insert(std::make_tuple(frame.src.id, seq, agg)).second) {
                integrity_failure = true;
                verdict = "replay";
                return;
            }
            share_buffer_[{frame.src.id, seq}][agg] = share;
        } catch (const std::exception&) {
            integrity_failure = true;
            verdict = "bad-share";
        }
    }

    // ---- auth path -------------------------------------------------------------

    // auth frames: op u8 (0=begin,1=respond,2=verify) ‖ session u64 ‖ nonce 16B ‖ proof 32B
    void process_auth(const Frame& frame, Tick now, bool& auth_failure, std::string& verdict) {
        if (!cfg_.modules.authn) return;
        try {
            ByteReader r(frame.payload);
            std::uint8_t op = r.u8();
            std::uint64_t session = r.u64();
            r.bytes(16);  // nonce echo, informational
            Bytes proof_bytes = r.bytes(32);
            authn::Proof proof;
            std::copy(proof_bytes.begin(), proof_bytes.end(), proof.begin());
            if (op == 2 || op == 1) {
                auto role = op == 1 ? authn::Role::responder : authn::Role::initiator;
                auto res = broker_.verify(session, proof, role, now);
                if (res.state == authn::SessionState::failed) {
                    auth_failure = true;
                    verdict = "auth-" + res.reason;
                }
            }
        } catch (const std::exception&) {
            auth_failure = true;
            verdict = "auth-malformed";
        }
    }

    // ---- flow accounting ---------------------------------------------------------

    void account(const FlowKey& key, std::size_t bytes, Tick now, bool auth_failure,
                 bool integrity_failure, bool spoofed, const std::string& verdict) {
        auto& rec = flows_.try_emplace(key, FlowRecord{key, 0, 0, now, now, 0, 0}).first->second;
        rec.packets += 1;
        rec.bytes += bytes;
        rec.last_seen = now;
        if (auth_failure) rec.auth_failures += 1;
        if (integrity_failure) rec.integrity_failures += 1;
        packets_observed_ += 1;
        if (cfg_.modules.mitigation)
            agent_.ingest({now, key, bytes, auth_failure, integrity_failure, spoofed});
        log(now, "gateway", "flow",
            {{"src", std::to_string(key.src)},
             {"dst", std::to_string(key.dst)},
             {"type", std::to_string(key.type)},
             {"verdict", verdict}});
    }

    // ---- window boundary: analyzer + aggregation ----------------------------------

    void on_window_boundary(Network& net, Tick boundary) {
        aggregate_ready_shares(boundary);
        if (!cfg_.modules.mitigation) return;
        Tick start = boundary >= cfg_.detector.window ? boundary - cfg_.detector.window : 0;
        auto alerts = agent_.analyze(start, boundary);
        for (const auto& a : alerts) alerts_.push_back(a);
        auto cms = agent_.countermeasures(alerts);
        for (const auto& cm : cms) apply_countermeasure(net, cm, boundary);
    }

    void apply_countermeasure(Network& net, const mitigation::Countermeasure& cm, Tick now) {
        countermeasures_.push_back(cm);
        switch (cm.action) {
            case mitigation::CounterAction::install_drop_rule: {
                // exact-source rules go to that source's head; wildcard-source
                // rules go to every head
                if (cm.drop_rule.match.src != kWildcardNode && net.has_node({cm.drop_rule.match.src})) {
                    NodeId src{cm.drop_rule.match.src};
                    send_southbound(net, net.head_of_cluster(net.cluster_of(src)), cm.drop_rule);
                } else {
                    for (auto head : net.cluster_heads()) send_southbound(net, head, cm.drop_rule);
                }
                log(now, "mitigation", "countermeasure",
                    {{"action", "drop_rule"}, {"src", std::to_string(cm.drop_rule.match.src)}});
                break;
            }
            case mitigation::CounterAction::revoke_keys: {
                std::vector<NodeId> nodes;
                for (auto n : cm.nodes) nodes.push_back({n});
                revoke(net, nodes, "mitigation-alert", now);
                break;
            }
            case mitigation::CounterAction::quarantine: {
                quarantined_.insert(cm.quarantine_node);
                broker_.revoke_key(cm.quarantine_node);
                if (net.has_node({cm.quarantine_node}) &&
                    net.role_of({cm.quarantine_node}) == NodeRole::device) {
                    FlowModMsg mod;
                    mod.op = 0;
                    mod.priority = next_mitigation_priority_++;
                    mod.match = {cm.quarantine_node, kWildcardNode, kWildcardType};
                    mod.action = {ActionKind::drop, 0};
                    NodeId n{cm.quarantine_node};
                    send_southbound(net, net.head_of_cluster(net.cluster_of(n)), mod);
                }
                log(now, "mitigation", "countermeasure",
                    {{"action", "quarantine"}, {"node", std::to_string(cm.quarantine_node)}});
                break;
            }
        }
    }

    keymgmt::RevocationReceipt revoke(Network& net, const std::vector<NodeId>& nodes,
                                      const std::string& reason, Tick now) {
        keymgmt::RevocationReceipt receipt;
        if (nodes.empty()) return receipt;
        if (cfg_.modules.keymgmt) receipt = keys_.revoke(nodes, reason);
        for (auto n : nodes) {
            broker_.revoke_key(n.id);
            auto it = records_.find(n.id);
            if (it != records_.end()) it->second.status = DeviceStatus::revoked;
        }
        if (cfg_.modules.keymgmt && !receipt.wire.nodes.empty()) {
            for (auto head : net.cluster_heads()) send_southbound(net, head, receipt.wire);
        }
        std::string list;
        for (auto n : nodes) list += (list.empty() ? "" : ",") + std::to_string(n.id);
        log(now, "keymgmt", "revoke", {{"nodes", list}, {"reason", reason}});
        return receipt;
    }

    // ---- aggregation (IoT controller: collect, aggregate, relay to sink) -----------

    void aggregate_ready_shares(Tick now) {
        if (!cfg_.modules.privacy) return;
        const auto& q = privacy::default_smc_modulus();
        std::vector<std::optional<privacy::Int>> subtotals(cfg_.aggregator_count, privacy::Int(0));
        std::uint64_t contributions = 0;
        std::vector<std::pair<std::uint32_t, std::uint32_t>> done;
        for (const auto& [key, shares] : share_buffer_) {
            if (shares.size() < cfg_.aggregator_count) continue;  // still in flight or lossy
            for (std::size_t j = 0; j < cfg_.aggregator_count; ++j)
                *subtotals[j] = (*subtotals[j] + shares.at(static_cast<std::uint8_t>(j))) % q;
            contributions += 1;
            done.push_back(key);
        }
        for (const auto& k : done) share_buffer_.erase(k);
        if (contributions == 0) return;
        auto result = privacy::smc_combine(subtotals, q, cfg_.aggregate_mode, contributions);
        sink_.aggregates.push_back(result);
        log(now, "privacy", "aggregate",
            {{"mode", privacy::to_string(result.mode)},
             {"contributions", std::to_string(contributions)},
             {"value", result.sum.str()}});
    }

    // Leftover partial contributions at end of run are incidents.
    std::size_t flush_incomplete_contributions(Tick now) {
        std::size_t incidents = 0;
        for (const auto& [key, shares] : share_buffer_) {
            if (shares.size() < cfg_.aggregator_count) {
                ++incidents;
                log(now, "privacy", "incident",
                    {{"kind", "missing-share"}, {"node", std::to_string(key.first)}});
            }
        }
        share_buffer_.clear();
        return incidents;
    }

    // ---- trust gate on service requests ----------------------------------------------

    ServiceDecision assess_request(std::uint32_t requester, const std::vector<NodeId>& serving,
                                   Tick now) {
        ServiceDecision d;
        if (!cfg_.modules.trust) {
            d.allow = true;
            d.reason = "trust-disabled";
            return d;
        }
        for (auto node : serving) {
            auto it = records_.find(node.id);
            if (it == records_.end() || it->second.status != DeviceStatus::registered) {
                d.allow = false;
                d.reason = "unregistered-node-" + std::to_string(node.id);
                log(now, "trust", "deny", {{"requester", std::to_string(requester)},
                                           {"reason", d.reason}});
                return d;
            }
            // neighbors with history toward the target, uniform weights; the
            // cluster head always has history since it relays the traffic
            trust::NeighborWeights weights;
            for (const auto& [pair, state] : trust_.all()) {
                if (pair.second == node.id && state.encounter_count > 0)
                    weights.entries.push_back({{pair.first}, 1.0});
            }
            double value;
            if (weights.entries.empty()) {
                value = 0.5;  // no history: neutral prior
            } else {
                weights.normalize();
                value = trust_.assess(node, weights);
            }
            d.per_node_trust[node.id] = value;
            if (value < cfg_.trust_threshold) {
                d.allow = false;
                d.reason = "low-trust-node-" + std::to_string(node.id);
                log(now, "trust", "deny",
                    {{"requester", std::to_string(requester)},
                     {"node", std::to_string(node.id)},
                     {"trust", format_double(value)}});
                return d;
            }
        }
        d.allow = true;
        d.reason = "all-above-threshold";
        log(now, "trust", "allow", {{"requester", std::to_string(requester)}});
        return d;
    }

    // ---- secure storage (policy-gated access to stored aggregates) ---------------------

    struct StorageResult {
        bool allowed = false;
        std::string reason;
        std::size_t records = 0;
    };

    StorageResult read_storage(std::uint32_t principal, const abac::AttributeSet& attrs, Tick now) {
        if (cfg_.modules.abac && !abac::evaluate(storage_template_, attrs)) {
            log(now, "abac", "storage-deny", {{"principal", std::to_string(principal)}});
            return {false, "storage-access-denied", 0};
        }
        log(now, "abac", "storage-read", {{"principal", std::to_string(principal)}});
        return {true, "ok", sink_.aggregates.size()};
    }

    StorageResult write_storage(std::uint32_t principal, const abac::AttributeSet& attrs,
                                Tick now) {
        if (cfg_.modules.abac && !abac::evaluate(storage_template_, attrs)) {
            log(now, "abac", "storage-deny", {{"principal", std::to_string(principal)}});
            return {false, "storage-write-denied", 0};
        }
        storage_writes_ += 1;
        log(now, "abac", "storage-write", {{"principal", std::to_string(principal)}});
        return {true, "ok", storage_writes_};
    }

    // ---- helpers / accessors -------------------------------------------------------------

    void send_southbound(Network& net, NodeId head, const SouthboundMessage& msg) {
        Frame f;
        f.src = kGatewayId;
        f.dst = head;
        f.type = MsgType::control;
        f.payload = encode(msg);
        net.transmit(kGatewayId, head, f);
    }

    void log(Tick tick, const std::string& comp, const std::string& ev,
             const std::vector<std::pair<std::string, std::string>>& kv) {
        std::ostringstream os;
        os << "tick=" << tick << " comp=" << comp << " ev=" << ev;
        for (const auto& [k, v] : kv) os << " " << k << "=" << v;
        audit_.push_back(os.str());
    }

    static std::string format_double(double v) {
        std::ostringstream os;
        os.precision(6);
        os << v;
        return os.str();
    }

    const std::map<FlowKey, FlowRecord>& flows() const { return flows_; }
    const std::map<std::uint32_t, DeviceRecord>& device_records() const { return records_; }
    const Sink& sink() const { return sink_; }
    const std::vector<std::string>& audit_log() const { return audit_; }
    const std::vector<mitigation::Alert>& alerts() const { return alerts_; }
    const std::vector<mitigation::Countermeasure>& countermeasures() const {
        return countermeasures_;
    }
    std::uint64_t packets_observed() const { return packets_observed_; }
    trust::TrustStore& trust_store() { return trust_; }
    keymgmt::KeyManager& key_manager() { return keys_; }
    authn::AuthBroker& auth_broker() { return broker_; }
    abac::PolicyStore& policy_store() { return policies_; }
    mitigation::MitigationAgent& mitigation_agent() { return agent_; }
    const std::map<FlowKey, std::uint64_t>& denied_flows() const { return denied_flows_; }
    bool quarantined(std::uint32_t node) const { return quarantined_.count(node) > 0; }
    DetRng& rng() { return rng_; }

private:
    RegisterResult renew_device(const JoinRequestMsg& join, Tick now) {
        NodeId node{join.node};
        try {
            auto pub = ecc::decode_point(curve_, join.pubkey);
            keys_.register_public(node, pub, now);
            auto sak = ecc::derive_shared(curve_, gw_keys_.secret, pub);
            broker_.install_key(node.id, sak, now);
            credential_epoch_[node.id] = keys_.find(node)->epoch;
        } catch (const std::exception& e) {
            return {false, e.what()};
        }
        log(now, "keymgmt", "renew", {{"node", std::to_string(node.id)},
                                      {"epoch", std::to_string(credential_epoch_[node.id])}});
        return {true, "renewed"};
    }

    GatewayConfig cfg_;
    const ecc::Curve& curve_;
    DetRng rng_;
    ecc::KeyPair gw_keys_;

    keymgmt::KeyManager keys_;
    trust::TrustStore trust_;
    authn::AuthBroker broker_;
    abac::PolicyStore policies_;
    mitigation::MitigationAgent agent_;
    abac::AccessTree device_template_;
    abac::AccessTree storage_template_;

    std::map<std::uint32_t, DeviceRecord> records_;
    std::map<std::uint32_t, std::uint32_t> credential_epoch_;
    std::set<std::uint32_t> rejoin_allowed_;
    std::set<std::uint32_t> quarantined_;
    std::map<FlowKey, FlowRecord> flows_;
    std::map<FlowKey, std::uint64_t> denied_flows_;
    // (node, seq) → agg_index → share
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::map<std::uint8_t, std::uint64_t>>
        share_buffer_;
    std::set<std::tuple<std::uint32_t, std::uint32_t, std::uint8_t>> seen_shares_;
    std::set<FlowKey> programmed_;  // flows that already got a rule pushed
    Sink sink_;
    std::vector<std::string> audit_;
    std::vector<mitigation::Alert> alerts_;
    std::vector<mitigation::Countermeasure> countermeasures_;
    std::uint64_t packets_observed_ = 0;
    std::uint64_t storage_writes_ = 0;
    std::uint16_t next_flow_priority_ = 1;
    std::uint16_t next_mitigation_priority_ = 2000;
};

}  // namespace sdiot::gateway
