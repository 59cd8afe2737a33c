#pragma once

#include <filesystem>
#include <fstream>
#include <memory>

#include "sdiot/agents.hpp"
#include "sdiot/scenario.hpp"

namespace sdiot::runner {

using gateway::FlowKey;
using scenario::AttackSpec;
using scenario::ScenarioSpec;

enum class Outcome { prevented, detected, missed };

inline const char* to_string(Outcome o) {
    switch (o) {
        case Outcome::prevented: return "prevented";
        case Outcome::detected: return "detected";
        case Outcome::missed: return "missed";
    }
    return "?";
}

struct AttackOutcome {
    std::size_t index = 0;
    std::string kind;
    Outcome result = Outcome::missed;
    Tick latency = 0;         // ticks from attack start to the flagging window boundary
    bool neutralized = false; // traffic reached zero after the countermeasure
    std::string detail;
};

struct SentReading {
    std::uint32_t node = 0;
    std::uint32_t seq = 0;
    std::uint64_t value = 0;
    Tick tick = 0;
    bool cooperative = true;
};

struct ServiceDecisionRecord {
    Tick tick = 0;
    std::uint32_t requester = 0;
    std::uint32_t serving = 0;
    bool allowed = false;
    std::string reason;
};

struct StorageAccessRecord {
    Tick tick = 0;
    std::uint32_t principal = 0;
    std::string op;
    bool allowed = false;
};

struct RunReport {
    std::string scenario_name;
    std::uint64_t seed = 0;
    Tick duration = 0;
    std::vector<AttackOutcome> outcomes;
    std::map<std::string, std::uint64_t> alert_counts;  // by kind
    std::size_t alert_total = 0;
    std::size_t countermeasure_total = 0;
    std::size_t aggregate_count = 0;
    bool aggregates_checked = false;
    bool aggregates_match = true;
    std::string expected_sum = "0";
    std::string observed_sum = "0";
    std::size_t plaintext_count = 0;
    std::size_t flow_count = 0;
    std::uint64_t packets = 0;
    std::size_t missing_share_incidents = 0;
    std::vector<std::tuple<std::uint32_t, std::uint32_t, double>> trust_values;
    std::vector<std::uint32_t> quarantined;
    std::vector<std::uint32_t> revoked;

    std::string kv() const;
    std::string text() const;
};

// Everything a finished run exposes for inspection; movable only.
struct RunResult {
    ScenarioSpec spec;
    std::unique_ptr<Network> net;
    std::unique_ptr<gateway::GatewayController> controller;
    std::vector<std::unique_ptr<SwitchAgent>> heads;
    std::vector<std::unique_ptr<DeviceAgent>> devices;
    std::vector<SentReading> sent;
    std::vector<ServiceDecisionRecord> service_decisions;
    std::vector<StorageAccessRecord> storage_accesses;
    std::map<std::uint32_t, Tick> scripted_revocations;
    std::vector<AttackOutcome> outcomes;
    RunReport report;
    std::string audit_text;
};

namespace detail {

// Deterministic junk that fails both the cipher decode (byte 4 is not a
// point tag) and the plaintext reading format.
inline Bytes garbage_payload(std::uint32_t claimed_src, std::size_t salt) {
    Bytes b;
    put_u32(b, claimed_src);
    put_u8(b, 0xA5);
    put_u64(b, salt);
    put_u64(b, 0xDEADBEEFCAFEF00Dull ^ salt);
    return b;
}

inline std::vector<std::uint32_t> parse_node_list(const std::string& s) {
    std::vector<std::uint32_t> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, ',')) {
        if (cur.empty()) continue;
        out.push_back(static_cast<std::uint32_t>(std::stoul(cur)));
    }
    return out;
}

inline std::uint64_t reading_value(std::uint64_t base, std::size_t device_index,
                                   std::uint64_t k) {
    return base + ((device_index * 31 + k * 17) % 23);
}

struct AttackContext {
    Tick start = 0;
    std::uint32_t node = 0;
    std::vector<std::uint32_t> nodes;
    FlowKey flow{};
    std::uint64_t forged_value_lo = 0;
    std::uint64_t forged_value_hi = 0;
};

}  // namespace detail

inline RunResult run_scenario(const ScenarioSpec& spec);

inline RunResult run_from_text(const std::string& text) {
    return run_scenario(scenario::parse_scenario(text));
}

// ---- wiring -----------------------------------------------------------------

namespace detail {

inline void classify_outcomes(RunResult& res, const std::vector<AttackContext>& ctx);
inline void build_report(RunResult& res);

}  // namespace detail

inline RunResult run_scenario(const ScenarioSpec& spec) {
    RunResult res;
    res.spec = spec;
    res.net = std::make_unique<Network>(spec.topology);
    Network& net = *res.net;

    gateway::GatewayConfig gcfg;
    gcfg.curve = spec.curve;
    gcfg.modules = spec.modules;
    gcfg.trust_alpha = spec.trust_alpha;
    gcfg.trust_threshold = spec.trust_tau;
    gcfg.detector = spec.detector;
    gcfg.aggregate_mode = spec.aggregate_mode;
    if (!spec.device_policy_template.empty()) gcfg.device_policy_template = spec.device_policy_template;
    if (!spec.storage_policy_template.empty()) gcfg.storage_policy_template = spec.storage_policy_template;
    res.controller = std::make_unique<gateway::GatewayController>(gcfg, spec.topology.seed);
    gateway::GatewayController* ctl = res.controller.get();

    net.set_handler(kGatewayId, [ctl](Network& n, const Frame& f, NodeId hop) {
        ctl->handle_frame(n, f, hop);
    });

    const std::uint32_t dpc = spec.topology.devices_per_cluster;
    for (std::uint32_t c = 0; c < spec.topology.clusters; ++c) {
        std::vector<NodeId> members(net.devices().begin() + c * dpc,
                                    net.devices().begin() + (c + 1) * dpc);
        res.heads.push_back(std::make_unique<SwitchAgent>(net.head_of_cluster(c), members));
        SwitchAgent* sw = res.heads.back().get();
        net.set_handler(sw->id(), [sw](Network& n, const Frame& f, NodeId hop) {
            sw->handle(n, f, hop);
        });
    }

    for (std::size_t i = 0; i < net.devices().size(); ++i) {
        NodeId id = net.devices()[i];
        res.devices.push_back(std::make_unique<DeviceAgent>(
            id, net.head_of_cluster(net.cluster_of(id)), net.cluster_of(id), ctl->curve(),
            ctl->public_point(), spec.topology.seed, spec.modules.privacy,
            gcfg.aggregator_count, gcfg.credential_lifetime));
        // devices only consume downstream frames in these runs
        net.set_handler(id, [](Network&, const Frame&, NodeId) {});
    }

    // Window boundaries first so same-tick arrivals land in the next window.
    for (Tick w = spec.detector.window; w <= spec.duration; w += spec.detector.window) {
        net.schedule(w, [ctl, w](Network& n) { ctl->on_window_boundary(n, w); });
    }

    // Joins at tick 1; readings from tick 4 (registration completes by tick 3).
    for (auto& dev : res.devices) {
        DeviceAgent* d = dev.get();
        net.schedule(1, [d](Network& n) { d->send_join(n); });
    }
    for (std::size_t i = 0; i < res.devices.size(); ++i) {
        DeviceAgent* d = res.devices[i].get();
        std::uint64_t k = 0;
        for (Tick t = 4 + (i % 4); t <= spec.duration; t += spec.reading_period, ++k) {
            std::uint64_t value = detail::reading_value(spec.reading_base, i, k);
            RunResult* rp = &res;
            net.schedule(t, [d, rp, value, t](Network& n) {
                auto sr = d->send_reading(n, value);
                rp->sent.push_back({d->id().id, sr.seq, sr.value, t, sr.cooperative});
            });
        }
    }

    // ---- attack translation ----------------------------------------------------
    const std::uint32_t first_device = 1 + spec.topology.clusters;
    auto head_of = [&](std::uint32_t node) { return net.head_of_cluster(net.cluster_of({node})); };
    auto device_index = [&](std::uint32_t node) {
        return static_cast<std::size_t>(node - first_device);
    };

    AdversaryScript script;
    std::vector<detail::AttackContext> ctx(spec.attacks.size());
    for (std::size_t a = 0; a < spec.attacks.size(); ++a) {
        const AttackSpec& atk = spec.attacks[a];
        detail::AttackContext& c = ctx[a];
        if (atk.kind == "eavesdrop") {
            c.node = static_cast<std::uint32_t>(atk.get_u64("node", first_device));
            script.taps.push_back({{c.node}, head_of(c.node)});
        } else if (atk.kind == "corrupt") {
            c.node = static_cast<std::uint32_t>(atk.get_u64("node", first_device));
            c.start = atk.get_u64("start", 0);
            script.flips.push_back({{c.node},
                                    head_of(c.node),
                                    c.start,
                                    atk.get_u64("end", spec.duration),
                                    static_cast<std::size_t>(atk.get_u64("byte_index", 8))});
        } else if (atk.kind == "replay") {
            c.node = static_cast<std::uint32_t>(atk.get_u64("node", first_device));
            Tick capture_after = atk.get_u64("capture_after", 4);
            Tick replay_at = atk.require_u64("replay_at");
            c.start = replay_at;
            std::uint64_t count = atk.get_u64("count", 6);
            Tick period = atk.get_u64("period", 2);
            for (std::uint64_t j = 0; j < count; ++j)
                script.replays.push_back(
                    {{c.node}, head_of(c.node), capture_after, replay_at + j * period});
        } else if (atk.kind == "flood" || atk.kind == "ddos") {
            if (atk.kind == "ddos") {
                auto listed = detail::parse_node_list(atk.get_str("nodes", ""));
                if (listed.empty()) listed = {first_device, first_device + 1};
                c.nodes = listed;
            } else {
                c.nodes = {static_cast<std::uint32_t>(atk.get_u64("node", first_device))};
            }
            c.start = atk.require_u64("start");
            Tick end = atk.get_u64("end", spec.duration);
            std::uint64_t per_tick = atk.get_u64("per_tick", 8);
            std::uint32_t target = static_cast<std::uint32_t>(atk.get_u64("target", 0));
            for (auto node : c.nodes) {
                for (Tick t = c.start; t < end && t <= spec.duration; ++t) {
                    for (std::uint64_t j = 0; j < per_tick; ++j) {
                        Frame f{{node}, {target}, MsgType::reading,
                                detail::garbage_payload(node, t * 100 + j)};
                        script.injects.push_back({t, {node}, head_of(node), f});
                    }
                }
            }
            c.flow = {c.nodes.front(), target, static_cast<std::uint8_t>(MsgType::reading)};
        } else if (atk.kind == "scan") {
            c.node = static_cast<std::uint32_t>(atk.get_u64("node", first_device));
            c.start = atk.require_u64("start");
            std::uint64_t fanout = atk.get_u64("fanout", spec.detector.scan_fanout_limit + 4);
            Tick period = atk.get_u64("period", 1);
            for (std::uint64_t j = 0; j < fanout; ++j) {
                Frame f{{c.node}, {500 + static_cast<std::uint32_t>(j)}, MsgType::reading,
                        detail::garbage_payload(c.node, j)};
                script.injects.push_back({c.start + j * period, {c.node}, head_of(c.node), f});
            }
        } else if (atk.kind == "fake_id") {
            c.node = static_cast<std::uint32_t>(atk.get_u64("claim", first_device));
            c.start = atk.require_u64("start");
            std::uint64_t count = atk.get_u64("count", 6);
            Tick period = atk.get_u64("period", 2);
            c.forged_value_lo = 99990;
            c.forged_value_hi = 99990 + count;
            for (std::uint64_t j = 0; j < count; ++j) {
                // well-formed plaintext reading under a stolen identity; fails
                // the cipher decode when the privacy module is on
                Frame f{{c.node}, kGatewayId, MsgType::reading,
                        DeviceAgent::plaintext_pattern(50000 + static_cast<std::uint32_t>(j),
                                                       99990 + j)};
                script.injects.push_back({c.start + j * period, {c.node}, head_of(c.node), f});
            }
        } else if (atk.kind == "wrong_key_auth") {
            std::uint32_t victim = static_cast<std::uint32_t>(atk.get_u64("victim", first_device));
            std::uint32_t service = static_cast<std::uint32_t>(atk.get_u64("service", 900));
            c.node = victim;
            c.start = atk.require_u64("start");
            std::uint64_t count = atk.get_u64("count", 6);
            Tick period = atk.get_u64("period", 2);
            if (spec.modules.authn) {
                // the foreign service principal holds its own (wrong) key
                Digest svc_key = sha256(detail::garbage_payload(service, 0xAu));
                ctl->auth_broker().install_key(service, svc_key, 0);
            }
            NodeId victim_head = head_of(victim);
            for (std::uint64_t j = 0; j < count; ++j) {
                Tick t = c.start + j * period;
                if (t > spec.duration) break;
                net.schedule(t, [ctl, victim, victim_head, service, j](Network& n) {
                    std::uint64_t sid = 0;
                    if (ctl->modules().authn)
                        sid = ctl->auth_broker().begin(service, victim, n.now(), ctl->rng()).id;
                    Bytes payload;
                    put_u8(payload, 1);  // op=respond
                    put_u64(payload, sid);
                    payload.resize(payload.size() + 16, 0);  // nonce echo
                    Bytes junk = detail::garbage_payload(victim, j);
                    Digest fake = sha256(junk);  // proof under no key at all
                    payload.insert(payload.end(), fake.begin(), fake.end());
                    Frame f{{victim}, kGatewayId, MsgType::auth, payload};
                    n.transmit({victim}, victim_head, f);
                });
            }
        } else if (atk.kind == "rogue_service") {
            std::uint32_t serving = static_cast<std::uint32_t>(atk.get_u64("serving", first_device));
            std::uint32_t requester = static_cast<std::uint32_t>(atk.get_u64("requester", 901));
            c.node = serving;
            c.start = atk.get_u64("at", spec.duration > 10 ? spec.duration - 10 : spec.duration);
            RunResult* rp = &res;
            net.schedule(c.start, [ctl, rp, requester, serving](Network& n) {
                auto d = ctl->assess_request(requester, {{serving}}, n.now());
                rp->service_decisions.push_back({n.now(), requester, serving, d.allow, d.reason});
            });
        } else if (atk.kind == "unauthorized_flow") {
            c.node = static_cast<std::uint32_t>(atk.get_u64("node", first_device));
            c.start = atk.require_u64("start");
            std::uint32_t target = static_cast<std::uint32_t>(atk.get_u64("target", 0));
            std::uint64_t count = atk.get_u64("count", 5);
            Tick period = atk.get_u64("period", 10);
            c.flow = {c.node, target, static_cast<std::uint8_t>(MsgType::control)};
            for (std::uint64_t j = 0; j < count; ++j) {
                Frame f{{c.node}, {target}, MsgType::control,
                        detail::garbage_payload(c.node, j)};
                script.injects.push_back({c.start + j * period, {c.node}, head_of(c.node), f});
            }
        } else if (atk.kind == "storage_access") {
            c.node = static_cast<std::uint32_t>(atk.get_u64("principal", 901));
            c.start = atk.get_u64("at", spec.duration > 10 ? spec.duration - 10 : spec.duration);
            std::string role = atk.get_str("role", "sensor");
            std::string op = atk.get_str("op", "read");
            std::uint32_t principal = c.node;
            RunResult* rp = &res;
            net.schedule(c.start, [ctl, rp, principal, role, op](Network& n) {
                abac::AttributeSet attrs;
                attrs["role"] = role;
                auto r = op == "write" ? ctl->write_storage(principal, attrs, n.now())
                                       : ctl->read_storage(principal, attrs, n.now());
                rp->storage_accesses.push_back({n.now(), principal, op, r.allowed});
            });
        } else if (atk.kind == "revoked_send") {
            c.node = static_cast<std::uint32_t>(atk.get_u64("node", first_device));
            c.start = atk.require_u64("revoke_at");
            std::uint32_t node = c.node;
            RunResult* rp = &res;
            net.schedule(c.start, [ctl, rp, node](Network& n) {
                ctl->revoke(n, {{node}}, "scenario-revocation", n.now());
                rp->scripted_revocations[node] = n.now();
            });
        } else if (atk.kind == "misbehave") {
            c.node = static_cast<std::uint32_t>(atk.get_u64("node", first_device));
            double p = atk.get_f64("cooperate_prob", 0.2);
            res.devices.at(device_index(c.node))->set_cooperate_prob(p);
        }
    }
    if (!script.empty()) net.attach_adversary(script);

    net.run_until(spec.duration);
    res.controller->flush_incomplete_contributions(spec.duration);

    detail::classify_outcomes(res, ctx);
    detail::build_report(res);
    std::ostringstream audit;
    for (const auto& line : res.controller->audit_log()) audit << line << "\n";
    res.audit_text = audit.str();
    return res;
}

// ---- outcome classification ---------------------------------------------------

namespace detail {

inline const mitigation::Alert* first_alert(const RunResult& res,
                                            std::initializer_list<mitigation::AlertKind> kinds,
                                            Tick not_before,
                                            std::optional<std::uint32_t> node = std::nullopt) {
    for (const auto& a : res.controller->alerts()) {
        bool kind_ok = false;
        for (auto k : kinds) kind_ok |= a.kind == k;
        if (!kind_ok || a.window_end < not_before) continue;
        if (node && a.node && *a.node != *node) continue;
        return &a;
    }
    return nullptr;
}

// Scans the plaintext sink against what devices actually sent.
struct TaintScan {
    bool corrupted = false;   // accepted value differs from the sent one
    bool duplicated = false;  // same (src, seq) accepted more than once
    bool forged = false;      // accepted (src, seq) never sent
};

inline TaintScan scan_plaintext(const RunResult& res, std::uint32_t node) {
    TaintScan t;
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::pair<std::uint64_t, bool>> sent;
    for (const auto& s : res.sent) sent[{s.node, s.seq}] = {s.value, s.cooperative};
    std::map<std::pair<std::uint32_t, std::uint32_t>, int> seen;
    for (const auto& r : res.controller->sink().plaintext_readings) {
        if (r.src != node) continue;
        auto key = std::make_pair(r.src, r.seq);
        auto it = sent.find(key);
        if (it == sent.end()) {
            t.forged = true;
        } else if (it->second.second && it->second.first != r.value) {
            // defecting senders corrupt their own payloads; don't count those
            t.corrupted = true;
        }
        if (++seen[key] > 1) t.duplicated = true;
    }
    return t;
}

inline void classify_outcomes(RunResult& res, const std::vector<AttackContext>& ctx) {
    using mitigation::AlertKind;
    const auto& spec = res.spec;
    for (std::size_t a = 0; a < spec.attacks.size(); ++a) {
        const AttackSpec& atk = spec.attacks[a];
        const AttackContext& c = ctx[a];
        AttackOutcome out;
        out.index = a;
        out.kind = atk.kind;

        if (atk.kind == "eavesdrop") {
            bool leaked = false;
            std::set<std::pair<std::uint32_t, std::uint64_t>> plain;
            for (const auto& s : res.sent)
                if (s.node == c.node && s.cooperative) plain.insert({s.seq, s.value});
            for (const auto& rec : res.net->transcript()) {
                if (rec.frame.src.id != c.node || rec.frame.type != MsgType::reading) continue;
                for (const auto& [seq, value] : plain) {
                    if (rec.frame.payload ==
                        DeviceAgent::plaintext_pattern(static_cast<std::uint32_t>(seq), value)) {
                        leaked = true;
                        break;
                    }
                }
                if (leaked) break;
            }
            out.result = leaked ? Outcome::missed : Outcome::prevented;
            out.detail = leaked ? "plaintext visible on tapped link" : "tap saw ciphertext only";
        } else if (atk.kind == "corrupt") {
            auto taint = scan_plaintext(res, c.node);
            const auto* alert =
                first_alert(res, {AlertKind::injection, AlertKind::spoofing}, c.start, c.node);
            if (taint.corrupted) {
                out.result = Outcome::missed;
                out.detail = "corrupted value accepted by sink";
            } else if (alert) {
                out.result = Outcome::detected;
                out.latency = alert->window_end - c.start;
                out.detail = "integrity alert raised";
            } else {
                out.result = Outcome::prevented;
                out.detail = "corrupted frames rejected";
            }
        } else if (atk.kind == "replay") {
            auto taint = scan_plaintext(res, c.node);
            const auto* alert = first_alert(res, {AlertKind::injection}, c.start, c.node);
            if (taint.duplicated) {
                out.result = Outcome::missed;
                out.detail = "replayed reading accepted twice";
            } else if (alert) {
                out.result = Outcome::detected;
                out.latency = alert->window_end - c.start;
                out.detail = "replay burst flagged as injection";
            } else if (spec.modules.privacy) {
                out.result = Outcome::prevented;
                out.detail = "duplicate shares rejected";
            } else {
                out.result = Outcome::missed;
                out.detail = "no replay evidence recorded";
            }
        } else if (atk.kind == "flood" || atk.kind == "ddos") {
            AlertKind want = atk.kind == "ddos" ? AlertKind::ddos : AlertKind::dos;
            const auto* alert = first_alert(res, {want}, c.start);
            if (alert) {
                out.result = Outcome::detected;
                out.latency = alert->window_end - c.start;
                Tick w = spec.detector.window;
                std::uint64_t next_window = alert->window_end / w + 1;
                std::uint64_t leaked = 0;
                for (auto node : c.nodes) {
                    FlowKey fk{node, c.flow.dst, c.flow.type};
                    const auto& per = res.controller->sink().delivered_per_window;
                    auto it = per.find(fk);
                    if (it != per.end()) {
                        auto wit = it->second.find(next_window);
                        if (wit != it->second.end()) leaked += wit->second;
                    }
                }
                out.neutralized = leaked == 0;
                out.detail = "rate alert; post-countermeasure deliveries=" + std::to_string(leaked);
            } else {
                out.result = Outcome::missed;
                out.detail = "no rate alert";
            }
        } else if (atk.kind == "scan") {
            const auto* alert = first_alert(res, {AlertKind::scan}, c.start, c.node);
            if (alert) {
                out.result = Outcome::detected;
                out.latency = alert->window_end - c.start;
                out.detail = "fanout alert raised";
            } else {
                out.result = Outcome::missed;
                out.detail = "fanout unnoticed";
            }
        } else if (atk.kind == "fake_id") {
            auto taint = scan_plaintext(res, c.node);
            const auto* alert = first_alert(res, {AlertKind::spoofing}, c.start, c.node);
            if (taint.forged) {
                out.result = Outcome::missed;
                out.detail = "forged reading accepted under stolen id";
            } else if (alert) {
                out.result = Outcome::detected;
                out.latency = alert->window_end - c.start;
                out.detail = "spoofing alert raised";
            } else {
                out.result = Outcome::prevented;
                out.detail = "forged frames rejected";
            }
        } else if (atk.kind == "wrong_key_auth") {
            const auto* alert = first_alert(res, {AlertKind::impersonation}, c.start, c.node);
            bool any_mutual = false;
            // attack sessions are the ones initiated by the foreign principal
            for (std::uint64_t sid = 1; sid <= res.controller->auth_broker().session_count();
                 ++sid) {
                const auto* s = res.controller->auth_broker().find(sid);
                if (s && s->initiator >= 900 && s->state == authn::SessionState::mutual)
                    any_mutual = true;
            }
            if (any_mutual) {
                out.result = Outcome::missed;
                out.detail = "session reached mutual under a wrong key";
            } else if (alert) {
                out.result = Outcome::detected;
                out.latency = alert->window_end - c.start;
                out.detail = "auth failures flagged as impersonation";
            } else if (spec.modules.authn) {
                out.result = Outcome::prevented;
                out.detail = "all forged proofs rejected";
            } else {
                out.result = Outcome::missed;
                out.detail = "no authentication in place";
            }
        } else if (atk.kind == "rogue_service") {
            bool denied = false, any = false;
            for (const auto& d : res.service_decisions) {
                if (d.serving != c.node) continue;
                any = true;
                if (!d.allowed) denied = true;
            }
            out.result = any && denied ? Outcome::prevented : Outcome::missed;
            out.detail = denied ? "low-trust node excluded from service"
                                : "untrusted node admitted to service";
        } else if (atk.kind == "unauthorized_flow") {
            auto it = res.controller->denied_flows().find(c.flow);
            if (it != res.controller->denied_flows().end() && it->second > 0) {
                out.result = Outcome::prevented;
                out.detail = "flow denied at setup";
            } else {
                out.result = Outcome::missed;
                out.detail = "unauthorized flow forwarded";
            }
        } else if (atk.kind == "storage_access") {
            bool denied = false, any = false;
            for (const auto& s : res.storage_accesses) {
                if (s.principal != c.node) continue;
                any = true;
                if (!s.allowed) denied = true;
            }
            out.result = any && denied ? Outcome::prevented : Outcome::missed;
            out.detail = denied ? "storage access denied" : "storage access allowed";
        } else if (atk.kind == "revoked_send") {
            auto taint_accepted = [&] {
                Tick revoked_at = c.start;
                std::set<std::uint32_t> post_seqs;
                for (const auto& s : res.sent)
                    if (s.node == c.node && s.tick > revoked_at) post_seqs.insert(s.seq);
                for (const auto& r : res.controller->sink().plaintext_readings)
                    if (r.src == c.node && post_seqs.count(r.seq)) return true;
                return false;
            }();
            FlowKey fk{c.node, 0, static_cast<std::uint8_t>(MsgType::reading)};
            auto fit = res.controller->flows().find(fk);
            bool rejections = fit != res.controller->flows().end() && fit->second.auth_failures > 0;
            const auto* alert = first_alert(res, {AlertKind::impersonation}, c.start, c.node);
            if (taint_accepted) {
                out.result = Outcome::missed;
                out.detail = "post-revocation reading accepted";
            } else if (alert) {
                out.result = Outcome::detected;
                out.latency = alert->window_end - c.start;
                out.detail = "revoked sender flagged";
            } else if (rejections) {
                out.result = Outcome::prevented;
                out.detail = "post-revocation frames rejected";
            } else {
                out.result = Outcome::missed;
                out.detail = "no rejection evidence";
            }
        } else if (atk.kind == "misbehave") {
            double value = 0.5;
            bool have = false;
            if (spec.modules.trust) {
                trust::NeighborWeights w;
                for (const auto& [pair, state] : res.controller->trust_store().all()) {
                    if (pair.second == c.node && state.encounter_count > 0)
                        w.entries.push_back({{pair.first}, 1.0});
                }
                if (!w.entries.empty()) {
                    w.normalize();
                    value = res.controller->trust_store().assess({c.node}, w);
                    have = true;
                }
            }
            if (have && value < spec.trust_tau) {
                out.result = Outcome::detected;
                out.detail = "trust fell below tau";
            } else {
                out.result = Outcome::missed;
                out.detail = have ? "trust stayed above tau" : "no trust evidence";
            }
        }
        res.outcomes.push_back(std::move(out));
    }
}

// True when the run's traffic allows an exact aggregate cross-check.
inline bool aggregates_checkable(const ScenarioSpec& spec) {
    if (!spec.modules.privacy) return false;
    if (spec.topology.link_loss_rate > 0.0) return false;
    static const std::set<std::string> benign = {"eavesdrop", "storage_access", "rogue_service",
                                                 "unauthorized_flow"};
    for (const auto& a : spec.attacks)
        if (!benign.count(a.kind)) return false;
    return true;
}

inline void build_report(RunResult& res) {
    RunReport& rpt = res.report;
    const auto& spec = res.spec;
    rpt.scenario_name = spec.name;
    rpt.seed = spec.topology.seed;
    rpt.duration = spec.duration;
    rpt.outcomes = res.outcomes;
    for (const auto& a : res.controller->alerts())
        rpt.alert_counts[mitigation::to_string(a.kind)] += 1;
    rpt.alert_total = res.controller->alerts().size();
    rpt.countermeasure_total = res.controller->countermeasures().size();
    rpt.aggregate_count = res.controller->sink().aggregates.size();
    rpt.plaintext_count = res.controller->sink().plaintext_readings.size();
    rpt.flow_count = res.controller->flows().size();
    rpt.packets = res.controller->packets_observed();
    for (const auto& line : res.controller->audit_log())
        if (line.find("ev=incident") != std::string::npos) rpt.missing_share_incidents += 1;

    if (aggregates_checkable(spec)) {
        rpt.aggregates_checked = true;
        Tick last_boundary = (spec.duration / spec.detector.window) * spec.detector.window;
        privacy::Int expected = 0;
        for (const auto& s : res.sent)
            if (s.cooperative && s.tick + 2 < last_boundary) expected += s.value;
        privacy::Int observed = 0;
        for (const auto& agg : res.controller->sink().aggregates) observed += agg.sum;
        rpt.expected_sum = expected.str();
        rpt.observed_sum = observed.str();
        rpt.aggregates_match = expected == observed;
    }

    for (const auto& [pair, state] : res.controller->trust_store().all())
        rpt.trust_values.emplace_back(pair.first, pair.second, state.reputation);
    for (const auto& [id, rec] : res.controller->device_records()) {
        if (rec.status == gateway::DeviceStatus::revoked) rpt.revoked.push_back(id);
        if (res.controller->quarantined(id)) rpt.quarantined.push_back(id);
    }
}

}  // namespace detail

// ---- report rendering -----------------------------------------------------------

inline std::string RunReport::kv() const {
    std::ostringstream os;
    os << "scenario=" << scenario_name << "\n";
    os << "seed=" << seed << "\n";
    os << "duration=" << duration << "\n";
    os << "packets=" << packets << "\n";
    os << "flows=" << flow_count << "\n";
    os << "alerts.total=" << alert_total << "\n";
    for (const auto& [kind, n] : alert_counts) os << "alerts." << kind << "=" << n << "\n";
    os << "countermeasures.total=" << countermeasure_total << "\n";
    os << "aggregates.count=" << aggregate_count << "\n";
    os << "aggregates.checked=" << (aggregates_checked ? 1 : 0) << "\n";
    if (aggregates_checked) {
        os << "aggregates.match=" << (aggregates_match ? 1 : 0) << "\n";
        os << "aggregates.expected=" << expected_sum << "\n";
        os << "aggregates.observed=" << observed_sum << "\n";
    }
    os << "sink.plaintext=" << plaintext_count << "\n";
    os << "incidents.missing_share=" << missing_share_incidents << "\n";
    for (const auto& o : outcomes) {
        os << "outcome." << o.index << ".kind=" << o.kind << "\n";
        os << "outcome." << o.index << ".result=" << to_string(o.result) << "\n";
        if (o.result == Outcome::detected) {
            os << "outcome." << o.index << ".latency=" << o.latency << "\n";
            os << "outcome." << o.index << ".neutralized=" << (o.neutralized ? 1 : 0) << "\n";
        }
        os << "outcome." << o.index << ".detail=" << o.detail << "\n";
    }
    for (const auto& [obs, subj, rep] : trust_values)
        os << "trust." << obs << "." << subj << "="
           << gateway::GatewayController::format_double(rep) << "\n";
    auto list = [&](const char* key, const std::vector<std::uint32_t>& v) {
        os << key << "=";
        for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
        os << "\n";
    };
    list("revoked", revoked);
    list("quarantined", quarantined);
    return os.str();
}

inline std::string RunReport::text() const {
    std::ostringstream os;
    os << "Run '" << scenario_name << "' (seed " << seed << ", " << duration << " ticks)\n";
    os << "  traffic: " << packets << " packets over " << flow_count << " flows, "
       << aggregate_count << " aggregates, " << plaintext_count << " plaintext readings\n";
    os << "  alerts: " << alert_total;
    for (const auto& [kind, n] : alert_counts) os << " " << kind << "=" << n;
    os << "; countermeasures: " << countermeasure_total << "\n";
    if (aggregates_checked)
        os << "  aggregate cross-check: " << (aggregates_match ? "match" : "MISMATCH")
           << " (expected " << expected_sum << ", observed " << observed_sum << ")\n";
    if (missing_share_incidents)
        os << "  incidents: " << missing_share_incidents << " incomplete contributions\n";
    for (const auto& o : outcomes) {
        os << "  attack[" << o.index << "] " << o.kind << ": " << to_string(o.result);
        if (o.result == Outcome::detected)
            os << " (latency " << o.latency << " ticks"
               << (o.neutralized ? ", neutralized" : "") << ")";
        os << " - " << o.detail << "\n";
    }
    return os.str();
}

inline void write_outputs(const RunResult& res, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto dump = [&](const char* name, const std::string& content) {
        std::ofstream out(dir / name, std::ios::binary);
        if (!out) throw ConfigError("cannot write " + (dir / name).string());
        out << content;
    };
    dump("report.txt", res.report.text());
    dump("report.kv", res.report.kv());
    dump("audit.log", res.audit_text);
}

}  // namespace sdiot::runner
