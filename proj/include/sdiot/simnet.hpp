#pragma once

#include <functional>
#include <map>
#include <queue>
#include <set>
#include <sstream>

#include "sdiot/southbound.hpp"
#include "sdiot/util.hpp"

namespace sdiot {

struct TopologySpec {
    std::uint32_t clusters = 1;
    std::uint32_t devices_per_cluster = 1;
    double link_loss_rate = 0.0;
    std::uint64_t seed = 1;

    void validate() const {
        if (clusters == 0) throw ConfigError("clusters must be >= 1");
        if (devices_per_cluster == 0) throw ConfigError("devices_per_cluster must be >= 1");
        if (link_loss_rate < 0.0 || link_loss_rate > 1.0)
            throw ConfigError("link_loss_rate must be in [0,1]");
    }
};

enum class NodeRole { gateway, cluster_head, device };

enum class EventKind { deliver, drop, timer, adversary };

inline const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::deliver: return "deliver";
        case EventKind::drop: return "drop";
        case EventKind::timer: return "timer";
        case EventKind::adversary: return "adversary";
    }
    return "?";
}

struct SimEvent {
    Tick tick = 0;
    EventKind kind = EventKind::deliver;
    NodeId src;
    NodeId dst;
    Bytes payload;
};

struct EventLog {
    std::vector<SimEvent> events;

    std::string render() const {
        std::ostringstream os;
        for (const auto& e : events) {
            os << "tick=" << e.tick << " kind=" << to_string(e.kind) << " src=" << e.src.id
               << " dst=" << e.dst.id << " payload=" << to_hex(e.payload) << "\n";
        }
        return os.str();
    }
};

// Undirected link key; links are device↔head and head↔gateway stars.
struct LinkKey {
    std::uint32_t lo, hi;
    LinkKey(NodeId a, NodeId b) : lo(std::min(a.id, b.id)), hi(std::max(a.id, b.id)) {}
    auto operator<=>(const LinkKey&) const = default;
};

struct LinkStats {
    std::uint64_t sends = 0;
    std::uint64_t delivers = 0;
    std::uint64_t drops = 0;
};

struct AdversaryScript {
    struct Tap {
        NodeId a, b;
    };
    struct Flip {
        NodeId a, b;
        Tick start = 0;
        Tick end = UINT64_MAX;
        std::size_t byte_index = 0;
    };
    struct Inject {
        Tick tick = 0;
        NodeId hop_from, hop_to;  // link the forged frame appears on
        Frame frame;
    };
    struct Replay {
        NodeId a, b;              // tapped link to capture from
        Tick capture_after = 0;   // first frame seen at/after this tick
        Tick replay_at = 0;
    };

    std::vector<Tap> taps;
    std::vector<Flip> flips;
    std::vector<Inject> injects;
    std::vector<Replay> replays;

    bool empty() const {
        return taps.empty() && flips.empty() && injects.empty() && replays.empty();
    }
};

struct TapRecord {
    Tick tick = 0;
    Frame frame;
    std::uint32_t link_lo = 0;
    std::uint32_t link_hi = 0;
};

class Network {
public:
    using Handler = std::function<void(Network&, const Frame&, NodeId hop_from)>;
    using TimerFn = std::function<void(Network&)>;

    explicit Network(TopologySpec spec) : spec_(spec) {
        spec_.validate();
        add_node(kGatewayId, NodeRole::gateway, 0);
        std::uint32_t next = 1;
        for (std::uint32_t c = 0; c < spec_.clusters; ++c) {
            NodeId head{next++};
            add_node(head, NodeRole::cluster_head, c);
            add_link(head, kGatewayId);
            heads_.push_back(head);
        }
        for (std::uint32_t c = 0; c < spec_.clusters; ++c) {
            for (std::uint32_t d = 0; d < spec_.devices_per_cluster; ++d) {
                NodeId dev{next++};
                add_node(dev, NodeRole::device, c);
                add_link(dev, heads_[c]);
                devices_.push_back(dev);
            }
        }
    }

    const TopologySpec& spec() const { return spec_; }
    Tick now() const { return now_; }
    const std::vector<NodeId>& cluster_heads() const { return heads_; }
    const std::vector<NodeId>& devices() const { return devices_; }

    bool has_node(NodeId n) const { return nodes_.count(n.id) > 0; }

    NodeRole role_of(NodeId n) const { return node(n).role; }
    std::uint32_t cluster_of(NodeId n) const { return node(n).cluster; }
    NodeId head_of_cluster(std::uint32_t c) const { return heads_.at(c); }

    std::size_t entity_count() const { return nodes_.size(); }

    void set_handler(NodeId n, Handler h) { node(n).handler = std::move(h); }

    DetRng node_rng(NodeId n, std::string_view purpose) const {
        std::uint64_t h = spec_.seed;
        for (char c : purpose) h = splitmix64(h ^ static_cast<std::uint8_t>(c));
        return DetRng(splitmix64(splitmix64(h) ^ n.id));
    }

    // Single-hop transmission with per-hop delay of 1 tick. The loss roll
    // happens at send time on the link's own stream, so a replay oracle can
    // reproduce the drop sequence.
    void transmit(NodeId hop_from, NodeId hop_to, const Frame& frame) {
        LinkKey key(hop_from, hop_to);
        auto lit = links_.find(key);
        if (lit == links_.end()) throw ConfigError("no link between nodes");
        lit->second.stats.sends += 1;
        bool lost = lit->second.rng.chance(spec_.link_loss_rate);
        push_event({now_ + 1, lost ? EventKind::drop : EventKind::deliver, hop_from, hop_to,
                    encode_frame(frame)});
    }

    void schedule(Tick at, TimerFn fn, NodeId owner = kGatewayId) {
        if (at < now_) throw ConfigError("cannot schedule in the past");
        timers_.push_back(std::move(fn));
        SimEvent ev{at, EventKind::timer, owner, owner, {}};
        Bytes ref;
        put_u64(ref, timers_.size() - 1);
        ev.payload = ref;
        push_event(ev);
    }

    void attach_adversary(const AdversaryScript& script) {
        auto check = [&](NodeId a, NodeId b) {
            if (!has_node(a) || !has_node(b)) throw ConfigError("adversary references unknown node");
            if (links_.find(LinkKey(a, b)) == links_.end())
                throw ConfigError("adversary references nonexistent link");
        };
        for (const auto& t : script.taps) {
            check(t.a, t.b);
            taps_.insert(LinkKey(t.a, t.b));
        }
        for (const auto& f : script.flips) {
            check(f.a, f.b);
            flips_.push_back(f);
        }
        for (const auto& i : script.injects) {
            check(i.hop_from, i.hop_to);
            push_event({i.tick, EventKind::adversary, i.hop_from, i.hop_to, encode_frame(i.frame)});
        }
        for (const auto& r : script.replays) {
            check(r.a, r.b);
            taps_.insert(LinkKey(r.a, r.b));  // replays observe through a tap
            replays_.push_back(r);
            Bytes marker;
            put_u64(marker, replays_.size() - 1);
            push_event({r.replay_at, EventKind::adversary, r.a, r.b, marker});
        }
    }

    // Processes all events with timestamp <= tick; returns the delta log.
    EventLog run_until(Tick tick) {
        if (tick < now_) throw ConfigError("run_until target before current tick");
        EventLog delta;
        while (!queue_.empty() && queue_.top().ev.tick <= tick) {
            Queued q = queue_.top();
            queue_.pop();
            now_ = std::max(now_, q.ev.tick);
            process(q.ev);
            delta.events.push_back(q.ev);
            full_log_.events.push_back(q.ev);
        }
        now_ = std::max(now_, tick);
        return delta;
    }

    const EventLog& log() const { return full_log_; }
    const std::map<LinkKey, LinkStats> link_stats() const {
        std::map<LinkKey, LinkStats> out;
        for (const auto& [k, l] : links_) out[k] = l.stats;
        return out;
    }

    const std::vector<TapRecord>& transcript() const { return transcript_; }

private:
    struct Node {
        NodeRole role;
        std::uint32_t cluster;
        Handler handler;
    };
    struct Link {
        DetRng rng;
        LinkStats stats;
    };
    struct Queued {
        SimEvent ev;
        std::uint64_t seq;
        bool operator<(const Queued& o) const {
            // priority_queue is max-first; invert for (tick, insertion) order
            if (ev.tick != o.ev.tick) return ev.tick > o.ev.tick;
            return seq > o.seq;
        }
    };

    Node& node(NodeId n) {
        auto it = nodes_.find(n.id);
        if (it == nodes_.end()) throw ConfigError("unknown node " + std::to_string(n.id));
        return it->second;
    }
    const Node& node(NodeId n) const {
        auto it = nodes_.find(n.id);
        if (it == nodes_.end()) throw ConfigError("unknown node " + std::to_string(n.id));
        return it->second;
    }

    void add_node(NodeId n, NodeRole role, std::uint32_t cluster) {
        nodes_.emplace(n.id, Node{role, cluster, {}});
    }

    void add_link(NodeId a, NodeId b) {
        LinkKey key(a, b);
        std::uint64_t h = splitmix64(spec_.seed ^ 0x6C696E6Bull);  // "link" domain
        h = splitmix64(h ^ key.lo);
        h = splitmix64(h ^ key.hi);
        links_.emplace(key, Link{DetRng(h), {}});
    }

    void push_event(SimEvent ev) { queue_.push({std::move(ev), seq_++}); }

    void deliver_on_link(const SimEvent& ev, bool adversarial) {
        Frame frame = decode_frame(ev.payload);
        LinkKey key(ev.src, ev.dst);
        for (const auto& f : flips_) {
            if (LinkKey(f.a, f.b) == key && ev.tick >= f.start && ev.tick <= f.end &&
                f.byte_index < frame.payload.size()) {
                frame.payload[f.byte_index] ^= 0xFF;
            }
        }
        if (taps_.count(key)) transcript_.push_back({ev.tick, frame, key.lo, key.hi});
        if (!adversarial) {
            auto it = links_.find(key);
            it->second.stats.delivers += 1;
        }
        auto& n = node(ev.dst);
        if (n.handler) n.handler(*this, frame, ev.src);
    }

    void process(const SimEvent& ev) {
        switch (ev.kind) {
            case EventKind::deliver:
                deliver_on_link(ev, false);
                break;
            case EventKind::drop: {
                auto it = links_.find(LinkKey(ev.src, ev.dst));
                it->second.stats.drops += 1;
                break;
            }
            case EventKind::timer: {
                ByteReader r(ev.payload);
                timers_.at(r.u64())(*this);
                break;
            }
            case EventKind::adversary: {
                if (ev.payload.size() == 8) {
                    // replay marker: re-deliver the first captured frame
                    ByteReader r(ev.payload);
                    const auto& rp = replays_.at(r.u64());
                    LinkKey want(rp.a, rp.b);
                    for (const auto& rec : transcript_) {
                        if (rec.tick >= rp.capture_after && LinkKey({rec.link_lo}, {rec.link_hi}) == want) {
                            SimEvent dup{ev.tick, EventKind::adversary, ev.src, ev.dst,
                                         encode_frame(rec.frame)};
                            deliver_on_link(dup, true);
                            break;
                        }
                    }
                } else {
                    deliver_on_link(ev, true);
                }
                break;
            }
        }
    }

    TopologySpec spec_;
    Tick now_ = 0;
    std::uint64_t seq_ = 0;
    std::map<std::uint32_t, Node> nodes_;
    std::map<LinkKey, Link> links_;
    std::vector<NodeId> heads_;
    std::vector<NodeId> devices_;
    std::priority_queue<Queued> queue_;
    std::vector<TimerFn> timers_;
    EventLog full_log_;

    std::set<LinkKey> taps_;
    std::vector<AdversaryScript::Flip> flips_;
    std::vector<AdversaryScript::Replay> replays_;
    std::vector<TapRecord> transcript_;
};

}  // namespace sdiot
