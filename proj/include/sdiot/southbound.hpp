#pragma once

#include <algorithm>
#include <optional>
#include <variant>

#include "sdiot/util.hpp"

namespace sdiot {

// ---- data-plane frame -------------------------------------------------------

enum class MsgType : std::uint8_t {
    reading = 0,
    join = 1,
    auth = 2,
    service = 3,
    control = 4,
};

inline constexpr std::uint8_t kWildcardType = 0xFF;

inline const char* to_string(MsgType t) {
    switch (t) {
        case MsgType::reading: return "reading";
        case MsgType::join: return "join";
        case MsgType::auth: return "auth";
        case MsgType::service: return "service";
        case MsgType::control: return "control";
    }
    return "?";
}

// The unit carried on links: src u32 ‖ dst u32 ‖ type u8 ‖ len u16 ‖ payload.
struct Frame {
    NodeId src;
    NodeId dst;
    MsgType type = MsgType::reading;
    Bytes payload;

    bool operator==(const Frame&) const = default;
};

inline Bytes encode_frame(const Frame& f) {
    Bytes out;
    put_u32(out, f.src.id);
    put_u32(out, f.dst.id);
    put_u8(out, static_cast<std::uint8_t>(f.type));
    if (f.payload.size() > 0xFFFF) throw CodecError("frame payload too large");
    put_u16(out, static_cast<std::uint16_t>(f.payload.size()));
    out.insert(out.end(), f.payload.begin(), f.payload.end());
    return out;
}

inline Frame read_frame(ByteReader& r) {
    Frame f;
    f.src = {r.u32()};
    f.dst = {r.u32()};
    std::uint8_t t = r.u8();
    if (t > 4) throw CodecError("bad msg_type");
    f.type = static_cast<MsgType>(t);
    f.payload = r.bytes(r.u16());
    return f;
}

inline Frame decode_frame(std::span<const std::uint8_t> data) {
    ByteReader r(data);
    Frame f = read_frame(r);
    if (!r.done()) throw CodecError("trailing bytes after frame");
    return f;
}

// ---- flow table --------------------------------------------------------------

struct FlowMatch {
    std::uint32_t src = kWildcardNode;   // 0xFFFFFFFF = wildcard
    std::uint32_t dst = kWildcardNode;
    std::uint8_t msg_type = kWildcardType;  // 0xFF = wildcard

    bool operator==(const FlowMatch&) const = default;

    bool fully_wild() const {
        return src == kWildcardNode && dst == kWildcardNode && msg_type == kWildcardType;
    }

    bool matches(const Frame& f) const {
        if (src != kWildcardNode && src != f.src.id) return false;
        if (dst != kWildcardNode && dst != f.dst.id) return false;
        if (msg_type != kWildcardType && msg_type != static_cast<std::uint8_t>(f.type))
            return false;
        return true;
    }
};

enum class ActionKind : std::uint8_t { forward = 0, drop = 1, to_controller = 2 };

struct Action {
    ActionKind kind = ActionKind::to_controller;
    std::uint16_t port = 0;  // meaningful for forward only

    bool operator==(const Action&) const = default;
};

struct FlowEntry {
    FlowMatch match;
    std::uint16_t priority = 0;
    Action action;
    std::uint64_t packets = 0;
    std::uint64_t bytes = 0;
};

struct FlowModMsg {
    std::uint8_t op = 0;  // 0 = add, 1 = del
    std::uint16_t priority = 0;
    FlowMatch match;
    Action action;

    bool operator==(const FlowModMsg&) const = default;
};

enum class FlowModResult { ok, duplicate_priority, no_such_entry, table_full, bad_match };

inline const char* to_string(FlowModResult r) {
    switch (r) {
        case FlowModResult::ok: return "ok";
        case FlowModResult::duplicate_priority: return "duplicate_priority";
        case FlowModResult::no_such_entry: return "no_such_entry";
        case FlowModResult::table_full: return "table_full";
        case FlowModResult::bad_match: return "bad_match";
    }
    return "?";
}

// Single-table switch pipeline. Priority ties are rejected at install time
// so matching is deterministic; table-miss goes to the controller.
class FlowTable {
public:
    explicit FlowTable(std::size_t capacity = 64) : capacity_(capacity) {}

    FlowModResult apply(const FlowModMsg& mod) {
        if (mod.op == 0) {
            if (mod.match.fully_wild()) return FlowModResult::bad_match;
            for (const auto& e : entries_)
                if (e.priority == mod.priority) return FlowModResult::duplicate_priority;
            if (entries_.size() >= capacity_) return FlowModResult::table_full;
            entries_.push_back({mod.match, mod.priority, mod.action, 0, 0});
            std::sort(entries_.begin(), entries_.end(),
                      [](const FlowEntry& a, const FlowEntry& b) { return a.priority > b.priority; });
            return FlowModResult::ok;
        }
        auto it = std::find_if(entries_.begin(), entries_.end(),
                               [&](const FlowEntry& e) { return e.match == mod.match; });
        if (it == entries_.end()) return FlowModResult::no_such_entry;
        entries_.erase(it);
        return FlowModResult::ok;
    }

    // Highest-priority matching entry wins; counters on the winner update.
    Action match_packet(const Frame& f) {
        for (auto& e : entries_) {
            if (e.match.matches(f)) {
                e.packets += 1;
                e.bytes += f.payload.size();
                return e.action;
            }
        }
        table_miss_ += 1;
        return {ActionKind::to_controller, 0};
    }

    const std::vector<FlowEntry>& entries() const { return entries_; }
    std::uint64_t table_miss_count() const { return table_miss_; }
    std::size_t capacity() const { return capacity_; }

private:
    std::size_t capacity_;
    std::vector<FlowEntry> entries_;  // kept sorted by descending priority
    std::uint64_t table_miss_ = 0;
};

// ---- southbound messages ------------------------------------------------------

struct HelloMsg {
    std::uint32_t node = 0;
    bool operator==(const HelloMsg&) const = default;
};

struct JoinRequestMsg {
    std::uint32_t node = 0;
    Bytes pubkey;  // point encoding, opaque at this layer
    bool operator==(const JoinRequestMsg&) const = default;
};

struct PacketInMsg {
    std::uint16_t in_port = 0;
    Frame frame;
    bool operator==(const PacketInMsg&) const = default;
};

struct PacketOutMsg {
    std::uint16_t out_port = 0;
    Frame frame;
    bool operator==(const PacketOutMsg&) const = default;
};

struct StatsEntry {
    FlowMatch match;
    std::uint64_t packets = 0;
    std::uint64_t bytes = 0;
    bool operator==(const StatsEntry&) const = default;
};

struct StatsReportMsg {
    std::vector<StatsEntry> entries;
    bool operator==(const StatsReportMsg&) const = default;
};

struct RevokeMsg {
    std::vector<std::uint32_t> nodes;
    bool operator==(const RevokeMsg&) const = default;
};

using SouthboundMessage = std::variant<HelloMsg, JoinRequestMsg, PacketInMsg, PacketOutMsg,
                                       FlowModMsg, StatsReportMsg, RevokeMsg>;

namespace wire {
inline constexpr std::uint8_t kHello = 0x01;
inline constexpr std::uint8_t kJoinRequest = 0x02;
inline constexpr std::uint8_t kPacketIn = 0x03;
inline constexpr std::uint8_t kPacketOut = 0x04;
inline constexpr std::uint8_t kFlowMod = 0x05;
inline constexpr std::uint8_t kStatsReport = 0x06;
inline constexpr std::uint8_t kRevoke = 0x07;
inline constexpr std::uint8_t kVersion = 0x01;
}  // namespace wire

inline void put_match(Bytes& out, const FlowMatch& m) {
    put_u32(out, m.src);
    put_u32(out, m.dst);
    put_u8(out, m.msg_type);
}

inline FlowMatch read_match(ByteReader& r) {
    FlowMatch m;
    m.src = r.u32();
    m.dst = r.u32();
    m.msg_type = r.u8();
    return m;
}

// Header: kind u8 ‖ length u16 BE ‖ version u8. Length counts body bytes.
inline Bytes encode(const SouthboundMessage& msg) {
    Bytes body;
    std::uint8_t kind = 0;
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, HelloMsg>) {
                kind = wire::kHello;
                put_u32(body, m.node);
            } else if constexpr (std::is_same_v<T, JoinRequestMsg>) {
                kind = wire::kJoinRequest;
                put_u32(body, m.node);
                body.insert(body.end(), m.pubkey.begin(), m.pubkey.end());
            } else if constexpr (std::is_same_v<T, PacketInMsg>) {
                kind = wire::kPacketIn;
                put_u16(body, m.in_port);
                Bytes f = encode_frame(m.frame);
                body.insert(body.end(), f.begin(), f.end());
            } else if constexpr (std::is_same_v<T, PacketOutMsg>) {
                kind = wire::kPacketOut;
                put_u16(body, m.out_port);
                Bytes f = encode_frame(m.frame);
                body.insert(body.end(), f.begin(), f.end());
            } else if constexpr (std::is_same_v<T, FlowModMsg>) {
                kind = wire::kFlowMod;
                put_u8(body, m.op);
                put_u16(body, m.priority);
                put_match(body, m.match);
                put_u8(body, static_cast<std::uint8_t>(m.action.kind));
                put_u16(body, m.action.port);
            } else if constexpr (std::is_same_v<T, StatsReportMsg>) {
                kind = wire::kStatsReport;
                put_u16(body, static_cast<std::uint16_t>(m.entries.size()));
                for (const auto& e : m.entries) {
                    put_match(body, e.match);
                    put_u64(body, e.packets);
                    put_u64(body, e.bytes);
                }
            } else if constexpr (std::is_same_v<T, RevokeMsg>) {
                kind = wire::kRevoke;
                put_u16(body, static_cast<std::uint16_t>(m.nodes.size()));
                for (auto n : m.nodes) put_u32(body, n);
            }
        },
        msg);
    if (body.size() > 0xFFFF) throw CodecError("southbound body exceeds 65535 bytes");
    Bytes out;
    put_u8(out, kind);
    put_u16(out, static_cast<std::uint16_t>(body.size()));
    put_u8(out, wire::kVersion);
    out.insert(out.end(), body.begin(), body.end());
    return out;
}

inline SouthboundMessage decode(std::span<const std::uint8_t> data) {
    ByteReader hdr(data);
    std::uint8_t kind = hdr.u8();
    std::uint16_t length = hdr.u16();
    std::uint8_t version = hdr.u8();
    if (version != wire::kVersion) throw CodecError("unsupported wire version");
    if (length != hdr.remaining()) throw CodecError("length field mismatch");
    ByteReader r(data.subspan(4, length));
    SouthboundMessage out;
    switch (kind) {
        case wire::kHello:
            out = HelloMsg{r.u32()};
            break;
        case wire::kJoinRequest: {
            JoinRequestMsg m;
            m.node = r.u32();
            m.pubkey = r.bytes(r.remaining());
            out = m;
            break;
        }
        case wire::kPacketIn: {
            PacketInMsg m;
            m.in_port = r.u16();
            m.frame = read_frame(r);
            out = m;
            break;
        }
        case wire::kPacketOut: {
            PacketOutMsg m;
            m.out_port = r.u16();
            m.frame = read_frame(r);
            out = m;
            break;
        }
        case wire::kFlowMod: {
            FlowModMsg m;
            m.op = r.u8();
            m.priority = r.u16();
            m.match = read_match(r);
            std::uint8_t ak = r.u8();
            if (ak > 2) throw CodecError("bad action kind");
            m.action.kind = static_cast<ActionKind>(ak);
            m.action.port = r.u16();
            out = m;
            break;
        }
        case wire::kStatsReport: {
            StatsReportMsg m;
            std::uint16_t count = r.u16();
            m.entries.reserve(count);
            for (std::uint16_t i = 0; i < count; ++i) {
                StatsEntry e;
                e.match = read_match(r);
                e.packets = r.u64();
                e.bytes = r.u64();
                m.entries.push_back(e);
            }
            out = m;
            break;
        }
        case wire::kRevoke: {
            RevokeMsg m;
            std::uint16_t count = r.u16();
            m.nodes.reserve(count);
            for (std::uint16_t i = 0; i < count; ++i) m.nodes.push_back(r.u32());
            out = m;
            break;
        }
        default:
            throw CodecError("unknown message kind");
    }
    if (!r.done()) throw CodecError("trailing bytes in body");
    return out;
}

}  // namespace sdiot
