#pragma once

#include "sdiot/gateway.hpp"

namespace sdiot {

// Cluster head in the sensor-switch role: one flow table, port 0 uplinked
// to the gateway, ports 1..N to the cluster's devices.
class SwitchAgent {
public:
    SwitchAgent(NodeId self, std::vector<NodeId> cluster_devices)
        : self_(self) {
        ports_[0] = kGatewayId;
        std::uint16_t port = 1;
        for (auto d : cluster_devices) {
            ports_[port] = d;
            port_of_[d.id] = port;
            ++port;
        }
    }

    NodeId id() const { return self_; }
    FlowTable& table() { return table_; }
    const FlowTable& table() const { return table_; }

    void handle(Network& net, const Frame& frame, NodeId hop_from) {
        if (frame.type == MsgType::control && frame.src == kGatewayId &&
            hop_from == kGatewayId) {
            handle_control(net, frame);
            return;
        }
        Action action = table_.match_packet(frame);
        switch (action.kind) {
            case ActionKind::forward: {
                auto it = ports_.find(action.port);
                if (it != ports_.end()) net.transmit(self_, it->second, frame);
                break;
            }
            case ActionKind::drop:
                break;
            case ActionKind::to_controller: {
                PacketInMsg pin;
                auto pit = port_of_.find(hop_from.id);
                pin.in_port = pit == port_of_.end() ? 0 : pit->second;
                pin.frame = frame;
                Frame ctl;
                ctl.src = self_;
                ctl.dst = kGatewayId;
                ctl.type = MsgType::control;
                ctl.payload = encode(SouthboundMessage{pin});
                net.transmit(self_, kGatewayId, ctl);
                break;
            }
        }
    }

private:
    void handle_control(Network& net, const Frame& frame) {
        SouthboundMessage msg;
        try {
            msg = decode(frame.payload);
        } catch (const CodecError&) {
            return;
        }
        if (const auto* mod = std::get_if<FlowModMsg>(&msg)) {
            FlowModResult res = table_.apply(*mod);
            if (res != FlowModResult::ok) {
                // rejected mods are echoed back so the controller learns
                Frame echo;
                echo.src = self_;
                echo.dst = kGatewayId;
                echo.type = MsgType::control;
                echo.payload = encode(SouthboundMessage{*mod});
                net.transmit(self_, kGatewayId, echo);
            }
        } else if (const auto* pout = std::get_if<PacketOutMsg>(&msg)) {
            auto it = ports_.find(pout->out_port);
            if (it != ports_.end()) net.transmit(self_, it->second, pout->frame);
        }
        // Revoke is enforced at the gateway; switches keep forwarding state only.
    }

    NodeId self_;
    FlowTable table_;
    std::map<std::uint16_t, NodeId> ports_;
    std::map<std::uint32_t, std::uint16_t> port_of_;
};

// Constrained IoT device: generates its own keypair, joins through its head,
// and reports readings either as SMC shares under hybrid encryption or as
// plaintext when the privacy module is disabled.
class DeviceAgent {
public:
    DeviceAgent(NodeId self, NodeId head, std::uint32_t cluster, const ecc::Curve& curve,
                const ecc::CurvePoint& gateway_pub, std::uint64_t seed, bool privacy_on,
                std::size_t aggregator_count, Tick credential_lifetime)
        : self_(self),
          head_(head),
          cluster_(cluster),
          curve_(curve),
          rng_(derive_rng(seed, "device", self.id)),
          privacy_on_(privacy_on),
          aggregators_(aggregator_count) {
        keys_ = ecc::generate_keypair(curve_, rng_);
        cred_.node = self_;
        cred_.device_keypair = keys_;
        cred_.gateway_pub = gateway_pub;
        cred_.smc_modulus = privacy::default_smc_modulus();
        cred_.valid_from = 0;
        cred_.valid_to = credential_lifetime;
    }

    NodeId id() const { return self_; }
    const ecc::CurvePoint& public_point() const { return keys_.pub; }
    const privacy::Credential& credential() const { return cred_; }
    std::uint32_t next_seq() const { return seq_ + 1; }

    // Scripted misbehavior: probability of producing a valid (cooperative)
    // packet; defects carry a corrupted signature region.
    void set_cooperate_prob(double p) { cooperate_prob_ = p; }

    void send_join(Network& net) {
        JoinRequestMsg join;
        join.node = self_.id;
        join.pubkey = ecc::encode_point(curve_, keys_.pub);
        Frame f;
        f.src = self_;
        f.dst = kGatewayId;
        f.type = MsgType::join;
        f.payload = encode(SouthboundMessage{join});
        net.transmit(self_, head_, f);
    }

    struct SendResult {
        std::uint32_t seq = 0;
        std::uint64_t value = 0;
        bool cooperative = true;
    };

    SendResult send_reading(Network& net, std::uint64_t value) {
        seq_ += 1;
        bool cooperate = rng_.chance(cooperate_prob_);
        if (!privacy_on_) {
            Bytes payload;
            put_u8(payload, 'R');
            put_u8(payload, 'D');
            put_u32(payload, seq_);
            put_u64(payload, value);
            if (!cooperate && !payload.empty()) payload[6] ^= 0xFF;  // corrupt the value field
            Frame f{self_, kGatewayId, MsgType::reading, payload};
            net.transmit(self_, head_, f);
            return {seq_, value, cooperate};
        }
        auto shares = privacy::smc_split(self_, privacy::Int(value), aggregators_,
                                         cred_.smc_modulus, rng_);
        for (std::size_t j = 0; j < aggregators_; ++j) {
            Bytes plain;
            put_u8(plain, static_cast<std::uint8_t>(j));
            put_u32(plain, seq_);
            put_u64(plain, shares.shares[j].convert_to<std::uint64_t>());
            auto pkt = privacy::protect_payload(curve_, cred_, std::move(plain), net.now(), rng_);
            Bytes wirebytes = privacy::encode_cipher_packet(curve_, pkt);
            if (!cooperate) wirebytes.back() ^= 0xFF;  // breaks the signature check
            Frame f{self_, kGatewayId, MsgType::reading, wirebytes};
            net.transmit(self_, head_, f);
        }
        return {seq_, value, cooperate};
    }

    // Plaintext wire encoding of a reading, for transcript scans.
    static Bytes plaintext_pattern(std::uint32_t seq, std::uint64_t value) {
        Bytes payload;
        put_u8(payload, 'R');
        put_u8(payload, 'D');
        put_u32(payload, seq);
        put_u64(payload, value);
        return payload;
    }

    // Responder half of mutual authentication: proof over the session's
    // challenge under this device's service access key.
    authn::Proof answer_challenge(const authn::Nonce& nonce) const {
        auto key = ecc::derive_shared(curve_, keys_.secret, cred_.gateway_pub);
        return authn::make_proof(key, nonce, self_.id);
    }

    ecc::SharedSecret service_access_key() const {
        return ecc::derive_shared(curve_, keys_.secret, cred_.gateway_pub);
    }

    DetRng& rng() { return rng_; }
    NodeId head() const { return head_; }

private:
    NodeId self_;
    NodeId head_;
    std::uint32_t cluster_;
    const ecc::Curve& curve_;
    DetRng rng_;
    bool privacy_on_;
    std::size_t aggregators_;
    double cooperate_prob_ = 1.0;
    std::uint32_t seq_ = 0;
    ecc::KeyPair keys_;
    privacy::Credential cred_;
};

}  // namespace sdiot
