#include <doctest.h>

#include "sdiot/simnet.hpp"

using namespace sdiot;

namespace {

TopologySpec small(std::uint64_t seed = 1, double loss = 0.0) {
    TopologySpec s;
    s.clusters = 2;
    s.devices_per_cluster = 3;
    s.link_loss_rate = loss;
    s.seed = seed;
    return s;
}

Frame frame(NodeId src, NodeId dst, Bytes payload = {1, 2, 3}) {
    return {src, dst, MsgType::reading, std::move(payload)};
}

}  // namespace

TEST_CASE("topology validation") {
    CHECK_THROWS_AS(Network({0, 1, 0.0, 1}), ConfigError);
    CHECK_THROWS_AS(Network({1, 0, 0.0, 1}), ConfigError);
    CHECK_THROWS_AS(Network({1, 1, 1.5, 1}), ConfigError);
    CHECK_THROWS_AS(Network({1, 1, -0.1, 1}), ConfigError);
}

TEST_CASE("star topology layout") {
    Network net(small());
    CHECK(net.entity_count() == 1 + 2 + 6);
    CHECK(net.cluster_heads().size() == 2);
    CHECK(net.devices().size() == 6);
    CHECK(net.role_of(kGatewayId) == NodeRole::gateway);
    CHECK(net.role_of({1}) == NodeRole::cluster_head);
    CHECK(net.role_of({3}) == NodeRole::device);
    CHECK(net.cluster_of({3}) == 0);
    CHECK(net.cluster_of({6}) == 1);
    CHECK(net.head_of_cluster(1) == NodeId{2});
    CHECK(net.has_node({8}));
    CHECK_FALSE(net.has_node({9}));
    // devices only link to their own head
    CHECK_THROWS_AS(net.transmit({3}, {2}, frame({3}, {2})), ConfigError);
    CHECK_THROWS_AS(net.transmit({3}, kGatewayId, frame({3}, kGatewayId)), ConfigError);
}

TEST_CASE("one tick per hop, delivery invokes the handler") {
    Network net(small());
    std::vector<std::pair<Tick, Frame>> seen;
    net.set_handler({1}, [&](Network& n, const Frame& f, NodeId hop) {
        CHECK(hop == NodeId{3});
        seen.emplace_back(n.now(), f);
    });
    Frame f = frame({3}, {1});
    net.transmit({3}, {1}, f);
    net.run_until(0);
    CHECK(seen.empty());
    net.run_until(1);
    REQUIRE(seen.size() == 1);
    CHECK(seen[0].first == 1);
    CHECK(seen[0].second == f);
    auto stats = net.link_stats().at(LinkKey({3}, {1}));
    CHECK(stats.sends == 1);
    CHECK(stats.delivers == 1);
    CHECK(stats.drops == 0);
}

TEST_CASE("same-tick events run in insertion order") {
    Network net(small());
    std::vector<int> order;
    net.schedule(5, [&](Network&) { order.push_back(1); });
    net.schedule(3, [&](Network&) { order.push_back(0); });
    net.schedule(5, [&](Network&) { order.push_back(2); });
    net.run_until(10);
    CHECK(order == std::vector<int>{0, 1, 2});
    CHECK(net.now() == 10);
    CHECK_THROWS_AS(net.schedule(9, [](Network&) {}), ConfigError);
    CHECK_THROWS_AS(net.run_until(9), ConfigError);
}

TEST_CASE("lossy links account every send as deliver or drop") {
    Network net(small(42, 0.3));
    int handled = 0;
    net.set_handler({1}, [&](Network&, const Frame&, NodeId) { ++handled; });
    for (int i = 0; i < 500; ++i) net.transmit({3}, {1}, frame({3}, {1}));
    net.run_until(2);
    auto stats = net.link_stats().at(LinkKey({3}, {1}));
    CHECK(stats.sends == 500);
    CHECK(stats.delivers + stats.drops == 500);
    CHECK(stats.drops > 100);
    CHECK(stats.drops < 200);
    CHECK(static_cast<int>(stats.delivers) == handled);

    // the loss roll replays exactly for the same seed
    Network again(small(42, 0.3));
    again.set_handler({1}, [](Network&, const Frame&, NodeId) {});
    for (int i = 0; i < 500; ++i) again.transmit({3}, {1}, frame({3}, {1}));
    again.run_until(2);
    CHECK(again.link_stats().at(LinkKey({3}, {1})).drops == stats.drops);
}

TEST_CASE("node rng streams differ by node and purpose") {
    Network net(small(7));
    auto a = net.node_rng({3}, "x");
    auto b = net.node_rng({4}, "x");
    auto c = net.node_rng({3}, "y");
    auto a2 = net.node_rng({3}, "x");
    CHECK(a.next_u64() == a2.next_u64());
    CHECK(net.node_rng({3}, "x").next_u64() != b.next_u64());
    CHECK(net.node_rng({3}, "x").next_u64() != c.next_u64());
}

TEST_CASE("adversary validation") {
    Network net(small());
    AdversaryScript bad_node;
    bad_node.taps.push_back({{3}, {99}});
    CHECK_THROWS_AS(net.attach_adversary(bad_node), ConfigError);
    AdversaryScript bad_link;
    bad_link.flips.push_back({{3}, {4}, 0, UINT64_MAX, 0});
    CHECK_THROWS_AS(net.attach_adversary(bad_link), ConfigError);
}

TEST_CASE("tap records traffic without affecting delivery") {
    Network net(small());
    AdversaryScript script;
    script.taps.push_back({{3}, {1}});
    net.attach_adversary(script);
    int handled = 0;
    net.set_handler({1}, [&](Network&, const Frame&, NodeId) { ++handled; });
    net.transmit({3}, {1}, frame({3}, {1}, {0xAA}));
    net.transmit({4}, {1}, frame({4}, {1}, {0xBB}));  // untapped link
    net.run_until(2);
    CHECK(handled == 2);
    REQUIRE(net.transcript().size() == 1);
    CHECK(net.transcript()[0].frame.payload == Bytes{0xAA});
    CHECK(net.transcript()[0].tick == 1);
}

TEST_CASE("flip corrupts one payload byte inside its window") {
    Network net(small());
    AdversaryScript script;
    script.flips.push_back({{3}, {1}, 5, 10, 1});
    net.attach_adversary(script);
    std::vector<Bytes> got;
    net.set_handler({1}, [&](Network&, const Frame& f, NodeId) { got.push_back(f.payload); });
    net.schedule(3, [](Network& n) { n.transmit({3}, {1}, frame({3}, {1}, {1, 2, 3})); });
    net.schedule(6, [](Network& n) { n.transmit({3}, {1}, frame({3}, {1}, {1, 2, 3})); });
    net.schedule(12, [](Network& n) { n.transmit({3}, {1}, frame({3}, {1}, {1, 2, 3})); });
    net.run_until(20);
    REQUIRE(got.size() == 3);
    CHECK(got[0] == Bytes{1, 2, 3});            // before the window
    CHECK(got[1] == Bytes{1, 2 ^ 0xFF, 3});     // inside
    CHECK(got[2] == Bytes{1, 2, 3});            // after
}

TEST_CASE("inject delivers a forged frame that never hit link stats") {
    Network net(small());
    AdversaryScript script;
    script.injects.push_back({4, {3}, {1}, frame({5}, {1}, {0xEE})});
    net.attach_adversary(script);
    std::vector<Frame> got;
    net.set_handler({1}, [&](Network&, const Frame& f, NodeId) { got.push_back(f); });
    net.run_until(10);
    REQUIRE(got.size() == 1);
    CHECK(got[0].src == NodeId{5});
    CHECK(got[0].payload == Bytes{0xEE});
    auto stats = net.link_stats().at(LinkKey({3}, {1}));
    CHECK(stats.sends == 0);
    CHECK(stats.delivers == 0);
}

TEST_CASE("replay re-delivers the first captured frame") {
    Network net(small());
    AdversaryScript script;
    script.replays.push_back({{3}, {1}, 2, 9});
    net.attach_adversary(script);
    std::vector<std::pair<Tick, Bytes>> got;
    net.set_handler({1}, [&](Network& n, const Frame& f, NodeId) {
        got.emplace_back(n.now(), f.payload);
    });
    net.schedule(0, [](Network& n) { n.transmit({3}, {1}, frame({3}, {1}, {0x01})); });
    net.schedule(3, [](Network& n) { n.transmit({3}, {1}, frame({3}, {1}, {0x02})); });
    net.schedule(5, [](Network& n) { n.transmit({3}, {1}, frame({3}, {1}, {0x03})); });
    net.run_until(20);
    REQUIRE(got.size() == 4);
    // capture_after=2 skips the tick-1 frame; tick-4 frame {0x02} replays at 9
    CHECK(got[3].first == 9);
    CHECK(got[3].second == Bytes{0x02});
}

TEST_CASE("replay with nothing captured is a no-op") {
    Network net(small());
    AdversaryScript script;
    script.replays.push_back({{3}, {1}, 0, 5});
    net.attach_adversary(script);
    int handled = 0;
    net.set_handler({1}, [&](Network&, const Frame&, NodeId) { ++handled; });
    net.run_until(10);
    CHECK(handled == 0);
}

TEST_CASE("two runs with the same seed produce identical logs") {
    auto drive = [](Network& net) {
        net.set_handler({1}, [](Network& n, const Frame& f, NodeId) {
            if (f.type == MsgType::reading) n.transmit({1}, kGatewayId, {f.src, kGatewayId, MsgType::control, f.payload});
        });
        net.set_handler(kGatewayId, [](Network&, const Frame&, NodeId) {});
        for (Tick t = 0; t < 50; t += 5) {
            net.schedule(t, [t](Network& n) {
                n.transmit({3}, {1}, frame({3}, {1}, {static_cast<std::uint8_t>(t)}));
            });
        }
        return net.run_until(100).render();
    };
    Network a(small(99, 0.25)), b(small(99, 0.25)), c(small(100, 0.25));
    std::string la = drive(a);
    CHECK(la == drive(b));
    CHECK(la != drive(c));  // different seed diverges (drops differ)
}
