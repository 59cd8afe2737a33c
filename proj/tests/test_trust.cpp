#include <doctest.h>

#include "sdiot/trust.hpp"

using namespace sdiot;
using namespace sdiot::trust;

TEST_CASE("ewma matches hand-iterated values at alpha 0.5") {
    TrustState s{{1}, {2}};
    CHECK(s.reputation == 0.5);
    s = record_encounter(s, 1, 0.5);
    CHECK(s.reputation == doctest::Approx(0.75).epsilon(1e-12));
    s = record_encounter(s, 0, 0.5);
    CHECK(s.reputation == doctest::Approx(0.375).epsilon(1e-12));
    s = record_encounter(s, 1, 0.5);
    CHECK(s.reputation == doctest::Approx(0.6875).epsilon(1e-12));
    CHECK(s.encounter_count == 3);

    TrustState t{{1}, {2}};
    for (int i = 0; i < 4; ++i) t = record_encounter(t, 1, 0.5);
    CHECK(t.reputation == doctest::Approx(0.96875).epsilon(1e-12));
}

TEST_CASE("encounter validation") {
    TrustState s{{1}, {2}};
    CHECK_THROWS_AS(record_encounter(s, 2, 0.5), ConfigError);
    CHECK_THROWS_AS(record_encounter(s, -1, 0.5), ConfigError);
    CHECK_THROWS_AS(record_encounter(s, 1, 0.0), ConfigError);
    CHECK_THROWS_AS(record_encounter(s, 1, 1.5), ConfigError);
    CHECK_NOTHROW(record_encounter(s, 1, 1.0));
}

TEST_CASE("reputation stays in the unit interval under long random streams") {
    DetRng rng(61);
    for (int trial = 0; trial < 20; ++trial) {
        TrustState s{{1}, {2}};
        double alpha = 0.01 + 0.98 * (rng.below(1000) / 1000.0);
        for (int i = 0; i < 5000; ++i) {
            s = record_encounter(s, rng.chance(0.5) ? 1 : 0, alpha);
            CHECK(s.reputation >= 0.0);
            CHECK(s.reputation <= 1.0);
        }
    }
}

TEST_CASE("weighted trust is the dot product of normalized weights") {
    NeighborWeights w;
    w.entries = {{{1}, 0.2}, {{2}, 0.3}, {{3}, 0.5}};
    std::map<std::uint32_t, TrustState> toward;
    toward[1] = {{1}, {9}, 0.9, 1};
    toward[2] = {{2}, {9}, 0.6, 1};
    toward[3] = {{3}, {9}, 0.4, 1};
    CHECK(weighted_trust(w, toward) == doctest::Approx(0.56).epsilon(1e-12));

    // normalize scales proportional weights to sum 1
    NeighborWeights raw;
    raw.entries = {{{1}, 2.0}, {{2}, 3.0}, {{3}, 5.0}};
    raw.normalize();
    CHECK(weighted_trust(raw, toward) == doctest::Approx(0.56).epsilon(1e-12));
}

TEST_CASE("weighted trust error paths") {
    NeighborWeights empty;
    std::map<std::uint32_t, TrustState> toward;
    CHECK_THROWS_AS(weighted_trust(empty, toward), ConfigError);

    NeighborWeights w;
    w.entries = {{{1}, 1.0}};
    CHECK_THROWS_AS(weighted_trust(w, toward), ConfigError);  // missing state

    NeighborWeights neg;
    neg.entries = {{{1}, -1.0}, {{2}, 2.0}};
    CHECK_THROWS_AS(neg.normalize(), ConfigError);
    NeighborWeights zero;
    zero.entries = {{{1}, 0.0}};
    CHECK_THROWS_AS(zero.normalize(), ConfigError);
}

TEST_CASE("trust store keeps ordered-pair state") {
    TrustStore store(0.5);
    CHECK(store.alpha() == 0.5);
    CHECK(store.value({1}, {2}) == 0.5);  // neutral prior
    store.observe({1}, {2}, 1);
    CHECK(store.value({1}, {2}) == doctest::Approx(0.75));
    CHECK(store.value({2}, {1}) == 0.5);  // direction matters
    store.observe({2}, {1}, 0);
    CHECK(store.value({2}, {1}) == doctest::Approx(0.25));
    CHECK(store.all().size() == 2);
}

TEST_CASE("store assessment blends neighbor histories") {
    TrustStore store(0.5);
    for (int i = 0; i < 10; ++i) store.observe({1}, {9}, 1);
    for (int i = 0; i < 10; ++i) store.observe({2}, {9}, 0);
    NeighborWeights w;
    w.entries = {{{1}, 0.5}, {{2}, 0.5}};
    double expected = 0.5 * store.value({1}, {9}) + 0.5 * store.value({2}, {9});
    CHECK(store.assess({9}, w) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("cooperative and defecting nodes separate") {
    // behavior-driven separation: 95% vs 20% cooperation over 200 encounters
    TrustStore store(0.1);
    DetRng rng(71);
    for (int i = 0; i < 200; ++i) {
        store.observe({1}, {10}, rng.chance(0.95) ? 1 : 0);
        store.observe({1}, {11}, rng.chance(0.20) ? 1 : 0);
    }
    CHECK(store.value({1}, {10}) > kDefaultThreshold);
    CHECK(store.value({1}, {11}) < kDefaultThreshold);
}
