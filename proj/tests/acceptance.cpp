// Acceptance gate: one self-contained check per criterion, one line of
// output each. Exits nonzero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <string>

#include "sdiot/matrix.hpp"
#include "sdiot/runner.hpp"

using namespace sdiot;

namespace {

int failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("criterion %2d: %s - %s\n", criterion, pass ? "pass" : "FAIL", detail.c_str());
    if (!pass) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ecc::CurvePoint repeated_add(const ecc::Curve& c, std::uint64_t k, const ecc::CurvePoint& P) {
    ecc::CurvePoint acc = ecc::CurvePoint::at_infinity();
    for (std::uint64_t i = 0; i < k; ++i) acc = ecc::point_add(c, acc, P);
    return acc;
}

// 1. 1,000 seeded key agreements on the toy curve, each checked against the
//    repeated-addition oracle; < 5 s.
void criterion_1() {
    auto t0 = std::chrono::steady_clock::now();
    const auto& c = ecc::toy_curve();
    DetRng rng(1001);
    int agreements = 0, oracle_hits = 0;
    for (int i = 0; i < 1000; ++i) {
        auto a = ecc::generate_keypair(c, rng);
        auto b = ecc::generate_keypair(c, rng);
        auto k_ab = ecc::derive_shared(c, a.secret, b.pub);
        auto k_ba = ecc::derive_shared(c, b.secret, a.pub);
        if (k_ab == k_ba) ++agreements;
        std::uint64_t prod = ((a.secret * b.secret) % c.n).convert_to<std::uint64_t>();
        auto shared = repeated_add(c, prod, c.base);
        if (!shared.infinity() &&
            k_ab == sha256(ecc::int_to_bytes(shared.x(), c.field_bytes())))
            ++oracle_hits;
    }
    double secs = seconds_since(t0);
    report(1, agreements == 1000 && oracle_hits == 1000 && secs < 5.0,
           "ecdh agreements " + std::to_string(agreements) + "/1000, oracle matches " +
               std::to_string(oracle_hits) + "/1000, " + std::to_string(secs) + "s");
}

// 2. scalar_mul equals the enumeration oracle for every k in [0, order];
//    every result satisfies the curve equation.
void criterion_2() {
    const auto& c = ecc::toy_curve();
    std::uint64_t n = c.n.convert_to<std::uint64_t>();
    bool ok = true;
    ecc::CurvePoint acc = ecc::CurvePoint::at_infinity();
    for (std::uint64_t k = 0; k <= n; ++k) {
        ok &= ecc::scalar_mul(c, k, c.base) == acc;
        ok &= c.on_curve(acc);
        acc = ecc::point_add(c, acc, c.base);
    }
    ok &= ecc::scalar_mul(c, c.n, c.base).infinity();
    report(2, ok, "scalar_mul matches enumeration for all k in [0," + std::to_string(n) + "]");
}

// 3. 1,000 random vectors (up to 50 devices): smc_combine equals the plain
//    adder; every (m-1)-share subset completes to every candidate secret
//    over >= 100 sampled cases.
void criterion_3() {
    const privacy::Int& q = privacy::default_smc_modulus();
    DetRng rng(3003);
    int combine_ok = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        std::size_t m = 2 + rng.below(4);
        std::uint64_t devices = 1 + rng.below(50);
        std::vector<std::optional<privacy::Int>> subtotals(m, privacy::Int(0));
        privacy::Int plain = 0;
        for (std::uint64_t d = 0; d < devices; ++d) {
            std::uint64_t v = rng.below(1ull << 48);
            plain += v;
            auto set = privacy::smc_split({static_cast<std::uint32_t>(d)}, privacy::Int(v), m, q, rng);
            for (std::size_t i = 0; i < m; ++i) subtotals[i] = (*subtotals[i] + set.shares[i]) % q;
        }
        auto agg = privacy::smc_combine(subtotals, q, privacy::AggregateMode::sum, devices);
        if (agg.sum == plain) ++combine_ok;
    }
    int completion_ok = 0;
    const int completion_cases = 120;
    for (int trial = 0; trial < completion_cases; ++trial) {
        std::size_t m = 2 + rng.below(4);
        privacy::Int secret = privacy::Int(rng.below(1ull << 48));
        auto set = privacy::smc_split({1}, secret, m, q, rng);
        std::size_t withheld = rng.below(m);
        privacy::Int partial = 0;
        for (std::size_t i = 0; i < m; ++i)
            if (i != withheld) partial = (partial + set.shares[i]) % q;
        bool all = true;
        for (privacy::Int candidate :
             {privacy::Int(0), privacy::Int(1), secret, privacy::Int(rng.below(1ull << 60))}) {
            privacy::Int completing = ecc::mod(candidate - partial, q);
            all &= completing >= 0 && completing < q &&
                   (partial + completing) % q == candidate % q;
        }
        if (all) ++completion_ok;
    }
    report(3, combine_ok == 1000 && completion_ok == completion_cases,
           "combine vs plain adder " + std::to_string(combine_ok) + "/1000, share completion " +
               std::to_string(completion_ok) + "/" + std::to_string(completion_cases));
}

// 4. EWMA matches hand iteration to 1e-12; weighted_trust matches a direct
//    dot product to 1e-12; R stays in [0,1] over 1e6 random encounter streams.
void criterion_4() {
    DetRng rng(4004);
    bool ewma_ok = true;
    for (int trial = 0; trial < 200; ++trial) {
        double alpha = 0.01 + 0.98 * (rng.below(1000) / 1000.0);
        trust::TrustState s{{1}, {2}};
        double hand = 0.5;
        for (int i = 0; i < 100; ++i) {
            int outcome = rng.chance(0.5) ? 1 : 0;
            s = trust::record_encounter(s, outcome, alpha);
            hand = (1.0 - alpha) * hand + alpha * outcome;
            ewma_ok &= std::abs(s.reputation - hand) <= 1e-12;
        }
    }
    bool weighted_ok = true;
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t n = 1 + rng.below(8);
        trust::NeighborWeights w;
        std::map<std::uint32_t, trust::TrustState> toward;
        double dot = 0.0, total = 0.0;
        std::vector<double> raw(n), rep(n);
        for (std::size_t i = 0; i < n; ++i) {
            raw[i] = 0.001 + rng.below(1000) / 1000.0;
            rep[i] = rng.below(1001) / 1000.0;
            total += raw[i];
            w.entries.push_back({{static_cast<std::uint32_t>(i)}, raw[i]});
            toward[static_cast<std::uint32_t>(i)] = {{static_cast<std::uint32_t>(i)}, {9}, rep[i], 1};
        }
        w.normalize();
        for (std::size_t i = 0; i < n; ++i) dot += raw[i] / total * rep[i];
        weighted_ok &= std::abs(trust::weighted_trust(w, toward) - dot) <= 1e-12;
    }
    bool bounds_ok = true;
    for (int stream = 0; stream < 1000000; ++stream) {
        trust::TrustState s{{1}, {2}};
        double alpha = 0.01 + 0.98 * ((stream % 97) / 97.0);
        int len = 1 + static_cast<int>(rng.below(5));
        for (int i = 0; i < len; ++i) {
            s = trust::record_encounter(s, rng.chance(0.5) ? 1 : 0, alpha);
            bounds_ok &= s.reputation >= 0.0 && s.reputation <= 1.0;
        }
    }
    report(4, ewma_ok && weighted_ok && bounds_ok,
           std::string("ewma hand-match ") + (ewma_ok ? "ok" : "bad") + ", weighted dot-product " +
               (weighted_ok ? "ok" : "bad") + ", bounds over 1e6 streams " +
               (bounds_ok ? "ok" : "bad"));
}

// 5. Cooperation 0.95 vs 0.20, 200 encounters, alpha 0.1, fixed seed:
//    honest > 0.7 > malicious, and the result replays exactly.
void criterion_5() {
    auto run = [] {
        trust::TrustStore store(0.1);
        DetRng rng(5005);
        for (int i = 0; i < 200; ++i) {
            store.observe({1}, {10}, rng.chance(0.95) ? 1 : 0);
            store.observe({1}, {11}, rng.chance(0.20) ? 1 : 0);
        }
        return std::make_pair(store.value({1}, {10}), store.value({1}, {11}));
    };
    auto [honest, malicious] = run();
    auto again = run();
    bool ok = honest > 0.7 && malicious < 0.7 && honest == again.first &&
              malicious == again.second;
    report(5, ok,
           "honest " + std::to_string(honest) + " > 0.7 > malicious " + std::to_string(malicious) +
               ", deterministic " + (again.first == honest ? "yes" : "no"));
}

// 6. All binary-gate access trees of depth <= 3 over 3 binary attributes
//    (leaves (= attr v); gates and/or/1-of-2/2-of-2) against an 8-entry
//    truth-table oracle; < 10 s.
void criterion_6() {
    auto t0 = std::chrono::steady_clock::now();
    using abac::AccessTree;
    struct Node {
        AccessTree tree;
        std::uint8_t truth;  // bit i = value under assignment i of (a,b,c)
    };
    const char* attrs[3] = {"a", "b", "c"};
    std::vector<Node> depth1;
    for (int attr = 0; attr < 3; ++attr) {
        for (int v = 0; v < 2; ++v) {
            AccessTree leaf;
            leaf.gate = AccessTree::Gate::leaf;
            leaf.attr = attrs[attr];
            leaf.op = abac::LeafOp::eq;
            leaf.values = {static_cast<std::int64_t>(v)};
            std::uint8_t truth = 0;
            for (int asg = 0; asg < 8; ++asg)
                if (((asg >> attr) & 1) == v) truth |= static_cast<std::uint8_t>(1 << asg);
            depth1.push_back({std::move(leaf), truth});
        }
    }
    enum GateKind { g_and, g_or, g_1of2, g_2of2 };
    auto combine = [](GateKind g, const Node& l, const Node& r) {
        Node out;
        out.tree.children = {l.tree, r.tree};
        switch (g) {
            case g_and:
                out.tree.gate = AccessTree::Gate::and_gate;
                out.truth = l.truth & r.truth;
                break;
            case g_or:
                out.tree.gate = AccessTree::Gate::or_gate;
                out.truth = l.truth | r.truth;
                break;
            case g_1of2:
                out.tree.gate = AccessTree::Gate::threshold;
                out.tree.k = 1;
                out.truth = l.truth | r.truth;
                break;
            case g_2of2:
                out.tree.gate = AccessTree::Gate::threshold;
                out.tree.k = 2;
                out.truth = l.truth & r.truth;
                break;
        }
        return out;
    };
    auto layer = [&](const std::vector<Node>& pool) {
        std::vector<Node> out;
        out.reserve(pool.size() * pool.size() * 4);
        for (GateKind g : {g_and, g_or, g_1of2, g_2of2})
            for (const auto& l : pool)
                for (const auto& r : pool) out.push_back(combine(g, l, r));
        return out;
    };
    std::vector<Node> upto2 = depth1;
    for (auto& n : layer(depth1)) upto2.push_back(std::move(n));
    std::vector<Node> depth3 = layer(upto2);

    abac::AttributeSet assignments[8];
    for (int asg = 0; asg < 8; ++asg)
        for (int attr = 0; attr < 3; ++attr)
            assignments[asg][attrs[attr]] = static_cast<std::int64_t>((asg >> attr) & 1);

    std::uint64_t trees = 0, mismatches = 0;
    auto check = [&](const std::vector<Node>& pool) {
        for (const auto& n : pool) {
            ++trees;
            n.tree.validate();
            for (int asg = 0; asg < 8; ++asg) {
                bool want = (n.truth >> asg) & 1;
                if (abac::evaluate(n.tree, assignments[asg]) != want) ++mismatches;
            }
        }
    };
    check(upto2);
    check(depth3);
    double secs = seconds_since(t0);
    report(6, mismatches == 0 && secs < 10.0,
           std::to_string(trees) + " trees x 8 assignments, " + std::to_string(mismatches) +
               " mismatches, " + std::to_string(secs) + "s");
}

// 7. 1,000 wrong-key attempts plus a full single-bit-flip sweep over one
//    proof reach zero mutual sessions; proof replay is rejected.
void criterion_7() {
    authn::AuthBroker broker(1000000);
    DetRng rng(7007);
    Digest key_a = sha256(Bytes{1});
    Digest key_b = sha256(Bytes{2});
    broker.install_key(10, key_a, 0);
    broker.install_key(20, key_b, 0);

    int mutual = 0;
    for (int i = 0; i < 1000; ++i) {
        Digest wrong = sha256(rng.bytes(16));
        auto& s = broker.begin(10, 20, 0, rng);
        auto r1 = broker.verify(s.id, authn::make_proof(wrong, s.nonce_i, 20),
                                authn::Role::responder, 1);
        auto r2 = broker.verify(s.id, authn::make_proof(wrong, s.nonce_r, 10),
                                authn::Role::initiator, 2);
        if (r1.state == authn::SessionState::mutual || r2.state == authn::SessionState::mutual)
            ++mutual;
    }

    int flip_mutual = 0, flips = 0;
    for (std::size_t byte = 0; byte < std::tuple_size_v<authn::Proof>; ++byte) {
        for (int bit = 0; bit < 8; ++bit) {
            auto& s = broker.begin(10, 20, 0, rng);
            authn::Proof bad = authn::make_proof(key_b, s.nonce_i, 20);
            bad[byte] ^= static_cast<std::uint8_t>(1u << bit);
            auto r = broker.verify(s.id, bad, authn::Role::responder, 1);
            ++flips;
            if (r.state != authn::SessionState::failed) ++flip_mutual;
        }
    }

    // replaying an accepted proof into a fresh session must be rejected
    auto& good = broker.begin(10, 20, 0, rng);
    authn::Proof p = authn::make_proof(key_b, good.nonce_i, 20);
    bool first_ok =
        broker.verify(good.id, p, authn::Role::responder, 1).state ==
        authn::SessionState::half_authenticated;
    auto& replayed = broker.begin(10, 20, 0, rng);
    auto rr = broker.verify(replayed.id, p, authn::Role::responder, 1);
    bool replay_rejected = rr.state == authn::SessionState::failed && rr.reason == "replay";

    report(7, mutual == 0 && flip_mutual == 0 && first_ok && replay_rejected,
           "wrong-key mutuals " + std::to_string(mutual) + "/1000, flip acceptances " +
               std::to_string(flip_mutual) + "/" + std::to_string(flips) + ", replay " +
               (replay_rejected ? "rejected" : "ACCEPTED"));
}

// 8. Every claimed (threat, module) cell passes its paired on/off runs,
//    detection within 2 analyzer windows; full grid < 2 minutes.
void criterion_8() {
    auto t0 = std::chrono::steady_clock::now();
    auto rep = matrix::run_matrix();
    double secs = seconds_since(t0);
    int passed = 0;
    for (const auto& r : rep.results) passed += r.pass ? 1 : 0;
    report(8, rep.all_pass && secs < 120.0,
           std::to_string(passed) + "/" + std::to_string(rep.results.size()) +
               " cells pass, grid in " + std::to_string(secs) + "s");
}

// 9. Baseline traffic over 100 windows raises zero alerts; the 50x DoS script
//    is flagged within 2 windows and post-countermeasure sink delivery is 0.
void criterion_9() {
    std::string base =
        "[run]\nname = calibration\nduration = 10000\ncurve = sim61\n"
        "[topology]\nclusters = 1\ndevices_per_cluster = 3\nseed = 9\n";
    auto clean = runner::run_from_text(base);
    bool clean_ok = clean.report.alert_total == 0 &&
                    clean.net->now() / clean.spec.detector.window >= 100;

    // baseline is ~15 frames per flow per window; per_tick 8 is ~800 (>50x)
    auto dos = runner::run_from_text(base +
                                     "[attacks.0]\n"
                                     "kind = flood\nnode = 2\nstart = 600\nend = 1100\nper_tick = 8\n");
    bool dos_ok = false;
    std::string dos_note = "no outcome";
    if (dos.outcomes.size() == 1) {
        const auto& o = dos.outcomes[0];
        dos_ok = o.result == runner::Outcome::detected &&
                 o.latency <= 2 * dos.spec.detector.window && o.neutralized;
        dos_note = std::string(runner::to_string(o.result)) + " at latency " +
                   std::to_string(o.latency) + (o.neutralized ? ", neutralized" : ", NOT neutralized");
    }
    report(9, clean_ok && dos_ok,
           "clean alerts " + std::to_string(clean.report.alert_total) + " over " +
               std::to_string(clean.spec.duration / clean.spec.detector.window) +
               " windows; dos " + dos_note);
}

// 10. Identical seeds replay to byte-identical audit logs and reports.
void criterion_10() {
    std::string text =
        "[run]\nname = determinism\nduration = 1500\ncurve = sim61\n"
        "[topology]\nclusters = 2\ndevices_per_cluster = 3\nseed = 10\nlink_loss_rate = 0.05\n"
        "[attacks.0]\nkind = flood\nnode = 3\nstart = 700\nend = 1000\nper_tick = 8\n"
        "[attacks.1]\nkind = eavesdrop\nnode = 4\n";
    auto a = runner::run_from_text(text);
    auto b = runner::run_from_text(text);
    bool ok = a.audit_text == b.audit_text && a.report.kv() == b.report.kv() &&
              a.report.text() == b.report.text() &&
              a.net->log().render() == b.net->log().render();
    report(10, ok,
           std::string("audit ") + (a.audit_text == b.audit_text ? "identical" : "DIFFERS") +
               ", report " + (a.report.kv() == b.report.kv() ? "identical" : "DIFFERS"));
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    if (failures) {
        std::printf("%d criterion(s) failed\n", failures);
        return 1;
    }
    std::printf("all 10 criteria pass\n");
    return 0;
}
