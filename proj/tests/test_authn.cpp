#include <doctest.h>

#include "sdiot/authn.hpp"

using namespace sdiot;
using namespace sdiot::authn;

namespace {

struct Fixture {
    AuthBroker broker{50};
    DetRng rng{12345};
    Digest key_a = sha256(Bytes{1});
    Digest key_b = sha256(Bytes{2});

    Fixture() {
        broker.install_key(10, key_a, 0);
        broker.install_key(20, key_b, 0);
    }
};

}  // namespace

TEST_CASE("mutual authentication happy path") {
    Fixture f;
    auto& s = f.broker.begin(10, 20, 0, f.rng);
    CHECK(s.state == SessionState::issued);

    auto resp = f.broker.respond(s.id, f.key_b, 1, f.rng);
    auto half = f.broker.verify(s.id, resp.proof, Role::responder, 2);
    CHECK(half.state == SessionState::half_authenticated);

    Proof initiator_proof = make_proof(f.key_a, resp.counter_challenge, 10);
    auto full = f.broker.verify(s.id, initiator_proof, Role::initiator, 3);
    CHECK(full.state == SessionState::mutual);
    CHECK(full.reason == "ok");
    CHECK(f.broker.find(s.id)->state == SessionState::mutual);
}

TEST_CASE("wrong key never reaches mutual") {
    Fixture f;
    Digest wrong = sha256(Bytes{9});
    for (int i = 0; i < 50; ++i) {
        auto& s = f.broker.begin(10, 20, 0, f.rng);
        Proof proof = make_proof(wrong, s.nonce_i, 20);
        auto r = f.broker.verify(s.id, proof, Role::responder, 1);
        CHECK(r.state == SessionState::failed);
        CHECK(r.reason == "bad-proof");
    }
}

TEST_CASE("any single bit flip in a proof is rejected") {
    Fixture f;
    for (std::size_t byte = 0; byte < std::tuple_size_v<Proof>; ++byte) {
        for (int bit = 0; bit < 8; ++bit) {
            auto& s = f.broker.begin(10, 20, 0, f.rng);
            Proof bad = make_proof(f.key_b, s.nonce_i, 20);
            bad[byte] ^= static_cast<std::uint8_t>(1u << bit);
            auto r = f.broker.verify(s.id, bad, Role::responder, 1);
            CHECK(r.state == SessionState::failed);
            CHECK(r.reason == "bad-proof");
        }
    }
}

TEST_CASE("failed sessions stay failed") {
    Fixture f;
    auto& s = f.broker.begin(10, 20, 0, f.rng);
    Proof good = make_proof(f.key_b, s.nonce_i, 20);
    Proof bad = good;
    bad[0] ^= 1;
    CHECK(f.broker.verify(s.id, bad, Role::responder, 1).state == SessionState::failed);
    auto r = f.broker.verify(s.id, good, Role::responder, 1);
    CHECK(r.state == SessionState::failed);
    CHECK(r.reason == "bad-proof");  // the original failure reason is kept
}

TEST_CASE("proof replay across sessions is rejected") {
    Fixture f;
    auto& s1 = f.broker.begin(10, 20, 0, f.rng);
    Proof p1 = make_proof(f.key_b, s1.nonce_i, 20);
    CHECK(f.broker.verify(s1.id, p1, Role::responder, 1).state == SessionState::half_authenticated);

    auto& s2 = f.broker.begin(10, 20, 0, f.rng);
    auto r = f.broker.verify(s2.id, p1, Role::responder, 1);
    CHECK(r.state == SessionState::failed);
    CHECK(r.reason == "replay");
}

TEST_CASE("sessions expire") {
    Fixture f;
    auto& s = f.broker.begin(10, 20, 0, f.rng);
    Proof proof = make_proof(f.key_b, s.nonce_i, 20);
    auto r = f.broker.verify(s.id, proof, Role::responder, 50);
    CHECK(r.state == SessionState::failed);
    CHECK(r.reason == "expired");
    auto& s2 = f.broker.begin(10, 20, 0, f.rng);
    CHECK_THROWS_AS(f.broker.respond(s2.id, f.key_b, 50, f.rng), AuthError);
}

TEST_CASE("out-of-order verification fails") {
    Fixture f;
    auto& s = f.broker.begin(10, 20, 0, f.rng);
    // initiator proof before the responder authenticated
    Proof early = make_proof(f.key_a, s.nonce_r, 10);
    auto r = f.broker.verify(s.id, early, Role::initiator, 1);
    CHECK(r.state == SessionState::failed);
    CHECK(r.reason == "out-of-order");

    // double-respond is treated as replay
    auto& s2 = f.broker.begin(10, 20, 0, f.rng);
    f.broker.respond(s2.id, f.key_b, 1, f.rng);
    auto resp = f.broker.verify(s2.id, make_proof(f.key_b, s2.nonce_i, 20), Role::responder, 2);
    CHECK(resp.state == SessionState::half_authenticated);
    CHECK_THROWS_AS(f.broker.respond(s2.id, f.key_b, 3, f.rng), AuthError);
}

TEST_CASE("begin requires a live key and revocation removes it") {
    Fixture f;
    CHECK_THROWS_AS(f.broker.begin(99, 20, 0, f.rng), AuthError);
    f.broker.revoke_key(10);
    CHECK_FALSE(f.broker.has_key(10));
    CHECK_THROWS_AS(f.broker.begin(10, 20, 0, f.rng), AuthError);
    CHECK(f.broker.has_key(20));
}

TEST_CASE("responder without an installed key fails verification") {
    Fixture f;
    f.broker.revoke_key(20);
    auto& s = f.broker.begin(10, 20, 0, f.rng);
    Proof proof = make_proof(f.key_b, s.nonce_i, 20);
    auto r = f.broker.verify(s.id, proof, Role::responder, 1);
    CHECK(r.state == SessionState::failed);
    CHECK(r.reason == "bad-proof");
}

TEST_CASE("unknown sessions throw and nonces never repeat") {
    Fixture f;
    CHECK_THROWS_AS(f.broker.verify(777, Proof{}, Role::responder, 0), AuthError);
    std::set<Nonce> seen;
    for (int i = 0; i < 200; ++i) {
        auto& s = f.broker.begin(10, 20, 0, f.rng);
        CHECK(seen.insert(s.nonce_i).second);
    }
    CHECK(f.broker.session_count() == 200);
}
