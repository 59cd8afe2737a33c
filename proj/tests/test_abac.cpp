#include <doctest.h>

#include "sdiot/abac.hpp"

using namespace sdiot;
using namespace sdiot::abac;

namespace {

AttributeSet attrs(std::initializer_list<std::pair<std::string, AttrValue>> kv) {
    AttributeSet a;
    for (const auto& [k, v] : kv) a[k] = v;
    return a;
}

}  // namespace

TEST_CASE("parse and render roundtrip") {
    for (const char* text : {
             "(= role sensor)",
             "(!= cluster 3)",
             "(< battery 20)",
             "(>= epoch 2)",
             "(in role sensor actuator admin)",
             "(and (= role sensor) (>= epoch 1))",
             "(or (= role admin) (and (= role sensor) (< battery 50)))",
             "(k-of 2 (= a 1) (= b 2) (= c 3))",
         }) {
        AccessTree t = parse_tree(text);
        CHECK(render_tree(t) == text);
        CHECK(render_tree(parse_tree(render_tree(t))) == text);
    }
}

TEST_CASE("parse errors") {
    CHECK_THROWS_AS(parse_tree(""), ConfigError);
    CHECK_THROWS_AS(parse_tree("= role sensor"), ConfigError);
    CHECK_THROWS_AS(parse_tree("(= role sensor"), ConfigError);
    CHECK_THROWS_AS(parse_tree("(= role sensor) junk"), ConfigError);
    CHECK_THROWS_AS(parse_tree("(?? role sensor)"), ConfigError);
    CHECK_THROWS_AS(parse_tree("(= role a b)"), ConfigError);  // eq wants one value
    CHECK_THROWS_AS(parse_tree("(= role)"), ConfigError);
    CHECK_THROWS_AS(parse_tree("(and)"), ConfigError);
    CHECK_THROWS_AS(parse_tree("(k-of 3 (= a 1) (= b 2))"), ConfigError);  // k > arity
    CHECK_THROWS_AS(parse_tree("(k-of 0 (= a 1))"), ConfigError);
}

TEST_CASE("leaf semantics including missing attributes and type mismatch") {
    auto dev = attrs({{"role", std::string("sensor")}, {"battery", std::int64_t(30)}});

    CHECK(evaluate(parse_tree("(= role sensor)"), dev));
    CHECK_FALSE(evaluate(parse_tree("(= role admin)"), dev));
    CHECK_FALSE(evaluate(parse_tree("(= missing 1)"), dev));  // missing attr is false

    // ne: true on different value or different type, false only on exact match
    CHECK(evaluate(parse_tree("(!= role admin)"), dev));
    CHECK_FALSE(evaluate(parse_tree("(!= role sensor)"), dev));
    CHECK(evaluate(parse_tree("(!= role 7)"), dev));           // type mismatch
    CHECK_FALSE(evaluate(parse_tree("(!= missing 1)"), dev));  // missing attr is false

    CHECK(evaluate(parse_tree("(< battery 50)"), dev));
    CHECK_FALSE(evaluate(parse_tree("(< battery 30)"), dev));
    CHECK(evaluate(parse_tree("(>= battery 30)"), dev));
    CHECK_FALSE(evaluate(parse_tree("(>= battery 31)"), dev));
    CHECK_FALSE(evaluate(parse_tree("(< battery sensor)"), dev));  // type mismatch

    CHECK(evaluate(parse_tree("(in role actuator sensor)"), dev));
    CHECK_FALSE(evaluate(parse_tree("(in role actuator admin)"), dev));
    CHECK(evaluate(parse_tree("(in battery 10 30 50)"), dev));
}

TEST_CASE("gate semantics") {
    auto dev = attrs({{"a", std::int64_t(1)}, {"b", std::int64_t(0)}, {"c", std::int64_t(1)}});
    CHECK(evaluate(parse_tree("(and (= a 1) (= c 1))"), dev));
    CHECK_FALSE(evaluate(parse_tree("(and (= a 1) (= b 1))"), dev));
    CHECK(evaluate(parse_tree("(or (= b 1) (= c 1))"), dev));
    CHECK_FALSE(evaluate(parse_tree("(or (= b 1) (= a 0))"), dev));
    CHECK(evaluate(parse_tree("(k-of 2 (= a 1) (= b 1) (= c 1))"), dev));
    CHECK_FALSE(evaluate(parse_tree("(k-of 3 (= a 1) (= b 1) (= c 1))"), dev));
    CHECK(evaluate(parse_tree("(k-of 1 (= a 0) (= b 0) (= c 1))"), dev));
}

TEST_CASE("exhaustive depth-2 comparison against a truth table") {
    // every (gate leaf leaf) over two binary attributes, all four assignments
    auto leaf = [](const std::string& attr, int v) {
        return "(= " + attr + " " + std::to_string(v) + ")";
    };
    for (int la = 0; la < 2; ++la) {
        for (int lb = 0; lb < 2; ++lb) {
            std::string l1 = leaf("x", la), l2 = leaf("y", lb);
            for (int x = 0; x < 2; ++x) {
                for (int y = 0; y < 2; ++y) {
                    auto a = attrs({{"x", std::int64_t(x)}, {"y", std::int64_t(y)}});
                    bool h1 = x == la, h2 = y == lb;
                    CHECK(evaluate(parse_tree("(and " + l1 + " " + l2 + ")"), a) == (h1 && h2));
                    CHECK(evaluate(parse_tree("(or " + l1 + " " + l2 + ")"), a) == (h1 || h2));
                    CHECK(evaluate(parse_tree("(k-of 1 " + l1 + " " + l2 + ")"), a) == (h1 || h2));
                    CHECK(evaluate(parse_tree("(k-of 2 " + l1 + " " + l2 + ")"), a) == (h1 && h2));
                }
            }
        }
    }
}

TEST_CASE("template instantiation binds placeholders") {
    AccessTree tmpl = parse_tree("(and (= owner ${owner}) (= role sensor))");
    auto bindings = attrs({{"owner", std::int64_t(42)}});
    AccessTree bound = instantiate(tmpl, bindings);
    CHECK(render_tree(bound) == "(and (= owner 42) (= role sensor))");
    CHECK(evaluate(bound, attrs({{"owner", std::int64_t(42)}, {"role", std::string("sensor")}})));
    CHECK_FALSE(evaluate(bound, attrs({{"owner", std::int64_t(7)}, {"role", std::string("sensor")}})));
    CHECK_THROWS_AS(instantiate(parse_tree("(= owner ${nope})"), bindings), ConfigError);
}

TEST_CASE("policy store is default deny with one live policy per subject") {
    PolicyStore store;
    auto dev = attrs({{"role", std::string("sensor")}});
    CHECK_FALSE(store.authorize(5, dev).permitted);
    CHECK(store.authorize(5, dev).reason == "no-matching-policy");

    store.put({5, parse_tree("(= role sensor)"), Effect::permit, 0});
    CHECK(store.authorize(5, dev).permitted);
    CHECK(store.authorize(5, dev).reason == "permit");
    CHECK_FALSE(store.authorize(5, attrs({{"role", std::string("admin")}})).permitted);
    CHECK(store.authorize(5, attrs({})).reason == "no-matching-permit");

    // replacement, not accumulation
    store.put({5, parse_tree("(= role admin)"), Effect::permit, 1});
    CHECK(store.size() == 1);
    CHECK_FALSE(store.authorize(5, dev).permitted);

    // explicit deny wins when its tree holds
    store.put({6, parse_tree("(= role sensor)"), Effect::deny, 0});
    auto d = store.authorize(6, dev);
    CHECK_FALSE(d.permitted);
    CHECK(d.reason == "explicit-deny");
    CHECK(store.authorize(6, attrs({})).reason == "no-matching-permit");

    store.drop(5);
    CHECK(store.find(5) == nullptr);
    CHECK(store.authorize(5, dev).reason == "no-matching-policy");
}

TEST_CASE("flow attributes fold packet fields into the set") {
    auto base = attrs({{"role", std::string("sensor")}});
    auto flow = flow_attributes(base, {3}, {1}, MsgType::reading);
    CHECK(std::get<std::int64_t>(flow.at("src")) == 3);
    CHECK(std::get<std::int64_t>(flow.at("dst")) == 1);
    CHECK(std::get<std::string>(flow.at("msg_type")) == "reading");
    CHECK(evaluate(parse_tree("(and (= role sensor) (= msg_type reading) (= dst 1))"), flow));
    CHECK_FALSE(evaluate(parse_tree("(= msg_type control)"), flow));
}
