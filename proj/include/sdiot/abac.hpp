#pragma once

#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <variant>

#include "sdiot/southbound.hpp"
#include "sdiot/util.hpp"

namespace sdiot::abac {

using AttrValue = std::variant<std::int64_t, std::string>;
using AttributeSet = std::map<std::string, AttrValue>;

inline std::string value_str(const AttrValue& v) {
    if (std::holds_alternative<std::int64_t>(v)) return std::to_string(std::get<std::int64_t>(v));
    return std::get<std::string>(v);
}

enum class LeafOp { eq, ne, lt, ge, in_set };

// Boolean attribute gate tree. Evaluation is total: a missing attribute
// simply makes its leaf false.
struct AccessTree {
    enum class Gate { leaf, and_gate, or_gate, threshold };

    Gate gate = Gate::leaf;
    std::size_t k = 0;  // threshold arity
    std::vector<AccessTree> children;

    // leaf fields
    std::string attr;
    LeafOp op = LeafOp::eq;
    std::vector<AttrValue> values;  // one value, or the set for `in`

    void validate() const {
        switch (gate) {
            case Gate::leaf:
                if (attr.empty() || values.empty()) throw ConfigError("malformed leaf");
                break;
            case Gate::and_gate:
            case Gate::or_gate:
                if (children.empty()) throw ConfigError("empty gate");
                break;
            case Gate::threshold:
                if (children.empty() || k < 1 || k > children.size())
                    throw ConfigError("threshold k out of range");
                break;
        }
        for (const auto& c : children) c.validate();
    }
};

inline bool leaf_holds(const AccessTree& leaf, const AttributeSet& attrs) {
    auto it = attrs.find(leaf.attr);
    if (it == attrs.end()) return false;
    const AttrValue& have = it->second;
    auto same_type = [&](const AttrValue& want) { return have.index() == want.index(); };
    switch (leaf.op) {
        case LeafOp::eq:
            return same_type(leaf.values[0]) && have == leaf.values[0];
        case LeafOp::ne:
            return !same_type(leaf.values[0]) || have != leaf.values[0];
        case LeafOp::lt:
            return same_type(leaf.values[0]) && have < leaf.values[0];
        case LeafOp::ge:
            return same_type(leaf.values[0]) && have >= leaf.values[0];
        case LeafOp::in_set:
            for (const auto& v : leaf.values)
                if (same_type(v) && have == v) return true;
            return false;
    }
    return false;
}

inline bool evaluate(const AccessTree& tree, const AttributeSet& attrs) {
    switch (tree.gate) {
        case AccessTree::Gate::leaf:
            return leaf_holds(tree, attrs);
        case AccessTree::Gate::and_gate:
            for (const auto& c : tree.children)
                if (!evaluate(c, attrs)) return false;
            return true;
        case AccessTree::Gate::or_gate:
            for (const auto& c : tree.children)
                if (evaluate(c, attrs)) return true;
            return false;
        case AccessTree::Gate::threshold: {
            std::size_t hits = 0;
            for (const auto& c : tree.children)
                if (evaluate(c, attrs)) ++hits;
            return hits >= tree.k;
        }
    }
    return false;
}

// ---- tree text grammar -------------------------------------------------------
// (and e...) (or e...) (k-of K e...) (= attr v) (!= attr v) (< attr v)
// (>= attr v) (in attr v...)  — integers parse as numbers, anything else as
// strings; ${name} placeholders are bound at policy derivation.

namespace detail {
inline void skip_ws(std::string_view s, std::size_t& i) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
}

inline std::string next_token(std::string_view s, std::size_t& i) {
    skip_ws(s, i);
    std::size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i])) && s[i] != '(' &&
           s[i] != ')')
        ++i;
    if (start == i) throw ConfigError("expected token in tree expression");
    return std::string(s.substr(start, i - start));
}

inline AttrValue parse_value(const std::string& tok) {
    if (!tok.empty() && (std::isdigit(static_cast<unsigned char>(tok[0])) ||
                         (tok[0] == '-' && tok.size() > 1))) {
        try {
            std::size_t pos = 0;
            std::int64_t v = std::stoll(tok, &pos);
            if (pos == tok.size()) return v;
        } catch (...) {
        }
    }
    return tok;
}

inline AccessTree parse_expr(std::string_view s, std::size_t& i) {
    skip_ws(s, i);
    if (i >= s.size() || s[i] != '(') throw ConfigError("expected '(' in tree expression");
    ++i;
    std::string head = next_token(s, i);
    AccessTree node;
    auto parse_children = [&] {
        skip_ws(s, i);
        while (i < s.size() && s[i] == '(') {
            node.children.push_back(parse_expr(s, i));
            skip_ws(s, i);
        }
    };
    if (head == "and" || head == "or" || head == "k-of") {
        if (head == "k-of") {
            node.gate = AccessTree::Gate::threshold;
            node.k = static_cast<std::size_t>(std::stoull(next_token(s, i)));
        } else {
            node.gate = head == "and" ? AccessTree::Gate::and_gate : AccessTree::Gate::or_gate;
        }
        parse_children();
    } else {
        node.gate = AccessTree::Gate::leaf;
        if (head == "=") node.op = LeafOp::eq;
        else if (head == "!=") node.op = LeafOp::ne;
        else if (head == "<") node.op = LeafOp::lt;
        else if (head == ">=") node.op = LeafOp::ge;
        else if (head == "in") node.op = LeafOp::in_set;
        else throw ConfigError("unknown tree operator: " + head);
        node.attr = next_token(s, i);
        skip_ws(s, i);
        while (i < s.size() && s[i] != ')') {
            node.values.push_back(parse_value(next_token(s, i)));
            skip_ws(s, i);
        }
        if (node.op != LeafOp::in_set && node.values.size() != 1)
            throw ConfigError("operator expects exactly one value: " + node.attr);
    }
    skip_ws(s, i);
    if (i >= s.size() || s[i] != ')') throw ConfigError("expected ')' in tree expression");
    ++i;
    return node;
}
}  // namespace detail

inline AccessTree parse_tree(std::string_view text) {
    std::size_t i = 0;
    AccessTree t = detail::parse_expr(text, i);
    detail::skip_ws(text, i);
    if (i != text.size()) throw ConfigError("trailing input after tree expression");
    t.validate();
    return t;
}

inline std::string render_tree(const AccessTree& t) {
    std::ostringstream os;
    os << "(";
    switch (t.gate) {
        case AccessTree::Gate::and_gate: os << "and"; break;
        case AccessTree::Gate::or_gate: os << "or"; break;
        case AccessTree::Gate::threshold: os << "k-of " << t.k; break;
        case AccessTree::Gate::leaf: {
            switch (t.op) {
                case LeafOp::eq: os << "="; break;
                case LeafOp::ne: os << "!="; break;
                case LeafOp::lt: os << "<"; break;
                case LeafOp::ge: os << ">="; break;
                case LeafOp::in_set: os << "in"; break;
            }
            os << " " << t.attr;
            for (const auto& v : t.values) os << " " << value_str(v);
            break;
        }
    }
    for (const auto& c : t.children) os << " " << render_tree(c);
    os << ")";
    return os.str();
}

// Binds ${name} placeholders in leaf values against a device's attributes.
inline AccessTree instantiate(const AccessTree& tmpl, const AttributeSet& bindings) {
    AccessTree out = tmpl;
    if (out.gate == AccessTree::Gate::leaf) {
        for (auto& v : out.values) {
            if (!std::holds_alternative<std::string>(v)) continue;
            const std::string& s = std::get<std::string>(v);
            if (s.size() > 3 && s.starts_with("${") && s.ends_with("}")) {
                std::string name = s.substr(2, s.size() - 3);
                auto it = bindings.find(name);
                if (it == bindings.end())
                    throw ConfigError("template references unknown attribute: " + name);
                v = it->second;
            }
        }
    }
    for (auto& c : out.children) c = instantiate(c, bindings);
    return out;
}

// ---- policies ------------------------------------------------------------------

enum class Effect { permit, deny };

struct Policy {
    std::uint32_t subject = 0;  // node id the policy governs
    AccessTree tree;
    Effect effect = Effect::permit;
    Tick stored_at = 0;
};

struct Decision {
    bool permitted = false;
    std::string reason;
};

// One live policy per subject; default deny.
class PolicyStore {
public:
    void put(Policy p) { live_[p.subject] = std::move(p); }

    const Policy* find(std::uint32_t subject) const {
        auto it = live_.find(subject);
        return it == live_.end() ? nullptr : &it->second;
    }

    void drop(std::uint32_t subject) { live_.erase(subject); }

    Decision authorize(std::uint32_t subject, const AttributeSet& attrs) const {
        const Policy* p = find(subject);
        if (!p) return {false, "no-matching-policy"};
        bool holds = evaluate(p->tree, attrs);
        if (p->effect == Effect::permit)
            return holds ? Decision{true, "permit"} : Decision{false, "no-matching-permit"};
        return holds ? Decision{false, "explicit-deny"} : Decision{false, "no-matching-permit"};
    }

    std::size_t size() const { return live_.size(); }
    const std::map<std::uint32_t, Policy>& all() const { return live_; }

private:
    std::map<std::uint32_t, Policy> live_;
};

// Flow fields folded into the attribute set so trees can gate on them.
inline AttributeSet flow_attributes(AttributeSet device_attrs, NodeId src, NodeId dst,
                                    MsgType type) {
    device_attrs["src"] = static_cast<std::int64_t>(src.id);
    device_attrs["dst"] = static_cast<std::int64_t>(dst.id);
    device_attrs["msg_type"] = std::string(to_string(type));
    return device_attrs;
}

}  // namespace sdiot::abac
