#pragma once

#include <charconv>
#include <map>
#include <sstream>

#include "sdiot/gateway.hpp"

namespace sdiot::scenario {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One scripted attack. Parameters stay as a key=value map; each kind
// validates the parameters it needs when the run is wired up.
struct AttackSpec {
    std::string kind;
    std::map<std::string, std::string> params;

    bool operator==(const AttackSpec&) const = default;

    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const {
        auto it = params.find(key);
        if (it == params.end()) return fallback;
        std::uint64_t v{};
        auto [p, ec] = std::from_chars(it->second.data(), it->second.data() + it->second.size(), v);
        if (ec != std::errc{} || p != it->second.data() + it->second.size())
            throw ParseError("attack " + kind + ": malformed number in " + key);
        return v;
    }

    std::uint64_t require_u64(const std::string& key) const {
        if (!params.count(key)) throw ParseError("attack " + kind + ": missing parameter " + key);
        return get_u64(key, 0);
    }

    double get_f64(const std::string& key, double fallback) const {
        auto it = params.find(key);
        if (it == params.end()) return fallback;
        try {
            std::size_t pos = 0;
            double v = std::stod(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("trailing");
            return v;
        } catch (...) {
            throw ParseError("attack " + kind + ": malformed number in " + key);
        }
    }

    std::string get_str(const std::string& key, const std::string& fallback) const {
        auto it = params.find(key);
        return it == params.end() ? fallback : it->second;
    }
};

inline const std::vector<std::string>& known_attack_kinds() {
    static const std::vector<std::string> kinds = {
        "eavesdrop",    "corrupt",       "replay",       "flood",
        "ddos",         "scan",          "fake_id",      "wrong_key_auth",
        "rogue_service", "unauthorized_flow", "storage_access", "revoked_send",
        "misbehave"};
    return kinds;
}

struct ScenarioSpec {
    std::string name = "scenario";
    TopologySpec topology;
    Tick duration = 1000;
    Tick reading_period = 20;
    std::uint64_t reading_base = 10;
    std::string curve = "toy17";
    privacy::AggregateMode aggregate_mode = privacy::AggregateMode::sum;
    gateway::ModuleFlags modules;
    double trust_alpha = trust::kDefaultAlpha;
    double trust_tau = trust::kDefaultThreshold;
    mitigation::DetectorConfig detector;
    std::string device_policy_template;   // empty = gateway default
    std::string storage_policy_template;  // empty = gateway default
    std::vector<AttackSpec> attacks;

    std::uint32_t node_count() const {
        return 1 + topology.clusters + topology.clusters * topology.devices_per_cluster;
    }

    void validate() const {
        if (duration == 0) throw ParseError("run.duration must be > 0");
        if (reading_period == 0) throw ParseError("run.reading_period must be > 0");
        topology.validate();
        detector.validate();
        if (trust_alpha <= 0.0 || trust_alpha > 1.0) throw ParseError("trust.alpha out of range");
        if (trust_tau < 0.0 || trust_tau > 1.0) throw ParseError("trust.tau out of range");
        if (modules.privacy && !modules.keymgmt)
            throw ParseError("modules: privacy requires keymgmt");
        ecc::curve_by_name(curve);
        if (!device_policy_template.empty()) abac::parse_tree(device_policy_template);
        if (!storage_policy_template.empty()) abac::parse_tree(storage_policy_template);
        for (const auto& a : attacks) {
            if (std::find(known_attack_kinds().begin(), known_attack_kinds().end(), a.kind) ==
                known_attack_kinds().end())
                throw ParseError("unknown attack kind: " + a.kind);
            if (a.params.count("node")) {
                auto n = a.require_u64("node");
                if (n >= node_count() && a.kind != "storage_access" && a.kind != "rogue_service" &&
                    a.kind != "wrong_key_auth" && a.kind != "fake_id" && a.kind != "flood")
                    throw ParseError("attack " + a.kind + ": node " + std::to_string(n) +
                                     " not in topology");
            }
        }
    }

    bool operator==(const ScenarioSpec& o) const {
        return render() == o.render();
    }

    std::string render() const;
};

namespace detail {
inline std::string trim(std::string s) {
    auto issp = [](unsigned char c) { return std::isspace(c); };
    while (!s.empty() && issp(s.front())) s.erase(s.begin());
    while (!s.empty() && issp(s.back())) s.pop_back();
    return s;
}

inline std::uint64_t to_u64(const std::string& v, const std::string& field) {
    std::uint64_t out{};
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size())
        throw ParseError("malformed number in " + field + ": '" + v + "'");
    return out;
}

inline double to_f64(const std::string& v, const std::string& field) {
    try {
        std::size_t pos = 0;
        double out = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing");
        return out;
    } catch (...) {
        throw ParseError("malformed number in " + field + ": '" + v + "'");
    }
}

inline bool to_onoff(const std::string& v, const std::string& field) {
    if (v == "on" || v == "true" || v == "1") return true;
    if (v == "off" || v == "false" || v == "0") return false;
    throw ParseError("expected on/off in " + field + ": '" + v + "'");
}
}  // namespace detail

// Line-oriented `key = value` under [section] headers. Sections: topology,
// run, modules, trust, detector, policy, attacks.N.
inline ScenarioSpec parse_scenario(const std::string& text) {
    using detail::to_f64;
    using detail::to_onoff;
    using detail::to_u64;
    ScenarioSpec spec;
    std::string section;
    std::map<int, AttackSpec> attack_sections;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = detail::trim(raw);
        if (auto hash = line.find('#'); hash != std::string::npos)
            line = detail::trim(line.substr(0, hash));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ParseError("line " + std::to_string(lineno) + ": unterminated section header");
            section = line.substr(1, line.size() - 2);
            if (section.starts_with("attacks.")) {
                int idx = static_cast<int>(to_u64(section.substr(8), section));
                attack_sections.try_emplace(idx);
            } else if (section != "topology" && section != "run" && section != "modules" &&
                       section != "trust" && section != "detector" && section != "policy") {
                throw ParseError("line " + std::to_string(lineno) + ": unknown section [" +
                                 section + "]");
            }
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("line " + std::to_string(lineno) + ": expected key = value");
        std::string key = detail::trim(line.substr(0, eq));
        std::string value = detail::trim(line.substr(eq + 1));
        std::string field = section + "." + key;

        if (section == "topology") {
            if (key == "clusters") spec.topology.clusters = static_cast<std::uint32_t>(to_u64(value, field));
            else if (key == "devices_per_cluster")
                spec.topology.devices_per_cluster = static_cast<std::uint32_t>(to_u64(value, field));
            else if (key == "link_loss_rate") spec.topology.link_loss_rate = to_f64(value, field);
            else if (key == "seed") spec.topology.seed = to_u64(value, field);
            else throw ParseError("unknown field " + field);
        } else if (section == "run") {
            if (key == "name") spec.name = value;
            else if (key == "duration") spec.duration = to_u64(value, field);
            else if (key == "reading_period") spec.reading_period = to_u64(value, field);
            else if (key == "reading_base") spec.reading_base = to_u64(value, field);
            else if (key == "curve") spec.curve = value;
            else if (key == "aggregate_mode") {
                if (value == "sum") spec.aggregate_mode = privacy::AggregateMode::sum;
                else if (value == "mean") spec.aggregate_mode = privacy::AggregateMode::mean;
                else if (value == "count") spec.aggregate_mode = privacy::AggregateMode::count;
                else throw ParseError("unknown aggregate_mode: " + value);
            } else throw ParseError("unknown field " + field);
        } else if (section == "modules") {
            bool on = to_onoff(value, field);
            if (key == "privacy") spec.modules.privacy = on;
            else if (key == "trust") spec.modules.trust = on;
            else if (key == "keymgmt") spec.modules.keymgmt = on;
            else if (key == "authn") spec.modules.authn = on;
            else if (key == "abac") spec.modules.abac = on;
            else if (key == "mitigation") spec.modules.mitigation = on;
            else throw ParseError("unknown module name: " + key);
        } else if (section == "trust") {
            if (key == "alpha") spec.trust_alpha = to_f64(value, field);
            else if (key == "tau") spec.trust_tau = to_f64(value, field);
            else throw ParseError("unknown field " + field);
        } else if (section == "detector") {
            if (key == "window") spec.detector.window = to_u64(value, field);
            else if (key == "dos_multiplier") spec.detector.dos_rate_multiplier = to_f64(value, field);
            else if (key == "scan_fanout") spec.detector.scan_fanout_limit = static_cast<std::uint32_t>(to_u64(value, field));
            else if (key == "auth_failure_limit") spec.detector.auth_failure_limit = static_cast<std::uint32_t>(to_u64(value, field));
            else if (key == "integrity_failure_limit") spec.detector.integrity_failure_limit = static_cast<std::uint32_t>(to_u64(value, field));
            else if (key == "learning_windows") spec.detector.baseline_learning_windows = static_cast<std::uint32_t>(to_u64(value, field));
            else throw ParseError("unknown field " + field);
        } else if (section == "policy") {
            if (key == "device_template") spec.device_policy_template = value;
            else if (key == "storage_template") spec.storage_policy_template = value;
            else throw ParseError("unknown field " + field);
        } else if (section.starts_with("attacks.")) {
            int idx = static_cast<int>(to_u64(section.substr(8), section));
            auto& atk = attack_sections[idx];
            if (key == "kind") atk.kind = value;
            else atk.params[key] = value;
        } else {
            throw ParseError("line " + std::to_string(lineno) + ": key outside any section");
        }
    }
    for (auto& [idx, atk] : attack_sections) {
        if (atk.kind.empty())
            throw ParseError("attacks." + std::to_string(idx) + ": missing kind");
        spec.attacks.push_back(std::move(atk));
    }
    spec.validate();
    return spec;
}

inline std::string ScenarioSpec::render() const {
    std::ostringstream os;
    os << "[run]\n";
    os << "name = " << name << "\n";
    os << "duration = " << duration << "\n";
    os << "reading_period = " << reading_period << "\n";
    os << "reading_base = " << reading_base << "\n";
    os << "curve = " << curve << "\n";
    os << "aggregate_mode = " << privacy::to_string(aggregate_mode) << "\n";
    os << "\n[topology]\n";
    os << "clusters = " << topology.clusters << "\n";
    os << "devices_per_cluster = " << topology.devices_per_cluster << "\n";
    os << "link_loss_rate = " << topology.link_loss_rate << "\n";
    os << "seed = " << topology.seed << "\n";
    os << "\n[modules]\n";
    os << "privacy = " << (modules.privacy ? "on" : "off") << "\n";
    os << "trust = " << (modules.trust ? "on" : "off") << "\n";
    os << "keymgmt = " << (modules.keymgmt ? "on" : "off") << "\n";
    os << "authn = " << (modules.authn ? "on" : "off") << "\n";
    os << "abac = " << (modules.abac ? "on" : "off") << "\n";
    os << "mitigation = " << (modules.mitigation ? "on" : "off") << "\n";
    os << "\n[trust]\n";
    os << "alpha = " << trust_alpha << "\n";
    os << "tau = " << trust_tau << "\n";
    os << "\n[detector]\n";
    os << "window = " << detector.window << "\n";
    os << "dos_multiplier = " << detector.dos_rate_multiplier << "\n";
    os << "scan_fanout = " << detector.scan_fanout_limit << "\n";
    os << "auth_failure_limit = " << detector.auth_failure_limit << "\n";
    os << "integrity_failure_limit = " << detector.integrity_failure_limit << "\n";
    os << "learning_windows = " << detector.baseline_learning_windows << "\n";
    if (!device_policy_template.empty() || !storage_policy_template.empty()) {
        os << "\n[policy]\n";
        if (!device_policy_template.empty())
            os << "device_template = " << device_policy_template << "\n";
        if (!storage_policy_template.empty())
            os << "storage_template = " << storage_policy_template << "\n";
    }
    for (std::size_t i = 0; i < attacks.size(); ++i) {
        os << "\n[attacks." << i << "]\n";
        os << "kind = " << attacks[i].kind << "\n";
        for (const auto& [k, v] : attacks[i].params) os << k << " = " << v << "\n";
    }
    return os.str();
}

}  // namespace sdiot::scenario
