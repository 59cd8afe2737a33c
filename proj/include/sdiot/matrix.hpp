#pragma once

#include "sdiot/runner.hpp"

namespace sdiot::matrix {

using runner::Outcome;
using scenario::AttackSpec;
using scenario::ScenarioSpec;

// Requirement/threat rows against the six security modules. A claimed cell
// carries a paired experiment: the run with the module enabled must hold the
// property, and the run with the module disabled must demonstrably fail it.
inline const std::vector<std::string>& module_columns() {
    static const std::vector<std::string> cols = {"privacy", "trust",   "keymgmt",
                                                  "authn",   "abac",    "mitigation"};
    return cols;
}

inline const std::vector<std::string>& threat_rows() {
    static const std::vector<std::string> rows = {
        "Confidentiality and Privacy",
        "Handling Security Attacks",
        "Authentication in IoT",
        "Identity Spoofing",
        "Access Control",
        "Trust in IoT",
        "Attacks on Availability",
        "Impersonation",
        "Eavesdropping",
        "Data Corruption",
        "Data Modification",
        "Secure Routing and Forwarding",
        "Robustness and resilience",
        "Audit Control",
        "Secure Network Access",
        "Secure Storage",
        "Tamper Resistance",
        "User Identification",
    };
    return rows;
}

struct MatrixCell {
    std::string threat;
    std::string module;
    enum class Mode { prevent, detect } mode = Mode::prevent;
    ScenarioSpec on_spec;
    std::size_t attack_index = 0;  // outcome judged for this cell
    bool require_neutralized = false;
    bool check_audit = false;
    // The source coverage table leaves this row unmarked even though the
    // narrative assigns it to the mitigation agent; tested against that
    // assignment and flagged.
    bool coverage_note = false;
};

struct CellResult {
    MatrixCell cell;
    runner::AttackOutcome on_outcome;
    runner::AttackOutcome off_outcome;
    bool on_ok = false;
    bool off_ok = false;
    bool pass = false;
    std::string note;
};

namespace detail {

inline ScenarioSpec base(const std::string& name, std::uint64_t seed) {
    ScenarioSpec s;
    s.name = name;
    s.topology.clusters = 1;
    s.topology.devices_per_cluster = 3;
    s.topology.seed = seed;
    s.duration = 1200;
    return s;
}

inline ScenarioSpec without_module(ScenarioSpec s, const std::string& module) {
    if (module == "privacy") {
        s.modules.privacy = false;
    } else if (module == "keymgmt") {
        s.modules.keymgmt = false;
        s.modules.privacy = false;  // privacy builds on managed keys
    } else if (module == "trust") {
        s.modules.trust = false;
    } else if (module == "authn") {
        s.modules.authn = false;
    } else if (module == "abac") {
        s.modules.abac = false;
    } else if (module == "mitigation") {
        s.modules.mitigation = false;
    } else {
        throw ConfigError("unknown module column: " + module);
    }
    s.name += "-off";
    return s;
}

inline AttackSpec attack(const std::string& kind,
                         std::map<std::string, std::string> params = {}) {
    AttackSpec a;
    a.kind = kind;
    a.params = std::move(params);
    return a;
}

}  // namespace detail

inline std::vector<MatrixCell> matrix_suite() {
    using detail::attack;
    using detail::base;
    std::vector<MatrixCell> cells;
    std::uint64_t seed = 11;
    auto add = [&](const std::string& threat, const std::string& module, MatrixCell::Mode mode,
                   std::vector<AttackSpec> attacks, std::size_t attack_index = 0) -> MatrixCell& {
        MatrixCell c;
        c.threat = threat;
        c.module = module;
        c.mode = mode;
        std::string slug;
        for (char ch : threat) slug += std::isalnum(static_cast<unsigned char>(ch))
                                           ? static_cast<char>(std::tolower(ch))
                                           : '-';
        c.on_spec = base(slug + "-" + module, seed++);
        c.on_spec.attacks = std::move(attacks);
        c.attack_index = attack_index;
        cells.push_back(std::move(c));
        return cells.back();
    };
    using Mode = MatrixCell::Mode;

    add("Confidentiality and Privacy", "privacy", Mode::prevent, {attack("eavesdrop")});
    add("Confidentiality and Privacy", "keymgmt", Mode::prevent, {attack("eavesdrop")});
    add("Handling Security Attacks", "mitigation", Mode::detect,
        {attack("flood", {{"start", "600"}, {"end", "1100"}, {"per_tick", "8"}})});
    add("Authentication in IoT", "keymgmt", Mode::prevent, {attack("fake_id", {{"start", "600"}})});
    add("Authentication in IoT", "authn", Mode::prevent,
        {attack("wrong_key_auth", {{"start", "600"}})});
    add("Identity Spoofing", "mitigation", Mode::detect, {attack("fake_id", {{"start", "600"}})});
    add("Access Control", "abac", Mode::prevent, {attack("unauthorized_flow", {{"start", "600"}})});
    add("Trust in IoT", "trust", Mode::prevent,
        {attack("misbehave", {{"node", "2"}, {"cooperate_prob", "0.2"}}),
         attack("rogue_service", {{"serving", "2"}, {"at", "1100"}})},
        1);
    add("Attacks on Availability", "mitigation", Mode::detect,
        {attack("ddos", {{"start", "600"}, {"end", "1100"}, {"per_tick", "5"}})})
        .coverage_note = true;
    add("Impersonation", "mitigation", Mode::detect,
        {attack("wrong_key_auth", {{"start", "600"}})});
    add("Eavesdropping", "privacy", Mode::prevent, {attack("eavesdrop")});
    add("Eavesdropping", "keymgmt", Mode::prevent, {attack("eavesdrop")});
    add("Eavesdropping", "mitigation", Mode::detect,
        {attack("replay", {{"capture_after", "600"}, {"replay_at", "650"}})});
    add("Data Corruption", "privacy", Mode::prevent, {attack("corrupt", {{"start", "600"}})});
    add("Data Corruption", "keymgmt", Mode::prevent, {attack("corrupt", {{"start", "600"}})});
    add("Data Modification", "privacy", Mode::prevent,
        {attack("corrupt", {{"start", "600"}, {"byte_index", "12"}})});
    add("Data Modification", "keymgmt", Mode::prevent,
        {attack("corrupt", {{"start", "600"}, {"byte_index", "12"}})});
    add("Secure Routing and Forwarding", "authn", Mode::prevent,
        {attack("wrong_key_auth", {{"start", "600"}})});
    add("Secure Routing and Forwarding", "mitigation", Mode::detect,
        {attack("scan", {{"start", "600"}})});
    add("Robustness and resilience", "mitigation", Mode::detect,
        {attack("flood", {{"start", "600"}, {"end", "1100"}, {"per_tick", "8"}})})
        .require_neutralized = true;
    add("Audit Control", "mitigation", Mode::detect,
        {attack("flood", {{"start", "600"}, {"end", "1100"}, {"per_tick", "8"}})})
        .check_audit = true;
    add("Secure Network Access", "keymgmt", Mode::prevent,
        {attack("revoked_send", {{"node", "2"}, {"revoke_at", "600"}})});
    add("Secure Network Access", "authn", Mode::prevent,
        {attack("wrong_key_auth", {{"start", "600"}, {"count", "8"}})});
    add("Secure Storage", "abac", Mode::prevent,
        {attack("storage_access", {{"at", "1100"}, {"op", "read"}})});
    add("Tamper Resistance", "abac", Mode::prevent,
        {attack("storage_access", {{"at", "1100"}, {"op", "write"}})});
    add("User Identification", "authn", Mode::prevent,
        {attack("wrong_key_auth", {{"start", "600"}, {"count", "10"}})});
    return cells;
}

inline CellResult evaluate_cell(const MatrixCell& cell) {
    CellResult r;
    r.cell = cell;
    auto on = runner::run_scenario(cell.on_spec);
    auto off = runner::run_scenario(detail::without_module(cell.on_spec, cell.module));
    r.on_outcome = on.outcomes.at(cell.attack_index);
    r.off_outcome = off.outcomes.at(cell.attack_index);

    Tick budget = 2 * cell.on_spec.detector.window;
    if (cell.mode == MatrixCell::Mode::detect) {
        r.on_ok = r.on_outcome.result == Outcome::detected && r.on_outcome.latency <= budget;
        r.off_ok = r.off_outcome.result != Outcome::detected;
    } else {
        r.on_ok = r.on_outcome.result != Outcome::missed;
        if (r.on_outcome.result == Outcome::detected) r.on_ok &= r.on_outcome.latency <= budget;
        r.off_ok = r.off_outcome.result == Outcome::missed;
    }
    if (cell.require_neutralized) r.on_ok &= r.on_outcome.neutralized;
    if (cell.check_audit) {
        auto has_alert_line = [](const std::vector<std::string>& lines) {
            for (const auto& l : lines)
                if (l.find("comp=mitigation ev=alert") != std::string::npos) return true;
            return false;
        };
        r.on_ok &= has_alert_line(on.controller->mitigation_agent().audit_trail());
        r.off_ok &= !has_alert_line(off.controller->mitigation_agent().audit_trail());
    }
    r.pass = r.on_ok && r.off_ok;
    std::ostringstream note;
    note << "on=" << runner::to_string(r.on_outcome.result);
    if (r.on_outcome.result == Outcome::detected) note << "@" << r.on_outcome.latency;
    note << " off=" << runner::to_string(r.off_outcome.result);
    if (cell.coverage_note) note << " [row unmarked in source coverage table]";
    r.note = note.str();
    return r;
}

struct MatrixReport {
    std::vector<CellResult> results;
    bool all_pass = true;

    std::string grid() const {
        // rows x modules; claimed cells show pass/FAIL, others are unclaimed
        std::map<std::pair<std::string, std::string>, const CellResult*> by_cell;
        for (const auto& r : results) by_cell[{r.cell.threat, r.cell.module}] = &r;
        std::size_t wrow = 0;
        for (const auto& t : threat_rows()) wrow = std::max(wrow, t.size());
        std::ostringstream os;
        os << std::string(wrow, ' ');
        for (const auto& m : module_columns()) os << "  " << m;
        os << "\n";
        for (const auto& t : threat_rows()) {
            os << t << std::string(wrow - t.size(), ' ');
            for (const auto& m : module_columns()) {
                std::string cellstr = ".";
                auto it = by_cell.find({t, m});
                if (it != by_cell.end()) cellstr = it->second->pass ? "pass" : "FAIL";
                std::size_t width = m.size() + 2;
                os << std::string(width - cellstr.size(), ' ') << cellstr;
            }
            os << "\n";
        }
        os << "\n";
        for (const auto& r : results) {
            os << (r.pass ? "pass" : "FAIL") << "  " << r.cell.threat << " x " << r.cell.module
               << "  (" << (r.cell.mode == MatrixCell::Mode::detect ? "detect" : "prevent")
               << ")  " << r.note << "\n";
        }
        return os.str();
    }
};

inline MatrixReport run_matrix() {
    MatrixReport rep;
    for (const auto& cell : matrix_suite()) {
        rep.results.push_back(evaluate_cell(cell));
        rep.all_pass &= rep.results.back().pass;
    }
    return rep;
}

}  // namespace sdiot::matrix
