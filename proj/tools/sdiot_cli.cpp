#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "sdiot/matrix.hpp"
#include "sdiot/runner.hpp"

namespace {

enum ExitCode { kOk = 0, kParseError = 1, kInvariantError = 2, kCellFailure = 3 };

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw sdiot::ConfigError("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

int cmd_validate(const std::string& file, const std::string& log_level) {
    auto spec = sdiot::scenario::parse_scenario(slurp(file));
    if (log_level != "quiet")
        std::cout << "ok: " << spec.name << " (" << spec.node_count() << " nodes, "
                  << spec.duration << " ticks, " << spec.attacks.size() << " attacks)\n";
    return kOk;
}

int cmd_run(const std::string& file, std::optional<std::uint64_t> seed,
            const std::string& out_dir, const std::string& log_level) {
    auto spec = sdiot::scenario::parse_scenario(slurp(file));
    if (seed) spec.topology.seed = *seed;
    auto res = sdiot::runner::run_scenario(spec);
    if (!out_dir.empty()) sdiot::runner::write_outputs(res, out_dir);
    if (log_level == "trace") std::cout << res.audit_text;
    if (log_level != "quiet") std::cout << res.report.text();
    if (res.report.aggregates_checked && !res.report.aggregates_match) return kInvariantError;
    return kOk;
}

int cmd_matrix(const std::string& out_dir, const std::string& log_level) {
    auto rep = sdiot::matrix::run_matrix();
    std::string grid = rep.grid();
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        std::ofstream out(std::filesystem::path(out_dir) / "grid.txt", std::ios::binary);
        out << grid;
    }
    if (log_level != "quiet") std::cout << grid;
    return rep.all_pass ? kOk : kCellFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SDN-managed IoT security framework scenario driver"};
    app.require_subcommand(1);
    app.fallthrough();  // --log-level is accepted before or after the subcommand
    std::string log_level = "info";
    app.add_option("--log-level", log_level, "quiet, info, or trace")
        ->check(CLI::IsMember({"quiet", "info", "trace"}));

    std::string run_file, run_out;
    std::optional<std::uint64_t> run_seed;
    auto* run = app.add_subcommand("run", "execute a scenario file");
    run->add_option("file", run_file, "scenario file")->required();
    run->add_option("--seed", run_seed, "override the topology seed");
    run->add_option("--out", run_out, "directory for report.txt, report.kv, audit.log");

    std::string val_file;
    auto* validate = app.add_subcommand("validate", "parse and check a scenario file");
    validate->add_option("file", val_file, "scenario file")->required();

    std::string matrix_out;
    auto* matrix = app.add_subcommand("matrix", "run the full coverage matrix");
    matrix->add_option("--out", matrix_out, "directory for grid.txt");

    try {
        app.parse(argc, argv);
        if (run->parsed()) return cmd_run(run_file, run_seed, run_out, log_level);
        if (validate->parsed()) return cmd_validate(val_file, log_level);
        if (matrix->parsed()) return cmd_matrix(matrix_out, log_level);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? kParseError : kOk;
    } catch (const sdiot::scenario::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kParseError;
    } catch (const sdiot::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kParseError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInvariantError;
    }
    return kOk;
}
