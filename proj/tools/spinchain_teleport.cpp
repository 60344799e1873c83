// spinchain-teleport: runs experiment configs and writes CSV tables.
//
//   spinchain-teleport run <config> [--out <path>] [--workers <k>] [--seed <s>] [--verbose]
//   spinchain-teleport validate <config>
//
// Exit codes: 0 success, 1 config error, 2 numerical failure.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "spinchain/experiment/runners.hpp"

namespace ex = spinchain::experiment;

namespace {

constexpr int exit_config = 1;
constexpr int exit_numerical = 2;

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ex::ConfigError("", 0, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::optional<std::uint64_t> env_seed() {
    const char* v = std::getenv("SPINCHAIN_SEED");
    if (!v || !*v) return std::nullopt;
    const std::string s(v);
    std::size_t used = 0;
    std::uint64_t seed = 0;
    try {
        if (s[0] == '-') throw std::invalid_argument("negative");
        seed = std::stoull(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size() || used == 0) throw ex::ConfigError("SPINCHAIN_SEED", 0, "not a non-negative integer: '" + s + "'");
    return seed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Edge-block teleportation experiments on XX spin chains"};
    app.set_version_flag("--version", std::string(ex::version));
    app.require_subcommand(1);

    std::string run_path, validate_path, out_path;
    unsigned workers = 0;
    std::optional<std::uint64_t> seed_flag;
    bool verbose = false;

    auto* run = app.add_subcommand("run", "Run an experiment config");
    run->add_option("config", run_path, "Config file")->required();
    run->add_option("--out", out_path, "Output CSV path (overrides 'output' in the config, '-' for stdout)");
    run->add_option("--workers", workers, "Worker threads (default: hardware concurrency)");
    run->add_option("--seed", seed_flag, "Monte Carlo seed (overrides SPINCHAIN_SEED and the config)");
    run->add_flag("--verbose", verbose, "Progress on stderr");

    auto* validate = app.add_subcommand("validate", "Parse and validate a config");
    validate->add_option("config", validate_path, "Config file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_config;
    }

    ex::RunConfig cfg;
    const std::string& path = run->parsed() ? run_path : validate_path;
    try {
        cfg = ex::parse_config(read_file(path));
        if (const auto s = env_seed()) cfg.seed = s;
        if (seed_flag) cfg.seed = seed_flag;
        if (cfg.samples > 0 && !cfg.seed) throw ex::ConfigError("seed", 0, "samples > 0 requires a seed");
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_config;
    }
    for (const auto& w : cfg.warnings) std::cerr << "warning: " << w << '\n';

    if (validate->parsed()) {
        std::cout << path << ": ok (" << ex::to_string(cfg.kind) << ")\n";
        return 0;
    }

    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    const auto begin = std::chrono::steady_clock::now();
    if (verbose) std::cerr << "running " << ex::to_string(cfg.kind) << " with " << workers << " worker(s)\n";

    ex::ResultTable table({});
    try {
        table = ex::run_experiment(cfg, workers);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_numerical;
    }

    if (out_path.empty()) out_path = cfg.output.empty() ? "-" : cfg.output;
    if (out_path == "-") {
        table.write_csv(std::cout);
    } else {
        std::ofstream out(out_path);
        if (!out) {
            std::cerr << "error: cannot write '" << out_path << "'\n";
            return exit_config;
        }
        table.write_csv(out);
    }
    if (verbose) {
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - begin).count();
        std::cerr << table.rows().size() << " rows in " << secs << " s\n";
    }
    return 0;
}
