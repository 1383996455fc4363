// Command-line front end: runs a single experiment point or a Monte Carlo
// sweep from a key=value config file and writes deterministic CSV.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "riscache/harness.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw riscache::ConfigError("cannot read config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct CommonFlags {
    std::string config_path;
    std::string out_path = "results.csv";
    std::string dump_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int trials = 0;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "experiment config file (key = value)")
        ->required();
    cmd->add_option("--out", flags.out_path, "output CSV path");
    cmd->add_option("--seed", flags.seed, "override the config seed")
        ->each([&flags](const std::string&) { flags.seed_set = true; });
    cmd->add_option("--trials", flags.trials, "override the config trial count");
    cmd->add_option("--dump-trials", flags.dump_path, "per-trial debug CSV path");
}

int execute(const CommonFlags& flags, bool force_single_point) {
    riscache::ExperimentSpec spec = riscache::parse_config(read_file(flags.config_path));
    if (flags.seed_set) spec.seed = flags.seed;
    if (flags.trials > 0) spec.trials = flags.trials;
    if (force_single_point) {
        spec.sweep_axis = riscache::SweepAxis::none;
        spec.sweep_values.clear();
    }
    spec.validate();
    std::vector<riscache::TrialRecord> dump;
    auto rows = riscache::run_experiment(spec, flags.dump_path.empty() ? nullptr : &dump);
    riscache::emit_csv(rows, flags.out_path);
    if (!flags.dump_path.empty()) riscache::emit_trial_csv(dump, flags.dump_path);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RIS-aided edge caching network cost simulator"};
    app.require_subcommand(1);

    CommonFlags run_flags, sweep_flags;
    CLI::App* run = app.add_subcommand("run", "single experiment point (no sweep)");
    add_common(run, run_flags);
    CLI::App* sweep = app.add_subcommand("sweep", "sweep over the configured axis");
    add_common(sweep, sweep_flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (run->parsed()) return execute(run_flags, true);
        return execute(sweep_flags, false);
    } catch (const riscache::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
