#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>

#include "riscache/harness.hpp"

using namespace riscache;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream is(path);
    REQUIRE(is);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) : path("/tmp/riscache_test_" + name) {}
    ~TempFile() { std::remove(path.c_str()); }
};

const char* kSmallConfig =
    "m = 8\n"
    "k = 2\n"
    "n = 16\n"
    "f = 20\n"
    "s0 = 5\n"
    "rate_targets = 5e7\n"
    "trials = 2\n"
    "seed = 7\n"
    "schemes = random_phase, no_ris\n";

}  // namespace

TEST_CASE("parse_config defaults") {
    ExperimentSpec spec = parse_config("");
    CHECK(spec.base.M == 16);
    CHECK(spec.base.K == 5);
    CHECK(spec.base.N == 50);
    CHECK(spec.base.F == 1000);
    CHECK(spec.base.S0 == 100.0);
    CHECK(spec.base.zipf_eps == 1.0);
    CHECK(spec.base.bandwidth_B == 1e7);
    CHECK(spec.base.noise_psd == 1e-18);
    REQUIRE(spec.base.rate_targets.size() == 5);
    for (double r : spec.base.rate_targets) CHECK(r == 1e8);
    CHECK(spec.base.sinr_target(0) == Catch::Approx(1023.0).epsilon(1e-12));
    CHECK(spec.trials == 1);
    CHECK(spec.seed == 1);
    CHECK(spec.sweep_axis == SweepAxis::none);
    CHECK(spec.schemes.size() == 3);
    CHECK(spec.caching.size() == 1);
}

TEST_CASE("parse_config scalar rate target broadcasts to K users") {
    ExperimentSpec spec = parse_config("k = 3\nrate_targets = 5e7\n");
    REQUIRE(spec.base.rate_targets.size() == 3);
    for (double r : spec.base.rate_targets) CHECK(r == 5e7);

    spec = parse_config("k = 2\nrate_targets = 5e7, 1e8\n");
    REQUIRE(spec.base.rate_targets.size() == 2);
    CHECK(spec.base.rate_targets[0] == 5e7);
    CHECK(spec.base.rate_targets[1] == 1e8);
}

TEST_CASE("parse_config rejects bad input with the key named") {
    CHECK_THROWS_AS(parse_config("bogus_key = 3\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("trials = 0\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("trials = -2\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("f = 10\ns0 = 11\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("m = 2.5\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("sweep_axis = n_elements\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("schemes = frobnicate\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("just a line\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("k = 3\nrate_targets = 1e8, 1e8\n"), ConfigError);

    try {
        parse_config("bogus_key = 3\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("bogus_key") != std::string::npos);
    }
}

TEST_CASE("parse_config ignores comments and blank lines") {
    ExperimentSpec spec = parse_config("# header\n\n  m = 4\n\n# tail\n");
    CHECK(spec.base.M == 4);
    // trailing text after a value is rejected, not silently ignored
    CHECK_THROWS_AS(parse_config("m = 4 extra\n"), ConfigError);
}

TEST_CASE("run_experiment output is deterministic byte for byte") {
    ExperimentSpec spec = parse_config(kSmallConfig);
    TempFile f1("det_a.csv"), f2("det_b.csv");
    emit_csv(run_experiment(spec), f1.path);
    emit_csv(run_experiment(spec), f2.path);
    std::string a = slurp(f1.path), b = slurp(f2.path);
    CHECK(a == b);
    CHECK(a.rfind("axis_value,scheme,caching,", 0) == 0);

    // changing the seed changes the numbers
    spec.seed = 8;
    TempFile f3("det_c.csv");
    emit_csv(run_experiment(spec), f3.path);
    CHECK(slurp(f3.path) != a);
}

TEST_CASE("run_experiment row layout and sort order") {
    ExperimentSpec spec = parse_config(kSmallConfig);
    spec.sweep_axis = SweepAxis::n_elements;
    spec.sweep_values = {16.0, 8.0};
    spec.caching = {CachingStrategy::urc, CachingStrategy::oc};
    auto rows = run_experiment(spec);
    REQUIRE(rows.size() == 2 * 2 * 2);  // axis x scheme x caching
    for (size_t i = 1; i < rows.size(); ++i) {
        const auto &p = rows[i - 1], &q = rows[i];
        bool ordered = p.axis_value < q.axis_value ||
                       (p.axis_value == q.axis_value &&
                        (p.scheme < q.scheme ||
                         (p.scheme == q.scheme && p.caching < q.caching)));
        CHECK(ordered);
    }
    CHECK(rows.front().axis_value == 8.0);
    for (const auto& r : rows) {
        CHECK(r.trials == 2);
        CHECK(r.feasible_fraction >= 0.0);
        CHECK(r.feasible_fraction <= 1.0);
    }

    // no_ris ignores N: its mean power is identical across the N sweep
    double p8 = -1.0, p16 = -1.0;
    for (const auto& r : rows) {
        if (r.scheme != "no_ris" || r.caching != "oc") continue;
        (r.axis_value == 8.0 ? p8 : p16) = r.mean_power_mw;
    }
    CHECK(p8 == p16);
}

TEST_CASE("backhaul column is constant for urc across a zipf sweep") {
    ExperimentSpec spec = parse_config(kSmallConfig);
    spec.sweep_axis = SweepAxis::zipf_eps;
    spec.sweep_values = {0.5, 1.0, 1.5};
    spec.schemes = {Scheme::no_ris};
    spec.caching = {CachingStrategy::urc, CachingStrategy::oc};
    auto rows = run_experiment(spec);
    double urc_ref = -1.0;
    std::vector<double> oc_vals;
    for (const auto& r : rows) {
        if (r.caching == "urc") {
            if (urc_ref < 0.0) urc_ref = r.mean_backhaul_mbps;
            CHECK(r.mean_backhaul_mbps == Catch::Approx(urc_ref).epsilon(1e-12));
        } else {
            oc_vals.push_back(r.mean_backhaul_mbps);
        }
    }
    // optimized placement improves as popularity skews
    REQUIRE(oc_vals.size() == 3);
    CHECK(oc_vals[1] < oc_vals[0]);
    CHECK(oc_vals[2] < oc_vals[1]);
    // and never exceeds uniform caching
    for (double v : oc_vals) CHECK(v <= urc_ref + 1e-12);
}

TEST_CASE("emit_trial_csv dumps one line per (axis, trial, scheme)") {
    ExperimentSpec spec = parse_config(kSmallConfig);
    std::vector<TrialRecord> recs;
    run_experiment(spec, &recs);
    CHECK(recs.size() == 2u * 2u);  // trials x schemes
    TempFile f("trials.csv");
    emit_trial_csv(recs, f.path);
    std::string text = slurp(f.path);
    CHECK(text.rfind("axis_value,trial,scheme,feasible,power_w", 0) == 0);
    size_t lines = static_cast<size_t>(std::count(text.begin(), text.end(), '\n'));
    CHECK(lines == recs.size() + 1);
}

TEST_CASE("emit_csv fails loudly on an unwritable path") {
    CHECK_THROWS_AS(emit_csv({}, "/nonexistent_dir/x.csv"), std::runtime_error);
}
