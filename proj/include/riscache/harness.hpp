#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "riscache/pipeline.hpp"

namespace riscache {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class SweepAxis { none, n_elements, zipf_eps, ris_y, alpha_G, alpha_ru };
enum class Scheme { optimized, random_phase, no_ris };
enum class CachingStrategy { oc, fppc, urc, none };

inline std::string to_string(SweepAxis a) {
    switch (a) {
        case SweepAxis::none: return "none";
        case SweepAxis::n_elements: return "n_elements";
        case SweepAxis::zipf_eps: return "zipf_eps";
        case SweepAxis::ris_y: return "ris_y";
        case SweepAxis::alpha_G: return "alpha_g";
        case SweepAxis::alpha_ru: return "alpha_ru";
    }
    return "?";
}
inline std::string to_string(Scheme s) {
    switch (s) {
        case Scheme::optimized: return "optimized";
        case Scheme::random_phase: return "random_phase";
        case Scheme::no_ris: return "no_ris";
    }
    return "?";
}
inline std::string to_string(CachingStrategy c) {
    switch (c) {
        case CachingStrategy::oc: return "oc";
        case CachingStrategy::fppc: return "fppc";
        case CachingStrategy::urc: return "urc";
        case CachingStrategy::none: return "none";
    }
    return "?";
}

struct ExperimentSpec {
    ScenarioConfig base;
    int trials = 1;
    std::uint64_t seed = 1;
    SweepAxis sweep_axis = SweepAxis::none;
    std::vector<double> sweep_values;
    std::vector<Scheme> schemes{Scheme::optimized, Scheme::random_phase, Scheme::no_ris};
    std::vector<CachingStrategy> caching{CachingStrategy::oc};

    void validate() const {
        base.validate();
        if (trials < 1) throw ConfigError("trials must be >= 1");
        if (sweep_axis != SweepAxis::none && sweep_values.empty())
            throw ConfigError("sweep_values must be nonempty when sweep_axis != none");
        if (schemes.empty()) throw ConfigError("schemes must be nonempty");
        if (caching.empty()) throw ConfigError("caching must be nonempty");
    }
};

struct ResultRow {
    double axis_value = 0.0;
    std::string scheme;
    std::string caching;
    double mean_power_mw = 0.0;
    double mean_backhaul_mbps = 0.0;
    double mean_total_cost = 0.0;
    double feasible_fraction = 0.0;
    int trials = 0;
};

struct TrialRecord {
    double axis_value;
    int trial;
    std::string scheme;
    bool feasible;
    double power_w;
};

namespace detail {

inline ScenarioConfig apply_axis(const ScenarioConfig& base, SweepAxis axis, double value) {
    ScenarioConfig cfg = base;
    switch (axis) {
        case SweepAxis::none: break;
        case SweepAxis::n_elements: cfg.N = static_cast<int>(value); break;
        case SweepAxis::zipf_eps: cfg.zipf_eps = value; break;
        case SweepAxis::ris_y: cfg.ris_pos.y = value; break;
        case SweepAxis::alpha_G: cfg.alpha_G = value; break;
        case SweepAxis::alpha_ru: cfg.alpha_ru = value; break;
    }
    return cfg;
}

inline std::vector<double> placement_for(CachingStrategy strat, const ScenarioConfig& cfg) {
    std::vector<double> b = zipf_popularity(cfg.F, cfg.zipf_eps);
    switch (strat) {
        case CachingStrategy::oc: return optimize_placement(b, cfg.S0);
        case CachingStrategy::fppc: return fppc_placement(b, cfg.S0);
        case CachingStrategy::urc: return urc_placement(cfg.F, cfg.S0);
        case CachingStrategy::none: return std::vector<double>(static_cast<size_t>(cfg.F), 0.0);
    }
    throw std::logic_error("placement_for: unknown strategy");
}

// RNG stream ids. Trial draws are derived from (seed, stream, trial) only,
// not the axis index, so the same fading realizations pair every axis point
// and every scheme within a trial.
constexpr std::uint64_t kStreamUsers = 1;
constexpr std::uint64_t kStreamChannels = 2;
constexpr std::uint64_t kStreamInitPhases = 3;
constexpr std::uint64_t kStreamRandomPhases = 4;

struct format_sig9 {
    double v;
};
inline std::ostream& operator<<(std::ostream& os, format_sig9 f) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", f.v);
    return os << buf;
}

}  // namespace detail

/// Runs the Monte Carlo sweep: for every (axis value x scheme x caching
/// strategy), `trials` seeded realizations are generated, optimized, and
/// aggregated. Deterministic given the spec. Infeasible realizations are
/// excluded from the means and counted in feasible_fraction.
inline std::vector<ResultRow> run_experiment(const ExperimentSpec& spec,
                                             std::vector<TrialRecord>* dump = nullptr) {
    spec.validate();
    std::vector<double> axis_values =
        (spec.sweep_axis == SweepAxis::none) ? std::vector<double>{0.0} : spec.sweep_values;

    std::vector<ResultRow> rows;
    for (double axis_value : axis_values) {
        ScenarioConfig cfg = detail::apply_axis(spec.base, spec.sweep_axis, axis_value);
        cfg.validate();

        struct Acc {
            double power = 0.0;
            int feasible = 0;
        };
        std::map<Scheme, Acc> acc;
        for (Scheme s : spec.schemes) acc[s] = Acc{};

        for (int trial = 0; trial < spec.trials; ++trial) {
            Rng user_rng = Rng::derive(spec.seed, detail::kStreamUsers, static_cast<std::uint64_t>(trial));
            Rng chan_rng = Rng::derive(spec.seed, detail::kStreamChannels, static_cast<std::uint64_t>(trial));
            std::vector<Vec3> users = place_users(cfg, user_rng);
            ChannelSet ch = gen_channels(cfg, users, chan_rng);

            for (Scheme s : spec.schemes) {
                OptimizationReport rep;
                switch (s) {
                    case Scheme::optimized: {
                        Rng r = Rng::derive(spec.seed, detail::kStreamInitPhases,
                                            static_cast<std::uint64_t>(trial));
                        rep = alternating_optimize(ch, cfg, r);
                        break;
                    }
                    case Scheme::random_phase: {
                        Rng r = Rng::derive(spec.seed, detail::kStreamRandomPhases,
                                            static_cast<std::uint64_t>(trial));
                        rep = scheme_random_phase(ch, cfg, r);
                        break;
                    }
                    case Scheme::no_ris:
                        rep = scheme_no_ris(ch, cfg);
                        break;
                }
                double power = rep.feasible ? rep.final_cost().power : 0.0;
                if (rep.feasible) {
                    acc[s].power += power;
                    ++acc[s].feasible;
                }
                if (dump)
                    dump->push_back({axis_value, trial, to_string(s), rep.feasible, power});
            }
        }

        for (Scheme s : spec.schemes) {
            int n_ok = acc[s].feasible;
            double mean_power_w = (n_ok > 0) ? acc[s].power / n_ok : 0.0;
            double frac = static_cast<double>(n_ok) / spec.trials;
            if (frac < 0.9)
                std::cerr << "warning: feasible fraction " << frac << " for scheme "
                          << to_string(s) << " at axis value " << axis_value << "\n";
            for (CachingStrategy strat : spec.caching) {
                std::vector<double> b = zipf_popularity(cfg.F, cfg.zipf_eps);
                std::vector<double> c = detail::placement_for(strat, cfg);
                double backhaul = backhaul_cost(c, b, cfg.rate_targets);
                ResultRow row;
                row.axis_value = axis_value;
                row.scheme = to_string(s);
                row.caching = to_string(strat);
                row.mean_power_mw = mean_power_w * 1e3;
                row.mean_backhaul_mbps = backhaul / 1e6;
                row.mean_total_cost =
                    NetworkCost::make(backhaul, mean_power_w, cfg.eta).total;
                row.feasible_fraction = frac;
                row.trials = spec.trials;
                rows.push_back(std::move(row));
            }
        }
    }
    std::sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
        if (a.axis_value != b.axis_value) return a.axis_value < b.axis_value;
        if (a.scheme != b.scheme) return a.scheme < b.scheme;
        return a.caching < b.caching;
    });
    return rows;
}

inline void emit_csv(const std::vector<ResultRow>& rows, const std::string& out_path) {
    std::ofstream os(out_path);
    if (!os) throw std::runtime_error("emit_csv: cannot open " + out_path);
    os << "axis_value,scheme,caching,mean_power_mw,mean_backhaul_mbps,mean_total_cost,"
          "feasible_fraction,trials\n";
    for (const ResultRow& r : rows) {
        os << detail::format_sig9{r.axis_value} << ',' << r.scheme << ',' << r.caching << ','
           << detail::format_sig9{r.mean_power_mw} << ','
           << detail::format_sig9{r.mean_backhaul_mbps} << ','
           << detail::format_sig9{r.mean_total_cost} << ','
           << detail::format_sig9{r.feasible_fraction} << ',' << r.trials << '\n';
    }
    if (!os) throw std::runtime_error("emit_csv: write failed for " + out_path);
}

inline void emit_trial_csv(const std::vector<TrialRecord>& recs, const std::string& out_path) {
    std::ofstream os(out_path);
    if (!os) throw std::runtime_error("emit_trial_csv: cannot open " + out_path);
    os << "axis_value,trial,scheme,feasible,power_w\n";
    for (const TrialRecord& r : recs)
        os << detail::format_sig9{r.axis_value} << ',' << r.trial << ',' << r.scheme << ','
           << (r.feasible ? 1 : 0) << ',' << detail::format_sig9{r.power_w} << '\n';
}

// ---- config file parsing (key = value, one per line, '#' comments) ----

namespace detail {

inline std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    return out;
}

inline double parse_double(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (...) {
        throw ConfigError("invalid numeric value for key '" + key + "': " + v);
    }
}

inline int parse_int(const std::string& key, const std::string& v) {
    double d = parse_double(key, v);
    int i = static_cast<int>(d);
    if (static_cast<double>(i) != d) throw ConfigError("key '" + key + "' must be an integer");
    return i;
}

inline Vec3 parse_vec3(const std::string& key, const std::string& v) {
    auto parts = split_list(v);
    if (parts.size() != 3) throw ConfigError("key '" + key + "' needs 3 comma-separated values");
    return {parse_double(key, parts[0]), parse_double(key, parts[1]), parse_double(key, parts[2])};
}

}  // namespace detail

/// Parses the plain-text key=value experiment configuration. Unknown keys
/// and out-of-range values are rejected with the offending key named.
inline ExperimentSpec parse_config(const std::string& text) {
    ExperimentSpec spec;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    bool rate_given = false;
    std::optional<double> rate_scalar;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        std::string key = detail::trim(t.substr(0, eq));
        std::string val = detail::trim(t.substr(eq + 1));
        if (key.empty() || val.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": empty key or value");

        ScenarioConfig& b = spec.base;
        if (key == "m") b.M = detail::parse_int(key, val);
        else if (key == "k") b.K = detail::parse_int(key, val);
        else if (key == "n") b.N = detail::parse_int(key, val);
        else if (key == "f") b.F = detail::parse_int(key, val);
        else if (key == "s0") b.S0 = detail::parse_double(key, val);
        else if (key == "zipf_eps") b.zipf_eps = detail::parse_double(key, val);
        else if (key == "bandwidth_b") b.bandwidth_B = detail::parse_double(key, val);
        else if (key == "noise_psd") b.noise_psd = detail::parse_double(key, val);
        else if (key == "eta") b.eta = detail::parse_double(key, val);
        else if (key == "rate_targets") {
            auto parts = detail::split_list(val);
            spec.base.rate_targets.clear();
            for (const auto& p : parts)
                spec.base.rate_targets.push_back(detail::parse_double(key, p));
            rate_given = true;
            if (parts.size() == 1) rate_scalar = spec.base.rate_targets[0];
        } else if (key == "bs_pos") b.bs_pos = detail::parse_vec3(key, val);
        else if (key == "ris_pos") b.ris_pos = detail::parse_vec3(key, val);
        else if (key == "user_center") b.user_center = detail::parse_vec3(key, val);
        else if (key == "user_radius") b.user_radius = detail::parse_double(key, val);
        else if (key == "alpha_direct") b.alpha_direct = detail::parse_double(key, val);
        else if (key == "alpha_g") b.alpha_G = detail::parse_double(key, val);
        else if (key == "alpha_ru") b.alpha_ru = detail::parse_double(key, val);
        else if (key == "rician_g") b.rician_G = detail::parse_double(key, val);
        else if (key == "rician_ru") b.rician_ru = detail::parse_double(key, val);
        else if (key == "ref_loss_db") b.ref_loss_db = detail::parse_double(key, val);
        else if (key == "element_spacing") b.element_spacing = detail::parse_double(key, val);
        else if (key == "carrier_hz") b.carrier_hz = detail::parse_double(key, val);
        else if (key == "trials") {
            int t2 = detail::parse_int(key, val);
            if (t2 < 1) throw ConfigError("key 'trials' must be >= 1");
            spec.trials = t2;
        } else if (key == "seed") {
            try {
                spec.seed = std::stoull(val);
            } catch (...) {
                throw ConfigError("invalid value for key 'seed': " + val);
            }
        } else if (key == "sweep_axis") {
            if (val == "none") spec.sweep_axis = SweepAxis::none;
            else if (val == "n_elements") spec.sweep_axis = SweepAxis::n_elements;
            else if (val == "zipf_eps") spec.sweep_axis = SweepAxis::zipf_eps;
            else if (val == "ris_y") spec.sweep_axis = SweepAxis::ris_y;
            else if (val == "alpha_g") spec.sweep_axis = SweepAxis::alpha_G;
            else if (val == "alpha_ru") spec.sweep_axis = SweepAxis::alpha_ru;
            else throw ConfigError("unknown sweep_axis: " + val);
        } else if (key == "sweep_values") {
            spec.sweep_values.clear();
            for (const auto& p : detail::split_list(val))
                spec.sweep_values.push_back(detail::parse_double(key, p));
        } else if (key == "schemes") {
            spec.schemes.clear();
            for (const auto& p : detail::split_list(val)) {
                if (p == "optimized") spec.schemes.push_back(Scheme::optimized);
                else if (p == "random_phase") spec.schemes.push_back(Scheme::random_phase);
                else if (p == "no_ris") spec.schemes.push_back(Scheme::no_ris);
                else throw ConfigError("unknown scheme: " + p);
            }
        } else if (key == "caching") {
            spec.caching.clear();
            for (const auto& p : detail::split_list(val)) {
                if (p == "oc") spec.caching.push_back(CachingStrategy::oc);
                else if (p == "fppc") spec.caching.push_back(CachingStrategy::fppc);
                else if (p == "urc") spec.caching.push_back(CachingStrategy::urc);
                else if (p == "none") spec.caching.push_back(CachingStrategy::none);
                else throw ConfigError("unknown caching strategy: " + p);
            }
        } else {
            throw ConfigError("unknown key: " + key);
        }
    }
    if (!rate_given) {
        spec.base.rate_targets.assign(static_cast<size_t>(spec.base.K), 1e8);
    } else if (rate_scalar && spec.base.rate_targets.size() == 1 && spec.base.K > 1) {
        spec.base.rate_targets.assign(static_cast<size_t>(spec.base.K), *rate_scalar);
    }
    try {
        spec.validate();
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    return spec;
}

}  // namespace riscache
