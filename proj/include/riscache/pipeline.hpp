#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "riscache/active_beamforming.hpp"
#include "riscache/caching.hpp"
#include "riscache/passive_beamforming.hpp"
#include "riscache/rng.hpp"
#include "riscache/scenario.hpp"

namespace riscache {

/// Network cost: backhaul (bit/s), transmit power (W), and their priced sum.
/// The total is expressed in mixed units, backhaul in Mbps plus eta times
/// power in mW, so both terms are comparable at the default scales.
struct NetworkCost {
    double backhaul = 0.0;  // bit/s
    double power = 0.0;     // watts
    double total = 0.0;

    static NetworkCost make(double backhaul_bps, double power_w, double eta) {
        NetworkCost c;
        c.backhaul = backhaul_bps;
        c.power = power_w;
        c.total = backhaul_bps / 1e6 + eta * power_w * 1e3;
        return c;
    }
};

struct OptimizationReport {
    std::vector<double> placement;
    std::vector<VectorXcd> precoder;
    std::vector<double> phases;
    std::vector<NetworkCost> cost_trace;  // one entry per outer iteration
    bool converged = false;
    bool feasible = true;
    int iterations = 0;

    const NetworkCost& final_cost() const { return cost_trace.back(); }
};

inline NetworkCost network_cost(const std::vector<double>& c, const std::vector<double>& b,
                                const std::vector<double>& rate_targets,
                                const std::vector<VectorXcd>& p, double eta) {
    double power = 0.0;
    for (const auto& pk : p) power += pk.squaredNorm();
    return NetworkCost::make(backhaul_cost(c, b, rate_targets), power, eta);
}

struct PipelineOptions {
    double outer_tol = 1e-4;  // relative decrease threshold on the total cost
    int max_outer = 30;
    // The phase subproblem is a pure feasibility problem, and the SDP leaves
    // every SINR constraint tight, so solving it at the nominal targets is a
    // no-op. The outer loop therefore asks the BCD for phases meeting
    // gamma*(1+margin); the surplus lets the re-solved SDP cut the power.
    // The margin shrinks whenever it stops paying off.
    double margin0 = 1.0;
    double margin_min = 1e-2;
    double margin_shrink = 0.5;
    BcdOptions bcd;
};

namespace detail {

inline std::vector<double> sinr_targets(const ScenarioConfig& cfg) {
    std::vector<double> g(static_cast<size_t>(cfg.K));
    for (int k = 0; k < cfg.K; ++k) g[static_cast<size_t>(k)] = cfg.sinr_target(k);
    return g;
}

inline std::vector<double> optimal_placement_for(const ScenarioConfig& cfg) {
    return optimize_placement(zipf_popularity(cfg.F, cfg.zipf_eps), cfg.S0);
}

}  // namespace detail

/// Full alternating optimization: content placement once (it decouples from
/// beamforming), then alternate the SDP active solve at fixed phases with the
/// penalty BCD phase solve at fixed precoder until the total cost stalls.
/// A phase update is only accepted when re-solving the SDP at the new phases
/// does not increase the power, which keeps the cost trace non-increasing.
inline OptimizationReport alternating_optimize(const ChannelSet& ch, const ScenarioConfig& cfg,
                                               Rng& rng, const PipelineOptions& opts = {}) {
    OptimizationReport rep;
    rep.placement = detail::optimal_placement_for(cfg);
    std::vector<double> b = zipf_popularity(cfg.F, cfg.zipf_eps);
    std::vector<double> gammas = detail::sinr_targets(cfg);
    const double noise = cfg.noise_power();

    VectorXcd x(cfg.N);
    for (int n = 0; n < cfg.N; ++n) x(n) = std::polar(1.0, rng.uniform(0.0, 2.0 * M_PI));

    double backhaul = backhaul_cost(rep.placement, b, cfg.rate_targets);
    try {
        auto [p, power] = solve_active(effective_channel(ch, x), gammas, noise);
        rep.precoder = std::move(p);
        rep.cost_trace.push_back(NetworkCost::make(backhaul, power, cfg.eta));
    } catch (const InfeasibleError&) {
        rep.feasible = false;
        rep.phases = phases_from_circle(x);
        return rep;
    }

    double margin = opts.margin0;
    for (int t = 0; t < opts.max_outer; ++t) {
        rep.iterations = t + 1;
        std::vector<double> inflated = gammas;
        for (double& g : inflated) g *= 1.0 + margin;
        auto [x_new, pstate] = bcd_solve(ch, rep.precoder, x, inflated, noise, opts.bcd);

        double cur = rep.cost_trace.back().power;
        double improvement = 0.0;
        try {
            auto [p2, power2] = solve_active(effective_channel(ch, x_new), gammas, noise);
            if (power2 <= cur * (1.0 + 1e-9)) {  // never accept a regression
                x = std::move(x_new);
                rep.precoder = std::move(p2);
                rep.cost_trace.push_back(
                    NetworkCost::make(backhaul, std::min(power2, cur), cfg.eta));
                improvement = (cur - power2) / cur;
            }
        } catch (const InfeasibleError&) {
            // keep the previous iterate
        }
        if (improvement < opts.outer_tol) {
            margin *= opts.margin_shrink;
            if (margin < opts.margin_min) {
                rep.converged = true;
                break;
            }
        }
    }
    rep.phases = phases_from_circle(x);
    return rep;
}

/// Random-phase baseline: draw theta uniformly once, solve the active
/// beamformer for it, no phase optimization.
inline OptimizationReport scheme_random_phase(const ChannelSet& ch, const ScenarioConfig& cfg,
                                              Rng& rng) {
    OptimizationReport rep;
    rep.placement = detail::optimal_placement_for(cfg);
    std::vector<double> b = zipf_popularity(cfg.F, cfg.zipf_eps);
    VectorXcd x(cfg.N);
    for (int n = 0; n < cfg.N; ++n) x(n) = std::polar(1.0, rng.uniform(0.0, 2.0 * M_PI));
    rep.phases = phases_from_circle(x);
    double backhaul = backhaul_cost(rep.placement, b, cfg.rate_targets);
    try {
        auto [p, power] =
            solve_active(effective_channel(ch, x), detail::sinr_targets(cfg), cfg.noise_power());
        rep.precoder = std::move(p);
        rep.cost_trace.push_back(NetworkCost::make(backhaul, power, cfg.eta));
        rep.converged = true;
        rep.iterations = 1;
    } catch (const InfeasibleError&) {
        rep.feasible = false;
    }
    return rep;
}

/// No-RIS baseline: the reflecting path is removed and the active solve runs
/// on the direct channels alone.
inline OptimizationReport scheme_no_ris(const ChannelSet& ch, const ScenarioConfig& cfg) {
    OptimizationReport rep;
    rep.placement = detail::optimal_placement_for(cfg);
    std::vector<double> b = zipf_popularity(cfg.F, cfg.zipf_eps);
    EffectiveChannel eff;
    eff.f = ch.h_d;
    double backhaul = backhaul_cost(rep.placement, b, cfg.rate_targets);
    try {
        auto [p, power] = solve_active(eff, detail::sinr_targets(cfg), cfg.noise_power());
        rep.precoder = std::move(p);
        rep.cost_trace.push_back(NetworkCost::make(backhaul, power, cfg.eta));
        rep.converged = true;
        rep.iterations = 1;
    } catch (const InfeasibleError&) {
        rep.feasible = false;
    }
    return rep;
}

}  // namespace riscache
