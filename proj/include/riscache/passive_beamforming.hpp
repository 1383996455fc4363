#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

#include "riscache/manifold.hpp"
#include "riscache/scenario.hpp"

namespace riscache {

/// Auxiliary SINR variables x_{k,j}: row k collects the effective products
/// seen by user k. After each aux update every row satisfies its SINR
/// constraint (or was already feasible).
struct AuxVars {
    MatrixXcd x_hat;  // K x K
};

struct PenaltyState {
    double rho = 0.0;        // final penalty coefficient
    double violation = 0.0;  // max residual |f_k^H p_j - x_{k,j}|, relative to the signal scale
    bool targets_met = false;
    int rounds = 0;
};

struct BcdOptions {
    int max_rounds = 12;
    double rho_shrink = 0.3;
    double violation_tol = 1e-5;
    double inner_delta = 1e-4;  // relative decrease threshold on the penalty objective
    int max_inner = 50;
    double sinr_slack = 1e-4;
    manifold::CgOptions cg;
    // When set, receives the penalty-objective value after every block
    // update, one inner vector per fixed-rho round.
    std::vector<std::vector<double>>* round_traces = nullptr;
};

/// Penalty objective (fixed precoder): sum ||p_k||^2 +
/// (1/2 rho) * sum_{k,j} |f_k^H p_j - x_{k,j}|^2.
inline double penalty_objective(const ChannelSet& ch, const std::vector<VectorXcd>& p,
                                const VectorXcd& x, const AuxVars& aux, double rho) {
    if (rho <= 0.0) throw std::invalid_argument("penalty_objective: rho must be > 0");
    EffectiveChannel eff = effective_channel(ch, x);
    const int K = static_cast<int>(p.size());
    double power = 0.0, resid = 0.0;
    for (int k = 0; k < K; ++k) {
        power += p[static_cast<size_t>(k)].squaredNorm();
        for (int j = 0; j < K; ++j)
            resid += std::norm(eff.f[static_cast<size_t>(k)].dot(p[static_cast<size_t>(j)]) -
                               aux.x_hat(k, j));
    }
    return power + resid / (2.0 * rho);
}

/// Dual root function for the per-user aux projection:
/// f(lambda) = |xbar_kk|^2/(1-l)^2 - sum_{l!=k} g|xbar_kl|^2/(1+l g)^2 - g*noise.
inline double f_lambda(double lambda, const VectorXcd& xbar_row, int k, double gamma0,
                       double noise_power) {
    if (lambda <= 0.0 || lambda >= 1.0)
        throw std::domain_error("f_lambda: lambda must lie in (0, 1)");
    double v = std::norm(xbar_row(k)) / ((1.0 - lambda) * (1.0 - lambda));
    for (Eigen::Index l = 0; l < xbar_row.size(); ++l) {
        if (l == k) continue;
        double d = 1.0 + lambda * gamma0;
        v -= gamma0 * std::norm(xbar_row(l)) / (d * d);
    }
    return v - gamma0 * noise_power;
}

/// Euclidean projection of one row onto its SINR constraint set. Feasible
/// rows pass through; otherwise the dual root is bracketed in (0,1) and
/// bisected, then x_kk = xbar_kk/(1-l*), x_kl = xbar_kl/(1+l* g).
inline VectorXcd solve_aux_user(const VectorXcd& xbar_row, int k, double gamma0,
                                double noise_power) {
    const Eigen::Index K = xbar_row.size();
    double interf = 0.0;
    for (Eigen::Index l = 0; l < K; ++l)
        if (l != k) interf += std::norm(xbar_row(l));
    if (std::norm(xbar_row(k)) >= gamma0 * (interf + noise_power)) return xbar_row;

    VectorXcd out = xbar_row;
    if (std::abs(xbar_row(k)) == 0.0) {
        // Degenerate row: the (1-lambda) scaling cannot produce a nonzero
        // x_kk, so take lambda = 1 and set the signal entry to the exact
        // constraint boundary with zero phase.
        double shrink = 1.0 + gamma0;
        double res = 0.0;
        for (Eigen::Index l = 0; l < K; ++l) {
            if (l == k) continue;
            out(l) = xbar_row(l) / shrink;
            res += std::norm(out(l));
        }
        out(k) = std::sqrt(gamma0 * (res + noise_power));
        return out;
    }

    double lo = 0.0, hi = 1.0;
    // f is increasing on (0,1); f(0+) < 0 here and f -> +inf as lambda -> 1.
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (f_lambda(mid, xbar_row, k, gamma0, noise_power) < 0.0)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-17) break;
    }
    double lambda = 0.5 * (lo + hi);
    double res = f_lambda(lambda, xbar_row, k, gamma0, noise_power);
    if (std::abs(res) > 1e-6 * std::max(1.0, gamma0 * noise_power) &&
        std::abs(res) > 1e-6 * std::norm(xbar_row(k)))
        throw std::logic_error("solve_aux_user: bisection failed to bracket the root");
    out(k) = xbar_row(k) / (1.0 - lambda);
    for (Eigen::Index l = 0; l < K; ++l)
        if (l != k) out(l) = xbar_row(l) / (1.0 + lambda * gamma0);
    return out;
}

/// Row-wise aux update from the current phases: xbar_{k,j} = f_k^H p_j,
/// projected row by row (rows are independent).
inline AuxVars solve_aux(const ChannelSet& ch, const std::vector<VectorXcd>& p,
                         const VectorXcd& x, const std::vector<double>& gammas,
                         double noise_power) {
    EffectiveChannel eff = effective_channel(ch, x);
    const int K = static_cast<int>(p.size());
    MatrixXcd xbar(K, K);
    for (int k = 0; k < K; ++k)
        for (int j = 0; j < K; ++j)
            xbar(k, j) = eff.f[static_cast<size_t>(k)].dot(p[static_cast<size_t>(j)]);
    AuxVars aux;
    aux.x_hat.resize(K, K);
    for (int k = 0; k < K; ++k)
        aux.x_hat.row(k) =
            solve_aux_user(xbar.row(k).transpose(), k, gammas[static_cast<size_t>(k)],
                           noise_power)
                .transpose();
    return aux;
}

/// Least-squares phase cost sum_{k,j} |h_{r,k}^H diag(x) g_j - t_{k,j}|^2
/// with g_j = G p_j and the direct-link term folded into the target
/// t_{k,j} = x_{k,j} - h_{d,k}^H p_j. The Euclidean gradient uses the
/// convention grad = 2 * sum r_{k,j} conj(w_{k,j}) so that Re{grad^H d} is
/// the directional derivative.
inline manifold::CostFunction phase_cost(const ChannelSet& ch, const std::vector<VectorXcd>& p,
                                         const AuxVars& aux) {
    const int K = static_cast<int>(p.size());
    const Eigen::Index N = ch.G.rows();
    auto w = std::make_shared<std::vector<VectorXcd>>();
    auto t = std::make_shared<std::vector<cplx>>();
    w->reserve(static_cast<size_t>(K * K));
    t->reserve(static_cast<size_t>(K * K));
    for (int k = 0; k < K; ++k) {
        for (int j = 0; j < K; ++j) {
            VectorXcd gj = ch.G * p[static_cast<size_t>(j)];
            // h_{r,k}^H diag(x) g_j = sum_n conj(h_rk)_n g_jn x_n
            w->push_back(ch.h_r[static_cast<size_t>(k)].conjugate().cwiseProduct(gj));
            t->push_back(aux.x_hat(k, j) -
                         ch.h_d[static_cast<size_t>(k)].dot(p[static_cast<size_t>(j)]));
        }
    }
    manifold::CostFunction cost;
    cost.value = [w, t](const VectorXcd& x) {
        double v = 0.0;
        for (size_t i = 0; i < w->size(); ++i)
            v += std::norm((*w)[i].cwiseProduct(x).sum() - (*t)[i]);
        return v;
    };
    cost.euclidean_gradient = [w, t, N](const VectorXcd& x) {
        VectorXcd g = VectorXcd::Zero(N);
        for (size_t i = 0; i < w->size(); ++i) {
            cplx r = (*w)[i].cwiseProduct(x).sum() - (*t)[i];
            g += 2.0 * r * (*w)[i].conjugate();
        }
        return g;
    };
    return cost;
}

/// Penalty-based block coordinate descent for the phase feasibility problem:
/// alternates the aux projection and manifold CG under a shrinking penalty
/// coefficient. Returns the final phases and the achieved violation; when
/// the SINR targets cannot be met the state reports best-effort.
inline std::pair<VectorXcd, PenaltyState> bcd_solve(const ChannelSet& ch,
                                                    const std::vector<VectorXcd>& p,
                                                    const VectorXcd& x0,
                                                    const std::vector<double>& gammas,
                                                    double noise_power,
                                                    const BcdOptions& opts = {}) {
    const int K = static_cast<int>(p.size());
    VectorXcd x = x0;
    double power = 0.0;
    for (const auto& pk : p) power += pk.squaredNorm();

    auto residual_info = [&](const VectorXcd& xv, const AuxVars& aux) {
        EffectiveChannel eff = effective_channel(ch, xv);
        double sum = 0.0, maxabs = 0.0, sigscale = 0.0;
        for (int k = 0; k < K; ++k) {
            sigscale = std::max(sigscale, std::abs(aux.x_hat(k, k)));
            for (int j = 0; j < K; ++j) {
                double r = std::abs(eff.f[static_cast<size_t>(k)].dot(p[static_cast<size_t>(j)]) -
                                    aux.x_hat(k, j));
                sum += r * r;
                maxabs = std::max(maxabs, r);
            }
        }
        return std::make_pair(sum, maxabs / std::max(sigscale, 1e-300));
    };

    AuxVars aux = solve_aux(ch, p, x, gammas, noise_power);
    auto [res_sum, viol] = residual_info(x, aux);

    // Everything in this subproblem lives at the (tiny) received-signal
    // scale; the CG tolerances are calibrated for O(1) costs, so the phase
    // cost is minimized in units of the desired-signal power.
    double sig2 = 0.0;
    for (int k = 0; k < K; ++k) sig2 = std::max(sig2, std::norm(aux.x_hat(k, k)));
    const double scale2 = std::max(sig2, 1e-300);

    PenaltyState state;
    state.rho = 0.1 * power / std::max(res_sum, 1e-300);
    state.violation = viol;

    for (int round = 0; round < opts.max_rounds && state.violation >= opts.violation_tol;
         ++round) {
        state.rounds = round + 1;
        std::vector<double>* block_trace = nullptr;
        if (opts.round_traces) {
            opts.round_traces->emplace_back();
            block_trace = &opts.round_traces->back();
            block_trace->push_back(penalty_objective(ch, p, x, aux, state.rho));
        }
        double res_prev = res_sum;
        for (int inner = 0; inner < opts.max_inner; ++inner) {
            aux = solve_aux(ch, p, x, gammas, noise_power);
            if (block_trace) block_trace->push_back(penalty_objective(ch, p, x, aux, state.rho));
            manifold::CostFunction raw = phase_cost(ch, p, aux);
            manifold::CostFunction cost;
            cost.value = [&raw, scale2](const VectorXcd& v) { return raw.value(v) / scale2; };
            cost.euclidean_gradient = [&raw, scale2](const VectorXcd& v) {
                return VectorXcd(raw.euclidean_gradient(v) / scale2);
            };
            auto [x_new, cg_trace] = manifold::cg_minimize(cost, x, opts.cg);
            x = x_new;
            if (block_trace) block_trace->push_back(penalty_objective(ch, p, x, aux, state.rho));
            double res_new = residual_info(x, aux).first;
            bool done =
                (res_prev - res_new) < opts.inner_delta * std::max(res_prev, 1e-300);
            res_prev = res_new;
            if (done) break;
        }
        aux = solve_aux(ch, p, x, gammas, noise_power);
        std::tie(res_sum, state.violation) = residual_info(x, aux);
        state.rho *= opts.rho_shrink;
    }
    if (state.rounds > 0) state.rho /= opts.rho_shrink;  // last coefficient actually used

    EffectiveChannel eff = effective_channel(ch, x);
    std::vector<double> sinr = compute_sinr(eff, p, noise_power);
    state.targets_met = true;
    for (int k = 0; k < K; ++k)
        if (sinr[static_cast<size_t>(k)] <
            gammas[static_cast<size_t>(k)] * (1.0 - opts.sinr_slack))
            state.targets_met = false;
    return {x, state};
}

/// Phase angles in [0, 2pi) recovered from a unit-modulus vector.
inline std::vector<double> phases_from_circle(const VectorXcd& x) {
    std::vector<double> theta(static_cast<size_t>(x.size()));
    for (Eigen::Index n = 0; n < x.size(); ++n) {
        double a = std::arg(x(n));
        if (a < 0.0) a += 2.0 * M_PI;
        if (a >= 2.0 * M_PI) a = 0.0;
        theta[static_cast<size_t>(n)] = a;
    }
    return theta;
}

inline VectorXcd circle_from_phases(const std::vector<double>& theta) {
    VectorXcd x(static_cast<Eigen::Index>(theta.size()));
    for (size_t n = 0; n < theta.size(); ++n)
        x(static_cast<Eigen::Index>(n)) = std::polar(1.0, theta[n]);
    return x;
}

}  // namespace riscache
