#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace riscache {

/// Zipf request probabilities b_f = f^(-eps) / sum_i i^(-eps).
inline std::vector<double> zipf_popularity(int F, double eps) {
    if (F < 1) throw std::invalid_argument("zipf_popularity: F must be >= 1");
    if (eps < 0.0) throw std::invalid_argument("zipf_popularity: eps must be >= 0");
    std::vector<double> b(static_cast<size_t>(F));
    double sum = 0.0;
    for (int f = 1; f <= F; ++f) {
        b[static_cast<size_t>(f - 1)] = std::pow(static_cast<double>(f), -eps);
        sum += b[static_cast<size_t>(f - 1)];
    }
    for (double& v : b) v /= sum;
    return b;
}

/// Optimal probabilistic placement: cache the most popular files up to the
/// budget, with a fractional remainder on the marginal file. Ties broken by
/// lower file index.
inline std::vector<double> optimize_placement(const std::vector<double>& b, double S0) {
    if (S0 < 0.0) throw std::domain_error("optimize_placement: S0 must be >= 0");
    const size_t F = b.size();
    if (S0 > static_cast<double>(F)) throw std::invalid_argument("optimize_placement: S0 > F");
    std::vector<size_t> order(F);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t i, size_t j) { return b[i] > b[j]; });
    std::vector<double> c(F, 0.0);
    double budget = S0;
    for (size_t idx : order) {
        if (budget <= 0.0) break;
        double take = std::min(1.0, budget);
        c[idx] = take;
        budget -= take;
    }
    return c;
}

/// Uniform random caching: c_f = S0/F for every file.
inline std::vector<double> urc_placement(int F, double S0) {
    if (F < 1) throw std::invalid_argument("urc_placement: F must be >= 1");
    if (S0 < 0.0 || S0 > F) throw std::invalid_argument("urc_placement: S0 out of range");
    return std::vector<double>(static_cast<size_t>(F), S0 / F);
}

/// Popularity-proportional caching: c_f proportional to b_f scaled to the
/// budget, capping at 1 and redistributing the excess until feasible.
inline std::vector<double> fppc_placement(const std::vector<double>& b, double S0) {
    const size_t F = b.size();
    if (S0 < 0.0 || S0 > static_cast<double>(F))
        throw std::invalid_argument("fppc_placement: S0 out of range");
    std::vector<double> c(F, 0.0);
    std::vector<bool> capped(F, false);
    double budget = S0;
    for (int round = 0; round < static_cast<int>(F) + 1; ++round) {
        double mass = 0.0;
        for (size_t f = 0; f < F; ++f)
            if (!capped[f]) mass += b[f];
        if (mass <= 0.0) {
            // residual budget spread uniformly over uncapped files
            size_t n_open = 0;
            for (size_t f = 0; f < F; ++f)
                if (!capped[f]) ++n_open;
            if (n_open == 0) break;
            double share = budget / static_cast<double>(n_open);
            for (size_t f = 0; f < F; ++f)
                if (!capped[f]) c[f] = std::min(1.0, share);
            break;
        }
        bool newly_capped = false;
        for (size_t f = 0; f < F; ++f) {
            if (capped[f]) continue;
            c[f] = budget * b[f] / mass;
            if (c[f] >= 1.0) {
                c[f] = 1.0;
                capped[f] = true;
                newly_capped = true;
            }
        }
        if (!newly_capped) break;
        budget = S0;
        for (size_t f = 0; f < F; ++f)
            if (capped[f]) budget -= 1.0;
    }
    return c;
}

/// Total backhaul cost sum_f sum_k (1 - c_f) b_f R_k^0, in bit/s.
inline double backhaul_cost(const std::vector<double>& c, const std::vector<double>& b,
                            const std::vector<double>& rate_targets) {
    if (c.size() != b.size()) throw std::invalid_argument("backhaul_cost: dimension mismatch");
    double miss = 0.0;
    for (size_t f = 0; f < c.size(); ++f) miss += (1.0 - c[f]) * b[f];
    double rate_sum = std::accumulate(rate_targets.begin(), rate_targets.end(), 0.0);
    return miss * rate_sum;
}

}  // namespace riscache
