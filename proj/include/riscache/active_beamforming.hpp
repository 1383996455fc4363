#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "riscache/scenario.hpp"

namespace riscache {

/// Raised when the SINR targets admit no precoder; the diverging dual
/// objective is the certificate.
struct InfeasibleError : std::runtime_error {
    double dual_objective;
    InfeasibleError(const std::string& msg, double dual)
        : std::runtime_error(msg), dual_objective(dual) {}
};

/// Raised when an optimal SDP block is not numerically rank-1, which
/// contradicts the rank argument and signals solver failure.
struct RankViolationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Primal-dual certificate of the power-minimization SDP: primal blocks P_k,
/// duals lambda_k, dual slack matrices Z_k, and both objective values (watts).
struct SdpSolution {
    std::vector<MatrixXcd> P_blocks;
    std::vector<double> duals;
    std::vector<MatrixXcd> slacks;
    double primal_obj = 0.0;
    double dual_obj = 0.0;
    int iterations = 0;
};

struct KktReport {
    bool primal_feasible = false;
    double max_constraint_violation = 0.0;   // relative
    double max_reconstruction_residual = 0.0;  // ||Z_k - Z_k(lambda)|| / ||Z_k||
    double max_comp_slackness = 0.0;           // ||Z_k P_k|| / ||P_k||
    bool ranks_ok = false;                     // rank(Z_k) == M-1 for all k
    std::vector<int> z_ranks;
    bool all_passed() const {
        return primal_feasible && max_reconstruction_residual <= 1e-6 &&
               max_comp_slackness <= 1e-6 && ranks_ok;
    }
    std::string describe() const {
        std::ostringstream os;
        os << "primal_feasible=" << primal_feasible
           << " recon_residual=" << max_reconstruction_residual
           << " comp_slackness=" << max_comp_slackness << " ranks_ok=" << ranks_ok;
        return os.str();
    }
};

namespace detail {

// Largest alpha in (0, 1] with S + alpha*D staying in the cone, given the
// Cholesky factor of S. Returns 1 when the full step is safe.
inline double psd_max_step(const Eigen::LLT<MatrixXcd>& llt, const MatrixXcd& D) {
    MatrixXcd L = llt.matrixL();
    MatrixXcd W = L.triangularView<Eigen::Lower>().solve(D);
    W = L.triangularView<Eigen::Lower>().solve(W.adjoint()).adjoint();
    // W = L^-1 D L^-H
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(W, Eigen::EigenvaluesOnly);
    double lmin = es.eigenvalues().minCoeff();
    if (lmin >= 0.0) return 1.0;
    return std::min(1.0, -1.0 / lmin);
}

}  // namespace detail

/// Infeasible-start primal-dual path-following interior-point solve of the
/// SINR SDP: minimize sum Tr(P_k) over PSD blocks P_k subject to
/// (1/gamma_k) f_k^H P_k f_k - sum_{l != k} f_k^H P_l f_k >= noise_power.
///
/// The channels are rescaled internally so the constraint data is O(1);
/// reported duals are mapped back to the original units.
inline SdpSolution solve_sdp(const EffectiveChannel& eff, const std::vector<double>& gammas,
                             double noise_power) {
    const int K = static_cast<int>(eff.f.size());
    if (K < 1 || gammas.size() != static_cast<size_t>(K))
        throw std::invalid_argument("solve_sdp: user/target count mismatch");
    const int M = static_cast<int>(eff.f[0].size());
    for (int k = 0; k < K; ++k) {
        if (gammas[static_cast<size_t>(k)] <= 0.0)
            throw std::invalid_argument("solve_sdp: SINR targets must be > 0");
        if (eff.f[static_cast<size_t>(k)].norm() == 0.0)
            throw std::invalid_argument("solve_sdp: zero effective channel");
    }

    // Normalize channels to unit scale; the SDP is invariant under
    // f -> f/s, noise -> noise/s^2, with duals scaling by s^2.
    double log_scale = 0.0;
    for (int k = 0; k < K; ++k) log_scale += std::log(eff.f[static_cast<size_t>(k)].norm());
    const double scale = std::exp(log_scale / K);
    std::vector<VectorXcd> f(static_cast<size_t>(K));
    for (int k = 0; k < K; ++k) f[static_cast<size_t>(k)] = eff.f[static_cast<size_t>(k)] / scale;
    const double rhs = noise_power / (scale * scale);

    // Constraint i, block b: A_i^(b) = coef(i,b) f_i f_i^H.
    auto coef = [&](int i, int b) {
        return (i == b) ? 1.0 / gammas[static_cast<size_t>(i)] : -1.0;
    };
    std::vector<MatrixXcd> ff(static_cast<size_t>(K));
    for (int i = 0; i < K; ++i)
        ff[static_cast<size_t>(i)] = f[static_cast<size_t>(i)] * f[static_cast<size_t>(i)].adjoint();

    // Initial point: X = tau*I sized from the decoupled single-user powers,
    // Z = I, y = 1, s = 1 (infeasible start).
    double tau = 1.0;
    for (int k = 0; k < K; ++k)
        tau = std::max(tau, K * gammas[static_cast<size_t>(k)] * rhs /
                                f[static_cast<size_t>(k)].squaredNorm());
    std::vector<MatrixXcd> X(static_cast<size_t>(K), tau * MatrixXcd::Identity(M, M));
    std::vector<MatrixXcd> Z(static_cast<size_t>(K), MatrixXcd::Identity(M, M));
    Eigen::VectorXd y = Eigen::VectorXd::Ones(K);
    Eigen::VectorXd s = Eigen::VectorXd::Ones(K);

    const double sigma = 0.3;
    const double tol = 1e-8;
    const double gap_tol = 1e-10;  // relative to the primal objective
    const int max_iters = 300;
    const double infeas_dual_cap = 1e12 * noise_power;

    auto dot_h = [](const MatrixXcd& A, const MatrixXcd& B) {
        return (A.conjugate().cwiseProduct(B)).sum().real();  // Re tr(A^H B) = Re tr(A B) for Hermitian A
    };
    auto constraint_value = [&](int i, const std::vector<MatrixXcd>& Xv) {
        double v = 0.0;
        for (int b = 0; b < K; ++b)
            v += coef(i, b) *
                 (f[static_cast<size_t>(i)].adjoint() * Xv[static_cast<size_t>(b)] *
                  f[static_cast<size_t>(i)])(0)
                     .real();
        return v;
    };

    SdpSolution sol;
    for (int iter = 0; iter < max_iters; ++iter) {
        // Residuals.
        Eigen::VectorXd rp(K);
        for (int i = 0; i < K; ++i) rp(i) = rhs - (constraint_value(i, X) - s(i));
        std::vector<MatrixXcd> Rd(static_cast<size_t>(K));
        for (int b = 0; b < K; ++b) {
            MatrixXcd acc = MatrixXcd::Identity(M, M);
            for (int i = 0; i < K; ++i) acc -= y(i) * coef(i, b) * ff[static_cast<size_t>(i)];
            Rd[static_cast<size_t>(b)] = acc - Z[static_cast<size_t>(b)];
        }

        double mu = s.dot(y);
        for (int b = 0; b < K; ++b)
            mu += dot_h(X[static_cast<size_t>(b)], Z[static_cast<size_t>(b)]);
        mu /= static_cast<double>(K * M + K);

        double primal_obj = 0.0;
        for (int b = 0; b < K; ++b) primal_obj += X[static_cast<size_t>(b)].trace().real();
        double dual_obj_scaled = rhs * y.sum();

        double rp_norm = rp.norm() / (std::abs(rhs) * std::sqrt(static_cast<double>(K)));
        double rd_norm = 0.0;
        for (int b = 0; b < K; ++b)
            rd_norm = std::max(rd_norm, Rd[static_cast<size_t>(b)].norm());
        rd_norm /= std::sqrt(static_cast<double>(M));
        double gap =
            mu * static_cast<double>(K * M + K) / std::max(std::abs(primal_obj), 1e-300);

        if (gap < gap_tol && rp_norm < tol && rd_norm < tol) {
            sol.iterations = iter;
            break;
        }
        // The scaled dual objective already equals the original one
        // (y scales by scale^2, rhs by 1/scale^2).
        if (dual_obj_scaled > infeas_dual_cap && rp_norm > 1e-6) {
            throw InfeasibleError("solve_sdp: SINR targets infeasible (dual objective diverges)",
                                  dual_obj_scaled);
        }
        if (iter == max_iters - 1) {
            std::ostringstream os;
            os << "solve_sdp: no convergence after " << max_iters << " iterations (gap=" << gap
               << ", rp=" << rp_norm << ", rd=" << rd_norm << ")";
            throw std::runtime_error(os.str());
        }

        // Factor the current point.
        std::vector<Eigen::LLT<MatrixXcd>> lltX(static_cast<size_t>(K)), lltZ(static_cast<size_t>(K));
        std::vector<MatrixXcd> Zinv(static_cast<size_t>(K));
        for (int b = 0; b < K; ++b) {
            lltX[static_cast<size_t>(b)].compute(X[static_cast<size_t>(b)]);
            lltZ[static_cast<size_t>(b)].compute(Z[static_cast<size_t>(b)]);
            if (lltX[static_cast<size_t>(b)].info() != Eigen::Success ||
                lltZ[static_cast<size_t>(b)].info() != Eigen::Success)
                throw std::runtime_error("solve_sdp: iterate left the cone");
            Zinv[static_cast<size_t>(b)] =
                lltZ[static_cast<size_t>(b)].solve(MatrixXcd::Identity(M, M));
        }

        // Schur complement (HKM direction): B_ij = sum_b Re tr(A_i Zinv A_j X),
        // plus the LP part diag(s/y).
        Eigen::MatrixXd Bm(K, K);
        Eigen::VectorXd rhs_vec(K);
        for (int i = 0; i < K; ++i) {
            double Ti = 0.0, Ui = 0.0;
            for (int b = 0; b < K; ++b) {
                const VectorXcd& fi = f[static_cast<size_t>(i)];
                double cib = coef(i, b);
                Ti += cib * (fi.adjoint() * Zinv[static_cast<size_t>(b)] * fi)(0).real();
                Ui += cib * (fi.adjoint() * Zinv[static_cast<size_t>(b)] *
                             Rd[static_cast<size_t>(b)] * X[static_cast<size_t>(b)] * fi)(0)
                                .real();
            }
            for (int j = 0; j < K; ++j) {
                double v = 0.0;
                for (int b = 0; b < K; ++b) {
                    const VectorXcd& fi = f[static_cast<size_t>(i)];
                    const VectorXcd& fj = f[static_cast<size_t>(j)];
                    // Re tr(A_i Zinv A_j X) with rank-1 A blocks
                    std::complex<double> t1 =
                        (fi.adjoint() * Zinv[static_cast<size_t>(b)] * fj)(0);
                    std::complex<double> t2 =
                        (fj.adjoint() * X[static_cast<size_t>(b)] * fi)(0);
                    v += coef(i, b) * coef(j, b) * (t1 * t2).real();
                }
                Bm(i, j) = v;
            }
            Bm(i, i) += s(i) / y(i);
            rhs_vec(i) = rp(i) + constraint_value(i, X) + Ui - sigma * mu * Ti +
                         sigma * mu / y(i) - s(i);
        }

        Eigen::VectorXd dy = Bm.partialPivLu().solve(rhs_vec);

        std::vector<MatrixXcd> dZ(static_cast<size_t>(K)), dX(static_cast<size_t>(K));
        for (int b = 0; b < K; ++b) {
            MatrixXcd acc = Rd[static_cast<size_t>(b)];
            for (int i = 0; i < K; ++i) acc -= dy(i) * coef(i, b) * ff[static_cast<size_t>(i)];
            dZ[static_cast<size_t>(b)] = acc;
            MatrixXcd step = sigma * mu * Zinv[static_cast<size_t>(b)] -
                             X[static_cast<size_t>(b)] -
                             Zinv[static_cast<size_t>(b)] * dZ[static_cast<size_t>(b)] *
                                 X[static_cast<size_t>(b)];
            dX[static_cast<size_t>(b)] = 0.5 * (step + step.adjoint());
        }
        Eigen::VectorXd ds(K);
        for (int i = 0; i < K; ++i) ds(i) = sigma * mu / y(i) - s(i) - s(i) / y(i) * dy(i);

        // Step lengths keeping all cone variables strictly interior.
        double ap = 1.0, ad = 1.0;
        for (int b = 0; b < K; ++b) {
            ap = std::min(ap, detail::psd_max_step(lltX[static_cast<size_t>(b)],
                                                   dX[static_cast<size_t>(b)]));
            ad = std::min(ad, detail::psd_max_step(lltZ[static_cast<size_t>(b)],
                                                   dZ[static_cast<size_t>(b)]));
        }
        for (int i = 0; i < K; ++i) {
            if (ds(i) < 0.0) ap = std::min(ap, -s(i) / ds(i));
            if (dy(i) < 0.0) ad = std::min(ad, -y(i) / dy(i));
        }
        ap = std::min(1.0, 0.98 * ap);
        ad = std::min(1.0, 0.98 * ad);

        for (int b = 0; b < K; ++b) {
            X[static_cast<size_t>(b)] += ap * dX[static_cast<size_t>(b)];
            Z[static_cast<size_t>(b)] += ad * dZ[static_cast<size_t>(b)];
            X[static_cast<size_t>(b)] =
                0.5 * (X[static_cast<size_t>(b)] + X[static_cast<size_t>(b)].adjoint());
            Z[static_cast<size_t>(b)] =
                0.5 * (Z[static_cast<size_t>(b)] + Z[static_cast<size_t>(b)].adjoint());
        }
        s += ap * ds;
        y += ad * dy;
    }

    sol.P_blocks = std::move(X);
    sol.slacks = std::move(Z);
    sol.duals.resize(static_cast<size_t>(K));
    for (int i = 0; i < K; ++i) sol.duals[static_cast<size_t>(i)] = y(i) / (scale * scale);
    sol.primal_obj = 0.0;
    for (int b = 0; b < K; ++b) sol.primal_obj += sol.P_blocks[static_cast<size_t>(b)].trace().real();
    sol.dual_obj = 0.0;
    for (int i = 0; i < K; ++i) sol.dual_obj += sol.duals[static_cast<size_t>(i)] * noise_power;
    return sol;
}

/// Rank-1 extraction p_k = sqrt(lmax) v_max, phase-rotated so f_k^H p_k is
/// real nonnegative. Rejects blocks whose second singular value is not
/// negligible.
inline std::vector<VectorXcd> extract_rank1(const SdpSolution& sol, const EffectiveChannel& eff,
                                            double rank_tol = 1e-4) {
    std::vector<VectorXcd> p;
    p.reserve(sol.P_blocks.size());
    for (size_t k = 0; k < sol.P_blocks.size(); ++k) {
        Eigen::SelfAdjointEigenSolver<MatrixXcd> es(sol.P_blocks[k]);
        const auto& ev = es.eigenvalues();
        const int M = static_cast<int>(ev.size());
        double l1 = ev(M - 1);
        double l2 = (M > 1) ? std::abs(ev(M - 2)) : 0.0;
        if (l1 <= 0.0 || l2 / l1 > rank_tol) {
            std::ostringstream os;
            os << "extract_rank1: block " << k << " is not rank-1 (sigma2/sigma1=" << l2 / l1
               << ")";
            throw RankViolationError(os.str());
        }
        VectorXcd v = std::sqrt(l1) * es.eigenvectors().col(M - 1);
        cplx inner = eff.f[k].dot(v);  // f_k^H p_k
        if (std::abs(inner) > 0.0) v *= std::conj(inner) / std::abs(inner);
        p.push_back(std::move(v));
    }
    return p;
}

/// Post-solve check of the stationarity, complementary-slackness, and rank
/// structure of the optimal primal-dual pair.
inline KktReport verify_kkt(const SdpSolution& sol, const EffectiveChannel& eff,
                            const std::vector<double>& gammas, double noise_power) {
    const int K = static_cast<int>(eff.f.size());
    const int M = static_cast<int>(eff.f[0].size());
    KktReport rep;
    rep.primal_feasible = true;
    for (int k = 0; k < K; ++k) {
        double lhs = (eff.f[static_cast<size_t>(k)].adjoint() *
                      sol.P_blocks[static_cast<size_t>(k)] * eff.f[static_cast<size_t>(k)])(0)
                         .real() /
                     gammas[static_cast<size_t>(k)];
        double rhs_v = noise_power;
        for (int l = 0; l < K; ++l)
            if (l != k)
                rhs_v += (eff.f[static_cast<size_t>(k)].adjoint() *
                          sol.P_blocks[static_cast<size_t>(l)] * eff.f[static_cast<size_t>(k)])(0)
                             .real();
        double viol = (rhs_v - lhs) / std::max(1e-300, rhs_v);
        rep.max_constraint_violation = std::max(rep.max_constraint_violation, viol);
        if (viol > 1e-6) rep.primal_feasible = false;

        // Z_k reconstruction from the duals.
        MatrixXcd Zk = MatrixXcd::Identity(M, M);
        Zk -= sol.duals[static_cast<size_t>(k)] / gammas[static_cast<size_t>(k)] *
              (eff.f[static_cast<size_t>(k)] * eff.f[static_cast<size_t>(k)].adjoint());
        for (int l = 0; l < K; ++l)
            if (l != k)
                Zk += sol.duals[static_cast<size_t>(l)] *
                      (eff.f[static_cast<size_t>(l)] * eff.f[static_cast<size_t>(l)].adjoint());
        double zn = sol.slacks[static_cast<size_t>(k)].norm();
        rep.max_reconstruction_residual =
            std::max(rep.max_reconstruction_residual,
                     (Zk - sol.slacks[static_cast<size_t>(k)]).norm() / std::max(1e-300, zn));

        double comp = (sol.slacks[static_cast<size_t>(k)] * sol.P_blocks[static_cast<size_t>(k)])
                          .norm() /
                      std::max(1e-300, sol.P_blocks[static_cast<size_t>(k)].norm());
        rep.max_comp_slackness = std::max(rep.max_comp_slackness, comp);

        Eigen::SelfAdjointEigenSolver<MatrixXcd> es(sol.slacks[static_cast<size_t>(k)],
                                                    Eigen::EigenvaluesOnly);
        double lmax = es.eigenvalues().maxCoeff();
        int rank = 0;
        for (int i = 0; i < M; ++i)
            if (es.eigenvalues()(i) > 1e-6 * lmax) ++rank;
        rep.z_ranks.push_back(rank);
    }
    rep.ranks_ok = true;
    for (int r : rep.z_ranks)
        if (r != M - 1) rep.ranks_ok = false;
    return rep;
}

/// Full active-beamforming solve: SDP, KKT certification, rank-1 recovery.
/// Returns the precoder columns and the total transmit power in watts.
inline std::pair<std::vector<VectorXcd>, double> solve_active(const EffectiveChannel& eff,
                                                              const std::vector<double>& gammas,
                                                              double noise_power) {
    SdpSolution sol = solve_sdp(eff, gammas, noise_power);
    KktReport rep = verify_kkt(sol, eff, gammas, noise_power);
    if (!rep.all_passed())
        throw std::runtime_error("solve_active: KKT verification failed: " + rep.describe());
    std::vector<VectorXcd> p = extract_rank1(sol, eff);
    double power = 0.0;
    for (const auto& pk : p) power += pk.squaredNorm();
    return {std::move(p), power};
}

}  // namespace riscache
