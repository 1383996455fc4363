#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace riscache {
namespace manifold {

using Eigen::VectorXcd;

/// Smooth cost over the complex circle manifold, supplied as a value and a
/// Euclidean gradient consistent with the real-part inner product
/// <a, b> = Re{a^H b}: the directional derivative along d is Re{grad^H d}.
struct CostFunction {
    std::function<double(const VectorXcd&)> value;
    std::function<VectorXcd(const VectorXcd&)> euclidean_gradient;
};

inline bool is_unit_modulus(const VectorXcd& x, double tol = 1e-12) {
    for (Eigen::Index n = 0; n < x.size(); ++n)
        if (std::abs(std::abs(x(n)) - 1.0) > tol) return false;
    return true;
}

/// Orthogonal projection onto the tangent space at x:
/// z = v - Re{v o x*} o x.
inline VectorXcd project_tangent(const VectorXcd& x, const VectorXcd& v) {
    VectorXcd z(v.size());
    for (Eigen::Index n = 0; n < v.size(); ++n) {
        double radial = (v(n) * std::conj(x(n))).real();
        z(n) = v(n) - radial * x(n);
    }
    return z;
}

/// Componentwise normalization of x + alpha*d back onto the manifold.
inline VectorXcd retract(const VectorXcd& x, const VectorXcd& d, double alpha) {
    VectorXcd out(x.size());
    for (Eigen::Index n = 0; n < x.size(); ++n) {
        std::complex<double> v = x(n) + alpha * d(n);
        double mag = std::abs(v);
        if (mag == 0.0) throw std::runtime_error("retract: step produced a zero component");
        out(n) = v / mag;
    }
    return out;
}

/// Transport of a tangent vector to the tangent space at x_next
/// (re-projection, Eq.-style d - Re{d o x_next*} o x_next).
inline VectorXcd transport(const VectorXcd& d, const VectorXcd& x_next) {
    return project_tangent(x_next, d);
}

/// Real-part inner product on the tangent space.
inline double inner(const VectorXcd& a, const VectorXcd& b) {
    return a.dot(b).real();  // Re{a^H b}
}

struct CgOptions {
    int max_iters = 500;
    double grad_tol = 1e-6;
    double goldstein_c = 0.1;  // acceptance band parameter
    int max_line_search = 60;
};

struct CgTrace {
    std::vector<double> cost;  // accepted iterates, x0 first
    int iterations = 0;
    double final_grad_norm = 0.0;
    bool converged = false;
};

namespace detail {

// Goldstein step selection: accept alpha with
//   f + (1-c)*alpha*slope <= phi(alpha) <= f + c*alpha*slope   (slope < 0).
// Returns 0 when no decreasing step can be found.
inline double goldstein_step(const CostFunction& cost, const VectorXcd& x,
                             const VectorXcd& d, double f0, double slope,
                             const CgOptions& opts) {
    double lo = 0.0, hi = std::numeric_limits<double>::infinity();
    double alpha = 1.0;
    double best_alpha = 0.0, best_f = f0;
    for (int it = 0; it < opts.max_line_search; ++it) {
        double phi = cost.value(retract(x, d, alpha));
        if (std::isfinite(phi) && phi < best_f) {
            best_f = phi;
            best_alpha = alpha;
        }
        if (!std::isfinite(phi) || phi > f0 + opts.goldstein_c * alpha * slope) {
            hi = alpha;  // insufficient decrease
        } else if (phi < f0 + (1.0 - opts.goldstein_c) * alpha * slope) {
            lo = alpha;  // step too short
        } else {
            return alpha;
        }
        alpha = std::isinf(hi) ? 2.0 * alpha : 0.5 * (lo + hi);
        if (alpha <= 0.0 || hi < 1e-18) break;
    }
    return best_alpha;  // fall back to the best decreasing step seen
}

}  // namespace detail

/// Riemannian conjugate gradient on the complex circle manifold:
/// projected gradients, Goldstein line search, retraction, vector transport,
/// and the Fletcher-Reeves coefficient. Descent is monotone over accepted
/// steps; restarts occur every 2N iterations and on non-descent directions.
inline std::pair<VectorXcd, CgTrace> cg_minimize(const CostFunction& cost,
                                                 const VectorXcd& x0,
                                                 const CgOptions& opts = {}) {
    const Eigen::Index N = x0.size();
    VectorXcd x = x0;
    double f = cost.value(x);
    if (!std::isfinite(f)) throw std::runtime_error("cg_minimize: non-finite cost at x0");
    VectorXcd g = project_tangent(x, cost.euclidean_gradient(x));
    if (!g.allFinite()) throw std::runtime_error("cg_minimize: non-finite gradient at x0");
    VectorXcd d = -g;

    CgTrace trace;
    trace.cost.push_back(f);
    trace.final_grad_norm = g.norm();
    const int restart_period = std::max<int>(2 * static_cast<int>(N), 2);

    for (int k = 0; k < opts.max_iters; ++k) {
        double gnorm = g.norm();
        trace.final_grad_norm = gnorm;
        if (gnorm <= opts.grad_tol) {
            trace.converged = true;
            return {x, trace};
        }
        double slope = inner(g, d);
        if (slope >= 0.0) {  // safeguard restart
            d = -g;
            slope = inner(g, d);
        }
        double alpha = detail::goldstein_step(cost, x, d, f, slope, opts);
        if (alpha <= 0.0) {  // no decrease possible along d
            trace.converged = gnorm <= opts.grad_tol;
            return {x, trace};
        }
        VectorXcd x_next = retract(x, d, alpha);
        double f_next = cost.value(x_next);
        VectorXcd g_next = project_tangent(x_next, cost.euclidean_gradient(x_next));
        if (!std::isfinite(f_next) || !g_next.allFinite())
            throw std::runtime_error("cg_minimize: non-finite cost or gradient at iterate");

        VectorXcd g_bar = transport(g, x_next);
        VectorXcd d_bar = transport(d, x_next);
        double denom = inner(g_bar, g_bar);
        double beta = (denom > 0.0) ? g_next.squaredNorm() / denom : 0.0;
        if ((k + 1) % restart_period == 0) beta = 0.0;
        VectorXcd d_next = -g_next + beta * d_bar;
        if (inner(g_next, d_next) >= 0.0) d_next = -g_next;

        x = std::move(x_next);
        f = f_next;
        g = std::move(g_next);
        d = std::move(d_next);
        trace.cost.push_back(f);
        ++trace.iterations;
    }
    trace.final_grad_norm = g.norm();
    trace.converged = trace.final_grad_norm <= opts.grad_tol;
    return {x, trace};
}

}  // namespace manifold
}  // namespace riscache
