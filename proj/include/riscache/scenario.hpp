#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "riscache/rng.hpp"

namespace riscache {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using cplx = std::complex<double>;

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;
};

inline double distance(const Vec3& a, const Vec3& b) {
    double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

/// System constants: array sizes, cache parameters, link budget, and the 3D
/// geometry of BS, RIS, and the user disc.
struct ScenarioConfig {
    int M = 16;              // BS antennas
    int K = 5;               // users
    int N = 50;              // RIS elements
    int F = 1000;            // files
    double S0 = 100.0;       // cache budget in files
    double zipf_eps = 1.0;
    double bandwidth_B = 1e7;        // Hz
    double noise_psd = 1e-18;        // W/Hz (-150 dBm/Hz)
    double eta = 1.0;                // pricing factor (cost per mW)
    std::vector<double> rate_targets = std::vector<double>(5, 1e8);  // bit/s
    Vec3 bs_pos{5.0, 0.0, 30.0};
    Vec3 ris_pos{0.0, 5.0, 10.0};
    Vec3 user_center{5.0, 10.0, 1.5};
    double user_radius = 2.5;        // m
    double alpha_direct = 3.5;
    double alpha_G = 2.2;
    double alpha_ru = 2.2;
    double rician_G = 10.0;          // linear
    double rician_ru = 10.0;         // linear
    double ref_loss_db = -30.0;      // at d0 = 1 m
    double element_spacing = 0.5;    // wavelengths
    double carrier_hz = 2.4e9;

    double noise_power() const { return noise_psd * bandwidth_B; }  // watts

    /// SINR target gamma_k^0 = 2^{R_k^0 / B} - 1.
    double sinr_target(int k) const {
        return std::exp2(rate_targets.at(static_cast<size_t>(k)) / bandwidth_B) - 1.0;
    }

    void validate() const {
        if (M < 1 || K < 1 || N < 1 || F < 1) throw std::invalid_argument("M,K,N,F must be >= 1");
        if (S0 < 0.0 || S0 > F) throw std::invalid_argument("S0 must lie in [0, F]");
        if (bandwidth_B < 0.0 || noise_psd < 0.0 || eta < 0.0)
            throw std::invalid_argument("bandwidth, noise_psd, eta must be >= 0");
        if (rate_targets.size() != static_cast<size_t>(K))
            throw std::invalid_argument("rate_targets must have K entries");
        for (double r : rate_targets)
            if (r <= 0.0) throw std::invalid_argument("rate targets must be > 0");
        if (alpha_direct < 2.0 || alpha_G < 2.0 || alpha_ru < 2.0)
            throw std::invalid_argument("path-loss exponents must be >= 2");
        if (rician_G < 0.0 || rician_ru < 0.0)
            throw std::invalid_argument("Rician factors must be >= 0");
    }
};

/// One small-scale fading realization: G is N x M, h_d per-user M-vectors,
/// h_r per-user N-vectors.
struct ChannelSet {
    MatrixXcd G;
    std::vector<VectorXcd> h_d;
    std::vector<VectorXcd> h_r;

    int users() const { return static_cast<int>(h_d.size()); }
};

/// Composite channels f_k with f_k^H = h_{d,k}^H + h_{r,k}^H Theta G.
struct EffectiveChannel {
    std::vector<VectorXcd> f;
};

/// rho0 * (d/d0)^(-alpha) in linear power scale, d0 = 1 m.
inline double path_loss(double d, double alpha, double ref_loss_db) {
    if (d <= 0.0) throw std::domain_error("path_loss: distance must be > 0");
    return std::pow(10.0, ref_loss_db / 10.0) * std::pow(d, -alpha);
}

/// ULA steering vector: element i = exp(j 2*pi*spacing*i*sin(angle)).
inline VectorXcd array_response(int n_elems, double spacing, double angle) {
    if (n_elems < 1) throw std::invalid_argument("array_response: n_elems must be >= 1");
    VectorXcd a(n_elems);
    double phase_step = 2.0 * M_PI * spacing * std::sin(angle);
    for (int i = 0; i < n_elems; ++i) a(i) = std::polar(1.0, phase_step * i);
    return a;
}

namespace detail {

inline VectorXcd rayleigh_vector(int n, Rng& rng) {
    VectorXcd v(n);
    for (int i = 0; i < n; ++i) v(i) = rng.cgaussian();
    return v;
}

// Azimuth-style angle along the given axis: asin of the normalized
// coordinate difference from `from` to `to`.
inline double axis_angle(const Vec3& from, const Vec3& to, char axis) {
    double d = distance(from, to);
    double delta = (axis == 'x') ? (to.x - from.x) : (to.y - from.y);
    return std::asin(std::clamp(delta / d, -1.0, 1.0));
}

}  // namespace detail

/// K points uniform on a disc of user_radius around user_center (fixed z).
inline std::vector<Vec3> place_users(const ScenarioConfig& cfg, Rng& rng) {
    std::vector<Vec3> out;
    out.reserve(static_cast<size_t>(cfg.K));
    for (int k = 0; k < cfg.K; ++k) {
        double r = cfg.user_radius * std::sqrt(rng.uniform());
        double phi = 2.0 * M_PI * rng.uniform();
        out.push_back({cfg.user_center.x + r * std::cos(phi),
                       cfg.user_center.y + r * std::sin(phi), cfg.user_center.z});
    }
    return out;
}

/// Draws one ChannelSet: Rayleigh direct links, Rician BS-RIS and RIS-user
/// links with LoS parts built from the node geometry. Draw order is fixed
/// (h_d for k = 0..K-1, then G, then h_r for k = 0..K-1) so the result is a
/// pure function of (cfg, positions, rng state).
inline ChannelSet gen_channels(const ScenarioConfig& cfg,
                               const std::vector<Vec3>& user_positions, Rng& rng) {
    if (user_positions.size() != static_cast<size_t>(cfg.K))
        throw std::invalid_argument("gen_channels: need K user positions");
    ChannelSet ch;
    ch.h_d.reserve(user_positions.size());
    ch.h_r.reserve(user_positions.size());

    for (const Vec3& u : user_positions) {
        double d = distance(cfg.bs_pos, u);
        if (d <= 0.0) throw std::domain_error("gen_channels: coincident BS/user positions");
        double pl = path_loss(d, cfg.alpha_direct, cfg.ref_loss_db);
        ch.h_d.push_back(std::sqrt(pl) * detail::rayleigh_vector(cfg.M, rng));
    }

    {
        double d = distance(cfg.bs_pos, cfg.ris_pos);
        if (d <= 0.0) throw std::domain_error("gen_channels: coincident BS/RIS positions");
        double pl = path_loss(d, cfg.alpha_G, cfg.ref_loss_db);
        // RIS array axis is y, BS array axis is x.
        double aoa = detail::axis_angle(cfg.ris_pos, cfg.bs_pos, 'y');
        double aod = detail::axis_angle(cfg.bs_pos, cfg.ris_pos, 'x');
        MatrixXcd los = array_response(cfg.N, cfg.element_spacing, aoa) *
                        array_response(cfg.M, cfg.element_spacing, aod).adjoint();
        MatrixXcd nlos(cfg.N, cfg.M);
        for (int i = 0; i < cfg.N; ++i)
            for (int j = 0; j < cfg.M; ++j) nlos(i, j) = rng.cgaussian();
        ch.G = std::sqrt(pl / (cfg.rician_G + 1.0)) *
               (std::sqrt(cfg.rician_G) * los + nlos);
    }

    for (const Vec3& u : user_positions) {
        double d = distance(cfg.ris_pos, u);
        if (d <= 0.0) throw std::domain_error("gen_channels: coincident RIS/user positions");
        double pl = path_loss(d, cfg.alpha_ru, cfg.ref_loss_db);
        double aod = detail::axis_angle(cfg.ris_pos, u, 'y');
        VectorXcd los = array_response(cfg.N, cfg.element_spacing, aod);
        ch.h_r.push_back(std::sqrt(pl / (cfg.rician_ru + 1.0)) *
                         (std::sqrt(cfg.rician_ru) * los + detail::rayleigh_vector(cfg.N, rng)));
    }
    return ch;
}

/// f_k = h_{d,k} + G^H diag(conj(x)) h_{r,k}; x must be unit-modulus.
inline EffectiveChannel effective_channel(const ChannelSet& ch, const VectorXcd& x) {
    EffectiveChannel eff;
    eff.f.reserve(ch.h_d.size());
    for (size_t k = 0; k < ch.h_d.size(); ++k) {
        if (ch.h_r[k].size() != x.size() || ch.G.rows() != x.size() ||
            ch.G.cols() != ch.h_d[k].size())
            throw std::invalid_argument("effective_channel: dimension mismatch");
        eff.f.push_back(ch.h_d[k] + ch.G.adjoint() * x.conjugate().cwiseProduct(ch.h_r[k]));
    }
    return eff;
}

/// Per-user SINR for precoder columns p_k (Eq.-level definition, analytic).
inline std::vector<double> compute_sinr(const EffectiveChannel& eff,
                                        const std::vector<VectorXcd>& p,
                                        double noise_power) {
    const size_t K = eff.f.size();
    if (p.size() != K) throw std::invalid_argument("compute_sinr: precoder/user count mismatch");
    std::vector<double> out(K);
    for (size_t k = 0; k < K; ++k) {
        double sig = std::norm(eff.f[k].dot(p[k]));
        double interf = 0.0;
        for (size_t l = 0; l < K; ++l)
            if (l != k) interf += std::norm(eff.f[k].dot(p[l]));
        out[k] = sig / (interf + noise_power);
    }
    return out;
}

}  // namespace riscache
