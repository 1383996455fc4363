#include <catch2/catch_amalgamated.hpp>

#include "riscache/active_beamforming.hpp"
#include "riscache/rng.hpp"

using namespace riscache;

namespace {

VectorXcd random_channel(int m, double scale, Rng& rng) {
    VectorXcd v(m);
    for (int i = 0; i < m; ++i) v(i) = rng.cgaussian();
    return scale * v;
}

EffectiveChannel make_eff(std::vector<VectorXcd> f) {
    EffectiveChannel e;
    e.f = std::move(f);
    return e;
}

// Independent oracle: classical uplink-downlink duality fixed point.
// Iterates q_k <- gamma_k / (f_k^H (I + sum_{l!=k} q_l f_l f_l^H)^{-1} f_k);
// the optimal downlink power is noise * sum_k q_k.
double uplink_fixed_point_power(const EffectiveChannel& eff, const std::vector<double>& gammas,
                                double noise_power) {
    const int K = static_cast<int>(eff.f.size());
    const int M = static_cast<int>(eff.f[0].size());
    Eigen::VectorXd q = Eigen::VectorXd::Zero(K);
    for (int it = 0; it < 5000; ++it) {
        double delta = 0.0;
        for (int k = 0; k < K; ++k) {
            MatrixXcd S = MatrixXcd::Identity(M, M);
            for (int l = 0; l < K; ++l)
                if (l != k)
                    S += q(l) * (eff.f[static_cast<size_t>(l)] *
                                 eff.f[static_cast<size_t>(l)].adjoint());
            double denom = (eff.f[static_cast<size_t>(k)].adjoint() *
                            S.llt().solve(eff.f[static_cast<size_t>(k)]))(0)
                               .real();
            double next = gammas[static_cast<size_t>(k)] / denom;
            delta = std::max(delta, std::abs(next - q(k)) / std::max(1.0, next));
            q(k) = next;
        }
        if (delta < 1e-13) break;
    }
    return noise_power * q.sum();
}

constexpr double kNoise = 1e-11;  // -150 dBm/Hz over 10 MHz

}  // namespace

TEST_CASE("solve_sdp single user matches the matched-filter closed form") {
    Rng rng(11);
    VectorXcd f = random_channel(6, 1e-4, rng);
    double gamma = 50.0;
    EffectiveChannel eff = make_eff({f});
    SdpSolution sol = solve_sdp(eff, {gamma}, kNoise);
    double expect = gamma * kNoise / f.squaredNorm();
    CHECK(sol.primal_obj == Catch::Approx(expect).epsilon(1e-7));
    CHECK(std::abs(sol.primal_obj - sol.dual_obj) <=
          1e-6 * std::max(1.0, std::abs(sol.primal_obj)));

    auto p = extract_rank1(sol, eff);
    // matched-filter direction: collinear with f
    double cosang = std::abs(f.dot(p[0])) / (f.norm() * p[0].norm());
    CHECK(cosang == Catch::Approx(1.0).margin(1e-6));
    // phase convention: f^H p real nonnegative
    cplx inner = f.dot(p[0]);
    CHECK(inner.imag() == Catch::Approx(0.0).margin(1e-12 * std::abs(inner)));
    CHECK(inner.real() >= 0.0);
}

TEST_CASE("solve_sdp decouples orthogonal users") {
    const int M = 4;
    VectorXcd f1 = VectorXcd::Zero(M), f2 = VectorXcd::Zero(M);
    f1(0) = cplx(1e-4, 2e-5);
    f2(1) = cplx(-3e-5, 1e-4);
    std::vector<double> gammas{20.0, 80.0};
    EffectiveChannel eff = make_eff({f1, f2});
    SdpSolution sol = solve_sdp(eff, gammas, kNoise);
    double expect =
        gammas[0] * kNoise / f1.squaredNorm() + gammas[1] * kNoise / f2.squaredNorm();
    CHECK(sol.primal_obj == Catch::Approx(expect).epsilon(1e-6));
}

TEST_CASE("solve_sdp reports infeasibility with a diverging dual") {
    // M=1, two users, both demanding SINR 1000: the scalar SINR product is
    // bounded below 1, so no precoder exists.
    VectorXcd f1(1), f2(1);
    f1(0) = cplx(1e-4, 0.0);
    f2(0) = cplx(5e-5, 5e-5);
    std::vector<double> gammas{1000.0, 1000.0};

    // exhaustive scalar grid confirming infeasibility of the targets
    bool any_feasible = false;
    for (double p1 = 0.0; p1 <= 10.0; p1 += 0.05)
        for (double p2 = 0.0; p2 <= 10.0; p2 += 0.05) {
            double s1 = std::norm(f1(0)) * p1 * p1 / (std::norm(f1(0)) * p2 * p2 + kNoise);
            double s2 = std::norm(f2(0)) * p2 * p2 / (std::norm(f2(0)) * p1 * p1 + kNoise);
            if (s1 >= gammas[0] && s2 >= gammas[1]) any_feasible = true;
        }
    REQUIRE_FALSE(any_feasible);

    EffectiveChannel eff = make_eff({f1, f2});
    CHECK_THROWS_AS(solve_sdp(eff, gammas, kNoise), InfeasibleError);
}

TEST_CASE("extract_rank1 recovers an exact rank-1 block") {
    Rng rng(13);
    VectorXcd p = random_channel(5, 1.0, rng);
    VectorXcd f = random_channel(5, 1.0, rng);
    SdpSolution sol;
    sol.P_blocks.push_back(p * p.adjoint());
    EffectiveChannel eff = make_eff({f});
    auto out = extract_rank1(sol, eff);
    // equal up to a global phase
    double cosang = std::abs(p.dot(out[0])) / (p.norm() * out[0].norm());
    CHECK(cosang == Catch::Approx(1.0).margin(1e-10));
    CHECK(out[0].norm() == Catch::Approx(p.norm()).epsilon(1e-10));

    SECTION("non-rank-1 input is rejected") {
        SdpSolution bad;
        bad.P_blocks.push_back(MatrixXcd::Identity(5, 5));
        CHECK_THROWS_AS(extract_rank1(bad, eff), RankViolationError);
    }
}

TEST_CASE("random feasible instances: rank-1, KKT, tight SINR, duality") {
    Rng rng(17);
    int checked = 0;
    for (int trial = 0; trial < 40; ++trial) {
        int M = (trial % 2 == 0) ? 4 : 8;
        int K = (trial % 3 == 0) ? 3 : 2;
        double gamma = (trial % 2 == 0) ? 10.0 : 100.0;
        std::vector<VectorXcd> f;
        for (int k = 0; k < K; ++k) f.push_back(random_channel(M, 1e-4, rng));
        std::vector<double> gammas(static_cast<size_t>(K), gamma);
        EffectiveChannel eff = make_eff(f);

        SdpSolution sol = solve_sdp(eff, gammas, kNoise);
        KktReport rep = verify_kkt(sol, eff, gammas, kNoise);
        CHECK(rep.all_passed());
        CHECK(std::abs(sol.primal_obj - sol.dual_obj) <=
              1e-6 * std::max(1.0, std::abs(sol.primal_obj)));

        auto p = extract_rank1(sol, eff, 1e-6);  // sigma2/sigma1 < 1e-6 expected
        double power = 0.0;
        for (const auto& pk : p) power += pk.squaredNorm();
        CHECK(power <= sol.primal_obj * (1.0 + 1e-6));

        auto sinr = compute_sinr(eff, p, kNoise);
        for (int k = 0; k < K; ++k)
            CHECK(sinr[static_cast<size_t>(k)] ==
                  Catch::Approx(gammas[static_cast<size_t>(k)]).epsilon(1e-4));
        ++checked;
    }
    CHECK(checked == 40);
}

TEST_CASE("verify_kkt detects a perturbed dual") {
    Rng rng(19);
    VectorXcd f = random_channel(4, 1e-4, rng);
    EffectiveChannel eff = make_eff({f});
    SdpSolution sol = solve_sdp(eff, {30.0}, kNoise);
    REQUIRE(verify_kkt(sol, eff, {30.0}, kNoise).all_passed());
    sol.duals[0] *= 1.1;
    KktReport rep = verify_kkt(sol, eff, {30.0}, kNoise);
    CHECK(rep.max_reconstruction_residual > 1e-6);
}

TEST_CASE("solve_active agrees with the uplink fixed-point oracle") {
    Rng rng(23);
    for (int trial = 0; trial < 10; ++trial) {
        int M = 6, K = 3;
        std::vector<VectorXcd> f;
        for (int k = 0; k < K; ++k) f.push_back(random_channel(M, 1e-4, rng));
        std::vector<double> gammas{15.0, 40.0, 90.0};
        EffectiveChannel eff = make_eff(f);
        auto [p, power] = solve_active(eff, gammas, kNoise);
        double oracle = uplink_fixed_point_power(eff, gammas, kNoise);
        CHECK(power == Catch::Approx(oracle).epsilon(1e-4));
    }
}

TEST_CASE("solve_active invariances and monotonicity") {
    Rng rng(29);
    int M = 5, K = 2;
    std::vector<VectorXcd> f;
    for (int k = 0; k < K; ++k) f.push_back(random_channel(M, 1e-4, rng));
    std::vector<double> gammas{25.0, 25.0};
    auto [p1, power1] = solve_active(make_eff(f), gammas, kNoise);

    // global phase rotation leaves the optimal power unchanged
    std::vector<VectorXcd> fr = f;
    for (auto& fk : fr) fk *= std::polar(1.0, 1.234);
    auto [p2, power2] = solve_active(make_eff(fr), gammas, kNoise);
    CHECK(power2 == Catch::Approx(power1).epsilon(1e-8));

    // +3 dB on every target strictly increases the power
    std::vector<double> harder{50.0, 50.0};
    auto [p3, power3] = solve_active(make_eff(f), harder, kNoise);
    CHECK(power3 > power1);
}
