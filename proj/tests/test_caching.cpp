#include <catch2/catch_amalgamated.hpp>

#include <numeric>

#include "riscache/caching.hpp"
#include "riscache/rng.hpp"

using namespace riscache;

TEST_CASE("zipf_popularity") {
    auto b = zipf_popularity(3, 1.0);
    CHECK(b[0] == Catch::Approx(6.0 / 11.0).epsilon(1e-12));
    CHECK(b[1] == Catch::Approx(3.0 / 11.0).epsilon(1e-12));
    CHECK(b[2] == Catch::Approx(2.0 / 11.0).epsilon(1e-12));

    b = zipf_popularity(5, 0.0);
    for (double v : b) CHECK(v == Catch::Approx(0.2).epsilon(1e-12));

    for (double eps : {0.3, 1.0, 2.1}) {
        auto v = zipf_popularity(37, eps);
        CHECK(std::accumulate(v.begin(), v.end(), 0.0) == Catch::Approx(1.0).epsilon(1e-12));
        for (size_t i = 1; i < v.size(); ++i) CHECK(v[i] <= v[i - 1]);
    }
}

TEST_CASE("optimize_placement greedy structure") {
    auto b = zipf_popularity(4, 1.0);
    auto c = optimize_placement(b, 2.0);
    CHECK(c == std::vector<double>{1.0, 1.0, 0.0, 0.0});

    c = optimize_placement(b, 4.0);
    CHECK(c == std::vector<double>(4, 1.0));
    CHECK(backhaul_cost(c, b, {1e8}) == 0.0);

    std::vector<double> b3{0.5, 0.3, 0.2};
    c = optimize_placement(b3, 1.5);
    CHECK(c == std::vector<double>{1.0, 0.5, 0.0});
    CHECK(backhaul_cost(c, b3, {1.0}) == Catch::Approx(0.35).epsilon(1e-12));

    CHECK_THROWS_AS(optimize_placement(b3, -0.1), std::domain_error);
}

TEST_CASE("optimize_placement matches a brute-force simplex grid") {
    std::vector<double> b{0.5, 0.3, 0.2};
    const double S0 = 1.5;
    double best = 1e300;
    for (int i = 0; i <= 100; ++i)
        for (int j = 0; j <= 100; ++j)
            for (int k = 0; k <= 100; ++k) {
                double c0 = i / 100.0, c1 = j / 100.0, c2 = k / 100.0;
                if (c0 + c1 + c2 > S0 + 1e-12) continue;
                best = std::min(best, (1 - c0) * b[0] + (1 - c1) * b[1] + (1 - c2) * b[2]);
            }
    auto c = optimize_placement(b, S0);
    double cost = (1 - c[0]) * b[0] + (1 - c[1]) * b[1] + (1 - c[2]) * b[2];
    CHECK(cost == Catch::Approx(best).margin(1e-9));
}

TEST_CASE("urc_placement") {
    auto c = urc_placement(1000, 100.0);
    for (double v : c) CHECK(v == Catch::Approx(0.1).epsilon(1e-12));
    CHECK(std::accumulate(c.begin(), c.end(), 0.0) == Catch::Approx(100.0).epsilon(1e-12));
    c = urc_placement(5, 5.0);
    for (double v : c) CHECK(v == 1.0);
}

TEST_CASE("fppc_placement capping and degenerate cases") {
    std::vector<double> b{0.7, 0.2, 0.1};
    auto c = fppc_placement(b, 2.0);
    CHECK(c[0] == Catch::Approx(1.0));
    CHECK(c[1] == Catch::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(c[2] == Catch::Approx(1.0 / 3.0).epsilon(1e-12));

    auto uniform = zipf_popularity(10, 0.0);
    auto cf = fppc_placement(uniform, 3.0);
    auto cu = urc_placement(10, 3.0);
    for (size_t i = 0; i < cf.size(); ++i) CHECK(cf[i] == Catch::Approx(cu[i]).epsilon(1e-12));

    cf = fppc_placement(b, 3.0);
    for (double v : cf) CHECK(v == Catch::Approx(1.0));
}

TEST_CASE("backhaul_cost") {
    std::vector<double> b = zipf_popularity(20, 1.0);
    std::vector<double> rates(5, 1e8);
    std::vector<double> zero(20, 0.0);
    CHECK(backhaul_cost(zero, b, rates) == Catch::Approx(5e8).epsilon(1e-12));
    CHECK(backhaul_cost(std::vector<double>(20, 1.0), b, rates) == 0.0);

    Rng rng(77);
    std::vector<double> c(20);
    for (double& v : c) v = rng.uniform();
    double expect = 0.0;
    for (size_t f = 0; f < 20; ++f)
        for (size_t k = 0; k < rates.size(); ++k) expect += (1.0 - c[f]) * b[f] * rates[k];
    CHECK(backhaul_cost(c, b, rates) == Catch::Approx(expect).epsilon(1e-12));
}

TEST_CASE("placement invariants and ordering") {
    Rng rng(5);
    std::vector<double> rates{2e8, 1e8};
    for (int trial = 0; trial < 20; ++trial) {
        int F = 5 + static_cast<int>(rng.uniform() * 20);
        double eps = rng.uniform(0.0, 2.0);
        double S0 = rng.uniform(0.0, static_cast<double>(F));
        auto b = zipf_popularity(F, eps);
        auto oc = optimize_placement(b, S0);
        auto fp = fppc_placement(b, S0);
        auto ur = urc_placement(F, S0);
        for (auto* c : {&oc, &fp, &ur}) {
            double sum = std::accumulate(c->begin(), c->end(), 0.0);
            CHECK(sum <= S0 + 1e-9);
            for (double v : *c) {
                CHECK(v >= 0.0);
                CHECK(v <= 1.0);
            }
        }
        double cost_oc = backhaul_cost(oc, b, rates);
        CHECK(cost_oc <= backhaul_cost(fp, b, rates) + 1e-9);
        CHECK(cost_oc <= backhaul_cost(ur, b, rates) + 1e-9);

        // the argmin does not depend on the rate targets
        auto oc2 = optimize_placement(b, S0);
        CHECK(oc == oc2);
    }
}
