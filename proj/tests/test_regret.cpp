// Regret sequences and the robustness-area curve, against hand integrals.

#include <catch2/catch_amalgamated.hpp>

#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "rsopt/geometry.hpp"
#include "rsopt/regret.hpp"
#include "rsopt/rng.hpp"
#include "rsopt/satisficing.hpp"

using rsopt::ActionGrid;
using rsopt::ExtendedReal;
using rsopt::GridMetric;
using rsopt::ValueField;

TEST_CASE("lenient regret accumulates clipped shortfalls") {
    const std::vector<double> f = {2.0, 0.5, 1.0};
    const std::vector<double> tau = {1.0, 1.0, 1.0};
    const auto cum = rsopt::lenient_regret(f, tau);
    REQUIRE(cum.size() == 3);
    CHECK(cum[0] == 0.0);   // above threshold: no regret
    CHECK(cum[1] == 0.5);
    CHECK(cum[2] == 0.5);   // exactly at threshold: no increment

    // per-round thresholds are honored
    const auto cum2 = rsopt::lenient_regret({0.0, 0.0}, {0.25, 2.0});
    CHECK(cum2[0] == 0.25);
    CHECK(cum2[1] == 2.25);

    CHECK_THROWS_AS(rsopt::lenient_regret({1.0}, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("satisficing regret discounts the threshold by the fragility bill") {
    const std::vector<double> f = {0.2, 0.9, 0.0};
    const std::vector<double> eps = {0.5, 0.5, 0.0};
    const std::vector<double> tau = {1.0, 1.0, 1.0};
    const ExtendedReal kappa(1.0);
    // increments: (1 - .5 - .2)+ = .3; (1 - .5 - .9)+ = 0; (1 - 0 - 0)+ = 1
    const auto cum = rsopt::rs_regret(f, eps, tau, kappa);
    REQUIRE(cum.size() == 3);
    CHECK(cum[0] == 0.3);
    CHECK(cum[1] == 0.3);
    CHECK(cum[2] == 1.3);

    CHECK_THROWS_AS(rsopt::rs_regret(f, eps, tau, ExtendedReal::pos_inf()),
                    std::invalid_argument);
    CHECK_THROWS_AS(rsopt::rs_regret(f, {0.5}, tau, kappa), std::invalid_argument);
    CHECK_THROWS_AS(rsopt::rs_regret(f, eps, {1.0}, kappa), std::invalid_argument);
}

TEST_CASE("generalized regret raises the bill to the p-th power") {
    const std::vector<double> f = {0.0, 0.0};
    const std::vector<double> eps = {0.5, 2.0};
    const std::vector<double> tau = {1.0, 5.0};
    // p = 2, kappa_p = 1: increments (1 - .25)+ = .75; (5 - 4)+ = 1
    const auto cum = rsopt::rsg_regret(f, eps, tau, ExtendedReal(1.0), 2.0);
    CHECK(cum[0] == 0.75);
    CHECK(cum[1] == 1.75);

    CHECK_THROWS_AS(rsopt::rsg_regret(f, eps, tau, ExtendedReal(1.0), 0.5),
                    std::invalid_argument);
    CHECK_THROWS_AS(rsopt::rsg_regret(f, eps, tau, ExtendedReal::neg_inf(), 2.0),
                    std::invalid_argument);
}

TEST_CASE("p = 1 generalized regret is the satisficing regret, bitwise") {
    rsopt::RngStream rng(101);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> f(30), eps(30), tau(30);
        for (int t = 0; t < 30; ++t) {
            f[static_cast<std::size_t>(t)] = rng.normal();
            eps[static_cast<std::size_t>(t)] = rng.uniform01();
            tau[static_cast<std::size_t>(t)] = rng.normal();
        }
        const ExtendedReal kappa(0.25 + rng.uniform01());
        CHECK(rsopt::rsg_regret(f, eps, tau, kappa, 1.0) ==
              rsopt::rs_regret(f, eps, tau, kappa));
    }
}

TEST_CASE("all regrets are nondecreasing in t") {
    rsopt::RngStream rng(102);
    std::vector<double> f(50), eps(50), tau(50);
    for (int t = 0; t < 50; ++t) {
        f[static_cast<std::size_t>(t)] = rng.normal();
        eps[static_cast<std::size_t>(t)] = rng.uniform01();
        tau[static_cast<std::size_t>(t)] = rng.normal();
    }
    for (const auto& cum : {rsopt::lenient_regret(f, tau),
                            rsopt::rs_regret(f, eps, tau, ExtendedReal(0.7)),
                            rsopt::rsg_regret(f, eps, tau, ExtendedReal(0.7), 2.0)}) {
        for (std::size_t t = 1; t < cum.size(); ++t) CHECK(cum[t] >= cum[t - 1]);
    }
}

TEST_CASE("area curve matches a hand trapezoid integral") {
    const auto g = ActionGrid::lattice({{0.0, 1.0}}, {3}, GridMetric::euclidean());
    Eigen::VectorXd v(3);
    v << 0.0, -1.0, -2.0;  // from x* = 0: worst within .5 is -1, within 1 is -2
    const ValueField truth{v, ValueField::Kind::Truth};
    const std::vector<double> knots = {0.0, 0.25, 0.5, 0.75, 1.0};

    const auto curve = rsopt::area_metric(truth, g, 0, 0.0, knots);
    REQUIRE(curve.eps == knots);
    // shortfall g(eps) = (0 - min ball)^+
    CHECK(curve.shortfall == std::vector<double>{0.0, 0.0, 1.0, 1.0, 2.0});
    // trapezoids: 0; 0; +.25*(0+1)/2 = .125; +.25*(1+1)/2 = .375; +.25*(1+2)/2 = .75
    REQUIRE(curve.area.size() == 5);
    CHECK(curve.area[0] == 0.0);
    CHECK(curve.area[1] == 0.0);
    CHECK_THAT(curve.area[2], Catch::Matchers::WithinAbs(0.125, 1e-15));
    CHECK_THAT(curve.area[3], Catch::Matchers::WithinAbs(0.375, 1e-15));
    CHECK_THAT(curve.area[4], Catch::Matchers::WithinAbs(0.75, 1e-15));

    // a robust point (flat truth above tau) has identically zero area
    Eigen::VectorXd flat = Eigen::VectorXd::Constant(3, 1.0);
    const auto zero = rsopt::area_metric({flat, ValueField::Kind::Truth}, g, 1, 0.5, knots);
    for (double a : zero.area) CHECK(a == 0.0);

    CHECK_THROWS_AS(rsopt::area_metric(truth, g, 0, 0.0, {0.25, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(rsopt::area_metric(truth, g, 0, 0.0, {0.0, 0.5, 0.5}),
                    std::invalid_argument);
    CHECK_THROWS_AS(rsopt::area_metric(truth, g, 0, 0.0, {}), std::invalid_argument);
    CHECK_THROWS_AS(rsopt::area_metric(truth, g, 7, 0.0, knots), std::invalid_argument);
}

TEST_CASE("uniform knots span zero to the diameter") {
    const auto g = ActionGrid::lattice({{0.0, 2.0}}, {5}, GridMetric::euclidean());
    const auto knots = rsopt::uniform_knots(g, 5);
    REQUIRE(knots.size() == 5);
    CHECK(knots.front() == 0.0);
    CHECK(knots.back() == 2.0);
    CHECK(knots[2] == 1.0);
    CHECK_THROWS_AS(rsopt::uniform_knots(g, 1), std::invalid_argument);
}
