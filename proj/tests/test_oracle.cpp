// Brute-force oracle equivalence. The oracles recompute every measure from
// the raw distance matrix with definition-shaped loops; agreement with the
// production implementations is expected to be exact (max discrepancy 0).

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "rsopt/geometry.hpp"
#include "rsopt/oracle.hpp"
#include "rsopt/rng.hpp"
#include "rsopt/satisficing.hpp"

using rsopt::ActionGrid;
using rsopt::GridMetric;
using rsopt::RngStream;
using rsopt::ValueField;

namespace {
ValueField random_field(RngStream& rng, int n, bool quantized) {
    ValueField f;
    f.values.resize(n);
    for (int i = 0; i < n; ++i) {
        f.values(i) = quantized ? 0.25 * std::floor(8.0 * rng.uniform01() - 4.0)
                                : 2.0 * rng.normal();
    }
    f.kind = ValueField::Kind::Truth;
    return f;
}
}  // namespace

TEST_CASE("oracle agrees exactly on random smooth instances") {
    RngStream rng(61);
    const std::vector<double> ps{1.0, 2.0, 4.0};
    for (int trial = 0; trial < 10; ++trial) {
        const auto grid = ActionGrid::lattice({{0.0, 2.0}}, {41}, GridMetric::euclidean());
        const auto f = random_field(rng, 41, false);
        const double tau = f.values.mean();
        const auto rep = rsopt::oracle::oracle_check(f, grid, tau, ps);
        INFO(rep.first_failure);
        CHECK(rep.ok);
        CHECK(rep.max_discrepancy == 0.0);
        CHECK(rep.comparisons > 0);
    }
}

TEST_CASE("oracle agrees exactly on 2-d instances with a kernel metric") {
    RngStream rng(62);
    const auto kernel = rsopt::KernelSpec::rbf(Eigen::VectorXd::Ones(1));
    const auto grid =
        ActionGrid::lattice({{0.0, 1.0}, {0.0, 1.0}}, {6, 6}, GridMetric::kernel_induced(kernel));
    for (int trial = 0; trial < 5; ++trial) {
        const auto f = random_field(rng, 36, false);
        const auto rep = rsopt::oracle::oracle_check(f, grid, 0.2, {1.0, 2.0, 3.0});
        INFO(rep.first_failure);
        CHECK(rep.ok);
        CHECK(rep.max_discrepancy == 0.0);
    }
}

TEST_CASE("oracle agrees exactly under ties, duplicates, and quantized values") {
    RngStream rng(63);
    // duplicated points create zero-distance groups; quantized values create
    // exact value ties, so every tie-handling branch is exercised
    Eigen::MatrixXd pts(20, 1);
    for (int i = 0; i < 18; ++i) pts(i, 0) = 0.125 * std::floor(16.0 * rng.uniform01());
    pts(18, 0) = pts(0, 0);
    pts(19, 0) = pts(1, 0);
    const auto grid = ActionGrid::from_points(pts, GridMetric::euclidean());
    for (int trial = 0; trial < 10; ++trial) {
        const auto f = random_field(rng, 20, true);
        for (double tau : {-0.5, 0.0, 0.25}) {
            const auto rep = rsopt::oracle::oracle_check(f, grid, tau, {1.0, 2.0});
            INFO(rep.first_failure);
            CHECK(rep.ok);
            CHECK(rep.max_discrepancy == 0.0);
        }
    }
}

TEST_CASE("naive oracles reproduce the hand-worked instances on their own") {
    // the oracles must be right independently of the production code, so
    // they are pinned to the same hand-derived instances
    using rsopt::ExtendedReal;
    Eigen::MatrixXd pts(5, 1);
    pts << 0.0, 0.25, 0.5, 0.75, 1.0;
    const auto grid = ActionGrid::from_points(pts, GridMetric::euclidean());
    Eigen::VectorXd f(5);
    f << 0.0, 2.0, 2.0, 2.0, 0.0;

    const auto frag = rsopt::oracle::fragility_naive(f, grid.dist_matrix(), 1.0);
    CHECK(frag[0].is_pos_inf());
    CHECK(frag[1] == ExtendedReal(4.0));
    CHECK(frag[2] == ExtendedReal(2.0));
    CHECK(frag[3] == ExtendedReal(4.0));
    CHECK(frag[4].is_pos_inf());

    const auto rad = rsopt::oracle::critical_radius_naive(f, grid.dist_matrix(), 1.0);
    CHECK(rad[0].is_neg_inf());
    CHECK(rad[1] == ExtendedReal(0.0));
    CHECK(rad[2] == ExtendedReal(0.25));
    CHECK(rad[3] == ExtendedReal(0.0));
    CHECK(rad[4].is_neg_inf());

    // p = 2 at the center: sqrt(1)/0.5 = 2
    const auto p2 = rsopt::oracle::p_fragility_naive(f, grid.dist_matrix(), 1.0, 2.0);
    CHECK(p2[2] == ExtendedReal(2.0));
}

TEST_CASE("oracle refuses oversized grids") {
    const auto grid = ActionGrid::lattice({{0.0, 1.0}}, {501}, GridMetric::euclidean(), 1000);
    ValueField f;
    f.values = Eigen::VectorXd::Zero(501);
    CHECK_THROWS_AS(rsopt::oracle::oracle_check(f, grid, 0.0, {1.0}), rsopt::ResourceError);
}

TEST_CASE("oracle argbests follow the smallest-index rule") {
    // symmetric instance with global ties: indexes must match production
    const auto grid = ActionGrid::lattice({{0.0, 1.0}}, {5}, GridMetric::euclidean());
    ValueField f;
    f.values.resize(5);
    f.values << 2.0, 2.0, 2.0, 2.0, 2.0;  // all fragility 0, all radius 1 at the ends
    const auto rep = rsopt::oracle::oracle_check(f, grid, 1.0, {1.0, 2.0});
    INFO(rep.first_failure);
    CHECK(rep.ok);
}
