// Perturbation models: budget schedules, each attack's pick rule, determinism,
// and the budget certification predicate.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "rsopt/adversary.hpp"
#include "rsopt/geometry.hpp"
#include "rsopt/rng.hpp"
#include "rsopt/satisficing.hpp"

using rsopt::ActionGrid;
using rsopt::AttackSpec;
using rsopt::BudgetSchedule;
using rsopt::ConfidenceField;
using rsopt::ExtendedReal;
using rsopt::GridMetric;
using rsopt::ValueField;

namespace {
ActionGrid line5() { return ActionGrid::lattice({{0.0, 1.0}}, {5}, GridMetric::euclidean()); }

ValueField field(std::initializer_list<double> vals) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(vals.size()));
    Eigen::Index i = 0;
    for (double x : vals) v(i++) = x;
    return ValueField{v, ValueField::Kind::Truth};
}

ConfidenceField cf_with_lcb(std::initializer_list<double> vals) {
    ConfidenceField cf;
    cf.lcb.resize(static_cast<Eigen::Index>(vals.size()));
    Eigen::Index i = 0;
    for (double x : vals) cf.lcb(i++) = x;
    cf.ucb = cf.lcb;
    cf.mean = cf.lcb;
    cf.sd = Eigen::VectorXd::Zero(cf.lcb.size());
    cf.beta = 1.0;
    return cf;
}
}  // namespace

TEST_CASE("budget schedules") {
    const auto c = BudgetSchedule::constant(0.5);
    CHECK(rsopt::budget_at(c, 1).eps == 0.5);
    CHECK(rsopt::budget_at(c, 100).eps == 0.5);
    CHECK_FALSE(rsopt::budget_at(c, 100).tail_extended);

    const auto s = BudgetSchedule::from_sequence({0.1, 0.2, 0.3});
    CHECK(rsopt::budget_at(s, 1).eps == 0.1);
    CHECK(rsopt::budget_at(s, 3).eps == 0.3);
    // past the end: last entry held and flagged
    CHECK(rsopt::budget_at(s, 4).eps == 0.3);
    CHECK(rsopt::budget_at(s, 4).tail_extended);
    CHECK_FALSE(rsopt::budget_at(s, 3).tail_extended);

    CHECK_THROWS_AS(rsopt::budget_at(c, 0), std::invalid_argument);
    CHECK_THROWS_AS(BudgetSchedule::constant(-0.1), std::invalid_argument);
    CHECK_THROWS_AS(BudgetSchedule::constant(std::numeric_limits<double>::infinity()),
                    std::invalid_argument);
    CHECK_THROWS_AS(BudgetSchedule::from_sequence({}), std::invalid_argument);
    CHECK_THROWS_AS(BudgetSchedule::from_sequence({0.1, -0.2}), std::invalid_argument);
    CHECK_THROWS_AS(AttackSpec::gaussian_noise(0.0), std::invalid_argument);
    CHECK_THROWS_AS(AttackSpec::gaussian_noise(-1.0), std::invalid_argument);
}

TEST_CASE("the null attack plays the request unchanged") {
    const auto g = line5();
    rsopt::RngStream rng(9);
    const auto spec = AttackSpec::none();
    for (int x = 0; x < g.size(); ++x) {
        const auto out = rsopt::perturb(spec, 1, x, g, nullptr, nullptr, rng);
        CHECK(out.x_played == x);
        CHECK(out.magnitude == 0.0);
        CHECK(out.eps == 0.0);
    }
    CHECK_THROWS_AS(rsopt::perturb(spec, 1, 99, g, nullptr, nullptr, rng),
                    std::invalid_argument);
}

TEST_CASE("random attack stays in the ball and is roughly uniform over it") {
    const auto g = line5();
    const auto spec = AttackSpec::random(BudgetSchedule::constant(0.25));
    rsopt::RngStream rng(17);

    // ball(2, 0.25) = {1, 2, 3}
    std::map<int, int> counts;
    const int trials = 3000;
    for (int t = 0; t < trials; ++t) {
        const auto out = rsopt::perturb(spec, 1, 2, g, nullptr, nullptr, rng);
        REQUIRE(out.x_played >= 1);
        REQUIRE(out.x_played <= 3);
        CHECK(out.magnitude <= 0.25);
        CHECK(out.eps == 0.25);
        ++counts[out.x_played];
    }
    for (int j : {1, 2, 3}) {
        CHECK(counts[j] > 800);
        CHECK(counts[j] < 1200);
    }

    // identical streams give identical picks
    rsopt::RngStream a(23), b(23);
    for (int t = 1; t <= 50; ++t) {
        CHECK(rsopt::perturb(spec, t, 2, g, nullptr, nullptr, a).x_played ==
              rsopt::perturb(spec, t, 2, g, nullptr, nullptr, b).x_played);
    }
}

TEST_CASE("lcb attack dives to the most pessimistic reachable action") {
    const auto g = line5();
    const auto cf = cf_with_lcb({0.4, 0.1, 0.3, 0.1, 0.9});
    rsopt::RngStream rng(3);
    const auto spec = AttackSpec::lcb(BudgetSchedule::constant(0.5));

    // ball(2, 0.5) = {0,1,2,3,4}; min lcb = 0.1 shared by 1 and 3 -> index 1
    const auto out = rsopt::perturb(spec, 1, 2, g, nullptr, &cf, rng);
    CHECK(out.x_played == 1);
    CHECK(out.magnitude == 0.25);
    CHECK(out.eps == 0.5);

    // tighter budget: ball(4, 0.25) = {3, 4}; min lcb there is at 3
    const auto tight = AttackSpec::lcb(BudgetSchedule::constant(0.25));
    CHECK(rsopt::perturb(tight, 1, 4, g, nullptr, &cf, rng).x_played == 3);

    CHECK_THROWS_AS(rsopt::perturb(spec, 1, 2, g, nullptr, nullptr, rng),
                    std::invalid_argument);
}

TEST_CASE("worst-case attack minimizes the truth inside the ball") {
    const auto g = line5();
    const auto truth = field({0.5, 0.2, 0.8, 0.0, 0.6});
    rsopt::RngStream rng(4);
    const auto spec = AttackSpec::worst_case(BudgetSchedule::constant(0.25));

    // ball(2, .25) = {1,2,3}: truth minimum 0.0 at 3
    CHECK(rsopt::perturb(spec, 1, 2, g, &truth, nullptr, rng).x_played == 3);
    // ball(0, .25) = {0,1}: minimum 0.2 at 1
    CHECK(rsopt::perturb(spec, 1, 0, g, &truth, nullptr, rng).x_played == 1);
    CHECK_THROWS_AS(rsopt::perturb(spec, 1, 2, g, nullptr, nullptr, rng),
                    std::invalid_argument);

    // ties go to the smallest index
    const auto flat = field({1.0, 1.0, 1.0, 1.0, 1.0});
    CHECK(rsopt::perturb(spec, 1, 2, g, &flat, nullptr, rng).x_played == 1);
}

TEST_CASE("worst-case dominates the other budgeted attacks pointwise") {
    const auto g = ActionGrid::lattice({{0.0, 1.0}}, {17}, GridMetric::euclidean());
    rsopt::RngStream vals(31);
    Eigen::VectorXd f = vals.normal_vector(17);
    const ValueField truth{f, ValueField::Kind::Truth};
    ConfidenceField cf;
    cf.mean = vals.normal_vector(17);
    cf.sd = Eigen::VectorXd::Constant(17, 0.2);
    cf.beta = 2.0;
    cf.lcb = cf.mean - 0.4 * Eigen::VectorXd::Ones(17);
    cf.ucb = cf.mean + 0.4 * Eigen::VectorXd::Ones(17);

    const auto budget = BudgetSchedule::constant(0.2);
    const auto worst = AttackSpec::worst_case(budget);
    const auto rnd = AttackSpec::random(budget);
    const auto lcb = AttackSpec::lcb(budget);

    rsopt::RngStream rng(77);
    for (int x = 0; x < g.size(); ++x) {
        const double fw =
            f(rsopt::perturb(worst, 1, x, g, &truth, nullptr, rng).x_played);
        CHECK(fw <= f(rsopt::perturb(rnd, 1, x, g, &truth, nullptr, rng).x_played));
        CHECK(fw <= f(rsopt::perturb(lcb, 1, x, g, &truth, &cf, rng).x_played));
        CHECK(fw <= f(x));  // no attack at all
    }
}

TEST_CASE("gaussian noise snaps to the nearest grid point and reports reality") {
    const auto g = line5();
    const auto spec = AttackSpec::gaussian_noise(0.3);
    rsopt::RngStream a(55), b(55);

    for (int t = 0; t < 100; ++t) {
        const auto oa = rsopt::perturb(spec, 1, 2, g, nullptr, nullptr, a);
        const auto ob = rsopt::perturb(spec, 1, 2, g, nullptr, nullptr, b);
        REQUIRE(oa.x_played >= 0);
        REQUIRE(oa.x_played < g.size());
        CHECK(oa.x_played == ob.x_played);                 // stream-deterministic
        CHECK(oa.eps == oa.magnitude);                     // records what happened
        CHECK(oa.magnitude == g.dist(2, oa.x_played));
    }

    // vanishing noise never leaves the requested point
    const auto tiny = AttackSpec::gaussian_noise(1e-9);
    rsopt::RngStream rng(56);
    for (int t = 0; t < 50; ++t) {
        const auto out = rsopt::perturb(tiny, 1, 3, g, nullptr, nullptr, rng);
        CHECK(out.x_played == 3);
        CHECK(out.eps == 0.0);
    }

    // large noise actually moves the play sometimes
    rsopt::RngStream wide_rng(57);
    const auto wide = AttackSpec::gaussian_noise(0.5);
    int moved = 0;
    for (int t = 0; t < 200; ++t) {
        if (rsopt::perturb(wide, 1, 2, g, nullptr, nullptr, wide_rng).x_played != 2) ++moved;
    }
    CHECK(moved > 50);
}

TEST_CASE("budget certification against a critical radius") {
    CHECK(rsopt::budget_within(AttackSpec::none(), 10, ExtendedReal(0.0)));
    CHECK(rsopt::budget_within(AttackSpec::none(), 10, ExtendedReal::pos_inf()));
    CHECK_FALSE(rsopt::budget_within(AttackSpec::none(), 10, ExtendedReal::neg_inf()));

    const auto r = AttackSpec::random(BudgetSchedule::constant(0.5));
    CHECK(rsopt::budget_within(r, 10, ExtendedReal(0.5)));
    CHECK_FALSE(rsopt::budget_within(r, 10, ExtendedReal(0.49)));
    CHECK(rsopt::budget_within(r, 10, ExtendedReal::pos_inf()));

    // a sequence is certified only through its held tail
    const auto s = AttackSpec::worst_case(BudgetSchedule::from_sequence({0.1, 0.2, 0.7}));
    CHECK(rsopt::budget_within(s, 2, ExtendedReal(0.2)));
    CHECK_FALSE(rsopt::budget_within(s, 3, ExtendedReal(0.2)));
    CHECK_FALSE(rsopt::budget_within(s, 10, ExtendedReal(0.2)));  // tail holds 0.7
    CHECK(rsopt::budget_within(s, 10, ExtendedReal(0.7)));

    // unbudgeted noise can never be certified
    CHECK_FALSE(rsopt::budget_within(AttackSpec::gaussian_noise(1e-12), 10,
                                     ExtendedReal::pos_inf()));

    CHECK_THROWS_AS(rsopt::budget_within(r, 0, ExtendedReal(1.0)), std::invalid_argument);
}
