#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rsopt/extended_real.hpp"
#include "rsopt/geometry.hpp"
#include "rsopt/gp.hpp"
#include "rsopt/rng.hpp"
#include "rsopt/satisficing.hpp"

namespace rsopt {

/// Per-round perturbation budget: a constant, or an explicit sequence whose
/// last entry is held when the horizon outruns it (flagged on use).
struct BudgetSchedule {
    enum class Mode { Constant, Sequence };
    Mode mode = Mode::Constant;
    double value = 0.0;
    std::vector<double> sequence;

    static BudgetSchedule constant(double value) {
        if (!(value >= 0.0) || !std::isfinite(value)) {
            throw std::invalid_argument("budget: constant must be finite and >= 0");
        }
        BudgetSchedule b;
        b.value = value;
        return b;
    }

    static BudgetSchedule from_sequence(std::vector<double> seq) {
        if (seq.empty()) throw std::invalid_argument("budget: sequence must be nonempty");
        for (double v : seq) {
            if (!(v >= 0.0) || !std::isfinite(v)) {
                throw std::invalid_argument("budget: sequence entries must be finite and >= 0");
            }
        }
        BudgetSchedule b;
        b.mode = Mode::Sequence;
        b.sequence = std::move(seq);
        return b;
    }
};

struct BudgetValue {
    double eps = 0.0;
    bool tail_extended = false;  // sequence exhausted; last entry held
};

/// Budget in force at 1-based round t.
inline BudgetValue budget_at(const BudgetSchedule& b, int t) {
    if (t < 1) throw std::invalid_argument("budget_at: rounds are 1-based");
    if (b.mode == BudgetSchedule::Mode::Constant) return {b.value, false};
    const auto idx = static_cast<std::size_t>(t - 1);
    if (idx < b.sequence.size()) return {b.sequence[idx], false};
    return {b.sequence.back(), true};
}

/// Input-perturbation model. The budgeted kinds move the played action inside
/// the closed ball of the round's budget around the request; GaussianNoise is
/// unbudgeted displacement snapped back onto the grid.
struct AttackSpec {
    enum class Kind { None, Random, Lcb, WorstCase, GaussianNoise };
    Kind kind = Kind::None;
    double sigma = 0.0;  // GaussianNoise coordinatewise std
    BudgetSchedule budget;

    static AttackSpec none() { return AttackSpec{}; }

    static AttackSpec random(BudgetSchedule budget) {
        AttackSpec a;
        a.kind = Kind::Random;
        a.budget = std::move(budget);
        return a;
    }

    static AttackSpec lcb(BudgetSchedule budget) {
        AttackSpec a;
        a.kind = Kind::Lcb;
        a.budget = std::move(budget);
        return a;
    }

    static AttackSpec worst_case(BudgetSchedule budget) {
        AttackSpec a;
        a.kind = Kind::WorstCase;
        a.budget = std::move(budget);
        return a;
    }

    static AttackSpec gaussian_noise(double sigma) {
        if (!(sigma > 0.0) || !std::isfinite(sigma)) {
            throw std::invalid_argument("attack: gaussian sigma must be finite and > 0");
        }
        AttackSpec a;
        a.kind = Kind::GaussianNoise;
        a.sigma = sigma;
        return a;
    }

    [[nodiscard]] bool budgeted() const {
        return kind == Kind::Random || kind == Kind::Lcb || kind == Kind::WorstCase;
    }
};

/// What actually happened to one requested action.
struct Perturbation {
    int x_played = 0;
    double magnitude = 0.0;  // d(request, played) in the grid metric
    double eps = 0.0;        // budget recorded for the round (realized magnitude
                             // for the unbudgeted GaussianNoise attack)
    bool budget_tail = false;
};

/// Applies the attack to a requested action at round t. The Lcb kind needs the
/// learner's confidence field, WorstCase needs the truth; passing null for a
/// needed field is an error. All moves respect the round's budget by
/// construction (ball membership), which the harness re-asserts.
inline Perturbation perturb(const AttackSpec& spec, int t, int x_tilde, const ActionGrid& grid,
                            const ValueField* truth, const ConfidenceField* cf, RngStream& rng) {
    if (x_tilde < 0 || x_tilde >= grid.size()) {
        throw std::invalid_argument("perturb: requested action out of range");
    }
    Perturbation out;
    switch (spec.kind) {
        case AttackSpec::Kind::None: {
            out.x_played = x_tilde;
            return out;
        }
        case AttackSpec::Kind::Random: {
            const auto bv = budget_at(spec.budget, t);
            const auto ball = grid.ball(x_tilde, bv.eps);
            const auto pick = ball.members[rng.uniform_below(ball.members.size())];
            out.x_played = pick;
            out.magnitude = grid.dist(x_tilde, pick);
            out.eps = bv.eps;
            out.budget_tail = bv.tail_extended;
            return out;
        }
        case AttackSpec::Kind::Lcb: {
            if (cf == nullptr) throw std::invalid_argument("perturb: lcb attack needs a confidence field");
            if (cf->lcb.size() != grid.size()) {
                throw std::invalid_argument("perturb: confidence field does not match grid");
            }
            const auto bv = budget_at(spec.budget, t);
            const auto ball = grid.ball(x_tilde, bv.eps);
            int pick = ball.members.front();
            for (int j : ball.members) {
                if (cf->lcb(j) < cf->lcb(pick)) pick = j;
            }
            out.x_played = pick;
            out.magnitude = grid.dist(x_tilde, pick);
            out.eps = bv.eps;
            out.budget_tail = bv.tail_extended;
            return out;
        }
        case AttackSpec::Kind::WorstCase: {
            if (truth == nullptr) throw std::invalid_argument("perturb: worst-case attack needs the truth");
            if (truth->values.size() != grid.size()) {
                throw std::invalid_argument("perturb: truth field does not match grid");
            }
            const auto bv = budget_at(spec.budget, t);
            const auto ball = grid.ball(x_tilde, bv.eps);
            int pick = ball.members.front();
            for (int j : ball.members) {
                if (truth->values(j) < truth->values(pick)) pick = j;
            }
            out.x_played = pick;
            out.magnitude = grid.dist(x_tilde, pick);
            out.eps = bv.eps;
            out.budget_tail = bv.tail_extended;
            return out;
        }
        case AttackSpec::Kind::GaussianNoise: {
            const Eigen::VectorXd delta = spec.sigma * rng.normal_vector(grid.dim());
            const Eigen::VectorXd target = grid.point(x_tilde) + delta;
            // snap to the nearest grid point in plain Euclidean distance
            // (ties to the lowest index), whatever the declared grid metric
            int pick = 0;
            double best = (grid.point(0) - target).squaredNorm();
            for (int j = 1; j < grid.size(); ++j) {
                const double d2 = (grid.point(j) - target).squaredNorm();
                if (d2 < best) {
                    best = d2;
                    pick = j;
                }
            }
            out.x_played = pick;
            out.magnitude = grid.dist(x_tilde, pick);
            out.eps = out.magnitude;  // unbudgeted: record what actually happened
            return out;
        }
    }
    throw std::logic_error("perturb: unreachable");
}

/// Whether every round's budget up to the horizon stays within eps_tau (the
/// instance's best critical radius). GaussianNoise is unbudgeted, so it can
/// never be certified.
inline bool budget_within(const AttackSpec& spec, int horizon, const ExtendedReal& eps_tau) {
    if (horizon < 1) throw std::invalid_argument("budget_within: horizon must be >= 1");
    if (spec.kind == AttackSpec::Kind::GaussianNoise) return false;
    if (spec.kind == AttackSpec::Kind::None) return ExtendedReal(0.0) <= eps_tau;
    for (int t = 1; t <= horizon; ++t) {
        if (ExtendedReal(budget_at(spec.budget, t).eps) > eps_tau) return false;
    }
    return true;
}

}  // namespace rsopt
