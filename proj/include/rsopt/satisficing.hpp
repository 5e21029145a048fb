#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rsopt/extended_real.hpp"
#include "rsopt/geometry.hpp"

namespace rsopt {

/// A scalar field over a grid, tagged with where it came from. The robustness
/// measures below are field-agnostic: applied to the truth they give realized
/// robustness, applied to confidence bounds they give optimistic/pessimistic
/// proxies, applied to a posterior sample they drive Thompson selection.
struct ValueField {
    enum class Kind { Truth, Ucb, Lcb, Sample, Other };
    Eigen::VectorXd values;
    Kind kind = Kind::Other;
};

namespace detail {
inline void check_field(const ValueField& field, const ActionGrid& grid, const char* op) {
    if (field.values.size() != grid.size()) {
        throw std::invalid_argument(std::string(op) + ": field size does not match grid");
    }
}
inline void check_tau(double tau, const char* op) {
    if (!std::isfinite(tau)) {
        throw std::invalid_argument(std::string(op) + ": tau must be finite");
    }
}
}  // namespace detail

/// A robustness measure evaluated at every action, with the best action under
/// the measure's own sense (min for fragility-like measures, max for the
/// critical radius). Ties go to the smallest index.
struct RobustnessProfile {
    enum class Measure { Fragility, PFragility, CriticalRadius };
    Measure measure = Measure::Fragility;
    double tau = 0.0;
    double p = 1.0;  // meaningful for PFragility
    std::vector<ExtendedReal> values;
    std::size_t best_index = 0;
    ExtendedReal best_value;

    void finish_min() {
        best_index = argmin_index(values);
        best_value = values[best_index];
    }
    void finish_max() {
        best_index = argmax_index(values);
        best_value = values[best_index];
    }
};

/// Fragility of each action: the steepest rate at which the field can drop
/// below tau per unit of perturbation distance,
///   kappa(x) = ( max_{d(x,x') > 0} (tau - v(x')) / d(x,x') )^+ ,
/// and +inf when the action itself misses tau (v(x) < tau). Zero-distance
/// duplicates are excluded from the max (a zero perturbation is not an
/// attack). Throws GeometryError if a feasible action has no positive-distance
/// neighbor at all.
inline RobustnessProfile fragility(const ValueField& field, const ActionGrid& grid, double tau) {
    detail::check_field(field, grid, "fragility");
    detail::check_tau(tau, "fragility");
    const int n = grid.size();
    RobustnessProfile prof;
    prof.measure = RobustnessProfile::Measure::Fragility;
    prof.tau = tau;
    prof.p = 1.0;
    prof.values.reserve(static_cast<std::size_t>(n));
    const auto& dist = grid.dist_matrix();
    for (int i = 0; i < n; ++i) {
        if (field.values(i) < tau) {
            prof.values.push_back(ExtendedReal::pos_inf());
            continue;
        }
        bool any = false;
        double m = 0.0;
        for (int j = 0; j < n; ++j) {
            const double d = dist(i, j);
            if (!(d > 0.0)) continue;
            const double r = (tau - field.values(j)) / d;
            if (!any || r > m) m = r;
            any = true;
        }
        if (!any) {
            throw GeometryError("fragility: action " + std::to_string(i) +
                                " has no positive-distance neighbor");
        }
        prof.values.push_back(ExtendedReal(std::max(0.0, m)));
    }
    prof.finish_min();
    return prof;
}

/// Generalized fragility with shortfall exponent p >= 1:
///   kappa_p(x) = ( max over violators (tau - v(x'))^(1/p) / d(x,x') )^+ ,
/// where a violator is a positive-distance point with v(x') < tau. No
/// violators means 0; v(x) < tau means +inf. p = 1 takes the plain-ratio
/// branch and reproduces `fragility` bit for bit.
inline RobustnessProfile p_fragility(const ValueField& field, const ActionGrid& grid, double tau,
                                     double p) {
    detail::check_field(field, grid, "p_fragility");
    detail::check_tau(tau, "p_fragility");
    if (!(p >= 1.0) || !std::isfinite(p)) {
        throw std::invalid_argument("p_fragility: p must be finite and >= 1");
    }
    const int n = grid.size();
    RobustnessProfile prof;
    prof.measure = RobustnessProfile::Measure::PFragility;
    prof.tau = tau;
    prof.p = p;
    prof.values.reserve(static_cast<std::size_t>(n));
    const auto& dist = grid.dist_matrix();
    const double inv_p = 1.0 / p;
    for (int i = 0; i < n; ++i) {
        if (field.values(i) < tau) {
            prof.values.push_back(ExtendedReal::pos_inf());
            continue;
        }
        double m = 0.0;
        for (int j = 0; j < n; ++j) {
            const double d = dist(i, j);
            const double s = tau - field.values(j);
            if (!(d > 0.0) || !(s > 0.0)) continue;
            const double r = (p == 1.0 ? s : std::pow(s, inv_p)) / d;
            if (r > m) m = r;
        }
        prof.values.push_back(ExtendedReal(m));
    }
    prof.finish_min();
    return prof;
}

/// Critical radius of each action: the largest realized distance r such that
/// every point within r (inclusive) meets tau. An action below tau — or one
/// whose distance-0 group already contains a violator — has radius -inf.
inline RobustnessProfile critical_radius(const ValueField& field, const ActionGrid& grid,
                                         double tau) {
    detail::check_field(field, grid, "critical_radius");
    detail::check_tau(tau, "critical_radius");
    const int n = grid.size();
    RobustnessProfile prof;
    prof.measure = RobustnessProfile::Measure::CriticalRadius;
    prof.tau = tau;
    prof.values.reserve(static_cast<std::size_t>(n));
    const auto& dist = grid.dist_matrix();
    for (int i = 0; i < n; ++i) {
        if (field.values(i) < tau) {
            prof.values.push_back(ExtendedReal::neg_inf());
            continue;
        }
        const auto& order = grid.neighbors_by_distance(i);
        bool have_clean = false;
        double clean = 0.0;
        std::size_t a = 0;
        while (a < order.size()) {
            const double d = dist(i, order[a]);
            // walk the whole equal-distance group; a violator anywhere in the
            // group invalidates radius d (the ball boundary is inclusive)
            bool violated = false;
            std::size_t b = a;
            while (b < order.size() && dist(i, order[b]) == d) {
                if (field.values(order[b]) < tau) violated = true;
                ++b;
            }
            if (violated) break;
            have_clean = true;
            clean = d;
            a = b;
        }
        prof.values.push_back(have_clean ? ExtendedReal(clean) : ExtendedReal::neg_inf());
    }
    prof.finish_max();
    return prof;
}

/// Guaranteed floor implied by a fragility profile at one anchor action:
///   cone(x') = tau - (kappa * d(anchor, x'))^p .
/// Only meaningful when the anchor's fragility is finite; otherwise the cone
/// is undefined (std::domain_error). Entries can be -inf when the power
/// overflows; that is a vacuously true floor.
inline Eigen::VectorXd fragility_cone(const RobustnessProfile& prof, const ActionGrid& grid,
                                      int anchor) {
    if (prof.measure == RobustnessProfile::Measure::CriticalRadius) {
        throw std::invalid_argument("fragility_cone: profile must be a fragility measure");
    }
    if (prof.values.size() != static_cast<std::size_t>(grid.size())) {
        throw std::invalid_argument("fragility_cone: profile size does not match grid");
    }
    if (anchor < 0 || anchor >= grid.size()) {
        throw std::invalid_argument("fragility_cone: anchor out of range");
    }
    const ExtendedReal kappa = prof.values[static_cast<std::size_t>(anchor)];
    if (!kappa.is_finite()) {
        throw std::domain_error("fragility_cone: anchor fragility is infinite, cone undefined");
    }
    const double k = kappa.as_double();
    const int n = grid.size();
    Eigen::VectorXd cone(n);
    for (int j = 0; j < n; ++j) {
        const double kd = k * grid.dist(anchor, j);
        cone(j) = prof.tau - (prof.p == 1.0 ? kd : std::pow(kd, prof.p));
    }
    return cone;
}

/// Ground-truth robustness benchmarks at threshold tau: the best achievable
/// generalized fragility (kappa, argmin) and the best achievable critical
/// radius (eps, argmax). On an infeasible instance (max truth < tau) these
/// degrade naturally to +inf / -inf with the feasible flag cleared.
struct RsBenchmark {
    double tau = 0.0;
    double p = 1.0;
    bool feasible = false;
    ExtendedReal kappa;
    std::size_t kappa_index = 0;
    ExtendedReal eps;
    std::size_t eps_index = 0;
};

inline RsBenchmark rs_benchmark(const ValueField& truth, const ActionGrid& grid, double tau,
                                double p) {
    detail::check_field(truth, grid, "rs_benchmark");
    detail::check_tau(tau, "rs_benchmark");
    RsBenchmark b;
    b.tau = tau;
    b.p = p;
    b.feasible = truth.values.maxCoeff() >= tau;
    const auto frag = p_fragility(truth, grid, tau, p);
    b.kappa = frag.best_value;
    b.kappa_index = frag.best_index;
    const auto rad = critical_radius(truth, grid, tau);
    b.eps = rad.best_value;
    b.eps_index = rad.best_index;
    return b;
}

}  // namespace rsopt
