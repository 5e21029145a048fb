#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "rsopt/extended_real.hpp"
#include "rsopt/geometry.hpp"
#include "rsopt/satisficing.hpp"

namespace rsopt {

namespace detail {
inline void check_same_length(std::size_t a, std::size_t b, const char* op) {
    if (a != b) throw std::invalid_argument(std::string(op) + ": per-round inputs disagree on length");
}
}  // namespace detail

/// Cumulative lenient regret: sum of per-round threshold shortfalls
/// (tau_t - f(x_t))^+ at the actions actually evaluated.
inline std::vector<double> lenient_regret(const std::vector<double>& f_played,
                                          const std::vector<double>& tau) {
    detail::check_same_length(f_played.size(), tau.size(), "lenient_regret");
    std::vector<double> cum(f_played.size());
    double acc = 0.0;
    for (std::size_t t = 0; t < f_played.size(); ++t) {
        acc += std::max(0.0, tau[t] - f_played[t]);
        cum[t] = acc;
    }
    return cum;
}

/// Cumulative robust-satisficing regret against the fragility benchmark:
/// per-round increment (tau_t - kappa * eps_t - f(x_t))^+. The benchmark
/// must be finite; an infeasible instance has no RS regret.
inline std::vector<double> rs_regret(const std::vector<double>& f_played,
                                     const std::vector<double>& eps,
                                     const std::vector<double>& tau, const ExtendedReal& kappa) {
    detail::check_same_length(f_played.size(), eps.size(), "rs_regret");
    detail::check_same_length(f_played.size(), tau.size(), "rs_regret");
    if (!kappa.is_finite()) {
        throw std::invalid_argument("rs_regret: benchmark fragility must be finite");
    }
    const double k = kappa.as_double();
    std::vector<double> cum(f_played.size());
    double acc = 0.0;
    for (std::size_t t = 0; t < f_played.size(); ++t) {
        acc += std::max(0.0, tau[t] - k * eps[t] - f_played[t]);
        cum[t] = acc;
    }
    return cum;
}

/// Cumulative generalized robust-satisficing regret: per-round increment
/// (tau_t - (kappa_p * eps_t)^p - f(x_t))^+. p = 1 matches rs_regret exactly.
inline std::vector<double> rsg_regret(const std::vector<double>& f_played,
                                      const std::vector<double>& eps,
                                      const std::vector<double>& tau, const ExtendedReal& kappa_p,
                                      double p) {
    detail::check_same_length(f_played.size(), eps.size(), "rsg_regret");
    detail::check_same_length(f_played.size(), tau.size(), "rsg_regret");
    if (!kappa_p.is_finite()) {
        throw std::invalid_argument("rsg_regret: benchmark fragility must be finite");
    }
    if (!(p >= 1.0) || !std::isfinite(p)) {
        throw std::invalid_argument("rsg_regret: p must be finite and >= 1");
    }
    const double k = kappa_p.as_double();
    std::vector<double> cum(f_played.size());
    double acc = 0.0;
    for (std::size_t t = 0; t < f_played.size(); ++t) {
        const double ke = k * eps[t];
        const double pen = (p == 1.0) ? ke : std::pow(ke, p);
        acc += std::max(0.0, tau[t] - pen - f_played[t]);
        cum[t] = acc;
    }
    return cum;
}

/// Robustness-area curve of one action: the worst shortfall within radius eps,
///   g(eps) = (tau - min_{d(x*, j) <= eps} f(j))^+ ,
/// integrated by the trapezoid rule over a knot grid that must start at 0 and
/// be strictly increasing. Returned aligned with the knots.
struct AreaCurve {
    std::vector<double> eps;        // the knots
    std::vector<double> shortfall;  // g at each knot
    std::vector<double> area;       // cumulative integral up to each knot
};

inline AreaCurve area_metric(const ValueField& truth, const ActionGrid& grid, int x_star,
                             double tau, const std::vector<double>& knots) {
    detail::check_field(truth, grid, "area_metric");
    detail::check_tau(tau, "area_metric");
    if (x_star < 0 || x_star >= grid.size()) {
        throw std::invalid_argument("area_metric: action out of range");
    }
    if (knots.empty() || knots.front() != 0.0) {
        throw std::invalid_argument("area_metric: knots must start at 0");
    }
    for (std::size_t i = 1; i < knots.size(); ++i) {
        if (!(knots[i] > knots[i - 1]) || !std::isfinite(knots[i])) {
            throw std::invalid_argument("area_metric: knots must be strictly increasing and finite");
        }
    }
    AreaCurve curve;
    curve.eps = knots;
    curve.shortfall.resize(knots.size());
    curve.area.resize(knots.size());
    const auto& order = grid.neighbors_by_distance(x_star);
    std::size_t next = 0;
    double run_min = truth.values(x_star);
    for (std::size_t k = 0; k < knots.size(); ++k) {
        while (next < order.size() && grid.dist(x_star, order[next]) <= knots[k]) {
            run_min = std::min(run_min, truth.values(order[next]));
            ++next;
        }
        curve.shortfall[k] = std::max(0.0, tau - run_min);
        curve.area[k] = k == 0 ? 0.0
                               : curve.area[k - 1] + 0.5 * (knots[k] - knots[k - 1]) *
                                                         (curve.shortfall[k] + curve.shortfall[k - 1]);
    }
    return curve;
}

/// Uniform knots 0 .. diameter for area curves (count >= 2).
inline std::vector<double> uniform_knots(const ActionGrid& grid, int count = 64) {
    if (count < 2) throw std::invalid_argument("uniform_knots: count must be >= 2");
    std::vector<double> knots(static_cast<std::size_t>(count));
    const double diam = grid.diameter();
    for (int i = 0; i < count; ++i) {
        knots[static_cast<std::size_t>(i)] = diam * i / (count - 1);
    }
    return knots;
}

}  // namespace rsopt
