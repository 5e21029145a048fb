#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rsopt/extended_real.hpp"
#include "rsopt/geometry.hpp"
#include "rsopt/satisficing.hpp"

namespace rsopt::oracle {

/// Brute-force reference implementations of the robustness measures. These
/// deliberately share no scan structure with the production code (no sorted
/// neighbor lists, no early exits): every quantity is recomputed from the raw
/// distance matrix by definition-shaped loops. The arithmetic expressions are
/// the definitional ones, so agreement is expected to be exact, not just
/// within tolerance.

inline std::vector<ExtendedReal> fragility_naive(const Eigen::VectorXd& values,
                                                 const Eigen::MatrixXd& dist, double tau) {
    const Eigen::Index n = values.size();
    std::vector<ExtendedReal> out;
    out.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        if (values(i) < tau) {
            out.push_back(ExtendedReal::pos_inf());
            continue;
        }
        bool any = false;
        double m = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (!(dist(i, j) > 0.0)) continue;
            const double r = (tau - values(j)) / dist(i, j);
            if (!any || r > m) m = r;
            any = true;
        }
        if (!any) {
            throw GeometryError("fragility oracle: action " + std::to_string(i) +
                                " has no positive-distance neighbor");
        }
        out.push_back(ExtendedReal(std::max(0.0, m)));
    }
    return out;
}

inline std::vector<ExtendedReal> p_fragility_naive(const Eigen::VectorXd& values,
                                                   const Eigen::MatrixXd& dist, double tau,
                                                   double p) {
    const Eigen::Index n = values.size();
    std::vector<ExtendedReal> out;
    out.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        if (values(i) < tau) {
            out.push_back(ExtendedReal::pos_inf());
            continue;
        }
        double m = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            const double s = tau - values(j);
            if (!(dist(i, j) > 0.0) || !(s > 0.0)) continue;
            const double r = (p == 1.0 ? s : std::pow(s, 1.0 / p)) / dist(i, j);
            if (r > m) m = r;
        }
        out.push_back(ExtendedReal(m));
    }
    return out;
}

/// For every action, tries every realized distance r from it as a candidate
/// radius and keeps the largest r whose closed ball is violation-free.
inline std::vector<ExtendedReal> critical_radius_naive(const Eigen::VectorXd& values,
                                                       const Eigen::MatrixXd& dist, double tau) {
    const Eigen::Index n = values.size();
    std::vector<ExtendedReal> out;
    out.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        if (values(i) < tau) {
            out.push_back(ExtendedReal::neg_inf());
            continue;
        }
        bool found = false;
        double best = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            const double r = dist(i, j);
            bool clean = true;
            for (Eigen::Index k = 0; k < n; ++k) {
                if (dist(i, k) <= r && values(k) < tau) {
                    clean = false;
                    break;
                }
            }
            if (clean && (!found || r > best)) {
                best = r;
                found = true;
            }
        }
        out.push_back(found ? ExtendedReal(best) : ExtendedReal::neg_inf());
    }
    return out;
}

/// Outcome of cross-checking the production measures against the oracles.
struct OracleReport {
    bool ok = true;
    double max_discrepancy = 0.0;   // largest finite-vs-finite gap seen
    std::string first_failure;      // empty when ok
    int comparisons = 0;
};

namespace detail {
inline bool match(const ExtendedReal& a, const ExtendedReal& b, double tol, double* gap) {
    if (a.is_finite() != b.is_finite()) return false;
    if (!a.is_finite()) return a.as_double() == b.as_double();  // same infinity
    const double d = std::abs(a.as_double() - b.as_double());
    if (d > *gap) *gap = d;
    return d <= tol;
}

inline void compare_profiles(const std::vector<ExtendedReal>& got,
                             const std::vector<ExtendedReal>& want, const std::string& what,
                             OracleReport& rep) {
    constexpr double kTol = 1e-10;
    for (std::size_t i = 0; i < got.size(); ++i) {
        ++rep.comparisons;
        if (!match(got[i], want[i], kTol, &rep.max_discrepancy)) {
            if (rep.ok) {
                rep.first_failure = what + " at action " + std::to_string(i) + ": got " +
                                    got[i].to_string() + ", oracle " + want[i].to_string();
            }
            rep.ok = false;
        }
    }
}
}  // namespace detail

inline constexpr int kOracleMaxPoints = 500;

/// Recomputes fragility, generalized fragility for each requested p, the
/// critical radius, and the benchmark scalars/argbests, and compares them
/// against the production implementations at tolerance 1e-10 (infinite values
/// must match exactly). O(N^3), so capped at 500 actions.
inline OracleReport oracle_check(const ValueField& truth, const ActionGrid& grid, double tau,
                                 const std::vector<double>& ps) {
    if (grid.size() > kOracleMaxPoints) {
        throw ResourceError("oracle_check: grid exceeds " + std::to_string(kOracleMaxPoints) +
                            " actions");
    }
    OracleReport rep;
    const auto& dist = grid.dist_matrix();

    const auto frag = fragility(truth, grid, tau);
    detail::compare_profiles(frag.values, fragility_naive(truth.values, dist, tau), "fragility",
                             rep);

    for (double p : ps) {
        const auto prof = p_fragility(truth, grid, tau, p);
        const auto want = p_fragility_naive(truth.values, dist, tau, p);
        detail::compare_profiles(prof.values, want, "p_fragility(p=" + format_double(p) + ")",
                                 rep);
        // benchmark argmin under the smallest-index tie rule
        ++rep.comparisons;
        if (prof.best_index != argmin_index(want) && rep.ok) {
            rep.ok = false;
            rep.first_failure = "p_fragility argmin mismatch at p=" + format_double(p);
        }
    }

    const auto rad = critical_radius(truth, grid, tau);
    const auto rad_want = critical_radius_naive(truth.values, dist, tau);
    detail::compare_profiles(rad.values, rad_want, "critical_radius", rep);
    ++rep.comparisons;
    if (rad.best_index != argmax_index(rad_want) && rep.ok) {
        rep.ok = false;
        rep.first_failure = "critical_radius argmax mismatch";
    }

    return rep;
}

}  // namespace rsopt::oracle
