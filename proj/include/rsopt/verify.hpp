#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rsopt/bench.hpp"
#include "rsopt/config.hpp"
#include "rsopt/oracle.hpp"

namespace rsopt {

struct VerifyCheck {
    std::string name;
    bool ok = true;
    std::string detail;  // failure explanation
};

struct VerifyReport {
    std::vector<VerifyCheck> checks;
    [[nodiscard]] bool all_ok() const {
        return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.ok; });
    }
    [[nodiscard]] std::string to_text() const {
        std::ostringstream out;
        for (const auto& c : checks) {
            out << (c.ok ? "PASS " : "FAIL ") << c.name;
            if (!c.ok && !c.detail.empty()) out << ": " << c.detail;
            out << '\n';
        }
        return out.str();
    }
};

namespace detail {

inline void add_check(VerifyReport& rep, const std::string& name, bool ok,
                      const std::string& detail = "") {
    rep.checks.push_back({name, ok, ok ? "" : detail});
}

inline double recompute_distance(const ActionGrid& grid, int i, int j) {
    if (grid.metric().kind == MetricKind::Euclidean) {
        return (grid.point(i) - grid.point(j)).norm();
    }
    return kernel_metric(*grid.metric().kernel, grid.point(i), grid.point(j));
}

}  // namespace detail

/// Runs the full invariant suite on the configured instance. `corrupt_distance`
/// deliberately damages one distance entry first (a self-test of the suite).
inline VerifyReport verify_instance(const ExperimentConfig& config, bool corrupt_distance = false) {
    VerifyReport rep;

    GridMetric metric = config.metric == MetricKind::Euclidean
                            ? GridMetric::euclidean()
                            : GridMetric::kernel_induced(config.kernel);
    ActionGrid grid =
        config.points_csv
            ? ActionGrid::from_csv(*config.points_csv, metric, config.max_points)
            : ActionGrid::lattice(config.bounds, config.resolution, metric, config.max_points);
    if (corrupt_distance) grid.corrupt_distance_for_testing();
    const TruthInstance truth = make_truth(config.truth, grid, config.kernel);
    const int n = grid.size();

    // --- grid distance consistency -----------------------------------------
    {
        bool ok = true;
        std::string detail;
        const auto& d = grid.dist_matrix();
        for (int i = 0; i < n && ok; ++i) {
            if (d(i, i) != 0.0) {
                ok = false;
                detail = "nonzero self-distance at " + std::to_string(i);
            }
            for (int j = 0; j < n && ok; ++j) {
                if (d(i, j) != d(j, i)) {
                    ok = false;
                    detail = "asymmetry at (" + std::to_string(i) + "," + std::to_string(j) + ")";
                } else if (!(d(i, j) >= 0.0)) {
                    ok = false;
                    detail = "negative distance at (" + std::to_string(i) + "," +
                             std::to_string(j) + ")";
                }
            }
        }
        // spot-check against a fresh metric evaluation
        RngStream rng(config.seed, 0, StreamRole::Truth);
        for (int s = 0; s < 64 && ok; ++s) {
            const int i = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(n)));
            const int j = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(n)));
            const double want = detail::recompute_distance(grid, i, j);
            if (d(i, j) != want) {
                ok = false;
                detail = "stored distance disagrees with the metric at (" + std::to_string(i) +
                         "," + std::to_string(j) + ")";
            }
        }
        detail::add_check(rep, "grid-distance-consistency", ok, detail);
    }

    // --- thresholds and exponents used below --------------------------------
    std::vector<double> taus;
    for (const auto& cell : expand_cells(config)) {
        if (cell.tau_value &&
            std::find(taus.begin(), taus.end(), *cell.tau_value) == taus.end()) {
            taus.push_back(*cell.tau_value);
        }
    }
    if (taus.empty()) {
        // dynamic-only runs still need a concrete threshold to exercise
        const Eigen::VectorXd& v = truth.field.values;
        taus.push_back(v.mean());
    }
    std::vector<double> ps{1.0, 2.0, 4.0};
    for (double p : config.p_list) {
        if (std::find(ps.begin(), ps.end(), p) == ps.end()) ps.push_back(p);
    }

    // --- oracle agreement ----------------------------------------------------
    for (double tau : taus) {
        oracle::OracleReport orep;
        std::string name = "oracle-measures(tau=" + format_double(tau) + ")";
        try {
            orep = oracle::oracle_check(truth.field, grid, tau, ps);
            detail::add_check(rep, name, orep.ok, orep.first_failure);
        } catch (const std::exception& e) {
            detail::add_check(rep, name, false, e.what());
        }
    }

    // --- gram PSD ------------------------------------------------------------
    {
        const Eigen::MatrixXd g = gram(config.kernel, grid.points());
        bool ok = g.isApprox(g.transpose(), 0.0);
        std::string detail_msg = ok ? "" : "gram not symmetric";
        if (ok) {
            Eigen::MatrixXd a = g;
            a.diagonal().array() += 1e-8 * g.diagonal().mean();
            Eigen::MatrixXd l;
            const auto crep = detail::cholesky_lower(a, l);
            ok = crep.ok;
            if (!ok) {
                detail_msg = "gram failed jittered factorization at pivot " +
                             std::to_string(crep.pivot);
            }
        }
        detail::add_check(rep, "gram-psd", ok, detail_msg);
    }

    // --- metric triangle inequality -------------------------------------------
    {
        bool ok = true;
        std::string detail_msg;
        RngStream rng(config.seed, 1, StreamRole::Truth);
        for (int s = 0; s < 256 && ok; ++s) {
            const int i = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(n)));
            const int j = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(n)));
            const int k = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(n)));
            const double slack = 1e-9 * (1.0 + grid.diameter());
            if (grid.dist(i, k) > grid.dist(i, j) + grid.dist(j, k) + slack) {
                ok = false;
                detail_msg = "triangle inequality violated at (" + std::to_string(i) + "," +
                             std::to_string(j) + "," + std::to_string(k) + ")";
            }
        }
        detail::add_check(rep, "kernel-metric-triangle", ok, detail_msg);
    }

    // --- ball monotonicity -----------------------------------------------------
    {
        bool ok = true;
        std::string detail_msg;
        RngStream rng(config.seed, 2, StreamRole::Truth);
        for (int s = 0; s < 32 && ok; ++s) {
            const int c = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(n)));
            const double e1 = rng.uniform01() * grid.diameter();
            const double e2 = e1 + rng.uniform01() * grid.diameter();
            const auto b1 = grid.ball(c, e1);
            const auto b2 = grid.ball(c, e2);
            if (!std::includes(b2.members.begin(), b2.members.end(), b1.members.begin(),
                               b1.members.end())) {
                ok = false;
                detail_msg = "ball(" + format_double(e1) + ") not inside ball(" +
                             format_double(e2) + ") at center " + std::to_string(c);
            }
            for (int j : b1.members) {
                if (grid.dist(c, j) > e1) {
                    ok = false;
                    detail_msg = "ball member outside the radius at center " + std::to_string(c);
                }
            }
        }
        detail::add_check(rep, "ball-monotonicity", ok, detail_msg);
    }

    // --- confidence ordering (bracketing fields) -------------------------------
    {
        RngStream rng(config.seed, 3, StreamRole::Truth);
        Eigen::VectorXd w(n);
        for (int i = 0; i < n; ++i) w(i) = std::abs(rng.normal());
        ValueField lcb{truth.field.values - w, ValueField::Kind::Lcb};
        ValueField ucb{truth.field.values + w, ValueField::Kind::Ucb};
        bool ok = true;
        std::string detail_msg;
        for (double tau : taus) {
            const auto f_u = fragility(ucb, grid, tau);
            const auto f_t = fragility(truth.field, grid, tau);
            const auto f_l = fragility(lcb, grid, tau);
            const auto r_u = critical_radius(ucb, grid, tau);
            const auto r_t = critical_radius(truth.field, grid, tau);
            const auto r_l = critical_radius(lcb, grid, tau);
            for (int i = 0; i < n && ok; ++i) {
                const auto ui = static_cast<std::size_t>(i);
                if (!(f_u.values[ui] <= f_t.values[ui] && f_t.values[ui] <= f_l.values[ui])) {
                    ok = false;
                    detail_msg = "fragility ordering broken at action " + std::to_string(i);
                }
                if (!(r_l.values[ui] <= r_t.values[ui] && r_t.values[ui] <= r_u.values[ui])) {
                    ok = false;
                    detail_msg = "critical-radius ordering broken at action " + std::to_string(i);
                }
            }
            for (double p : ps) {
                const auto g_u = p_fragility(ucb, grid, tau, p);
                const auto g_t = p_fragility(truth.field, grid, tau, p);
                const auto g_l = p_fragility(lcb, grid, tau, p);
                for (int i = 0; i < n && ok; ++i) {
                    const auto ui = static_cast<std::size_t>(i);
                    if (!(g_u.values[ui] <= g_t.values[ui] && g_t.values[ui] <= g_l.values[ui])) {
                        ok = false;
                        detail_msg = "p-fragility ordering broken at action " + std::to_string(i) +
                                     " (p=" + format_double(p) + ")";
                    }
                }
            }
        }
        detail::add_check(rep, "confidence-ordering", ok, detail_msg);
    }

    // --- tau monotonicity --------------------------------------------------------
    {
        const Eigen::VectorXd& v = truth.field.values;
        const double lo = v.minCoeff(), hi = v.maxCoeff();
        std::vector<double> ladder{lo - 1.0, lo + 0.25 * (hi - lo), lo + 0.5 * (hi - lo),
                                   lo + 0.75 * (hi - lo), hi};
        bool ok = true;
        std::string detail_msg;
        for (std::size_t s = 1; s < ladder.size() && ok; ++s) {
            const auto f_lo = p_fragility(truth.field, grid, ladder[s - 1], 2.0);
            const auto f_hi = p_fragility(truth.field, grid, ladder[s], 2.0);
            const auto r_lo = critical_radius(truth.field, grid, ladder[s - 1]);
            const auto r_hi = critical_radius(truth.field, grid, ladder[s]);
            for (int i = 0; i < n && ok; ++i) {
                const auto ui = static_cast<std::size_t>(i);
                if (f_hi.values[ui] < f_lo.values[ui]) {
                    ok = false;
                    detail_msg = "fragility decreased as tau rose, action " + std::to_string(i);
                }
                if (r_hi.values[ui] > r_lo.values[ui]) {
                    ok = false;
                    detail_msg = "critical radius increased as tau rose, action " +
                                 std::to_string(i);
                }
            }
        }
        detail::add_check(rep, "tau-monotonicity", ok, detail_msg);
    }

    // --- cone and radius guarantees on the truth ----------------------------------
    {
        bool ok = true;
        std::string detail_msg;
        const auto& dist = grid.dist_matrix();
        for (double tau : taus) {
            for (double p : ps) {
                const auto prof = p_fragility(truth.field, grid, tau, p);
                for (int a = 0; a < n && ok; ++a) {
                    const auto ua = static_cast<std::size_t>(a);
                    if (!prof.values[ua].is_finite()) continue;
                    const double kappa = prof.values[ua].as_double();
                    // defining-max form: every violator ratio is bounded by kappa, exactly
                    for (int j = 0; j < n; ++j) {
                        const double d = dist(a, j);
                        const double s = tau - truth.field.values(j);
                        if (!(d > 0.0) || !(s > 0.0)) continue;
                        const double r = (p == 1.0 ? s : std::pow(s, 1.0 / p)) / d;
                        if (r > kappa) {
                            ok = false;
                            detail_msg = "cone guarantee broken at anchor " + std::to_string(a) +
                                         ", action " + std::to_string(j) +
                                         " (p=" + format_double(p) + ")";
                            break;
                        }
                    }
                }
            }
            const auto rad = critical_radius(truth.field, grid, tau);
            for (int a = 0; a < n && ok; ++a) {
                const auto& val = rad.values[static_cast<std::size_t>(a)];
                if (!val.is_finite()) continue;
                const double radius = val.as_double();
                for (int j = 0; j < n; ++j) {
                    if (dist(a, j) <= radius && truth.field.values(j) < tau) {
                        ok = false;
                        detail_msg = "radius guarantee broken at anchor " + std::to_string(a) +
                                     ", action " + std::to_string(j);
                        break;
                    }
                }
            }
        }
        detail::add_check(rep, "cone-and-radius-guarantees", ok, detail_msg);
    }

    // --- beta monotonicity over a simulated run -------------------------------------
    {
        bool ok = true;
        std::string detail_msg;
        if (config.beta.mode == BetaSchedule::Mode::Theoretical) {
            RngStream rng(config.seed, 4, StreamRole::Truth);
            GpPosterior post = GpPosterior::prior(config.kernel, config.lambda);
            double prev = beta_value(config.beta, post, config.lambda);
            const int steps = std::min(30, 3 * n);
            for (int s = 0; s < steps; ++s) {
                const int i = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(n)));
                post.append(grid.point(i), truth.field.values(i) + config.noise_std * rng.normal());
                const double cur = beta_value(config.beta, post, config.lambda);
                if (cur < prev - 1e-12 * std::abs(prev)) {
                    ok = false;
                    detail_msg = "beta decreased at step " + std::to_string(s + 1);
                    break;
                }
                prev = cur;
            }
        }
        detail::add_check(rep, "beta-monotonicity", ok, detail_msg);
    }

    // --- posterior agrees with a dense solve -------------------------------------------
    {
        bool ok = true;
        std::string detail_msg;
        RngStream rng(config.seed, 5, StreamRole::Truth);
        const int t = std::min(12, n);
        Eigen::MatrixXd inputs(t, grid.dim());
        Eigen::VectorXd targets(t);
        for (int i = 0; i < t; ++i) {
            const int g = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(n)));
            inputs.row(i) = grid.point(g).transpose();
            targets(i) = truth.field.values(g) + config.noise_std * rng.normal();
        }
        const GpPosterior post = GpPosterior::fit(config.kernel, inputs, targets, config.lambda);
        Eigen::MatrixXd k = gram(config.kernel, inputs);
        k.diagonal().array() += config.lambda + post.jitter();
        const Eigen::LDLT<Eigen::MatrixXd> dense(k);
        for (int s = 0; s < std::min(20, n) && ok; ++s) {
            const int g = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(n)));
            Eigen::VectorXd kvec(t);
            for (int i = 0; i < t; ++i) {
                kvec(i) = eval_kernel(config.kernel, inputs.row(i).transpose(), grid.point(g));
            }
            const double mean_dense = kvec.dot(dense.solve(targets));
            const double var_dense =
                eval_kernel(config.kernel, grid.point(g), grid.point(g)) -
                kvec.dot(dense.solve(kvec));
            const auto pred = post.predict(grid.point(g));
            if (std::abs(pred.mean - mean_dense) > 1e-8 ||
                std::abs(pred.var - std::max(0.0, var_dense)) > 1e-8) {
                ok = false;
                detail_msg = "posterior disagrees with dense solve at action " + std::to_string(g);
            }
        }
        detail::add_check(rep, "posterior-dense-equivalence", ok, detail_msg);
    }

    // --- information gain sanity ----------------------------------------------------------
    {
        bool ok = true;
        std::string detail_msg;
        RngStream rng(config.seed, 6, StreamRole::Truth);
        GpPosterior post = GpPosterior::prior(config.kernel, config.lambda);
        if (post.realized_information_gain() != 0.0) {
            ok = false;
            detail_msg = "nonzero information gain before any observation";
        }
        double prev = 0.0;
        for (int s = 0; s < std::min(20, 2 * n) && ok; ++s) {
            const int i = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(n)));
            post.append(grid.point(i), truth.field.values(i) + config.noise_std * rng.normal());
            const double ig = post.realized_information_gain();
            if (!(ig >= prev - 1e-9)) {
                ok = false;
                detail_msg = "information gain decreased at step " + std::to_string(s + 1);
            }
            prev = ig;
        }
        detail::add_check(rep, "information-gain-monotone", ok, detail_msg);
    }

    return rep;
}

}  // namespace rsopt
