#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rsopt/adversary.hpp"
#include "rsopt/config.hpp"
#include "rsopt/extended_real.hpp"
#include "rsopt/geometry.hpp"
#include "rsopt/gp.hpp"
#include "rsopt/kernels.hpp"
#include "rsopt/oracle.hpp"
#include "rsopt/policies.hpp"
#include "rsopt/regret.hpp"
#include "rsopt/rng.hpp"
#include "rsopt/satisficing.hpp"

namespace rsopt {

// ---------------------------------------------------------------------------
// ground-truth instances
// ---------------------------------------------------------------------------

struct TruthInstance {
    ValueField field;
    std::string provenance;
};

namespace detail {

inline double closed_form_param(const json& params, const char* key, double fallback) {
    if (!params.contains(key)) return fallback;
    if (!params.at(key).is_number()) {
        throw ConfigError(std::string("truth.params.") + key + " must be a number");
    }
    return params.at(key).get<double>();
}

inline Eigen::VectorXd closed_form_center(const json& params, const char* key, double fallback,
                                          int dim) {
    Eigen::VectorXd c = Eigen::VectorXd::Constant(dim, fallback);
    if (!params.contains(key)) return c;
    const auto& v = params.at(key);
    if (v.is_number()) {
        c.setConstant(v.get<double>());
    } else if (v.is_array() && v.size() == static_cast<std::size_t>(dim)) {
        for (int d = 0; d < dim; ++d) c(d) = v.at(static_cast<std::size_t>(d)).get<double>();
    } else {
        throw ConfigError(std::string("truth.params.") + key +
                          " must be a number or a list matching the dimension");
    }
    return c;
}

}  // namespace detail

/// Materializes the ground-truth field on the grid. Closed forms:
///  - "linear":    f(x) = sum of coordinates
///  - "two_arm":   the two-action instance (0, 1); requires exactly two actions
///  - "two_bumps": surrogate landscape summing a flat wide Gaussian bump and a
///                 tall narrow one (params c1,w1,h1,c2,w2,h2)
///  - "plateau":   inside/outside step on the first coordinate (lo,hi,inside,outside)
inline TruthInstance make_truth(const TruthSpec& spec, const ActionGrid& grid,
                                const KernelSpec& kernel) {
    const int n = grid.size();
    TruthInstance out;
    out.field.kind = ValueField::Kind::Truth;
    switch (spec.source) {
        case TruthSpec::Source::PriorSample: {
            RngStream rng(spec.seed, 0, StreamRole::Truth);
            out.field.values = sample_posterior(GpPosterior::prior(kernel, 1.0), grid, rng);
            out.provenance = "prior_sample(seed=" + std::to_string(spec.seed) + ")";
            return out;
        }
        case TruthSpec::Source::CsvTable: {
            const auto rows = io::read_numeric_csv(spec.path);
            if (rows.size() != static_cast<std::size_t>(n)) {
                throw ConfigError("truth csv row count does not match the grid");
            }
            out.field.values.resize(n);
            for (int i = 0; i < n; ++i) {
                if (rows[static_cast<std::size_t>(i)].size() != 1) {
                    throw ConfigError("truth csv must have exactly one value column");
                }
                out.field.values(i) = rows[static_cast<std::size_t>(i)][0];
            }
            out.provenance = "csv_table(" + spec.path + ")";
            return out;
        }
        case TruthSpec::Source::ClosedForm: break;
    }

    out.field.values.resize(n);
    if (spec.name == "linear") {
        detail::reject_unknown_keys(spec.params, "truth.params", {});
        for (int i = 0; i < n; ++i) out.field.values(i) = grid.point(i).sum();
        out.provenance = "closed_form(linear)";
    } else if (spec.name == "two_arm") {
        detail::reject_unknown_keys(spec.params, "truth.params", {});
        if (n != 2) throw ConfigError("two_arm truth requires exactly two actions");
        out.field.values << 0.0, 1.0;
        out.provenance = "closed_form(two_arm)";
    } else if (spec.name == "two_bumps") {
        detail::reject_unknown_keys(spec.params, "truth.params",
                                    {"c1", "w1", "h1", "c2", "w2", "h2"});
        const Eigen::VectorXd c1 = detail::closed_form_center(spec.params, "c1", 1.5, grid.dim());
        const Eigen::VectorXd c2 = detail::closed_form_center(spec.params, "c2", 3.8, grid.dim());
        const double w1 = detail::closed_form_param(spec.params, "w1", 0.8);
        const double h1 = detail::closed_form_param(spec.params, "h1", 2.0);
        const double w2 = detail::closed_form_param(spec.params, "w2", 0.15);
        const double h2 = detail::closed_form_param(spec.params, "h2", 8.0);
        if (!(w1 > 0.0) || !(w2 > 0.0)) throw ConfigError("two_bumps widths must be positive");
        for (int i = 0; i < n; ++i) {
            const Eigen::VectorXd x = grid.point(i);
            out.field.values(i) = h1 * std::exp(-(x - c1).squaredNorm() / (2.0 * w1 * w1)) +
                                  h2 * std::exp(-(x - c2).squaredNorm() / (2.0 * w2 * w2));
        }
        out.provenance = "closed_form(two_bumps) [surrogate]";
    } else if (spec.name == "plateau") {
        detail::reject_unknown_keys(spec.params, "truth.params", {"lo", "hi", "inside", "outside"});
        const double lo = detail::closed_form_param(spec.params, "lo", 0.25);
        const double hi = detail::closed_form_param(spec.params, "hi", 0.75);
        const double inside = detail::closed_form_param(spec.params, "inside", 1.0);
        const double outside = detail::closed_form_param(spec.params, "outside", 0.0);
        for (int i = 0; i < n; ++i) {
            const double x0 = grid.point(i)(0);
            out.field.values(i) = (x0 >= lo && x0 <= hi) ? inside : outside;
        }
        out.provenance = "closed_form(plateau)";
    } else {
        throw ConfigError("unknown closed-form truth: " + spec.name);
    }
    return out;
}

// ---------------------------------------------------------------------------
// one episode
// ---------------------------------------------------------------------------

/// What happened in one round, as stored in trace CSVs.
struct RoundRecord {
    int t = 0;        // 1-based
    int x_tilde = 0;  // requested action
    int x_played = 0; // action actually evaluated
    double eps = 0.0; // budget recorded for the round
    double delta_mag = 0.0;
    double y = 0.0;
    double f_played = 0.0;
    double tau = 0.0;  // threshold in force
    bool fallback = false;
    CertificateKind certificate_kind = CertificateKind::None;
    ExtendedReal certificate;
    int certificate_anchor = -1;
};

struct EpisodeTrace {
    int replication = 0;
    std::vector<RoundRecord> rounds;
    std::vector<double> info_gain;  // realized information gain after each round
};

struct EpisodeSetup {
    const ActionGrid* grid = nullptr;
    const ValueField* truth = nullptr;
    KernelSpec kernel;
    double lambda = 1.0;
    BetaSchedule beta;
    double noise_std = 0.0;
    ExperimentCell cell;
    AttackSpec attack;
    int horizon = 1;
    std::uint64_t master_seed = 0;
};

namespace detail {

/// Re-derives the certificate guarantee from the recorded scalar, using the
/// same arithmetic expressions the profiles used, so the comparison is exact.
inline void assert_certificate(const SelectionRecord& sel, const ConfidenceField& cf,
                               const ActionGrid& grid, double p) {
    if (sel.certificate_anchor < 0) return;
    const int a = sel.certificate_anchor;
    const auto& dist = grid.dist_matrix();
    if (sel.certificate_kind == CertificateKind::PessimisticFragility) {
        if (!sel.certificate.is_finite()) return;  // vacuous
        const double kappa = sel.certificate.as_double();
        if (cf.lcb(a) < sel.tau) {
            throw std::logic_error("certificate anchor is itself infeasible");
        }
        const double inv_p = 1.0 / p;
        for (int j = 0; j < grid.size(); ++j) {
            const double d = dist(a, j);
            const double s = sel.tau - cf.lcb(j);
            if (!(d > 0.0) || !(s > 0.0)) continue;
            const double r = (p == 1.0 ? s : std::pow(s, inv_p)) / d;
            if (r > kappa) {
                throw std::logic_error("fragility certificate violated at action " +
                                       std::to_string(j));
            }
        }
    } else if (sel.certificate_kind == CertificateKind::PessimisticRadius) {
        if (!sel.certificate.is_finite()) return;  // -inf: nothing guaranteed
        const double radius = sel.certificate.as_double();
        for (int j = 0; j < grid.size(); ++j) {
            if (dist(a, j) <= radius && cf.lcb(j) < sel.tau) {
                throw std::logic_error("radius certificate violated at action " +
                                       std::to_string(j));
            }
        }
    }
}

}  // namespace detail

/// Plays one full episode: posterior update, threshold, selection, attack,
/// observation. Everything consumed from the three per-replication streams is
/// a pure function of (master seed, replication, role).
inline EpisodeTrace run_episode(const EpisodeSetup& s, int replication) {
    if (s.grid == nullptr || s.truth == nullptr) {
        throw std::invalid_argument("run_episode: grid and truth are required");
    }
    const ActionGrid& grid = *s.grid;
    const ValueField& truth = *s.truth;
    if (truth.values.size() != grid.size()) {
        throw std::invalid_argument("run_episode: truth does not match grid");
    }

    RngStream noise_rng(s.master_seed, static_cast<std::uint64_t>(replication), StreamRole::Noise);
    RngStream adv_rng(s.master_seed, static_cast<std::uint64_t>(replication),
                      StreamRole::Adversary);
    RngStream policy_rng(s.master_seed, static_cast<std::uint64_t>(replication),
                         StreamRole::Policy);

    GpPosterior post = GpPosterior::prior(s.kernel, s.lambda);
    EpisodeTrace trace;
    trace.replication = replication;
    trace.rounds.reserve(static_cast<std::size_t>(s.horizon));
    trace.info_gain.reserve(static_cast<std::size_t>(s.horizon));

    for (int t = 1; t <= s.horizon; ++t) {
        const double beta = beta_value(s.beta, post, s.lambda);
        const ConfidenceField cf = confidence_field(post, grid, beta);
        const double tau = s.cell.tau_mode == TauSpec::Mode::Dynamic
                               ? dynamic_tau(cf, s.cell.tau_margin)
                               : *s.cell.tau_value;

        SelectionRecord sel;
        switch (s.cell.policy.kind) {
            case PolicySpec::Kind::Rs1: sel = select_rs1(cf, grid, tau); break;
            case PolicySpec::Kind::Rs2: sel = select_rs2(cf, grid, tau); break;
            case PolicySpec::Kind::Rsg: sel = select_rsg(cf, grid, tau, s.cell.policy.p); break;
            case PolicySpec::Kind::RsgTs:
                sel = select_rsg_ts(post, grid, tau, s.cell.policy.p, policy_rng);
                break;
            case PolicySpec::Kind::StableOpt:
                sel = select_stable_opt(cf, grid, *s.cell.policy.r);
                sel.tau = tau;
                break;
            case PolicySpec::Kind::GpUcb:
                sel = select_gp_ucb(cf);
                sel.tau = tau;
                break;
        }

        const double frag_p =
            s.cell.policy.kind == PolicySpec::Kind::Rsg || s.cell.policy.kind == PolicySpec::Kind::RsgTs
                ? s.cell.policy.p
                : 1.0;
        detail::assert_certificate(sel, cf, grid, frag_p);

        const Perturbation pert =
            perturb(s.attack, t, sel.chosen, grid, &truth, &cf, adv_rng);
        if (s.attack.budgeted() && grid.dist(sel.chosen, pert.x_played) > pert.eps) {
            throw std::logic_error("attack exceeded its budget");
        }

        const double f = truth.values(pert.x_played);
        const double y = f + s.noise_std * noise_rng.normal();
        post.append(grid.point(pert.x_played), y);

        RoundRecord r;
        r.t = t;
        r.x_tilde = sel.chosen;
        r.x_played = pert.x_played;
        r.eps = pert.eps;
        r.delta_mag = pert.magnitude;
        r.y = y;
        r.f_played = f;
        r.tau = tau;
        r.fallback = sel.fallback;
        r.certificate_kind = sel.certificate_kind;
        r.certificate = sel.certificate;
        r.certificate_anchor = sel.certificate_anchor;
        trace.rounds.push_back(r);
        trace.info_gain.push_back(post.realized_information_gain());
    }
    return trace;
}

// ---------------------------------------------------------------------------
// regret ledger
// ---------------------------------------------------------------------------

/// Regret summary of one trace. RS-relative metrics exist only when the cell
/// has a (finite, feasible) benchmark threshold; otherwise they are marked
/// unavailable rather than faked.
struct RegretLedger {
    std::vector<double> lenient;
    std::vector<double> rs;
    std::vector<double> rsg;
    bool rs_available = false;
    bool rsg_available = false;
    double p = 1.0;
    ExtendedReal kappa1 = ExtendedReal::pos_inf();   // benchmark fragility, p = 1
    ExtendedReal kappa_p = ExtendedReal::pos_inf();  // benchmark generalized fragility
    ExtendedReal eps_tau = ExtendedReal::neg_inf();  // benchmark critical radius
};

inline RegretLedger build_ledger(const EpisodeTrace& trace, const std::optional<RsBenchmark>& b1,
                                 const std::optional<RsBenchmark>& bp, double p) {
    RegretLedger led;
    led.p = p;
    const std::size_t n = trace.rounds.size();
    std::vector<double> f(n), eps(n), tau_rounds(n);
    for (std::size_t i = 0; i < n; ++i) {
        f[i] = trace.rounds[i].f_played;
        eps[i] = trace.rounds[i].eps;
        tau_rounds[i] = trace.rounds[i].tau;
    }
    led.lenient = lenient_regret(f, tau_rounds);
    if (b1) {
        led.kappa1 = b1->kappa;
        led.eps_tau = b1->eps;
        if (b1->feasible && b1->kappa.is_finite()) {
            // benchmark-relative regrets are anchored at the benchmark's own tau
            const std::vector<double> tau_fixed(n, b1->tau);
            led.rs = rs_regret(f, eps, tau_fixed, b1->kappa);
            led.rs_available = true;
        }
    }
    if (bp) {
        led.kappa_p = bp->kappa;
        if (bp->feasible && bp->kappa.is_finite()) {
            const std::vector<double> tau_fixed(n, bp->tau);
            led.rsg = rsg_regret(f, eps, tau_fixed, bp->kappa, p);
            led.rsg_available = true;
        }
    }
    return led;
}

// ---------------------------------------------------------------------------
// full experiment
// ---------------------------------------------------------------------------

struct CellResult {
    ExperimentCell cell;
    std::optional<RsBenchmark> bench1;  // p = 1 benchmark at the cell's metric tau
    std::optional<RsBenchmark> benchp;  // benchmark at the cell's fragility exponent
    bool assumption_feasible = false;   // tau attainable on this instance
    bool assumption_budget = false;     // attack budget within the critical radius
    std::vector<EpisodeTrace> traces;   // slot per replication (empty rounds on failure)
    std::vector<RegretLedger> ledgers;
    std::vector<std::string> failures;  // per replication; empty string = ok
    int completed = 0;

    bool rs_available = false;
    bool rsg_available = false;
    std::vector<double> lenient_mean, lenient_halfstd;
    std::vector<double> rs_mean, rs_halfstd;
    std::vector<double> rsg_mean, rsg_halfstd;
};

struct ExperimentResult {
    ExperimentConfig config;
    std::string fingerprint;
    std::string truth_provenance;
    std::shared_ptr<const ActionGrid> grid;
    ValueField truth;
    std::vector<ExperimentCell> cells;
    std::vector<CellResult> results;
};

namespace detail {

/// Mean and half sample standard deviation per round across completed
/// replications, reduced in replication order (thread-count independent).
inline void aggregate_curves(const std::vector<std::vector<double>>& curves, int horizon,
                             std::vector<double>& mean, std::vector<double>& halfstd) {
    mean.assign(static_cast<std::size_t>(horizon), 0.0);
    halfstd.assign(static_cast<std::size_t>(horizon), 0.0);
    const std::size_t n = curves.size();
    if (n == 0) return;
    for (int t = 0; t < horizon; ++t) {
        double sum = 0.0;
        for (const auto& c : curves) sum += c[static_cast<std::size_t>(t)];
        const double m = sum / static_cast<double>(n);
        mean[static_cast<std::size_t>(t)] = m;
        if (n > 1) {
            double ss = 0.0;
            for (const auto& c : curves) {
                const double d = c[static_cast<std::size_t>(t)] - m;
                ss += d * d;
            }
            halfstd[static_cast<std::size_t>(t)] =
                0.5 * std::sqrt(ss / static_cast<double>(n - 1));
        }
    }
}

}  // namespace detail

/// Runs every (cell, replication) pair. Work is distributed over `jobs`
/// threads (0 = hardware concurrency), but results land in preallocated slots
/// and are reduced in replication order afterwards, so the outputs are
/// identical whatever the thread count. A NumericError in one replication is
/// recorded for its cell and never aborts the sweep.
inline ExperimentResult run_experiment(const ExperimentConfig& config, int jobs_override = -1) {
    ExperimentResult result;
    result.config = config;
    result.fingerprint = config.fingerprint();

    GridMetric metric = config.metric == MetricKind::Euclidean
                            ? GridMetric::euclidean()
                            : GridMetric::kernel_induced(config.kernel);
    result.grid = std::make_shared<const ActionGrid>(
        config.points_csv
            ? ActionGrid::from_csv(*config.points_csv, std::move(metric), config.max_points)
            : ActionGrid::lattice(config.bounds, config.resolution, std::move(metric),
                                  config.max_points));
    const ActionGrid& grid = *result.grid;
    TruthInstance truth = make_truth(config.truth, grid, config.kernel);
    result.truth_provenance = truth.provenance;
    result.truth = std::move(truth.field);

    result.cells = expand_cells(config);
    const int reps = config.replications;
    result.results.resize(result.cells.size());

    for (std::size_t c = 0; c < result.cells.size(); ++c) {
        auto& cr = result.results[c];
        cr.cell = result.cells[c];
        if (cr.cell.tau_value) {
            const double tau = *cr.cell.tau_value;
            const double p = cr.cell.policy.kind == PolicySpec::Kind::Rsg ||
                                     cr.cell.policy.kind == PolicySpec::Kind::RsgTs
                                 ? cr.cell.policy.p
                                 : 1.0;
            cr.bench1 = rs_benchmark(result.truth, grid, tau, 1.0);
            cr.benchp = p == 1.0 ? cr.bench1 : rs_benchmark(result.truth, grid, tau, p);
            cr.assumption_feasible = cr.bench1->feasible;
            cr.assumption_budget = budget_within(config.attack, config.horizon, cr.bench1->eps);
        }
        cr.traces.resize(static_cast<std::size_t>(reps));
        cr.ledgers.resize(static_cast<std::size_t>(reps));
        cr.failures.assign(static_cast<std::size_t>(reps), std::string());
    }

    // flat job list over (cell, replication)
    struct Job {
        std::size_t cell;
        int rep;
    };
    std::vector<Job> jobs;
    jobs.reserve(result.cells.size() * static_cast<std::size_t>(reps));
    for (std::size_t c = 0; c < result.cells.size(); ++c) {
        for (int r = 0; r < reps; ++r) jobs.push_back({c, r});
    }

    int nthreads = jobs_override >= 0 ? jobs_override : config.jobs;
    if (nthreads == 0) {
        nthreads = static_cast<int>(std::thread::hardware_concurrency());
        if (nthreads < 1) nthreads = 1;
    }
    nthreads = std::min<int>(nthreads, static_cast<int>(jobs.size()));
    nthreads = std::max(nthreads, 1);

    std::atomic<std::size_t> next{0};
    std::mutex fatal_mutex;
    std::string fatal;

    auto worker = [&]() {
        for (;;) {
            const std::size_t j = next.fetch_add(1);
            if (j >= jobs.size()) return;
            const Job job = jobs[j];
            auto& cr = result.results[job.cell];
            EpisodeSetup setup;
            setup.grid = &grid;
            setup.truth = &result.truth;
            setup.kernel = config.kernel;
            setup.lambda = config.lambda;
            setup.beta = config.beta;
            setup.noise_std = config.noise_std;
            setup.cell = cr.cell;
            setup.attack = config.attack;
            setup.horizon = config.horizon;
            setup.master_seed = config.seed;
            try {
                cr.traces[static_cast<std::size_t>(job.rep)] = run_episode(setup, job.rep);
            } catch (const NumericError& e) {
                cr.failures[static_cast<std::size_t>(job.rep)] = e.what();
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(fatal_mutex);
                if (fatal.empty()) fatal = e.what();
                return;
            }
        }
    };

    if (nthreads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(nthreads));
        for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (!fatal.empty()) throw std::runtime_error("experiment worker failed: " + fatal);

    // sequential reduction in replication order
    for (auto& cr : result.results) {
        const double p = cr.cell.policy.kind == PolicySpec::Kind::Rsg ||
                                 cr.cell.policy.kind == PolicySpec::Kind::RsgTs
                             ? cr.cell.policy.p
                             : 1.0;
        std::vector<std::vector<double>> lenient, rs, rsg;
        for (int r = 0; r < reps; ++r) {
            if (!cr.failures[static_cast<std::size_t>(r)].empty()) continue;
            auto& trace = cr.traces[static_cast<std::size_t>(r)];
            auto& led = cr.ledgers[static_cast<std::size_t>(r)];
            led = build_ledger(trace, cr.bench1, cr.benchp, p);
            ++cr.completed;
            lenient.push_back(led.lenient);
            if (led.rs_available) rs.push_back(led.rs);
            if (led.rsg_available) rsg.push_back(led.rsg);
        }
        cr.rs_available = !rs.empty() && rs.size() == lenient.size();
        cr.rsg_available = !rsg.empty() && rsg.size() == lenient.size();
        detail::aggregate_curves(lenient, config.horizon, cr.lenient_mean, cr.lenient_halfstd);
        if (cr.rs_available) {
            detail::aggregate_curves(rs, config.horizon, cr.rs_mean, cr.rs_halfstd);
        }
        if (cr.rsg_available) {
            detail::aggregate_curves(rsg, config.horizon, cr.rsg_mean, cr.rsg_halfstd);
        }
    }
    return result;
}

}  // namespace rsopt
