#pragma once

#include <algorithm>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rsopt/bench.hpp"
#include "rsopt/common.hpp"
#include "rsopt/config.hpp"
#include "rsopt/io.hpp"
#include "rsopt/regret.hpp"

namespace rsopt {

inline std::string policy_kind_name(PolicySpec::Kind k) {
    switch (k) {
        case PolicySpec::Kind::Rs1: return "rs1";
        case PolicySpec::Kind::Rs2: return "rs2";
        case PolicySpec::Kind::Rsg: return "rsg";
        case PolicySpec::Kind::RsgTs: return "rsg_ts";
        case PolicySpec::Kind::StableOpt: return "stable_opt";
        case PolicySpec::Kind::GpUcb: return "gp_ucb";
    }
    return "?";
}

inline std::string attack_label(const AttackSpec& a) {
    switch (a.kind) {
        case AttackSpec::Kind::None: return "none";
        case AttackSpec::Kind::GaussianNoise:
            return "gaussian_noise(sigma=" + format_double(a.sigma) + ")";
        case AttackSpec::Kind::Random:
        case AttackSpec::Kind::Lcb:
        case AttackSpec::Kind::WorstCase: break;
    }
    std::string kind = a.kind == AttackSpec::Kind::Random ? "random"
                       : a.kind == AttackSpec::Kind::Lcb  ? "lcb"
                                                          : "worst_case";
    if (a.budget.mode == BudgetSchedule::Mode::Constant) {
        return kind + "(eps=" + format_double(a.budget.value) + ")";
    }
    return kind + "(eps=seq[" + std::to_string(a.budget.sequence.size()) + "])";
}

namespace detail {
inline std::string pad3(int v) {
    std::string s = std::to_string(v);
    while (s.size() < 3) s.insert(s.begin(), '0');
    return s;
}
}  // namespace detail

/// One trace CSV: fixed column order, shortest round-trip number formatting,
/// "inf"/"-inf" literals, empty cells where a quantity is unavailable.
inline std::string trace_csv(const EpisodeTrace& trace, const RegretLedger& ledger) {
    std::ostringstream out;
    out << "t,x_tilde,x_t,eps_t,delta_mag,y_t,f_x_t,lenient_cum,rs_cum,rsg_cum,certificate,"
           "fallback_flag\n";
    for (std::size_t i = 0; i < trace.rounds.size(); ++i) {
        const RoundRecord& r = trace.rounds[i];
        out << r.t << ',' << r.x_tilde << ',' << r.x_played << ',' << format_double(r.eps) << ','
            << format_double(r.delta_mag) << ',' << format_double(r.y) << ','
            << format_double(r.f_played) << ',' << format_double(ledger.lenient[i]) << ',';
        if (ledger.rs_available) out << format_double(ledger.rs[i]);
        out << ',';
        if (ledger.rsg_available) out << format_double(ledger.rsg[i]);
        out << ',';
        if (r.certificate_kind != CertificateKind::None) out << r.certificate.to_string();
        out << ',' << (r.fallback ? 1 : 0) << '\n';
    }
    return out.str();
}

/// The aggregate CSV: one row per cell and round with mean and half-std
/// bands. rs/rsg columns are empty when that regret is unavailable for the
/// cell (infeasible tau or dynamic tau without an anchor value).
inline std::string aggregate_csv(const ExperimentResult& result) {
    std::ostringstream out;
    out << "policy,attack,tau,r,p,reps,failures,round,lenient_mean,lenient_halfstd,rs_mean,"
           "rs_halfstd,rsg_mean,rsg_halfstd\n";
    const std::string attack = attack_label(result.config.attack);
    for (const auto& cr : result.results) {
        const auto& cell = cr.cell;
        const bool has_p = cell.policy.kind == PolicySpec::Kind::Rsg ||
                           cell.policy.kind == PolicySpec::Kind::RsgTs;
        const int failures = result.config.replications - cr.completed;
        for (int t = 0; t < result.config.horizon; ++t) {
            out << policy_kind_name(cell.policy.kind) << ',' << attack << ',' << cell.tau_label()
                << ',';
            if (cell.policy.r) out << format_double(*cell.policy.r);
            out << ',';
            if (has_p) out << format_double(cell.policy.p);
            out << ',' << cr.completed << ',' << failures << ',' << (t + 1) << ','
                << format_double(cr.lenient_mean[static_cast<std::size_t>(t)]) << ','
                << format_double(cr.lenient_halfstd[static_cast<std::size_t>(t)]) << ',';
            if (cr.rs_available) {
                out << format_double(cr.rs_mean[static_cast<std::size_t>(t)]) << ','
                    << format_double(cr.rs_halfstd[static_cast<std::size_t>(t)]);
            } else {
                out << ',';
            }
            out << ',';
            if (cr.rsg_available) {
                out << format_double(cr.rsg_mean[static_cast<std::size_t>(t)]) << ','
                    << format_double(cr.rsg_halfstd[static_cast<std::size_t>(t)]);
            } else {
                out << ',';
            }
            out << '\n';
        }
    }
    return out.str();
}

/// Deterministic run manifest: resolved config, fingerprint, seeds, library
/// version, and per-cell benchmark constants and health flags. Contains no
/// timestamps, so reruns are byte-identical.
inline json manifest_json(const ExperimentResult& result) {
    json m;
    m["version"] = kVersion;
    m["fingerprint"] = result.fingerprint;
    m["master_seed"] = result.config.seed;
    m["replications"] = result.config.replications;
    m["horizon"] = result.config.horizon;
    m["truth_provenance"] = result.truth_provenance;
    m["attack"] = attack_label(result.config.attack);
    m["config"] = result.config.to_json();
    json cells = json::array();
    for (std::size_t c = 0; c < result.results.size(); ++c) {
        const auto& cr = result.results[c];
        json jc;
        jc["index"] = c;
        jc["label"] = cr.cell.label();
        jc["policy"] = policy_kind_name(cr.cell.policy.kind);
        jc["tau"] = cr.cell.tau_label();
        if (cr.cell.policy.r) jc["r"] = *cr.cell.policy.r;
        if (cr.cell.policy.kind == PolicySpec::Kind::Rsg ||
            cr.cell.policy.kind == PolicySpec::Kind::RsgTs) {
            jc["p"] = cr.cell.policy.p;
        }
        jc["assumption_feasible"] = cr.assumption_feasible;
        jc["assumption_budget"] = cr.assumption_budget;
        jc["rs_available"] = cr.rs_available;
        jc["rsg_available"] = cr.rsg_available;
        jc["completed"] = cr.completed;
        json fails = json::array();
        for (int r = 0; r < result.config.replications; ++r) {
            if (!cr.failures[static_cast<std::size_t>(r)].empty()) {
                fails.push_back({{"replication", r},
                                 {"error", cr.failures[static_cast<std::size_t>(r)]}});
            }
        }
        jc["failures"] = std::move(fails);
        if (cr.bench1) {
            jc["benchmark"] = {{"kappa", cr.bench1->kappa.to_string()},
                               {"kappa_index", cr.bench1->kappa_index},
                               {"eps", cr.bench1->eps.to_string()},
                               {"eps_index", cr.bench1->eps_index},
                               {"kappa_p", cr.benchp->kappa.to_string()},
                               {"kappa_p_index", cr.benchp->kappa_index}};
        }
        cells.push_back(std::move(jc));
    }
    m["cells"] = std::move(cells);
    return m;
}

/// Most frequently evaluated action across a cell's completed traces
/// (smallest index on ties); -1 when nothing completed.
inline int most_played_action(const CellResult& cr, int grid_size) {
    std::vector<int> counts(static_cast<std::size_t>(grid_size), 0);
    bool any = false;
    for (std::size_t r = 0; r < cr.traces.size(); ++r) {
        if (!cr.failures[r].empty()) continue;
        for (const auto& round : cr.traces[r].rounds) {
            ++counts[static_cast<std::size_t>(round.x_played)];
            any = true;
        }
    }
    if (!any) return -1;
    int best = 0;
    for (int i = 1; i < grid_size; ++i) {
        if (counts[static_cast<std::size_t>(i)] > counts[static_cast<std::size_t>(best)]) best = i;
    }
    return best;
}

/// Robustness-area curves per cell: the benchmark radius action, the action
/// the policy actually settled on, and the plain truth argmax, all evaluated
/// against the cell's threshold. Cells without a metric threshold are skipped.
inline std::string area_csv(const ExperimentResult& result) {
    std::ostringstream out;
    out << "cell,policy,tau,series,eps,shortfall,area\n";
    const ActionGrid& grid = *result.grid;
    const auto knots = uniform_knots(grid, result.config.area_knots);
    for (std::size_t c = 0; c < result.results.size(); ++c) {
        const auto& cr = result.results[c];
        if (!cr.cell.tau_value || !cr.bench1) continue;
        const double tau = *cr.cell.tau_value;
        struct Series {
            const char* name;
            int action;
        };
        const int truth_argmax = detail::argmax_vec(result.truth.values);
        const Series series[] = {
            {"benchmark_rs2", cr.bench1->eps.is_finite() ? static_cast<int>(cr.bench1->eps_index)
                                                          : -1},
            {"most_played", most_played_action(cr, grid.size())},
            {"truth_argmax", truth_argmax},
        };
        for (const auto& s : series) {
            if (s.action < 0) continue;
            const AreaCurve curve = area_metric(result.truth, grid, s.action, tau, knots);
            for (std::size_t k = 0; k < curve.eps.size(); ++k) {
                out << c << ',' << policy_kind_name(cr.cell.policy.kind) << ','
                    << cr.cell.tau_label() << ',' << s.name << ',' << format_double(curve.eps[k])
                    << ',' << format_double(curve.shortfall[k]) << ','
                    << format_double(curve.area[k]) << '\n';
            }
        }
    }
    return out.str();
}

/// Final-round mean lenient regret as an algorithms x thresholds matrix
/// (fixed-tau cells only).
inline std::string sweep_matrix_csv(const ExperimentResult& result) {
    std::vector<double> taus;
    std::vector<std::string> labels;
    std::map<std::pair<std::string, double>, double> value;
    for (const auto& cr : result.results) {
        if (cr.cell.tau_mode != TauSpec::Mode::Fixed) continue;
        const double tau = *cr.cell.tau_value;
        const std::string label = cr.cell.policy.label();
        if (std::find(taus.begin(), taus.end(), tau) == taus.end()) taus.push_back(tau);
        if (std::find(labels.begin(), labels.end(), label) == labels.end()) labels.push_back(label);
        value[{label, tau}] = cr.lenient_mean.empty() ? 0.0 : cr.lenient_mean.back();
    }
    std::ostringstream out;
    out << "algorithm";
    for (double t : taus) out << ",tau=" << format_double(t);
    out << '\n';
    for (const auto& label : labels) {
        out << label;
        for (double t : taus) {
            out << ',';
            const auto it = value.find({label, t});
            if (it != value.end()) out << format_double(it->second);
        }
        out << '\n';
    }
    return out.str();
}

/// Writes the full output tree of a run: manifest.json, aggregate.csv, one
/// trace CSV per (cell, replication), and area.csv when enabled.
inline void write_run_outputs(const ExperimentResult& result, const std::string& out_dir,
                              bool sweep_matrix = false) {
    io::write_text_file(out_dir + "/manifest.json", manifest_json(result).dump(2) + "\n");
    io::write_text_file(out_dir + "/aggregate.csv", aggregate_csv(result));
    for (std::size_t c = 0; c < result.results.size(); ++c) {
        const auto& cr = result.results[c];
        for (int r = 0; r < result.config.replications; ++r) {
            if (!cr.failures[static_cast<std::size_t>(r)].empty()) continue;
            const std::string path = out_dir + "/traces/cell-" +
                                     detail::pad3(static_cast<int>(c)) + "-rep-" +
                                     detail::pad3(r) + ".csv";
            io::write_text_file(path, trace_csv(cr.traces[static_cast<std::size_t>(r)],
                                                cr.ledgers[static_cast<std::size_t>(r)]));
        }
    }
    if (result.config.area_enabled) {
        io::write_text_file(out_dir + "/area.csv", area_csv(result));
    }
    if (sweep_matrix) {
        io::write_text_file(out_dir + "/sweep_matrix.csv", sweep_matrix_csv(result));
    }
}

}  // namespace rsopt
