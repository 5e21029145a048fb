#pragma once

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "rsopt/bench.hpp"
#include "rsopt/config.hpp"
#include "rsopt/io.hpp"
#include "rsopt/plotdata.hpp"
#include "rsopt/report.hpp"
#include "rsopt/verify.hpp"

namespace rsopt::cli {

/// Exit codes shared by every subcommand.
inline constexpr int kOk = 0;
inline constexpr int kConfigError = 1;
inline constexpr int kNumericError = 2;
inline constexpr int kVerifyError = 3;

struct Options {
    std::string config_path;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> jobs;
    bool verbose = false;
    bool quiet = false;
    bool corrupt_distance = false;  // verify-only test hook
};

namespace detail {

inline ExperimentConfig load_with_overrides(const Options& opt) {
    ExperimentConfig config = load_config(opt.config_path);
    if (opt.seed) config.seed = *opt.seed;
    if (opt.out_dir) config.output_dir = *opt.out_dir;
    if (opt.jobs) config.jobs = *opt.jobs;
    return config;
}

inline void announce(const Options& opt, const ExperimentResult& result) {
    if (opt.quiet) return;
    std::cout << "fingerprint " << result.fingerprint << ", truth " << result.truth_provenance
              << ", " << result.cells.size() << " cell(s) x " << result.config.replications
              << " replication(s)\n";
    if (opt.verbose) {
        for (std::size_t c = 0; c < result.results.size(); ++c) {
            const auto& cr = result.results[c];
            std::cout << "  cell " << c << " " << cr.cell.label() << ": completed "
                      << cr.completed << "/" << result.config.replications;
            if (cr.bench1) {
                std::cout << ", kappa=" << cr.bench1->kappa.to_string()
                          << ", eps=" << cr.bench1->eps.to_string();
            }
            if (!cr.assumption_feasible) std::cout << " [tau infeasible]";
            if (!cr.assumption_budget) std::cout << " [budget uncertified]";
            std::cout << '\n';
        }
    }
    std::cout << "wrote " << result.config.output_dir << "\n";
}

}  // namespace detail

/// `run`: execute the configured experiment and write the output tree.
inline int cmd_run(const Options& opt, bool sweep_matrix = false) {
    const ExperimentConfig config = detail::load_with_overrides(opt);
    const ExperimentResult result = run_experiment(config);
    write_run_outputs(result, config.output_dir, sweep_matrix);
    detail::announce(opt, result);
    return kOk;
}

/// `sweep`: a run that also emits the algorithms x thresholds summary matrix.
inline int cmd_sweep(const Options& opt) { return cmd_run(opt, /*sweep_matrix=*/true); }

/// `verify`: oracle cross-checks plus the invariant suite on the configured
/// instance; writes verify_report.txt into the output dir.
inline int cmd_verify(const Options& opt) {
    const ExperimentConfig config = detail::load_with_overrides(opt);
    const VerifyReport report = verify_instance(config, opt.corrupt_distance);
    io::write_text_file(config.output_dir + "/verify_report.txt", report.to_text());
    if (!opt.quiet) std::cout << report.to_text();
    if (!report.all_ok()) {
        for (const auto& c : report.checks) {
            if (!c.ok) {
                std::cerr << "verification failed: " << c.name
                          << (c.detail.empty() ? "" : " (" + c.detail + ")") << '\n';
                break;
            }
        }
        return kVerifyError;
    }
    return kOk;
}

/// `plotdata`: post-process a finished run directory into plot-ready CSVs.
inline int cmd_plotdata(const std::string& run_dir, bool quiet) {
    const auto written = write_plot_data(run_dir);
    if (!quiet) {
        for (const auto& path : written) std::cout << "wrote " << path << '\n';
    }
    return kOk;
}

/// Maps an escaping exception onto the documented exit codes.
inline int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e) != nullptr) return kConfigError;
    if (dynamic_cast<const ResourceError*>(&e) != nullptr) return kConfigError;
    if (dynamic_cast<const std::invalid_argument*>(&e) != nullptr) return kConfigError;
    return kNumericError;
}

}  // namespace rsopt::cli
