// Command-line front end. All behavior lives in the library headers; this
// file only parses arguments and maps exceptions to exit codes.

#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "rsopt/cli.hpp"
#include "rsopt/common.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Gaussian-process satisficing bandits under input perturbation"};
    app.set_version_flag("--version", std::string(rsopt::kVersion));
    app.require_subcommand(1);

    rsopt::cli::Options opt;
    std::string run_dir;

    auto add_common = [&](CLI::App* cmd, bool needs_config) {
        if (needs_config) {
            cmd->add_option("--config", opt.config_path, "experiment config (JSON)")
                ->required()
                ->check(CLI::ExistingFile);
        }
        cmd->add_option("--out", opt.out_dir, "output directory (overrides config)");
        cmd->add_option("--seed", opt.seed, "master seed (overrides config)");
        cmd->add_option("--jobs", opt.jobs, "worker threads, 0 = hardware (overrides config)");
        cmd->add_flag("-v,--verbose", opt.verbose, "per-cell progress output");
        cmd->add_flag("-q,--quiet", opt.quiet, "suppress non-error output");
    };

    CLI::App* run = app.add_subcommand("run", "run the configured experiment");
    add_common(run, true);

    CLI::App* sweep = app.add_subcommand("sweep", "run and emit the policy x tau summary matrix");
    add_common(sweep, true);

    CLI::App* verify = app.add_subcommand("verify", "oracle cross-checks and invariant suite");
    add_common(verify, true);
    verify
        ->add_flag("--corrupt-distance", opt.corrupt_distance,
                   "deliberately corrupt one grid distance (suite self-test)")
        ->group("");  // hidden

    CLI::App* plotdata = app.add_subcommand("plotdata", "derive plot-ready CSVs from a run");
    plotdata->add_option("--out", run_dir, "finished run directory")->required();
    plotdata->add_flag("-q,--quiet", opt.quiet, "suppress non-error output");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return rsopt::cli::cmd_run(opt);
        if (sweep->parsed()) return rsopt::cli::cmd_sweep(opt);
        if (verify->parsed()) return rsopt::cli::cmd_verify(opt);
        if (plotdata->parsed()) return rsopt::cli::cmd_plotdata(run_dir, opt.quiet);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return rsopt::cli::exit_code_for(e);
    }
    return rsopt::cli::kConfigError;
}
