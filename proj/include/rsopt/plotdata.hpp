#pragma once

#include <algorithm>
#include <filesystem>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "rsopt/bench.hpp"
#include "rsopt/config.hpp"
#include "rsopt/io.hpp"
#include "rsopt/satisficing.hpp"

namespace rsopt {

/// Turns a finished run directory into plot-ready CSV files under <out>/plots:
/// regret curves with confidence bands (one file per regret kind), robustness
/// area curves, and guarantee-cone cross sections of the ground truth. Pure
/// post-processing: everything is derived from manifest.json and the CSVs the
/// run already wrote.
inline std::vector<std::string> write_plot_data(const std::string& out_dir) {
    std::vector<std::string> written;
    const json manifest = json::parse(io::read_text_file(out_dir + "/manifest.json"));
    if (!manifest.contains("config")) throw ConfigError("manifest.json lacks a config section");
    const ExperimentConfig config = parse_config(manifest.at("config"));

    // --- regret curves from aggregate.csv ------------------------------------
    {
        const auto rows = io::read_csv_strings(out_dir + "/aggregate.csv");
        if (rows.empty()) throw ConfigError("aggregate.csv is empty");
        const auto& header = rows[0];
        auto col = [&](const std::string& name) {
            const auto it = std::find(header.begin(), header.end(), name);
            if (it == header.end()) throw ConfigError("aggregate.csv lacks column " + name);
            return static_cast<std::size_t>(it - header.begin());
        };
        const std::size_t c_policy = col("policy"), c_tau = col("tau"), c_r = col("r"),
                          c_p = col("p"), c_round = col("round");
        struct Kind {
            const char* name;
            std::size_t mean, half;
        };
        const Kind kinds[] = {
            {"lenient", col("lenient_mean"), col("lenient_halfstd")},
            {"rs", col("rs_mean"), col("rs_halfstd")},
            {"rsg", col("rsg_mean"), col("rsg_halfstd")},
        };
        for (const auto& kind : kinds) {
            std::ostringstream out;
            out << "series,round,mean,lo,hi\n";
            bool any = false;
            for (std::size_t i = 1; i < rows.size(); ++i) {
                const auto& row = rows[i];
                if (row[kind.mean].empty()) continue;
                std::string series = row[c_policy];
                if (!row[c_p].empty()) series += "(p=" + row[c_p] + ")";
                if (!row[c_r].empty()) series += "(r=" + row[c_r] + ")";
                series += "@tau=" + row[c_tau];
                const double mean = parse_double(row[kind.mean]);
                const double half = parse_double(row[kind.half]);
                out << series << ',' << row[c_round] << ',' << format_double(mean) << ','
                    << format_double(mean - half) << ',' << format_double(mean + half) << '\n';
                any = true;
            }
            if (any) {
                const std::string path =
                    out_dir + "/plots/regret_" + std::string(kind.name) + ".csv";
                io::write_text_file(path, out.str());
                written.push_back(path);
            }
        }
    }

    // --- area curves (reshape of area.csv when the run produced one) -----------
    if (std::filesystem::exists(out_dir + "/area.csv")) {
        const auto rows = io::read_csv_strings(out_dir + "/area.csv");
        std::ostringstream out;
        out << "series,eps,shortfall,area\n";
        for (std::size_t i = 1; i < rows.size(); ++i) {
            const auto& row = rows[i];
            // cell,policy,tau,series,eps,shortfall,area
            out << row[1] << '/' << row[3] << "@tau=" << row[2] << ',' << row[4] << ',' << row[5]
                << ',' << row[6] << '\n';
        }
        const std::string path = out_dir + "/plots/area.csv";
        io::write_text_file(path, out.str());
        written.push_back(path);
    }

    // --- guarantee cones on the ground truth -----------------------------------
    {
        GridMetric metric = config.metric == MetricKind::Euclidean
                                ? GridMetric::euclidean()
                                : GridMetric::kernel_induced(config.kernel);
        const ActionGrid grid =
            config.points_csv
                ? ActionGrid::from_csv(*config.points_csv, metric, config.max_points)
                : ActionGrid::lattice(config.bounds, config.resolution, metric,
                                      config.max_points);
        const TruthInstance truth = make_truth(config.truth, grid, config.kernel);

        std::vector<double> taus;
        for (const auto& cell : expand_cells(config)) {
            if (cell.tau_value &&
                std::find(taus.begin(), taus.end(), *cell.tau_value) == taus.end()) {
                taus.push_back(*cell.tau_value);
            }
        }
        std::vector<double> ps{1.0};
        for (double p : config.p_list) {
            if (std::find(ps.begin(), ps.end(), p) == ps.end()) ps.push_back(p);
        }

        std::ostringstream out;
        out << "series,action,x0,value\n";
        auto emit_field = [&](const std::string& series, const Eigen::VectorXd& v) {
            for (int i = 0; i < grid.size(); ++i) {
                out << series << ',' << i << ',' << format_double(grid.point(i)(0)) << ','
                    << ExtendedReal(v(i)).to_string() << '\n';
            }
        };
        emit_field("truth", truth.field.values);
        bool any = false;
        for (double tau : taus) {
            for (double p : ps) {
                const auto prof = p_fragility(truth.field, grid, tau, p);
                if (!prof.best_value.is_finite()) continue;  // infeasible threshold: no cone
                const auto cone =
                    fragility_cone(prof, grid, static_cast<int>(prof.best_index));
                emit_field("cone(p=" + format_double(p) + ",tau=" + format_double(tau) + ")",
                           cone);
                any = true;
            }
            const auto rad = critical_radius(truth.field, grid, tau);
            if (rad.best_value.is_finite()) {
                const double radius = rad.best_value.as_double();
                const int anchor = static_cast<int>(rad.best_index);
                Eigen::VectorXd floor(grid.size());
                for (int j = 0; j < grid.size(); ++j) {
                    floor(j) = grid.dist(anchor, j) <= radius
                                   ? tau
                                   : -std::numeric_limits<double>::infinity();
                }
                emit_field("radius_floor(tau=" + format_double(tau) + ")", floor);
                any = true;
            }
        }
        if (any || !taus.empty()) {
            const std::string path = out_dir + "/plots/cones.csv";
            io::write_text_file(path, out.str());
            written.push_back(path);
        }
    }
    return written;
}

}  // namespace rsopt
