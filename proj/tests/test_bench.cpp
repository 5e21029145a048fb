// End-to-end harness behavior: truth builders, episode determinism, the
// experiment runner's aggregation and thread-count independence, and the
// report serializers.

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rsopt/bench.hpp"
#include "rsopt/config.hpp"
#include "rsopt/report.hpp"

using nlohmann::json;
using rsopt::ActionGrid;
using rsopt::ConfigError;
using rsopt::ExperimentConfig;
using rsopt::GridMetric;
using rsopt::KernelSpec;
using rsopt::TruthSpec;

namespace {
ExperimentConfig tiny_config() {
    return rsopt::parse_config(json::parse(R"({
        "domain": {"bounds": [[0.0, 1.0]], "resolution": 9},
        "kernel": {"kind": "rbf", "lengthscales": 0.25},
        "truth": {"source": "prior_sample", "seed": 3},
        "beta": {"mode": "fixed", "value": 2.0, "R": 0.1},
        "tau": {"value": 0.0},
        "policy": {"kind": "rs2"},
        "attack": {"kind": "random", "budget": {"mode": "constant", "value": 0.25}},
        "horizon": 6,
        "replications": 3,
        "seed": 11
    })"));
}

std::string join_traces(const rsopt::ExperimentResult& r) {
    std::string all;
    for (const auto& cr : r.results) {
        for (std::size_t rep = 0; rep < cr.traces.size(); ++rep) {
            all += rsopt::trace_csv(cr.traces[rep], cr.ledgers[rep]);
        }
    }
    return all;
}
}  // namespace

TEST_CASE("closed-form truths evaluate to their defining formulas") {
    const auto g = ActionGrid::lattice({{0.0, 1.0}}, {5}, GridMetric::euclidean());
    const auto kernel = KernelSpec::rbf(Eigen::VectorXd::Ones(1));

    TruthSpec linear;
    linear.source = TruthSpec::Source::ClosedForm;
    linear.name = "linear";
    linear.params = json::object();
    const auto lin = rsopt::make_truth(linear, g, kernel);
    CHECK(lin.field.values(0) == 0.0);
    CHECK(lin.field.values(2) == 0.5);
    CHECK(lin.field.values(4) == 1.0);
    CHECK(lin.provenance == "closed_form(linear)");

    TruthSpec bumps = linear;
    bumps.name = "two_bumps";
    const auto g5 = ActionGrid::lattice({{0.0, 5.0}}, {11}, GridMetric::euclidean());
    const auto tb = rsopt::make_truth(bumps, g5, kernel);
    // defaults: bump(1.5, 0.8, 2.0) + bump(3.8, 0.15, 8.0)
    CHECK_THAT(tb.field.values(3), Catch::Matchers::WithinAbs(2.0, 1e-12));            // x = 1.5
    CHECK_THAT(tb.field.values(0), Catch::Matchers::WithinAbs(0.34484324778750575, 1e-12));
    CHECK(tb.provenance == "closed_form(two_bumps) [surrogate]");
    // x = 4.0: narrow bump nearly saturated
    const double expect40 = 2.0 * std::exp(-2.5 * 2.5 / (2.0 * 0.64)) +
                            8.0 * std::exp(-0.2 * 0.2 / (2.0 * 0.0225));
    CHECK_THAT(tb.field.values(8), Catch::Matchers::WithinAbs(expect40, 1e-12));

    TruthSpec plateau = linear;
    plateau.name = "plateau";
    const auto pl = rsopt::make_truth(plateau, g, kernel);
    CHECK(pl.field.values(0) == 0.0);
    CHECK(pl.field.values(1) == 1.0);  // 0.25 is inside (closed interval)
    CHECK(pl.field.values(2) == 1.0);
    CHECK(pl.field.values(4) == 0.0);

    TruthSpec arm = linear;
    arm.name = "two_arm";
    Eigen::MatrixXd two(2, 1);
    two << 0.0, 1.0;
    const auto g2 = ActionGrid::from_points(two, GridMetric::euclidean());
    const auto ta = rsopt::make_truth(arm, g2, kernel);
    CHECK(ta.field.values(0) == 0.0);
    CHECK(ta.field.values(1) == 1.0);
    CHECK_THROWS_AS(rsopt::make_truth(arm, g, kernel), ConfigError);  // needs 2 actions

    TruthSpec junk = linear;
    junk.name = "mystery";
    CHECK_THROWS_AS(rsopt::make_truth(junk, g, kernel), ConfigError);
    TruthSpec badparam = bumps;
    badparam.params = json{{"w3", 1.0}};
    CHECK_THROWS_AS(rsopt::make_truth(badparam, g, kernel), ConfigError);
}

TEST_CASE("prior-sample truth is a pure function of its seed") {
    const auto g = ActionGrid::lattice({{0.0, 1.0}}, {7}, GridMetric::euclidean());
    const auto kernel = KernelSpec::rbf(Eigen::VectorXd::Constant(1, 0.3));
    TruthSpec spec;
    spec.source = TruthSpec::Source::PriorSample;
    spec.seed = 42;
    const auto a = rsopt::make_truth(spec, g, kernel);
    const auto b = rsopt::make_truth(spec, g, kernel);
    CHECK((a.field.values - b.field.values).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.provenance == "prior_sample(seed=42)");
    spec.seed = 43;
    const auto c = rsopt::make_truth(spec, g, kernel);
    CHECK((a.field.values - c.field.values).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("csv truth round-trips and rejects shape mismatches") {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "rsopt_bench_test";
    fs::create_directories(dir);
    const auto path = (dir / "truth.csv").string();
    std::ofstream(path) << "f\n0.5\n-1.0\n2.5\n";

    const auto g = ActionGrid::lattice({{0.0, 1.0}}, {3}, GridMetric::euclidean());
    TruthSpec spec;
    spec.source = TruthSpec::Source::CsvTable;
    spec.path = path;
    const auto t = rsopt::make_truth(spec, g, KernelSpec::rbf(Eigen::VectorXd::Ones(1)));
    CHECK(t.field.values(0) == 0.5);
    CHECK(t.field.values(1) == -1.0);
    CHECK(t.field.values(2) == 2.5);

    const auto g5 = ActionGrid::lattice({{0.0, 1.0}}, {5}, GridMetric::euclidean());
    CHECK_THROWS_AS(rsopt::make_truth(spec, g5, KernelSpec::rbf(Eigen::VectorXd::Ones(1))),
                    ConfigError);
    fs::remove_all(dir);
}

TEST_CASE("episodes are replication-deterministic") {
    const auto config = tiny_config();
    const auto grid = ActionGrid::lattice(config.bounds, config.resolution,
                                          GridMetric::euclidean(), config.max_points);
    const auto truth = rsopt::make_truth(config.truth, grid, config.kernel);
    const auto cells = rsopt::expand_cells(config);
    REQUIRE(cells.size() == 1);

    rsopt::EpisodeSetup setup;
    setup.grid = &grid;
    setup.truth = &truth.field;
    setup.kernel = config.kernel;
    setup.lambda = config.lambda;
    setup.beta = config.beta;
    setup.noise_std = config.noise_std;
    setup.cell = cells[0];
    setup.attack = config.attack;
    setup.horizon = config.horizon;
    setup.master_seed = config.seed;

    const auto a = rsopt::run_episode(setup, 1);
    const auto b = rsopt::run_episode(setup, 1);
    REQUIRE(a.rounds.size() == b.rounds.size());
    for (std::size_t t = 0; t < a.rounds.size(); ++t) {
        CHECK(a.rounds[t].x_tilde == b.rounds[t].x_tilde);
        CHECK(a.rounds[t].x_played == b.rounds[t].x_played);
        CHECK(a.rounds[t].y == b.rounds[t].y);
    }
    // a different replication index draws different noise
    const auto c = rsopt::run_episode(setup, 2);
    bool any_diff = false;
    for (std::size_t t = 0; t < a.rounds.size(); ++t) {
        if (a.rounds[t].y != c.rounds[t].y) any_diff = true;
    }
    CHECK(any_diff);
}

TEST_CASE("a clean episode under no attack plays what it asked for") {
    auto config = tiny_config();
    config.attack = rsopt::AttackSpec::none();
    config.noise_std = 0.0;
    const auto grid = ActionGrid::lattice(config.bounds, config.resolution,
                                          GridMetric::euclidean(), config.max_points);
    const auto truth = rsopt::make_truth(config.truth, grid, config.kernel);

    rsopt::EpisodeSetup setup;
    setup.grid = &grid;
    setup.truth = &truth.field;
    setup.kernel = config.kernel;
    setup.lambda = config.lambda;
    setup.beta = config.beta;
    setup.noise_std = 0.0;
    rsopt::ExperimentCell cell;
    cell.policy.kind = rsopt::PolicySpec::Kind::GpUcb;
    cell.tau_value = 0.0;
    setup.cell = cell;
    setup.attack = config.attack;
    setup.horizon = 5;
    setup.master_seed = 7;

    const auto trace = rsopt::run_episode(setup, 0);
    for (const auto& r : trace.rounds) {
        CHECK(r.x_tilde == r.x_played);
        CHECK(r.eps == 0.0);
        CHECK(r.delta_mag == 0.0);
        CHECK(r.y == r.f_played);  // noiseless
        CHECK(r.tau == 0.0);
    }
    // information gain is nondecreasing
    for (std::size_t t = 1; t < trace.info_gain.size(); ++t) {
        CHECK(trace.info_gain[t] >= trace.info_gain[t - 1] - 1e-12);
    }
}

TEST_CASE("budgeted attacks respect their budget in full episodes") {
    const auto config = tiny_config();  // random attack, eps = 0.25
    const auto result = rsopt::run_experiment(config, 1);
    REQUIRE(result.results.size() == 1);
    const auto& cr = result.results[0];
    CHECK(cr.completed == 3);
    for (const auto& trace : cr.traces) {
        for (const auto& r : trace.rounds) {
            CHECK(r.eps == 0.25);
            CHECK(r.delta_mag <= 0.25);
        }
    }
}

TEST_CASE("the experiment runner aggregates identically at any thread count") {
    const auto config = tiny_config();
    const auto r1 = rsopt::run_experiment(config, 1);
    const auto r4 = rsopt::run_experiment(config, 4);
    CHECK(rsopt::aggregate_csv(r1) == rsopt::aggregate_csv(r4));
    CHECK(join_traces(r1) == join_traces(r4));
    CHECK(r1.fingerprint == r4.fingerprint);

    // and a full rerun is byte-identical
    const auto again = rsopt::run_experiment(config, 1);
    CHECK(rsopt::aggregate_csv(r1) == rsopt::aggregate_csv(again));
    CHECK(join_traces(r1) == join_traces(again));

    // a different master seed changes the realized traces
    auto reseeded = config;
    reseeded.seed = 12;
    const auto rs = rsopt::run_experiment(reseeded, 1);
    CHECK(join_traces(r1) != join_traces(rs));
}

TEST_CASE("aggregate curves carry mean and half-std of completed replications") {
    const auto config = tiny_config();
    const auto result = rsopt::run_experiment(config, 1);
    const auto& cr = result.results[0];
    REQUIRE(cr.lenient_mean.size() == 6);
    REQUIRE(cr.lenient_halfstd.size() == 6);
    // recompute round 5 by hand from the ledgers
    double sum = 0.0;
    for (const auto& led : cr.ledgers) sum += led.lenient[5];
    const double mean = sum / 3.0;
    CHECK_THAT(cr.lenient_mean[5], Catch::Matchers::WithinAbs(mean, 1e-12));
    double ss = 0.0;
    for (const auto& led : cr.ledgers) ss += (led.lenient[5] - mean) * (led.lenient[5] - mean);
    CHECK_THAT(cr.lenient_halfstd[5],
               Catch::Matchers::WithinAbs(0.5 * std::sqrt(ss / 2.0), 1e-12));

    // every regret curve is nondecreasing
    for (const auto& led : cr.ledgers) {
        for (std::size_t t = 1; t < led.lenient.size(); ++t) {
            CHECK(led.lenient[t] >= led.lenient[t - 1]);
        }
    }
}

TEST_CASE("benchmark availability tracks feasibility of the threshold") {
    // tau far below the field: feasible, rs metrics exist
    auto config = tiny_config();
    {
        auto j = config.to_json();
        j["tau"] = {{"value", -100.0}};
        config = rsopt::parse_config(j);
    }
    const auto feasible = rsopt::run_experiment(config, 1);
    CHECK(feasible.results[0].assumption_feasible);
    CHECK(feasible.results[0].rs_available);
    CHECK(feasible.results[0].bench1->kappa.is_finite());

    // tau far above the field: infeasible, rs metrics marked unavailable
    auto j = config.to_json();
    j["tau"] = {{"value", 100.0}};
    const auto infeasible = rsopt::run_experiment(rsopt::parse_config(j), 1);
    CHECK_FALSE(infeasible.results[0].assumption_feasible);
    CHECK_FALSE(infeasible.results[0].rs_available);
    CHECK(infeasible.results[0].rs_mean.empty());
    // lenient regret is always there
    CHECK(infeasible.results[0].lenient_mean.size() == 6);

    // dynamic tau with no anchor: no benchmark at all
    auto jd = config.to_json();
    jd["tau"] = {{"mode", "dynamic"}, {"margin", 0.1}};
    const auto dyn = rsopt::run_experiment(rsopt::parse_config(jd), 1);
    CHECK_FALSE(dyn.results[0].bench1.has_value());
    CHECK_FALSE(dyn.results[0].rs_available);
    CHECK(dyn.results[0].lenient_mean.size() == 6);
}

TEST_CASE("trace csv layout") {
    const auto config = tiny_config();
    const auto result = rsopt::run_experiment(config, 1);
    const auto& cr = result.results[0];
    const auto csv = rsopt::trace_csv(cr.traces[0], cr.ledgers[0]);
    REQUIRE(csv.rfind("t,x_tilde,x_t,eps_t,delta_mag,y_t,f_x_t,lenient_cum,rs_cum,rsg_cum,"
                      "certificate,fallback_flag\n", 0) == 0);
    // one line per round plus the header
    std::size_t lines = 0;
    for (char ch : csv) lines += ch == '\n' ? 1 : 0;
    CHECK(lines == 1 + 6);
    // first data row starts with round number 1 and the requested action
    const auto first = csv.substr(csv.find('\n') + 1, csv.find('\n', csv.find('\n') + 1) -
                                                          csv.find('\n') - 1);
    CHECK(first.rfind("1,", 0) == 0);
}

TEST_CASE("aggregate csv layout and sweep matrix") {
    auto j = tiny_config().to_json();
    j.erase("policy");
    j["policies"] = json::array({{{"kind", "rs2"}}, {{"kind", "gp_ucb"}}});
    j["tau"] = {{"sweep", {0.0, 0.5}}};
    const auto result = rsopt::run_experiment(rsopt::parse_config(j), 1);
    REQUIRE(result.results.size() == 4);

    const auto agg = rsopt::aggregate_csv(result);
    REQUIRE(agg.rfind("policy,attack,tau,r,p,reps,failures,round,lenient_mean,lenient_halfstd,"
                      "rs_mean,rs_halfstd,rsg_mean,rsg_halfstd\n", 0) == 0);
    // horizon rows per cell plus the header
    std::size_t lines = 0;
    for (char ch : agg) lines += ch == '\n' ? 1 : 0;
    CHECK(lines == 1 + 4 * 6);
    CHECK(agg.find("rs2,random(eps=0.25),0,") != std::string::npos);
    CHECK(agg.find("gp_ucb,random(eps=0.25),0.5,") != std::string::npos);

    const auto matrix = rsopt::sweep_matrix_csv(result);
    REQUIRE(matrix.rfind("algorithm,tau=0,tau=0.5\n", 0) == 0);
    CHECK(matrix.find("\nrs2,") != std::string::npos);
    CHECK(matrix.find("\ngp_ucb,") != std::string::npos);
}

TEST_CASE("manifest json is deterministic and carries no timestamps") {
    const auto config = tiny_config();
    const auto a = rsopt::manifest_json(rsopt::run_experiment(config, 1));
    const auto b = rsopt::manifest_json(rsopt::run_experiment(config, 2));
    CHECK(a.dump() == b.dump());
    CHECK(a.at("version").get<std::string>() == rsopt::kVersion);
    CHECK(a.at("fingerprint").get<std::string>() == config.fingerprint());
    CHECK(a.at("truth_provenance").get<std::string>() == "prior_sample(seed=3)");
    CHECK(a.at("horizon").get<int>() == 6);
    CHECK_FALSE(a.contains("timestamp"));
    CHECK_FALSE(a.contains("date"));
    const std::string dumped = a.dump();
    CHECK(dumped.find("time") == std::string::npos);
}

TEST_CASE("run outputs land in the documented files") {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "rsopt_run_outputs";
    fs::remove_all(dir);

    auto j = tiny_config().to_json();
    j["area"] = {{"enabled", true}, {"knots", 8}};
    const auto result = rsopt::run_experiment(rsopt::parse_config(j), 1);
    rsopt::write_run_outputs(result, dir.string(), true);

    CHECK(fs::exists(dir / "manifest.json"));
    CHECK(fs::exists(dir / "aggregate.csv"));
    CHECK(fs::exists(dir / "area.csv"));
    CHECK(fs::exists(dir / "sweep_matrix.csv"));
    CHECK(fs::exists(dir / "traces" / "cell-000-rep-000.csv"));
    CHECK(fs::exists(dir / "traces" / "cell-000-rep-002.csv"));
    CHECK_FALSE(fs::exists(dir / "traces" / "cell-001-rep-000.csv"));

    const auto area = rsopt::area_csv(result);
    REQUIRE(area.rfind("cell,policy,tau,series,eps,shortfall,area\n", 0) == 0);
    CHECK(area.find("benchmark_rs2") != std::string::npos);
    CHECK(area.find("most_played") != std::string::npos);
    CHECK(area.find("truth_argmax") != std::string::npos);
    fs::remove_all(dir);
}
