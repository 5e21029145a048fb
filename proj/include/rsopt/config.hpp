#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "rsopt/adversary.hpp"
#include "rsopt/common.hpp"
#include "rsopt/geometry.hpp"
#include "rsopt/gp.hpp"
#include "rsopt/io.hpp"
#include "rsopt/kernels.hpp"
#include "rsopt/policies.hpp"

namespace rsopt {

using nlohmann::json;

namespace detail {

/// Strict schema helper: every object must consist of known keys only.
inline void reject_unknown_keys(const json& obj, const std::string& where,
                                const std::set<std::string>& allowed) {
    for (const auto& item : obj.items()) {
        if (!allowed.contains(item.key())) {
            throw ConfigError("unknown key '" + item.key() + "' in " + where);
        }
    }
}

inline const json& require(const json& obj, const std::string& where, const std::string& key) {
    if (!obj.contains(key)) throw ConfigError("missing key '" + key + "' in " + where);
    return obj.at(key);
}

inline double get_number(const json& v, const std::string& where) {
    if (!v.is_number()) throw ConfigError(where + " must be a number");
    return v.get<double>();
}

inline int get_int(const json& v, const std::string& where) {
    if (!v.is_number_integer()) throw ConfigError(where + " must be an integer");
    return v.get<int>();
}

inline std::string get_string(const json& v, const std::string& where) {
    if (!v.is_string()) throw ConfigError(where + " must be a string");
    return v.get<std::string>();
}

inline std::vector<double> get_number_list(const json& v, const std::string& where) {
    if (!v.is_array() || v.empty()) throw ConfigError(where + " must be a nonempty list");
    std::vector<double> out;
    out.reserve(v.size());
    for (const auto& e : v) out.push_back(get_number(e, where + " entry"));
    return out;
}

}  // namespace detail

/// Where the ground-truth field comes from.
struct TruthSpec {
    enum class Source { PriorSample, ClosedForm, CsvTable };
    Source source = Source::PriorSample;
    std::uint64_t seed = 0;   // PriorSample
    std::string name;         // ClosedForm registry name
    json params;              // ClosedForm parameters (may be empty)
    std::string path;         // CsvTable
};

/// Threshold policy for a run: a fixed value (possibly swept) or the
/// data-driven dynamic rule. In dynamic mode an optional fixed `value` may
/// still be given as the anchor for benchmark-relative metrics.
struct TauSpec {
    enum class Mode { Fixed, Dynamic };
    Mode mode = Mode::Fixed;
    std::optional<double> value;
    double margin = 0.0;
    std::vector<double> sweep;
};

/// One policy entry as configured (before sweep expansion).
struct PolicyEntry {
    PolicySpec spec;
    bool p_explicit = false;  // expand over p_list when an rsg entry omits p
    std::optional<TauSpec> tau_override;
};

struct ExperimentConfig {
    // domain
    std::vector<std::array<double, 2>> bounds;
    std::vector<int> resolution;
    MetricKind metric = MetricKind::Euclidean;
    std::optional<std::string> points_csv;
    int max_points = kDefaultMaxGridPoints;

    KernelSpec kernel;
    TruthSpec truth;
    std::vector<PolicyEntry> policies;
    AttackSpec attack;

    double lambda = 1.0;
    BetaSchedule beta;
    double noise_std = 1.0;
    TauSpec tau;
    std::vector<double> p_list{2.0};
    std::vector<double> r_sweep;

    int horizon = 1;
    int replications = 1;
    std::uint64_t seed = 0;
    std::string output_dir = "out";
    bool area_enabled = false;
    int area_knots = 64;
    int jobs = 0;  // 0 = hardware concurrency

    [[nodiscard]] json to_json() const;
    [[nodiscard]] std::string fingerprint() const;
};

/// One (policy, threshold) combination the harness will run.
struct ExperimentCell {
    PolicySpec policy;
    TauSpec::Mode tau_mode = TauSpec::Mode::Fixed;
    std::optional<double> tau_value;  // Fixed: the threshold; Dynamic: metric anchor if any
    double tau_margin = 0.0;

    [[nodiscard]] std::string tau_label() const {
        if (tau_mode == TauSpec::Mode::Dynamic) return "dynamic";
        return format_double(*tau_value);
    }
    [[nodiscard]] std::string label() const { return policy.label() + "@tau=" + tau_label(); }
};

namespace detail {

inline KernelSpec parse_kernel(const json& obj) {
    if (!obj.is_object()) throw ConfigError("kernel must be an object");
    const std::string kind = get_string(require(obj, "kernel", "kind"), "kernel.kind");
    Eigen::VectorXd ls = Eigen::VectorXd::Ones(1);
    if (obj.contains("lengthscales")) {
        const auto& v = obj.at("lengthscales");
        if (v.is_number()) {
            ls(0) = v.get<double>();
        } else {
            const auto list = get_number_list(v, "kernel.lengthscales");
            ls = Eigen::Map<const Eigen::VectorXd>(list.data(),
                                                   static_cast<Eigen::Index>(list.size()));
        }
    }
    const double variance =
        obj.contains("variance") ? get_number(obj.at("variance"), "kernel.variance") : 1.0;
    try {
        if (kind == "rbf") {
            reject_unknown_keys(obj, "kernel", {"kind", "lengthscales", "variance"});
            return KernelSpec::rbf(ls, variance);
        }
        if (kind == "matern") {
            reject_unknown_keys(obj, "kernel", {"kind", "nu", "lengthscales", "variance"});
            const double nu = get_number(require(obj, "kernel", "nu"), "kernel.nu");
            return KernelSpec::matern(nu, ls, variance);
        }
        if (kind == "polynomial") {
            reject_unknown_keys(obj, "kernel",
                                {"kind", "degree", "offset", "lengthscales", "variance"});
            const int degree = get_int(require(obj, "kernel", "degree"), "kernel.degree");
            const double offset = get_number(require(obj, "kernel", "offset"), "kernel.offset");
            return KernelSpec::polynomial(degree, offset, ls, variance);
        }
        if (kind == "linear") {
            reject_unknown_keys(obj, "kernel", {"kind", "lengthscales", "variance"});
            return KernelSpec::linear(ls, variance);
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("kernel: ") + e.what());
    }
    throw ConfigError("kernel.kind must be one of rbf, matern, polynomial, linear");
}

inline TruthSpec parse_truth(const json& obj) {
    if (!obj.is_object()) throw ConfigError("truth must be an object");
    TruthSpec t;
    const std::string source = get_string(require(obj, "truth", "source"), "truth.source");
    if (source == "prior_sample") {
        reject_unknown_keys(obj, "truth", {"source", "seed"});
        t.source = TruthSpec::Source::PriorSample;
        t.seed = static_cast<std::uint64_t>(
            obj.contains("seed") ? get_int(obj.at("seed"), "truth.seed") : 0);
    } else if (source == "closed_form") {
        reject_unknown_keys(obj, "truth", {"source", "name", "params"});
        t.source = TruthSpec::Source::ClosedForm;
        t.name = get_string(require(obj, "truth", "name"), "truth.name");
        t.params = obj.contains("params") ? obj.at("params") : json::object();
        if (!t.params.is_object()) throw ConfigError("truth.params must be an object");
    } else if (source == "csv_table") {
        reject_unknown_keys(obj, "truth", {"source", "path"});
        t.source = TruthSpec::Source::CsvTable;
        t.path = get_string(require(obj, "truth", "path"), "truth.path");
    } else {
        throw ConfigError("truth.source must be one of prior_sample, closed_form, csv_table");
    }
    return t;
}

inline TauSpec parse_tau(const json& obj, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + " must be an object");
    TauSpec t;
    const std::string mode =
        obj.contains("mode") ? get_string(obj.at("mode"), where + ".mode") : "fixed";
    if (mode == "fixed") {
        reject_unknown_keys(obj, where, {"mode", "value", "sweep"});
        t.mode = TauSpec::Mode::Fixed;
        if (obj.contains("value") == obj.contains("sweep")) {
            throw ConfigError(where + ": fixed mode needs exactly one of value, sweep");
        }
        if (obj.contains("value")) t.value = get_number(obj.at("value"), where + ".value");
        if (obj.contains("sweep")) t.sweep = get_number_list(obj.at("sweep"), where + ".sweep");
    } else if (mode == "dynamic") {
        reject_unknown_keys(obj, where, {"mode", "value", "margin"});
        t.mode = TauSpec::Mode::Dynamic;
        if (obj.contains("value")) t.value = get_number(obj.at("value"), where + ".value");
        if (obj.contains("margin")) t.margin = get_number(obj.at("margin"), where + ".margin");
        if (!std::isfinite(t.margin)) throw ConfigError(where + ".margin must be finite");
    } else {
        throw ConfigError(where + ".mode must be fixed or dynamic");
    }
    return t;
}

inline BudgetSchedule parse_budget(const json& obj, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + " must be an object");
    const std::string mode = get_string(require(obj, where, "mode"), where + ".mode");
    try {
        if (mode == "constant") {
            reject_unknown_keys(obj, where, {"mode", "value"});
            return BudgetSchedule::constant(
                get_number(require(obj, where, "value"), where + ".value"));
        }
        if (mode == "sequence") {
            reject_unknown_keys(obj, where, {"mode", "sequence"});
            return BudgetSchedule::from_sequence(
                get_number_list(require(obj, where, "sequence"), where + ".sequence"));
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(where + ": " + e.what());
    }
    throw ConfigError(where + ".mode must be constant or sequence");
}

inline AttackSpec parse_attack(const json& obj) {
    if (!obj.is_object()) throw ConfigError("attack must be an object");
    const std::string kind = get_string(require(obj, "attack", "kind"), "attack.kind");
    try {
        if (kind == "none") {
            reject_unknown_keys(obj, "attack", {"kind"});
            return AttackSpec::none();
        }
        if (kind == "gaussian_noise") {
            reject_unknown_keys(obj, "attack", {"kind", "sigma"});
            return AttackSpec::gaussian_noise(
                get_number(require(obj, "attack", "sigma"), "attack.sigma"));
        }
        reject_unknown_keys(obj, "attack", {"kind", "budget"});
        auto budget = parse_budget(require(obj, "attack", "budget"), "attack.budget");
        if (kind == "random") return AttackSpec::random(std::move(budget));
        if (kind == "lcb") return AttackSpec::lcb(std::move(budget));
        if (kind == "worst_case") return AttackSpec::worst_case(std::move(budget));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("attack: ") + e.what());
    }
    throw ConfigError("attack.kind must be one of none, random, lcb, worst_case, gaussian_noise");
}

inline PolicyEntry parse_policy_entry(const json& obj, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + " must be an object");
    reject_unknown_keys(obj, where, {"kind", "p", "r", "tau"});
    PolicyEntry e;
    const std::string kind = get_string(require(obj, where, "kind"), where + ".kind");
    if (kind == "rs1") {
        e.spec.kind = PolicySpec::Kind::Rs1;
    } else if (kind == "rs2") {
        e.spec.kind = PolicySpec::Kind::Rs2;
    } else if (kind == "rsg") {
        e.spec.kind = PolicySpec::Kind::Rsg;
    } else if (kind == "rsg_ts") {
        e.spec.kind = PolicySpec::Kind::RsgTs;
    } else if (kind == "stable_opt") {
        e.spec.kind = PolicySpec::Kind::StableOpt;
    } else if (kind == "gp_ucb") {
        e.spec.kind = PolicySpec::Kind::GpUcb;
    } else {
        throw ConfigError(where + ".kind must be one of rs1, rs2, rsg, rsg_ts, stable_opt, gp_ucb");
    }
    const bool is_rsg = e.spec.kind == PolicySpec::Kind::Rsg ||
                        e.spec.kind == PolicySpec::Kind::RsgTs;
    if (obj.contains("p")) {
        if (!is_rsg) throw ConfigError(where + ": p is only meaningful for rsg and rsg_ts");
        e.spec.p = get_number(obj.at("p"), where + ".p");
        if (!(e.spec.p >= 1.0) || !std::isfinite(e.spec.p)) {
            throw ConfigError(where + ".p must be finite and >= 1");
        }
        e.p_explicit = true;
    }
    if (obj.contains("r")) {
        if (e.spec.kind != PolicySpec::Kind::StableOpt) {
            throw ConfigError(where + ": r is only meaningful for stable_opt");
        }
        const double r = get_number(obj.at("r"), where + ".r");
        if (!(r >= 0.0) || !std::isfinite(r)) throw ConfigError(where + ".r must be finite and >= 0");
        e.spec.r = r;
    }
    if (obj.contains("tau")) e.tau_override = parse_tau(obj.at("tau"), where + ".tau");
    return e;
}

}  // namespace detail

inline ExperimentConfig parse_config(const json& root) {
    if (!root.is_object()) throw ConfigError("config root must be an object");
    detail::reject_unknown_keys(
        root, "config",
        {"domain", "kernel", "truth", "policy", "policies", "attack", "lambda", "beta",
         "noise_std", "tau", "p_list", "r_sweep", "horizon", "replications", "seed", "output_dir",
         "area", "jobs"});
    ExperimentConfig c;

    // domain
    {
        const json& d = detail::require(root, "config", "domain");
        if (!d.is_object()) throw ConfigError("domain must be an object");
        detail::reject_unknown_keys(
            d, "domain", {"bounds", "resolution", "metric", "points_csv", "max_points"});
        if (d.contains("max_points")) {
            c.max_points = detail::get_int(d.at("max_points"), "domain.max_points");
            if (c.max_points < 2) throw ConfigError("domain.max_points must be >= 2");
        }
        if (d.contains("metric")) {
            const auto m = detail::get_string(d.at("metric"), "domain.metric");
            if (m == "euclidean") {
                c.metric = MetricKind::Euclidean;
            } else if (m == "kernel") {
                c.metric = MetricKind::Kernel;
            } else {
                throw ConfigError("domain.metric must be euclidean or kernel");
            }
        }
        if (d.contains("points_csv")) {
            if (d.contains("bounds") || d.contains("resolution")) {
                throw ConfigError("domain: points_csv excludes bounds/resolution");
            }
            c.points_csv = detail::get_string(d.at("points_csv"), "domain.points_csv");
        } else {
            const json& b = detail::require(d, "domain", "bounds");
            if (!b.is_array() || b.empty()) throw ConfigError("domain.bounds must be a nonempty list");
            for (const auto& pair : b) {
                const auto v = detail::get_number_list(pair, "domain.bounds entry");
                if (v.size() != 2) throw ConfigError("domain.bounds entries must be [lo, hi]");
                c.bounds.push_back({v[0], v[1]});
            }
            const json& r = detail::require(d, "domain", "resolution");
            if (r.is_number_integer()) {
                c.resolution.assign(c.bounds.size(), r.get<int>());
            } else if (r.is_array()) {
                for (const auto& e : r) {
                    c.resolution.push_back(detail::get_int(e, "domain.resolution entry"));
                }
                if (c.resolution.size() != c.bounds.size()) {
                    throw ConfigError("domain.resolution must match bounds dimension");
                }
            } else {
                throw ConfigError("domain.resolution must be an integer or a list");
            }
        }
    }

    c.kernel = detail::parse_kernel(detail::require(root, "config", "kernel"));
    c.truth = detail::parse_truth(detail::require(root, "config", "truth"));

    // beta (parsed before lambda / noise_std so R can seed their defaults)
    double beta_R = 1.0;
    {
        const json& b = detail::require(root, "config", "beta");
        if (!b.is_object()) throw ConfigError("beta must be an object");
        const std::string mode =
            b.contains("mode") ? detail::get_string(b.at("mode"), "beta.mode") : "theoretical";
        try {
            if (mode == "theoretical") {
                detail::reject_unknown_keys(b, "beta", {"mode", "B", "R", "zeta"});
                const double B = detail::get_number(detail::require(b, "beta", "B"), "beta.B");
                const double R = detail::get_number(detail::require(b, "beta", "R"), "beta.R");
                const double zeta =
                    b.contains("zeta") ? detail::get_number(b.at("zeta"), "beta.zeta") : 0.05;
                c.beta = BetaSchedule::theoretical(B, R, zeta);
                beta_R = R;
            } else if (mode == "fixed") {
                detail::reject_unknown_keys(b, "beta", {"mode", "value", "R"});
                c.beta = BetaSchedule::fixed(
                    detail::get_number(detail::require(b, "beta", "value"), "beta.value"));
                if (b.contains("R")) {
                    beta_R = detail::get_number(b.at("R"), "beta.R");
                    if (!(beta_R > 0.0)) throw ConfigError("beta.R must be > 0");
                    c.beta.R = beta_R;
                }
            } else {
                throw ConfigError("beta.mode must be theoretical or fixed");
            }
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("beta: ") + e.what());
        }
    }

    c.lambda = root.contains("lambda")
                   ? detail::get_number(root.at("lambda"), "lambda")
                   : beta_R * beta_R;  // ridge defaults to the noise variance
    if (!(c.lambda > 0.0)) throw ConfigError("lambda must be > 0");

    c.noise_std = root.contains("noise_std")
                      ? detail::get_number(root.at("noise_std"), "noise_std")
                      : beta_R;
    if (!(c.noise_std >= 0.0)) throw ConfigError("noise_std must be >= 0");

    // absent tau leaves a fixed-mode spec with no value; expand_cells then
    // requires every policy entry to carry its own tau override
    if (root.contains("tau")) c.tau = detail::parse_tau(root.at("tau"), "tau");

    if (root.contains("p_list")) {
        c.p_list = detail::get_number_list(root.at("p_list"), "p_list");
        for (double p : c.p_list) {
            if (!(p >= 1.0) || !std::isfinite(p)) throw ConfigError("p_list entries must be >= 1");
        }
    }
    if (root.contains("r_sweep")) {
        c.r_sweep = detail::get_number_list(root.at("r_sweep"), "r_sweep");
        for (double r : c.r_sweep) {
            if (!(r >= 0.0) || !std::isfinite(r)) throw ConfigError("r_sweep entries must be >= 0");
        }
    }

    // policies: a single `policy` object or a `policies` list
    if (root.contains("policy") == root.contains("policies")) {
        throw ConfigError("config needs exactly one of policy, policies");
    }
    if (root.contains("policy")) {
        c.policies.push_back(detail::parse_policy_entry(root.at("policy"), "policy"));
    } else {
        const json& list = root.at("policies");
        if (!list.is_array() || list.empty()) throw ConfigError("policies must be a nonempty list");
        for (std::size_t i = 0; i < list.size(); ++i) {
            c.policies.push_back(
                detail::parse_policy_entry(list.at(i), "policies[" + std::to_string(i) + "]"));
        }
    }

    c.attack = root.contains("attack") ? detail::parse_attack(root.at("attack"))
                                       : AttackSpec::none();

    c.horizon = detail::get_int(detail::require(root, "config", "horizon"), "horizon");
    if (c.horizon < 1) throw ConfigError("horizon must be >= 1");
    if (root.contains("replications")) {
        c.replications = detail::get_int(root.at("replications"), "replications");
        if (c.replications < 1) throw ConfigError("replications must be >= 1");
    }
    if (root.contains("seed")) {
        const auto& s = root.at("seed");
        if (!s.is_number_integer()) throw ConfigError("seed must be an integer");
        c.seed = s.get<std::uint64_t>();
    }
    if (root.contains("output_dir")) {
        c.output_dir = detail::get_string(root.at("output_dir"), "output_dir");
    }
    if (root.contains("area")) {
        const json& a = root.at("area");
        if (!a.is_object()) throw ConfigError("area must be an object");
        detail::reject_unknown_keys(a, "area", {"enabled", "knots"});
        if (a.contains("enabled")) {
            if (!a.at("enabled").is_boolean()) throw ConfigError("area.enabled must be a boolean");
            c.area_enabled = a.at("enabled").get<bool>();
        }
        if (a.contains("knots")) {
            c.area_knots = detail::get_int(a.at("knots"), "area.knots");
            if (c.area_knots < 2) throw ConfigError("area.knots must be >= 2");
        }
    }
    if (root.contains("jobs")) {
        c.jobs = detail::get_int(root.at("jobs"), "jobs");
        if (c.jobs < 0) throw ConfigError("jobs must be >= 0");
    }
    return c;
}

inline ExperimentConfig load_config(const std::string& path) {
    json root;
    try {
        root = json::parse(io::read_text_file(path));
    } catch (const json::parse_error& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
    return parse_config(root);
}

/// Expands the configured policies x thresholds into concrete cells. Sweep
/// axes: rsg/rsg_ts entries without explicit p expand over p_list, stable_opt
/// entries without r expand over r_sweep, and fixed tau sweeps over its list.
inline std::vector<ExperimentCell> expand_cells(const ExperimentConfig& c) {
    std::vector<ExperimentCell> cells;
    for (const auto& entry : c.policies) {
        // policy-level parameter sweeps
        std::vector<PolicySpec> variants;
        const bool is_rsg = entry.spec.kind == PolicySpec::Kind::Rsg ||
                            entry.spec.kind == PolicySpec::Kind::RsgTs;
        if (is_rsg && !entry.p_explicit) {
            for (double p : c.p_list) {
                PolicySpec v = entry.spec;
                v.p = p;
                variants.push_back(v);
            }
        } else if (entry.spec.kind == PolicySpec::Kind::StableOpt && !entry.spec.r) {
            if (c.r_sweep.empty()) {
                throw ConfigError("stable_opt entry needs r or a global r_sweep");
            }
            for (double r : c.r_sweep) {
                PolicySpec v = entry.spec;
                v.r = r;
                variants.push_back(v);
            }
        } else {
            variants.push_back(entry.spec);
        }

        const TauSpec& tau = entry.tau_override ? *entry.tau_override : c.tau;
        for (const auto& v : variants) {
            if (tau.mode == TauSpec::Mode::Dynamic) {
                ExperimentCell cell;
                cell.policy = v;
                cell.tau_mode = TauSpec::Mode::Dynamic;
                cell.tau_value = tau.value;
                cell.tau_margin = tau.margin;
                cells.push_back(std::move(cell));
            } else {
                std::vector<double> values = tau.sweep;
                if (values.empty()) {
                    if (!tau.value) {
                        throw ConfigError("no tau value configured for policy " + v.label());
                    }
                    values.push_back(*tau.value);
                }
                for (double t : values) {
                    if (!std::isfinite(t)) throw ConfigError("tau values must be finite");
                    ExperimentCell cell;
                    cell.policy = v;
                    cell.tau_mode = TauSpec::Mode::Fixed;
                    cell.tau_value = t;
                    cells.push_back(std::move(cell));
                }
            }
        }
    }
    return cells;
}

namespace detail {
/// FNV-1a over the canonical dump: stable across runs and platforms.
inline std::string fnv1a_hex(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    static const char* hex = "0123456789abcdef";
    for (int i = 15; i >= 0; --i) {
        buf[15 - i] = hex[(h >> (4 * i)) & 0xF];
    }
    buf[16] = '\0';
    return std::string(buf);
}
}  // namespace detail

inline json ExperimentConfig::to_json() const {
    json root;
    json d;
    if (points_csv) {
        d["points_csv"] = *points_csv;
    } else {
        json b = json::array();
        for (const auto& pair : bounds) b.push_back({pair[0], pair[1]});
        d["bounds"] = std::move(b);
        d["resolution"] = resolution;
    }
    d["metric"] = metric == MetricKind::Euclidean ? "euclidean" : "kernel";
    d["max_points"] = max_points;
    root["domain"] = std::move(d);

    json k;
    switch (kernel.kind) {
        case KernelSpec::Kind::Rbf: k["kind"] = "rbf"; break;
        case KernelSpec::Kind::Matern:
            k["kind"] = "matern";
            k["nu"] = kernel.nu;
            break;
        case KernelSpec::Kind::Polynomial:
            k["kind"] = "polynomial";
            k["degree"] = kernel.degree;
            k["offset"] = kernel.offset;
            break;
        case KernelSpec::Kind::Linear: k["kind"] = "linear"; break;
    }
    std::vector<double> ls(kernel.lengthscales.data(),
                           kernel.lengthscales.data() + kernel.lengthscales.size());
    k["lengthscales"] = ls;
    k["variance"] = kernel.variance;
    root["kernel"] = std::move(k);

    json t;
    switch (truth.source) {
        case TruthSpec::Source::PriorSample:
            t["source"] = "prior_sample";
            t["seed"] = truth.seed;
            break;
        case TruthSpec::Source::ClosedForm:
            t["source"] = "closed_form";
            t["name"] = truth.name;
            t["params"] = truth.params;
            break;
        case TruthSpec::Source::CsvTable:
            t["source"] = "csv_table";
            t["path"] = truth.path;
            break;
    }
    root["truth"] = std::move(t);

    auto tau_json = [](const TauSpec& ts) {
        json j;
        if (ts.mode == TauSpec::Mode::Dynamic) {
            j["mode"] = "dynamic";
            if (ts.value) j["value"] = *ts.value;
            j["margin"] = ts.margin;
        } else {
            j["mode"] = "fixed";
            if (!ts.sweep.empty()) {
                j["sweep"] = ts.sweep;
            } else if (ts.value) {
                j["value"] = *ts.value;
            }
        }
        return j;
    };

    json plist = json::array();
    for (const auto& e : policies) {
        json p;
        switch (e.spec.kind) {
            case PolicySpec::Kind::Rs1: p["kind"] = "rs1"; break;
            case PolicySpec::Kind::Rs2: p["kind"] = "rs2"; break;
            case PolicySpec::Kind::Rsg: p["kind"] = "rsg"; break;
            case PolicySpec::Kind::RsgTs: p["kind"] = "rsg_ts"; break;
            case PolicySpec::Kind::StableOpt: p["kind"] = "stable_opt"; break;
            case PolicySpec::Kind::GpUcb: p["kind"] = "gp_ucb"; break;
        }
        if (e.p_explicit) p["p"] = e.spec.p;
        if (e.spec.r) p["r"] = *e.spec.r;
        if (e.tau_override) p["tau"] = tau_json(*e.tau_override);
        plist.push_back(std::move(p));
    }
    root["policies"] = std::move(plist);

    json a;
    switch (attack.kind) {
        case AttackSpec::Kind::None: a["kind"] = "none"; break;
        case AttackSpec::Kind::Random: a["kind"] = "random"; break;
        case AttackSpec::Kind::Lcb: a["kind"] = "lcb"; break;
        case AttackSpec::Kind::WorstCase: a["kind"] = "worst_case"; break;
        case AttackSpec::Kind::GaussianNoise:
            a["kind"] = "gaussian_noise";
            a["sigma"] = attack.sigma;
            break;
    }
    if (attack.budgeted()) {
        json b;
        if (attack.budget.mode == BudgetSchedule::Mode::Constant) {
            b["mode"] = "constant";
            b["value"] = attack.budget.value;
        } else {
            b["mode"] = "sequence";
            b["sequence"] = attack.budget.sequence;
        }
        a["budget"] = std::move(b);
    }
    root["attack"] = std::move(a);

    root["lambda"] = lambda;
    json bj;
    if (beta.mode == BetaSchedule::Mode::Theoretical) {
        bj["mode"] = "theoretical";
        bj["B"] = beta.B;
        bj["R"] = beta.R;
        bj["zeta"] = beta.zeta;
    } else {
        bj["mode"] = "fixed";
        bj["value"] = beta.value;
        bj["R"] = beta.R;
    }
    root["beta"] = std::move(bj);
    root["noise_std"] = noise_std;
    root["tau"] = tau_json(tau);
    root["p_list"] = p_list;
    if (!r_sweep.empty()) root["r_sweep"] = r_sweep;
    root["horizon"] = horizon;
    root["replications"] = replications;
    root["seed"] = seed;
    root["output_dir"] = output_dir;
    root["area"] = {{"enabled", area_enabled}, {"knots", area_knots}};
    root["jobs"] = jobs;
    return root;
}

inline std::string ExperimentConfig::fingerprint() const {
    // jobs and output_dir steer the runtime, not the results: two configs
    // that differ only there share a fingerprint
    json j = to_json();
    j.erase("jobs");
    j.erase("output_dir");
    return detail::fnv1a_hex(j.dump());
}

}  // namespace rsopt
