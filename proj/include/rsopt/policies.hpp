#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rsopt/common.hpp"
#include "rsopt/extended_real.hpp"
#include "rsopt/geometry.hpp"
#include "rsopt/gp.hpp"
#include "rsopt/satisficing.hpp"

namespace rsopt {

/// A selection rule plus its own parameters. The shortfall exponent p belongs
/// to the generalized family only; the ball radius r belongs to StableOpt
/// only (enforced at config parse time).
struct PolicySpec {
    enum class Kind { Rs1, Rs2, Rsg, RsgTs, StableOpt, GpUcb };
    Kind kind = Kind::Rsg;
    double p = 2.0;
    std::optional<double> r;

    [[nodiscard]] std::string label() const {
        switch (kind) {
            case Kind::Rs1: return "rs1";
            case Kind::Rs2: return "rs2";
            case Kind::Rsg: return "rsg(p=" + format_double(p) + ")";
            case Kind::RsgTs: return "rsg_ts(p=" + format_double(p) + ")";
            case Kind::StableOpt:
                return "stable_opt(r=" + (r ? format_double(*r) : std::string("?")) + ")";
            case Kind::GpUcb: return "gp_ucb";
        }
        return "?";
    }
};

namespace detail {
/// Smallest-index argmax over a plain vector (the global tie rule).
inline int argmax_vec(const Eigen::VectorXd& v) {
    int best = 0;
    for (int i = 1; i < v.size(); ++i) {
        if (v(i) > v(best)) best = i;
    }
    return best;
}
inline int argmin_vec(const Eigen::VectorXd& v) {
    int best = 0;
    for (int i = 1; i < v.size(); ++i) {
        if (v(i) < v(best)) best = i;
    }
    return best;
}
}  // namespace detail

/// What a round's certificate scalar means.
enum class CertificateKind {
    None,
    PessimisticFragility,  // min over the grid of fragility on the lcb field
    PessimisticRadius,     // max over the grid of critical radius on the lcb field
    SampleFragility,       // generalized fragility of the chosen action on the Thompson sample
};

/// Outcome of one acquisition decision.
struct SelectionRecord {
    int chosen = 0;
    double tau = 0.0;    // threshold in force this round
    bool fallback = false;  // optimistically infeasible round; fell back to argmax ucb
    CertificateKind certificate_kind = CertificateKind::None;
    ExtendedReal certificate;
    int certificate_anchor = -1;  // action attaining the certificate (-1 if none)
    std::vector<ExtendedReal> acquisition;  // acquisition profile, for diagnostics
};

/// Robust-satisficing selection, steepest-drop form: minimize the fragility of
/// the optimistic field. If even optimism leaves every action infeasible, fall
/// back to argmax ucb and flag the round. The certificate is the best
/// pessimistic fragility, which upper-bounds the chosen action's true
/// fragility whenever the confidence band holds.
inline SelectionRecord select_rs1(const ConfidenceField& cf, const ActionGrid& grid, double tau) {
    const ValueField ucb{cf.ucb, ValueField::Kind::Ucb};
    const ValueField lcb{cf.lcb, ValueField::Kind::Lcb};
    auto opt = fragility(ucb, grid, tau);
    const auto pess = fragility(lcb, grid, tau);
    SelectionRecord rec;
    rec.tau = tau;
    if (opt.best_value.is_pos_inf()) {
        rec.chosen = detail::argmax_vec(cf.ucb);
        rec.fallback = true;
    } else {
        rec.chosen = static_cast<int>(opt.best_index);
    }
    rec.certificate_kind = CertificateKind::PessimisticFragility;
    rec.certificate = pess.best_value;
    rec.certificate_anchor = static_cast<int>(pess.best_index);
    rec.acquisition = std::move(opt.values);
    return rec;
}

/// Robust-satisficing selection, radius form: maximize the critical radius of
/// the optimistic field. The certificate is the best pessimistic radius.
inline SelectionRecord select_rs2(const ConfidenceField& cf, const ActionGrid& grid, double tau) {
    const ValueField ucb{cf.ucb, ValueField::Kind::Ucb};
    const ValueField lcb{cf.lcb, ValueField::Kind::Lcb};
    auto opt = critical_radius(ucb, grid, tau);
    const auto pess = critical_radius(lcb, grid, tau);
    SelectionRecord rec;
    rec.tau = tau;
    if (opt.best_value.is_neg_inf()) {
        rec.chosen = detail::argmax_vec(cf.ucb);
        rec.fallback = true;
    } else {
        rec.chosen = static_cast<int>(opt.best_index);
    }
    rec.certificate_kind = CertificateKind::PessimisticRadius;
    rec.certificate = pess.best_value;
    rec.certificate_anchor = static_cast<int>(pess.best_index);
    rec.acquisition = std::move(opt.values);
    return rec;
}

/// Generalized (exponent-p) robust-satisficing selection; p = 1 reproduces
/// select_rs1's choices exactly.
inline SelectionRecord select_rsg(const ConfidenceField& cf, const ActionGrid& grid, double tau,
                                  double p) {
    const ValueField ucb{cf.ucb, ValueField::Kind::Ucb};
    const ValueField lcb{cf.lcb, ValueField::Kind::Lcb};
    auto opt = p_fragility(ucb, grid, tau, p);
    const auto pess = p_fragility(lcb, grid, tau, p);
    SelectionRecord rec;
    rec.tau = tau;
    if (opt.best_value.is_pos_inf()) {
        rec.chosen = detail::argmax_vec(cf.ucb);
        rec.fallback = true;
    } else {
        rec.chosen = static_cast<int>(opt.best_index);
    }
    rec.certificate_kind = CertificateKind::PessimisticFragility;
    rec.certificate = pess.best_value;
    rec.certificate_anchor = static_cast<int>(pess.best_index);
    rec.acquisition = std::move(opt.values);
    return rec;
}

/// Thompson variant: one joint posterior draw plays the role of the field,
/// and the selection minimizes its generalized fragility. The certificate is
/// the chosen action's fragility on the sampled field (not a confidence-bound
/// guarantee).
inline SelectionRecord select_rsg_ts(const GpPosterior& post, const ActionGrid& grid, double tau,
                                     double p, RngStream& rng) {
    const ValueField sample{sample_posterior(post, grid, rng), ValueField::Kind::Sample};
    auto prof = p_fragility(sample, grid, tau, p);
    SelectionRecord rec;
    rec.tau = tau;
    if (prof.best_value.is_pos_inf()) {
        rec.chosen = detail::argmax_vec(sample.values);
        rec.fallback = true;
    } else {
        rec.chosen = static_cast<int>(prof.best_index);
    }
    rec.certificate_kind = CertificateKind::SampleFragility;
    rec.certificate = prof.values[static_cast<std::size_t>(rec.chosen)];
    rec.certificate_anchor = rec.chosen;
    rec.acquisition = std::move(prof.values);
    return rec;
}

/// Robust-optimization baseline: maximize the worst optimistic value inside a
/// fixed-radius ball, argmax_i min_{d(i,j) <= r} ucb(j).
inline SelectionRecord select_stable_opt(const ConfidenceField& cf, const ActionGrid& grid,
                                         double r) {
    if (!(r >= 0.0) || !std::isfinite(r)) {
        throw std::invalid_argument("stable_opt: radius must be finite and >= 0");
    }
    const int n = grid.size();
    Eigen::VectorXd acq(n);
    const auto& dist = grid.dist_matrix();
    for (int i = 0; i < n; ++i) {
        double worst = cf.ucb(i);  // the center is always inside its own ball
        for (int j : grid.neighbors_by_distance(i)) {
            if (dist(i, j) > r) break;
            worst = std::min(worst, cf.ucb(j));
        }
        acq(i) = worst;
    }
    SelectionRecord rec;
    rec.chosen = detail::argmax_vec(acq);
    rec.acquisition.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) rec.acquisition.emplace_back(acq(i));
    return rec;
}

/// Plain optimism baseline: argmax ucb.
inline SelectionRecord select_gp_ucb(const ConfidenceField& cf) {
    SelectionRecord rec;
    rec.chosen = detail::argmax_vec(cf.ucb);
    rec.acquisition.reserve(static_cast<std::size_t>(cf.ucb.size()));
    for (int i = 0; i < cf.ucb.size(); ++i) rec.acquisition.emplace_back(cf.ucb(i));
    return rec;
}

/// Data-driven threshold: the best value the evidence already guarantees,
/// minus a slack margin.
inline double dynamic_tau(const ConfidenceField& cf, double margin) {
    if (!std::isfinite(margin)) throw std::invalid_argument("dynamic_tau: margin must be finite");
    return cf.lcb.maxCoeff() - margin;
}

}  // namespace rsopt
