#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rsopt/common.hpp"
#include "rsopt/geometry.hpp"
#include "rsopt/kernels.hpp"
#include "rsopt/rng.hpp"

namespace rsopt {

namespace detail {

/// Unblocked lower-triangular Cholesky. On failure reports the offending
/// pivot instead of just giving up, which Eigen's LLT cannot do.
struct CholeskyReport {
    bool ok = true;
    int pivot = -1;
    double pivot_value = 0.0;
};

inline CholeskyReport cholesky_lower(const Eigen::MatrixXd& a, Eigen::MatrixXd& l) {
    const Eigen::Index n = a.rows();
    l = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        double d = a(j, j) - l.row(j).head(j).squaredNorm();
        if (!(d > 0.0) || !std::isfinite(d)) {
            return {false, static_cast<int>(j), d};
        }
        l(j, j) = std::sqrt(d);
        for (Eigen::Index i = j + 1; i < n; ++i) {
            l(i, j) = (a(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / l(j, j);
        }
    }
    return {};
}

/// Relative jitter escalation ladder used whenever a factorization must
/// succeed despite near-singular input.
inline constexpr double kJitterLadder[] = {0.0, 1e-10, 1e-8, 1e-6};

}  // namespace detail

/// Confidence-bound scale. Theoretical mode follows the information-theoretic
/// schedule beta_t = B + (R/sqrt(lambda)) * sqrt(log det((lbar/lambda) K_{t-1}
/// + lbar I) + 2 log(1/zeta)) with lbar = max(1, lambda); Fixed mode is a
/// constant supplied by the user.
struct BetaSchedule {
    enum class Mode { Theoretical, Fixed };
    Mode mode = Mode::Theoretical;
    double B = 1.0;      // RKHS norm bound on the truth
    double R = 1.0;      // sub-Gaussian observation-noise scale
    double zeta = 0.05;  // confidence failure probability
    double value = 2.0;  // Fixed mode

    static BetaSchedule theoretical(double B, double R, double zeta) {
        if (!(B >= 0.0)) throw std::invalid_argument("beta: B must be >= 0");
        if (!(R > 0.0)) throw std::invalid_argument("beta: R must be > 0");
        if (!(zeta > 0.0 && zeta < 1.0)) throw std::invalid_argument("beta: zeta must be in (0,1)");
        BetaSchedule s;
        s.mode = Mode::Theoretical;
        s.B = B;
        s.R = R;
        s.zeta = zeta;
        return s;
    }

    static BetaSchedule fixed(double value) {
        if (!(value > 0.0)) throw std::invalid_argument("beta: fixed value must be > 0");
        BetaSchedule s;
        s.mode = Mode::Fixed;
        s.value = value;
        return s;
    }
};

/// Upper/lower confidence bounds over a grid, all derived from one posterior
/// at one round: ucb - lcb == 2 * beta * sd by construction.
struct ConfidenceField {
    Eigen::VectorXd mean;
    Eigen::VectorXd sd;
    Eigen::VectorXd lcb;
    Eigen::VectorXd ucb;
    double beta = 0.0;
    int round = 0;  // number of observations behind the field
};

/// Gaussian-process regression posterior with ridge parameter lambda:
/// mean(x) = k_t(x)' (K_t + lambda I)^-1 y_t and
/// var(x)  = k(x,x) - k_t(x)' (K_t + lambda I)^-1 k_t(x).
///
/// The Cholesky factor of K_t + lambda I is kept and extended in place on
/// append (O(t^2) per observation); a full refit with jitter escalation is the
/// fallback when the extension degenerates.
class GpPosterior {
  public:
    static GpPosterior prior(KernelSpec kernel, double lambda) {
        return fit(std::move(kernel), Eigen::MatrixXd(0, 0), Eigen::VectorXd(0), lambda);
    }

    static GpPosterior fit(KernelSpec kernel, Eigen::MatrixXd inputs, Eigen::VectorXd targets,
                           double lambda) {
        kernel.validate();
        if (!(lambda > 0.0)) throw std::invalid_argument("gp: lambda must be > 0");
        if (inputs.rows() != targets.size()) {
            throw std::invalid_argument("gp: inputs and targets disagree on count");
        }
        GpPosterior post;
        post.kernel_ = std::move(kernel);
        post.lambda_ = lambda;
        post.inputs_ = std::move(inputs);
        post.targets_ = std::move(targets);
        post.refit();
        return post;
    }

    [[nodiscard]] int count() const { return static_cast<int>(inputs_.rows()); }
    [[nodiscard]] double lambda() const { return lambda_; }
    [[nodiscard]] double jitter() const { return jitter_; }
    [[nodiscard]] const KernelSpec& kernel() const { return kernel_; }
    [[nodiscard]] const Eigen::MatrixXd& inputs() const { return inputs_; }
    [[nodiscard]] const Eigen::VectorXd& targets() const { return targets_; }
    [[nodiscard]] const Eigen::MatrixXd& chol() const { return chol_; }
    [[nodiscard]] const Eigen::VectorXd& alpha() const { return alpha_; }

    struct Prediction {
        double mean;
        double var;
    };

    [[nodiscard]] Prediction predict(const Eigen::VectorXd& x) const {
        const double kxx = eval_kernel(kernel_, x, x);
        if (count() == 0) return {0.0, kxx};
        Eigen::VectorXd kvec(count());
        for (int i = 0; i < count(); ++i) {
            kvec(i) = eval_kernel(kernel_, inputs_.row(i).transpose(), x);
        }
        const Eigen::VectorXd b = chol_.triangularView<Eigen::Lower>().solve(kvec);
        const double mean = kvec.dot(alpha_);
        double var = kxx - b.squaredNorm();
        var = std::min(std::max(var, 0.0), kxx);
        return {mean, var};
    }

    /// Adds one observation, extending the stored factor by one row.
    void append(const Eigen::VectorXd& x, double y) {
        if (count() > 0 && x.size() != inputs_.cols()) {
            throw std::invalid_argument("gp: observation dimension mismatch");
        }
        const int t = count();
        Eigen::VectorXd kvec(t);
        for (int i = 0; i < t; ++i) {
            kvec(i) = eval_kernel(kernel_, inputs_.row(i).transpose(), x);
        }
        const double kxx = eval_kernel(kernel_, x, x);

        grow(x, y);

        const Eigen::VectorXd b = chol_.topLeftCorner(t, t)
                                      .triangularView<Eigen::Lower>()
                                      .solve(kvec);
        const double d2 = kxx + lambda_ + jitter_ - b.squaredNorm();
        if (d2 > 0.0 && std::isfinite(d2)) {
            chol_.conservativeResize(t + 1, t + 1);
            chol_.row(t).head(t) = b.transpose();
            chol_.col(t).setZero();
            chol_(t, t) = std::sqrt(d2);
            recompute_alpha();
        } else {
            refit();  // degenerate extension: full refit, escalating jitter
        }
    }

    /// Realized information gain 0.5 * log det(I + lambda^-1 K_t), computed
    /// from the stored factor (zero when nothing has been observed).
    [[nodiscard]] double realized_information_gain() const {
        const int t = count();
        if (t == 0) return 0.0;
        return 0.5 * (log_det_regularized() - t * std::log(lambda_));
    }

    /// log det(K_t + lambda I), from the diagonal of the stored factor. The
    /// active jitter (if any) is inside the factor; that concession is what
    /// makes the quantity computable when K_t is numerically singular.
    [[nodiscard]] double log_det_regularized() const {
        double s = 0.0;
        for (int i = 0; i < count(); ++i) s += std::log(chol_(i, i));
        return 2.0 * s;
    }

  private:
    void grow(const Eigen::VectorXd& x, double y) {
        const int t = count();
        if (t == 0) {
            inputs_.resize(1, x.size());
            inputs_.row(0) = x.transpose();
            targets_.resize(1);
            targets_(0) = y;
        } else {
            inputs_.conservativeResize(t + 1, Eigen::NoChange);
            inputs_.row(t) = x.transpose();
            targets_.conservativeResize(t + 1);
            targets_(t) = y;
        }
    }

    void refit() {
        const int t = count();
        if (t == 0) {
            chol_.resize(0, 0);
            alpha_.resize(0);
            jitter_ = 0.0;
            return;
        }
        Eigen::MatrixXd k = gram(kernel_, inputs_);
        const double scale = k.diagonal().mean() + lambda_;
        detail::CholeskyReport rep;
        for (double rel : detail::kJitterLadder) {
            jitter_ = rel * scale;
            Eigen::MatrixXd a = k;
            a.diagonal().array() += lambda_ + jitter_;
            rep = detail::cholesky_lower(a, chol_);
            if (rep.ok) {
                recompute_alpha();
                return;
            }
        }
        throw NumericError("gp: Cholesky failed at pivot " + std::to_string(rep.pivot) +
                           " (value " + format_double(rep.pivot_value) +
                           ") after jitter escalation to 1e-6");
    }

    void recompute_alpha() {
        alpha_ = chol_.triangularView<Eigen::Lower>().solve(targets_);
        chol_.transpose().triangularView<Eigen::Upper>().solveInPlace(alpha_);
    }

    KernelSpec kernel_;
    double lambda_ = 1.0;
    double jitter_ = 0.0;
    Eigen::MatrixXd inputs_;   // t x m
    Eigen::VectorXd targets_;  // t
    Eigen::MatrixXd chol_;     // lower factor of K + (lambda + jitter) I
    Eigen::VectorXd alpha_;    // (K + lambda I)^-1 y
};

namespace detail {

/// Cross-kernel matrix between observed inputs (rows) and grid points (cols).
inline Eigen::MatrixXd cross_kernel(const KernelSpec& k, const Eigen::MatrixXd& inputs,
                                    const ActionGrid& grid) {
    Eigen::MatrixXd ks(inputs.rows(), grid.size());
    for (Eigen::Index i = 0; i < inputs.rows(); ++i) {
        for (int j = 0; j < grid.size(); ++j) {
            ks(i, j) = eval_kernel(k, inputs.row(i).transpose(), grid.point(j));
        }
    }
    return ks;
}

}  // namespace detail

/// Evaluates the posterior over the whole grid and forms lcb/ucb at scale
/// beta > 0. Variances are clamped to [0, k(x,x)] against round-off.
inline ConfidenceField confidence_field(const GpPosterior& post, const ActionGrid& grid,
                                        double beta) {
    if (!(beta > 0.0)) throw std::invalid_argument("confidence_field: beta must be > 0");
    const int n = grid.size();
    ConfidenceField cf;
    cf.beta = beta;
    cf.round = post.count();
    cf.mean.resize(n);
    cf.sd.resize(n);
    const KernelSpec& k = post.kernel();
    if (post.count() == 0) {
        for (int j = 0; j < n; ++j) {
            cf.mean(j) = 0.0;
            cf.sd(j) = std::sqrt(eval_kernel(k, grid.point(j), grid.point(j)));
        }
    } else {
        const Eigen::MatrixXd ks = detail::cross_kernel(k, post.inputs(), grid);
        const Eigen::MatrixXd v = post.chol().triangularView<Eigen::Lower>().solve(ks);
        cf.mean = ks.transpose() * post.alpha();
        for (int j = 0; j < n; ++j) {
            const double kxx = eval_kernel(k, grid.point(j), grid.point(j));
            double var = kxx - v.col(j).squaredNorm();
            var = std::min(std::max(var, 0.0), kxx);
            cf.sd(j) = std::sqrt(var);
        }
    }
    cf.lcb = cf.mean - beta * cf.sd;
    cf.ucb = cf.mean + beta * cf.sd;
    return cf;
}

/// Current beta under a schedule. In Theoretical mode the log-determinant
/// term is read off the posterior's stored factor when lambda matches the
/// posterior's ridge (log det((lbar/lambda) K + lbar I) = t log(lbar/lambda) +
/// log det(K + lambda I)); otherwise it is recomputed densely.
inline double beta_value(const BetaSchedule& sched, const GpPosterior& post, double lambda) {
    if (sched.mode == BetaSchedule::Mode::Fixed) return sched.value;
    if (!(lambda > 0.0)) throw std::invalid_argument("beta: lambda must be > 0");
    const double lbar = std::max(1.0, lambda);
    const int t = post.count();
    double logdet;
    if (lambda == post.lambda()) {
        logdet = t * std::log(lbar / lambda) + post.log_det_regularized();
    } else {
        if (t == 0) {
            logdet = 0.0;
        } else {
            Eigen::MatrixXd m = (lbar / lambda) * gram(post.kernel(), post.inputs());
            m.diagonal().array() += lbar;
            const double scale = m.diagonal().mean();
            Eigen::MatrixXd l;
            detail::CholeskyReport rep;
            for (double rel : detail::kJitterLadder) {
                Eigen::MatrixXd a = m;
                a.diagonal().array() += rel * scale;
                rep = detail::cholesky_lower(a, l);
                if (rep.ok) break;
            }
            if (!rep.ok) {
                throw NumericError("beta: log-det factorization failed at pivot " +
                                   std::to_string(rep.pivot));
            }
            logdet = 0.0;
            for (int i = 0; i < t; ++i) logdet += 2.0 * std::log(l(i, i));
        }
    }
    const double radicand = logdet + 2.0 * std::log(1.0 / sched.zeta);
    return sched.B + sched.R / std::sqrt(lambda) * std::sqrt(radicand);
}

/// One joint draw from the posterior over the grid. The normal vector is
/// drawn before factoring the posterior covariance, so the stream's
/// consumption never depends on how much jitter the factorization needs.
inline Eigen::VectorXd sample_posterior(const GpPosterior& post, const ActionGrid& grid,
                                        RngStream& rng) {
    const int n = grid.size();
    const Eigen::VectorXd z = rng.normal_vector(n);
    const KernelSpec& k = post.kernel();
    Eigen::MatrixXd cov = gram(k, grid.points());
    const double scale = cov.diagonal().mean();  // prior variances set the jitter scale
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
    if (post.count() > 0) {
        const Eigen::MatrixXd ks = detail::cross_kernel(k, post.inputs(), grid);
        // v = L^-1 Ks, so cov - v'v is the posterior covariance over the grid
        const Eigen::MatrixXd v = post.chol().triangularView<Eigen::Lower>().solve(ks);
        cov -= v.transpose() * v;
        mean = ks.transpose() * post.alpha();
    }
    Eigen::MatrixXd l;
    detail::CholeskyReport rep;
    for (double rel : detail::kJitterLadder) {
        if (rel == 0.0) continue;  // posterior covariance is routinely singular
        Eigen::MatrixXd a = cov;
        a.diagonal().array() += rel * scale;
        rep = detail::cholesky_lower(a, l);
        if (rep.ok) break;
    }
    if (!rep.ok) {
        throw NumericError("sample_posterior: covariance factorization failed at pivot " +
                           std::to_string(rep.pivot) + " after jitter escalation to 1e-6");
    }
    return mean + l * z;
}

}  // namespace rsopt
