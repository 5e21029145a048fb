#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace rsopt {

/// Positive-definite kernel on R^m. Lengthscales rescale the input
/// coordinatewise before the base form is applied: a single entry is shared
/// across dimensions, otherwise one entry per dimension (ARD).
struct KernelSpec {
    enum class Kind { Rbf, Matern, Polynomial, Linear };

    Kind kind = Kind::Rbf;
    double nu = 2.5;      // Matern smoothness; one of 1/2, 3/2, 5/2
    int degree = 2;       // polynomial
    double offset = 1.0;  // polynomial
    Eigen::VectorXd lengthscales = Eigen::VectorXd::Ones(1);
    double variance = 1.0;

    static KernelSpec rbf(Eigen::VectorXd lengthscales, double variance = 1.0) {
        KernelSpec s;
        s.kind = Kind::Rbf;
        s.lengthscales = std::move(lengthscales);
        s.variance = variance;
        s.validate();
        return s;
    }

    static KernelSpec matern(double nu, Eigen::VectorXd lengthscales, double variance = 1.0) {
        KernelSpec s;
        s.kind = Kind::Matern;
        s.nu = nu;
        s.lengthscales = std::move(lengthscales);
        s.variance = variance;
        s.validate();
        return s;
    }

    static KernelSpec polynomial(int degree, double offset, Eigen::VectorXd lengthscales,
                                 double variance = 1.0) {
        KernelSpec s;
        s.kind = Kind::Polynomial;
        s.degree = degree;
        s.offset = offset;
        s.lengthscales = std::move(lengthscales);
        s.variance = variance;
        s.validate();
        return s;
    }

    static KernelSpec linear(Eigen::VectorXd lengthscales, double variance = 1.0) {
        KernelSpec s;
        s.kind = Kind::Linear;
        s.lengthscales = std::move(lengthscales);
        s.variance = variance;
        s.validate();
        return s;
    }

    void validate() const {
        if (lengthscales.size() < 1) {
            throw std::invalid_argument("kernel: at least one lengthscale required");
        }
        for (Eigen::Index i = 0; i < lengthscales.size(); ++i) {
            if (!(lengthscales(i) > 0.0)) {
                throw std::invalid_argument("kernel: lengthscales must be positive");
            }
        }
        if (!(variance > 0.0)) throw std::invalid_argument("kernel: variance must be positive");
        if (kind == Kind::Matern && nu != 0.5 && nu != 1.5 && nu != 2.5) {
            throw std::invalid_argument("kernel: Matern nu must be one of 0.5, 1.5, 2.5");
        }
        if (kind == Kind::Polynomial) {
            if (degree < 1) throw std::invalid_argument("kernel: polynomial degree must be >= 1");
            if (!(offset >= 0.0)) throw std::invalid_argument("kernel: polynomial offset must be >= 0");
        }
    }
};

namespace detail {

/// Coordinatewise input scaling shared by all kernel forms.
inline Eigen::VectorXd scale_input(const KernelSpec& k, const Eigen::VectorXd& x) {
    if (k.lengthscales.size() == 1) return x / k.lengthscales(0);
    if (k.lengthscales.size() != x.size()) {
        throw std::invalid_argument("kernel: lengthscale count does not match input dimension");
    }
    return x.cwiseQuotient(k.lengthscales);
}

}  // namespace detail

/// k(x, y). Throws std::invalid_argument on dimension mismatch.
inline double eval_kernel(const KernelSpec& k, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    if (x.size() != y.size()) throw std::invalid_argument("eval_kernel: dimension mismatch");
    const Eigen::VectorXd xs = detail::scale_input(k, x);
    const Eigen::VectorXd ys = detail::scale_input(k, y);
    switch (k.kind) {
        case KernelSpec::Kind::Rbf: {
            const double r2 = (xs - ys).squaredNorm();
            return k.variance * std::exp(-0.5 * r2);
        }
        case KernelSpec::Kind::Matern: {
            const double r = (xs - ys).norm();
            if (k.nu == 0.5) {
                return k.variance * std::exp(-r);
            }
            if (k.nu == 1.5) {
                const double a = std::sqrt(3.0) * r;
                return k.variance * (1.0 + a) * std::exp(-a);
            }
            const double a = std::sqrt(5.0) * r;
            return k.variance * (1.0 + a + a * a / 3.0) * std::exp(-a);
        }
        case KernelSpec::Kind::Polynomial: {
            const double base = xs.dot(ys) + k.offset;
            return k.variance * std::pow(base, k.degree);
        }
        case KernelSpec::Kind::Linear:
            return k.variance * xs.dot(ys);
    }
    throw std::logic_error("eval_kernel: unreachable");
}

/// Canonical kernel-induced metric d(x, y) = sqrt(k(x,x) - 2 k(x,y) + k(y,y)),
/// with the radicand clamped at zero against round-off.
inline double kernel_metric(const KernelSpec& k, const Eigen::VectorXd& x,
                            const Eigen::VectorXd& y) {
    const double q = eval_kernel(k, x, x) - 2.0 * eval_kernel(k, x, y) + eval_kernel(k, y, y);
    return std::sqrt(std::max(0.0, q));
}

/// Gram matrix of a point set (rows of `points`). The upper triangle is
/// computed and mirrored, so the result is symmetric by construction.
inline Eigen::MatrixXd gram(const KernelSpec& k, const Eigen::MatrixXd& points) {
    const Eigen::Index n = points.rows();
    Eigen::MatrixXd g(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) {
            const double v = eval_kernel(k, points.row(i).transpose(), points.row(j).transpose());
            g(i, j) = v;
            g(j, i) = v;
        }
    }
    return g;
}

}  // namespace rsopt
