#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rsopt/common.hpp"
#include "rsopt/io.hpp"
#include "rsopt/kernels.hpp"

namespace rsopt {

enum class MetricKind { Euclidean, Kernel };

/// Distance declaration for a grid: plain Euclidean, or the canonical metric
/// induced by a kernel. Learner and adversary always share this one metric.
struct GridMetric {
    MetricKind kind = MetricKind::Euclidean;
    std::optional<KernelSpec> kernel;  // required iff kind == Kernel

    static GridMetric euclidean() { return GridMetric{}; }
    static GridMetric kernel_induced(KernelSpec k) {
        return GridMetric{MetricKind::Kernel, std::move(k)};
    }
};

/// Closed perturbation ball around a grid point: every member j satisfies
/// d(center, j) <= radius. Member indices are sorted ascending.
struct AmbiguityBall {
    int center = 0;
    double radius = 0.0;  // may be +inf
    std::vector<int> members;
};

inline constexpr int kDefaultMaxGridPoints = 4096;

/// Finite action set with a dense precomputed distance matrix. Dense O(N^2)
/// storage is deliberate: every robustness computation downstream needs
/// all-pairs distances, and the supported scale is desk-sized.
class ActionGrid {
  public:
    /// Uniform lattice over a box, row-major (first dimension slowest).
    /// Each dimension needs resolution >= 2 and hi > lo.
    static ActionGrid lattice(const std::vector<std::array<double, 2>>& bounds,
                              const std::vector<int>& resolution, GridMetric metric,
                              int max_points = kDefaultMaxGridPoints) {
        const std::size_t m = bounds.size();
        if (m == 0) throw std::invalid_argument("lattice: at least one dimension required");
        if (resolution.size() != m) {
            throw std::invalid_argument("lattice: one resolution per dimension required");
        }
        std::int64_t total = 1;
        for (std::size_t d = 0; d < m; ++d) {
            if (!(bounds[d][1] > bounds[d][0])) {
                throw std::invalid_argument("lattice: bounds must satisfy hi > lo");
            }
            if (resolution[d] < 2) {
                throw std::invalid_argument("lattice: resolution must be >= 2 per dimension");
            }
            total *= resolution[d];
            if (total > (1 << 24)) break;  // avoid overflow before the budget check
        }
        if (total > max_points) {
            throw ResourceError("lattice: " + std::to_string(total) +
                                " points exceeds the budget of " + std::to_string(max_points));
        }
        const auto n = static_cast<Eigen::Index>(total);
        Eigen::MatrixXd pts(n, static_cast<Eigen::Index>(m));
        std::vector<int> idx(m, 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (std::size_t d = 0; d < m; ++d) {
                const double lo = bounds[d][0], hi = bounds[d][1];
                pts(i, static_cast<Eigen::Index>(d)) =
                    lo + (hi - lo) * idx[d] / (resolution[d] - 1);
            }
            for (std::size_t d = m; d-- > 0;) {  // row-major: last dimension fastest
                if (++idx[d] < resolution[d]) break;
                idx[d] = 0;
            }
        }
        return ActionGrid(std::move(pts), std::move(metric));
    }

    /// Explicit point list (rows of `points`).
    static ActionGrid from_points(Eigen::MatrixXd points, GridMetric metric,
                                  int max_points = kDefaultMaxGridPoints) {
        if (points.rows() > max_points) {
            throw ResourceError("grid: " + std::to_string(points.rows()) +
                                " points exceeds the budget of " + std::to_string(max_points));
        }
        return ActionGrid(std::move(points), std::move(metric));
    }

    /// Explicit point list from a numeric CSV (one row per point, one column
    /// per coordinate; an optional header line is skipped).
    static ActionGrid from_csv(const std::string& path, GridMetric metric,
                               int max_points = kDefaultMaxGridPoints) {
        const auto rows = io::read_numeric_csv(path);
        if (rows.empty()) throw ConfigError("grid csv is empty: " + path);
        const std::size_t m = rows[0].size();
        Eigen::MatrixXd pts(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(m));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != m) throw ConfigError("grid csv has ragged rows: " + path);
            for (std::size_t d = 0; d < m; ++d) {
                pts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = rows[i][d];
            }
        }
        return from_points(std::move(pts), std::move(metric), max_points);
    }

    [[nodiscard]] int size() const { return static_cast<int>(points_.rows()); }
    [[nodiscard]] int dim() const { return static_cast<int>(points_.cols()); }
    [[nodiscard]] const Eigen::MatrixXd& points() const { return points_; }
    [[nodiscard]] Eigen::VectorXd point(int i) const { return points_.row(check(i)).transpose(); }
    [[nodiscard]] const GridMetric& metric() const { return metric_; }

    [[nodiscard]] double dist(int i, int j) const { return dist_(check(i), check(j)); }
    [[nodiscard]] const Eigen::MatrixXd& dist_matrix() const { return dist_; }

    /// Largest pairwise distance on the grid.
    [[nodiscard]] double diameter() const { return diameter_; }

    /// Indices 0..N-1 ordered by (distance from i, index). Shared by ball
    /// queries and radius scans.
    [[nodiscard]] const std::vector<int>& neighbors_by_distance(int i) const {
        return order_[static_cast<std::size_t>(check(i))];
    }

    /// Closed ball of radius eps around a grid point. eps = +inf covers the
    /// whole grid; eps < 0 or NaN is invalid. The center (distance 0) is
    /// always a member.
    [[nodiscard]] AmbiguityBall ball(int center, double eps) const {
        check(center);
        if (std::isnan(eps) || eps < 0.0) {
            throw std::invalid_argument("ball: radius must be >= 0");
        }
        AmbiguityBall b;
        b.center = center;
        b.radius = eps;
        const auto& order = order_[static_cast<std::size_t>(center)];
        for (int j : order) {
            if (dist_(center, j) > eps) break;
            b.members.push_back(j);
        }
        std::sort(b.members.begin(), b.members.end());
        return b;
    }

    /// Test hook: deliberately corrupt one distance entry (asymmetrically) so
    /// the verification suite has something to catch. Never used by the
    /// library itself.
    void corrupt_distance_for_testing() {
        if (size() < 2) return;
        dist_(0, size() - 1) += 0.1 * (diameter_ > 0 ? diameter_ : 1.0);
    }

  private:
    ActionGrid(Eigen::MatrixXd points, GridMetric metric)
        : points_(std::move(points)), metric_(std::move(metric)) {
        const Eigen::Index n = points_.rows();
        if (n < 2) throw std::invalid_argument("grid: at least two points required");
        if (points_.cols() < 1) throw std::invalid_argument("grid: at least one dimension required");
        if (metric_.kind == MetricKind::Kernel) {
            if (!metric_.kernel) {
                throw std::invalid_argument("grid: kernel metric requires a kernel spec");
            }
            metric_.kernel->validate();
        }
        dist_.resize(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            dist_(i, i) = 0.0;
            for (Eigen::Index j = i + 1; j < n; ++j) {
                double d;
                if (metric_.kind == MetricKind::Euclidean) {
                    d = (points_.row(i) - points_.row(j)).norm();
                } else {
                    d = kernel_metric(*metric_.kernel, points_.row(i).transpose(),
                                      points_.row(j).transpose());
                }
                dist_(i, j) = d;
                dist_(j, i) = d;
            }
        }
        diameter_ = dist_.maxCoeff();
        order_.resize(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i) {
            auto& ord = order_[static_cast<std::size_t>(i)];
            ord.resize(static_cast<std::size_t>(n));
            std::iota(ord.begin(), ord.end(), 0);
            std::sort(ord.begin(), ord.end(), [&](int a, int b) {
                const double da = dist_(i, a), db = dist_(i, b);
                if (da != db) return da < db;
                return a < b;
            });
        }
    }

    int check(int i) const {
        if (i < 0 || i >= size()) throw std::invalid_argument("grid: index out of range");
        return i;
    }

    Eigen::MatrixXd points_;
    GridMetric metric_;
    Eigen::MatrixXd dist_;
    std::vector<std::vector<int>> order_;
    double diameter_ = 0.0;
};

}  // namespace rsopt
