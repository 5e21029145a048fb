#pragma once

#include <cmath>
#include <compare>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "rsopt/common.hpp"

namespace rsopt {

/// A value in R ∪ {-inf, +inf} with an exact total order. Robustness measures
/// legitimately take infinite values (an infeasible action has fragility +inf,
/// critical radius -inf); this wrapper keeps those values first-class instead
/// of smuggling in "large" finite stand-ins. NaN is rejected at construction,
/// so comparisons are total.
class ExtendedReal {
  public:
    ExtendedReal() : v_(0.0) {}
    ExtendedReal(double v) : v_(v) {
        if (std::isnan(v)) throw std::invalid_argument("ExtendedReal: NaN is not a value");
    }

    static ExtendedReal pos_inf() { return ExtendedReal(std::numeric_limits<double>::infinity()); }
    static ExtendedReal neg_inf() { return ExtendedReal(-std::numeric_limits<double>::infinity()); }

    [[nodiscard]] bool is_finite() const { return std::isfinite(v_); }
    [[nodiscard]] bool is_pos_inf() const { return std::isinf(v_) && v_ > 0; }
    [[nodiscard]] bool is_neg_inf() const { return std::isinf(v_) && v_ < 0; }

    /// Underlying IEEE double (±inf for the infinite values).
    [[nodiscard]] double as_double() const { return v_; }

    /// Finite value; throws on ±inf.
    [[nodiscard]] double finite_value() const {
        if (!is_finite()) throw std::invalid_argument("ExtendedReal: value is not finite");
        return v_;
    }

    friend bool operator==(const ExtendedReal& a, const ExtendedReal& b) { return a.v_ == b.v_; }
    friend std::partial_ordering operator<=>(const ExtendedReal& a, const ExtendedReal& b) {
        return a.v_ <=> b.v_;  // total in practice: NaN cannot be constructed
    }

    /// CSV literal: "inf", "-inf", or the shortest round-trip decimal.
    [[nodiscard]] std::string to_string() const {
        if (is_pos_inf()) return "inf";
        if (is_neg_inf()) return "-inf";
        return format_double(v_);
    }

    static ExtendedReal from_string(const std::string& s) {
        if (s == "inf") return pos_inf();
        if (s == "-inf") return neg_inf();
        return ExtendedReal(parse_double(s));
    }

  private:
    double v_;
};

/// Index of the minimum, smallest index winning ties. This tie rule is used
/// for every argmin/argmax in the library so that runs are reproducible.
inline std::size_t argmin_index(const std::vector<ExtendedReal>& v) {
    if (v.empty()) throw std::invalid_argument("argmin_index: empty range");
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] < v[best]) best = i;
    }
    return best;
}

inline std::size_t argmax_index(const std::vector<ExtendedReal>& v) {
    if (v.empty()) throw std::invalid_argument("argmax_index: empty range");
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[best]) best = i;
    }
    return best;
}

}  // namespace rsopt
