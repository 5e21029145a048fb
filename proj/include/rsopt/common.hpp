#pragma once

#include <charconv>
#include <stdexcept>
#include <string>
#include <system_error>

namespace rsopt {

inline constexpr const char* kVersion = "0.1.0";

/// Numeric degeneracy (e.g. a factorization that fails after jitter escalation).
class NumericError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent configuration input.
class ConfigError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Request exceeds a configured memory/size budget.
class ResourceError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Degenerate geometry (e.g. an action with no positive-distance neighbor).
class GeometryError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Shortest round-trip decimal representation of a double. Used for all CSV
/// output so that repeated runs produce byte-identical files.
inline std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw ConfigError("cannot parse number: '" + s + "'");
    }
    return v;
}

}  // namespace rsopt
