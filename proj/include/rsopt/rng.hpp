#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>

namespace rsopt {

namespace detail {
/// splitmix64 finalizer; used only to derive stream seeds.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}
}  // namespace detail

/// The distinct random-number roles inside one replication. Keeping each role
/// on its own stream means e.g. changing the attack never perturbs the
/// learner's observation noise.
enum class StreamRole : std::uint64_t {
    Truth = 1,      // sampling a ground-truth field from the prior
    Policy = 2,     // policy-internal randomness (Thompson draws)
    Adversary = 3,  // attack randomness
    Noise = 4,      // observation noise
};

/// Seed for the (master, replication, role) stream: counter-based splitting,
/// never sequential reseeding, so streams are independent of evaluation order.
inline std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t replication,
                                        StreamRole role) {
    std::uint64_t h = detail::mix64(master);
    h = detail::mix64(h ^ (0x8000000000000000ull | replication));
    h = detail::mix64(h ^ static_cast<std::uint64_t>(role));
    return h;
}

/// A deterministic random stream. The raw generator is std::mt19937_64, but
/// every distribution on top of it is hand-rolled because the standard library
/// leaves <random> distribution algorithms implementation-defined and this
/// library promises byte-identical output across toolchains.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) : gen_(seed) {}

    RngStream(std::uint64_t master, std::uint64_t replication, StreamRole role)
        : gen_(derive_stream_seed(master, replication, role)) {}

    /// Uniform on [0, 1): top 53 bits of one 64-bit draw.
    double uniform01() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller. Computes a fresh pair each call and
    /// discards the partner: slightly wasteful, but keeps the draw count a
    /// pure function of the call count.
    double normal() {
        double u1 = 1.0 - uniform01();  // (0, 1]: keeps log() finite
        double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    Eigen::VectorXd normal_vector(Eigen::Index n) {
        Eigen::VectorXd v(n);
        for (Eigen::Index i = 0; i < n; ++i) v(i) = normal();
        return v;
    }

    /// Uniform integer in [0, n) by rejection sampling (unbiased).
    std::uint64_t uniform_below(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("uniform_below: n must be positive");
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return x % n;
    }

  private:
    std::mt19937_64 gen_;
};

}  // namespace rsopt
