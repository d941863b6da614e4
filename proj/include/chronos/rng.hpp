#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace chronos {

/// Seeded pseudo-random source for simulation noise.
///
/// Gaussian draws use an explicit Box-Muller transform (two engine draws
/// per normal, no cached spare) so a given seed reproduces the exact same
/// sequence regardless of standard-library internals and call pattern.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    /// Uniform in (0, 1].
    double uniform_pos() {
        return static_cast<double>((eng_() >> 11) + 1) * 0x1.0p-53;
    }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    /// Standard normal.
    double normal() {
        const double u1 = uniform_pos();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    Eigen::Vector2d normal2() {
        Eigen::Vector2d v;
        v[0] = normal();
        v[1] = normal();
        return v;
    }

private:
    std::mt19937_64 eng_;
};

} // namespace chronos
