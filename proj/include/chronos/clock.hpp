#pragma once

#include <Eigen/Dense>

#include "chronos/errors.hpp"
#include "chronos/rng.hpp"

namespace chronos {

/// Noise intensities of one two-state clock: variance of white frequency
/// noise (sigma1_sq) and of random-walk frequency noise (sigma2_sq).
struct ClockParams {
    double sigma1_sq = 0.0;
    double sigma2_sq = 0.0;
};

/// Deviation state of one clock: phase deviation in seconds and
/// dimensionless fractional frequency deviation.
struct ClockState {
    double phase_dev = 0.0;
    double freq_dev = 0.0;
};

/// A clock embedded in a GNSS receiver: its own noise intensities plus the
/// mean initial phase offset against GNSS time.
struct GnssClockParams {
    ClockParams params;
    double theta0 = 0.0;
};

/// State transition [[1, tau], [0, 1]].
Eigen::Matrix2d clock_a(double tau);

/// Input map [tau, 1]^T: a frequency-steering input feeds the phase through
/// tau and adds directly to the frequency state.
Eigen::Vector2d clock_b(double tau);

/// Phase read-out [1, 0].
Eigen::RowVector2d clock_c();

/// Process noise covariance over one sampling period:
/// [[tau*s1 + tau^3*s2/3, tau^2*s2/2], [tau^2*s2/2, tau*s2]].
Eigen::Matrix2d process_noise_cov(const ClockParams& params, double tau);

/// One step of x[k+1] = A x[k] + B u[k] + v[k].
ClockState step_clock(const ClockState& state, double u, const Eigen::Vector2d& v, double tau);

/// Draw v = L xi with L L^T = process_noise_cov and xi two iid standard
/// normals from the supplied generator.
Eigen::Vector2d sample_process_noise(const ClockParams& params, double tau, Rng& rng);

} // namespace chronos
