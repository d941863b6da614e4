#include "chronos/clock.hpp"

#include "chronos/numerics.hpp"

namespace chronos {

Eigen::Matrix2d clock_a(double tau) {
    Eigen::Matrix2d a;
    a << 1.0, tau, 0.0, 1.0;
    return a;
}

Eigen::Vector2d clock_b(double tau) { return Eigen::Vector2d(tau, 1.0); }

Eigen::RowVector2d clock_c() { return Eigen::RowVector2d(1.0, 0.0); }

Eigen::Matrix2d process_noise_cov(const ClockParams& params, double tau) {
    if (tau <= 0.0) throw InvalidTau("process_noise_cov: tau must be positive");
    const double s1 = params.sigma1_sq;
    const double s2 = params.sigma2_sq;
    Eigen::Matrix2d q;
    q << tau * s1 + tau * tau * tau * s2 / 3.0, tau * tau * s2 / 2.0,
         tau * tau * s2 / 2.0, tau * s2;
    return q;
}

ClockState step_clock(const ClockState& state, double u, const Eigen::Vector2d& v, double tau) {
    if (tau <= 0.0) throw InvalidTau("step_clock: tau must be positive");
    ClockState next;
    next.phase_dev = state.phase_dev + tau * state.freq_dev + tau * u + v[0];
    next.freq_dev = state.freq_dev + u + v[1];
    return next;
}

Eigen::Vector2d sample_process_noise(const ClockParams& params, double tau, Rng& rng) {
    const Mat l = psd_factor(process_noise_cov(params, tau));
    return l * rng.normal2();
}

} // namespace chronos
