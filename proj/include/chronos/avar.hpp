#pragma once

#include <string>
#include <vector>

#include "chronos/clock.hpp"

namespace chronos {

enum class AvarKind { analytical_free, analytical_mean, statistical };

struct AvarPoint {
    double tau = 0.0;
    double avar = 0.0;
};

struct AvarCurve {
    std::string entity;
    AvarKind kind = AvarKind::statistical;
    std::vector<AvarPoint> points; // taus strictly increasing
};

/// Free-running two-state clock: sigma1^2 / tau + tau sigma2^2 / 3.
double avar_analytical(const ClockParams& params, double tau);

/// Ensemble-mean clock: (1/tau^2) q^T (tau Sigma1 + tau^3/3 Sigma2) q with
/// weights summing to one.
double avar_ensemble_mean(const std::vector<ClockParams>& params, double tau,
                          const std::vector<double>& q);

/// Fully overlapping two-sample variance of a phase-deviation series sampled
/// every tau seconds, at averaging time w * tau.
double avar_statistical(const std::vector<double>& d, double tau, int w);

/// Analytical curve over a tau grid.
AvarCurve avar_curve_analytical(const ClockParams& params, const std::vector<double>& taus,
                                const std::string& entity);

AvarCurve avar_curve_ensemble_mean(const std::vector<ClockParams>& params,
                                   const std::vector<double>& taus, const std::vector<double>& q,
                                   const std::string& entity);

/// Statistical curve; every requested tau must be an integer multiple of the
/// sampling period (throws NonIntegerWindow otherwise).
AvarCurve avar_curve_statistical(const std::vector<double>& d, double tau_sample,
                                 const std::vector<double>& taus, const std::string& entity);

} // namespace chronos
