#include "chronos/avar.hpp"

#include <cmath>

#include "chronos/errors.hpp"

namespace chronos {

double avar_analytical(const ClockParams& params, double tau) {
    if (tau <= 0.0) throw InvalidTau("avar_analytical: tau must be positive");
    return params.sigma1_sq / tau + tau * params.sigma2_sq / 3.0;
}

double avar_ensemble_mean(const std::vector<ClockParams>& params, double tau,
                          const std::vector<double>& q) {
    if (tau <= 0.0) throw InvalidTau("avar_ensemble_mean: tau must be positive");
    if (params.size() != q.size())
        throw DimensionMismatch("avar_ensemble_mean: weight count must match clock count");
    double sum = 0.0;
    for (double w : q) sum += w;
    if (std::abs(sum - 1.0) > 1e-9)
        throw WeightsNotNormalized("avar_ensemble_mean: weights must sum to one");
    double acc = 0.0;
    for (size_t i = 0; i < params.size(); ++i)
        acc += q[i] * q[i] *
               (tau * params[i].sigma1_sq + tau * tau * tau * params[i].sigma2_sq / 3.0);
    return acc / (tau * tau);
}

double avar_statistical(const std::vector<double>& d, double tau, int w) {
    if (tau <= 0.0) throw InvalidTau("avar_statistical: tau must be positive");
    const long t = static_cast<long>(d.size());
    if (w < 1 || t <= 2 * w)
        throw SeriesTooShort("avar_statistical: need series length above twice the window");
    const long terms = t - 2 * w;
    double acc = 0.0;
    for (long k = 0; k < terms; ++k) {
        const double dd = d[k + 2 * w] - 2.0 * d[k + w] + d[k];
        acc += dd * dd;
    }
    const double wt = w * tau;
    return acc / (static_cast<double>(terms) * 2.0 * wt * wt);
}

namespace {

void check_taus(const std::vector<double>& taus) {
    for (size_t i = 1; i < taus.size(); ++i)
        if (taus[i] <= taus[i - 1]) throw InvalidTau("avar curve: taus must be strictly increasing");
}

} // namespace

AvarCurve avar_curve_analytical(const ClockParams& params, const std::vector<double>& taus,
                                const std::string& entity) {
    check_taus(taus);
    AvarCurve c;
    c.entity = entity;
    c.kind = AvarKind::analytical_free;
    for (double tau : taus) c.points.push_back({tau, avar_analytical(params, tau)});
    return c;
}

AvarCurve avar_curve_ensemble_mean(const std::vector<ClockParams>& params,
                                   const std::vector<double>& taus, const std::vector<double>& q,
                                   const std::string& entity) {
    check_taus(taus);
    AvarCurve c;
    c.entity = entity;
    c.kind = AvarKind::analytical_mean;
    for (double tau : taus) c.points.push_back({tau, avar_ensemble_mean(params, tau, q)});
    return c;
}

AvarCurve avar_curve_statistical(const std::vector<double>& d, double tau_sample,
                                 const std::vector<double>& taus, const std::string& entity) {
    check_taus(taus);
    AvarCurve c;
    c.entity = entity;
    c.kind = AvarKind::statistical;
    for (double tau : taus) {
        const double ratio = tau / tau_sample;
        const long w = std::lround(ratio);
        if (w < 1 || std::abs(ratio - static_cast<double>(w)) > 1e-9)
            throw NonIntegerWindow("avar curve: tau must be an integer multiple of the sample period");
        c.points.push_back({tau, avar_statistical(d, tau_sample, static_cast<int>(w))});
    }
    return c;
}

} // namespace chronos
