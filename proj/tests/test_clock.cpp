#include <doctest.h>

#include <cmath>

#include "chronos/clock.hpp"
#include "chronos/numerics.hpp"

using namespace chronos;

TEST_CASE("process noise covariance") {
    SUBCASE("white frequency noise only") {
        const Eigen::Matrix2d q = process_noise_cov({1.0, 0.0}, 1.0);
        Eigen::Matrix2d expected;
        expected << 1, 0, 0, 0;
        CHECK(q.isApprox(expected));
    }
    SUBCASE("random-walk noise only") {
        const Eigen::Matrix2d q = process_noise_cov({0.0, 3.0}, 1.0);
        Eigen::Matrix2d expected;
        expected << 1.0, 1.5, 1.5, 3.0;
        CHECK(q.isApprox(expected));
    }
    SUBCASE("cesium clock 1 values") {
        const Eigen::Matrix2d q = process_noise_cov({0.0289e-18, 0.0227e-24}, 1.0);
        CHECK(q(0, 0) == doctest::Approx(0.0289e-18 + 0.0227e-24 / 3.0).epsilon(1e-12));
        CHECK(q(0, 1) == doctest::Approx(0.01135e-24).epsilon(1e-12));
        CHECK(q(1, 0) == doctest::Approx(0.01135e-24).epsilon(1e-12));
        CHECK(q(1, 1) == doctest::Approx(0.0227e-24).epsilon(1e-12));
    }
    SUBCASE("tau must be positive") {
        CHECK_THROWS_AS(process_noise_cov({1.0, 1.0}, 0.0), InvalidTau);
        CHECK_THROWS_AS(process_noise_cov({1.0, 1.0}, -1.0), InvalidTau);
    }
    SUBCASE("PSD for a sweep of parameters") {
        for (double s1 : {0.0, 1e-20, 1e-18})
            for (double s2 : {0.0, 1e-26, 1e-24})
                for (double tau : {0.5, 1.0, 10.0}) {
                    const Eigen::Matrix2d q = process_noise_cov({s1, s2}, tau);
                    CHECK(q.determinant() >= -1e-80);
                    CHECK(q(0, 0) >= 0.0);
                }
    }
}

TEST_CASE("step_clock") {
    CHECK(step_clock({0, 0}, 0.0, Eigen::Vector2d::Zero(), 1.0).phase_dev == 0.0);

    const ClockState drift = step_clock({0.0, 1e-12}, 0.0, Eigen::Vector2d::Zero(), 1.0);
    CHECK(drift.phase_dev == doctest::Approx(1e-12));
    CHECK(drift.freq_dev == doctest::Approx(1e-12));

    const ClockState steered = step_clock({0.0, 0.0}, 2e-13, Eigen::Vector2d::Zero(), 1.0);
    CHECK(steered.phase_dev == doctest::Approx(2e-13));
    CHECK(steered.freq_dev == doctest::Approx(2e-13));
}

TEST_CASE("sample_process_noise") {
    SUBCASE("noiseless clock draws zero") {
        Rng rng(1);
        const Eigen::Vector2d v = sample_process_noise({0.0, 0.0}, 1.0, rng);
        CHECK(v.norm() == 0.0);
    }
    SUBCASE("fixed seed reproduces the sequence") {
        Rng a(123), b(123);
        for (int i = 0; i < 20; ++i) {
            const Eigen::Vector2d va = sample_process_noise({1e-18, 1e-24}, 1.0, a);
            const Eigen::Vector2d vb = sample_process_noise({1e-18, 1e-24}, 1.0, b);
            CHECK(va == vb);
        }
    }
}

TEST_SUITE("stat") {
    TEST_CASE("sample covariance matches the model covariance") {
        const ClockParams params{2.0, 1.5};
        const Eigen::Matrix2d q = process_noise_cov(params, 1.0);
        Rng rng(99);
        Eigen::Matrix2d acc = Eigen::Matrix2d::Zero();
        const int draws = 1000000;
        for (int i = 0; i < draws; ++i) {
            const Eigen::Vector2d v = sample_process_noise(params, 1.0, rng);
            acc += v * v.transpose();
        }
        acc /= draws;
        const double qmax = q.cwiseAbs().maxCoeff();
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                if (std::abs(q(i, j)) >= 0.1 * qmax)
                    CHECK(acc(i, j) == doctest::Approx(q(i, j)).epsilon(0.01));
    }

    TEST_CASE("free-running phase variance follows the closed form") {
        const ClockParams params{0.0289e-18, 0.0227e-24};
        const double tau = 1.0;
        const long t_end = 10000;
        const int reps = 500;
        double sum = 0.0, sumsq = 0.0;
        for (int r = 0; r < reps; ++r) {
            Rng rng(1000 + r);
            ClockState s{0.0, 0.0};
            for (long k = 0; k < t_end; ++k)
                s = step_clock(s, 0.0, sample_process_noise(params, tau, rng), tau);
            sum += s.phase_dev;
            sumsq += s.phase_dev * s.phase_dev;
        }
        const double var = (sumsq - sum * sum / reps) / (reps - 1);
        const double t = static_cast<double>(t_end);
        const double expected =
            tau * params.sigma1_sq * t +
            params.sigma2_sq * tau * tau * tau * t * (t - 1.0) * (2.0 * t - 1.0) / 6.0;
        CHECK(var == doctest::Approx(expected).epsilon(0.15));
    }
}
