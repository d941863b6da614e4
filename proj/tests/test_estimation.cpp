#include <doctest.h>

#include <cmath>
#include <random>

#include "chronos/estimation.hpp"
#include "chronos/sim.hpp"
#include "fixtures.hpp"

using namespace chronos;

namespace {

Topology two_clocks() { return build_topology(2, 1, {{0, 1}}, {{0, 0}}); }

} // namespace

TEST_CASE("design_edge_filter") {
    SUBCASE("zero process noise gives a dead filter") {
        const Topology t = two_clocks();
        const EdgeFilter f =
            design_edge_filter(t, 0, Mat::Zero(4, 4), Mat::Identity(1, 1), 1.0);
        CHECK(f.P.cwiseAbs().maxCoeff() < 1e-15);
        CHECK(f.gain.cwiseAbs().maxCoeff() < 1e-15);
    }
    SUBCASE("reference scenario node 2 has a Schur-stable error matrix") {
        const Scenario sc = fixtures::reference_scenario();
        const Mat q = fixtures::ensemble_q(sc);
        const EdgeFilter f =
            design_edge_filter(sc.topo, 1, q, sc.R.block(1, 1, 2, 2), sc.tau);
        REQUIRE(f.m == 2);
        const Mat err = f.A - f.gain * f.C;
        CHECK(spectral_radius(err) < 1.0);
        CHECK((f.P - f.P.transpose()).cwiseAbs().maxCoeff() <
              1e-10 * f.P.cwiseAbs().maxCoeff());
    }
    SUBCASE("single edge collapses to the generic scalar-system fixed point") {
        const Topology t = two_clocks();
        const ClockParams clock1{2.89e-20, 2.27e-26};
        const Mat q = stacked_process_cov({clock1, clock1}, 1.0);
        Mat r(1, 1);
        r << 1.895e-29;
        const EdgeFilter f = design_edge_filter(t, 0, q, r, 1.0);

        const Mat qbar = 2.0 * process_noise_cov(clock1, 1.0);
        const DareSolution direct =
            solve_dare(Mat(clock_a(1.0)), Mat(clock_c()), qbar, r);
        CHECK((f.P - direct.P).cwiseAbs().maxCoeff() < 1e-12 * direct.P.cwiseAbs().maxCoeff());
        CHECK((f.gain - direct.H).cwiseAbs().maxCoeff() < 1e-9 * direct.H.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("edge_filter_step") {
    const Topology t = two_clocks();
    const Mat q = stacked_process_cov({{1e-18, 1e-24}, {1e-18, 1e-24}}, 1.0);
    Mat r(1, 1);
    r << 1e-20;
    EdgeFilter f = design_edge_filter(t, 0, q, r, 1.0);

    SUBCASE("all-zero inputs stay zero") {
        f.step(Vec::Zero(1), Vec::Zero(2));
        CHECK(f.estimate.norm() == 0.0);
    }
    SUBCASE("zero gain degenerates to pure propagation") {
        f.gain.setZero();
        f.estimate << 1.0, 0.5;
        Vec input(2);
        input << 0.1, 0.2;
        f.step(Vec::Constant(1, 123.0), input);
        CHECK(f.estimate[0] == doctest::Approx(1.0 + 0.5 + 0.1));
        CHECK(f.estimate[1] == doctest::Approx(0.5 + 0.2));
    }
    SUBCASE("dimension mismatch is rejected") {
        CHECK_THROWS_AS(f.step(Vec::Zero(3), Vec::Zero(2)), DimensionMismatch);
        CHECK_THROWS_AS(f.step(Vec::Zero(1), Vec::Zero(5)), DimensionMismatch);
    }
}

TEST_SUITE("stat") {
    TEST_CASE("edge filter error shrinks in expectation") {
        const Topology t = two_clocks();
        const ClockParams params{1e-18, 1e-24};
        const Mat q = stacked_process_cov({params, params}, 1.0);
        Mat r(1, 1);
        r << 1e-22;
        const Mat qbar = 2.0 * process_noise_cov(params, 1.0);
        const Mat l = psd_factor(qbar);
        const Eigen::Matrix2d a = clock_a(1.0);

        double start_err = 0.0, end_err = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            EdgeFilter f = design_edge_filter(t, 0, q, r, 1.0);
            Rng rng(500 + trial);
            Eigen::Vector2d xi(1e-9, 1e-12); // true edge state, filter starts at zero
            start_err += (xi - Eigen::Vector2d(f.estimate)).norm();
            for (int k = 0; k < 100; ++k) {
                const double y = xi[0] + std::sqrt(r(0, 0)) * rng.normal();
                f.step(Vec::Constant(1, y), Vec::Zero(2));
                xi = a * xi + l * rng.normal2();
            }
            end_err += (xi - Eigen::Vector2d(f.estimate)).norm();
        }
        CHECK(end_err < 0.5 * start_err);
    }
}

TEST_CASE("design_supervisor_filter") {
    const Scenario sc = fixtures::reference_scenario();

    SUBCASE("zero process noise gives a dead filter") {
        const SupervisorFilter f = design_supervisor_filter(
            sc.topo, Mat::Zero(6, 6), Mat::Zero(4, 4), sc.R_G, sc.tau);
        CHECK(f.P.cwiseAbs().maxCoeff() < 1e-15);
        CHECK(f.gain.cwiseAbs().maxCoeff() < 1e-15);
    }
    SUBCASE("reference scenario error matrix is Schur stable") {
        const SupervisorFilter f = design_supervisor_filter(
            sc.topo, fixtures::ensemble_q(sc), fixtures::gnss_q(sc), sc.R_G, sc.tau);
        const Eigen::Matrix2d err =
            f.A * (Eigen::Matrix2d::Identity() + f.g * f.gain * clock_c());
        CHECK(spectral_radius(err) < 1.0);
        // Qbar_G assembles the averaged process covariances
        const Mat qt2 = kron(sc.topo.q.transpose(), Mat::Identity(2, 2));
        const Mat qgt2 = kron(sc.topo.q_G.transpose(), Mat::Identity(2, 2));
        const Mat expected = qt2 * fixtures::ensemble_q(sc) * qt2.transpose() +
                             qgt2 * fixtures::gnss_q(sc) * qgt2.transpose();
        CHECK((f.Qbar_G - expected).cwiseAbs().maxCoeff() < 1e-12 * expected.cwiseAbs().maxCoeff());
        CHECK(f.Rbar_G == doctest::Approx(sc.R_G.sum()));
    }
    SUBCASE("single receiver matches the sign-flipped standard filter") {
        const Topology t = two_clocks();
        const ClockParams params{1e-18, 1e-24};
        const Mat q = stacked_process_cov({params, params}, 1.0);
        const Mat qg = stacked_process_cov({{1e-22, 1e-28}}, 1.0);
        Mat rg(1, 1);
        rg << 1e-17;
        const SupervisorFilter f = design_supervisor_filter(t, q, qg, rg, 1.0);

        const Mat qbar = f.Qbar_G;
        const DareSolution plus = solve_dare(Mat(clock_a(1.0)), Mat(clock_c()), qbar, rg);
        CHECK((f.P - plus.P).cwiseAbs().maxCoeff() < 1e-9 * plus.P.cwiseAbs().maxCoeff());
        // gain flips sign with the measurement matrix
        const Eigen::Vector2d href = Eigen::Vector2d(plus.H) ;
        const Eigen::Vector2d got = clock_a(1.0) * f.gain;
        CHECK((got + href).cwiseAbs().maxCoeff() < 1e-9 * href.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("supervisor_filter_step") {
    const Scenario sc = fixtures::reference_scenario();
    SupervisorFilter f = design_supervisor_filter(sc.topo, fixtures::ensemble_q(sc),
                                                  fixtures::gnss_q(sc), sc.R_G, sc.tau);
    const int m = sc.topo.edge_count();

    SUBCASE("all-zero inputs stay zero") {
        f.step(0.0, Vec::Zero(2 * m), Vec::Zero(3));
        CHECK(f.estimate.norm() == 0.0);
    }
    SUBCASE("consistent measurement cancels the innovation") {
        f.estimate << 1.0, 0.0;
        f.step(-static_cast<double>(f.g) * 1.0, Vec::Zero(2 * m), Vec::Zero(3));
        CHECK(f.estimate[0] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(f.estimate[1] == doctest::Approx(0.0));
    }
    SUBCASE("linear in every argument") {
        std::mt19937 gen(8);
        std::normal_distribution<double> dist;
        auto step_from_zero = [&](double ybar, const Vec& xi, const Vec& u) {
            f.estimate.setZero();
            f.step(ybar, xi, u);
            return Eigen::Vector2d(f.estimate);
        };
        Vec xi1(2 * m), xi2(2 * m), u1(3), u2(3);
        for (int i = 0; i < 2 * m; ++i) {
            xi1[i] = dist(gen);
            xi2[i] = dist(gen);
        }
        for (int i = 0; i < 3; ++i) {
            u1[i] = dist(gen);
            u2[i] = dist(gen);
        }
        const double y1 = dist(gen), y2 = dist(gen);
        const Eigen::Vector2d lhs = step_from_zero(2.0 * y1 + 3.0 * y2, 2.0 * xi1 + 3.0 * xi2,
                                                   2.0 * u1 + 3.0 * u2);
        const Eigen::Vector2d rhs = 2.0 * step_from_zero(y1, xi1, u1) +
                                    3.0 * step_from_zero(y2, xi2, u2);
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12 * rhs.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("summed measurement and its model") {
    CHECK(summed_measurement(Vec::Zero(2)) == 0.0);
    Vec y(2);
    y << 1e-9, -3e-9;
    CHECK(summed_measurement(y) == doctest::Approx(-2e-9));

    // noise-free: 1^T (V_G (x) C) [x; X] = -g C ztilde - (q_A^T (x) C) z,
    // and both sides ignore a common consensus phase shift
    const Scenario sc = fixtures::reference_scenario();
    const Topology& t = sc.topo;
    std::mt19937 gen(12);
    std::normal_distribution<double> dist;
    Vec x(2 * t.n), xg(2 * t.g);
    for (int i = 0; i < x.size(); ++i) x[i] = dist(gen);
    for (int i = 0; i < xg.size(); ++i) xg[i] = dist(gen);

    auto model_vs_direct = [&](const Vec& xv, const Vec& xgv) {
        Vec joint(2 * (t.n + t.g));
        joint << xv, xgv;
        const Vec y_edges = kron(t.V_G, Mat(clock_c())) * joint;
        const double direct = summed_measurement(y_edges);

        Eigen::Vector2d zbar = Eigen::Vector2d::Zero(), zgbar = Eigen::Vector2d::Zero();
        for (int i = 0; i < t.n; ++i) zbar += xv.segment<2>(2 * i) / t.n;
        for (int j = 0; j < t.g; ++j) zgbar += xgv.segment<2>(2 * j) / t.g;
        const Eigen::Vector2d ztilde = zbar - zgbar;
        const Vec z = kron(t.Pi, Mat::Identity(2, 2)) * xv;
        const double model =
            -t.g * ztilde[0] - (kron(t.q_A.transpose(), Mat(clock_c())) * z)(0);
        return std::make_pair(direct, model);
    };

    const auto [direct, model] = model_vs_direct(x, xg);
    CHECK(direct == doctest::Approx(model).epsilon(1e-12));

    const double c = dist(gen);
    Vec x_shift = x, xg_shift = xg;
    for (int i = 0; i < t.n; ++i) x_shift[2 * i] += c;
    for (int j = 0; j < t.g; ++j) xg_shift[2 * j] += c;
    const auto [direct2, model2] = model_vs_direct(x_shift, xg_shift);
    CHECK(direct2 == doctest::Approx(direct).epsilon(1e-12));
    CHECK(model2 == doctest::Approx(model).epsilon(1e-12));
}

TEST_CASE("design_gnss_edge_filter") {
    const Scenario sc = fixtures::reference_scenario();

    SUBCASE("zero noise gives a dead filter") {
        const GnssEdgeFilter f = design_gnss_edge_filter(sc.topo, Mat::Zero(6, 6),
                                                         Mat::Zero(4, 4), sc.R_G, sc.tau);
        CHECK(f.gain.cwiseAbs().maxCoeff() < 1e-15);
    }
    SUBCASE("reference scenario error matrix is Schur stable") {
        const GnssEdgeFilter f = design_gnss_edge_filter(
            sc.topo, fixtures::ensemble_q(sc), fixtures::gnss_q(sc), sc.R_G, sc.tau);
        CHECK(spectral_radius(f.A - f.gain * f.C) < 1.0);
    }
    SUBCASE("single receiver reduces to an equivalent ensemble edge") {
        const Topology t = two_clocks();
        const ClockParams mac{1e-18, 1e-24};
        const ClockParams gac{1e-22, 1e-28};
        Mat rg(1, 1);
        rg << 1e-20;
        const GnssEdgeFilter f = design_gnss_edge_filter(
            t, stacked_process_cov({mac, mac}, 1.0), stacked_process_cov({gac}, 1.0), rg, 1.0);

        // ensemble edge between one mac-like and one gac-like clock
        const Mat q_pair = stacked_process_cov({mac, gac}, 1.0);
        const EdgeFilter ef = design_edge_filter(t, 0, q_pair, rg, 1.0);
        CHECK((f.P - ef.P).cwiseAbs().maxCoeff() < 1e-9 * ef.P.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("every designed filter is a DARE fixed point with stable errors") {
    const Scenario sc = fixtures::reference_scenario();
    const Mat q = fixtures::ensemble_q(sc);
    const Mat qg = fixtures::gnss_q(sc);

    int offset = 0;
    for (int i = 0; i < 3; ++i) {
        const int mi = static_cast<int>(sc.topo.neighbors[i].size());
        const EdgeFilter f =
            design_edge_filter(sc.topo, i, q, sc.R.block(offset, offset, mi, mi), sc.tau);
        offset += mi;
        const Mat rhs = f.A * f.P * f.A.transpose() -
                        f.A * f.P * f.C.transpose() *
                            (f.C * f.P * f.C.transpose() + f.R)
                                .partialPivLu()
                                .solve(f.C * f.P * f.A.transpose()) +
                        f.Qbar;
        CHECK((rhs - f.P).cwiseAbs().maxCoeff() <= 1e-9 * f.P.cwiseAbs().maxCoeff());
        CHECK(spectral_radius(f.A - f.gain * f.C) < 1.0);
    }
    const SupervisorFilter sup = design_supervisor_filter(sc.topo, q, qg, sc.R_G, sc.tau);
    CHECK(spectral_radius(sup.A * (Eigen::Matrix2d::Identity() + sup.g * sup.gain * clock_c())) <
          1.0);
    const GnssEdgeFilter gef = design_gnss_edge_filter(sc.topo, q, qg, sc.R_G, sc.tau);
    CHECK(spectral_radius(gef.A - gef.gain * gef.C) < 1.0);
}

TEST_SUITE("stat") {
    TEST_CASE("supervisor one-step-ahead error covariance matches the design") {
        Scenario sc = fixtures::reference_scenario(5000, 1000);
        const SupervisorFilter sup = design_supervisor_filter(
            sc.topo, fixtures::ensemble_q(sc), fixtures::gnss_q(sc), sc.R_G, sc.tau);
        const GainSet gains = design_gains(sc, DesignConfig{});

        double acc = 0.0;
        long count = 0;
        for (int r = 0; r < 200; ++r) {
            Scenario run = sc;
            run.seed = 10000 + r;
            const SimTrace tr = run_simulation(run, &gains);
            for (long k = 1000; k <= run.horizon; ++k) {
                const double e = tr.ztilde(k, 0) - tr.zhat(k, 0);
                acc += e * e;
                ++count;
            }
        }
        const double empirical = acc / count;
        CHECK(empirical == doctest::Approx(sup.P(0, 0)).epsilon(0.10));
    }
}
