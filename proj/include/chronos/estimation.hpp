#pragma once

#include <vector>

#include "chronos/clock.hpp"
#include "chronos/network.hpp"
#include "chronos/numerics.hpp"

namespace chronos {

/// Stacked block-diagonal process covariance diag(Q_i) for a set of clocks.
Mat stacked_process_cov(const std::vector<ClockParams>& params, double tau);

/// Steady-state predictor for the edge states of one node. The estimate is
/// the one-step-ahead prediction xi_hat_minus for the node's |N_i| edges.
struct EdgeFilter {
    int node = 0;
    int m = 0; // neighbor count
    Mat A;     // I_m (x) A_clock
    Mat C;     // I_m (x) C_clock
    Mat Qbar;  // (V_i (x) I_2) Q (V_i (x) I_2)^T
    Mat R;
    Mat P;    // steady prediction covariance
    Mat gain; // A P C^T (C P C^T + R)^-1
    Vec estimate;

    /// xi_hat[k+1] = A xi_hat[k] + gain (y - C xi_hat[k]) + known_input.
    void step(const Vec& y, const Vec& known_input);
};

EdgeFilter design_edge_filter(const Topology& topo, int node, const Mat& ensemble_q,
                              const Mat& r_i, double tau, double dare_tol = 1e-12,
                              int dare_max_iter = 1000000);

/// The supervisor's tracking-error predictor. Measurement model is the
/// summed receiver measurement with effective output matrix -g C; the
/// synchronisation-error by-product is compensated from the stacked edge
/// estimates through the (q_A^T V-dagger (x) C) row.
struct SupervisorFilter {
    Eigen::Matrix2d A;
    Eigen::Vector2d gain; // filter gain, error matrix is A (I - gain (-g C))
    Eigen::Matrix2d P;
    Eigen::Matrix2d Qbar_G;
    double Rbar_G = 0.0;
    int g = 0;
    Eigen::RowVectorXd compensation; // q_A^T V-dagger (x) C, 1 x 2|E|
    Mat input_map;                   // q^T (x) B, 2 x n
    Eigen::Vector2d estimate = Eigen::Vector2d::Zero();

    void step(double ybar, const Vec& xi_hat_all, const Vec& u);
};

SupervisorFilter design_supervisor_filter(const Topology& topo, const Mat& ensemble_q,
                                          const Mat& gnss_q, const Mat& r_g, double tau,
                                          double dare_tol = 1e-12, int dare_max_iter = 1000000);

/// Predictor for the receiver-to-clock edge states used by the alternative
/// broadcast control.
struct GnssEdgeFilter {
    int g = 0;
    Mat A; // I_g (x) A_clock
    Mat C; // I_g (x) C_clock
    Mat P;
    Mat gain; // 2g x g
    Vec estimate;

    void step(const Vec& y, const Vec& known_input);
};

GnssEdgeFilter design_gnss_edge_filter(const Topology& topo, const Mat& ensemble_q,
                                       const Mat& gnss_q, const Mat& r_g, double tau,
                                       double dare_tol = 1e-12, int dare_max_iter = 1000000);

/// Ybar = 1^T Y.
double summed_measurement(const Vec& y);

} // namespace chronos
