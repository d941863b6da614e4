#pragma once

#include <vector>

#include "chronos/estimation.hpp"
#include "chronos/network.hpp"
#include "chronos/numerics.hpp"

namespace chronos {

/// Synchronisation feedback row F with the spectral radius it achieves on
/// Pi (x) A - L (x) B F.
struct SyncGain {
    Eigen::RowVector2d F = Eigen::RowVector2d::Zero();
    double achieved_radius = 0.0;
};

struct SyncSearchConfig {
    int grid_points = 40;
    int polish_rounds = 60;
};

/// Searches a deterministic log grid plus coordinate-descent polish for F
/// minimising the worst modal radius max over nonzero Laplacian eigenvalues
/// mu of rho(A - mu B F). Throws NoStabilizingGainFound if nothing lands
/// strictly inside the unit disk.
SyncGain design_sync_gain(const Topology& topo, double tau, const SyncSearchConfig& cfg = {});

/// u_i = 1/2 F sum_j (xi_hat_ij - xi_hat_ji). Both stacks follow canonical
/// edge order; the reverse stack carries the neighbour-side estimates.
Vec sync_control(const Vec& xi_hat, const Vec& xi_hat_rev, const Eigen::RowVector2d& f,
                 const Topology& topo);

/// Broadcast tracking control: every clock receives -F_B z_tilde_hat.
Vec tracking_control(const Eigen::Vector2d& z_tilde_hat, const Eigen::RowVector2d& f_b, int n);

/// Alternative broadcast built from receiver-edge estimates:
/// every clock receives (1/g) sum_j F_B xi_G_hat_j.
Vec alt_tracking_control(const Vec& xi_g_hat, const Eigen::RowVector2d& f_b, int n, int g);

/// True when step k is one where the broadcast is applied ((k+1) mod s == 0).
bool is_broadcast_step(long k, long s);

/// u_syn plus the broadcast term on broadcast steps.
Vec combined_control(long k, long s, const Vec& u_syn, const Vec& u_g);

/// (A - B F_B) A^gamma with A^gamma = [[1, gamma tau], [0, 1]].
Eigen::Matrix2d a_b(long gamma, const Eigen::RowVector2d& f_b, double tau);

/// Closed-loop block matrices of the broadcast-period analysis.
struct ClosedLoopMatrices {
    Mat Atilde;
    Mat A0tilde;
    Mat Ctilde; // [I_2 0 0]
    Mat Qtilde; // filled by assemble_qtilde
    long broadcast_period = 1;
};

enum class QtildeMode { derived, identity };

/// Everything the H2 synthesis needs that does not depend on F_B: the
/// estimation-error diagonal blocks, the coupling block, and the per-step
/// noise covariance of the stacked [z_tilde; e_ztilde; e_edge] disturbance.
struct TrackingContext {
    Eigen::Matrix2d A;
    Eigen::Vector2d B;
    double tau = 1.0;
    long s = 1;
    Mat block22;   // A (I_2 - H_z (-g C))
    Mat block23;   // A H_z (q_A^T V-dagger (x) C)
    Mat block33;   // (I_E (x) A)(I - H* (I_E (x) C))
    Mat sigma_rho; // (4 + 2|E|)^2 per-step noise covariance
    QtildeMode qtilde_mode = QtildeMode::derived;
};

TrackingContext make_tracking_context(const Topology& topo, const SupervisorFilter& sup,
                                      const std::vector<EdgeFilter>& edge_filters,
                                      const Mat& ensemble_q, const Mat& edge_r, double tau,
                                      long s, QtildeMode mode = QtildeMode::derived);

/// Assembles Atilde / A0tilde / Ctilde for a candidate F_B. Qtilde is left
/// empty; use assemble_qtilde.
ClosedLoopMatrices assemble_closed_loop(const TrackingContext& ctx,
                                        const Eigen::RowVector2d& f_b);

/// Accumulated-noise covariance over one broadcast period:
/// sum_{i=2..s} (Atilde A0tilde^{ i-2}) Sigma (..)^T + Sigma.
Mat assemble_qtilde(const ClosedLoopMatrices& cl, const Mat& sigma_rho, long s);

/// sqrt(tr(Ctilde Ptilde Ctilde^T)) for a feasible candidate; throws
/// Infeasible when the margin constraint or Schur stability fails.
double h2_objective(double f_b1, double f_b2, const TrackingContext& ctx);

struct TrackingGain {
    Eigen::RowVector2d F_B = Eigen::RowVector2d::Zero();
    double objective = 0.0;
    double margin = 0.0;    // 4 / (f_b1 tau s + 2 f_b2)
    double ab_radius = 0.0; // rho((A - B F_B) A^{s-1})
};

struct TrackingSearchConfig {
    int multistarts = 12;
    int max_iter = 300;
};

/// Nelder-Mead over (f_b1, f_b2) multi-started from a deterministic
/// feasibility grid. Throws NoFeasiblePoint when the grid finds nothing.
TrackingGain design_tracking_gain(const TrackingContext& ctx,
                                  const TrackingSearchConfig& cfg = {});

} // namespace chronos
