#pragma once

#include <string>
#include <utility>
#include <vector>

#include "chronos/control.hpp"
#include "chronos/estimation.hpp"

namespace chronos {

struct Scenario;
struct DesignConfig;

/// Every synthesized quantity a closed-loop run needs: synchronisation and
/// broadcast feedback rows, per-node edge-filter gains, the supervisor gain,
/// the receiver-edge gain for the alternative broadcast, and the steady
/// covariances behind them. Serialises to/from the gains JSON document.
struct GainSet {
    Eigen::RowVector2d F = Eigen::RowVector2d::Zero();
    double sync_radius = 0.0;

    Eigen::RowVector2d F_B = Eigen::RowVector2d::Zero();
    double margin = 0.0;
    double objective = 0.0;
    double ab_radius = 0.0;

    std::vector<Mat> H_edge; // per node, 2|N_i| x |N_i|
    std::vector<Mat> P_edge;
    Eigen::Vector2d H_sup = Eigen::Vector2d::Zero();
    Eigen::Matrix2d P_sup = Eigen::Matrix2d::Zero();
    Mat H_gnss; // 2g x g
    Mat P_gnss;

    // design-time identity, checked against the scenario before a run
    double tau = 1.0;
    long s = 1;
    int n = 0;
    int g = 0;
    std::vector<std::pair<int, int>> edges;
    std::vector<std::pair<int, int>> attachments;
};

/// Runs the full synthesis pipeline on a scenario: sync gain, edge filters,
/// supervisor filter, receiver-edge filter, then the broadcast gain.
GainSet design_gains(const Scenario& scenario, const DesignConfig& cfg);

std::string gains_to_json(const GainSet& gains);
GainSet gains_from_json(const std::string& text);

void save_gains(const GainSet& gains, const std::string& path);
GainSet load_gains(const std::string& path);

} // namespace chronos
