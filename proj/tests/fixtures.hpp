#pragma once

#include "chronos/sim.hpp"

namespace fixtures {

// Three cesium clocks on a path with receivers at the ends; noise numbers of
// the reference tables. Broadcast every 100 steps unless told otherwise.
inline chronos::Scenario reference_scenario(long horizon = 20000, long s = 100) {
    using namespace chronos;
    Scenario sc;
    sc.topo = build_topology(3, 2, {{0, 1}, {1, 2}}, {{0, 0}, {1, 2}});
    sc.clocks = {{2.89e-20, 2.27e-26}, {7.84996e-21, 2.83e-27}, {1.49e-20, 2.7889e-28}};
    sc.gnss = {{{1e-22, 1e-26}, 1e-9}, {{1e-22, 1e-26}, 2e-9}};
    sc.R = Eigen::Vector4d(1.895e-29, 5.8e-31, 2.228e-29, 1.36e-30).asDiagonal();
    sc.R_G = Eigen::Vector2d(1.721e-17, 7.8e-19).asDiagonal();
    sc.tau = 1.0;
    sc.horizon = horizon;
    sc.broadcast_period = s;
    sc.mode = Mode::sync_track;
    sc.seed = 1;
    sc.mac_phase0 = {1e-10, 2e-10, 3e-10};
    return sc;
}

inline chronos::Mat ensemble_q(const chronos::Scenario& sc) {
    return chronos::stacked_process_cov(sc.clocks, sc.tau);
}

inline chronos::Mat gnss_q(const chronos::Scenario& sc) {
    std::vector<chronos::ClockParams> p;
    for (const auto& gp : sc.gnss) p.push_back(gp.params);
    return chronos::stacked_process_cov(p, sc.tau);
}

} // namespace fixtures
