// Times the replication-parallel Monte Carlo engine against its serial
// reference on a three-clock scenario and checks the results agree exactly.
//
// usage: chronos-bench [reps] [horizon]

#include <chrono>
#include <cstdlib>
#include <iostream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "chronos/gains.hpp"
#include "chronos/sim.hpp"

using namespace chronos;

namespace {

Scenario bench_scenario(long horizon) {
    Scenario sc;
    sc.topo = build_topology(3, 2, {{0, 1}, {1, 2}}, {{0, 0}, {1, 2}});
    sc.clocks = {{0.0289e-18, 0.0227e-24}, {7.84996e-21, 2.83e-27}, {0.0149e-18, 2.7889e-28}};
    sc.gnss = {{{1e-22, 1e-26}, 1e-9}, {{1e-22, 1e-26}, 2e-9}};
    sc.R = Eigen::Vector4d(0.1895e-28, 0.0058e-28, 0.2228e-28, 0.0136e-28).asDiagonal();
    sc.R_G = Eigen::Vector2d(0.1721e-16, 0.0078e-16).asDiagonal();
    sc.tau = 1.0;
    sc.horizon = horizon;
    sc.broadcast_period = 100;
    sc.mode = Mode::sync_track;
    sc.seed = 1;
    sc.mac_phase0 = {1e-10, 2e-10, 3e-10};
    return sc;
}

} // namespace

int main(int argc, char** argv) {
    const int reps = argc > 1 ? std::atoi(argv[1]) : 64;
    const long horizon = argc > 2 ? std::atol(argv[2]) : 5000;

    Scenario sc = bench_scenario(horizon);
    const GainSet gains = design_gains(sc, DesignConfig{});

    std::cout << "reps " << reps << ", horizon " << horizon << ", threads "
              << replication_threads() << "\n";

    McOptions serial;
    serial.parallel = false;
    auto t0 = std::chrono::steady_clock::now();
    const McSummary a = monte_carlo(sc, &gains, reps, serial);
    auto t1 = std::chrono::steady_clock::now();
    const McSummary b = monte_carlo(sc, &gains, reps, McOptions{});
    auto t2 = std::chrono::steady_clock::now();

    const double ms_serial = std::chrono::duration<double, std::milli>(t1 - t0).count();
    const double ms_parallel = std::chrono::duration<double, std::milli>(t2 - t1).count();
    const bool identical = a.ztilde_mean == b.ztilde_mean && a.ztilde_var == b.ztilde_var;

    std::cout << "serial   " << ms_serial << " ms\n"
              << "parallel " << ms_parallel << " ms\n"
              << "speedup  " << ms_serial / ms_parallel << "\n"
              << "results  " << (identical ? "identical" : "DIFFER") << "\n";
    return identical ? 0 : 1;
}
