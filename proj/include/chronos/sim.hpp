#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "chronos/clock.hpp"
#include "chronos/gains.hpp"
#include "chronos/network.hpp"

namespace chronos {

enum class Mode { free_run, sync, sync_track, sync_track_alt };

std::string mode_name(Mode mode);
Mode mode_from_name(const std::string& name);

/// Full description of one closed-loop experiment.
struct Scenario {
    Topology topo;
    std::vector<ClockParams> clocks;   // n entries
    std::vector<GnssClockParams> gnss; // g entries
    Mat R;   // |E| x |E| edge measurement covariance, canonical order
    Mat R_G; // g x g receiver measurement covariance
    double tau = 1.0;
    long horizon = 1;
    long broadcast_period = 1;
    Mode mode = Mode::free_run;
    std::uint64_t seed = 0;
    std::vector<double> mac_phase0;   // initial phase deviations, n entries
    double gac_jitter_std = 0.0;      // stddev of receiver initial-phase jitter
    bool edge_filter_input = true;    // feed known controls into edge filters
    bool perfect_tracking_oracle = false; // broadcast from the true tracking error
};

/// Gain-synthesis knobs carried by the scenario file.
struct DesignConfig {
    double dare_tol = 1e-12;
    int dare_max_iter = 1000000;
    SyncSearchConfig sync;
    TrackingSearchConfig tracking;
    QtildeMode qtilde = QtildeMode::derived;
};

/// Pre-generated randomness of one replication. Every draw a run consumes
/// lives here, so two runs over the same tape see identical noise no matter
/// which control mode is active.
struct NoiseTape {
    long horizon = 0;
    int n = 0, g = 0, m = 0;
    std::vector<double> gac_jitter; // g entries (zeros when jitter disabled)
    std::vector<double> data;       // horizon blocks of [v | v_G | w | w_G]

    long stride() const { return 2 * n + 2 * g + m + g; }
    const double* step(long k) const { return data.data() + k * stride(); }
};

NoiseTape generate_tape(const Scenario& scenario, std::uint64_t seed);

/// Time-indexed record of one run.
struct SimTrace {
    long horizon = 0;
    int n = 0, g = 0;
    bool has_sup = false;
    Mat mac_x1, mac_x2; // (T+1) x n
    Mat gac_x1, gac_x2; // (T+1) x g
    Mat u;              // T x n
    Mat ztilde;         // (T+1) x 2, true tracking error
    Mat zhat;           // (T+1) x 2, supervisor estimate (when has_sup)
};

/// Phase-deviation reference for extracted series.
enum class PhaseReference { truth, gac_mean };

/// Phase series d[k] of one clock against the chosen reference.
std::vector<double> mac_phase_series(const SimTrace& trace, int mac, PhaseReference ref);
/// q-weighted ensemble mean phase against the chosen reference.
std::vector<double> ensemble_phase_series(const SimTrace& trace, PhaseReference ref);
std::vector<double> gac_phase_series(const SimTrace& trace, int gac);

SimTrace run_simulation(const Scenario& scenario, const GainSet* gains);
SimTrace run_simulation(const Scenario& scenario, const GainSet* gains, const NoiseTape& tape);

struct McOptions {
    bool parallel = true;
    bool keep_mac_phase = false; // retain per-replication phase series
};

struct McSummary {
    int reps = 0;
    Mat ztilde_mean; // (T+1) x 2 across replications
    Mat ztilde_var;  // (T+1) x 2 sample variance
    std::vector<Mat> mac_phase; // per replication (T+1) x n, when requested
};

/// Runs `reps` replications with seeds base, base+1, ... and aggregates in
/// fixed replication order. Replications execute in parallel when enabled
/// (capped by CHRONO_THREADS); results are bit-identical either way.
McSummary monte_carlo(const Scenario& scenario, const GainSet* gains, int reps,
                      const McOptions& opts = {});

/// Thread budget for replication-parallel work: CHRONO_THREADS when set,
/// otherwise the OpenMP default (1 without OpenMP).
int replication_threads();

} // namespace chronos
