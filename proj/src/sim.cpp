#include "chronos/sim.hpp"

#include <algorithm>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace chronos {

std::string mode_name(Mode mode) {
    switch (mode) {
        case Mode::free_run: return "free";
        case Mode::sync: return "sync";
        case Mode::sync_track: return "sync_track";
        case Mode::sync_track_alt: return "sync_track_alt";
    }
    return "free";
}

Mode mode_from_name(const std::string& name) {
    if (name == "free") return Mode::free_run;
    if (name == "sync") return Mode::sync;
    if (name == "sync_track") return Mode::sync_track;
    if (name == "sync_track_alt") return Mode::sync_track_alt;
    throw ValidationError("unknown mode: " + name);
}

NoiseTape generate_tape(const Scenario& sc, std::uint64_t seed) {
    const int n = sc.topo.n, g = sc.topo.g, m = sc.topo.edge_count();
    NoiseTape tape;
    tape.horizon = sc.horizon;
    tape.n = n;
    tape.g = g;
    tape.m = m;

    Rng rng(seed);

    tape.gac_jitter.assign(g, 0.0);
    if (sc.gac_jitter_std > 0.0)
        for (int j = 0; j < g; ++j) tape.gac_jitter[j] = sc.gac_jitter_std * rng.normal();

    std::vector<Eigen::Matrix2d> l_mac(n), l_gac(g);
    for (int i = 0; i < n; ++i)
        l_mac[i] = psd_factor(process_noise_cov(sc.clocks[i], sc.tau));
    for (int j = 0; j < g; ++j)
        l_gac[j] = psd_factor(process_noise_cov(sc.gnss[j].params, sc.tau));
    const Mat l_r = psd_factor(sc.R);
    const Mat l_rg = g > 0 ? psd_factor(sc.R_G) : Mat();

    tape.data.assign(static_cast<size_t>(sc.horizon) * tape.stride(), 0.0);
    Vec xi_e(m), xi_g(g);
    for (long k = 0; k < sc.horizon; ++k) {
        double* blk = tape.data.data() + k * tape.stride();
        for (int i = 0; i < n; ++i) {
            const Eigen::Vector2d v = l_mac[i] * rng.normal2();
            blk[2 * i] = v[0];
            blk[2 * i + 1] = v[1];
        }
        double* gblk = blk + 2 * n;
        for (int j = 0; j < g; ++j) {
            const Eigen::Vector2d v = l_gac[j] * rng.normal2();
            gblk[2 * j] = v[0];
            gblk[2 * j + 1] = v[1];
        }
        double* wblk = blk + 2 * n + 2 * g;
        for (int e = 0; e < m; ++e) xi_e[e] = rng.normal();
        Eigen::Map<Vec>(wblk, m) = l_r * xi_e;
        double* wgblk = wblk + m;
        if (g > 0) {
            for (int j = 0; j < g; ++j) xi_g[j] = rng.normal();
            Eigen::Map<Vec>(wgblk, g) = l_rg * xi_g;
        }
    }
    return tape;
}

namespace {

void check_gains(const Scenario& sc, const GainSet* gains) {
    if (sc.mode == Mode::free_run) return;
    if (!gains) throw GainModeMismatch("run_simulation: mode requires a gain set");
    if (gains->n != sc.topo.n || gains->g != sc.topo.g || gains->edges != sc.topo.edges ||
        gains->attachments != sc.topo.attachments)
        throw GainModeMismatch("run_simulation: gains were designed for a different topology");
    if (gains->tau != sc.tau)
        throw GainModeMismatch("run_simulation: gains were designed for a different tau");
    if ((sc.mode == Mode::sync_track || sc.mode == Mode::sync_track_alt) &&
        gains->s != sc.broadcast_period)
        throw GainModeMismatch("run_simulation: gains were designed for a different broadcast period");
}

struct EdgeFilterState {
    int node = 0;
    int m = 0;
    int offset = 0; // first canonical edge index of this node
    Mat a;          // 2m x 2m
    Mat gain;       // 2m x m
    Vec estimate;   // 2m
};

} // namespace

std::vector<double> mac_phase_series(const SimTrace& trace, int mac, PhaseReference ref) {
    if (mac < 0 || mac >= trace.n) throw BadIndex("mac_phase_series: index out of range");
    std::vector<double> d(trace.horizon + 1);
    for (long k = 0; k <= trace.horizon; ++k) {
        double v = trace.mac_x1(k, mac);
        if (ref == PhaseReference::gac_mean) v -= trace.gac_x1.row(k).mean();
        d[k] = v;
    }
    return d;
}

std::vector<double> ensemble_phase_series(const SimTrace& trace, PhaseReference ref) {
    std::vector<double> d(trace.horizon + 1);
    for (long k = 0; k <= trace.horizon; ++k) {
        double v = trace.mac_x1.row(k).mean();
        if (ref == PhaseReference::gac_mean) v -= trace.gac_x1.row(k).mean();
        d[k] = v;
    }
    return d;
}

std::vector<double> gac_phase_series(const SimTrace& trace, int gac) {
    if (gac < 0 || gac >= trace.g) throw BadIndex("gac_phase_series: index out of range");
    std::vector<double> d(trace.horizon + 1);
    for (long k = 0; k <= trace.horizon; ++k) d[k] = trace.gac_x1(k, gac);
    return d;
}

SimTrace run_simulation(const Scenario& sc, const GainSet* gains) {
    return run_simulation(sc, gains, generate_tape(sc, sc.seed));
}

SimTrace run_simulation(const Scenario& sc, const GainSet* gains, const NoiseTape& tape) {
    check_gains(sc, gains);
    const int n = sc.topo.n, g = sc.topo.g, m = sc.topo.edge_count();
    if (tape.n != n || tape.g != g || tape.m != m || tape.horizon < sc.horizon)
        throw DimensionMismatch("run_simulation: tape does not match scenario");
    const long t_end = sc.horizon;
    const double tau = sc.tau;
    const Eigen::Matrix2d a = clock_a(tau);
    const Eigen::Vector2d b = clock_b(tau);
    const bool with_sync = sc.mode != Mode::free_run;
    const bool with_sup = sc.mode == Mode::sync_track;
    const bool with_alt = sc.mode == Mode::sync_track_alt;
    const bool with_track = with_sup || with_alt;

    SimTrace tr;
    tr.horizon = t_end;
    tr.n = n;
    tr.g = g;
    tr.has_sup = with_sup;
    tr.mac_x1.setZero(t_end + 1, n);
    tr.mac_x2.setZero(t_end + 1, n);
    tr.gac_x1.setZero(t_end + 1, g);
    tr.gac_x2.setZero(t_end + 1, g);
    tr.u.setZero(t_end, n);
    tr.ztilde.setZero(t_end + 1, 2);
    tr.zhat.setZero(t_end + 1, 2);

    // state
    Vec x = Vec::Zero(2 * n), xg = Vec::Zero(2 * g);
    for (int i = 0; i < n; ++i) x[2 * i] = sc.mac_phase0[i];
    for (int j = 0; j < g; ++j) xg[2 * j] = sc.gnss[j].theta0 + tape.gac_jitter[j];

    // filters (steady gains come from the gain set)
    std::vector<EdgeFilterState> efs;
    Eigen::Vector2d sup_est = Eigen::Vector2d::Zero();
    Eigen::RowVectorXd sup_comp;
    Vec gnss_est;
    if (with_sync) {
        int offset = 0;
        for (int i = 0; i < n; ++i) {
            EdgeFilterState f;
            f.node = i;
            f.m = static_cast<int>(sc.topo.neighbors[i].size());
            f.offset = offset;
            f.a = kron(Mat::Identity(f.m, f.m), Mat(a));
            f.gain = gains->H_edge[i];
            f.estimate = Vec::Zero(2 * f.m);
            offset += f.m;
            efs.push_back(std::move(f));
        }
    }
    if (with_sup)
        sup_comp = kron((sc.topo.q_A.transpose() * sc.topo.Vdagger).eval(), Mat(clock_c())).row(0);
    Mat gnss_a;
    if (with_alt) {
        gnss_a = kron(Mat::Identity(g, g), Mat(a));
        gnss_est = Vec::Zero(2 * g);
    }

    auto record = [&](long k) {
        for (int i = 0; i < n; ++i) {
            tr.mac_x1(k, i) = x[2 * i];
            tr.mac_x2(k, i) = x[2 * i + 1];
        }
        for (int j = 0; j < g; ++j) {
            tr.gac_x1(k, j) = xg[2 * j];
            tr.gac_x2(k, j) = xg[2 * j + 1];
        }
        double zx1 = 0.0, zx2 = 0.0;
        for (int i = 0; i < n; ++i) {
            zx1 += x[2 * i];
            zx2 += x[2 * i + 1];
        }
        zx1 /= n;
        zx2 /= n;
        if (g > 0) {
            double gx1 = 0.0, gx2 = 0.0;
            for (int j = 0; j < g; ++j) {
                gx1 += xg[2 * j];
                gx2 += xg[2 * j + 1];
            }
            zx1 -= gx1 / g;
            zx2 -= gx2 / g;
        }
        tr.ztilde(k, 0) = zx1;
        tr.ztilde(k, 1) = zx2;
        if (with_sup) {
            tr.zhat(k, 0) = sup_est[0];
            tr.zhat(k, 1) = sup_est[1];
        }
    };
    record(0);

    Vec y(m), yg(g), xi_hat(2 * m), xi_hat_rev(2 * m), u(n);
    for (long k = 0; k < t_end; ++k) {
        const double* blk = tape.step(k);
        const double* v = blk;
        const double* v_g = blk + 2 * n;
        const double* w = blk + 2 * n + 2 * g;
        const double* w_g = w + m;

        // edge measurements of the current states
        for (int e = 0; e < m; ++e) {
            const auto& de = sc.topo.directed[e];
            y[e] = x[2 * de.of] - x[2 * de.at] + w[e];
        }
        for (int j = 0; j < g; ++j) {
            const int mac = sc.topo.attachments[j].second;
            yg[j] = xg[2 * j] - x[2 * mac] + w_g[j];
        }

        // controls from the current one-step-ahead estimates
        u.setZero();
        if (with_sync) {
            for (const auto& f : efs)
                xi_hat.segment(2 * f.offset, 2 * f.m) = f.estimate;
            for (int e = 0; e < m; ++e)
                xi_hat_rev.segment<2>(2 * e) = xi_hat.segment<2>(2 * sc.topo.reverse_edge[e]);
            u = sync_control(xi_hat, xi_hat_rev, gains->F, sc.topo);
            if (with_track && is_broadcast_step(k, sc.broadcast_period)) {
                Vec u_g;
                if (with_sup) {
                    const Eigen::Vector2d zsrc = sc.perfect_tracking_oracle
                                                     ? Eigen::Vector2d(tr.ztilde(k, 0), tr.ztilde(k, 1))
                                                     : sup_est;
                    u_g = tracking_control(zsrc, gains->F_B, n);
                } else {
                    u_g = alt_tracking_control(gnss_est, gains->F_B, n, g);
                }
                u += u_g;
            }
        }

        // filter updates consume this step's measurements and controls
        if (with_sync) {
            for (auto& f : efs) {
                Vec input = Vec::Zero(2 * f.m);
                if (sc.edge_filter_input) {
                    for (int r = 0; r < f.m; ++r) {
                        const int j = sc.topo.neighbors[f.node][r];
                        input.segment<2>(2 * r) = b * (u[j] - u[f.node]);
                    }
                }
                const Vec yi = y.segment(f.offset, f.m);
                f.estimate = f.a * f.estimate +
                             f.gain * (yi - f.estimate(Eigen::seqN(0, f.m, 2))) + input;
            }
        }
        if (with_sup) {
            const double ybar = yg.sum();
            const double innovation =
                ybar + g * sup_est[0] + sup_comp.dot(xi_hat);
            const double umean = u.mean();
            sup_est = a * sup_est + (a * gains->H_sup) * innovation + b * umean;
        }
        if (with_alt) {
            Vec input = Vec::Zero(2 * g);
            for (int j = 0; j < g; ++j) {
                const int mac = sc.topo.attachments[j].second;
                input.segment<2>(2 * j) = -b * u[mac];
            }
            gnss_est = gnss_a * gnss_est +
                       gains->H_gnss * (yg - gnss_est(Eigen::seqN(0, g, 2))) + input;
        }

        // advance the true states
        for (int i = 0; i < n; ++i) {
            const double x1 = x[2 * i], x2 = x[2 * i + 1];
            x[2 * i] = x1 + tau * x2 + tau * u[i] + v[2 * i];
            x[2 * i + 1] = x2 + u[i] + v[2 * i + 1];
        }
        for (int j = 0; j < g; ++j) {
            const double x1 = xg[2 * j], x2 = xg[2 * j + 1];
            xg[2 * j] = x1 + tau * x2 + v_g[2 * j];
            xg[2 * j + 1] = x2 + v_g[2 * j + 1];
        }

        tr.u.row(k) = u;
        record(k + 1);
    }
    return tr;
}

int replication_threads() {
    if (const char* env = std::getenv("CHRONO_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

McSummary monte_carlo(const Scenario& scenario, const GainSet* gains, int reps,
                      const McOptions& opts) {
    if (reps < 1) throw ValidationError("monte_carlo: need at least one replication");
    check_gains(scenario, gains);

    std::vector<Mat> ztilde(reps);
    std::vector<Mat> phases(opts.keep_mac_phase ? reps : 0);

    const int nthreads = replication_threads();
    (void)nthreads;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(nthreads) if (opts.parallel)
#endif
    for (int r = 0; r < reps; ++r) {
        Scenario sc = scenario;
        sc.seed = scenario.seed + static_cast<std::uint64_t>(r);
        SimTrace trace = run_simulation(sc, gains);
        ztilde[r] = trace.ztilde;
        if (opts.keep_mac_phase) phases[r] = trace.mac_x1;
    }

    McSummary out;
    out.reps = reps;
    const long rows = ztilde[0].rows();
    out.ztilde_mean = Mat::Zero(rows, 2);
    out.ztilde_var = Mat::Zero(rows, 2);
    for (int r = 0; r < reps; ++r) out.ztilde_mean += ztilde[r];
    out.ztilde_mean /= reps;
    if (reps > 1) {
        for (int r = 0; r < reps; ++r) {
            const Mat d = ztilde[r] - out.ztilde_mean;
            out.ztilde_var += d.cwiseProduct(d);
        }
        out.ztilde_var /= (reps - 1);
    }
    out.mac_phase = std::move(phases);
    return out;
}

} // namespace chronos
