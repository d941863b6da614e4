#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>
#include <json.hpp>

#include "chronos/avar.hpp"
#include "chronos/config.hpp"
#include "chronos/csv.hpp"
#include "chronos/gains.hpp"
#include "chronos/sim.hpp"

namespace {

using namespace chronos;

std::vector<double> parse_doubles(const std::string& csv) {
    std::vector<double> out;
    size_t start = 0;
    while (start <= csv.size()) {
        const size_t pos = csv.find(',', start);
        const std::string tok = csv.substr(start, pos == std::string::npos ? pos : pos - start);
        if (!tok.empty()) out.push_back(std::stod(tok));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

std::vector<std::string> parse_names(const std::string& csv) {
    std::vector<std::string> out;
    size_t start = 0;
    while (start <= csv.size()) {
        const size_t pos = csv.find(',', start);
        const std::string tok = csv.substr(start, pos == std::string::npos ? pos : pos - start);
        if (!tok.empty()) out.push_back(tok);
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

int cmd_design(const std::string& config_path, std::string out_path) {
    ScenarioFile sf = load_scenario_file(config_path);
    if (out_path.empty()) out_path = sf.gains_out.empty() ? "gains.json" : sf.gains_out;
    const GainSet gains = design_gains(sf.scenario, sf.design);
    save_gains(gains, out_path);
    std::cout << "sync gain F = [" << gains.F[0] << ", " << gains.F[1]
              << "], radius = " << gains.sync_radius << "\n"
              << "tracking gain F_B = [" << gains.F_B[0] << ", " << gains.F_B[1]
              << "], margin = " << gains.margin << ", A_B radius = " << gains.ab_radius
              << ", objective = " << gains.objective << "\n"
              << "gains written to " << out_path << "\n";
    return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& gains_path,
                 const std::string& mode_str, long seed, long horizon, std::string out_path) {
    ScenarioFile sf = load_scenario_file(config_path);
    Scenario& sc = sf.scenario;
    if (!mode_str.empty()) sc.mode = mode_from_name(mode_str);
    if (seed >= 0) sc.seed = static_cast<std::uint64_t>(seed);
    if (horizon > 0) sc.horizon = horizon;
    if (out_path.empty()) out_path = sf.trace_out.empty() ? "trace.csv" : sf.trace_out;

    GainSet gains;
    const bool need_gains = sc.mode != Mode::free_run;
    if (need_gains) {
        if (gains_path.empty())
            throw GainModeMismatch("simulate: mode " + mode_name(sc.mode) + " needs --gains");
        gains = load_gains(gains_path);
    }
    const SimTrace trace = run_simulation(sc, need_gains ? &gains : nullptr);
    write_trace_csv(trace, out_path);
    std::cout << "trace (" << mode_name(sc.mode) << ", horizon " << sc.horizon << ", seed "
              << sc.seed << ") written to " << out_path << "\n";
    return 0;
}

int cmd_avar_impl(const std::string& trace_path, const std::string& entities_str,
                  const std::string& taus_str, const std::string& ref_str, double tau_sample,
                  const std::string& out_path) {
    const SimTrace trace = read_trace_csv(trace_path);
    const std::vector<double> taus = parse_doubles(taus_str);
    if (taus.empty()) throw ValidationError("avar: no taus given");
    PhaseReference ref = PhaseReference::truth;
    if (ref_str == "gac_mean")
        ref = PhaseReference::gac_mean;
    else if (ref_str != "truth")
        throw ValidationError("avar: reference must be truth or gac_mean");

    std::vector<AvarCurve> curves;
    for (const std::string& name : parse_names(entities_str)) {
        std::vector<double> d;
        if (name == "ensemble") {
            d = ensemble_phase_series(trace, ref);
        } else if (name.rfind("mac", 0) == 0) {
            d = mac_phase_series(trace, std::stoi(name.substr(3)) - 1, ref);
        } else if (name.rfind("gac", 0) == 0) {
            d = gac_phase_series(trace, std::stoi(name.substr(3)) - 1);
        } else {
            throw ValidationError("avar: unknown entity " + name);
        }
        curves.push_back(avar_curve_statistical(d, tau_sample, taus, name));
    }
    write_avar_csv(curves, out_path);
    std::cout << "avar written to " << out_path << "\n";
    return 0;
}

struct CompareResult {
    std::vector<double> taus;
    // seed-mean statistical AVAR of MAC phase per mode, per tau
    std::map<std::string, std::vector<double>> avar_mac_mean;
    std::map<std::string, std::vector<std::vector<double>>> avar_mac_per_seed; // [seed][tau]
    std::map<std::string, double> rms_final20;
    double gac_analytical_max_tau = 0.0;
    bool degenerate = false;
};

CompareResult run_compare(const Scenario& base, const GainSet& gains, int reps,
                          const std::vector<double>& taus) {
    const std::vector<Mode> modes = {Mode::sync, Mode::sync_track, Mode::sync_track_alt};
    CompareResult res;
    res.taus = taus;

    struct SeedOut {
        std::map<std::string, std::vector<double>> avar; // mode -> per tau (mac mean)
        std::map<std::string, double> rms;
    };
    std::vector<SeedOut> per_seed(reps);

    const int nthreads = replication_threads();
    (void)nthreads;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(nthreads)
#endif
    for (int r = 0; r < reps; ++r) {
        Scenario sc = base;
        sc.seed = base.seed + static_cast<std::uint64_t>(r);
        const NoiseTape tape = generate_tape(sc, sc.seed);
        SeedOut so;
        for (Mode mode : modes) {
            Scenario run = sc;
            run.mode = mode;
            const SimTrace trace = run_simulation(run, &gains, tape);
            std::vector<double> acc(taus.size(), 0.0);
            for (int i = 0; i < trace.n; ++i) {
                const auto d = mac_phase_series(trace, i, PhaseReference::truth);
                const AvarCurve c = avar_curve_statistical(d, run.tau, taus, "mac");
                for (size_t t = 0; t < taus.size(); ++t) acc[t] += c.points[t].avar;
            }
            for (double& v : acc) v /= trace.n;
            so.avar[mode_name(mode)] = acc;

            // rms of clock reading deviation vs the receiver mean, final 20%
            const long k0 = trace.horizon - trace.horizon / 5;
            double sq = 0.0;
            long cnt = 0;
            for (long k = k0; k <= trace.horizon; ++k)
                for (int i = 0; i < trace.n; ++i) {
                    const double dev = trace.mac_x1(k, i) - trace.gac_x1.row(k).mean();
                    sq += dev * dev;
                    ++cnt;
                }
            so.rms[mode_name(mode)] = std::sqrt(sq / cnt);
        }
        per_seed[r] = std::move(so);
    }

    bool all_zero = true;
    for (Mode mode : modes) {
        const std::string name = mode_name(mode);
        std::vector<double> mean(taus.size(), 0.0);
        std::vector<std::vector<double>> seeds_v;
        double rms = 0.0;
        for (int r = 0; r < reps; ++r) {
            for (size_t t = 0; t < taus.size(); ++t) mean[t] += per_seed[r].avar[name][t];
            seeds_v.push_back(per_seed[r].avar[name]);
            rms += per_seed[r].rms[name];
        }
        for (double& v : mean) {
            v /= reps;
            if (v != 0.0) all_zero = false;
        }
        res.avar_mac_mean[name] = std::move(mean);
        res.avar_mac_per_seed[name] = std::move(seeds_v);
        res.rms_final20[name] = rms / reps;
    }
    res.degenerate = all_zero;

    // identical receivers make this a single analytical curve; average them
    double gac_avar = 0.0;
    for (const auto& gp : base.gnss) gac_avar += avar_analytical(gp.params, taus.back());
    res.gac_analytical_max_tau = gac_avar / std::max<size_t>(base.gnss.size(), 1);
    return res;
}

int cmd_compare(const std::string& config_path, const std::string& gains_path, int reps,
                const std::string& taus_str, const std::string& out_dir) {
    ScenarioFile sf = load_scenario_file(config_path);
    const GainSet gains = load_gains(gains_path);
    Scenario& sc = sf.scenario;

    std::vector<double> taus = parse_doubles(taus_str);
    if (taus.empty()) {
        // default grid: powers of four up to the horizon budget, plus 8 s
        const double cap = std::min<double>(8.0 * sc.broadcast_period * sc.tau,
                                            sc.horizon * sc.tau / 3.0);
        for (double t = sc.tau; t < cap; t *= 4.0) taus.push_back(t);
        if (taus.empty() || taus.back() < cap) taus.push_back(cap);
    }

    const CompareResult res = run_compare(sc, gains, reps, taus);

    std::filesystem::create_directories(out_dir);
    const std::vector<std::string> mode_names = {"sync", "sync_track", "sync_track_alt"};
    for (const auto& name : mode_names) {
        AvarCurve c;
        c.entity = "mac_mean";
        c.kind = AvarKind::statistical;
        for (size_t t = 0; t < taus.size(); ++t)
            c.points.push_back({taus[t], res.avar_mac_mean.at(name)[t]});
        write_avar_csv({c}, out_dir + "/avar_" + name + ".csv");
    }
    {
        // analytical reference curves
        std::vector<AvarCurve> ref;
        for (size_t i = 0; i < sc.clocks.size(); ++i)
            ref.push_back(avar_curve_analytical(sc.clocks[i], taus, "mac" + std::to_string(i + 1)));
        std::vector<double> q(sc.clocks.size(), 1.0 / sc.clocks.size());
        ref.push_back(avar_curve_ensemble_mean(sc.clocks, taus, q, "ensemble"));
        for (size_t j = 0; j < sc.gnss.size(); ++j)
            ref.push_back(
                avar_curve_analytical(sc.gnss[j].params, taus, "gac" + std::to_string(j + 1)));
        write_avar_csv(ref, out_dir + "/avar_analytical.csv");
    }

    const double at_sync = res.avar_mac_mean.at("sync").back();
    const double at_track = res.avar_mac_mean.at("sync_track").back();
    const double at_alt = res.avar_mac_mean.at("sync_track_alt").back();
    int wins = 0;
    for (int r = 0; r < reps; ++r)
        if (res.avar_mac_per_seed.at("sync_track")[r].back() <=
            res.avar_mac_per_seed.at("sync_track_alt")[r].back())
            ++wins;

    std::string verdict = "not_improved";
    if (res.degenerate)
        verdict = "degenerate";
    else if (at_track <= at_sync)
        verdict = "improved";

    nlohmann::json report;
    report["schema"] = "chronos-compare-report/1";
    report["name"] = sf.name;
    report["reps"] = reps;
    report["taus"] = taus;
    report["modes"] = mode_names;
    for (const auto& name : mode_names)
        report["avar_mac_mean"][name] = res.avar_mac_mean.at(name);
    report["max_tau"] = taus.back();
    report["avar_at_max_tau"] = {{"sync", at_sync},
                                 {"sync_track", at_track},
                                 {"sync_track_alt", at_alt}};
    report["gac_analytical_at_max_tau"] = res.gac_analytical_max_tau;
    report["track_vs_sync_ratio"] = at_sync > 0.0 ? at_track / at_sync : 0.0;
    report["track_vs_gac_ratio"] =
        res.gac_analytical_max_tau > 0.0 ? at_track / res.gac_analytical_max_tau : 0.0;
    report["alt_win_fraction"] = reps > 0 ? static_cast<double>(wins) / reps : 0.0;
    for (const auto& name : mode_names)
        report["rms_final20"][name] = res.rms_final20.at(name);
    report["verdict"] = verdict;

    std::ofstream rf(out_dir + "/report.json", std::ios::binary);
    if (!rf) throw IoError("cannot open for writing: " + out_dir + "/report.json");
    rf << report.dump(2) << "\n";
    std::cout << "verdict: " << verdict << " (sync_track/" "sync ratio at tau=" << taus.back()
              << ": " << (at_sync > 0 ? at_track / at_sync : 0.0) << ")\n"
              << "report written to " << out_dir << "/report.json\n";
    return 0;
}

int cmd_montecarlo(const std::string& config_path, const std::string& gains_path,
                   const std::string& mode_str, int reps, const std::string& out_path) {
    ScenarioFile sf = load_scenario_file(config_path);
    Scenario& sc = sf.scenario;
    if (!mode_str.empty()) sc.mode = mode_from_name(mode_str);
    GainSet gains;
    const bool need_gains = sc.mode != Mode::free_run;
    if (need_gains) {
        if (gains_path.empty())
            throw GainModeMismatch("montecarlo: mode " + mode_name(sc.mode) + " needs --gains");
        gains = load_gains(gains_path);
    }
    const McSummary mc = monte_carlo(sc, need_gains ? &gains : nullptr, reps);
    std::string out = "k,ztilde_mean_x1,ztilde_mean_x2,ztilde_var_x1,ztilde_var_x2\n";
    char buf[160];
    for (long k = 0; k < mc.ztilde_mean.rows(); ++k) {
        std::snprintf(buf, sizeof buf, "%ld,%.17g,%.17g,%.17g,%.17g\n", k, mc.ztilde_mean(k, 0),
                      mc.ztilde_mean(k, 1), mc.ztilde_var(k, 0), mc.ztilde_var(k, 1));
        out += buf;
    }
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw IoError("cannot open for writing: " + out_path);
    f << out;
    std::cout << reps << " replications aggregated to " << out_path << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Networked atomic-clock ensemble simulator and gain synthesis"};
    app.require_subcommand(1);

    std::string config_path, gains_path, out_path, out_dir, mode_str, entities, taus_str,
        ref_str = "truth", trace_path;
    long seed = -1, horizon = -1;
    int reps = 50;
    double tau_sample = 1.0;

    auto* design = app.add_subcommand("design", "Synthesize all gains from a scenario file");
    design->add_option("--config", config_path, "scenario JSON")->required();
    design->add_option("--out", out_path, "gains JSON output (default gains.json)");

    auto* simulate = app.add_subcommand("simulate", "Run one closed-loop replication");
    simulate->add_option("--config", config_path, "scenario JSON")->required();
    simulate->add_option("--gains", gains_path, "gains JSON (required unless --mode free)");
    simulate->add_option("--mode", mode_str, "free|sync|sync_track|sync_track_alt");
    simulate->add_option("--seed", seed, "seed override");
    simulate->add_option("--horizon", horizon, "horizon override");
    simulate->add_option("--out", out_path, "trace CSV output (.gz supported)");

    auto* avar = app.add_subcommand("avar", "Statistical AVAR from a trace");
    avar->add_option("--trace", trace_path, "trace CSV (.gz supported)")->required();
    avar->add_option("--entities", entities, "comma list: mac1,...,gac1,...,ensemble")->required();
    avar->add_option("--taus", taus_str, "comma list of averaging times")->required();
    avar->add_option("--reference", ref_str, "truth|gac_mean (default truth)");
    avar->add_option("--tau-sample", tau_sample, "sampling period of the trace (default 1)");
    avar->add_option("--out", out_path, "AVAR CSV output")->required();

    auto* compare = app.add_subcommand("compare", "Multi-seed AVAR comparison across modes");
    compare->add_option("--config", config_path, "scenario JSON")->required();
    compare->add_option("--gains", gains_path, "gains JSON")->required();
    compare->add_option("--reps", reps, "seed count (default 50)");
    compare->add_option("--taus", taus_str, "comma list of averaging times");
    compare->add_option("--out-dir", out_dir, "output directory")->required();

    auto* mc = app.add_subcommand("montecarlo", "Replicated runs, tracking-error statistics");
    mc->add_option("--config", config_path, "scenario JSON")->required();
    mc->add_option("--gains", gains_path, "gains JSON");
    mc->add_option("--mode", mode_str, "free|sync|sync_track|sync_track_alt");
    mc->add_option("--reps", reps, "replication count")->required();
    mc->add_option("--out", out_path, "summary CSV output")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (design->parsed()) return cmd_design(config_path, out_path);
        if (simulate->parsed())
            return cmd_simulate(config_path, gains_path, mode_str, seed, horizon, out_path);
        if (avar->parsed())
            return cmd_avar_impl(trace_path, entities, taus_str, ref_str, tau_sample, out_path);
        if (compare->parsed())
            return cmd_compare(config_path, gains_path, reps, taus_str, out_dir);
        if (mc->parsed()) return cmd_montecarlo(config_path, gains_path, mode_str, reps, out_path);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
