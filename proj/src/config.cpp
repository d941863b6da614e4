#include "chronos/config.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

namespace chronos {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw ValidationError("config: unknown key '" + it.key() + "' in " + where);
}

double require_nonneg(const json& j, const std::string& key, const std::string& where) {
    const double v = j.at(key).get<double>();
    if (!(v >= 0.0)) throw ValidationError("config: " + where + "." + key + " must be >= 0");
    return v;
}

} // namespace

ScenarioFile parse_scenario_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config: not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ValidationError("config: top level must be an object");

    reject_unknown(j,
                   {"name", "topology", "clocks", "gnss_clocks", "edge_noise", "gnss_noise",
                    "tau", "horizon", "broadcast_period", "seed", "mode", "init", "design",
                    "outputs"},
                   "top level");

    ScenarioFile out;
    try {
        if (j.contains("name")) out.name = j.at("name").get<std::string>();

        const json& jt = j.at("topology");
        reject_unknown(jt, {"n", "edges", "attachments"}, "topology");
        const int n = jt.at("n").get<int>();
        std::vector<std::pair<int, int>> edges;
        for (const auto& e : jt.at("edges"))
            edges.emplace_back(e.at(0).get<int>() - 1, e.at(1).get<int>() - 1);
        std::vector<std::pair<int, int>> attachments;
        for (const auto& a : jt.at("attachments")) {
            reject_unknown(a, {"gac", "mac"}, "topology.attachments");
            attachments.emplace_back(a.at("gac").get<int>() - 1, a.at("mac").get<int>() - 1);
        }
        const int g = static_cast<int>(attachments.size());
        Scenario& sc = out.scenario;
        sc.topo = build_topology(n, g, edges, attachments);

        if (static_cast<int>(j.at("clocks").size()) != n)
            throw ValidationError("config: clocks must have one entry per ensemble clock");
        for (const auto& c : j.at("clocks")) {
            reject_unknown(c, {"sigma1_sq", "sigma2_sq"}, "clocks");
            sc.clocks.push_back(
                {require_nonneg(c, "sigma1_sq", "clocks"), require_nonneg(c, "sigma2_sq", "clocks")});
        }

        if (static_cast<int>(j.at("gnss_clocks").size()) != g)
            throw ValidationError("config: gnss_clocks must have one entry per receiver");
        int gi = 0;
        for (const auto& c : j.at("gnss_clocks")) {
            reject_unknown(c, {"sigma1_sq", "sigma2_sq", "theta0"}, "gnss_clocks");
            GnssClockParams gp;
            gp.params = {require_nonneg(c, "sigma1_sq", "gnss_clocks"),
                         require_nonneg(c, "sigma2_sq", "gnss_clocks")};
            gp.theta0 = c.contains("theta0") ? c.at("theta0").get<double>() : 1e-9 * (gi + 1);
            sc.gnss.push_back(gp);
            ++gi;
        }

        const int m = sc.topo.edge_count();
        sc.R = Mat::Zero(m, m);
        {
            const json& je = j.at("edge_noise");
            if (static_cast<int>(je.size()) != m)
                throw ValidationError("config: edge_noise must list every directed edge once");
            std::set<int> seen;
            for (const auto& e : je) {
                reject_unknown(e, {"at", "of", "var"}, "edge_noise");
                const int at = e.at("at").get<int>() - 1;
                const int of = e.at("of").get<int>() - 1;
                const int idx = sc.topo.edge_index(at, of);
                if (!seen.insert(idx).second)
                    throw ValidationError("config: duplicate edge_noise entry");
                sc.R(idx, idx) = require_nonneg(e, "var", "edge_noise");
            }
        }
        sc.R_G = Mat::Zero(g, g);
        {
            const json& jg = j.at("gnss_noise");
            if (static_cast<int>(jg.size()) != g)
                throw ValidationError("config: gnss_noise must list every receiver once");
            std::set<int> seen;
            for (const auto& e : jg) {
                reject_unknown(e, {"gac", "var"}, "gnss_noise");
                const int gac = e.at("gac").get<int>() - 1;
                if (gac < 0 || gac >= g) throw ValidationError("config: gnss_noise.gac out of range");
                if (!seen.insert(gac).second)
                    throw ValidationError("config: duplicate gnss_noise entry");
                sc.R_G(gac, gac) = require_nonneg(e, "var", "gnss_noise");
            }
        }

        sc.tau = j.at("tau").get<double>();
        if (sc.tau <= 0.0) throw ValidationError("config: tau must be positive");
        sc.horizon = j.at("horizon").get<long>();
        if (sc.horizon < 1) throw ValidationError("config: horizon must be >= 1");
        sc.broadcast_period = j.at("broadcast_period").get<long>();
        if (sc.broadcast_period < 1)
            throw ValidationError("config: broadcast_period must be >= 1");
        sc.seed = j.at("seed").get<std::uint64_t>();
        sc.mode = j.contains("mode") ? mode_from_name(j.at("mode").get<std::string>())
                                     : Mode::sync_track;

        sc.mac_phase0.resize(n);
        for (int i = 0; i < n; ++i) sc.mac_phase0[i] = (i + 1) * 1e-10;
        if (j.contains("init")) {
            const json& ji = j.at("init");
            reject_unknown(ji, {"mac_phase", "gac_jitter_std"}, "init");
            if (ji.contains("mac_phase")) {
                if (static_cast<int>(ji.at("mac_phase").size()) != n)
                    throw ValidationError("config: init.mac_phase must have one entry per clock");
                for (int i = 0; i < n; ++i) sc.mac_phase0[i] = ji.at("mac_phase").at(i).get<double>();
            }
            if (ji.contains("gac_jitter_std"))
                sc.gac_jitter_std = require_nonneg(ji, "gac_jitter_std", "init");
        }

        if (j.contains("design")) {
            const json& jd = j.at("design");
            reject_unknown(jd,
                           {"dare_tol", "dare_max_iter", "sync_grid_points", "sync_polish_rounds",
                            "tracking_multistarts", "tracking_max_iter", "qtilde",
                            "edge_filter_input"},
                           "design");
            DesignConfig& dc = out.design;
            if (jd.contains("dare_tol")) dc.dare_tol = jd.at("dare_tol").get<double>();
            if (jd.contains("dare_max_iter")) dc.dare_max_iter = jd.at("dare_max_iter").get<int>();
            if (jd.contains("sync_grid_points"))
                dc.sync.grid_points = jd.at("sync_grid_points").get<int>();
            if (jd.contains("sync_polish_rounds"))
                dc.sync.polish_rounds = jd.at("sync_polish_rounds").get<int>();
            if (jd.contains("tracking_multistarts"))
                dc.tracking.multistarts = jd.at("tracking_multistarts").get<int>();
            if (jd.contains("tracking_max_iter"))
                dc.tracking.max_iter = jd.at("tracking_max_iter").get<int>();
            if (jd.contains("qtilde")) {
                const std::string q = jd.at("qtilde").get<std::string>();
                if (q == "derived")
                    dc.qtilde = QtildeMode::derived;
                else if (q == "identity")
                    dc.qtilde = QtildeMode::identity;
                else
                    throw ValidationError("config: design.qtilde must be derived or identity");
            }
            if (jd.contains("edge_filter_input")) {
                const std::string v = jd.at("edge_filter_input").get<std::string>();
                if (v == "include")
                    sc.edge_filter_input = true;
                else if (v == "ignore")
                    sc.edge_filter_input = false;
                else
                    throw ValidationError(
                        "config: design.edge_filter_input must be include or ignore");
            }
        }

        if (j.contains("outputs")) {
            const json& jo = j.at("outputs");
            reject_unknown(jo, {"gains", "trace"}, "outputs");
            if (jo.contains("gains")) out.gains_out = jo.at("gains").get<std::string>();
            if (jo.contains("trace")) out.trace_out = jo.at("trace").get<std::string>();
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config: ") + e.what());
    }
    return out;
}

ScenarioFile load_scenario_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open: " + path);
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return parse_scenario_json(text);
}

} // namespace chronos
