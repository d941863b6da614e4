#include "chronos/gains.hpp"

#include <fstream>

#include <json.hpp>

#include "chronos/sim.hpp"

namespace chronos {

namespace {

using nlohmann::json;

json matrix_to_json(const Mat& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Mat matrix_from_json(const json& j) {
    if (!j.is_array() || j.empty()) return Mat();
    const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
    const Eigen::Index cols = static_cast<Eigen::Index>(j.at(0).size());
    Mat m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const json& row = j.at(i);
        if (static_cast<Eigen::Index>(row.size()) != cols)
            throw ValidationError("gains json: ragged matrix");
        for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = row.at(c).get<double>();
    }
    return m;
}

void check_pd_diag(const Mat& m, const char* what) {
    Eigen::SelfAdjointEigenSolver<Mat> es(m);
    if (m.size() == 0 || es.eigenvalues().minCoeff() <= 0.0)
        throw ValidationError(std::string("design_gains: ") + what +
                              " must be positive definite for gain design");
}

} // namespace

GainSet design_gains(const Scenario& sc, const DesignConfig& cfg) {
    const Topology& topo = sc.topo;
    check_pd_diag(sc.R, "edge measurement covariance");
    check_pd_diag(sc.R_G, "receiver measurement covariance");

    const Mat q_ens = stacked_process_cov(sc.clocks, sc.tau);
    std::vector<ClockParams> gparams;
    for (const auto& gp : sc.gnss) gparams.push_back(gp.params);
    const Mat q_gnss = stacked_process_cov(gparams, sc.tau);

    GainSet out;
    out.tau = sc.tau;
    out.s = sc.broadcast_period;
    out.n = topo.n;
    out.g = topo.g;
    out.edges = topo.edges;
    out.attachments = topo.attachments;

    const SyncGain sg = design_sync_gain(topo, sc.tau, cfg.sync);
    out.F = sg.F;
    out.sync_radius = sg.achieved_radius;

    std::vector<EdgeFilter> efs;
    int offset = 0;
    for (int i = 0; i < topo.n; ++i) {
        const int mi = static_cast<int>(topo.neighbors[i].size());
        const Mat r_i = sc.R.block(offset, offset, mi, mi);
        efs.push_back(design_edge_filter(topo, i, q_ens, r_i, sc.tau, cfg.dare_tol,
                                         cfg.dare_max_iter));
        out.H_edge.push_back(efs.back().gain);
        out.P_edge.push_back(efs.back().P);
        offset += mi;
    }

    const SupervisorFilter sup = design_supervisor_filter(topo, q_ens, q_gnss, sc.R_G, sc.tau,
                                                          cfg.dare_tol, cfg.dare_max_iter);
    out.H_sup = sup.gain;
    out.P_sup = sup.P;

    const GnssEdgeFilter gef = design_gnss_edge_filter(topo, q_ens, q_gnss, sc.R_G, sc.tau,
                                                       cfg.dare_tol, cfg.dare_max_iter);
    out.H_gnss = gef.gain;
    out.P_gnss = gef.P;

    const TrackingContext ctx = make_tracking_context(topo, sup, efs, q_ens, sc.R, sc.tau,
                                                      sc.broadcast_period, cfg.qtilde);
    const TrackingGain tg = design_tracking_gain(ctx, cfg.tracking);
    out.F_B = tg.F_B;
    out.margin = tg.margin;
    out.objective = tg.objective;
    out.ab_radius = tg.ab_radius;
    return out;
}

std::string gains_to_json(const GainSet& g) {
    json j;
    j["F"] = {g.F[0], g.F[1]};
    j["F_B"] = {g.F_B[0], g.F_B[1]};
    j["sync_radius"] = g.sync_radius;
    j["margin"] = g.margin;
    j["objective"] = g.objective;
    j["ab_radius"] = g.ab_radius;
    json h_i = json::object(), p_i = json::object();
    for (size_t i = 0; i < g.H_edge.size(); ++i) {
        const std::string key = std::to_string(i + 1);
        h_i[key] = matrix_to_json(g.H_edge[i]);
        p_i[key] = matrix_to_json(g.P_edge[i]);
    }
    j["H_i_star"] = std::move(h_i);
    j["P_i"] = std::move(p_i);
    j["H_ztilde_star"] = {g.H_sup[0], g.H_sup[1]};
    j["P_ztilde"] = matrix_to_json(g.P_sup);
    j["H_G_star"] = matrix_to_json(g.H_gnss);
    j["P_G"] = matrix_to_json(g.P_gnss);
    json meta;
    meta["tau"] = g.tau;
    meta["s"] = g.s;
    meta["n"] = g.n;
    meta["g"] = g.g;
    json edges = json::array();
    for (auto [a, b] : g.edges) edges.push_back({a + 1, b + 1});
    meta["edges"] = std::move(edges);
    json atts = json::array();
    for (auto [gac, mac] : g.attachments) atts.push_back({gac + 1, mac + 1});
    meta["attachments"] = std::move(atts);
    j["meta"] = std::move(meta);
    return j.dump(2) + "\n";
}

GainSet gains_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("gains json: ") + e.what());
    }
    try {
        GainSet g;
        g.F = Eigen::RowVector2d(j.at("F").at(0).get<double>(), j.at("F").at(1).get<double>());
        g.F_B =
            Eigen::RowVector2d(j.at("F_B").at(0).get<double>(), j.at("F_B").at(1).get<double>());
        g.sync_radius = j.at("sync_radius").get<double>();
        g.margin = j.at("margin").get<double>();
        g.objective = j.at("objective").get<double>();
        g.ab_radius = j.at("ab_radius").get<double>();
        const json& meta = j.at("meta");
        g.tau = meta.at("tau").get<double>();
        g.s = meta.at("s").get<long>();
        g.n = meta.at("n").get<int>();
        g.g = meta.at("g").get<int>();
        for (const auto& e : meta.at("edges"))
            g.edges.emplace_back(e.at(0).get<int>() - 1, e.at(1).get<int>() - 1);
        for (const auto& e : meta.at("attachments"))
            g.attachments.emplace_back(e.at(0).get<int>() - 1, e.at(1).get<int>() - 1);
        for (int i = 1; i <= g.n; ++i) {
            const std::string key = std::to_string(i);
            g.H_edge.push_back(matrix_from_json(j.at("H_i_star").at(key)));
            g.P_edge.push_back(matrix_from_json(j.at("P_i").at(key)));
        }
        g.H_sup = Eigen::Vector2d(j.at("H_ztilde_star").at(0).get<double>(),
                                  j.at("H_ztilde_star").at(1).get<double>());
        g.P_sup = matrix_from_json(j.at("P_ztilde"));
        g.H_gnss = matrix_from_json(j.at("H_G_star"));
        g.P_gnss = matrix_from_json(j.at("P_G"));
        return g;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("gains json: ") + e.what());
    }
}

void save_gains(const GainSet& gains, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for writing: " + path);
    f << gains_to_json(gains);
    if (!f) throw IoError("write failed: " + path);
}

GainSet load_gains(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open: " + path);
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return gains_from_json(text);
}

} // namespace chronos
