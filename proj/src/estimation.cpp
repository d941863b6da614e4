#include "chronos/estimation.hpp"

namespace chronos {

Mat stacked_process_cov(const std::vector<ClockParams>& params, double tau) {
    const int n = static_cast<int>(params.size());
    Mat q = Mat::Zero(2 * n, 2 * n);
    for (int i = 0; i < n; ++i)
        q.block<2, 2>(2 * i, 2 * i) = process_noise_cov(params[i], tau);
    return q;
}

void EdgeFilter::step(const Vec& y, const Vec& known_input) {
    if (y.size() != m) throw DimensionMismatch("EdgeFilter::step: measurement size");
    if (known_input.size() != 2 * m) throw DimensionMismatch("EdgeFilter::step: input size");
    estimate = A * estimate + gain * (y - C * estimate) + known_input;
}

EdgeFilter design_edge_filter(const Topology& topo, int node, const Mat& ensemble_q,
                              const Mat& r_i, double tau, double dare_tol, int dare_max_iter) {
    if (node < 0 || node >= topo.n) throw BadIndex("design_edge_filter: node out of range");
    EdgeFilter f;
    f.node = node;
    f.m = static_cast<int>(topo.neighbors[node].size());
    if (r_i.rows() != f.m || r_i.cols() != f.m)
        throw DimensionMismatch("design_edge_filter: R_i size must equal neighbor count");
    f.A = kron(Mat::Identity(f.m, f.m), clock_a(tau));
    f.C = kron(Mat::Identity(f.m, f.m), clock_c());
    const Mat vi2 = kron(topo.V_i[node], Mat::Identity(2, 2));
    f.Qbar = vi2 * ensemble_q * vi2.transpose();
    f.R = r_i;
    DareSolution sol = solve_dare(f.A, f.C, f.Qbar, f.R, dare_tol, dare_max_iter);
    f.P = sol.P;
    f.gain = sol.H;
    f.estimate = Vec::Zero(2 * f.m);
    return f;
}

void SupervisorFilter::step(double ybar, const Vec& xi_hat_all, const Vec& u) {
    if (xi_hat_all.size() != compensation.cols())
        throw DimensionMismatch("SupervisorFilter::step: stacked estimate size");
    if (u.size() != input_map.cols()) throw DimensionMismatch("SupervisorFilter::step: control size");
    const double innovation =
        ybar + g * clock_c().dot(estimate) + compensation.dot(xi_hat_all);
    estimate = A * estimate + A * gain * innovation + input_map * u;
}

SupervisorFilter design_supervisor_filter(const Topology& topo, const Mat& ensemble_q,
                                          const Mat& gnss_q, const Mat& r_g, double tau,
                                          double dare_tol, int dare_max_iter) {
    if (topo.g < 1) throw BadIndex("design_supervisor_filter: topology has no receivers");
    if (r_g.rows() != topo.g || r_g.cols() != topo.g)
        throw DimensionMismatch("design_supervisor_filter: R_G size");
    SupervisorFilter f;
    f.g = topo.g;
    f.A = clock_a(tau);

    const Mat qt2 = kron(topo.q.transpose(), Mat::Identity(2, 2));
    const Mat qgt2 = kron(topo.q_G.transpose(), Mat::Identity(2, 2));
    f.Qbar_G = qt2 * ensemble_q * qt2.transpose() + qgt2 * gnss_q * qgt2.transpose();
    f.Rbar_G = Vec::Ones(topo.g).dot(r_g * Vec::Ones(topo.g));

    const Mat c_eff = -static_cast<double>(f.g) * Mat(clock_c());
    Mat rbar(1, 1);
    rbar(0, 0) = f.Rbar_G;
    DareSolution sol = solve_dare(f.A, c_eff, f.Qbar_G, rbar, dare_tol, dare_max_iter);
    f.P = sol.P;
    // gain without the A factor; the step applies A explicitly
    const double innov = (c_eff * f.P * c_eff.transpose())(0, 0) + f.Rbar_G;
    if (innov <= 0.0) throw SingularInnovation("design_supervisor_filter: zero innovation variance");
    f.gain = (f.P * c_eff.transpose() / innov).col(0);

    f.compensation = kron((topo.q_A.transpose() * topo.Vdagger).eval(), Mat(clock_c())).row(0);
    f.input_map = kron(topo.q.transpose(), Mat(clock_b(tau)));
    return f;
}

void GnssEdgeFilter::step(const Vec& y, const Vec& known_input) {
    if (y.size() != g) throw DimensionMismatch("GnssEdgeFilter::step: measurement size");
    if (known_input.size() != 2 * g) throw DimensionMismatch("GnssEdgeFilter::step: input size");
    estimate = A * estimate + gain * (y - C * estimate) + known_input;
}

GnssEdgeFilter design_gnss_edge_filter(const Topology& topo, const Mat& ensemble_q,
                                       const Mat& gnss_q, const Mat& r_g, double tau,
                                       double dare_tol, int dare_max_iter) {
    if (topo.g < 1) throw BadIndex("design_gnss_edge_filter: topology has no receivers");
    if (r_g.rows() != topo.g || r_g.cols() != topo.g)
        throw DimensionMismatch("design_gnss_edge_filter: R_G size");
    GnssEdgeFilter f;
    f.g = topo.g;
    f.A = kron(Mat::Identity(f.g, f.g), clock_a(tau));
    f.C = kron(Mat::Identity(f.g, f.g), clock_c());
    Mat joint = Mat::Zero(2 * (topo.n + topo.g), 2 * (topo.n + topo.g));
    joint.topLeftCorner(2 * topo.n, 2 * topo.n) = ensemble_q;
    joint.bottomRightCorner(2 * topo.g, 2 * topo.g) = gnss_q;
    const Mat vg2 = kron(topo.V_G, Mat::Identity(2, 2));
    const Mat qbar = vg2 * joint * vg2.transpose();
    DareSolution sol = solve_dare(f.A, f.C, qbar, r_g, dare_tol, dare_max_iter);
    f.P = sol.P;
    f.gain = sol.H;
    f.estimate = Vec::Zero(2 * f.g);
    return f;
}

double summed_measurement(const Vec& y) { return y.sum(); }

} // namespace chronos
