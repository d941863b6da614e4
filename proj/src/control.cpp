#include "chronos/control.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "chronos/clock.hpp"

namespace chronos {

namespace {

double spec_rad_2x2(const Eigen::Matrix2d& m) {
    const double tr = m(0, 0) + m(1, 1);
    const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    const double disc = tr * tr - 4.0 * det;
    if (disc >= 0.0) {
        const double root = std::sqrt(disc);
        return std::max(std::abs((tr + root) / 2.0), std::abs((tr - root) / 2.0));
    }
    return std::sqrt(std::abs(det));
}

// worst modal radius over the nonzero Laplacian eigenvalues
double sync_worst_radius(const Eigen::RowVector2d& f, const std::vector<double>& mus,
                         const Eigen::Matrix2d& a, const Eigen::Vector2d& b) {
    double worst = 0.0;
    for (double mu : mus)
        worst = std::max(worst, spec_rad_2x2(a - mu * b * f));
    return worst;
}

} // namespace

SyncGain design_sync_gain(const Topology& topo, double tau, const SyncSearchConfig& cfg) {
    const Eigen::Matrix2d a = clock_a(tau);
    const Eigen::Vector2d b = clock_b(tau);

    Eigen::SelfAdjointEigenSolver<Mat> es(topo.laplacian);
    std::vector<double> mus;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        if (es.eigenvalues()(i) > 1e-9) mus.push_back(es.eigenvalues()(i));
    const double mu_max = mus.back();

    // Jury conditions of A - mu B F bound the search box:
    // f1 > 0, 0 < mu f2 < 2, mu (tau f1 + 2 f2) < 4.
    const double hi1 = 4.0 / (tau * mu_max);
    const double hi2 = 2.0 / mu_max;
    const int np = std::max(cfg.grid_points, 4);
    std::vector<double> grid1(np), grid2(np);
    for (int i = 0; i < np; ++i) {
        const double t = static_cast<double>(i) / (np - 1);
        grid1[i] = hi1 * std::pow(10.0, -4.0 * (1.0 - t));
        grid2[i] = hi2 * std::pow(10.0, -4.0 * (1.0 - t));
    }

    std::vector<double> score(static_cast<size_t>(np) * np);
#pragma omp parallel for schedule(static)
    for (int idx = 0; idx < np * np; ++idx) {
        const Eigen::RowVector2d f(grid1[idx / np], grid2[idx % np]);
        score[idx] = sync_worst_radius(f, mus, a, b);
    }
    int best_idx = 0;
    for (int idx = 1; idx < np * np; ++idx)
        if (score[idx] < score[best_idx]) best_idx = idx;

    Eigen::RowVector2d f(grid1[best_idx / np], grid2[best_idx % np]);
    double best = score[best_idx];
    const double mult[] = {0.7, 0.85, 0.95, 1.05, 1.2, 1.4};
    for (int round = 0; round < cfg.polish_rounds; ++round) {
        bool improved = false;
        for (int coord = 0; coord < 2; ++coord) {
            for (double m : mult) {
                Eigen::RowVector2d cand = f;
                cand(coord) *= m;
                const double r = sync_worst_radius(cand, mus, a, b);
                if (r < best) {
                    best = r;
                    f = cand;
                    improved = true;
                }
            }
        }
        if (!improved) break;
    }

    if (best >= 1.0)
        throw NoStabilizingGainFound("design_sync_gain: search budget exhausted");

    SyncGain out;
    out.F = f;
    out.achieved_radius =
        spectral_radius(kron(topo.Pi, a) - kron(topo.laplacian, b * f));
    return out;
}

Vec sync_control(const Vec& xi_hat, const Vec& xi_hat_rev, const Eigen::RowVector2d& f,
                 const Topology& topo) {
    const int m = topo.edge_count();
    if (xi_hat.size() != 2 * m || xi_hat_rev.size() != 2 * m)
        throw DimensionMismatch("sync_control: stacked estimate size");
    Vec u = Vec::Zero(topo.n);
    for (int e = 0; e < m; ++e)
        u[topo.directed[e].at] +=
            0.5 * f.dot(xi_hat.segment<2>(2 * e) - xi_hat_rev.segment<2>(2 * e));
    return u;
}

Vec tracking_control(const Eigen::Vector2d& z_tilde_hat, const Eigen::RowVector2d& f_b, int n) {
    return Vec::Constant(n, -f_b.dot(z_tilde_hat));
}

Vec alt_tracking_control(const Vec& xi_g_hat, const Eigen::RowVector2d& f_b, int n, int g) {
    if (xi_g_hat.size() != 2 * g)
        throw DimensionMismatch("alt_tracking_control: estimate size");
    double acc = 0.0;
    for (int j = 0; j < g; ++j) acc += f_b.dot(xi_g_hat.segment<2>(2 * j));
    return Vec::Constant(n, acc / g);
}

bool is_broadcast_step(long k, long s) { return (k + 1) % s == 0; }

Vec combined_control(long k, long s, const Vec& u_syn, const Vec& u_g) {
    if (u_syn.size() != u_g.size()) throw DimensionMismatch("combined_control: control sizes");
    return is_broadcast_step(k, s) ? Vec(u_syn + u_g) : u_syn;
}

Eigen::Matrix2d a_b(long gamma, const Eigen::RowVector2d& f_b, double tau) {
    Eigen::Matrix2d a_pow;
    a_pow << 1.0, gamma * tau, 0.0, 1.0;
    return (clock_a(tau) - clock_b(tau) * f_b) * a_pow;
}

TrackingContext make_tracking_context(const Topology& topo, const SupervisorFilter& sup,
                                      const std::vector<EdgeFilter>& edge_filters,
                                      const Mat& ensemble_q, const Mat& edge_r, double tau,
                                      long s, QtildeMode mode) {
    if (static_cast<int>(edge_filters.size()) != topo.n)
        throw DimensionMismatch("make_tracking_context: one edge filter per node");
    const int m = topo.edge_count();

    TrackingContext ctx;
    ctx.A = clock_a(tau);
    ctx.B = clock_b(tau);
    ctx.tau = tau;
    ctx.s = s;
    ctx.qtilde_mode = mode;

    const Eigen::RowVector2d c = clock_c();
    ctx.block22 = ctx.A * (Eigen::Matrix2d::Identity() + sup.g * sup.gain * c);
    ctx.block23 = (ctx.A * sup.gain) * sup.compensation;

    Mat h_star = Mat::Zero(2 * m, m);
    {
        int row = 0, col = 0;
        for (const auto& ef : edge_filters) {
            h_star.block(row, col, 2 * ef.m, ef.m) = ef.gain;
            row += 2 * ef.m;
            col += ef.m;
        }
    }
    const Mat i_e_a = kron(Mat::Identity(m, m), Mat(ctx.A));
    const Mat i_e_c = kron(Mat::Identity(m, m), Mat(c));
    ctx.block33 = i_e_a * (Mat::Identity(2 * m, 2 * m) - h_star * i_e_c);

    // per-step covariance of [vbar - vbar_G; -A H_z 1^T w_G + vbar - vbar_G;
    //                         -(I_E (x) A) H* w + (V (x) I_2) v]
    const Mat qt2 = kron(topo.q.transpose(), Mat::Identity(2, 2));
    const Mat v2 = kron(topo.V, Mat::Identity(2, 2));
    const Mat s13 = qt2 * ensemble_q * v2.transpose();
    const Eigen::Vector2d ahz = ctx.A * sup.gain;
    const Mat mh = i_e_a * h_star;

    Mat sigma = Mat::Zero(4 + 2 * m, 4 + 2 * m);
    sigma.block<2, 2>(0, 0) = sup.Qbar_G;
    sigma.block<2, 2>(0, 2) = sup.Qbar_G;
    sigma.block<2, 2>(2, 0) = sup.Qbar_G;
    sigma.block<2, 2>(2, 2) = sup.Qbar_G + sup.Rbar_G * (ahz * ahz.transpose());
    sigma.block(0, 4, 2, 2 * m) = s13;
    sigma.block(4, 0, 2 * m, 2) = s13.transpose();
    sigma.block(2, 4, 2, 2 * m) = s13;
    sigma.block(4, 2, 2 * m, 2) = s13.transpose();
    sigma.block(4, 4, 2 * m, 2 * m) =
        mh * edge_r * mh.transpose() + v2 * ensemble_q * v2.transpose();
    ctx.sigma_rho = 0.5 * (sigma + sigma.transpose());
    return ctx;
}

ClosedLoopMatrices assemble_closed_loop(const TrackingContext& ctx,
                                        const Eigen::RowVector2d& f_b) {
    const int em = static_cast<int>(ctx.block33.rows());
    const int d = 4 + em;
    ClosedLoopMatrices cl;
    cl.broadcast_period = ctx.s;
    cl.Atilde = Mat::Zero(d, d);
    cl.Atilde.block<2, 2>(0, 0) = ctx.A - ctx.B * f_b;
    cl.Atilde.block<2, 2>(0, 2) = ctx.B * f_b;
    cl.Atilde.block(2, 2, 2, 2) = ctx.block22;
    cl.Atilde.block(2, 4, 2, em) = ctx.block23;
    cl.Atilde.block(4, 4, em, em) = ctx.block33;
    cl.A0tilde = cl.Atilde;
    cl.A0tilde.block<2, 2>(0, 0) = ctx.A;
    cl.A0tilde.block<2, 2>(0, 2).setZero();
    cl.Ctilde = Mat::Zero(2, d);
    cl.Ctilde.block<2, 2>(0, 0).setIdentity();
    return cl;
}

Mat assemble_qtilde(const ClosedLoopMatrices& cl, const Mat& sigma_rho, long s) {
    if (sigma_rho.rows() != cl.Atilde.rows() || sigma_rho.cols() != cl.Atilde.cols())
        throw DimensionMismatch("assemble_qtilde: sigma size");
    Mat acc = sigma_rho;
    if (s >= 2) {
        Mat w = cl.Atilde;
        acc += w * sigma_rho * w.transpose();
        for (long i = 3; i <= s; ++i) {
            w = w * cl.A0tilde;
            if (w.cwiseAbs().maxCoeff() > 1e100)
                throw UnstableCoefficient("assemble_qtilde: intermediate power overflow");
            acc += w * sigma_rho * w.transpose();
        }
    }
    return 0.5 * (acc + acc.transpose());
}

namespace {

// strictly positive when (f_b1, f_b2) violates the Jury box of A_B(s-1)
double margin_violation(double f_b1, double f_b2, double tau, long s) {
    double v = 0.0;
    const double den = f_b1 * tau * s + 2.0 * f_b2;
    if (f_b1 <= 0.0) v += 1.0 - f_b1 * tau * s;
    if (f_b2 <= 0.0) v += 1.0 - f_b2;
    if (f_b2 >= 2.0) v += f_b2 - 1.0;
    if (den >= 4.0) v += den - 3.0;
    return v;
}

Mat closed_loop_period_map(const ClosedLoopMatrices& cl, long s) {
    Mat pow = Mat::Identity(cl.A0tilde.rows(), cl.A0tilde.cols());
    Mat base = cl.A0tilde;
    long e = s - 1;
    while (e > 0) {
        if (e & 1) pow = pow * base;
        base = base * base;
        e >>= 1;
    }
    return cl.Atilde * pow;
}

} // namespace

double h2_objective(double f_b1, double f_b2, const TrackingContext& ctx) {
    if (margin_violation(f_b1, f_b2, ctx.tau, ctx.s) > 0.0)
        throw Infeasible("h2_objective: margin constraint violated");
    const Eigen::RowVector2d f_b(f_b1, f_b2);
    if (spec_rad_2x2(a_b(ctx.s - 1, f_b, ctx.tau)) >= 1.0)
        throw Infeasible("h2_objective: A_B(s-1) not Schur stable");
    ClosedLoopMatrices cl = assemble_closed_loop(ctx, f_b);
    const Mat m = closed_loop_period_map(cl, ctx.s);
    if (spectral_radius(m) >= 1.0)
        throw Infeasible("h2_objective: period map not Schur stable");
    cl.Qtilde = ctx.qtilde_mode == QtildeMode::derived
                    ? assemble_qtilde(cl, ctx.sigma_rho, ctx.s)
                    : Mat::Identity(m.rows(), m.cols());
    const Mat p = solve_dlyap(m, cl.Qtilde);
    return std::sqrt(std::max(p.block<2, 2>(0, 0).trace(), 0.0));
}

TrackingGain design_tracking_gain(const TrackingContext& ctx, const TrackingSearchConfig& cfg) {
    const double tau = ctx.tau;
    const long s = ctx.s;

    auto penalized = [&](double f1, double f2) {
        const double v = margin_violation(f1, f2, tau, s);
        if (v > 0.0) return 1e9 * (1.0 + v);
        const Eigen::RowVector2d f_b(f1, f2);
        const double rad = spec_rad_2x2(a_b(s - 1, f_b, tau));
        if (rad >= 1.0) return 1e9 * (1.0 + rad);
        try {
            return h2_objective(f1, f2, ctx);
        } catch (const Infeasible&) {
            return 1e9;
        }
    };

    // documented probe grid: fractions of the Jury box edges
    const double frac[] = {0.02, 0.05, 0.1, 0.2, 0.35, 0.5, 0.7, 0.9};
    const double hi1 = 4.0 / (tau * s);
    struct Probe {
        double f1, f2, obj;
    };
    std::vector<Probe> probes;
    for (double a : frac)
        for (double b : frac) {
            const double f1 = a * hi1;
            const double f2 = b * 2.0;
            if (margin_violation(f1, f2, tau, s) > 0.0) continue;
            probes.push_back({f1, f2, 0.0});
        }
    if (probes.empty()) throw NoFeasiblePoint("design_tracking_gain: empty feasibility grid");

#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < static_cast<int>(probes.size()); ++i)
        probes[i].obj = penalized(probes[i].f1, probes[i].f2);

    std::sort(probes.begin(), probes.end(), [](const Probe& a, const Probe& b) {
        if (a.obj != b.obj) return a.obj < b.obj;
        if (a.f1 != b.f1) return a.f1 < b.f1;
        return a.f2 < b.f2;
    });
    if (probes.front().obj >= 1e9)
        throw NoFeasiblePoint("design_tracking_gain: no stable candidate on the grid");

    const int starts = std::min<int>(cfg.multistarts, static_cast<int>(probes.size()));
    double best_f1 = probes.front().f1, best_f2 = probes.front().f2;
    double best_obj = probes.front().obj;

    for (int sidx = 0; sidx < starts; ++sidx) {
        // Nelder-Mead on (f1, f2)
        struct Vtx {
            double x, y, f;
        };
        std::array<Vtx, 3> v;
        const double x0 = probes[sidx].f1, y0 = probes[sidx].f2;
        v[0] = {x0, y0, penalized(x0, y0)};
        v[1] = {x0 * 1.1, y0, penalized(x0 * 1.1, y0)};
        v[2] = {x0, y0 * 1.1, penalized(x0, y0 * 1.1)};
        for (int it = 0; it < cfg.max_iter; ++it) {
            std::sort(v.begin(), v.end(), [](const Vtx& a, const Vtx& b) {
                if (a.f != b.f) return a.f < b.f;
                if (a.x != b.x) return a.x < b.x;
                return a.y < b.y;
            });
            const double spread = std::abs(v[2].f - v[0].f);
            const double size = std::abs(v[2].x - v[0].x) + std::abs(v[2].y - v[0].y) +
                                std::abs(v[1].x - v[0].x) + std::abs(v[1].y - v[0].y);
            if (spread <= 1e-14 * (1.0 + std::abs(v[0].f)) && size <= 1e-14 * (1.0 + std::abs(v[0].x) + std::abs(v[0].y)))
                break;
            const double cx = (v[0].x + v[1].x) / 2.0, cy = (v[0].y + v[1].y) / 2.0;
            const double rx = cx + (cx - v[2].x), ry = cy + (cy - v[2].y);
            const double fr = penalized(rx, ry);
            if (fr < v[0].f) {
                const double ex = cx + 2.0 * (cx - v[2].x), ey = cy + 2.0 * (cy - v[2].y);
                const double fe = penalized(ex, ey);
                v[2] = fe < fr ? Vtx{ex, ey, fe} : Vtx{rx, ry, fr};
            } else if (fr < v[1].f) {
                v[2] = {rx, ry, fr};
            } else {
                const double kx = cx + 0.5 * (v[2].x - cx), ky = cy + 0.5 * (v[2].y - cy);
                const double fk = penalized(kx, ky);
                if (fk < v[2].f) {
                    v[2] = {kx, ky, fk};
                } else {
                    for (int j = 1; j < 3; ++j) {
                        v[j].x = v[0].x + 0.5 * (v[j].x - v[0].x);
                        v[j].y = v[0].y + 0.5 * (v[j].y - v[0].y);
                        v[j].f = penalized(v[j].x, v[j].y);
                    }
                }
            }
        }
        std::sort(v.begin(), v.end(), [](const Vtx& a, const Vtx& b) {
            if (a.f != b.f) return a.f < b.f;
            if (a.x != b.x) return a.x < b.x;
            return a.y < b.y;
        });
        if (v[0].f < best_obj ||
            (v[0].f == best_obj && (v[0].x < best_f1 || (v[0].x == best_f1 && v[0].y < best_f2)))) {
            best_obj = v[0].f;
            best_f1 = v[0].x;
            best_f2 = v[0].y;
        }
    }

    if (best_obj >= 1e9) throw NoFeasiblePoint("design_tracking_gain: optimisation failed");

    TrackingGain out;
    out.F_B = Eigen::RowVector2d(best_f1, best_f2);
    out.objective = best_obj;
    out.margin = 4.0 / (best_f1 * tau * s + 2.0 * best_f2);
    out.ab_radius = spec_rad_2x2(a_b(s - 1, out.F_B, tau));
    return out;
}

} // namespace chronos
