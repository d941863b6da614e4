#include "chronos/numerics.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace chronos {

Mat kron(const Mat& a, const Mat& b) {
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

Mat pinv(const Mat& m) {
    Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vec& sv = svd.singularValues();
    const double cutoff = sv.size() > 0 ? 1e-12 * sv(0) : 0.0;
    Vec inv_sv = Vec::Zero(sv.size());
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > cutoff) inv_sv(i) = 1.0 / sv(i);
    return svd.matrixV() * inv_sv.asDiagonal() * svd.matrixU().transpose();
}

namespace {

double inf_norm(const Mat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

} // namespace

DareSolution solve_dare(const Mat& a, const Mat& c, const Mat& q, const Mat& r,
                        double tol, int max_iter) {
    if (a.rows() != a.cols()) throw DimensionMismatch("solve_dare: A must be square");
    if (c.cols() != a.rows()) throw DimensionMismatch("solve_dare: C column count must match A");
    if (q.rows() != a.rows() || q.cols() != a.cols())
        throw DimensionMismatch("solve_dare: Q must match A");
    if (r.rows() != c.rows() || r.cols() != c.rows())
        throw DimensionMismatch("solve_dare: R must be square of measurement dimension");

    Mat p = 0.5 * (q + q.transpose());
    DareSolution sol;
    for (int it = 1; it <= max_iter; ++it) {
        Mat innov = c * p * c.transpose() + r;
        Eigen::FullPivLU<Mat> lu(innov);
        if (!lu.isInvertible())
            throw SingularInnovation("solve_dare: C P C^T + R is singular");
        Mat apct = a * p * c.transpose();
        Mat next = a * p * a.transpose() - apct * lu.solve(apct.transpose()) + q;
        next = 0.5 * (next + next.transpose());
        const double diff = inf_norm(next - p);
        const double scale = std::max(inf_norm(next), 1e-300);
        p = next;
        if (diff <= tol * scale) {
            // confirm the fixed point with one more evaluation of the map
            Mat innov2 = c * p * c.transpose() + r;
            Eigen::FullPivLU<Mat> lu2(innov2);
            if (!lu2.isInvertible())
                throw SingularInnovation("solve_dare: C P C^T + R is singular");
            Mat apct2 = a * p * c.transpose();
            Mat rhs = a * p * a.transpose() - apct2 * lu2.solve(apct2.transpose()) + q;
            sol.residual = inf_norm(rhs - p) / std::max(inf_norm(p), 1e-300);
            sol.P = p;
            sol.H = apct2 * lu2.inverse();
            sol.iterations = it;
            return sol;
        }
    }
    throw NonConvergence("solve_dare: no fixed point within max_iter iterations");
}

Mat solve_dlyap(const Mat& m, const Mat& q) {
    if (m.rows() != m.cols()) throw DimensionMismatch("solve_dlyap: M must be square");
    if (q.rows() != m.rows() || q.cols() != m.cols())
        throw DimensionMismatch("solve_dlyap: Q must match M");
    if (spectral_radius(m) >= 1.0)
        throw UnstableCoefficient("solve_dlyap: spectral radius of M is not < 1");

    const Eigen::Index n = m.rows();
    Mat sys = Mat::Identity(n * n, n * n) - kron(m, m);
    Vec vec_q(n * n);
    for (Eigen::Index j = 0; j < n; ++j)
        vec_q.segment(j * n, n) = q.col(j);
    Vec vec_p = sys.partialPivLu().solve(vec_q);
    Mat p(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        p.col(j) = vec_p.segment(j * n, n);
    return 0.5 * (p + p.transpose());
}

double spectral_radius(const Mat& m) {
    if (m.rows() != m.cols()) throw DimensionMismatch("spectral_radius: matrix must be square");
    if (m.size() == 0) return 0.0;
    Eigen::EigenSolver<Mat> es(m, /*computeEigenvectors=*/false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

Mat psd_factor(const Mat& q) {
    if (q.rows() != q.cols()) throw DimensionMismatch("psd_factor: matrix must be square");
    const double trace = std::max(q.trace(), 0.0);

    if (q.rows() == 2) {
        const double q11 = q(0, 0), q12 = q(0, 1), q22 = q(1, 1);
        if (std::min(q11, q22) < -1e-10 * std::max(trace, 1e-300))
            throw NotPsd("psd_factor: negative diagonal");
        Mat l = Mat::Zero(2, 2);
        if (q22 > 0.0) {
            const double c = std::sqrt(q22);
            const double b = q12 / c;
            const double a2 = q11 - b * b;
            if (a2 < -1e-10 * std::max(trace, 1e-300))
                throw NotPsd("psd_factor: 2x2 input is not PSD");
            l(0, 0) = std::sqrt(std::max(a2, 0.0));
            l(0, 1) = b;
            l(1, 1) = c;
        } else {
            if (std::abs(q12) > 1e-10 * std::max(trace, 1e-300))
                throw NotPsd("psd_factor: off-diagonal entry with zero diagonal");
            l(0, 0) = std::sqrt(std::max(q11, 0.0));
        }
        return l;
    }

    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (q + q.transpose()));
    Vec ev = es.eigenvalues();
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev(i) < -1e-10 * std::max(trace, 1e-300))
            throw NotPsd("psd_factor: eigenvalue below PSD tolerance");
        if (ev(i) < 0.0) ev(i) = 0.0;
    }
    return es.eigenvectors() * ev.cwiseSqrt().asDiagonal();
}

} // namespace chronos
