#pragma once

#include <Eigen/Dense>

#include "chronos/errors.hpp"

namespace chronos {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Result of a steady-state discrete algebraic Riccati solve.
///
/// `P` is the steady one-step prediction covariance; `H` is the predictor
/// gain A P C^T (C P C^T + R)^-1. `residual` is the relative fixed-point
/// residual |RHS(P) - P|_inf / max(|P|_inf, eps) reached on return.
struct DareSolution {
    Mat P;
    Mat H;
    int iterations = 0;
    double residual = 0.0;
};

/// Kronecker product a (x) b.
Mat kron(const Mat& a, const Mat& b);

/// Moore-Penrose pseudoinverse. Singular values below 1e-12 * sigma_max
/// are treated as zero.
Mat pinv(const Mat& m);

/// Solves P = A P A^T - A P C^T (C P C^T + R)^-1 C P A^T + Q by fixed-point
/// iteration from P0 = Q.
///
/// Throws SingularInnovation when C P C^T + R is numerically singular and
/// NonConvergence when the relative tolerance is not met in max_iter steps.
DareSolution solve_dare(const Mat& a, const Mat& c, const Mat& q, const Mat& r,
                        double tol = 1e-12, int max_iter = 1000000);

/// Solves M P M^T - P + Q = 0 via Kronecker vectorization
/// vec(P) = (I - M (x) M)^-1 vec(Q). Requires spectral_radius(m) < 1.
Mat solve_dlyap(const Mat& m, const Mat& q);

/// Largest eigenvalue magnitude of a square matrix.
double spectral_radius(const Mat& m);

/// Factor L with L L^T = q for symmetric PSD q. 2x2 inputs use a closed
/// triangular form that tolerates the singular (zero random-walk) case;
/// larger inputs use an eigendecomposition with small negative eigenvalues
/// clipped to zero.
Mat psd_factor(const Mat& q);

} // namespace chronos
