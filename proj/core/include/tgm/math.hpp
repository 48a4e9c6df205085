#pragma once

#include <Eigen/Dense>

namespace tgm {

/// Digamma function psi(x) for x > 0.
///
/// Asymptotic expansion in 1/x^2, with the recurrence psi(x) = psi(x+1) - 1/x
/// used to shift small arguments into the expansion's range. Absolute error
/// is below 1e-12 on (0, inf); the responsibility softmax amplifies errors,
/// hence the tight target.
double digamma(double x);

/// log of the multivariate gamma function, ln Gamma_p(a).
double log_multigamma(int p, double a);

/// log of the multivariate beta function of a Dirichlet concentration vector.
double log_beta(const Eigen::VectorXd& concentration);

/// Cholesky factor of a symmetric positive-definite matrix.
///
/// The input is symmetrized as (M + M^T)/2 before factorization; asymmetry
/// beyond `symmetry_tol` (relative to the largest entry) or a failed
/// factorization throws std::invalid_argument tagged with `what`.
Eigen::LLT<Eigen::MatrixXd> cholesky(const Eigen::MatrixXd& m, const char* what,
                                     double symmetry_tol = 1e-10);

/// ln |M| for symmetric positive-definite M, via Cholesky.
double log_det_spd(const Eigen::MatrixXd& m, const char* what);

/// Inverse of a symmetric positive-definite matrix, via Cholesky.
Eigen::MatrixXd inverse_spd(const Eigen::MatrixXd& m, const char* what);

/// Inverse for matrices that are positive-definite by construction but may
/// be numerically borderline after long accumulate/invert chains. Escalating
/// diagonal jitter is added until the factorization succeeds.
Eigen::MatrixXd inverse_spd_guarded(const Eigen::MatrixXd& m, const char* what);

/// True if M is symmetric within tol and admits a Cholesky factorization.
bool is_spd(const Eigen::MatrixXd& m, double symmetry_tol = 1e-10);

/// True if M factorizes and its Cholesky pivots are not nearly degenerate
/// (guards inversion of empirical covariances from near-collinear points).
bool is_well_conditioned_spd(const Eigen::MatrixXd& m, double pivot_ratio = 1e-9);

/// Minimum-cost assignment between rows and columns of a rectangular cost
/// matrix (Hungarian / Jonker-Volgenant style). Returns, for each row, the
/// assigned column or -1 when rows > cols leaves it unmatched.
std::vector<int> min_cost_assignment(const Eigen::MatrixXd& cost);

}  // namespace tgm
