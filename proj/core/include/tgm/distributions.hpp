#pragma once

#include <Eigen/Dense>

namespace tgm {

/// Multivariate Gaussian in mean/precision form.
struct GaussianParams {
  Eigen::VectorXd mean;
  Eigen::MatrixXd precision;  // symmetric positive-definite

  int dim() const { return static_cast<int>(mean.size()); }
  void validate() const;
};

/// Wishart distribution over precision matrices.
struct WishartParams {
  Eigen::MatrixXd scale;      // W, symmetric positive-definite
  double degrees_of_freedom;  // v > dim - 1

  int dim() const { return static_cast<int>(scale.rows()); }
  void validate() const;
};

struct DirichletParams {
  Eigen::VectorXd concentration;  // all entries > 0

  int dim() const { return static_cast<int>(concentration.size()); }
  void validate() const;
};

/// E[ln|Lambda|] under Lambda ~ Wishart(W, v):
///   O ln2 + ln|W| + sum_{i=1..O} psi((v+1-i)/2)
double expect_ln_det_precision(const WishartParams& w);

/// E[(x-mu)^T Lambda (x-mu)] under Lambda ~ Wishart(W, v),
/// mu | Lambda ~ N(m_hat, (beta_hat Lambda)^-1):
///   O/beta_hat + v (x-m_hat)^T W (x-m_hat)
double expect_quadratic_form(const Eigen::VectorXd& x, const Eigen::VectorXd& m_hat,
                             double beta_hat, const WishartParams& w);

/// E[ln D_k] under D ~ Dirichlet(d): psi(d_k) - psi(sum_i d_i). k is 0-based.
double expect_ln_dirichlet(const DirichletParams& d, int k);

/// KL(p || q) between two multivariate Gaussians, in nats.
double gaussian_kl(const GaussianParams& p, const GaussianParams& q);

/// Exact log density of x under g.
double log_gaussian_pdf(const Eigen::VectorXd& x, const GaussianParams& g);

}  // namespace tgm
