#include "tgm/distributions.hpp"

#include <cmath>
#include <stdexcept>

#include "tgm/math.hpp"

namespace tgm {

void GaussianParams::validate() const {
  if (precision.rows() != mean.size() || precision.cols() != mean.size()) {
    throw std::invalid_argument("GaussianParams: precision shape does not match mean");
  }
  cholesky(precision, "GaussianParams precision");
}

void WishartParams::validate() const {
  cholesky(scale, "WishartParams scale");
  if (!(degrees_of_freedom > dim() - 1)) {
    throw std::invalid_argument("WishartParams: degrees of freedom must exceed dim - 1");
  }
}

void DirichletParams::validate() const {
  for (Eigen::Index i = 0; i < concentration.size(); ++i) {
    if (!(concentration[i] > 0.0)) {
      throw std::invalid_argument("DirichletParams: concentration entries must be > 0");
    }
  }
}

double expect_ln_det_precision(const WishartParams& w) {
  w.validate();
  const int o = w.dim();
  double r = o * M_LN2 + log_det_spd(w.scale, "expect_ln_det_precision scale");
  for (int i = 1; i <= o; ++i) {
    r += digamma(0.5 * (w.degrees_of_freedom + 1 - i));
  }
  return r;
}

double expect_quadratic_form(const Eigen::VectorXd& x, const Eigen::VectorXd& m_hat,
                             double beta_hat, const WishartParams& w) {
  const int o = w.dim();
  if (x.size() != o || m_hat.size() != o) {
    throw std::invalid_argument("expect_quadratic_form: dimension mismatch");
  }
  if (!(beta_hat > 0.0)) {
    throw std::invalid_argument("expect_quadratic_form: beta_hat must be > 0");
  }
  const Eigen::VectorXd diff = x - m_hat;
  return o / beta_hat + w.degrees_of_freedom * diff.dot(w.scale * diff);
}

double expect_ln_dirichlet(const DirichletParams& d, int k) {
  d.validate();
  if (k < 0 || k >= d.dim()) {
    throw std::out_of_range("expect_ln_dirichlet: index out of range");
  }
  return digamma(d.concentration[k]) - digamma(d.concentration.sum());
}

double gaussian_kl(const GaussianParams& p, const GaussianParams& q) {
  if (p.dim() != q.dim()) {
    throw std::invalid_argument("gaussian_kl: dimension mismatch");
  }
  const int o = p.dim();
  auto llt_p = cholesky(p.precision, "gaussian_kl p.precision");
  auto llt_q = cholesky(q.precision, "gaussian_kl q.precision");
  const double logdet_p = 2.0 * llt_p.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double logdet_q = 2.0 * llt_q.matrixL().toDenseMatrix().diagonal().array().log().sum();
  // tr(Lambda_q Sigma_p) with Sigma_p = Lambda_p^{-1}
  const Eigen::MatrixXd sigma_p = llt_p.solve(Eigen::MatrixXd::Identity(o, o));
  const double tr = (q.precision * sigma_p).trace();
  const Eigen::VectorXd diff = p.mean - q.mean;
  return 0.5 * (tr + diff.dot(q.precision * diff) - o + logdet_p - logdet_q);
}

double log_gaussian_pdf(const Eigen::VectorXd& x, const GaussianParams& g) {
  if (x.size() != g.mean.size()) {
    throw std::invalid_argument("log_gaussian_pdf: dimension mismatch");
  }
  const int o = g.dim();
  const double logdet = log_det_spd(g.precision, "log_gaussian_pdf precision");
  const Eigen::VectorXd diff = x - g.mean;
  return -0.5 * o * std::log(2.0 * M_PI) + 0.5 * logdet - 0.5 * diff.dot(g.precision * diff);
}

}  // namespace tgm
