#include "tgm/vgm.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "tgm/distributions.hpp"
#include "tgm/math.hpp"

namespace tgm {

void ComponentParams::validate() const {
  if (!(beta > 0.0)) throw std::invalid_argument("ComponentParams: beta must be > 0");
  if (!(v > dim() - 1)) throw std::invalid_argument("ComponentParams: v must exceed O - 1");
  if (W.rows() != dim() || W.cols() != dim()) {
    throw std::invalid_argument("ComponentParams: W shape does not match m");
  }
  cholesky(W, "ComponentParams W");
}

void MixtureState::validate() const {
  const int k = component_count();
  for (const MixtureTier* tier : {&prior, &empirical, &posterior}) {
    if (tier->d.size() != k || static_cast<int>(tier->components.size()) != k) {
      throw std::invalid_argument("MixtureState: tier size mismatch");
    }
    for (const auto& c : tier->components) c.validate();
  }
  if (responsibilities.size() > 0) {
    if (responsibilities.cols() != k) {
      throw std::invalid_argument("MixtureState: responsibility column count mismatch");
    }
    for (Eigen::Index n = 0; n < responsibilities.rows(); ++n) {
      if (std::abs(responsibilities.row(n).sum() - 1.0) > 1e-9) {
        throw std::invalid_argument("MixtureState: responsibility row off the simplex");
      }
    }
  }
}

MixtureState init_prior_from_clusters(const ClusterAssignment& assignment,
                                      const std::vector<Eigen::VectorXd>& points) {
  const int n = static_cast<int>(points.size());
  if (n == 0 || static_cast<int>(assignment.labels.size()) != n) {
    throw std::invalid_argument("init_prior_from_clusters: assignment does not match points");
  }
  const int k = assignment.cluster_count();
  const Eigen::Index dim = points[0].size();

  // Ridge for singular cluster covariances, scaled by the data variance.
  Eigen::VectorXd data_mean = Eigen::VectorXd::Zero(dim);
  for (const auto& p : points) data_mean += p;
  data_mean /= n;
  double variance_trace = 0.0;
  for (const auto& p : points) variance_trace += (p - data_mean).squaredNorm();
  variance_trace /= n;
  const double ridge = 1e-6 * (variance_trace > 0 ? variance_trace : 1.0);

  const double d0 = 2.0 * k;
  const double beta0 = 2.0 * k;
  const double v0 = 2.0 * k + static_cast<double>(dim) - 0.99;

  MixtureState state;
  state.prior.d = Eigen::VectorXd::Constant(k, d0);
  state.prior.components.resize(k);
  for (int c = 0; c < k; ++c) {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
    int count = 0;
    for (int i = 0; i < n; ++i) {
      if (assignment.labels[i] == c) {
        mean += points[i];
        ++count;
      }
    }
    if (count == 0) throw std::invalid_argument("init_prior_from_clusters: empty cluster");
    mean /= count;

    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(dim, dim);
    for (int i = 0; i < n; ++i) {
      if (assignment.labels[i] == c) {
        const Eigen::VectorXd diff = points[i] - mean;
        cov += diff * diff.transpose();
      }
    }
    cov /= count;
    if (!is_well_conditioned_spd(cov)) {
      cov += ridge * Eigen::MatrixXd::Identity(dim, dim);
    }

    ComponentParams p;
    p.m = mean;
    p.beta = beta0;
    p.v = v0;
    p.W = inverse_spd(cov, "init_prior_from_clusters cluster covariance") / v0;
    state.prior.components[c] = std::move(p);
  }

  state.empirical = state.prior;
  state.posterior = state.prior;
  state.responsibilities = assignment.one_hot;
  return state;
}

void append_component(MixtureState& state, double d, const ComponentParams& params) {
  params.validate();
  for (MixtureTier* tier : {&state.prior, &state.empirical, &state.posterior}) {
    tier->d.conservativeResize(tier->d.size() + 1);
    tier->d[tier->d.size() - 1] = d;
    tier->components.push_back(params);
  }
  const Eigen::Index n = state.responsibilities.rows();
  state.responsibilities.conservativeResize(n, state.responsibilities.cols() + 1);
  state.responsibilities.col(state.responsibilities.cols() - 1).setZero();
}

SufficientStats compute_stats(const std::vector<Eigen::VectorXd>& points,
                              const Eigen::MatrixXd& responsibilities,
                              const std::vector<int>& indices) {
  const int k = static_cast<int>(responsibilities.cols());
  const Eigen::Index dim = points.empty() ? 0 : points[0].size();

  SufficientStats stats;
  stats.mass = Eigen::VectorXd::Zero(k);
  stats.mean.assign(k, Eigen::VectorXd::Zero(dim));
  stats.scatter.assign(k, Eigen::MatrixXd::Zero(dim, dim));
  stats.defined.assign(k, false);

  for (int idx : indices) {
    if (idx < 0 || idx >= static_cast<int>(points.size()) || idx >= responsibilities.rows()) {
      throw std::out_of_range("compute_stats: index out of range");
    }
    for (int c = 0; c < k; ++c) {
      const double r = responsibilities(idx, c);
      stats.mass[c] += r;
      stats.mean[c] += r * points[idx];
    }
  }
  for (int c = 0; c < k; ++c) {
    if (stats.mass[c] < SufficientStats::mass_epsilon) continue;
    stats.defined[c] = true;
    stats.mean[c] /= stats.mass[c];
  }
  for (int idx : indices) {
    for (int c = 0; c < k; ++c) {
      if (!stats.defined[c]) continue;
      const Eigen::VectorXd diff = points[idx] - stats.mean[c];
      stats.scatter[c] += responsibilities(idx, c) * (diff * diff.transpose());
    }
  }
  for (int c = 0; c < k; ++c) {
    if (stats.defined[c]) stats.scatter[c] /= stats.mass[c];
  }
  return stats;
}

namespace {

// Conjugate Normal-Wishart update shared by the empirical and posterior
// tiers: `base` plus the statistics gives the updated tier.
MixtureTier conjugate_update(const MixtureTier& base, const SufficientStats& stats) {
  const int k = static_cast<int>(base.components.size());
  if (stats.mass.size() != k) {
    throw std::invalid_argument("conjugate_update: stats do not match component count");
  }
  MixtureTier out = base;
  for (int c = 0; c < k; ++c) {
    if (!stats.defined[c]) continue;  // empty component keeps the base tier
    const double nk = stats.mass[c];
    const ComponentParams& b = base.components[c];
    ComponentParams& u = out.components[c];

    out.d[c] = base.d[c] + nk;
    u.v = b.v + nk;
    u.beta = b.beta + nk;
    u.m = (b.beta * b.m + nk * stats.mean[c]) / (b.beta + nk);

    const Eigen::VectorXd diff = stats.mean[c] - b.m;
    Eigen::MatrixXd w_inv = inverse_spd_guarded(b.W, "conjugate_update W")
        + nk * stats.scatter[c]
        + (b.beta * nk / (b.beta + nk)) * (diff * diff.transpose());
    u.W = inverse_spd_guarded(w_inv, "conjugate_update W inverse");
  }
  return out;
}

}  // namespace

MixtureState update_empirical_prior(MixtureState state, const SufficientStats& forget_stats) {
  state.empirical = conjugate_update(state.prior, forget_stats);
  return state;
}

MixtureState update_posterior(MixtureState state, const SufficientStats& keep_stats) {
  state.posterior = conjugate_update(state.empirical, keep_stats);
  return state;
}

namespace {

// Per-component pieces of ln rho that do not depend on x.
struct LnRhoContext {
  std::vector<double> constant;           // E[ln D_k] - O/2 ln 2pi + 1/2 E[ln|L_k|] - O/(2 beta_k)
  std::vector<double> half_v;             // v_k / 2
  std::vector<Eigen::MatrixXd> scale;     // W_k
  std::vector<Eigen::VectorXd> mean;      // m_k
};

LnRhoContext make_ln_rho_context(const MixtureTier& tier) {
  const int k = static_cast<int>(tier.components.size());
  LnRhoContext ctx;
  ctx.constant.resize(k);
  ctx.half_v.resize(k);
  ctx.scale.resize(k);
  ctx.mean.resize(k);
  const double psi_d_sum = digamma(tier.d.sum());
  for (int c = 0; c < k; ++c) {
    const ComponentParams& p = tier.components[c];
    const int o = p.dim();
    const double e_ln_d = digamma(tier.d[c]) - psi_d_sum;
    const double e_ln_det = expect_ln_det_precision({p.W, p.v});
    ctx.constant[c] = e_ln_d - 0.5 * o * std::log(2.0 * M_PI) + 0.5 * e_ln_det
                    - 0.5 * o / p.beta;
    ctx.half_v[c] = 0.5 * p.v;
    ctx.scale[c] = p.W;
    ctx.mean[c] = p.m;
  }
  return ctx;
}

Eigen::VectorXd responsibility_row(const LnRhoContext& ctx, const Eigen::VectorXd& x) {
  const int k = static_cast<int>(ctx.constant.size());
  Eigen::VectorXd ln_rho(k);
  for (int c = 0; c < k; ++c) {
    const Eigen::VectorXd diff = x - ctx.mean[c];
    ln_rho[c] = ctx.constant[c] - ctx.half_v[c] * diff.dot(ctx.scale[c] * diff);
  }
  const double m = ln_rho.maxCoeff();
  Eigen::VectorXd r = (ln_rho.array() - m).exp();
  return r / r.sum();
}

}  // namespace

Eigen::VectorXd posterior_responsibility(const MixtureState& state, const Eigen::VectorXd& x) {
  return responsibility_row(make_ln_rho_context(state.posterior), x);
}

MixtureState update_responsibilities(MixtureState state,
                                     const std::vector<Eigen::VectorXd>& points) {
  const int n = static_cast<int>(points.size());
  const int k = state.component_count();
  const LnRhoContext ctx = make_ln_rho_context(state.posterior);
  state.responsibilities.resize(n, k);
  for (int i = 0; i < n; ++i) {
    state.responsibilities.row(i) = responsibility_row(ctx, points[i]).transpose();
  }
  return state;
}

VfeTerms compute_vfe(const MixtureState& state, const std::vector<Eigen::VectorXd>& points) {
  const int k = state.component_count();
  const int n = static_cast<int>(points.size());
  const int o = state.dim();
  const MixtureTier& q = state.posterior;
  const MixtureTier& p = state.prior;

  std::vector<int> all(n);
  for (int i = 0; i < n; ++i) all[i] = i;
  const SufficientStats stats = compute_stats(points, state.responsibilities, all);

  VfeTerms t;

  // Dirichlet terms share E[ln D_k] under Q(D).
  Eigen::VectorXd e_ln_d(k);
  const double psi_sum = digamma(q.d.sum());
  for (int c = 0; c < k; ++c) e_ln_d[c] = digamma(q.d[c]) - psi_sum;

  t.e_ln_q_d = -log_beta(q.d);
  t.e_ln_p_d = -log_beta(p.d);
  for (int c = 0; c < k; ++c) {
    t.e_ln_q_d += (q.d[c] - 1.0) * e_ln_d[c];
    t.e_ln_p_d += (p.d[c] - 1.0) * e_ln_d[c];
  }

  for (int c = 0; c < k; ++c) {
    const ComponentParams& qc = q.components[c];
    const ComponentParams& pc = p.components[c];
    const double e_ln_det = expect_ln_det_precision({qc.W, qc.v});

    t.e_ln_q_mu += 0.5 * (o * std::log(qc.beta / (2.0 * M_PI)) + e_ln_det - o);

    t.e_ln_q_lambda += -0.5 * qc.v * o * M_LN2
        - 0.5 * qc.v * log_det_spd(qc.W, "compute_vfe W-hat")
        - log_multigamma(o, 0.5 * qc.v)
        + 0.5 * (qc.v - o - 1.0) * e_ln_det
        - 0.5 * qc.v * o;

    const Eigen::VectorXd dm = pc.m - qc.m;
    t.e_ln_p_mu += 0.5 * (o * std::log(pc.beta / (2.0 * M_PI)) + e_ln_det
        - pc.beta * o / qc.beta
        - pc.beta * qc.v * dm.dot(qc.W * dm));

    const Eigen::MatrixXd w_prior_inv = inverse_spd(pc.W, "compute_vfe W prior");
    t.e_ln_p_lambda += -0.5 * pc.v * o * M_LN2
        - 0.5 * pc.v * log_det_spd(pc.W, "compute_vfe W prior det")
        - log_multigamma(o, 0.5 * pc.v)
        + 0.5 * (pc.v - o - 1.0) * e_ln_det
        - 0.5 * qc.v * (w_prior_inv * qc.W).trace();

    t.e_ln_p_z += stats.mass[c] * e_ln_d[c];

    if (stats.defined[c]) {
      const Eigen::VectorXd dx = stats.mean[c] - qc.m;
      t.e_ln_p_x += 0.5 * stats.mass[c] * (e_ln_det
          - o / qc.beta
          - qc.v * (stats.scatter[c] * qc.W).trace()
          - qc.v * dx.dot(qc.W * dx)
          - o * std::log(2.0 * M_PI));
    }
  }

  for (Eigen::Index i = 0; i < state.responsibilities.rows(); ++i) {
    for (int c = 0; c < k; ++c) {
      const double r = state.responsibilities(i, c);
      if (r > 0.0) t.e_ln_q_z += r * std::log(r);
    }
  }

  return t;
}

FitResult fit(MixtureState state, const std::vector<Eigen::VectorXd>& points,
              const std::vector<int>& forget_indices, const std::vector<int>& keep_indices,
              const FitOptions& options) {
  if (options.max_sweeps < 1) throw std::invalid_argument("fit: max_sweeps must be >= 1");
  const double tol = options.tol_per_point * std::max<std::size_t>(points.size(), 1);

  FitResult result;
  double previous = std::numeric_limits<double>::infinity();
  for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
    const SufficientStats forget_stats =
        compute_stats(points, state.responsibilities, forget_indices);
    const SufficientStats keep_stats =
        compute_stats(points, state.responsibilities, keep_indices);
    state = update_empirical_prior(std::move(state), forget_stats);
    state = update_posterior(std::move(state), keep_stats);
    state = update_responsibilities(std::move(state), points);
    const double vfe = compute_vfe(state, points).total();
    result.vfe_trace.push_back(vfe);
    ++result.sweeps;
    if (std::abs(previous - vfe) < tol) break;
    previous = vfe;
  }
  result.state = std::move(state);
  return result;
}

int active_component_count(const MixtureState& state) {
  int active = 0;
  for (int c = 0; c < state.component_count(); ++c) {
    if (state.responsibilities.col(c).sum() > SufficientStats::mass_epsilon) ++active;
  }
  return active;
}

}  // namespace tgm
