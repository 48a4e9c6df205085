#pragma once

#include <Eigen/Dense>
#include <vector>

#include "tgm/meanshift.hpp"

namespace tgm {

/// Normal-Wishart parameter bundle for one Gaussian component.
struct ComponentParams {
  Eigen::VectorXd m;  // mean of the Gaussian over mu
  double beta = 0.0;  // precision scaling, > 0
  Eigen::MatrixXd W;  // Wishart scale, SPD
  double v = 0.0;     // Wishart degrees of freedom, > O - 1

  int dim() const { return static_cast<int>(m.size()); }
  void validate() const;
};

/// One tier of the mixture (prior, empirical prior, or posterior): Dirichlet
/// concentrations plus a Normal-Wishart bundle per component.
struct MixtureTier {
  Eigen::VectorXd d;
  std::vector<ComponentParams> components;
};

/// Variational Gaussian mixture state. The three tiers share one
/// responsibility matrix; counts only accumulate from prior to empirical to
/// posterior.
struct MixtureState {
  MixtureTier prior;
  MixtureTier empirical;
  MixtureTier posterior;
  Eigen::MatrixXd responsibilities;  // N x K, rows on the simplex

  int component_count() const { return static_cast<int>(prior.components.size()); }
  int dim() const { return prior.components.empty() ? 0 : prior.components[0].dim(); }
  void validate() const;
};

/// Responsibility-weighted count, mean and covariance per component. A
/// component whose mass falls below `mass_epsilon` has mean/scatter flagged
/// undefined and is skipped by the tier updates.
struct SufficientStats {
  Eigen::VectorXd mass;                   // N_k
  std::vector<Eigen::VectorXd> mean;      // x-bar_k
  std::vector<Eigen::MatrixXd> scatter;   // S_k
  std::vector<bool> defined;

  static constexpr double mass_epsilon = 1e-10;
};

struct FitOptions {
  int max_sweeps = 50;
  double tol_per_point = 1e-6;  // stop when |dVFE| < tol_per_point * N
};

struct FitResult {
  MixtureState state;
  std::vector<double> vfe_trace;  // VFE after each completed sweep
  int sweeps = 0;
};

/// The nine closed-form expectations making up the variational free energy,
/// exposed individually so each one can be tested against a Monte-Carlo
/// estimate.
struct VfeTerms {
  double e_ln_q_d = 0.0;        // E_Q[ln Q(D)]
  double e_ln_q_mu = 0.0;       // E_Q[ln Q(mu|Lambda)]
  double e_ln_q_lambda = 0.0;   // E_Q[ln Q(Lambda)]
  double e_ln_q_z = 0.0;        // E_Q[ln Q(Z)]
  double e_ln_p_d = 0.0;        // E_Q[ln P(D)]
  double e_ln_p_mu = 0.0;       // E_Q[ln P(mu|Lambda)]
  double e_ln_p_lambda = 0.0;   // E_Q[ln P(Lambda)]
  double e_ln_p_z = 0.0;        // E_Q[ln P(Z|D)]
  double e_ln_p_x = 0.0;        // E_Q[ln P(X|Z,mu,Lambda)]

  double total() const {
    return e_ln_q_d + e_ln_q_mu + e_ln_q_lambda + e_ln_q_z
         - e_ln_p_d - e_ln_p_mu - e_ln_p_lambda - e_ln_p_z - e_ln_p_x;
  }
};

/// Build a mixture prior from mean-shift clusters: d_k = beta_k = 2K,
/// v_k = 2K + O - 0.99, m_k = cluster mean, W_k = inverse(cluster covariance)
/// / v_k. A singular cluster covariance is ridge-regularized before
/// inversion. Empirical and posterior tiers start equal to the prior and the
/// responsibilities are the one-hot assignment.
MixtureState init_prior_from_clusters(const ClusterAssignment& assignment,
                                      const std::vector<Eigen::VectorXd>& points);

/// Append one component (prior = empirical = posterior) to every tier; the
/// responsibility matrix gains a zero column. Used by component discovery.
void append_component(MixtureState& state, double d, const ComponentParams& params);

/// Sufficient statistics of the points listed in `indices`, weighted by the
/// matching rows of `responsibilities`.
SufficientStats compute_stats(const std::vector<Eigen::VectorXd>& points,
                              const Eigen::MatrixXd& responsibilities,
                              const std::vector<int>& indices);

/// Empirical-prior tier update from forget-set statistics:
///   v-bar = v + N', beta-bar = beta + N', d-bar = d + N',
///   m-bar = (beta m + N' x-bar') / (beta + N'),
///   W-bar^-1 = W^-1 + N' S' + beta N'/(beta+N') (x-bar'-m)(x-bar'-m)^T.
MixtureState update_empirical_prior(MixtureState state, const SufficientStats& forget_stats);

/// Posterior tier update: same functional form, seeded from the empirical
/// tier with keep-set statistics.
MixtureState update_posterior(MixtureState state, const SufficientStats& keep_stats);

/// Responsibility row for a single observation under the posterior tier.
Eigen::VectorXd posterior_responsibility(const MixtureState& state, const Eigen::VectorXd& x);

/// Recompute all responsibility rows from the posterior tier (softmax of
/// ln rho, log-sum-exp normalized).
MixtureState update_responsibilities(MixtureState state,
                                     const std::vector<Eigen::VectorXd>& points);

/// The nine VFE expectation terms for the current state; P-terms are taken
/// against the prior tier, expectations against the posterior tier.
VfeTerms compute_vfe(const MixtureState& state, const std::vector<Eigen::VectorXd>& points);

/// Coordinate ascent: per sweep, forget-set stats feed the empirical tier,
/// keep-set stats feed the posterior tier, then responsibilities update.
/// Stops early once |dVFE| drops below tol_per_point * N.
FitResult fit(MixtureState state, const std::vector<Eigen::VectorXd>& points,
              const std::vector<int>& forget_indices, const std::vector<int>& keep_indices,
              const FitOptions& options = {});

/// Number of components whose responsibility mass exceeds mass_epsilon.
int active_component_count(const MixtureState& state);

}  // namespace tgm
