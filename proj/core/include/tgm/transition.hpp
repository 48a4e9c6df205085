#pragma once

#include <Eigen/Dense>
#include <vector>

namespace tgm {

/// One (responsibility, responsibility, action) triplet: the soft state at
/// time t, the soft state at time t+1, and the action taken in between.
struct TransitionSample {
  Eigen::VectorXd r0;
  Eigen::VectorXd r1;
  int action = 0;
};

/// Action-conditioned Dirichlet concentration tensor in prior / empirical /
/// posterior variants. Entry [a](k, j) counts transitions from component j
/// to component k under action a, so each column of the normalized matrix is
/// a distribution over next states.
class TransitionTensor {
 public:
  TransitionTensor() = default;
  TransitionTensor(int action_count, int component_count);

  int action_count() const { return static_cast<int>(prior_.size()); }
  int component_count() const { return prior_.empty() ? 0 : static_cast<int>(prior_[0].rows()); }

  const Eigen::MatrixXd& prior(int a) const { return prior_.at(a); }
  const Eigen::MatrixXd& empirical(int a) const { return empirical_.at(a); }
  const Eigen::MatrixXd& posterior(int a) const { return posterior_.at(a); }

  /// Fold the forget-set samples into the empirical prior, then promote it:
  /// the prior takes the empirical values and the samples can be discarded.
  void absorb_forgotten(const std::vector<TransitionSample>& samples);

  /// Recompute the posterior as empirical prior plus keep-set counts.
  void compute_posterior(const std::vector<TransitionSample>& samples);

  /// Dirichlet mean of the posterior for one action: column j holds
  /// P(next = k | current = j, a), every column sums to 1.
  Eigen::MatrixXd expected_transition(int action) const;
  std::vector<Eigen::MatrixXd> expected_transitions() const;

  /// Remap to a new component count. mapping[old] is the new index or -1 to
  /// drop; fresh rows/columns start at one.
  TransitionTensor resize(int new_component_count, const std::vector<int>& mapping) const;

  /// Direct tier access for serialization.
  void set_tiers(std::vector<Eigen::MatrixXd> prior, std::vector<Eigen::MatrixXd> empirical,
                 std::vector<Eigen::MatrixXd> posterior);

 private:
  void accumulate(std::vector<Eigen::MatrixXd>& tier,
                  const std::vector<TransitionSample>& samples) const;

  std::vector<Eigen::MatrixXd> prior_;
  std::vector<Eigen::MatrixXd> empirical_;
  std::vector<Eigen::MatrixXd> posterior_;
};

}  // namespace tgm
