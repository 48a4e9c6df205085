#pragma once

#include <Eigen/Dense>
#include <random>
#include <vector>

namespace tgm {

/// Tabular action values over discrete latent states.
struct QTable {
  Eigen::MatrixXd values;  // A x K
  double learning_rate = 0.1;
  double discount = 0.9;

  int action_count() const { return static_cast<int>(values.rows()); }
  int state_count() const { return static_cast<int>(values.cols()); }
};

/// Probability vector over latent states.
struct Belief {
  Eigen::VectorXd probs;
  void validate() const;
};

/// Standard tabular Q-learning step with a model-based target:
///   q(a,z) += alpha [ r + gamma sum_z' P(z'|z,a) max_a' q(a',z') - q(a,z) ]
/// With `terminal` the bootstrap term is dropped.
void standard_q_update(QTable& q, int state, int action, double reward,
                       const std::vector<Eigen::MatrixXd>& transitions, bool terminal = false);

/// Belief-weighted variant: every state's temporal difference is scaled by
/// the posterior probability of that state before the update; only row
/// `action` of the table changes. Reduces exactly to standard_q_update for
/// one-hot beliefs.
void belief_q_update(QTable& q, const Belief& belief, int action, double reward,
                     const std::vector<Eigen::MatrixXd>& transitions, bool terminal = false);

/// Epsilon-greedy over belief-expected action values; ties go to the lowest
/// action index.
int epsilon_greedy(const QTable& q, const Belief& belief, double epsilon, std::mt19937_64& rng);
int greedy_action(const QTable& q, const Belief& belief);

/// Finite MDP for the value-iteration oracle. `transitions[a]` is
/// column-stochastic in (to, from) layout, `rewards(a, s)` is the expected
/// immediate reward, and `continues(a, s)` is zero where the episode ends.
struct Mdp {
  std::vector<Eigen::MatrixXd> transitions;
  Eigen::MatrixXd rewards;
  Eigen::MatrixXd continues;
  double discount = 0.9;

  int action_count() const { return static_cast<int>(rewards.rows()); }
  int state_count() const { return static_cast<int>(rewards.cols()); }
};

/// Fixed point of q(a,s) = r(a,s) + gamma * [continues] * sum_s' P(s'|s,a)
/// max_a' q(a',s'), to 1e-10 sup-norm.
QTable value_iteration_oracle(const Mdp& mdp);

}  // namespace tgm
