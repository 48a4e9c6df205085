#include "tgm/planner.hpp"

#include <cmath>
#include <stdexcept>

namespace tgm {

void Belief::validate() const {
  if (probs.size() == 0 || probs.minCoeff() < 0.0 || std::abs(probs.sum() - 1.0) > 1e-9) {
    throw std::invalid_argument("Belief: entries must be >= 0 and sum to 1");
  }
}

namespace {

// r + gamma * P(.|z,a)^T vmax - q(a,z), for every z. `vmax` is max_a' q per
// state. Written once so the standard and belief paths produce bitwise
// identical temporal differences.
Eigen::VectorXd temporal_difference(const QTable& q, int action, double reward,
                                    const std::vector<Eigen::MatrixXd>& transitions,
                                    bool terminal) {
  if (action < 0 || action >= q.action_count()) {
    throw std::out_of_range("q update: action out of range");
  }
  const int k = q.state_count();
  Eigen::VectorXd td = Eigen::VectorXd::Constant(k, reward);
  if (!terminal) {
    const Eigen::VectorXd vmax = q.values.colwise().maxCoeff();
    td += q.discount * (transitions.at(action).transpose() * vmax);
  }
  td -= q.values.row(action).transpose();
  return td;
}

}  // namespace

void standard_q_update(QTable& q, int state, int action, double reward,
                       const std::vector<Eigen::MatrixXd>& transitions, bool terminal) {
  const Eigen::VectorXd td = temporal_difference(q, action, reward, transitions, terminal);
  q.values(action, state) += q.learning_rate * td[state];
}

void belief_q_update(QTable& q, const Belief& belief, int action, double reward,
                     const std::vector<Eigen::MatrixXd>& transitions, bool terminal) {
  belief.validate();
  if (belief.probs.size() != q.state_count()) {
    throw std::invalid_argument("belief_q_update: belief size mismatch");
  }
  const Eigen::VectorXd td = temporal_difference(q, action, reward, transitions, terminal);
  for (int z = 0; z < q.state_count(); ++z) {
    const double w = belief.probs[z];
    if (w == 0.0) continue;
    q.values(action, z) += q.learning_rate * w * td[z];
  }
}

int greedy_action(const QTable& q, const Belief& belief) {
  const Eigen::VectorXd scores = q.values * belief.probs;
  int best = 0;
  for (int a = 1; a < q.action_count(); ++a) {
    if (scores[a] > scores[best]) best = a;
  }
  return best;
}

int epsilon_greedy(const QTable& q, const Belief& belief, double epsilon, std::mt19937_64& rng) {
  if (epsilon < 0.0 || epsilon > 1.0) {
    throw std::invalid_argument("epsilon_greedy: epsilon must lie in [0, 1]");
  }
  belief.validate();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (unit(rng) < epsilon) {
    std::uniform_int_distribution<int> pick(0, q.action_count() - 1);
    return pick(rng);
  }
  return greedy_action(q, belief);
}

QTable value_iteration_oracle(const Mdp& mdp) {
  const int a_count = mdp.action_count();
  const int k = mdp.state_count();
  if (static_cast<int>(mdp.transitions.size()) != a_count) {
    throw std::invalid_argument("value_iteration_oracle: transition count mismatch");
  }

  QTable q;
  q.values = Eigen::MatrixXd::Zero(a_count, k);
  q.discount = mdp.discount;

  constexpr double tol = 1e-10;
  constexpr int max_iters = 1000000;
  for (int it = 0; it < max_iters; ++it) {
    const Eigen::VectorXd vmax = q.values.colwise().maxCoeff();
    Eigen::MatrixXd next(a_count, k);
    for (int a = 0; a < a_count; ++a) {
      next.row(a) = mdp.rewards.row(a)
          + mdp.discount
              * (mdp.continues.row(a).array()
                 * (mdp.transitions[a].transpose() * vmax).transpose().array()).matrix();
    }
    const double delta = (next - q.values).cwiseAbs().maxCoeff();
    q.values = std::move(next);
    if (delta < tol) return q;
  }
  throw std::runtime_error("value_iteration_oracle: did not converge");
}

}  // namespace tgm
