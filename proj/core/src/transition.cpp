#include "tgm/transition.hpp"

#include <stdexcept>

namespace tgm {

TransitionTensor::TransitionTensor(int action_count, int component_count) {
  if (action_count < 1 || component_count < 0) {
    throw std::invalid_argument("TransitionTensor: invalid shape");
  }
  const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(component_count, component_count);
  prior_.assign(action_count, ones);
  empirical_.assign(action_count, ones);
  posterior_.assign(action_count, ones);
}

void TransitionTensor::accumulate(std::vector<Eigen::MatrixXd>& tier,
                                  const std::vector<TransitionSample>& samples) const {
  const int k = component_count();
  for (const auto& s : samples) {
    if (s.action < 0 || s.action >= action_count()) {
      throw std::out_of_range("TransitionTensor: action index out of range");
    }
    if (s.r0.size() != k || s.r1.size() != k) {
      throw std::invalid_argument("TransitionTensor: responsibility size mismatch");
    }
    // Entry (to, from) gains r1[to] * r0[from].
    tier[s.action] += s.r1 * s.r0.transpose();
  }
}

void TransitionTensor::absorb_forgotten(const std::vector<TransitionSample>& samples) {
  empirical_ = prior_;
  accumulate(empirical_, samples);
  prior_ = empirical_;
}

void TransitionTensor::compute_posterior(const std::vector<TransitionSample>& samples) {
  posterior_ = empirical_;
  accumulate(posterior_, samples);
}

Eigen::MatrixXd TransitionTensor::expected_transition(int action) const {
  if (action < 0 || action >= action_count()) {
    throw std::out_of_range("TransitionTensor: action index out of range");
  }
  Eigen::MatrixXd m = posterior_[action];
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    m.col(j) /= m.col(j).sum();
  }
  return m;
}

std::vector<Eigen::MatrixXd> TransitionTensor::expected_transitions() const {
  std::vector<Eigen::MatrixXd> out;
  out.reserve(action_count());
  for (int a = 0; a < action_count(); ++a) out.push_back(expected_transition(a));
  return out;
}

TransitionTensor TransitionTensor::resize(int new_component_count,
                                          const std::vector<int>& mapping) const {
  if (static_cast<int>(mapping.size()) != component_count()) {
    throw std::invalid_argument("TransitionTensor::resize: mapping size mismatch");
  }
  for (int target : mapping) {
    if (target >= new_component_count) {
      throw std::out_of_range("TransitionTensor::resize: mapping out of range");
    }
  }
  TransitionTensor out(action_count(), new_component_count);
  const int old_k = component_count();
  auto copy_tier = [&](const std::vector<Eigen::MatrixXd>& src,
                       std::vector<Eigen::MatrixXd>& dst) {
    for (int a = 0; a < action_count(); ++a) {
      for (int to = 0; to < old_k; ++to) {
        if (mapping[to] < 0) continue;
        for (int from = 0; from < old_k; ++from) {
          if (mapping[from] < 0) continue;
          dst[a](mapping[to], mapping[from]) = src[a](to, from);
        }
      }
    }
  };
  copy_tier(prior_, out.prior_);
  copy_tier(empirical_, out.empirical_);
  copy_tier(posterior_, out.posterior_);
  return out;
}

void TransitionTensor::set_tiers(std::vector<Eigen::MatrixXd> prior,
                                 std::vector<Eigen::MatrixXd> empirical,
                                 std::vector<Eigen::MatrixXd> posterior) {
  if (prior.size() != empirical.size() || prior.size() != posterior.size()) {
    throw std::invalid_argument("TransitionTensor::set_tiers: tier count mismatch");
  }
  prior_ = std::move(prior);
  empirical_ = std::move(empirical);
  posterior_ = std::move(posterior);
}

}  // namespace tgm
