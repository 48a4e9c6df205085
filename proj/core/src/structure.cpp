#include "tgm/structure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <tuple>

#include "tgm/math.hpp"

namespace tgm {

std::vector<int> ComponentLedger::checkpoint(const std::vector<GaussianParams>& current) {
  const int n_cur = static_cast<int>(current.size());
  const int n_prev = static_cast<int>(entries_.size());

  std::vector<Entry> next(n_cur);
  // Fixed status is sticky per slot.
  for (int j = 0; j < std::min(n_prev, n_cur); ++j) next[j].fixed = entries_[j].fixed;

  // Greedy best-KL matching, previous snapshots against current components.
  std::vector<std::tuple<double, int, int>> candidates;
  for (int i = 0; i < n_prev; ++i) {
    if (!entries_[i].snapshot) continue;
    for (int j = 0; j < n_cur; ++j) {
      const double kl = gaussian_kl(*entries_[i].snapshot, current[j]);
      if (kl < theta_kl_) candidates.emplace_back(kl, i, j);
    }
  }
  std::sort(candidates.begin(), candidates.end());
  std::vector<char> prev_claimed(n_prev, 0), cur_claimed(n_cur, 0);
  for (const auto& [kl, i, j] : candidates) {
    if (prev_claimed[i] || cur_claimed[j]) continue;
    prev_claimed[i] = cur_claimed[j] = 1;
    next[j].persistence_count = entries_[i].persistence_count + 1;
    next[j].fixed = next[j].fixed || entries_[i].fixed;
  }

  std::vector<int> newly_fixed;
  for (int j = 0; j < n_cur; ++j) {
    if (!next[j].fixed && next[j].persistence_count >= theta_counts_) {
      next[j].fixed = true;
      newly_fixed.push_back(j);
    }
    next[j].snapshot = current[j];
  }
  entries_ = std::move(next);
  return newly_fixed;
}

void ComponentLedger::apply_index_map(const std::vector<int>& mapping, int new_count) {
  if (mapping.size() != entries_.size()) {
    throw std::invalid_argument("ComponentLedger: mapping size mismatch");
  }
  std::vector<Entry> next(new_count);
  for (std::size_t i = 0; i < mapping.size(); ++i) {
    if (mapping[i] >= 0) {
      if (mapping[i] >= new_count) throw std::out_of_range("ComponentLedger: mapping out of range");
      next[mapping[i]] = entries_[i];
    }
  }
  entries_ = std::move(next);
}

std::vector<bool> ComponentLedger::fixed_flags() const {
  std::vector<bool> flags(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) flags[i] = entries_[i].fixed;
  return flags;
}

ForgetPlan plan_forgetting(const Eigen::MatrixXd& responsibilities,
                           const std::vector<bool>& fixed, const std::vector<int>& segment_ids,
                           const std::vector<bool>& novel) {
  const int n = static_cast<int>(responsibilities.rows());
  if (static_cast<int>(segment_ids.size()) != n) {
    throw std::invalid_argument("plan_forgetting: segment ids do not match observations");
  }

  std::vector<bool> fixed_backed(n, false);
  for (int t = 0; t < n; ++t) {
    if (t < static_cast<int>(novel.size()) && novel[t]) continue;
    int best = 0;
    responsibilities.row(t).maxCoeff(&best);
    fixed_backed[t] = best < static_cast<int>(fixed.size()) && fixed[best];
  }

  auto same_segment = [&](int a, int b) {
    return a >= 0 && b >= 0 && a < n && b < n && segment_ids[a] == segment_ids[b];
  };

  ForgetPlan plan;
  std::vector<bool> forget_obs(n, false);
  for (int t = 0; t < n; ++t) {
    bool ok = fixed_backed[t];
    if (same_segment(t - 1, t)) ok = ok && fixed_backed[t - 1];
    if (same_segment(t, t + 1)) ok = ok && fixed_backed[t + 1];
    forget_obs[t] = ok;
    (ok ? plan.observation_forget : plan.observation_keep).push_back(t);
  }
  for (int t = 0; t + 1 < n; ++t) {
    if (!same_segment(t, t + 1)) continue;  // no transition across trials
    const bool forget = forget_obs[t] || forget_obs[t + 1];
    (forget ? plan.transition_forget : plan.transition_keep).push_back(t);
  }
  return plan;
}

std::vector<GaussianParams> posterior_point_estimates(const MixtureState& state) {
  std::vector<GaussianParams> out;
  out.reserve(state.component_count());
  for (const auto& c : state.posterior.components) {
    out.push_back({c.m, c.v * c.W});
  }
  return out;
}

std::vector<bool> novelty_mask(const MixtureState& state,
                               const std::vector<Eigen::VectorXd>& points,
                               const NoveltyConfig& novelty) {
  const auto estimates = posterior_point_estimates(state);
  const double limit2 = novelty.mahalanobis_threshold * novelty.mahalanobis_threshold;
  std::vector<bool> mask(points.size(), false);
  for (std::size_t i = 0; i < points.size(); ++i) {
    double best_logp = -std::numeric_limits<double>::infinity();
    double best_quad = std::numeric_limits<double>::infinity();
    for (const auto& g : estimates) {
      const double logp = log_gaussian_pdf(points[i], g);
      if (logp > best_logp) {
        best_logp = logp;
        const Eigen::VectorXd diff = points[i] - g.mean;
        best_quad = diff.dot(g.precision * diff);
      }
    }
    mask[i] = estimates.empty() || best_quad > limit2;
  }
  return mask;
}

DiscoveryResult discover_components(const std::vector<Eigen::VectorXd>& points,
                                    const MeanShiftConfig& cfg, MixtureState state,
                                    const NoveltyConfig& novelty) {
  DiscoveryResult result;
  result.index_map.resize(state.component_count());
  for (int i = 0; i < state.component_count(); ++i) result.index_map[i] = i;

  const std::vector<bool> mask = novelty_mask(state, points, novelty);
  std::vector<Eigen::VectorXd> novel;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (mask[i]) novel.push_back(points[i]);
  }
  if (novel.empty()) {
    result.state = std::move(state);
    return result;
  }

  const ClusterAssignment clusters = mean_shift(novel, cfg);
  std::vector<std::vector<int>> members(clusters.cluster_count());
  for (int i = 0; i < static_cast<int>(novel.size()); ++i) {
    members[clusters.labels[i]].push_back(i);
  }

  std::vector<int> spawn;
  for (int c = 0; c < clusters.cluster_count(); ++c) {
    if (static_cast<int>(members[c].size()) >= novelty.min_points) spawn.push_back(c);
  }
  if (spawn.empty()) {
    result.state = std::move(state);
    return result;
  }

  const int k_total = state.component_count() + static_cast<int>(spawn.size());
  const Eigen::Index dim = novel[0].size();
  const double d0 = 2.0 * k_total;
  const double v0 = 2.0 * k_total + static_cast<double>(dim) - 0.99;

  for (int c : spawn) {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
    for (int i : members[c]) mean += novel[i];
    mean /= static_cast<double>(members[c].size());

    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(dim, dim);
    double spread = 0.0;
    for (int i : members[c]) {
      const Eigen::VectorXd diff = novel[i] - mean;
      cov += diff * diff.transpose();
      spread += diff.squaredNorm();
    }
    cov /= static_cast<double>(members[c].size());
    spread /= static_cast<double>(members[c].size());
    if (!is_well_conditioned_spd(cov)) {
      cov += 1e-6 * (spread > 0 ? spread : 1.0) * Eigen::MatrixXd::Identity(dim, dim);
    }

    ComponentParams p;
    p.m = mean;
    p.beta = d0;
    p.v = v0;
    p.W = inverse_spd(cov, "discover_components cluster covariance") / v0;
    append_component(state, d0, p);
    result.new_means.push_back(mean);
    ++result.added;
  }

  result.state = update_responsibilities(std::move(state), points);
  return result;
}

}  // namespace tgm
