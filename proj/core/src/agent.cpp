#include "tgm/agent.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "tgm/math.hpp"
#include "tgm/util.hpp"

namespace tgm {

double AgentConfig::epsilon_at(int episode, int total_episodes) const {
  const double decay_span = std::max(1.0, epsilon_fraction * total_episodes);
  const double t = std::min(1.0, episode / decay_span);
  return epsilon_start + (epsilon_end - epsilon_start) * t;
}

void AgentConfig::validate() const {
  if (checkpoint_period < 1) throw std::invalid_argument("AgentConfig: checkpoint_period >= 1");
  if (gamma < 0.0 || gamma > 1.0) throw std::invalid_argument("AgentConfig: gamma in [0,1]");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("AgentConfig: alpha in (0,1]");
  mean_shift.validate();
}

void ExperienceBuffer::push_observation(const Eigen::VectorXd& obs, int segment, long step) {
  next_segment_ = std::max(next_segment_, segment + 1);
  observations.push_back(obs);
  segments.push_back(segment);
  actions.push_back(-1);
  rewards.push_back(0.0);
  terminal.push_back(0);
  step_stamp.push_back(step);
}

void ExperienceBuffer::annotate_last(int action, double reward, bool terminal_step) {
  if (observations.empty()) throw std::logic_error("ExperienceBuffer: nothing to annotate");
  actions.back() = action;
  rewards.back() = reward;
  terminal.back() = terminal_step ? 1 : 0;
}

bool ExperienceBuffer::has_transition(int t) const {
  return t >= 0 && t + 1 < size() && segments[t] == segments[t + 1] && actions[t] >= 0;
}

std::vector<int> ExperienceBuffer::transition_indices() const {
  std::vector<int> out;
  for (int t = 0; t + 1 < size(); ++t) {
    if (has_transition(t)) out.push_back(t);
  }
  return out;
}

std::vector<TransitionSample> ExperienceBuffer::make_samples(
    const Eigen::MatrixXd& responsibilities, const std::vector<int>& indices) const {
  std::vector<TransitionSample> samples;
  samples.reserve(indices.size());
  for (int t : indices) {
    if (!has_transition(t)) throw std::invalid_argument("ExperienceBuffer: invalid transition index");
    samples.push_back({responsibilities.row(t).transpose(),
                       responsibilities.row(t + 1).transpose(), actions[t]});
  }
  return samples;
}

void ExperienceBuffer::drop_observations(const std::vector<int>& forget,
                                         Eigen::MatrixXd& responsibilities) {
  std::vector<char> drop(size(), 0);
  for (int t : forget) {
    if (t < 0 || t >= size()) throw std::out_of_range("ExperienceBuffer: forget index out of range");
    drop[t] = 1;
  }

  ExperienceBuffer next;
  next.next_segment_ = next_segment_;
  Eigen::MatrixXd next_resp(size() - static_cast<int>(forget.size()), responsibilities.cols());
  int out = 0;
  int segment = -1;
  int prev_kept = -1;
  for (int t = 0; t < size(); ++t) {
    if (drop[t]) continue;
    const bool chained = prev_kept == t - 1 && prev_kept >= 0 && segments[prev_kept] == segments[t];
    if (!chained) segment = next.next_segment_++;
    next.observations.push_back(observations[t]);
    next.segments.push_back(segment);
    next.step_stamp.push_back(step_stamp[t]);
    // The transition out of t survives only if t+1 is kept and adjacent.
    const bool keeps_transition = has_transition(t) && !drop[t + 1];
    next.actions.push_back(keeps_transition ? actions[t] : -1);
    next.rewards.push_back(keeps_transition ? rewards[t] : 0.0);
    next.terminal.push_back(keeps_transition ? terminal[t] : 0);
    if (responsibilities.rows() == size()) next_resp.row(out) = responsibilities.row(t);
    prev_kept = t;
    ++out;
  }
  *this = std::move(next);
  if (responsibilities.size() > 0) responsibilities = std::move(next_resp);
}

void apply_forgetting(ExperienceBuffer& buffer, const ForgetPlan& plan, MixtureState& state,
                      TransitionTensor& tensor) {
  if (static_cast<int>(plan.observation_forget.size() + plan.observation_keep.size())
      != buffer.size()) {
    throw std::invalid_argument("apply_forgetting: plan does not partition the buffer");
  }

  const SufficientStats forget_stats =
      compute_stats(buffer.observations, state.responsibilities, plan.observation_forget);
  state = update_empirical_prior(std::move(state), forget_stats);
  state.prior = state.empirical;
  // The posterior tier is left alone: it already accounts for the forgotten
  // points (sequential and joint conditioning agree under frozen
  // responsibilities), and recomputing it here would override whatever
  // subset the caller fitted it on.

  tensor.absorb_forgotten(buffer.make_samples(state.responsibilities, plan.transition_forget));
  tensor.compute_posterior(buffer.make_samples(state.responsibilities, plan.transition_keep));

  buffer.drop_observations(plan.observation_forget, state.responsibilities);
}

double TransitionAccuracy::fraction_within(double tol) const {
  if (column_tv.empty()) return 0.0;
  int ok = 0;
  for (double tv : column_tv) {
    if (tv <= tol) ++ok;
  }
  return static_cast<double>(ok) / column_tv.size();
}

TransitionAccuracy transition_accuracy(const MixtureState& state, const TransitionTensor& tensor,
                                       const MazeSpec& maze) {
  const auto cells = maze.floor_cells();
  const int k_true = static_cast<int>(cells.size());
  const int k = state.component_count();
  const auto truth = true_transition_matrices(maze);

  TransitionAccuracy acc;
  if (k == 0) {
    acc.column_tv.assign(static_cast<std::size_t>(k_true) * kActionCount, 1.0);
    acc.mean_tv = 1.0;
    return acc;
  }

  // Assign components to cells by mean-to-center distance.
  Eigen::MatrixXd cost(k, k_true);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k_true; ++j) {
      cost(i, j) = (state.posterior.components[i].m - MazeSpec::cell_center(cells[j])).norm();
    }
  }
  const std::vector<int> comp_to_cell = min_cost_assignment(cost);
  std::vector<int> cell_to_comp(k_true, -1);
  for (int i = 0; i < k; ++i) {
    if (comp_to_cell[i] >= 0) cell_to_comp[comp_to_cell[i]] = i;
  }

  const auto expected = tensor.expected_transitions();
  for (int a = 0; a < kActionCount; ++a) {
    for (int from_cell = 0; from_cell < k_true; ++from_cell) {
      const int from_comp = cell_to_comp[from_cell];
      if (from_comp < 0 || from_comp >= tensor.component_count()) {
        acc.column_tv.push_back(1.0);
        continue;
      }
      Eigen::VectorXd learned = Eigen::VectorXd::Zero(k_true);
      double leftover = 0.0;
      for (int to_comp = 0; to_comp < tensor.component_count(); ++to_comp) {
        const double mass = expected[a](to_comp, from_comp);
        const int to_cell = to_comp < k ? comp_to_cell[to_comp] : -1;
        if (to_cell >= 0) {
          learned[to_cell] += mass;
        } else {
          leftover += mass;
        }
      }
      const double tv = 0.5 * ((learned - truth[a].col(from_cell)).cwiseAbs().sum() + leftover);
      acc.column_tv.push_back(tv);
    }
  }
  acc.mean_tv = 0.0;
  for (double tv : acc.column_tv) acc.mean_tv += tv;
  acc.mean_tv /= acc.column_tv.size();
  return acc;
}

namespace {

class Trainer {
 public:
  Trainer(const MazeSpec& maze, const AgentConfig& cfg)
      : maze_(maze),
        cfg_(cfg),
        env_(maze, cfg.env, cfg.seed ^ 0x9e3779b97f4a7c15ull),
        rng_(cfg.seed),
        ledger_(cfg.theta_kl, cfg.theta_counts) {
    cfg_.validate();
    qtable_.learning_rate = cfg.alpha;
    qtable_.discount = cfg.gamma;
    qtable_.values = Eigen::MatrixXd::Zero(kActionCount, 0);
    tensor_ = TransitionTensor(kActionCount, 0);
  }

  TrainResult train(int episodes) {
    TrainResult result;
    for (int ep = 0; ep < episodes; ++ep) {
      segment_ = buffer_.begin_segment();
      result.metrics.push_back(run_episode(ep, episodes));
    }
    finalize();
    result.checkpoint = make_checkpoint();
    result.events = std::move(events_);
    return result;
  }

 private:
  EpisodeMetrics run_episode(int episode, int total_episodes) {
    const double epsilon = cfg_.epsilon_at(episode, total_episodes);
    current_obs_ = env_.reset();
    store_observation(current_obs_);
    episode_open_ = true;

    EpisodeMetrics m;
    m.episode = episode;
    while (true) {
      const bool at_goal = env_.state().position == maze_.goal;
      const int action = choose_action(epsilon);
      const StepResult sr = env_.step(static_cast<Action>(action));
      const bool ate_goal = action == static_cast<int>(Action::eat) && at_goal;
      buffer_.annotate_last(action, sr.reward, ate_goal);
      store_observation(sr.observation);
      current_obs_ = sr.observation;
      episode_open_ = !sr.done;

      m.episode_return += sr.reward;
      ++m.steps;
      ++global_step_;
      if (ate_goal) m.success = true;

      if (cfg_.online_q && initialized_) {
        const int t = buffer_.size() - 2;
        Belief belief{vgm_.responsibilities.row(t).transpose()};
        belief_q_update(qtable_, belief, action, sr.reward, tensor_.expected_transitions(),
                        buffer_.terminal[t] != 0);
      }
      if (global_step_ % cfg_.checkpoint_period == 0) checkpoint_update();
      if (sr.done) break;
    }

    m.k_active = initialized_ ? active_component_count(vgm_) : 0;
    m.vfe = last_vfe_;
    m.tv_distance = last_tv_;
    return m;
  }

  int choose_action(double epsilon) {
    if (!initialized_) {
      std::uniform_int_distribution<int> pick(0, kActionCount - 1);
      return pick(rng_);
    }
    Belief belief{posterior_responsibility(vgm_, current_obs_)};
    return epsilon_greedy(qtable_, belief, epsilon, rng_);
  }

  void store_observation(const Eigen::VectorXd& obs) {
    buffer_.push_observation(obs, segment_, global_step_);
    if (initialized_) {
      const Eigen::Index n = vgm_.responsibilities.rows();
      vgm_.responsibilities.conservativeResize(n + 1, Eigen::NoChange);
      vgm_.responsibilities.row(n) = posterior_responsibility(vgm_, obs).transpose();
    }
  }

  void checkpoint_update() {
    if (!initialized_) {
      bootstrap();
      if (!initialized_) return;
    } else {
      refit();
      discover();
    }
    if (log_level() >= LogLevel::debug) {
      std::ostringstream msg;
      msg << "step " << global_step_ << " K=" << vgm_.component_count() << " means:";
      for (const auto& c : vgm_.posterior.components) {
        msg << " (" << c.m[0] << "," << c.m[1] << ")";
      }
      msg << " d:";
      for (int c = 0; c < vgm_.component_count(); ++c) msg << " " << vgm_.posterior.d[c];
      log_message(LogLevel::debug, msg.str());
    }
    update_ledger();
    // Replay runs before absorption so triplets about to be forgotten still
    // get their final update against the freshest tensor; once components fix,
    // most data is forgotten at its first checkpoint and would otherwise
    // never reach the Q-table.
    if (!cfg_.online_q) {
      tensor_.compute_posterior(
          buffer_.make_samples(vgm_.responsibilities, buffer_.transition_indices()));
      replay_q_updates();
    }
    forget();
    last_vfe_ = compute_vfe(vgm_, buffer_.observations).total();
    last_tv_ = transition_accuracy(vgm_, tensor_, maze_).mean_tv;
  }

  void bootstrap() {
    if (buffer_.size() < 2) return;
    const ClusterAssignment clusters = mean_shift(buffer_.observations, cfg_.mean_shift);

    // Only clusters with discovery-level support seed components. Tiny
    // clusters produce degenerate, instantly-dead components whose cells
    // then bimodalize their neighbors; their points stay buffered as novel
    // data until a later spawn.
    std::vector<int> cluster_size(clusters.cluster_count(), 0);
    for (int label : clusters.labels) ++cluster_size[label];
    std::vector<int> dense_label(clusters.cluster_count(), -1);
    int dense_count = 0;
    for (int c = 0; c < clusters.cluster_count(); ++c) {
      if (cluster_size[c] >= cfg_.novelty.min_points) dense_label[c] = dense_count++;
    }
    if (dense_count == 0) return;

    std::vector<Eigen::VectorXd> seed_points;
    ClusterAssignment dense;
    dense.centroids.resize(dense_count);
    for (int i = 0; i < buffer_.size(); ++i) {
      const int label = dense_label[clusters.labels[i]];
      if (label < 0) continue;
      seed_points.push_back(buffer_.observations[i]);
      dense.labels.push_back(label);
      dense.centroids[label] = clusters.centroids[clusters.labels[i]];
    }
    dense.one_hot = Eigen::MatrixXd::Zero(seed_points.size(), dense_count);
    for (std::size_t i = 0; i < dense.labels.size(); ++i) dense.one_hot(i, dense.labels[i]) = 1.0;

    vgm_ = init_prior_from_clusters(dense, seed_points);
    vgm_ = update_responsibilities(std::move(vgm_), buffer_.observations);
    refit();
    tensor_ = TransitionTensor(kActionCount, vgm_.component_count());
    qtable_.values = Eigen::MatrixXd::Zero(kActionCount, vgm_.component_count());
    initialized_ = true;
  }

  // Novelty with retention expiry: points whose best component is too far
  // away are withheld from tier updates and from forgetting until they
  // either spawn a component or expire. One mask per checkpoint keeps the
  // fit and the forget step consistent (counts only accumulate).
  std::vector<bool> effective_novelty() const {
    std::vector<bool> novel = novelty_mask(vgm_, buffer_.observations, cfg_.novelty);
    const long horizon = global_step_
        - static_cast<long>(cfg_.novelty_retention_periods) * cfg_.checkpoint_period;
    for (int t = 0; t < buffer_.size(); ++t) {
      if (buffer_.step_stamp[t] < horizon) novel[t] = false;
    }
    return novel;
  }

  // Fit on the well-explained observations only. Novel points still get
  // responsibilities (beliefs and transition counts need them) but no say in
  // the tier updates: feeding them in stretches the nearest component toward
  // data that deserves its own, which then shadows the region from
  // discovery.
  void refit() {
    const std::vector<bool> novel = effective_novelty();
    std::vector<int> explained;
    for (int i = 0; i < buffer_.size(); ++i) {
      if (!novel[i]) explained.push_back(i);
    }
    if (log_level() >= LogLevel::debug) {
      log_message(LogLevel::debug,
                  "refit step " + std::to_string(global_step_) + ": "
                      + std::to_string(explained.size()) + "/" + std::to_string(buffer_.size())
                      + " explained");
    }
    FitResult fitted = fit(std::move(vgm_), buffer_.observations, {}, explained,
                           {cfg_.vgm_sweeps, 1e-6});
    vgm_ = std::move(fitted.state);
  }

  void discover() {
    DiscoveryResult found =
        discover_components(buffer_.observations, cfg_.mean_shift, std::move(vgm_), cfg_.novelty);
    vgm_ = std::move(found.state);
    if (found.added == 0) return;
    const int new_k = vgm_.component_count();
    tensor_ = tensor_.resize(new_k, found.index_map);
    ledger_.apply_index_map(identity_map(static_cast<int>(ledger_.entries().size())), new_k);
    const int old_cols = static_cast<int>(qtable_.values.cols());
    qtable_.values.conservativeResize(Eigen::NoChange, new_k);
    qtable_.values.rightCols(new_k - old_cols).setZero();
    for (int i = 0; i < found.added; ++i) {
      StructureEvent ev;
      ev.step = global_step_;
      ev.kind = "component_discovered";
      ev.component = new_k - found.added + i;
      const auto& mean = found.new_means[i];
      ev.mean.assign(mean.data(), mean.data() + mean.size());
      events_.push_back(std::move(ev));
    }
  }

  void update_ledger() {
    for (int fixed : ledger_.checkpoint(posterior_point_estimates(vgm_))) {
      StructureEvent ev;
      ev.step = global_step_;
      ev.kind = "component_fixed";
      ev.component = fixed;
      events_.push_back(std::move(ev));
    }
  }

  void forget() {
    ForgetPlan plan = plan_forgetting(vgm_.responsibilities, ledger_.fixed_flags(),
                                      buffer_.segments, effective_novelty());
    // The newest observation of a still-running episode is not at the end of
    // a trial: its next neighbor has not arrived yet, and dropping it would
    // desync the action annotation that lands on the buffer tail.
    const int tail = buffer_.size() - 1;
    if (episode_open_ && !plan.observation_forget.empty()
        && plan.observation_forget.back() == tail) {
      plan.observation_forget.pop_back();
      plan.observation_keep.push_back(tail);
      if (buffer_.has_transition(tail - 1)) {
        const bool prev_forgotten = !plan.observation_forget.empty()
            && plan.observation_forget.back() == tail - 1;
        if (!prev_forgotten && !plan.transition_forget.empty()
            && plan.transition_forget.back() == tail - 1) {
          plan.transition_forget.pop_back();
          plan.transition_keep.push_back(tail - 1);
        }
      }
    }
    apply_forgetting(buffer_, plan, vgm_, tensor_);
  }

  void replay_q_updates() {
    const auto transitions = tensor_.expected_transitions();
    // Newest first: a rewarding episode propagates value down its whole path
    // within one replay pass.
    const auto indices = buffer_.transition_indices();
    for (auto it = indices.rbegin(); it != indices.rend(); ++it) {
      const int t = *it;
      Belief belief{vgm_.responsibilities.row(t).transpose()};
      belief_q_update(qtable_, belief, buffer_.actions[t], buffer_.rewards[t], transitions,
                      buffer_.terminal[t] != 0);
    }
  }

  void finalize() {
    // Fold in whatever accumulated since the last period boundary.
    if (global_step_ % cfg_.checkpoint_period != 0 || !initialized_) checkpoint_update();
  }

  std::vector<int> all_indices() const {
    std::vector<int> idx(buffer_.size());
    for (int i = 0; i < buffer_.size(); ++i) idx[i] = i;
    return idx;
  }

  static std::vector<int> identity_map(int n) {
    std::vector<int> map(n);
    for (int i = 0; i < n; ++i) map[i] = i;
    return map;
  }

  AgentCheckpoint make_checkpoint() {
    AgentCheckpoint cp;
    cp.vgm_initialized = initialized_;
    cp.vgm = vgm_;
    cp.transition = tensor_;
    cp.ledger = ledger_;
    cp.qtable = qtable_;
    std::ostringstream agent_rng, env_rng;
    agent_rng << rng_;
    env_rng << env_.rng();
    cp.agent_rng = agent_rng.str();
    cp.env_rng = env_rng.str();
    return cp;
  }

  MazeSpec maze_;
  AgentConfig cfg_;
  MazeEnv env_;
  std::mt19937_64 rng_;
  ComponentLedger ledger_;
  MixtureState vgm_;
  TransitionTensor tensor_;
  QTable qtable_;
  ExperienceBuffer buffer_;
  std::vector<StructureEvent> events_;
  Eigen::VectorXd current_obs_;
  bool episode_open_ = false;
  bool initialized_ = false;
  int segment_ = 0;
  long global_step_ = 0;
  double last_vfe_ = 0.0;
  double last_tv_ = 1.0;
};

}  // namespace

TrainResult train_agent(const MazeSpec& maze, const AgentConfig& cfg, int episodes) {
  Trainer trainer(maze, cfg);
  return trainer.train(episodes);
}

EvalResult evaluate_checkpoint(const AgentCheckpoint& cp, const MazeSpec& maze,
                               const EnvConfig& env_cfg, int episodes, std::uint64_t seed) {
  EvalResult result;
  result.episodes = episodes;
  if (episodes == 0) return result;

  MazeEnv env(maze, env_cfg, seed);
  long steps_to_goal = 0;
  for (int ep = 0; ep < episodes; ++ep) {
    Eigen::VectorXd obs = env.reset();
    while (true) {
      int action;
      if (cp.vgm_initialized && cp.vgm.component_count() > 0) {
        Belief belief{posterior_responsibility(cp.vgm, obs)};
        action = greedy_action(cp.qtable, belief);
      } else {
        action = static_cast<int>(Action::eat);
      }
      const bool at_goal = env.state().position == maze.goal;
      const StepResult sr = env.step(static_cast<Action>(action));
      obs = sr.observation;
      if (action == static_cast<int>(Action::eat) && at_goal) {
        ++result.successes;
        steps_to_goal += env.state().steps;
        break;
      }
      if (sr.done) break;
    }
  }
  result.success_rate = static_cast<double>(result.successes) / episodes;
  result.mean_steps_to_goal =
      result.successes > 0 ? static_cast<double>(steps_to_goal) / result.successes : 0.0;
  return result;
}

}  // namespace tgm
