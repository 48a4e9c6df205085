#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tgm/checkpoint.hpp"
#include "tgm/env.hpp"
#include "tgm/meanshift.hpp"
#include "tgm/planner.hpp"
#include "tgm/structure.hpp"
#include "tgm/transition.hpp"
#include "tgm/vgm.hpp"

namespace tgm {

struct AgentConfig {
  int checkpoint_period = 100;  // env steps between structure updates
  double theta_kl = 0.5;
  int theta_counts = 4;

  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  double epsilon_fraction = 0.5;  // fraction of episodes spent decaying

  double alpha = 0.1;
  double gamma = 0.9;
  bool online_q = false;  // per-step updates instead of batched replay

  MeanShiftConfig mean_shift{0.35};
  // Discovery threshold sits above the structure-module default: expired
  // novel points are absorbed into whichever component claims them, which
  // slowly stretches it toward undiscovered neighbors, so retention is long
  // and the novelty test strict enough that density-tail samples of known
  // cells rarely enter it.
  NoveltyConfig novelty{4.0, 5};
  // Novel observations resist forgetting for this many checkpoint periods,
  // long enough for a rarely-visited new cell to gather discovery support.
  int novelty_retention_periods = 10;
  int vgm_sweeps = 20;
  EnvConfig env{};

  std::uint64_t seed = 0;

  double epsilon_at(int episode, int total_episodes) const;
  void validate() const;
};

/// Observations, actions, rewards and trial segmentation for the data still
/// in memory. `actions[t] >= 0` means the transition (t, t+1) exists; after
/// forgetting, segments split wherever a dropped observation broke the
/// chain.
struct ExperienceBuffer {
  std::vector<Eigen::VectorXd> observations;
  std::vector<int> segments;
  std::vector<int> actions;
  std::vector<double> rewards;
  std::vector<char> terminal;  // episode ended by eating at the goal
  std::vector<long> step_stamp;  // global step at which the observation arrived

  int size() const { return static_cast<int>(observations.size()); }
  /// Fresh trial id, above every id this buffer has ever seen. Forgetting
  /// renumbers the surviving chains through the same counter, so ids are
  /// never reused and a stale chain can never collide with a live trial.
  int begin_segment() { return next_segment_++; }
  void push_observation(const Eigen::VectorXd& obs, int segment, long step = 0);
  void annotate_last(int action, double reward, bool terminal_step);
  bool has_transition(int t) const;
  std::vector<int> transition_indices() const;
  std::vector<TransitionSample> make_samples(const Eigen::MatrixXd& responsibilities,
                                             const std::vector<int>& indices) const;
  /// Remove the listed observations, compacting all parallel arrays and the
  /// responsibility matrix, and re-segmenting across the gaps.
  void drop_observations(const std::vector<int>& forget, Eigen::MatrixXd& responsibilities);

 private:
  int next_segment_ = 0;
};

/// Absorb a forget plan: forget-set statistics move into the VGM empirical
/// prior which then becomes the prior, the matching transition counts move
/// into the tensor's empirical prior, the posterior tiers are recomputed
/// from the kept data, and the buffer physically shrinks.
void apply_forgetting(ExperienceBuffer& buffer, const ForgetPlan& plan, MixtureState& state,
                      TransitionTensor& tensor);

struct EpisodeMetrics {
  int episode = 0;
  int steps = 0;
  double episode_return = 0.0;
  int k_active = 0;
  double vfe = 0.0;
  double tv_distance = 1.0;
  bool success = false;  // derived, not part of the JSONL schema
};

struct StructureEvent {
  long step = 0;
  std::string kind;  // "component_discovered" | "component_fixed"
  int component = -1;
  std::vector<double> mean;  // discovery location, empty otherwise
};

struct TrainResult {
  AgentCheckpoint checkpoint;
  std::vector<EpisodeMetrics> metrics;
  std::vector<StructureEvent> events;
};

/// How well the learned transition tensor matches the maze's ground truth:
/// per-(cell, action) total-variation distances after assigning components
/// to cells by nearest means.
struct TransitionAccuracy {
  std::vector<double> column_tv;  // K_true * A entries
  double mean_tv = 1.0;
  double fraction_within(double tol) const;
};

TransitionAccuracy transition_accuracy(const MixtureState& state, const TransitionTensor& tensor,
                                       const MazeSpec& maze);

/// Online training loop: act epsilon-greedily on the current belief, store
/// experience, and every checkpoint_period steps refit the mixture, discover
/// components, update the ledger, absorb forgettable data and replay the
/// kept transitions through the belief Q-update.
TrainResult train_agent(const MazeSpec& maze, const AgentConfig& cfg, int episodes);

struct EvalResult {
  int episodes = 0;
  int successes = 0;
  double success_rate = 0.0;
  double mean_steps_to_goal = 0.0;  // over successful episodes
};

/// Greedy (epsilon = 0) rollouts of a trained checkpoint.
EvalResult evaluate_checkpoint(const AgentCheckpoint& cp, const MazeSpec& maze,
                               const EnvConfig& env_cfg, int episodes, std::uint64_t seed);

}  // namespace tgm
