// Acceptance suite: one self-contained check per shipped guarantee, each
// printing a PASS/FAIL line. Exits nonzero if any check fails.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <numeric>
#include <queue>
#include <random>
#include <vector>

#include "support/sampling.hpp"
#include "tgm/agent.hpp"
#include "tgm/distributions.hpp"
#include "tgm/env.hpp"
#include "tgm/math.hpp"
#include "tgm/meanshift.hpp"
#include "tgm/planner.hpp"
#include "tgm/structure.hpp"
#include "tgm/transition.hpp"
#include "tgm/vgm.hpp"

using namespace tgm;

namespace {

int g_failures = 0;

void report(int id, const char* name, bool pass, const std::string& detail) {
  std::printf("%s  criterion %d (%s): %s\n", pass ? "PASS" : "FAIL", id, name, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

double elapsed_s(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Eigen::VectorXd vec2(double x, double y) {
  Eigen::VectorXd v(2);
  v << x, y;
  return v;
}

std::vector<int> range_indices(int n) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

Eigen::MatrixXd random_spd(std::mt19937_64& rng, int o) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd a(o, o);
  for (int i = 0; i < o * o; ++i) a(i / o, i % o) = n(rng);
  return a * a.transpose() + 0.4 * Eigen::MatrixXd::Identity(o, o);
}

MixtureTier random_tier(std::mt19937_64& rng, int k, int o, double extra) {
  std::uniform_real_distribution<double> u(0.5, 3.0);
  std::normal_distribution<double> n(0.0, 1.5);
  MixtureTier tier;
  tier.d = Eigen::VectorXd::NullaryExpr(k, [&](Eigen::Index) { return u(rng) + extra; });
  for (int c = 0; c < k; ++c) {
    ComponentParams p;
    p.m = Eigen::VectorXd::NullaryExpr(o, [&](Eigen::Index) { return n(rng); });
    p.beta = u(rng) + extra;
    p.v = o + u(rng) + extra;
    p.W = random_spd(rng, o);
    tier.components.push_back(std::move(p));
  }
  return tier;
}

std::vector<Eigen::VectorXd> gaussian_blob(std::mt19937_64& rng, const Eigen::VectorXd& center,
                                           double sigma, int n) {
  std::normal_distribution<double> noise(0.0, sigma);
  std::vector<Eigen::VectorXd> pts;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd p = center;
    for (Eigen::Index d = 0; d < p.size(); ++d) p[d] += noise(rng);
    pts.push_back(p);
  }
  return pts;
}

ClusterAssignment make_assignment(const std::vector<int>& labels, int k,
                                  const std::vector<Eigen::VectorXd>& points) {
  ClusterAssignment a;
  a.labels = labels;
  a.one_hot = Eigen::MatrixXd::Zero(labels.size(), k);
  for (std::size_t i = 0; i < labels.size(); ++i) a.one_hot(i, labels[i]) = 1.0;
  std::vector<int> counts(k, 0);
  a.centroids.assign(k, Eigen::VectorXd::Zero(points[0].size()));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    a.centroids[labels[i]] += points[i];
    ++counts[labels[i]];
  }
  for (int c = 0; c < k; ++c) a.centroids[c] /= std::max(counts[c], 1);
  return a;
}

// --- criterion 1: the nine VFE expectations vs joint Monte-Carlo -----------

void criterion_1() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  constexpr long samples = 1000000;
  int checked = 0, within = 0;
  double worst_sigmas = 0.0;

  for (int instance = 0; instance < 10; ++instance) {
    const int k = 1 + static_cast<int>(rng() % 3);
    const int o = 1 + static_cast<int>(rng() % 2);
    const int n = static_cast<int>(rng() % 11);

    MixtureState state;
    state.prior = random_tier(rng, k, o, 0.0);
    state.empirical = state.prior;
    state.posterior = random_tier(rng, k, o, 1.0);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    state.responsibilities.resize(n, k);
    for (int i = 0; i < n; ++i) {
      double sum = 0.0;
      for (int c = 0; c < k; ++c) {
        state.responsibilities(i, c) = u(rng);
        sum += state.responsibilities(i, c);
      }
      state.responsibilities.row(i) /= sum;
    }
    std::vector<Eigen::VectorXd> points;
    std::normal_distribution<double> pn(0.0, 2.0);
    for (int i = 0; i < n; ++i) {
      points.push_back(Eigen::VectorXd::NullaryExpr(o, [&](Eigen::Index) { return pn(rng); }));
    }

    const VfeTerms terms = compute_vfe(state, points);
    const auto& q = state.posterior;
    const auto& p = state.prior;

    oracle::McAccumulator mc[9];
    for (long s = 0; s < samples; ++s) {
      const Eigen::VectorXd d_sample = oracle::sample_dirichlet(rng, q.d);
      mc[0].add(oracle::log_dirichlet_pdf(d_sample, q.d));
      mc[4].add(oracle::log_dirichlet_pdf(d_sample, p.d));

      double q_mu = 0.0, q_lambda = 0.0, p_mu = 0.0, p_lambda = 0.0, p_x = 0.0;
      std::vector<Eigen::MatrixXd> lambda(k);
      std::vector<Eigen::VectorXd> mu(k);
      for (int c = 0; c < k; ++c) {
        lambda[c] = oracle::sample_wishart(rng, q.components[c].W, q.components[c].v);
        mu[c] = oracle::sample_gaussian_precision(rng, q.components[c].m,
                                                  q.components[c].beta * lambda[c]);
        q_mu += oracle::log_gaussian_pdf(mu[c], q.components[c].m,
                                         q.components[c].beta * lambda[c]);
        q_lambda += oracle::log_wishart_pdf(lambda[c], q.components[c].W, q.components[c].v);
        p_mu += oracle::log_gaussian_pdf(mu[c], p.components[c].m,
                                         p.components[c].beta * lambda[c]);
        p_lambda += oracle::log_wishart_pdf(lambda[c], p.components[c].W, p.components[c].v);
      }
      double q_z = 0.0, p_z = 0.0;
      for (int i = 0; i < n; ++i) {
        const int z = oracle::sample_categorical(rng, state.responsibilities.row(i).transpose());
        q_z += std::log(state.responsibilities(i, z));
        p_z += std::log(d_sample[z]);
        p_x += oracle::log_gaussian_pdf(points[i], mu[z], lambda[z]);
      }
      mc[1].add(q_mu);
      mc[2].add(q_lambda);
      mc[3].add(q_z);
      mc[5].add(p_mu);
      mc[6].add(p_lambda);
      mc[7].add(p_z);
      mc[8].add(p_x);
    }

    const double closed[9] = {terms.e_ln_q_d, terms.e_ln_q_mu, terms.e_ln_q_lambda,
                              terms.e_ln_q_z, terms.e_ln_p_d, terms.e_ln_p_mu,
                              terms.e_ln_p_lambda, terms.e_ln_p_z, terms.e_ln_p_x};
    for (int t = 0; t < 9; ++t) {
      ++checked;
      const double se = mc[t].standard_error();
      // Exact-zero terms (no data) have zero spread; treat as matching.
      const double sigmas = se > 0.0 ? std::abs(mc[t].mean - closed[t]) / se
                                     : (std::abs(mc[t].mean - closed[t]) < 1e-9 ? 0.0 : 1e9);
      worst_sigmas = std::max(worst_sigmas, sigmas);
      if (sigmas <= 3.0) ++within;
    }
  }

  const double secs = elapsed_s(start);
  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "%d/%d term checks within 3 standard errors, worst %.2f sigma, %.0f s (< 300 s)",
                within, checked, worst_sigmas, secs);
  report(1, "closed-form VFE terms vs Monte-Carlo", within == checked && secs < 300.0, detail);
}

// --- criterion 2: VFE monotonicity across fit sweeps ------------------------

void criterion_2() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> center(-8.0, 8.0);
  int monotone = 0;
  double worst_rise = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int blobs = 1 + static_cast<int>(rng() % 4);
    std::vector<Eigen::VectorXd> points;
    std::vector<int> labels;
    for (int b = 0; b < blobs; ++b) {
      auto blob = gaussian_blob(rng, vec2(center(rng), center(rng)),
                                0.3 + 0.2 * (rng() % 4), 8 + static_cast<int>(rng() % 20));
      points.insert(points.end(), blob.begin(), blob.end());
      labels.insert(labels.end(), blob.size(), b);
    }
    MixtureState state =
        init_prior_from_clusters(make_assignment(labels, blobs, points), points);
    std::vector<int> forget, keep;
    for (int i = 0; i < static_cast<int>(points.size()); ++i) {
      (rng() % 3 == 0 ? forget : keep).push_back(i);
    }
    const FitResult result = fit(std::move(state), points, forget, keep, {12, 0.0});
    bool ok = true;
    for (std::size_t s = 1; s < result.vfe_trace.size(); ++s) {
      const double rise = result.vfe_trace[s] - result.vfe_trace[s - 1];
      worst_rise = std::max(worst_rise, rise);
      if (rise > 1e-8) ok = false;
    }
    if (ok) ++monotone;
  }
  char detail[160];
  std::snprintf(detail, sizeof(detail), "%d/50 runs non-increasing, worst rise %.2e, %.1f s",
                monotone, worst_rise, elapsed_s(start));
  report(2, "VFE monotonicity", monotone == 50, detail);
}

// --- criterion 3: split/joint conjugate-update equivalence -----------------

void criterion_3() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(303);
  int vgm_ok = 0, tensor_ok = 0;
  double worst_vgm = 0.0, worst_tensor = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    // VGM side.
    std::vector<Eigen::VectorXd> points;
    std::vector<int> labels;
    auto a = gaussian_blob(rng, vec2(0, 0), 1.0, 20);
    auto b = gaussian_blob(rng, vec2(3, 2), 1.2, 20);
    points = a;
    points.insert(points.end(), b.begin(), b.end());
    labels.assign(40, 0);
    for (int i = 20; i < 40; ++i) labels[i] = 1;
    MixtureState state = init_prior_from_clusters(make_assignment(labels, 2, points), points);
    state = update_responsibilities(std::move(state), points);
    std::vector<int> forget, keep;
    for (int i = 0; i < 40; ++i) (rng() % 2 == 0 ? forget : keep).push_back(i);

    MixtureState split = update_empirical_prior(
        state, compute_stats(points, state.responsibilities, forget));
    split = update_posterior(split, compute_stats(points, split.responsibilities, keep));
    MixtureState joint = state;
    joint.empirical = joint.prior;
    joint = update_posterior(std::move(joint),
                             compute_stats(points, state.responsibilities, range_indices(40)));
    double err = 0.0;
    for (int c = 0; c < 2; ++c) {
      const auto& s = split.posterior.components[c];
      const auto& j = joint.posterior.components[c];
      err = std::max(err, std::abs(split.posterior.d[c] - joint.posterior.d[c])
                              / std::abs(joint.posterior.d[c]));
      err = std::max(err, std::abs(s.beta - j.beta) / j.beta);
      err = std::max(err, std::abs(s.v - j.v) / j.v);
      err = std::max(err, (s.m - j.m).cwiseAbs().maxCoeff()
                              / (1.0 + j.m.cwiseAbs().maxCoeff()));
      err = std::max(err, (s.W - j.W).cwiseAbs().maxCoeff()
                              / (1.0 + j.W.cwiseAbs().maxCoeff()));
    }
    worst_vgm = std::max(worst_vgm, err);
    if (err <= 1e-8) ++vgm_ok;

    // Transition side.
    std::uniform_real_distribution<double> u(0.01, 1.0);
    auto simplex = [&](int k) {
      Eigen::VectorXd v(k);
      for (int i = 0; i < k; ++i) v[i] = u(rng);
      return Eigen::VectorXd(v / v.sum());
    };
    std::vector<TransitionSample> samples, mf, mk;
    for (int i = 0; i < 30; ++i) {
      samples.push_back({simplex(3), simplex(3), static_cast<int>(rng() % 2)});
    }
    for (const auto& s : samples) (rng() % 2 == 0 ? mf : mk).push_back(s);
    TransitionTensor split_t(2, 3), joint_t(2, 3);
    split_t.absorb_forgotten(mf);
    split_t.compute_posterior(mk);
    joint_t.compute_posterior(samples);
    double terr = 0.0;
    for (int act = 0; act < 2; ++act) {
      terr = std::max(terr,
                      (split_t.posterior(act) - joint_t.posterior(act)).cwiseAbs().maxCoeff());
    }
    worst_tensor = std::max(worst_tensor, terr);
    if (terr <= 1e-12) ++tensor_ok;
  }
  char detail[200];
  std::snprintf(detail, sizeof(detail),
                "VGM %d/100 within 1e-8 rel (worst %.1e), tensor %d/100 within 1e-12 abs "
                "(worst %.1e), %.1f s",
                vgm_ok, worst_vgm, tensor_ok, worst_tensor, elapsed_s(start));
  report(3, "split/joint forgetting equivalence", vgm_ok == 100 && tensor_ok == 100, detail);
}

// --- criterion 4: component competition prunes a seeded mixture ------------

void criterion_4() {
  const auto start = std::chrono::steady_clock::now();
  int exact_three = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(4000 + seed);
    std::vector<Eigen::VectorXd> points;
    std::vector<int> labels;
    const std::vector<Eigen::VectorXd> centers{vec2(0, 0), vec2(10, 0), vec2(0, 10)};
    for (int b = 0; b < 3; ++b) {
      auto blob = gaussian_blob(rng, centers[b], 0.05, 50);
      points.insert(points.end(), blob.begin(), blob.end());
      labels.insert(labels.end(), 50, b);
    }
    MixtureState state = init_prior_from_clusters(make_assignment(labels, 3, points), points);
    // Seed K at 5: two extra components left over from stale data the agent
    // no longer sees, competing for the fresh points before dying.
    std::uniform_real_distribution<double> offset(12.0, 25.0);
    for (int extra = 0; extra < 2; ++extra) {
      ComponentParams stale;
      stale.beta = 10.0;
      stale.v = 11.01;
      stale.W = Eigen::MatrixXd::Identity(2, 2) * (400.0 / stale.v);
      stale.m = vec2(offset(rng), offset(rng));
      append_component(state, 10.0, stale);
    }
    state.responsibilities = Eigen::MatrixXd::Constant(points.size(), 5, 0.2);

    const FitResult result = fit(std::move(state), points, {}, range_indices(150), {10, 0.0});
    if (active_component_count(result.state) == 3) ++exact_three;
  }
  char detail[120];
  std::snprintf(detail, sizeof(detail), "%d/20 seeds with exactly 3 active components, %.1f s",
                exact_three, elapsed_s(start));
  report(4, "component competition prunes to 3", exact_three >= 18, detail);
}

// --- criterion 5: transition recovery on the 8-state maze ------------------

// Runs the full perception/structure/transition pipeline on a random walk
// (movement-heavy, eat taken 10% of the time so episodes are long enough for
// the walk's occupancy to mix across the maze).
void criterion_5() {
  const auto start = std::chrono::steady_clock::now();
  const MazeSpec maze = load_maze(std::string(TGM_FIXTURE_DIR) + "/fig12a.maze");
  EnvConfig ecfg;
  ecfg.max_steps = 1000;
  const std::uint64_t seed = 2;
  MazeEnv env(maze, ecfg, seed ^ 0x9e3779b97f4a7c15ull);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> movement(0, 3);

  AgentConfig cfg;
  ExperienceBuffer buffer;
  MixtureState state;
  TransitionTensor tensor(kActionCount, 0);
  ComponentLedger ledger(cfg.theta_kl, cfg.theta_counts);
  bool ready = false;
  int segment = buffer.begin_segment();
  long step = 0;

  auto push = [&](const Eigen::VectorXd& o) {
    buffer.push_observation(o, segment, step);
    if (ready) {
      const Eigen::Index n = state.responsibilities.rows();
      state.responsibilities.conservativeResize(n + 1, Eigen::NoChange);
      state.responsibilities.row(n) = posterior_responsibility(state, o).transpose();
    }
  };
  push(env.reset());

  auto checkpoint = [&] {
    if (!ready) {
      const ClusterAssignment clusters = mean_shift(buffer.observations, cfg.mean_shift);
      std::vector<int> count(clusters.cluster_count(), 0);
      for (int l : clusters.labels) ++count[l];
      std::vector<int> dense(clusters.cluster_count(), -1);
      int n_dense = 0;
      for (int c = 0; c < clusters.cluster_count(); ++c) {
        if (count[c] >= cfg.novelty.min_points) dense[c] = n_dense++;
      }
      if (n_dense == 0) return;
      std::vector<Eigen::VectorXd> pts;
      ClusterAssignment da;
      da.centroids.resize(n_dense);
      for (int i = 0; i < buffer.size(); ++i) {
        const int l = dense[clusters.labels[i]];
        if (l < 0) continue;
        pts.push_back(buffer.observations[i]);
        da.labels.push_back(l);
        da.centroids[l] = clusters.centroids[clusters.labels[i]];
      }
      da.one_hot = Eigen::MatrixXd::Zero(pts.size(), n_dense);
      for (std::size_t i = 0; i < da.labels.size(); ++i) da.one_hot(i, da.labels[i]) = 1.0;
      state = init_prior_from_clusters(da, pts);
      state = update_responsibilities(std::move(state), buffer.observations);
      tensor = TransitionTensor(kActionCount, state.component_count());
      ready = true;
    }
    auto effective_novel = [&] {
      std::vector<bool> mask = novelty_mask(state, buffer.observations, cfg.novelty);
      const long horizon = step - static_cast<long>(cfg.novelty_retention_periods)
                                      * cfg.checkpoint_period;
      for (int t = 0; t < buffer.size(); ++t) {
        if (buffer.step_stamp[t] < horizon) mask[t] = false;
      }
      return mask;
    };
    std::vector<bool> novel = effective_novel();
    std::vector<int> explained;
    for (int i = 0; i < buffer.size(); ++i) {
      if (!novel[i]) explained.push_back(i);
    }
    state = fit(std::move(state), buffer.observations, {}, explained,
                {cfg.vgm_sweeps, 1e-6}).state;
    DiscoveryResult found =
        discover_components(buffer.observations, cfg.mean_shift, std::move(state), cfg.novelty);
    state = std::move(found.state);
    if (found.added > 0) {
      tensor = tensor.resize(state.component_count(), found.index_map);
      std::vector<int> id(ledger.entries().size());
      std::iota(id.begin(), id.end(), 0);
      ledger.apply_index_map(id, state.component_count());
    }
    ledger.checkpoint(posterior_point_estimates(state));
    tensor.compute_posterior(
        buffer.make_samples(state.responsibilities, buffer.transition_indices()));
    ForgetPlan plan = plan_forgetting(state.responsibilities, ledger.fixed_flags(),
                                      buffer.segments, effective_novel());
    const int tail = buffer.size() - 1;
    if (!plan.observation_forget.empty() && plan.observation_forget.back() == tail) {
      plan.observation_forget.pop_back();
      plan.observation_keep.push_back(tail);
      if (buffer.has_transition(tail - 1)) {
        const bool prev_forgotten = !plan.observation_forget.empty()
                                    && plan.observation_forget.back() == tail - 1;
        if (!prev_forgotten && !plan.transition_forget.empty()
            && plan.transition_forget.back() == tail - 1) {
          plan.transition_forget.pop_back();
          plan.transition_keep.push_back(tail - 1);
        }
      }
    }
    apply_forgetting(buffer, plan, state, tensor);
  };

  constexpr long total_steps = 5000;
  while (step < total_steps) {
    const Action a = unit(rng) < 0.1 ? Action::eat : static_cast<Action>(movement(rng));
    const StepResult sr = env.step(a);
    ++step;
    buffer.annotate_last(static_cast<int>(a), sr.reward, false);
    push(sr.observation);
    if (step % cfg.checkpoint_period == 0) checkpoint();
    if (sr.done) {
      segment = buffer.begin_segment();
      push(env.reset());
    }
  }

  const TransitionAccuracy acc = transition_accuracy(state, tensor, maze);
  const double frac = acc.fraction_within(0.15);
  char detail[200];
  std::snprintf(detail, sizeof(detail),
                "5000 random-walk steps: K=%d (8 cells), %.0f%% of columns within TV 0.15 "
                "(need >= 90%%), mean TV %.3f, %.1f s",
                state.component_count(), 100.0 * frac, acc.mean_tv, elapsed_s(start));
  report(5, "transition recovery on the 8-state maze", frac >= 0.9, detail);
}

// --- criterion 6: forgetting worked example --------------------------------

void criterion_6() {
  const std::vector<bool> flexible{false, false, true, false, false,
                                   false, true, false, false};
  Eigen::MatrixXd resp(9, 2);
  for (int t = 0; t < 9; ++t) {
    resp(t, 0) = flexible[t] ? 0.2 : 0.8;
    resp(t, 1) = flexible[t] ? 0.8 : 0.2;
  }
  const ForgetPlan plan = plan_forgetting(resp, {true, false}, std::vector<int>(9, 0));
  const bool pass = plan.observation_forget == std::vector<int>{0, 4, 8}
                 && plan.observation_keep == std::vector<int>{1, 2, 3, 5, 6, 7}
                 && plan.transition_forget == std::vector<int>{0, 3, 4, 7}
                 && plan.transition_keep == std::vector<int>{1, 2, 5, 6};
  report(6, "forgetting worked example", pass,
         pass ? "N'={0,4,8}, N''={1,2,3,5,6,7}, M'={0,3,4,7}, M''={1,2,5,6}"
              : "computed sets differ from the expected partition");
}

// --- criterion 7: Q-learning oracle agreement -------------------------------

void criterion_7() {
  const auto start = std::chrono::steady_clock::now();
  const MazeSpec maze = load_maze(std::string(TGM_FIXTURE_DIR) + "/fig12a.maze");
  const auto truth = true_transition_matrices(maze);
  const int k = static_cast<int>(maze.floor_cells().size());
  const int goal = maze.state_index(maze.goal);

  Mdp mdp;
  mdp.discount = 0.9;
  mdp.transitions = truth;
  mdp.rewards = Eigen::MatrixXd::Zero(kActionCount, k);
  mdp.continues = Eigen::MatrixXd::Ones(kActionCount, k);
  mdp.rewards(static_cast<int>(Action::eat), goal) = 1.0;
  mdp.continues(static_cast<int>(Action::eat), goal) = 0.0;
  const QTable oracle = value_iteration_oracle(mdp);

  // Goal-outward sweep order (prioritized-sweeping style); with 1/visit-count
  // steps the first sweep lands on the fixed point and later sweeps average
  // the residual away at 1/n.
  std::vector<int> dist(k, 1 << 20);
  dist[goal] = 0;
  std::queue<int> frontier;
  frontier.push(goal);
  while (!frontier.empty()) {
    const int s = frontier.front();
    frontier.pop();
    for (int s2 = 0; s2 < k; ++s2) {
      for (int a = 0; a < kActionCount; ++a) {
        if (truth[a](s, s2) > 0.5 && dist[s2] > dist[s] + 1) {
          dist[s2] = dist[s] + 1;
          frontier.push(s2);
        }
      }
    }
  }
  std::vector<std::pair<int, int>> order;
  for (int d = 0; d <= *std::max_element(dist.begin(), dist.end()); ++d) {
    for (int s = 0; s < k; ++s) {
      if (dist[s] != d) continue;
      for (int a = 0; a < kActionCount; ++a) order.emplace_back(s, a);
    }
  }

  QTable q;
  q.values = Eigen::MatrixXd::Zero(kActionCount, k);
  q.discount = mdp.discount;
  Eigen::MatrixXd visits = Eigen::MatrixXd::Zero(kActionCount, k);
  long updates = 0;
  while (updates < 100000) {
    for (const auto& [s, a] : order) {
      if (updates >= 100000) break;
      ++updates;
      visits(a, s) += 1.0;
      q.learning_rate = 1.0 / visits(a, s);
      const bool terminal = a == static_cast<int>(Action::eat) && s == goal;
      standard_q_update(q, s, a, mdp.rewards(a, s), truth, terminal);
    }
  }
  const double sup_err = (q.values - oracle.values).cwiseAbs().maxCoeff();

  // One-hot beliefs reduce the belief update to the tabular update, bitwise.
  std::mt19937_64 rng(707);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  int bitwise = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int actions = 2 + static_cast<int>(rng() % 4);
    const int states = 2 + static_cast<int>(rng() % 5);
    QTable qa, qb;
    qa.values = Eigen::MatrixXd::NullaryExpr(actions, states,
                                             [&](Eigen::Index, Eigen::Index) { return u(rng); });
    qa.learning_rate = 0.02 + 0.3 * std::abs(u(rng));
    qa.discount = 0.95;
    qb = qa;
    std::vector<Eigen::MatrixXd> trans(actions, Eigen::MatrixXd(states, states));
    std::uniform_real_distribution<double> pu(0.01, 1.0);
    for (auto& m : trans) {
      for (int j = 0; j < states; ++j) {
        double sum = 0.0;
        for (int i = 0; i < states; ++i) {
          m(i, j) = pu(rng);
          sum += m(i, j);
        }
        m.col(j) /= sum;
      }
    }
    const int action = static_cast<int>(rng() % actions);
    const int state = static_cast<int>(rng() % states);
    const double reward = u(rng);
    const bool terminal = rng() % 5 == 0;
    standard_q_update(qa, state, action, reward, trans, terminal);
    Eigen::VectorXd probs = Eigen::VectorXd::Zero(states);
    probs[state] = 1.0;
    belief_q_update(qb, {probs}, action, reward, trans, terminal);
    if (qa.values == qb.values) ++bitwise;
  }

  char detail[200];
  std::snprintf(detail, sizeof(detail),
                "sup|q - q*| = %.2e after 1e5 updates (need <= 1e-3); one-hot bitwise "
                "agreement %d/1000, %.1f s",
                sup_err, bitwise, elapsed_s(start));
  report(7, "Q-learning matches value iteration", sup_err <= 1e-3 && bitwise == 1000, detail);
}

// --- criteria 8 and 9: end-to-end maze solving ------------------------------

double final_window_success(const std::vector<EpisodeMetrics>& metrics, int window) {
  const int n = static_cast<int>(metrics.size());
  const int w = std::min(window, n);
  if (w == 0) return 0.0;
  int successes = 0;
  for (int i = n - w; i < n; ++i) successes += metrics[i].success ? 1 : 0;
  return static_cast<double>(successes) / w;
}

void criterion_8() {
  const auto start = std::chrono::steady_clock::now();
  const char* mazes[] = {"fig12a.maze", "fig12c.maze", "fig12d.maze", "fig12e.maze"};
  bool all_pass = true;
  std::string detail;
  for (const char* name : mazes) {
    const MazeSpec maze = load_maze(std::string(TGM_FIXTURE_DIR) + "/" + name);
    int good_seeds = 0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      AgentConfig cfg;
      cfg.seed = seed;
      const TrainResult result = train_agent(maze, cfg, 500);
      if (final_window_success(result.metrics, 50) >= 0.8) ++good_seeds;
    }
    if (good_seeds < 4) all_pass = false;
    detail += std::string(name) + " " + std::to_string(good_seeds) + "/5  ";
  }
  char tail[64];
  std::snprintf(tail, sizeof(tail), "(need >= 4/5 each), %.0f s (< 1800 s)", elapsed_s(start));
  detail += tail;
  report(8, "end-to-end maze solving", all_pass && elapsed_s(start) < 1800.0, detail);
}

void criterion_9() {
  const auto start = std::chrono::steady_clock::now();
  const MazeSpec maze = load_maze(std::string(TGM_FIXTURE_DIR) + "/fig12b.maze");
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    AgentConfig cfg;
    cfg.seed = seed;
    const TrainResult result = train_agent(maze, cfg, 500);
    total += final_window_success(result.metrics, 50);
  }
  const double mean_rate = total / 5.0;
  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "long corridor final-window success %.1f%% (need < 10%%), %.0f s",
                100.0 * mean_rate, elapsed_s(start));
  report(9, "long-corridor failure replication", mean_rate < 0.10, detail);
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  if (g_failures == 0) {
    std::printf("all acceptance criteria passed\n");
    return 0;
  }
  std::printf("%d acceptance criteria failed\n", g_failures);
  return 1;
}
