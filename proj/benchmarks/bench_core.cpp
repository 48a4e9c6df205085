#include <benchmark/benchmark.h>

#include <random>

#include "tgm/agent.hpp"
#include "tgm/env.hpp"
#include "tgm/meanshift.hpp"
#include "tgm/planner.hpp"
#include "tgm/transition.hpp"
#include "tgm/vgm.hpp"

namespace {

std::vector<Eigen::VectorXd> grid_observations(int cells, int per_cell, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.1);
  std::vector<Eigen::VectorXd> points;
  for (int c = 0; c < cells; ++c) {
    for (int i = 0; i < per_cell; ++i) {
      Eigen::VectorXd p(2);
      p << (c % 4) + noise(rng), (c / 4) + noise(rng);
      points.push_back(p);
    }
  }
  return points;
}

tgm::ClusterAssignment label_by_cell(const std::vector<Eigen::VectorXd>& points, int cells,
                                     int per_cell) {
  tgm::ClusterAssignment a;
  a.one_hot = Eigen::MatrixXd::Zero(points.size(), cells);
  a.centroids.assign(cells, Eigen::VectorXd::Zero(2));
  std::vector<int> counts(cells, 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const int c = static_cast<int>(i) / per_cell;
    a.labels.push_back(c);
    a.one_hot(i, c) = 1.0;
    a.centroids[c] += points[i];
    ++counts[c];
  }
  for (int c = 0; c < cells; ++c) a.centroids[c] /= counts[c];
  return a;
}

void BM_MeanShift(benchmark::State& state) {
  const auto points = grid_observations(8, static_cast<int>(state.range(0)) / 8, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(tgm::mean_shift(points, {.bandwidth = 0.35}));
  }
}
BENCHMARK(BM_MeanShift)->Arg(128)->Arg(512);

void BM_FitSweep(benchmark::State& state) {
  const int cells = 8, per_cell = static_cast<int>(state.range(0)) / 8;
  const auto points = grid_observations(cells, per_cell, 2);
  const auto init = tgm::init_prior_from_clusters(label_by_cell(points, cells, per_cell), points);
  std::vector<int> keep(points.size());
  for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = static_cast<int>(i);
  for (auto _ : state) {
    benchmark::DoNotOptimize(tgm::fit(init, points, {}, keep, {1, 0.0}));
  }
}
BENCHMARK(BM_FitSweep)->Arg(128)->Arg(512);

void BM_ComputeVfe(benchmark::State& state) {
  const int cells = 8, per_cell = 64;
  const auto points = grid_observations(cells, per_cell, 3);
  auto fitted = tgm::fit(
      tgm::init_prior_from_clusters(label_by_cell(points, cells, per_cell), points), points, {},
      [&] {
        std::vector<int> keep(points.size());
        for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = static_cast<int>(i);
        return keep;
      }(),
      {3, 0.0});
  for (auto _ : state) {
    benchmark::DoNotOptimize(tgm::compute_vfe(fitted.state, points));
  }
}
BENCHMARK(BM_ComputeVfe);

void BM_TransitionPosterior(benchmark::State& state) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  std::vector<tgm::TransitionSample> samples;
  for (int i = 0; i < 512; ++i) {
    Eigen::VectorXd r0(8), r1(8);
    for (int k = 0; k < 8; ++k) {
      r0[k] = u(rng);
      r1[k] = u(rng);
    }
    samples.push_back({r0 / r0.sum(), r1 / r1.sum(), static_cast<int>(rng() % 5)});
  }
  tgm::TransitionTensor tensor(5, 8);
  for (auto _ : state) {
    tensor.compute_posterior(samples);
    benchmark::DoNotOptimize(tensor);
  }
}
BENCHMARK(BM_TransitionPosterior);

void BM_BeliefQUpdate(benchmark::State& state) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  tgm::QTable q;
  q.values = Eigen::MatrixXd::Zero(5, 8);
  std::vector<Eigen::MatrixXd> trans(5, Eigen::MatrixXd(8, 8));
  for (auto& m : trans) {
    for (int j = 0; j < 8; ++j) {
      for (int i = 0; i < 8; ++i) m(i, j) = u(rng);
      m.col(j) /= m.col(j).sum();
    }
  }
  Eigen::VectorXd probs(8);
  for (int i = 0; i < 8; ++i) probs[i] = u(rng);
  probs /= probs.sum();
  for (auto _ : state) {
    tgm::belief_q_update(q, {probs}, 2, 0.5, trans);
    benchmark::DoNotOptimize(q);
  }
}
BENCHMARK(BM_BeliefQUpdate);

void BM_TrainEpisodes(benchmark::State& state) {
  const tgm::MazeSpec maze =
      tgm::parse_maze("WWWWW\nW..GW\nW...W\nWS..W\nWWWWW\n");
  for (auto _ : state) {
    tgm::AgentConfig cfg;
    cfg.seed = 7;
    benchmark::DoNotOptimize(tgm::train_agent(maze, cfg, 20));
  }
}
BENCHMARK(BM_TrainEpisodes)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
