#include <doctest.h>

#include <algorithm>
#include <random>

#include "tgm/meanshift.hpp"

using namespace tgm;

namespace {

Eigen::VectorXd vec1(double x) {
  Eigen::VectorXd v(1);
  v << x;
  return v;
}

Eigen::VectorXd vec2(double x, double y) {
  Eigen::VectorXd v(2);
  v << x, y;
  return v;
}

// Canonical partition signature: label of each point with labels renumbered
// by first occurrence over a fixed reference order.
std::vector<int> partition_signature(const std::vector<int>& labels,
                                     const std::vector<int>& order) {
  std::vector<int> renumber(labels.size(), -1);
  std::vector<int> out(labels.size());
  int next = 0;
  for (int idx : order) {
    int& r = renumber[labels[idx]];
    if (r < 0) r = next++;
    out[idx] = r;
  }
  return out;
}

}  // namespace

TEST_CASE("mean_shift: single point is its own cluster") {
  const auto result = mean_shift({vec2(1.5, -2.0)}, {.bandwidth = 1.0});
  CHECK(result.cluster_count() == 1);
  CHECK(result.labels == std::vector<int>{0});
  CHECK((result.centroids[0] - vec2(1.5, -2.0)).norm() == doctest::Approx(0.0));
  CHECK(result.one_hot.rows() == 1);
  CHECK(result.one_hot(0, 0) == 1.0);
}

TEST_CASE("mean_shift: two far points stay separate") {
  const auto result = mean_shift({vec1(0.0), vec1(10.0)}, {.bandwidth = 1.0});
  CHECK(result.cluster_count() == 2);
  CHECK(result.labels[0] != result.labels[1]);
  CHECK(result.centroids[result.labels[0]][0] == doctest::Approx(0.0));
  CHECK(result.centroids[result.labels[1]][0] == doctest::Approx(10.0));
}

TEST_CASE("mean_shift: three close 1-D points collapse to their mean") {
  const auto result = mean_shift({vec1(0.0), vec1(0.1), vec1(0.2)}, {.bandwidth = 1.0});
  CHECK(result.cluster_count() == 1);
  CHECK(result.centroids[0][0] == doctest::Approx(0.1).epsilon(1e-9));
}

TEST_CASE("mean_shift: input validation") {
  CHECK_THROWS_AS(mean_shift({}, {.bandwidth = 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(mean_shift({vec1(0.0)}, {.bandwidth = 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(mean_shift({vec1(std::nan(""))}, {.bandwidth = 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(mean_shift({vec1(0.0), vec2(0.0, 1.0)}, {.bandwidth = 1.0}),
                  std::invalid_argument);
}

TEST_CASE("mean_shift: recovers well-separated clusters exactly") {
  // Gap > 2 theta_b between clusters, diameter < theta_b inside.
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> jitter(-0.2, 0.2);
  const std::vector<Eigen::VectorXd> centers{vec2(0, 0), vec2(5, 0), vec2(0, 5), vec2(6, 6)};
  std::vector<Eigen::VectorXd> points;
  std::vector<int> truth;
  for (int c = 0; c < 4; ++c) {
    for (int i = 0; i < 30; ++i) {
      points.push_back(centers[c] + vec2(jitter(rng), jitter(rng)));
      truth.push_back(c);
    }
  }
  const auto result = mean_shift(points, {.bandwidth = 1.0});
  CHECK(result.cluster_count() == 4);
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = 0; j < points.size(); ++j) {
      CHECK((result.labels[i] == result.labels[j]) == (truth[i] == truth[j]));
    }
  }
}

TEST_CASE("mean_shift: converged centroids stay inside the data's bounding box") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> coord(-3.0, 3.0);
  std::vector<Eigen::VectorXd> points;
  for (int i = 0; i < 100; ++i) points.push_back(vec2(coord(rng), coord(rng)));
  double lo = 1e9, hi = -1e9;
  for (const auto& p : points) {
    lo = std::min({lo, p[0], p[1]});
    hi = std::max({hi, p[0], p[1]});
  }
  const auto result = mean_shift(points, {.bandwidth = 0.8});
  for (const auto& c : result.centroids) {
    CHECK(c[0] >= lo);
    CHECK(c[0] <= hi);
    CHECK(c[1] >= lo);
    CHECK(c[1] <= hi);
  }
}

TEST_CASE("mean_shift: shuffled input yields the same partition up to relabeling") {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> noise(0.0, 0.3);
  std::vector<Eigen::VectorXd> points;
  for (int i = 0; i < 60; ++i) {
    const double cx = (i % 3) * 4.0;
    points.push_back(vec2(cx + noise(rng), noise(rng)));
  }
  const auto base = mean_shift(points, {.bandwidth = 1.0});

  std::vector<int> perm(points.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
  for (int round = 0; round < 5; ++round) {
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Eigen::VectorXd> shuffled(points.size());
    for (std::size_t i = 0; i < perm.size(); ++i) shuffled[i] = points[perm[i]];
    const auto moved = mean_shift(shuffled, {.bandwidth = 1.0});

    // Map the shuffled labels back onto original positions and compare
    // canonical signatures.
    std::vector<int> back(points.size());
    for (std::size_t i = 0; i < perm.size(); ++i) back[perm[i]] = moved.labels[i];
    std::vector<int> order(points.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    CHECK(partition_signature(base.labels, order) == partition_signature(back, order));
  }
}

TEST_CASE("mean_shift: every cluster owns at least one point and rows are one-hot") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<Eigen::VectorXd> points;
  for (int i = 0; i < 40; ++i) points.push_back(vec2(noise(rng), noise(rng)));
  const auto result = mean_shift(points, {.bandwidth = 0.5});
  std::vector<int> counts(result.cluster_count(), 0);
  for (int label : result.labels) ++counts[label];
  for (int c : counts) CHECK(c >= 1);
  for (Eigen::Index i = 0; i < result.one_hot.rows(); ++i) {
    CHECK(result.one_hot.row(i).sum() == 1.0);
  }
}
