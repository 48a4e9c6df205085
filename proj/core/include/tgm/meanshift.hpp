#pragma once

#include <Eigen/Dense>
#include <vector>

namespace tgm {

struct MeanShiftConfig {
  double bandwidth = 1.0;       // flat spherical window radius theta_b
  double convergence_tol = 0.0; // 0 -> 1e-6 * bandwidth
  int max_iterations = 200;
  double merge_radius = 0.0;    // 0 -> bandwidth / 4

  double effective_tol() const { return convergence_tol > 0 ? convergence_tol : 1e-6 * bandwidth; }
  double effective_merge_radius() const { return merge_radius > 0 ? merge_radius : 0.25 * bandwidth; }
  void validate() const;
};

struct ClusterAssignment {
  std::vector<int> labels;                // cluster id per point, size N
  std::vector<Eigen::VectorXd> centroids; // one per cluster
  Eigen::MatrixXd one_hot;                // N x K, rows sum to 1

  int cluster_count() const { return static_cast<int>(centroids.size()); }
};

/// Flat-window mean shift. Each point's window centroid is iterated to the
/// mean of the points within `bandwidth` until it moves less than the
/// tolerance; converged centroids within `merge_radius` of each other share
/// a cluster. Deterministic given input order (ties go to the lowest cluster
/// index). Neighborhood search is brute-force O(N^2); N stays at desk scale
/// here so no spatial index.
ClusterAssignment mean_shift(const std::vector<Eigen::VectorXd>& points,
                             const MeanShiftConfig& cfg);

}  // namespace tgm
