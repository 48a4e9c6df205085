#include "tgm/meanshift.hpp"

#include <cmath>
#include <stdexcept>

namespace tgm {

void MeanShiftConfig::validate() const {
  if (!(bandwidth > 0.0)) throw std::invalid_argument("MeanShiftConfig: bandwidth must be > 0");
  if (convergence_tol < 0.0 || merge_radius < 0.0 || max_iterations < 1) {
    throw std::invalid_argument("MeanShiftConfig: invalid tolerance or iteration cap");
  }
}

ClusterAssignment mean_shift(const std::vector<Eigen::VectorXd>& points,
                             const MeanShiftConfig& cfg) {
  cfg.validate();
  const int n = static_cast<int>(points.size());
  if (n == 0) throw std::invalid_argument("mean_shift: empty input");
  const Eigen::Index dim = points[0].size();
  for (const auto& p : points) {
    if (p.size() != dim) throw std::invalid_argument("mean_shift: inconsistent dimensions");
    if (!p.allFinite()) throw std::invalid_argument("mean_shift: non-finite coordinates");
  }

  const double radius2 = cfg.bandwidth * cfg.bandwidth;
  const double tol2 = cfg.effective_tol() * cfg.effective_tol();

  // Per-point window iteration; independent across points.
  std::vector<Eigen::VectorXd> modes(n);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd m = points[i];
    for (int it = 0; it < cfg.max_iterations; ++it) {
      Eigen::VectorXd acc = Eigen::VectorXd::Zero(dim);
      int count = 0;
      for (int j = 0; j < n; ++j) {
        if ((points[j] - m).squaredNorm() <= radius2) {
          acc += points[j];
          ++count;
        }
      }
      if (count == 0) break;  // window drifted into a gap, keep position
      acc /= count;
      const double shift2 = (acc - m).squaredNorm();
      m = acc;
      if (shift2 < tol2) break;
    }
    modes[i] = m;
  }

  // Transitive merge: modes within merge_radius of each other link up and a
  // cluster is a connected component. The link graph does not depend on the
  // input order, so shuffling the points only relabels the partition.
  const double merge2 = cfg.effective_merge_radius() * cfg.effective_merge_radius();
  std::vector<int> parent(n);
  for (int i = 0; i < n; ++i) parent[i] = i;
  auto find = [&parent](int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if ((modes[i] - modes[j]).squaredNorm() <= merge2) {
        const int ri = find(i), rj = find(j);
        if (ri != rj) parent[std::max(ri, rj)] = std::min(ri, rj);
      }
    }
  }

  // Labels in first-occurrence order; centroid = mean of member modes.
  ClusterAssignment out;
  out.labels.assign(n, -1);
  std::vector<int> root_to_label;
  std::vector<Eigen::VectorXd> acc;
  std::vector<int> size;
  for (int i = 0; i < n; ++i) {
    const int r = find(i);
    int label = -1;
    for (int b = 0; b < static_cast<int>(root_to_label.size()); ++b) {
      if (root_to_label[b] == r) { label = b; break; }
    }
    if (label < 0) {
      label = static_cast<int>(root_to_label.size());
      root_to_label.push_back(r);
      acc.push_back(Eigen::VectorXd::Zero(dim));
      size.push_back(0);
    }
    out.labels[i] = label;
    acc[label] += modes[i];
    ++size[label];
  }
  const int k = static_cast<int>(acc.size());
  out.centroids.resize(k);
  for (int b = 0; b < k; ++b) out.centroids[b] = acc[b] / size[b];
  out.one_hot = Eigen::MatrixXd::Zero(n, k);
  for (int i = 0; i < n; ++i) out.one_hot(i, out.labels[i]) = 1.0;
  return out;
}

}  // namespace tgm
