#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "tgm/distributions.hpp"
#include "tgm/meanshift.hpp"
#include "tgm/vgm.hpp"

namespace tgm {

/// Flexible-to-fixed lifecycle bookkeeping, one entry per mixture component.
/// A component that persists theta_counts checkpoints in a row (KL to some
/// current component below theta_kl) becomes fixed; fixed never reverts.
class ComponentLedger {
 public:
  struct Entry {
    int persistence_count = 0;
    bool fixed = false;
    std::optional<GaussianParams> snapshot;
  };

  ComponentLedger(double theta_kl = 0.5, int theta_counts = 4)
      : theta_kl_(theta_kl), theta_counts_(theta_counts) {}

  /// Match previous snapshots against the current components (greedy best-KL,
  /// each current component claimable once), update persistence counts and
  /// statuses, store new snapshots. Returns the components fixed this call.
  std::vector<int> checkpoint(const std::vector<GaussianParams>& current);

  /// Remap entries after a component-count change; mapping[old] = new or -1.
  void apply_index_map(const std::vector<int>& mapping, int new_count);

  std::vector<bool> fixed_flags() const;
  const std::vector<Entry>& entries() const { return entries_; }
  std::vector<Entry>& mutable_entries() { return entries_; }
  double theta_kl() const { return theta_kl_; }
  int theta_counts() const { return theta_counts_; }

 private:
  double theta_kl_;
  int theta_counts_;
  std::vector<Entry> entries_;
};

/// Index partitions for data forgetting. Observation t can be forgotten when
/// t-1, t and t+1 are all backed by fixed components (missing neighbors at
/// trial boundaries are ignored); transition t = (t, t+1) is forgotten when
/// either endpoint is.
struct ForgetPlan {
  std::vector<int> observation_forget;  // N'
  std::vector<int> observation_keep;    // N''
  std::vector<int> transition_forget;   // M'
  std::vector<int> transition_keep;     // M''
};

/// Build the forget/keep sets. `segment_ids` assigns each observation to its
/// trial; transitions exist only between consecutive observations of the
/// same segment. An observation is fixed-backed when its argmax
/// responsibility lands on a fixed component. Observations flagged in
/// `novel` are never fixed-backed: they belong to a component that does not
/// exist yet and must stay buffered until discovery can use them.
ForgetPlan plan_forgetting(const Eigen::MatrixXd& responsibilities,
                           const std::vector<bool>& fixed, const std::vector<int>& segment_ids,
                           const std::vector<bool>& novel = {});

struct NoveltyConfig {
  double mahalanobis_threshold = 3.0;  // novel beyond this distance to the best component
  int min_points = 5;                  // cluster support needed to spawn a component
};

struct DiscoveryResult {
  MixtureState state;
  std::vector<int> index_map;  // old -> new component index (identity here)
  int added = 0;
  std::vector<Eigen::VectorXd> new_means;
};

/// Search poorly-explained observations for new clusters: points whose best
/// component is further than the Mahalanobis threshold are re-clustered with
/// mean shift, and every cluster with enough support becomes a fresh
/// component (initialized with the init_prior_from_clusters conventions).
/// Responsibilities are refreshed when the state grows.
DiscoveryResult discover_components(const std::vector<Eigen::VectorXd>& points,
                                    const MeanShiftConfig& cfg, MixtureState state,
                                    const NoveltyConfig& novelty = {});

/// Posterior plug-in Gaussians (mean m-hat, precision v-hat * W-hat), used
/// for ledger matching and novelty checks.
std::vector<GaussianParams> posterior_point_estimates(const MixtureState& state);

/// Per-point novelty: true when the best-explaining component (highest
/// plug-in log density) is further than the Mahalanobis threshold. With no
/// components, everything is novel.
std::vector<bool> novelty_mask(const MixtureState& state,
                               const std::vector<Eigen::VectorXd>& points,
                               const NoveltyConfig& novelty = {});

}  // namespace tgm
