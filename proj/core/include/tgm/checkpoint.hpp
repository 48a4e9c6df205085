#pragma once

#include <stdexcept>
#include <string>

#include "tgm/planner.hpp"
#include "tgm/structure.hpp"
#include "tgm/transition.hpp"
#include "tgm/vgm.hpp"

namespace tgm {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything the agent needs to resume or be evaluated: mixture tiers and
/// responsibilities, transition tensor, component ledger, Q-table, the
/// config digest and RNG states. Serialized as JSON with every real encoded
/// as a C99 hex-float string, so round-trips are bit-faithful.
struct AgentCheckpoint {
  static constexpr int format_version = 1;

  std::string config_hash;
  std::string agent_rng;
  std::string env_rng;
  bool vgm_initialized = false;
  MixtureState vgm;
  TransitionTensor transition;
  ComponentLedger ledger;
  QTable qtable;
};

std::string serialize_checkpoint(const AgentCheckpoint& cp);
AgentCheckpoint parse_checkpoint(const std::string& text);

void save_checkpoint(const std::string& path, const AgentCheckpoint& cp);
AgentCheckpoint load_checkpoint(const std::string& path);

}  // namespace tgm
