#include "tgm/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tgm/util.hpp"

namespace tgm {

using nlohmann::json;

namespace {

json encode_vector(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(to_hexfloat(v[i]));
  return arr;
}

json encode_matrix(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(to_hexfloat(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::VectorXd decode_vector(const json& arr) {
  Eigen::VectorXd v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) v[i] = from_hexfloat(arr[i].get<std::string>());
  return v;
}

Eigen::MatrixXd decode_matrix(const json& rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows[0].size();
  Eigen::MatrixXd m(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    if (rows[i].size() != c) throw CheckpointError("checkpoint: ragged matrix");
    for (std::size_t j = 0; j < c; ++j) m(i, j) = from_hexfloat(rows[i][j].get<std::string>());
  }
  return m;
}

json encode_tier(const MixtureTier& tier) {
  json comps = json::array();
  for (const auto& c : tier.components) {
    comps.push_back({{"m", encode_vector(c.m)},
                     {"beta", to_hexfloat(c.beta)},
                     {"W", encode_matrix(c.W)},
                     {"v", to_hexfloat(c.v)}});
  }
  return {{"d", encode_vector(tier.d)}, {"components", std::move(comps)}};
}

MixtureTier decode_tier(const json& j) {
  MixtureTier tier;
  tier.d = decode_vector(j.at("d"));
  for (const auto& c : j.at("components")) {
    ComponentParams p;
    p.m = decode_vector(c.at("m"));
    p.beta = from_hexfloat(c.at("beta").get<std::string>());
    p.W = decode_matrix(c.at("W"));
    p.v = from_hexfloat(c.at("v").get<std::string>());
    tier.components.push_back(std::move(p));
  }
  return tier;
}

json encode_tensor_tier(const TransitionTensor& t,
                        const Eigen::MatrixXd& (TransitionTensor::*getter)(int) const) {
  json arr = json::array();
  for (int a = 0; a < t.action_count(); ++a) arr.push_back(encode_matrix((t.*getter)(a)));
  return arr;
}

std::vector<Eigen::MatrixXd> decode_tensor_tier(const json& arr) {
  std::vector<Eigen::MatrixXd> out;
  for (const auto& m : arr) out.push_back(decode_matrix(m));
  return out;
}

}  // namespace

std::string serialize_checkpoint(const AgentCheckpoint& cp) {
  json doc;
  doc["format_version"] = AgentCheckpoint::format_version;
  doc["config_hash"] = cp.config_hash;
  doc["rng"] = {{"agent", cp.agent_rng}, {"env", cp.env_rng}};

  doc["vgm"] = {{"initialized", cp.vgm_initialized},
                {"K", cp.vgm.component_count()},
                {"O", cp.vgm.dim()},
                {"prior", encode_tier(cp.vgm.prior)},
                {"empirical", encode_tier(cp.vgm.empirical)},
                {"posterior", encode_tier(cp.vgm.posterior)},
                {"responsibilities", encode_matrix(cp.vgm.responsibilities)}};

  doc["transition"] = {{"A", cp.transition.action_count()},
                       {"K", cp.transition.component_count()},
                       {"prior", encode_tensor_tier(cp.transition, &TransitionTensor::prior)},
                       {"empirical", encode_tensor_tier(cp.transition, &TransitionTensor::empirical)},
                       {"posterior", encode_tensor_tier(cp.transition, &TransitionTensor::posterior)}};

  json entries = json::array();
  for (const auto& e : cp.ledger.entries()) {
    json entry = {{"count", e.persistence_count}, {"fixed", e.fixed}};
    if (e.snapshot) {
      entry["snapshot"] = {{"mean", encode_vector(e.snapshot->mean)},
                           {"precision", encode_matrix(e.snapshot->precision)}};
    } else {
      entry["snapshot"] = nullptr;
    }
    entries.push_back(std::move(entry));
  }
  doc["ledger"] = {{"theta_kl", to_hexfloat(cp.ledger.theta_kl())},
                   {"theta_counts", cp.ledger.theta_counts()},
                   {"entries", std::move(entries)}};

  doc["qtable"] = {{"alpha", to_hexfloat(cp.qtable.learning_rate)},
                   {"gamma", to_hexfloat(cp.qtable.discount)},
                   {"values", encode_matrix(cp.qtable.values)}};

  return doc.dump(2) + "\n";
}

AgentCheckpoint parse_checkpoint(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("checkpoint: invalid JSON: ") + e.what());
  }
  try {
    if (doc.at("format_version").get<int>() != AgentCheckpoint::format_version) {
      throw CheckpointError("checkpoint: unsupported format version");
    }
    AgentCheckpoint cp;
    cp.config_hash = doc.at("config_hash").get<std::string>();
    cp.agent_rng = doc.at("rng").at("agent").get<std::string>();
    cp.env_rng = doc.at("rng").at("env").get<std::string>();

    const json& vgm = doc.at("vgm");
    cp.vgm_initialized = vgm.at("initialized").get<bool>();
    cp.vgm.prior = decode_tier(vgm.at("prior"));
    cp.vgm.empirical = decode_tier(vgm.at("empirical"));
    cp.vgm.posterior = decode_tier(vgm.at("posterior"));
    cp.vgm.responsibilities = decode_matrix(vgm.at("responsibilities"));

    const json& tr = doc.at("transition");
    cp.transition.set_tiers(decode_tensor_tier(tr.at("prior")),
                            decode_tensor_tier(tr.at("empirical")),
                            decode_tensor_tier(tr.at("posterior")));

    const json& ledger = doc.at("ledger");
    cp.ledger = ComponentLedger(from_hexfloat(ledger.at("theta_kl").get<std::string>()),
                                ledger.at("theta_counts").get<int>());
    for (const auto& e : ledger.at("entries")) {
      ComponentLedger::Entry entry;
      entry.persistence_count = e.at("count").get<int>();
      entry.fixed = e.at("fixed").get<bool>();
      if (!e.at("snapshot").is_null()) {
        entry.snapshot = GaussianParams{decode_vector(e.at("snapshot").at("mean")),
                                        decode_matrix(e.at("snapshot").at("precision"))};
      }
      cp.ledger.mutable_entries().push_back(std::move(entry));
    }

    const json& q = doc.at("qtable");
    cp.qtable.learning_rate = from_hexfloat(q.at("alpha").get<std::string>());
    cp.qtable.discount = from_hexfloat(q.at("gamma").get<std::string>());
    cp.qtable.values = decode_matrix(q.at("values"));
    return cp;
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("checkpoint: missing or malformed field: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw CheckpointError(std::string("checkpoint: bad value: ") + e.what());
  }
}

void save_checkpoint(const std::string& path, const AgentCheckpoint& cp) {
  write_file_atomic(path, serialize_checkpoint(cp));
}

AgentCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("checkpoint: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_checkpoint(buf.str());
}

}  // namespace tgm
