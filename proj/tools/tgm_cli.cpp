// tgm: train, inspect and evaluate Temporal Gaussian Mixture agents on maze
// environments.
//
// Exit codes: 0 success, 1 invalid configuration or checkpoint unusable for
// eval, 2 maze parse failure, 3 runtime failure, 4 corrupt checkpoint
// (inspect).

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

#include "tgm/agent.hpp"
#include "tgm/checkpoint.hpp"
#include "tgm/env.hpp"
#include "tgm/util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitMaze = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitCheckpoint = 4;

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&t));
  return buf;
}

// Seed lists accept "7", "0,2,5" and "0..4" (inclusive range).
std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    const auto dots = part.find("..");
    if (dots != std::string::npos) {
      const std::uint64_t lo = std::stoull(part.substr(0, dots));
      const std::uint64_t hi = std::stoull(part.substr(dots + 2));
      if (hi < lo) throw std::invalid_argument("seed range is reversed: " + part);
      for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
    } else if (!part.empty()) {
      seeds.push_back(std::stoull(part));
    }
  }
  if (seeds.empty()) throw std::invalid_argument("no seeds given");
  return seeds;
}

json config_to_json(const tgm::AgentConfig& cfg) {
  return {{"checkpoint_period", cfg.checkpoint_period},
          {"theta_kl", cfg.theta_kl},
          {"theta_counts", cfg.theta_counts},
          {"epsilon_start", cfg.epsilon_start},
          {"epsilon_end", cfg.epsilon_end},
          {"epsilon_fraction", cfg.epsilon_fraction},
          {"alpha", cfg.alpha},
          {"gamma", cfg.gamma},
          {"online_q", cfg.online_q},
          {"bandwidth", cfg.mean_shift.bandwidth},
          {"vgm_sweeps", cfg.vgm_sweeps},
          {"novelty_mahalanobis", cfg.novelty.mahalanobis_threshold},
          {"novelty_min_points", cfg.novelty.min_points},
          {"sigma_obs", cfg.env.sigma_obs},
          {"reward_goal", cfg.env.reward_goal},
          {"reward_step", cfg.env.reward_step},
          {"max_steps", cfg.env.max_steps}};
}

void config_from_json(const json& j, tgm::AgentConfig& cfg) {
  if (j.contains("checkpoint_period")) cfg.checkpoint_period = j["checkpoint_period"];
  if (j.contains("theta_kl")) cfg.theta_kl = j["theta_kl"];
  if (j.contains("theta_counts")) cfg.theta_counts = j["theta_counts"];
  if (j.contains("epsilon_start")) cfg.epsilon_start = j["epsilon_start"];
  if (j.contains("epsilon_end")) cfg.epsilon_end = j["epsilon_end"];
  if (j.contains("epsilon_fraction")) cfg.epsilon_fraction = j["epsilon_fraction"];
  if (j.contains("alpha")) cfg.alpha = j["alpha"];
  if (j.contains("gamma")) cfg.gamma = j["gamma"];
  if (j.contains("online_q")) cfg.online_q = j["online_q"];
  if (j.contains("bandwidth")) cfg.mean_shift.bandwidth = j["bandwidth"];
  if (j.contains("vgm_sweeps")) cfg.vgm_sweeps = j["vgm_sweeps"];
  if (j.contains("novelty_mahalanobis")) cfg.novelty.mahalanobis_threshold = j["novelty_mahalanobis"];
  if (j.contains("novelty_min_points")) cfg.novelty.min_points = j["novelty_min_points"];
  if (j.contains("sigma_obs")) cfg.env.sigma_obs = j["sigma_obs"];
  if (j.contains("reward_goal")) cfg.env.reward_goal = j["reward_goal"];
  if (j.contains("reward_step")) cfg.env.reward_step = j["reward_step"];
  if (j.contains("max_steps")) cfg.env.max_steps = j["max_steps"];
}

json metrics_line(const tgm::EpisodeMetrics& m, bool vgm_ready) {
  json line;
  line["episode"] = m.episode;
  line["steps"] = m.steps;
  line["return"] = m.episode_return;
  line["K_active"] = m.k_active;
  if (vgm_ready) {
    line["vfe"] = m.vfe;
  } else {
    line["vfe"] = nullptr;
  }
  line["tv_distance"] = m.tv_distance;
  return line;
}

struct SeedSummary {
  std::uint64_t seed = 0;
  int episodes = 0;
  int window = 0;
  double mean_return = 0.0;
  double std_return = 0.0;
  double success_rate = 0.0;
};

SeedSummary summarize(std::uint64_t seed, const std::vector<tgm::EpisodeMetrics>& metrics) {
  SeedSummary s;
  s.seed = seed;
  s.episodes = static_cast<int>(metrics.size());
  s.window = std::min<int>(50, s.episodes);
  if (s.window == 0) return s;
  double sum = 0.0, sq = 0.0;
  int successes = 0;
  for (int i = s.episodes - s.window; i < s.episodes; ++i) {
    sum += metrics[i].episode_return;
    sq += metrics[i].episode_return * metrics[i].episode_return;
    successes += metrics[i].success ? 1 : 0;
  }
  s.mean_return = sum / s.window;
  s.std_return = std::sqrt(std::max(0.0, sq / s.window - s.mean_return * s.mean_return));
  s.success_rate = static_cast<double>(successes) / s.window;
  return s;
}

void write_seed_artifacts(const fs::path& dir, const tgm::TrainResult& result,
                          const json& effective_config) {
  fs::create_directories(dir);

  std::ostringstream metrics;
  bool vgm_seen = false;
  for (const auto& m : result.metrics) {
    // vfe is null until the mixture exists; K_active > 0 marks readiness.
    vgm_seen = vgm_seen || m.k_active > 0;
    metrics << metrics_line(m, vgm_seen).dump() << "\n";
  }
  tgm::write_file_atomic((dir / "metrics.jsonl").string(), metrics.str());

  std::ostringstream events;
  const std::string ts = iso_timestamp();
  for (const auto& e : result.events) {
    json line;
    line["ts"] = ts;
    line["step"] = e.step;
    line["event"] = e.kind;
    line["component"] = e.component;
    if (!e.mean.empty()) line["mean"] = e.mean;
    events << line.dump() << "\n";
  }
  tgm::write_file_atomic((dir / "events.jsonl").string(), events.str());

  tgm::save_checkpoint((dir / "checkpoint.json").string(), result.checkpoint);
  tgm::write_file_atomic((dir / "effective_config.json").string(),
                         effective_config.dump(2) + "\n");
}

int cmd_train(const std::string& maze_path, const std::string& out_dir,
              const std::string& seeds_text, int episodes, tgm::AgentConfig cfg) {
  tgm::MazeSpec maze;
  try {
    maze = tgm::load_maze(maze_path);
  } catch (const tgm::MazeParseError& e) {
    std::cerr << "maze error: " << e.what() << "\n";
    return kExitMaze;
  }

  std::vector<std::uint64_t> seeds;
  try {
    seeds = parse_seeds(seeds_text);
    cfg.validate();
    fs::create_directories(out_dir);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  json effective = config_to_json(cfg);
  effective["maze"] = maze_path;
  effective["episodes"] = episodes;
  const std::string config_hash = tgm::digest(effective.dump());

  std::vector<SeedSummary> summaries(seeds.size());
  std::vector<std::string> errors(seeds.size());
  std::mutex io_mutex;

  auto run_seed = [&](std::size_t idx) {
    try {
      tgm::AgentConfig seed_cfg = cfg;
      seed_cfg.seed = seeds[idx];
      tgm::TrainResult result = tgm::train_agent(maze, seed_cfg, episodes);
      result.checkpoint.config_hash = config_hash;
      json seed_effective = effective;
      seed_effective["seed"] = seeds[idx];
      write_seed_artifacts(fs::path(out_dir) / ("seed_" + std::to_string(seeds[idx])), result,
                           seed_effective);
      summaries[idx] = summarize(seeds[idx], result.metrics);
      std::lock_guard<std::mutex> lock(io_mutex);
      tgm::log_message(tgm::LogLevel::info,
                       "seed " + std::to_string(seeds[idx]) + " done, final-window return "
                           + std::to_string(summaries[idx].mean_return));
    } catch (const std::exception& e) {
      std::lock_guard<std::mutex> lock(io_mutex);
      errors[idx] = e.what();
    }
  };

  // Seeds fan out to parallel workers, each writing into its own directory.
  const unsigned workers =
      std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(),
                                      static_cast<unsigned>(seeds.size())));
  std::vector<std::thread> pool;
  std::size_t next = 0;
  std::mutex next_mutex;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        std::size_t idx;
        {
          std::lock_guard<std::mutex> lock(next_mutex);
          if (next >= seeds.size()) return;
          idx = next++;
        }
        run_seed(idx);
      }
    });
  }
  for (auto& t : pool) t.join();

  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i].empty()) {
      std::cerr << "seed " << seeds[i] << " failed: " << errors[i] << "\n";
      return kExitRuntime;
    }
  }

  std::ostringstream csv;
  csv << "seed,episodes,final_window,mean_return,std_return,success_rate\n";
  for (const auto& s : summaries) {
    csv << s.seed << "," << s.episodes << "," << s.window << "," << s.mean_return << ","
        << s.std_return << "," << s.success_rate << "\n";
  }
  tgm::write_file_atomic((fs::path(out_dir) / "summary.csv").string(), csv.str());
  std::cout << csv.str();
  return kExitOk;
}

json inspect_document(const tgm::AgentCheckpoint& cp) {
  json doc;
  doc["checkpoint"] = json::parse(tgm::serialize_checkpoint(cp));

  json components = json::array();
  for (int c = 0; c < cp.vgm.component_count(); ++c) {
    const auto& p = cp.vgm.posterior.components[c];
    json row;
    row["component"] = c;
    row["mean"] = std::vector<double>(p.m.data(), p.m.data() + p.m.size());
    row["beta"] = p.beta;
    row["v"] = p.v;
    row["d"] = cp.vgm.posterior.d[c];
    const bool has_entry = c < static_cast<int>(cp.ledger.entries().size());
    row["status"] = has_entry && cp.ledger.entries()[c].fixed ? "fixed" : "flexible";
    row["persistence_count"] = has_entry ? cp.ledger.entries()[c].persistence_count : 0;
    components.push_back(std::move(row));
  }
  doc["components"] = std::move(components);

  json transitions = json::array();
  for (int a = 0; a < cp.transition.action_count(); ++a) {
    const Eigen::MatrixXd m = cp.transition.expected_transition(a);
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      rows.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
    }
    transitions.push_back({{"action", tgm::action_name(static_cast<tgm::Action>(a))},
                           {"matrix", std::move(rows)}});
  }
  doc["expected_transitions"] = std::move(transitions);

  json qrows = json::array();
  for (int a = 0; a < cp.qtable.action_count(); ++a) {
    qrows.push_back(std::vector<double>(cp.qtable.values.row(a).begin(),
                                        cp.qtable.values.row(a).end()));
  }
  doc["qtable"] = {{"alpha", cp.qtable.learning_rate},
                   {"gamma", cp.qtable.discount},
                   {"values", std::move(qrows)}};
  return doc;
}

void print_inspect_table(const tgm::AgentCheckpoint& cp) {
  std::cout << "components (posterior):\n";
  std::cout << "  k      mean                beta       v          status\n";
  for (int c = 0; c < cp.vgm.component_count(); ++c) {
    const auto& p = cp.vgm.posterior.components[c];
    std::ostringstream mean;
    mean << "(";
    for (Eigen::Index i = 0; i < p.m.size(); ++i) {
      mean << (i ? ", " : "") << p.m[i];
    }
    mean << ")";
    const bool fixed = c < static_cast<int>(cp.ledger.entries().size())
                     && cp.ledger.entries()[c].fixed;
    std::printf("  %-6d %-19s %-10.4g %-10.4g %s\n", c, mean.str().c_str(), p.beta, p.v,
                fixed ? "fixed" : "flexible");
  }
  for (int a = 0; a < cp.transition.action_count(); ++a) {
    std::cout << "expected transition, action " << tgm::action_name(static_cast<tgm::Action>(a))
              << ":\n";
    std::cout << cp.transition.expected_transition(a) << "\n";
  }
  std::cout << "q-table (actions x states):\n" << cp.qtable.values << "\n";
}

void print_inspect_csv(const tgm::AgentCheckpoint& cp) {
  std::cout << "table,component,mean,beta,v,status\n";
  for (int c = 0; c < cp.vgm.component_count(); ++c) {
    const auto& p = cp.vgm.posterior.components[c];
    std::ostringstream mean;
    for (Eigen::Index i = 0; i < p.m.size(); ++i) mean << (i ? ";" : "") << p.m[i];
    const bool fixed = c < static_cast<int>(cp.ledger.entries().size())
                     && cp.ledger.entries()[c].fixed;
    std::cout << "component," << c << "," << mean.str() << "," << p.beta << "," << p.v << ","
              << (fixed ? "fixed" : "flexible") << "\n";
  }
  for (int a = 0; a < cp.transition.action_count(); ++a) {
    const Eigen::MatrixXd m = cp.transition.expected_transition(a);
    for (Eigen::Index to = 0; to < m.rows(); ++to) {
      std::cout << "transition," << tgm::action_name(static_cast<tgm::Action>(a)) << "," << to;
      for (Eigen::Index from = 0; from < m.cols(); ++from) std::cout << "," << m(to, from);
      std::cout << "\n";
    }
  }
  for (int a = 0; a < cp.qtable.action_count(); ++a) {
    std::cout << "qtable," << tgm::action_name(static_cast<tgm::Action>(a));
    for (int s = 0; s < cp.qtable.state_count(); ++s) std::cout << "," << cp.qtable.values(a, s);
    std::cout << "\n";
  }
}

int cmd_inspect(const std::string& checkpoint_path, const std::string& format) {
  tgm::AgentCheckpoint cp;
  try {
    cp = tgm::load_checkpoint(checkpoint_path);
  } catch (const tgm::CheckpointError& e) {
    std::cerr << "checkpoint error: " << e.what() << "\n";
    return kExitCheckpoint;
  }
  if (format == "json") {
    std::cout << inspect_document(cp).dump(2) << "\n";
  } else if (format == "csv") {
    print_inspect_csv(cp);
  } else {
    print_inspect_table(cp);
  }
  return kExitOk;
}

int cmd_eval(const std::string& checkpoint_path, const std::string& maze_path, int episodes,
             std::uint64_t seed, bool compare_truth, double sigma_obs, int max_steps) {
  tgm::AgentCheckpoint cp;
  try {
    cp = tgm::load_checkpoint(checkpoint_path);
  } catch (const tgm::CheckpointError& e) {
    std::cerr << "checkpoint error: " << e.what() << "\n";
    return kExitConfig;
  }
  tgm::MazeSpec maze;
  try {
    maze = tgm::load_maze(maze_path);
  } catch (const tgm::MazeParseError& e) {
    std::cerr << "maze error: " << e.what() << "\n";
    return kExitMaze;
  }
  try {
    tgm::EnvConfig env_cfg;
    env_cfg.sigma_obs = sigma_obs;
    env_cfg.max_steps = max_steps;
    const tgm::EvalResult result = tgm::evaluate_checkpoint(cp, maze, env_cfg, episodes, seed);
    json out;
    out["episodes"] = result.episodes;
    out["successes"] = result.successes;
    out["success_rate"] = result.success_rate;
    out["mean_steps_to_goal"] = result.mean_steps_to_goal;
    if (compare_truth) {
      const tgm::TransitionAccuracy acc = tgm::transition_accuracy(cp.vgm, cp.transition, maze);
      out["transition_mean_tv"] = acc.mean_tv;
      out["transition_fraction_within_0.15"] = acc.fraction_within(0.15);
      out["component_count"] = cp.vgm.component_count();
      out["true_state_count"] = static_cast<int>(maze.floor_cells().size());
    }
    std::cout << out.dump(2) << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "eval failed: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Temporal Gaussian Mixture maze agent"};
  app.require_subcommand(1);

  // train
  auto* train = app.add_subcommand("train", "train agents, one run per seed");
  std::string maze_path, out_dir = "out", seeds_text = "0", config_path;
  int episodes = 500;
  tgm::AgentConfig cfg;
  train->add_option("--maze", maze_path, "maze file")->required();
  train->add_option("--episodes", episodes, "episodes per seed")->check(CLI::NonNegativeNumber);
  train->add_option("--seeds", seeds_text, "seed list: 3 | 0,2,5 | 0..4");
  train->add_option("--out", out_dir, "output directory");
  train->add_option("--config", config_path, "JSON config file (flags override it)");
  auto* opt_period = train->add_option("--checkpoint-period", cfg.checkpoint_period);
  auto* opt_theta_kl = train->add_option("--theta-kl", cfg.theta_kl);
  auto* opt_theta_counts = train->add_option("--theta-counts", cfg.theta_counts);
  auto* opt_eps_start = train->add_option("--epsilon-start", cfg.epsilon_start);
  auto* opt_eps_end = train->add_option("--epsilon-end", cfg.epsilon_end);
  auto* opt_eps_frac = train->add_option("--epsilon-fraction", cfg.epsilon_fraction);
  auto* opt_alpha = train->add_option("--alpha", cfg.alpha);
  auto* opt_gamma = train->add_option("--gamma", cfg.gamma);
  auto* opt_online_q = train->add_flag("--online-q", cfg.online_q,
                                       "per-step Q updates instead of batched replay");
  auto* opt_bandwidth = train->add_option("--bandwidth", cfg.mean_shift.bandwidth);
  auto* opt_sweeps = train->add_option("--vgm-sweeps", cfg.vgm_sweeps);
  auto* opt_sigma = train->add_option("--sigma-obs", cfg.env.sigma_obs);
  auto* opt_reward_goal = train->add_option("--reward-goal", cfg.env.reward_goal);
  auto* opt_reward_step = train->add_option("--reward-step", cfg.env.reward_step);
  auto* opt_max_steps = train->add_option("--max-steps", cfg.env.max_steps);

  // inspect
  auto* inspect = app.add_subcommand("inspect", "print a checkpoint's contents");
  std::string checkpoint_path, format = "table";
  inspect->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();
  inspect->add_option("--format", format, "table | json | csv")
      ->check(CLI::IsMember({"table", "json", "csv"}));

  // eval
  auto* eval = app.add_subcommand("eval", "greedy rollouts of a trained checkpoint");
  std::string eval_checkpoint, eval_maze;
  int eval_episodes = 100;
  std::uint64_t eval_seed = 0;
  bool compare_truth = false;
  double eval_sigma = 0.1;
  int eval_max_steps = 100;
  eval->add_option("--checkpoint", eval_checkpoint, "checkpoint file")->required();
  eval->add_option("--maze", eval_maze, "maze file")->required();
  eval->add_option("--episodes", eval_episodes, "eval episodes");
  eval->add_option("--seed", eval_seed, "environment seed");
  eval->add_option("--sigma-obs", eval_sigma, "observation noise");
  eval->add_option("--max-steps", eval_max_steps, "episode cutoff");
  eval->add_flag("--compare-truth", compare_truth,
                 "report transition accuracy against the maze's true dynamics");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*train) {
      if (!config_path.empty()) {
        // Precedence: defaults < config file < explicit flags.
        tgm::AgentConfig from_file;
        std::ifstream in(config_path);
        if (!in) {
          std::cerr << "config error: cannot open " << config_path << "\n";
          return kExitConfig;
        }
        json j;
        try {
          in >> j;
          config_from_json(j, from_file);
        } catch (const json::exception& e) {
          std::cerr << "config error: " << e.what() << "\n";
          return kExitConfig;
        }
        if (!*opt_period) cfg.checkpoint_period = from_file.checkpoint_period;
        if (!*opt_theta_kl) cfg.theta_kl = from_file.theta_kl;
        if (!*opt_theta_counts) cfg.theta_counts = from_file.theta_counts;
        if (!*opt_eps_start) cfg.epsilon_start = from_file.epsilon_start;
        if (!*opt_eps_end) cfg.epsilon_end = from_file.epsilon_end;
        if (!*opt_eps_frac) cfg.epsilon_fraction = from_file.epsilon_fraction;
        if (!*opt_alpha) cfg.alpha = from_file.alpha;
        if (!*opt_gamma) cfg.gamma = from_file.gamma;
        if (!*opt_online_q) cfg.online_q = from_file.online_q;
        if (!*opt_bandwidth) cfg.mean_shift.bandwidth = from_file.mean_shift.bandwidth;
        if (!*opt_sweeps) cfg.vgm_sweeps = from_file.vgm_sweeps;
        if (!*opt_sigma) cfg.env.sigma_obs = from_file.env.sigma_obs;
        if (!*opt_reward_goal) cfg.env.reward_goal = from_file.env.reward_goal;
        if (!*opt_reward_step) cfg.env.reward_step = from_file.env.reward_step;
        if (!*opt_max_steps) cfg.env.max_steps = from_file.env.max_steps;
      }
      return cmd_train(maze_path, out_dir, seeds_text, episodes, cfg);
    }
    if (*inspect) return cmd_inspect(checkpoint_path, format);
    if (*eval) {
      return cmd_eval(eval_checkpoint, eval_maze, eval_episodes, eval_seed, compare_truth,
                      eval_sigma, eval_max_steps);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitConfig;
}
