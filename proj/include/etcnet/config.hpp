#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace etcnet {

/// Bad configuration input. The CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TrainingConfig {
  double gamma = 0.95;
  double entropy_weight = 0.01;
  double lr_actor_encoder = 2e-4;
  double lr_critic = 4e-4;
  double lr_gate = 2e-4;
  double lr_lagrange = 4e-4;
  double lr_penalty = 4e-4;
  long total_steps = 600000;
  int segment_len = 32;
  long sigma_refresh_period = 5000;
  long sigma_window = 10000;
  long eval_cadence = 5000;
  int eval_episodes = 50;
  double eta_lambda = 1e-3;
  long measure_steps = 5000;   // full-communication variance measurement before gating training
  long checkpoint_cadence = 0; // 0 = checkpoint at the end only
};

struct BudgetInputs {
  double bandwidth = 0.0;  // 0 = task default (170 nav, 580 pp)
  int signal_levels = 2;
  double sample_freq = 45.0;
};

struct ExperimentConfig {
  std::string task = "nav";
  int grid_size = 10;
  int n_agents = 0;   // 0 = task default (2 nav, 3 pp)
  int n_preys = 1;
  int step_cap = 0;   // 0 = task default (100 nav, 200 pp)
  double p_move = 0.1;
  TrainingConfig training;
  BudgetInputs budget;
  std::string mode = "stage1";      // stage1 | stage2 | baseline
  std::string baseline = "dropout"; // full | none | dropout (mode == baseline)
  double dropout_p = 0.5;
  std::string ablation = "none";    // none | zoh-pad | gate-no-memory
  std::string stage1_checkpoint;    // required for stage2
  std::vector<long> seeds = {0};
  std::string out_dir = "runs/out";
};

/// Parse + validate. Unknown keys are rejected; messages name the key.
ExperimentConfig config_from_json(const nlohmann::json& doc);

/// Loads a JSON config file. An empty file yields all defaults.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Fills task-dependent defaults (agent count, step cap, bandwidth) and
/// re-validates. The result round-trips exactly through to_json.
ExperimentConfig resolve(ExperimentConfig cfg);

nlohmann::json to_json(const ExperimentConfig& cfg);

}  // namespace etcnet
