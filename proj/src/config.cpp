#include "etcnet/config.hpp"

#include <fstream>
#include <set>

namespace etcnet {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& scope) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!known.count(it.key()))
      throw ConfigError("unknown config key: " + (scope.empty() ? it.key() : scope + "." + it.key()));
}

template <typename T>
void read(const json& obj, const char* key, T& into) {
  if (!obj.contains(key)) return;
  try {
    into = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config key has wrong type: ") + key);
  }
}

void require_positive(double v, const char* key) {
  if (!(v > 0.0)) throw ConfigError(std::string("config key must be positive: ") + key);
}

}  // namespace

ExperimentConfig config_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config root must be a JSON object");
  ExperimentConfig cfg;

  reject_unknown(doc,
                 {"task", "grid_size", "n_agents", "n_preys", "step_cap", "p_move", "training",
                  "budget", "mode", "baseline", "dropout_p", "ablation", "stage1_checkpoint",
                  "seeds", "out_dir"},
                 "");
  read(doc, "task", cfg.task);
  read(doc, "grid_size", cfg.grid_size);
  read(doc, "n_agents", cfg.n_agents);
  read(doc, "n_preys", cfg.n_preys);
  read(doc, "step_cap", cfg.step_cap);
  read(doc, "p_move", cfg.p_move);
  read(doc, "mode", cfg.mode);
  read(doc, "baseline", cfg.baseline);
  read(doc, "dropout_p", cfg.dropout_p);
  read(doc, "ablation", cfg.ablation);
  read(doc, "stage1_checkpoint", cfg.stage1_checkpoint);
  read(doc, "seeds", cfg.seeds);
  read(doc, "out_dir", cfg.out_dir);

  if (doc.contains("training")) {
    const json& t = doc.at("training");
    reject_unknown(t,
                   {"gamma", "entropy_weight", "lr_actor_encoder", "lr_critic", "lr_gate",
                    "lr_lagrange", "lr_penalty", "total_steps", "segment_len",
                    "sigma_refresh_period", "sigma_window", "eval_cadence", "eval_episodes",
                    "eta_lambda", "measure_steps", "checkpoint_cadence"},
                   "training");
    read(t, "gamma", cfg.training.gamma);
    read(t, "entropy_weight", cfg.training.entropy_weight);
    read(t, "lr_actor_encoder", cfg.training.lr_actor_encoder);
    read(t, "lr_critic", cfg.training.lr_critic);
    read(t, "lr_gate", cfg.training.lr_gate);
    read(t, "lr_lagrange", cfg.training.lr_lagrange);
    read(t, "lr_penalty", cfg.training.lr_penalty);
    read(t, "total_steps", cfg.training.total_steps);
    read(t, "segment_len", cfg.training.segment_len);
    read(t, "sigma_refresh_period", cfg.training.sigma_refresh_period);
    read(t, "sigma_window", cfg.training.sigma_window);
    read(t, "eval_cadence", cfg.training.eval_cadence);
    read(t, "eval_episodes", cfg.training.eval_episodes);
    read(t, "eta_lambda", cfg.training.eta_lambda);
    read(t, "measure_steps", cfg.training.measure_steps);
    read(t, "checkpoint_cadence", cfg.training.checkpoint_cadence);
  }

  if (doc.contains("budget")) {
    const json& b = doc.at("budget");
    reject_unknown(b, {"bandwidth", "signal_levels", "sample_freq"}, "budget");
    read(b, "bandwidth", cfg.budget.bandwidth);
    read(b, "signal_levels", cfg.budget.signal_levels);
    read(b, "sample_freq", cfg.budget.sample_freq);
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  // Whitespace-only file means "all defaults".
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) return ExperimentConfig{};
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError("config parse error in " + path.string() + ": " + e.what());
  }
  return config_from_json(doc);
}

ExperimentConfig resolve(ExperimentConfig cfg) {
  if (cfg.task != "nav" && cfg.task != "pp") throw ConfigError("config key has bad value: task");
  const bool nav = cfg.task == "nav";
  if (cfg.n_agents == 0) cfg.n_agents = nav ? 2 : 3;
  if (cfg.step_cap == 0) cfg.step_cap = nav ? 100 : 200;
  if (cfg.budget.bandwidth == 0.0) cfg.budget.bandwidth = nav ? 170.0 : 580.0;

  if (nav && cfg.n_agents != 2) throw ConfigError("config key has bad value: n_agents (nav has 2 agents)");
  if (!nav && (cfg.n_agents < 2 || cfg.n_agents > 4))
    throw ConfigError("config key has bad value: n_agents (pp supports 2 to 4)");
  if (cfg.grid_size < 5) throw ConfigError("config key has bad value: grid_size");
  if (cfg.n_preys < 1) throw ConfigError("config key has bad value: n_preys");
  if (cfg.step_cap < 1) throw ConfigError("config key has bad value: step_cap");
  if (cfg.p_move < 0.0 || cfg.p_move > 1.0) throw ConfigError("config key has bad value: p_move");

  require_positive(cfg.budget.bandwidth, "bandwidth");
  if (cfg.budget.signal_levels < 2) throw ConfigError("config key has bad value: signal_levels");
  require_positive(cfg.budget.sample_freq, "sample_freq");

  const TrainingConfig& t = cfg.training;
  if (t.gamma < 0.0 || t.gamma >= 1.0) throw ConfigError("config key has bad value: gamma");
  if (t.entropy_weight < 0.0) throw ConfigError("config key has bad value: entropy_weight");
  require_positive(t.lr_actor_encoder, "lr_actor_encoder");
  require_positive(t.lr_critic, "lr_critic");
  require_positive(t.lr_gate, "lr_gate");
  require_positive(t.lr_lagrange, "lr_lagrange");
  require_positive(t.lr_penalty, "lr_penalty");
  if (t.total_steps < 1) throw ConfigError("config key has bad value: total_steps");
  if (t.segment_len < 1) throw ConfigError("config key has bad value: segment_len");
  if (t.sigma_refresh_period < 1) throw ConfigError("config key has bad value: sigma_refresh_period");
  if (t.sigma_window < 2) throw ConfigError("config key has bad value: sigma_window");
  if (t.eval_cadence < 1) throw ConfigError("config key has bad value: eval_cadence");
  if (t.eval_episodes < 1) throw ConfigError("config key has bad value: eval_episodes");
  require_positive(t.eta_lambda, "eta_lambda");
  if (t.measure_steps < 2) throw ConfigError("config key has bad value: measure_steps");
  if (t.checkpoint_cadence < 0) throw ConfigError("config key has bad value: checkpoint_cadence");

  if (cfg.mode != "stage1" && cfg.mode != "stage2" && cfg.mode != "baseline")
    throw ConfigError("config key has bad value: mode");
  if (cfg.baseline != "full" && cfg.baseline != "none" && cfg.baseline != "dropout")
    throw ConfigError("config key has bad value: baseline");
  if (cfg.dropout_p < 0.0 || cfg.dropout_p > 1.0) throw ConfigError("config key has bad value: dropout_p");
  if (cfg.ablation != "none" && cfg.ablation != "zoh-pad" && cfg.ablation != "gate-no-memory")
    throw ConfigError("config key has bad value: ablation");
  if (cfg.mode == "stage2" && cfg.stage1_checkpoint.empty())
    throw ConfigError("config key missing: stage1_checkpoint (required for stage2)");
  if (cfg.seeds.empty()) throw ConfigError("config key has bad value: seeds (must be non-empty)");
  return cfg;
}

json to_json(const ExperimentConfig& cfg) {
  return json{
      {"task", cfg.task},
      {"grid_size", cfg.grid_size},
      {"n_agents", cfg.n_agents},
      {"n_preys", cfg.n_preys},
      {"step_cap", cfg.step_cap},
      {"p_move", cfg.p_move},
      {"training",
       {{"gamma", cfg.training.gamma},
        {"entropy_weight", cfg.training.entropy_weight},
        {"lr_actor_encoder", cfg.training.lr_actor_encoder},
        {"lr_critic", cfg.training.lr_critic},
        {"lr_gate", cfg.training.lr_gate},
        {"lr_lagrange", cfg.training.lr_lagrange},
        {"lr_penalty", cfg.training.lr_penalty},
        {"total_steps", cfg.training.total_steps},
        {"segment_len", cfg.training.segment_len},
        {"sigma_refresh_period", cfg.training.sigma_refresh_period},
        {"sigma_window", cfg.training.sigma_window},
        {"eval_cadence", cfg.training.eval_cadence},
        {"eval_episodes", cfg.training.eval_episodes},
        {"eta_lambda", cfg.training.eta_lambda},
        {"measure_steps", cfg.training.measure_steps},
        {"checkpoint_cadence", cfg.training.checkpoint_cadence}}},
      {"budget",
       {{"bandwidth", cfg.budget.bandwidth},
        {"signal_levels", cfg.budget.signal_levels},
        {"sample_freq", cfg.budget.sample_freq}}},
      {"mode", cfg.mode},
      {"baseline", cfg.baseline},
      {"dropout_p", cfg.dropout_p},
      {"ablation", cfg.ablation},
      {"stage1_checkpoint", cfg.stage1_checkpoint},
      {"seeds", cfg.seeds},
      {"out_dir", cfg.out_dir},
  };
}

}  // namespace etcnet
