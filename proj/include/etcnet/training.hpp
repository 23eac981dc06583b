#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>

#include "etcnet/agents.hpp"
#include "etcnet/bandwidth.hpp"
#include "etcnet/comms.hpp"
#include "etcnet/config.hpp"
#include "etcnet/env_core.hpp"
#include "etcnet/trajectory.hpp"

namespace etcnet {

/// Training stopped making progress (evaluation pinned at the step cap).
/// The CLI maps this to exit code 3.
struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Update arithmetic, exposed for tests.

/// delta = r + gamma * V(s') - V(s); the bootstrap term is dropped on
/// terminal transitions. The target side is treated as a constant.
double td_error(double reward, double v_next, double v_now, bool done, double gamma);

/// r' = r - lambda * g.
double shaped_reward(double reward, double lambda, int gate);

/// Projected dual ascent: lambda' = max(0, lambda + eta * (v_penalty - c_sup)).
double lambda_update(double lambda, double eta, double v_penalty, double c_sup);

struct PolicyLoss {
  double loss = 0.0;
  std::vector<double> upstream;  // d loss / d dist
};

/// loss = -ln dist[chosen] * delta - alpha * H(dist), with delta constant.
PolicyLoss policy_loss(std::span<const double> dist, int chosen, double delta, double alpha);

// ---------------------------------------------------------------------------
// Rollouts.

/// One environment transition with everything both training stages need.
struct StepRecord {
  std::vector<std::vector<double>> obs;         // per agent, o_t
  std::vector<std::vector<double>> msg;         // per agent, m_t
  std::vector<std::vector<double>> gate_input;  // per agent, gating-net input
  std::vector<int> gates;
  std::vector<std::uint8_t> gate_forced;        // first-step bootstrap triggers
  std::vector<std::vector<double>> received;    // per agent, actor message input
  std::vector<int> actions;
  std::vector<double> rewards;
  std::vector<std::vector<double>> upsilon;       // per agent, rotated concat of all obs
  std::vector<std::vector<double>> upsilon_next;
  double lambda = 0.0;
  bool done = false;
  long version = 0;  // parameter version the record was generated under
};

/// Drives one environment with one shared agent bundle, handling episode
/// resets, the forced first-step trigger and the ZOH bookkeeping. Used by
/// both training stages and by evaluation.
class RolloutWorker {
 public:
  struct Counters {
    long env_steps = 0;
    long episodes = 0;
    long gate_opens = 0;  // summed over agents, forced ones included
    std::vector<long> trigger_counts;     // per agent, summed over episodes
    std::vector<int> episode_lengths;
  };

  RolloutWorker(MultiAgentEnv& env, const TaskSpec& task, const AgentBundle& bundle, GateMode mode,
                double dropout_p, CommsOptions comms_options, Rng env_rng, Rng policy_rng,
                bool greedy = false);

  StepRecord step(long param_version = 0);

  void set_dump(TrajectoryWriter* dump) { dump_ = dump; }
  const Counters& counters() const { return counters_; }
  const CommsState& comms() const { return comms_; }

 private:
  void start_episode();

  MultiAgentEnv& env_;
  const TaskSpec& task_;
  const AgentBundle& bundle_;
  GateMode mode_;
  double dropout_p_;
  bool greedy_;
  Rng env_rng_;
  Rng policy_rng_;
  CommsState comms_;
  TrajectoryWriter* dump_ = nullptr;
  Counters counters_;
  std::vector<std::vector<double>> obs_;
  bool need_reset_ = true;
  int episode_ = 0;
  int ep_t_ = 0;
  long global_t_ = 0;
};

// ---------------------------------------------------------------------------
// Segment updates. One call consumes one on-policy rollout segment,
// averages the per-(record, agent) gradients and applies one Adam step per
// network. Both check the records' parameter version and return/advance it.

/// Critic TD plus the joint actor/encoder policy-gradient step (losses on
/// the task reward). Returns the new parameter version.
long stage1_update(const std::vector<StepRecord>& segment, AgentBundle& bundle, ValueBundle& values,
                   const TaskSpec& task, const TrainingConfig& tc, long version);

struct Stage2UpdateOut {
  double v_penalty = 0.0;      // segment-averaged penalty value after the update
  double lambda_before = 0.0;
  double lambda_after = 0.0;
};

/// Lagrangian-value TD on the shaped reward, the gating policy gradient,
/// the penalty-value TD on the gate bits, and the projected dual update of
/// lambda. Encoder, actor and critic are never touched.
Stage2UpdateOut stage2_update(const std::vector<StepRecord>& segment, AgentBundle& bundle,
                              ValueBundle& values, double& lambda, double c_sup, const TaskSpec& task,
                              const TrainingConfig& tc, long version);

// ---------------------------------------------------------------------------
// Evaluation.

struct EvalReport {
  int episodes = 0;
  double mean_steps = 0.0;
  double std_steps = 0.0;  // population std, so one episode gives 0
  double send_prob = 0.0;  // gate opens per agent-step
  std::vector<long> trigger_counts;
  double symbol_rate = 0.0;
  bool within_budget = false;
};

nlohmann::json to_json(const EvalReport& report);

// ---------------------------------------------------------------------------
// Training runs.

struct RunResult {
  std::filesystem::path out_dir;
  std::filesystem::path checkpoint_dir;
  long steps_run = 0;
  double final_eval_mean_steps = 0.0;
  double final_send_prob = 0.0;
  double final_sigma2 = 0.0;
  double final_p_sup = 0.0;
  double final_c_sup = 0.0;
  double final_lambda = 0.0;
};

/// Stage 1: actor-critic with full communication; trains encoder, actor
/// and critic.
RunResult run_stage1(const ExperimentConfig& cfg, long seed, const std::filesystem::path& out_dir);

/// Baseline: the stage-1 trainer under a fixed gating regime
/// (full / none / dropout) chosen by cfg.baseline.
RunResult run_baseline(const ExperimentConfig& cfg, long seed, const std::filesystem::path& out_dir);

/// Stage 2: freezes the stage-1 networks and trains the gating policy
/// under the bandwidth-derived penalty threshold by primal-dual updates.
RunResult run_stage2(const ExperimentConfig& cfg, long seed, const std::filesystem::path& out_dir);

/// Dispatch on cfg.mode.
RunResult run_experiment(const ExperimentConfig& cfg, long seed, const std::filesystem::path& out_dir);

// ---------------------------------------------------------------------------
// Checkpoints and evaluation of finished runs.

struct Checkpoint {
  ExperimentConfig config;  // resolved config of the producing run
  std::string mode;         // stage1 | baseline-full | baseline-none | baseline-dropout | stage2
  long seed = 0;
  long trained_steps = 0;
  double sigma2 = 1.0;
  double lambda = 0.0;
  std::optional<BandwidthBudget> budget;  // stage 2 only
  AgentBundle agents;
  ValueBundle values;
};

void save_checkpoint(const std::filesystem::path& dir, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& dir);

std::unique_ptr<MultiAgentEnv> make_env(const ExperimentConfig& cfg);
TaskSpec task_from_config(const ExperimentConfig& cfg);

/// Runs E no-learning episodes with the checkpoint's gating regime.
/// Sampling is stochastic unless greedy is set. Optionally writes the
/// full trajectory dump.
EvalReport evaluate_checkpoint(const Checkpoint& ckpt, int episodes, long seed, bool greedy = false,
                               const std::filesystem::path* dump_path = nullptr);

}  // namespace etcnet
