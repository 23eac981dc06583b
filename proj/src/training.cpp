#include "etcnet/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "etcnet/checkpoint.hpp"
#include "etcnet/csv.hpp"
#include "etcnet/env_nav.hpp"
#include "etcnet/env_pp.hpp"

namespace etcnet {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Update arithmetic.

double td_error(double reward, double v_next, double v_now, bool done, double gamma) {
  return reward + (done ? 0.0 : gamma * v_next) - v_now;
}

double shaped_reward(double reward, double lambda, int gate) { return reward - lambda * gate; }

double lambda_update(double lambda, double eta, double v_penalty, double c_sup) {
  return std::max(0.0, lambda + eta * (v_penalty - c_sup));
}

PolicyLoss policy_loss(std::span<const double> dist, int chosen, double delta, double alpha) {
  if (chosen < 0 || chosen >= static_cast<int>(dist.size()))
    throw std::invalid_argument("chosen index out of range");
  const double p = dist[chosen];
  if (!(p > 0.0)) throw std::runtime_error("chosen action has zero probability");

  PolicyLoss out;
  out.loss = -std::log(p) * delta - alpha * categorical_entropy(dist);
  out.upstream.resize(dist.size());
  // d/dp_k of -ln(p_a) delta: -delta/p_a on the chosen coordinate;
  // d/dp_k of -alpha H = alpha (ln p_k + 1).
  for (std::size_t k = 0; k < dist.size(); ++k)
    out.upstream[k] = dist[k] > 0.0 ? alpha * (std::log(dist[k]) + 1.0) : 0.0;
  out.upstream[chosen] += -delta / p;
  return out;
}

// ---------------------------------------------------------------------------
// Rollouts.

namespace {

std::vector<double> rotated_concat(const std::vector<std::vector<double>>& obs, int agent) {
  const int n = static_cast<int>(obs.size());
  std::vector<double> out;
  out.reserve(obs.size() * obs[0].size());
  for (int k = 0; k < n; ++k) {
    const auto& o = obs[(agent + k) % n];
    out.insert(out.end(), o.begin(), o.end());
  }
  return out;
}

}  // namespace

RolloutWorker::RolloutWorker(MultiAgentEnv& env, const TaskSpec& task, const AgentBundle& bundle,
                             GateMode mode, double dropout_p, CommsOptions comms_options, Rng env_rng,
                             Rng policy_rng, bool greedy)
    : env_(env),
      task_(task),
      bundle_(bundle),
      mode_(mode),
      dropout_p_(dropout_p),
      greedy_(greedy),
      env_rng_(env_rng),
      policy_rng_(policy_rng),
      comms_(task.n_agents, task.msg_len, comms_options) {
  counters_.trigger_counts.assign(task.n_agents, 0);
}

void RolloutWorker::start_episode() {
  obs_ = env_.reset(env_rng_);
  comms_.begin_episode();
  ep_t_ = 0;
  need_reset_ = false;
}

StepRecord RolloutWorker::step(long param_version) {
  if (need_reset_) start_episode();
  const int n = task_.n_agents;

  StepRecord rec;
  rec.version = param_version;
  rec.obs = obs_;
  rec.msg.resize(n);
  rec.gate_input.resize(n);
  rec.gates.resize(n);
  rec.gate_forced.resize(n);
  rec.received.resize(n);
  rec.actions.resize(n);

  for (int i = 0; i < n; ++i) rec.msg[i] = bundle_.encoder.forward(obs_[i]);

  // Every episode opens with a forced broadcast so the ZOH memories and the
  // receiver boards are valid from the start.
  const bool first = ep_t_ == 0;
  for (int i = 0; i < n; ++i) {
    if (first) {
      rec.gates[i] = 1;
      rec.gate_forced[i] = 1;
    } else {
      rec.gate_input[i] = comms_.gate_input(i, rec.msg[i]);
      const GateResult g = decide_gate(bundle_.gate, mode_, rec.gate_input[i], policy_rng_, dropout_p_, greedy_);
      rec.gates[i] = g.gate;
      rec.gate_forced[i] = 0;
    }
  }

  comms_.commit(ep_t_, rec.gates, rec.msg);
  if (first)
    for (int i = 0; i < n; ++i) rec.gate_input[i] = comms_.gate_input(i, rec.msg[i]);

  for (int i = 0; i < n; ++i) rec.received[i] = comms_.received_concat(i);
  for (int i = 0; i < n; ++i)
    rec.actions[i] = act(bundle_.actor, obs_[i], rec.received[i], policy_rng_, greedy_).action;

  const EnvStep out = env_.step(rec.actions, env_rng_);
  rec.rewards = out.rewards;
  rec.done = out.done;
  rec.upsilon.resize(n);
  rec.upsilon_next.resize(n);
  for (int i = 0; i < n; ++i) {
    rec.upsilon[i] = rotated_concat(rec.obs, i);
    rec.upsilon_next[i] = rotated_concat(out.obs, i);
  }

  counters_.env_steps += 1;
  for (int g : rec.gates) counters_.gate_opens += g;

  if (dump_ != nullptr) {
    DumpRow row;
    row.t = global_t_;
    row.episode = episode_;
    row.ep_t = ep_t_;
    row.state = env_.state_json();
    row.obs = rec.obs;
    row.messages = rec.msg;
    row.gates = rec.gates;
    row.actions = rec.actions;
    row.rewards = rec.rewards;
    row.done = rec.done;
    row.info = out.info;
    dump_->write(row);
  }

  global_t_ += 1;
  ep_t_ += 1;
  obs_ = out.obs;
  if (out.done) {
    counters_.episodes += 1;
    counters_.episode_lengths.push_back(ep_t_);
    for (int i = 0; i < n; ++i) counters_.trigger_counts[i] += static_cast<long>(comms_.triggers(i).size());
    episode_ += 1;
    need_reset_ = true;
  }
  return rec;
}

// ---------------------------------------------------------------------------
// Evaluation.

namespace {

// The dropout and no-communication baselines zero-fill missing messages:
// holding the last received message is this architecture's own device, so
// the controls do without it. The zoh-pad ablation applies the same
// padding to the event-triggered runs.
CommsOptions comms_options_for(const std::string& ablation, GateMode mode) {
  CommsOptions opts;
  opts.zero_pad_receivers =
      ablation == "zoh-pad" || mode == GateMode::kDropout || mode == GateMode::kNone;
  opts.gate_sees_memory = ablation != "gate-no-memory";
  return opts;
}

EvalReport run_eval(const ExperimentConfig& cfg, const TaskSpec& task, const AgentBundle& bundle,
                    GateMode mode, double dropout_p, CommsOptions copts, int episodes, Rng rng,
                    bool greedy, TrajectoryWriter* dump, const BandwidthBudget& budget) {
  auto env = make_env(cfg);
  RolloutWorker worker(*env, task, bundle, mode, dropout_p, copts, rng.fork(1), rng.fork(2), greedy);
  worker.set_dump(dump);
  while (worker.counters().episodes < episodes) worker.step();

  const auto& c = worker.counters();
  EvalReport report;
  report.episodes = episodes;
  double mean = 0.0;
  for (int len : c.episode_lengths) mean += len;
  mean /= static_cast<double>(c.episode_lengths.size());
  double var = 0.0;
  for (int len : c.episode_lengths) var += (len - mean) * (len - mean);
  var /= static_cast<double>(c.episode_lengths.size());
  report.mean_steps = mean;
  report.std_steps = std::sqrt(var);
  report.trigger_counts = c.trigger_counts;

  const ChannelStats stats = channel_stats(c.gate_opens, c.env_steps, budget);
  report.send_prob = stats.p_hat;
  report.symbol_rate = stats.symbol_rate;
  report.within_budget = stats.within_budget;
  return report;
}

}  // namespace

json to_json(const EvalReport& report) {
  return json{{"episodes", report.episodes},
              {"mean_steps", report.mean_steps},
              {"std_steps", report.std_steps},
              {"send_prob", report.send_prob},
              {"trigger_counts", report.trigger_counts},
              {"symbol_rate", report.symbol_rate},
              {"within_budget", report.within_budget}};
}

// ---------------------------------------------------------------------------
// Environments and task specs.

std::unique_ptr<MultiAgentEnv> make_env(const ExperimentConfig& cfg) {
  if (cfg.task == "nav") {
    NavConfig nav;
    nav.grid_size = cfg.grid_size;
    nav.step_cap = cfg.step_cap;
    nav.p_move = cfg.p_move;
    return std::make_unique<NavEnv>(nav);
  }
  PpConfig pp;
  pp.grid_size = cfg.grid_size;
  pp.n_predators = cfg.n_agents;
  pp.n_preys = cfg.n_preys;
  pp.step_cap = cfg.step_cap;
  return std::make_unique<PpEnv>(pp);
}

TaskSpec task_from_config(const ExperimentConfig& cfg) { return task_by_name(cfg.task, cfg.n_agents); }

// ---------------------------------------------------------------------------
// Updates.

namespace {

void check_on_policy(const std::vector<StepRecord>& segment, long version) {
  for (const StepRecord& rec : segment)
    if (rec.version != version) throw std::logic_error("rollout record is stale (off-policy update)");
}

// Critic TD errors with the current network, one per (record, agent).
std::vector<std::vector<double>> value_td_errors(const Mlp& net, const std::vector<StepRecord>& segment,
                                                 double gamma, bool shaped) {
  std::vector<std::vector<double>> deltas(segment.size());
  for (std::size_t r = 0; r < segment.size(); ++r) {
    const StepRecord& rec = segment[r];
    const int n = static_cast<int>(rec.obs.size());
    deltas[r].resize(n);
    for (int i = 0; i < n; ++i) {
      const double reward = shaped ? shaped_reward(rec.rewards[i], rec.lambda, rec.gates[i]) : rec.rewards[i];
      const double v_now = value(net, rec.upsilon[i]);
      const double v_next = value(net, rec.upsilon_next[i]);
      deltas[r][i] = td_error(reward, v_next, v_now, rec.done, gamma);
    }
  }
  return deltas;
}

// Mean gradient of the squared TD loss over the segment; the bootstrap
// target is constant, so d(delta^2)/dV(upsilon) = -2 delta.
void update_value_net(Mlp& net, const std::vector<StepRecord>& segment,
                      const std::vector<std::vector<double>>& deltas, double lr) {
  MlpGradient grad = net.zero_gradient();
  long count = 0;
  for (std::size_t r = 0; r < segment.size(); ++r) {
    for (std::size_t i = 0; i < deltas[r].size(); ++i) {
      const double upstream = -2.0 * deltas[r][i];
      grad.accumulate(net.backward(segment[r].upsilon[i], std::vector<double>{upstream}));
      count += 1;
    }
  }
  grad.scale(1.0 / static_cast<double>(count));
  net.adam_step(grad, lr);
}

}  // namespace

long stage1_update(const std::vector<StepRecord>& segment, AgentBundle& bundle, ValueBundle& values,
                   const TaskSpec& task, const TrainingConfig& tc, long version) {
  check_on_policy(segment, version);
  const auto deltas = value_td_errors(values.critic, segment, tc.gamma, /*shaped=*/false);

  MlpGradient actor_grad = bundle.actor.zero_gradient();
  MlpGradient encoder_grad = bundle.encoder.zero_gradient();
  long count = 0;
  for (std::size_t r = 0; r < segment.size(); ++r) {
    const StepRecord& rec = segment[r];
    const int n = static_cast<int>(rec.obs.size());
    for (int i = 0; i < n; ++i) {
      std::vector<double> input(rec.obs[i]);
      input.insert(input.end(), rec.received[i].begin(), rec.received[i].end());
      const std::vector<double> dist = bundle.actor.forward(input);
      const PolicyLoss pl = policy_loss(dist, rec.actions[i], deltas[r][i], tc.entropy_weight);
      MlpGradient ag = bundle.actor.backward(input, pl.upstream);

      // Chain the actor's input gradient through freshly transmitted
      // messages into the shared encoder. Held (ZOH) slots are constants.
      int slot = 0;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        if (rec.gates[j] == 1) {
          const std::size_t off = rec.obs[i].size() + static_cast<std::size_t>(slot) * task.msg_len;
          const std::span<const double> slice(ag.input.data() + off, task.msg_len);
          encoder_grad.accumulate(bundle.encoder.backward(rec.obs[j], slice));
        }
        slot += 1;
      }
      actor_grad.accumulate(ag);
      count += 1;
    }
  }
  actor_grad.scale(1.0 / static_cast<double>(count));
  encoder_grad.scale(1.0 / static_cast<double>(count));

  update_value_net(values.critic, segment, deltas, tc.lr_critic);
  bundle.actor.adam_step(actor_grad, tc.lr_actor_encoder);
  bundle.encoder.adam_step(encoder_grad, tc.lr_actor_encoder);
  return version + 1;
}

Stage2UpdateOut stage2_update(const std::vector<StepRecord>& segment, AgentBundle& bundle,
                              ValueBundle& values, double& lambda, double c_sup, const TaskSpec& task,
                              const TrainingConfig& tc, long version) {
  (void)task;
  check_on_policy(segment, version);
  const auto deltas = value_td_errors(values.lagrangian, segment, tc.gamma, /*shaped=*/true);

  // Gating-policy gradient. Forced first-step triggers are not actions of
  // the gating policy, so they carry no policy-gradient term.
  MlpGradient gate_grad = bundle.gate.zero_gradient();
  long gate_count = 0;
  for (std::size_t r = 0; r < segment.size(); ++r) {
    const StepRecord& rec = segment[r];
    for (std::size_t i = 0; i < rec.gates.size(); ++i) {
      if (rec.gate_forced[i]) continue;
      const std::vector<double> dist = bundle.gate.forward(rec.gate_input[i]);
      const PolicyLoss pl = policy_loss(dist, rec.gates[i], deltas[r][i], tc.entropy_weight);
      gate_grad.accumulate(bundle.gate.backward(rec.gate_input[i], pl.upstream));
      gate_count += 1;
    }
  }

  std::vector<std::vector<double>> pen_deltas(segment.size());
  for (std::size_t r = 0; r < segment.size(); ++r) {
    const StepRecord& rec = segment[r];
    pen_deltas[r].resize(rec.gates.size());
    for (std::size_t i = 0; i < rec.gates.size(); ++i) {
      const double v_now = value(values.penalty, rec.upsilon[i]);
      const double v_next = value(values.penalty, rec.upsilon_next[i]);
      pen_deltas[r][i] = td_error(rec.gates[i], v_next, v_now, rec.done, tc.gamma);
    }
  }

  update_value_net(values.lagrangian, segment, deltas, tc.lr_lagrange);
  if (gate_count > 0) {
    gate_grad.scale(1.0 / static_cast<double>(gate_count));
    bundle.gate.adam_step(gate_grad, tc.lr_gate);
  }
  update_value_net(values.penalty, segment, pen_deltas, tc.lr_penalty);

  // Dual ascent on the freshly updated penalty estimate, averaged over the
  // segment's start states.
  double vbar = 0.0;
  long count = 0;
  for (const StepRecord& rec : segment)
    for (std::size_t i = 0; i < rec.gates.size(); ++i) {
      vbar += value(values.penalty, rec.upsilon[i]);
      count += 1;
    }
  vbar /= static_cast<double>(count);

  Stage2UpdateOut out;
  out.v_penalty = vbar;
  out.lambda_before = lambda;
  out.lambda_after = lambda_update(lambda, tc.eta_lambda, vbar, c_sup);
  lambda = out.lambda_after;
  return out;
}

// ---------------------------------------------------------------------------
// Run plumbing.

namespace {

const std::vector<std::string> kMetricsHeader = {
    "step",   "eval_mean_steps", "eval_std_steps", "mean_penalty_per_step",
    "lambda", "sigma2",          "p_sup",          "c_sup",
    "v_penalty"};

void append_msg_components(VarianceEstimator& var, const StepRecord& rec) {
  for (const auto& m : rec.msg) var.update(m);
}

void write_resolved_config(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
  std::ofstream out(out_dir / "config.resolved.json");
  if (!out) throw std::runtime_error("cannot write resolved config");
  out << to_json(cfg).dump(1) << "\n";
}

class DivergenceWatch {
 public:
  DivergenceWatch(long total_steps, int step_cap) : half_(total_steps / 2), cap_(step_cap) {}
  void observe(long step, double eval_mean_steps) {
    if (step <= half_) return;
    if (eval_mean_steps >= cap_ - 1e-9)
      consecutive_ += 1;
    else
      consecutive_ = 0;
    if (consecutive_ >= 50)
      throw DivergenceError("evaluation pinned at the step cap for 50 consecutive evaluations after half the step budget");
  }

 private:
  long half_;
  int cap_;
  int consecutive_ = 0;
};

std::string mode_tag(const ExperimentConfig& cfg, GateMode mode) {
  if (cfg.mode == "stage1") return "stage1";
  return "baseline-" + to_string(mode);
}

RunResult run_policy_training(ExperimentConfig cfg, long seed, const std::filesystem::path& out_dir,
                              GateMode mode) {
  cfg.seeds = {seed};
  cfg.out_dir = out_dir.string();
  std::filesystem::create_directories(out_dir);
  write_resolved_config(cfg, out_dir);

  const TaskSpec task = task_from_config(cfg);
  const TrainingConfig& tc = cfg.training;
  auto env = make_env(cfg);

  Rng master(static_cast<std::uint64_t>(seed));
  Rng init_rng = master.fork(1);
  AgentBundle bundle = init_agent_bundle(task, init_rng, cfg.ablation == "gate-no-memory");
  ValueBundle values = init_value_bundle(task, init_rng);
  const CommsOptions copts = comms_options_for(cfg.ablation, mode);

  RolloutWorker worker(*env, task, bundle, mode, cfg.dropout_p, copts, master.fork(2), master.fork(3));
  Rng eval_base = master.fork(4);

  VarianceEstimator var(static_cast<std::size_t>(tc.sigma_window));
  CsvWriter metrics(out_dir / "metrics.csv", kMetricsHeader);
  DivergenceWatch watch(tc.total_steps, cfg.step_cap);

  std::vector<StepRecord> segment;
  segment.reserve(tc.segment_len);
  long version = 0;
  long eval_round = 0;
  RunResult result;
  result.out_dir = out_dir;

  for (long step = 1; step <= tc.total_steps; ++step) {
    StepRecord rec = worker.step(version);
    append_msg_components(var, rec);
    segment.push_back(std::move(rec));
    if (static_cast<int>(segment.size()) == tc.segment_len) {
      version = stage1_update(segment, bundle, values, task, tc, version);
      segment.clear();
    }

    if (step % tc.eval_cadence == 0) {
      const BandwidthBudget budget =
          derive_budget(cfg.budget.bandwidth, cfg.budget.signal_levels, task.msg_len,
                        cfg.budget.sample_freq, task.n_agents, var.sigma2(), tc.gamma);
      const EvalReport er = run_eval(cfg, task, bundle, mode, cfg.dropout_p, copts, tc.eval_episodes,
                                     eval_base.fork(static_cast<std::uint64_t>(eval_round++)), false,
                                     nullptr, budget);
      metrics.row({std::to_string(step), fmt_double(er.mean_steps), fmt_double(er.std_steps),
                   fmt_double(er.send_prob), fmt_double(0.0), fmt_double(var.sigma2()),
                   fmt_double(budget.p_sup), fmt_double(budget.c_sup), fmt_double(0.0)});
      metrics.flush();
      result.final_eval_mean_steps = er.mean_steps;
      result.final_send_prob = er.send_prob;
      result.final_sigma2 = var.sigma2();
      result.final_p_sup = budget.p_sup;
      result.final_c_sup = budget.c_sup;
      watch.observe(step, er.mean_steps);
    }
    result.steps_run = step;

    if (tc.checkpoint_cadence > 0 && step % tc.checkpoint_cadence == 0) {
      Checkpoint ckpt{cfg, mode_tag(cfg, mode), seed, step, var.sigma2(), 0.0, std::nullopt, bundle, values};
      save_checkpoint(out_dir / "checkpoint", ckpt);
    }
  }

  Checkpoint ckpt{cfg, mode_tag(cfg, mode), seed, tc.total_steps, var.sigma2(), 0.0, std::nullopt,
                  bundle, values};
  save_checkpoint(out_dir / "checkpoint", ckpt);
  result.checkpoint_dir = out_dir / "checkpoint";
  result.final_sigma2 = var.sigma2();
  return result;
}

}  // namespace

RunResult run_stage1(const ExperimentConfig& cfg_in, long seed, const std::filesystem::path& out_dir) {
  ExperimentConfig cfg = resolve(cfg_in);
  cfg.mode = "stage1";
  return run_policy_training(cfg, seed, out_dir, GateMode::kFull);
}

RunResult run_baseline(const ExperimentConfig& cfg_in, long seed, const std::filesystem::path& out_dir) {
  ExperimentConfig cfg = resolve(cfg_in);
  cfg.mode = "baseline";
  return run_policy_training(cfg, seed, out_dir, gate_mode_from_string(cfg.baseline));
}

RunResult run_stage2(const ExperimentConfig& cfg_in, long seed, const std::filesystem::path& out_dir) {
  ExperimentConfig cfg = resolve(cfg_in);
  cfg.mode = "stage2";
  cfg.seeds = {seed};
  cfg.out_dir = out_dir.string();

  Checkpoint stage1 = load_checkpoint(cfg.stage1_checkpoint);
  if (stage1.config.task != cfg.task || stage1.config.n_agents != cfg.n_agents)
    throw ConfigError("stage1 checkpoint task mismatch: trained for " + stage1.config.task + "/" +
                      std::to_string(stage1.config.n_agents) + " agents");

  std::filesystem::create_directories(out_dir);
  write_resolved_config(cfg, out_dir);

  const TaskSpec task = task_from_config(cfg);
  const TrainingConfig& tc = cfg.training;

  Rng master(static_cast<std::uint64_t>(seed));
  Rng init_rng = master.fork(1);

  // Frozen pieces come from stage 1; the gating side starts fresh.
  AgentBundle bundle = init_agent_bundle(task, init_rng, cfg.ablation == "gate-no-memory");
  bundle.encoder = stage1.agents.encoder;
  bundle.actor = stage1.agents.actor;
  ValueBundle values = init_value_bundle(task, init_rng);
  values.critic = stage1.values.critic;
  const Mlp frozen_encoder = bundle.encoder;
  const Mlp frozen_actor = bundle.actor;
  const Mlp frozen_critic = values.critic;

  // Message variance at full communication fixes the initial budget.
  VarianceEstimator var(static_cast<std::size_t>(tc.sigma_window));
  {
    auto measure_env = make_env(cfg);
    RolloutWorker measure(*measure_env, task, bundle, GateMode::kFull, 0.0, CommsOptions{},
                          master.fork(5), master.fork(6));
    for (long s = 0; s < tc.measure_steps; ++s) append_msg_components(var, measure.step());
  }
  BandwidthBudget budget = derive_budget(cfg.budget.bandwidth, cfg.budget.signal_levels, task.msg_len,
                                         cfg.budget.sample_freq, task.n_agents, var.sigma2(), tc.gamma);

  const CommsOptions copts = comms_options_for(cfg.ablation, GateMode::kLearned);
  auto env = make_env(cfg);
  RolloutWorker worker(*env, task, bundle, GateMode::kLearned, 0.0, copts, master.fork(2), master.fork(3));
  Rng eval_base = master.fork(4);

  CsvWriter metrics(out_dir / "metrics.csv", kMetricsHeader);
  CsvWriter trace(out_dir / "lambda_trace.csv",
                  {"update", "step", "lambda_before", "v_penalty", "c_sup", "lambda_after"});
  DivergenceWatch watch(tc.total_steps, cfg.step_cap);

  std::vector<StepRecord> segment;
  segment.reserve(tc.segment_len);
  double lambda = 0.0;
  double last_v_penalty = 0.0;
  long version = 0;
  long update_count = 0;
  long eval_round = 0;
  RunResult result;
  result.out_dir = out_dir;

  for (long step = 1; step <= tc.total_steps; ++step) {
    StepRecord rec = worker.step(version);
    rec.lambda = lambda;
    append_msg_components(var, rec);
    segment.push_back(std::move(rec));

    if (static_cast<int>(segment.size()) == tc.segment_len) {
      const Stage2UpdateOut upd = stage2_update(segment, bundle, values, lambda, budget.c_sup, task, tc, version);
      version += 1;
      segment.clear();
      last_v_penalty = upd.v_penalty;
      update_count += 1;
      trace.row({std::to_string(update_count), std::to_string(step), fmt_double(upd.lambda_before),
                 fmt_double(upd.v_penalty), fmt_double(budget.c_sup), fmt_double(upd.lambda_after)});
    }

    if (step % tc.sigma_refresh_period == 0)
      budget = derive_budget(cfg.budget.bandwidth, cfg.budget.signal_levels, task.msg_len,
                             cfg.budget.sample_freq, task.n_agents, var.sigma2(), tc.gamma);

    if (step % tc.eval_cadence == 0) {
      const EvalReport er = run_eval(cfg, task, bundle, GateMode::kLearned, 0.0, copts, tc.eval_episodes,
                                     eval_base.fork(static_cast<std::uint64_t>(eval_round++)), false,
                                     nullptr, budget);
      metrics.row({std::to_string(step), fmt_double(er.mean_steps), fmt_double(er.std_steps),
                   fmt_double(er.send_prob), fmt_double(lambda), fmt_double(budget.sigma2),
                   fmt_double(budget.p_sup), fmt_double(budget.c_sup), fmt_double(last_v_penalty)});
      metrics.flush();
      trace.flush();
      result.final_eval_mean_steps = er.mean_steps;
      result.final_send_prob = er.send_prob;
      watch.observe(step, er.mean_steps);
    }
    result.steps_run = step;

    if (tc.checkpoint_cadence > 0 && step % tc.checkpoint_cadence == 0) {
      Checkpoint ckpt{cfg, "stage2", seed, step, budget.sigma2, lambda, budget, bundle, values};
      save_checkpoint(out_dir / "checkpoint", ckpt);
    }
  }

  if (!(bundle.encoder == frozen_encoder) || !(bundle.actor == frozen_actor) ||
      !(values.critic == frozen_critic))
    throw std::logic_error("stage-2 freeze contract violated");

  Checkpoint ckpt{cfg, "stage2", seed, tc.total_steps, budget.sigma2, lambda, budget, bundle, values};
  save_checkpoint(out_dir / "checkpoint", ckpt);
  result.checkpoint_dir = out_dir / "checkpoint";
  result.final_sigma2 = budget.sigma2;
  result.final_p_sup = budget.p_sup;
  result.final_c_sup = budget.c_sup;
  result.final_lambda = lambda;
  return result;
}

RunResult run_experiment(const ExperimentConfig& cfg_in, long seed, const std::filesystem::path& out_dir) {
  const ExperimentConfig cfg = resolve(cfg_in);
  if (cfg.mode == "stage1") return run_stage1(cfg, seed, out_dir);
  if (cfg.mode == "stage2") return run_stage2(cfg, seed, out_dir);
  return run_baseline(cfg, seed, out_dir);
}

// ---------------------------------------------------------------------------
// Checkpoints.

namespace {

json budget_to_json(const BandwidthBudget& b) {
  return json{{"bandwidth", b.bandwidth},   {"signal_levels", b.signal_levels},
              {"msg_len", b.msg_len},       {"sample_freq", b.sample_freq},
              {"n_agents", b.n_agents},     {"sigma2", b.sigma2},
              {"gamma", b.gamma},           {"entropy_bound", b.entropy_bound},
              {"n_max", b.n_max},           {"p_sup", b.p_sup},
              {"c_sup", b.c_sup}};
}

double finite_or_inf(const json& v) {
  // JSON has no infinity; a degenerate entropy bound serializes as null.
  return v.is_null() ? std::numeric_limits<double>::infinity() : v.get<double>();
}

BandwidthBudget budget_from_json(const json& j) {
  BandwidthBudget b;
  b.bandwidth = j.at("bandwidth").get<double>();
  b.signal_levels = j.at("signal_levels").get<int>();
  b.msg_len = j.at("msg_len").get<int>();
  b.sample_freq = j.at("sample_freq").get<double>();
  b.n_agents = j.at("n_agents").get<int>();
  b.sigma2 = j.at("sigma2").get<double>();
  b.gamma = j.at("gamma").get<double>();
  b.entropy_bound = j.at("entropy_bound").get<double>();
  b.n_max = finite_or_inf(j.at("n_max"));
  b.p_sup = j.at("p_sup").get<double>();
  b.c_sup = j.at("c_sup").get<double>();
  return b;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& dir, const Checkpoint& ckpt) {
  std::filesystem::create_directories(dir);
  save_mlp(dir / "encoder.json", ckpt.agents.encoder);
  save_mlp(dir / "actor.json", ckpt.agents.actor);
  save_mlp(dir / "gate.json", ckpt.agents.gate);
  save_mlp(dir / "critic.json", ckpt.values.critic);
  save_mlp(dir / "lagrangian.json", ckpt.values.lagrangian);
  save_mlp(dir / "penalty.json", ckpt.values.penalty);

  json manifest{{"format", 1},
                {"mode", ckpt.mode},
                {"seed", ckpt.seed},
                {"trained_steps", ckpt.trained_steps},
                {"sigma2", ckpt.sigma2},
                {"lambda", ckpt.lambda},
                {"config", to_json(ckpt.config)},
                {"networks",
                 {{"encoder", "encoder.json"},
                  {"actor", "actor.json"},
                  {"gate", "gate.json"},
                  {"critic", "critic.json"},
                  {"lagrangian", "lagrangian.json"},
                  {"penalty", "penalty.json"}}}};
  manifest["budget"] = ckpt.budget ? budget_to_json(*ckpt.budget) : json(nullptr);

  std::ofstream out(dir / "manifest.json");
  if (!out) throw std::runtime_error("cannot write checkpoint manifest");
  out << manifest.dump(1) << "\n";
}

Checkpoint load_checkpoint(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw ConfigError("cannot read checkpoint manifest in " + dir.string());
  json manifest;
  try {
    in >> manifest;
  } catch (const json::exception& e) {
    throw std::runtime_error("bad checkpoint manifest: " + std::string(e.what()));
  }

  Checkpoint ckpt;
  ckpt.config = resolve(config_from_json(manifest.at("config")));
  ckpt.mode = manifest.at("mode").get<std::string>();
  ckpt.seed = manifest.at("seed").get<long>();
  ckpt.trained_steps = manifest.at("trained_steps").get<long>();
  ckpt.sigma2 = manifest.at("sigma2").get<double>();
  ckpt.lambda = manifest.at("lambda").get<double>();
  if (!manifest.at("budget").is_null()) ckpt.budget = budget_from_json(manifest.at("budget"));

  const json& nets = manifest.at("networks");
  ckpt.agents.encoder = load_mlp(dir / nets.at("encoder").get<std::string>());
  ckpt.agents.actor = load_mlp(dir / nets.at("actor").get<std::string>());
  ckpt.agents.gate = load_mlp(dir / nets.at("gate").get<std::string>());
  ckpt.values.critic = load_mlp(dir / nets.at("critic").get<std::string>());
  ckpt.values.lagrangian = load_mlp(dir / nets.at("lagrangian").get<std::string>());
  ckpt.values.penalty = load_mlp(dir / nets.at("penalty").get<std::string>());

  const TaskSpec task = task_from_config(ckpt.config);
  if (ckpt.agents.encoder.input_size() != task.obs_dim ||
      ckpt.agents.encoder.output_size() != task.msg_len ||
      ckpt.agents.actor.input_size() != task.actor_input() ||
      ckpt.agents.actor.output_size() != task.n_actions ||
      ckpt.values.critic.input_size() != task.value_input())
    throw std::runtime_error("checkpoint networks do not match the task in " + dir.string());
  return ckpt;
}

EvalReport evaluate_checkpoint(const Checkpoint& ckpt, int episodes, long seed, bool greedy,
                               const std::filesystem::path* dump_path) {
  if (episodes < 1) throw std::invalid_argument("episodes must be positive");
  const ExperimentConfig& cfg = ckpt.config;
  const TaskSpec task = task_from_config(cfg);

  GateMode mode = GateMode::kLearned;
  double dropout_p = 0.0;
  if (ckpt.mode == "stage1" || ckpt.mode == "baseline-full") {
    mode = GateMode::kFull;
  } else if (ckpt.mode == "baseline-none") {
    mode = GateMode::kNone;
  } else if (ckpt.mode == "baseline-dropout") {
    mode = GateMode::kDropout;
    dropout_p = cfg.dropout_p;
  } else if (ckpt.mode != "stage2") {
    throw std::runtime_error("unknown checkpoint mode: " + ckpt.mode);
  }

  const BandwidthBudget budget =
      ckpt.budget ? *ckpt.budget
                  : derive_budget(cfg.budget.bandwidth, cfg.budget.signal_levels, task.msg_len,
                                  cfg.budget.sample_freq, task.n_agents, ckpt.sigma2,
                                  cfg.training.gamma);

  std::unique_ptr<TrajectoryWriter> dump;
  if (dump_path != nullptr) dump = std::make_unique<TrajectoryWriter>(*dump_path);
  return run_eval(cfg, task, ckpt.agents, mode, dropout_p, comms_options_for(cfg.ablation, mode), episodes,
                  Rng(static_cast<std::uint64_t>(seed)), greedy, dump.get(), budget);
}

}  // namespace etcnet
