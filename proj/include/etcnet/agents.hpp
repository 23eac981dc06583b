#pragma once

#include <string>
#include <vector>

#include "etcnet/mlp.hpp"

namespace etcnet {

/// Network dimensioning for one task. All homogeneous agents share one
/// parameter set per role.
struct TaskSpec {
  std::string name;  // "nav" or "pp"
  int n_agents = 0;
  int obs_dim = 0;
  int msg_len = 0;
  int n_actions = 0;

  int actor_input() const { return obs_dim + (n_agents - 1) * msg_len; }
  int value_input() const { return n_agents * obs_dim; }  // upsilon
};

TaskSpec nav_task();
TaskSpec pp_task(int n_agents);
TaskSpec task_by_name(const std::string& name, int n_agents);

/// Encoder (obs -> message, tanh head), actor (obs + received messages ->
/// action distribution) and gate (message pair -> send/hold distribution).
struct AgentBundle {
  Mlp encoder;
  Mlp actor;
  Mlp gate;
};

/// Centralized value heads over the concatenated observations.
struct ValueBundle {
  Mlp critic;      // discounted task return
  Mlp lagrangian;  // discounted shaped return r - lambda g
  Mlp penalty;     // discounted gate-open count
};

AgentBundle init_agent_bundle(const TaskSpec& task, Rng& rng, bool gate_no_memory = false);
ValueBundle init_value_bundle(const TaskSpec& task, Rng& rng);

std::vector<double> encode(const Mlp& encoder, std::span<const double> obs);

struct ActResult {
  std::vector<double> dist;
  int action = 0;
};

/// pi_i(o_i, received). Samples from the softmax head unless greedy.
ActResult act(const Mlp& actor, std::span<const double> obs, std::span<const double> received,
              Rng& rng, bool greedy = false);

enum class GateMode { kLearned, kFull, kNone, kDropout };

GateMode gate_mode_from_string(const std::string& name);
std::string to_string(GateMode mode);

struct GateResult {
  double open_prob = 0.0;
  int gate = 0;
};

/// mu_i over {hold, send}. kFull and kNone bypass the network; kDropout is
/// an input-independent Bernoulli(p) coin.
GateResult decide_gate(const Mlp& gate_net, GateMode mode, std::span<const double> gate_input,
                       Rng& rng, double dropout_p = 0.0, bool greedy = false);

double value(const Mlp& value_net, std::span<const double> upsilon);

}  // namespace etcnet
