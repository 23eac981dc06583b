#include "etcnet/agents.hpp"

#include <stdexcept>

namespace etcnet {

namespace {
const Activation R = Activation::kRelu;
const Activation T = Activation::kTanh;
const Activation S = Activation::kSoftmax;
const Activation N = Activation::kNone;
}  // namespace

TaskSpec nav_task() { return TaskSpec{"nav", 2, 6, 6, 5}; }

TaskSpec pp_task(int n_agents) {
  if (n_agents < 2 || n_agents > 4) throw std::invalid_argument("pp task supports 2 to 4 predators");
  return TaskSpec{"pp", n_agents, 52, 15, 5};
}

TaskSpec task_by_name(const std::string& name, int n_agents) {
  if (name == "nav") {
    if (n_agents != 2) throw std::invalid_argument("nav task has exactly 2 agents");
    return nav_task();
  }
  if (name == "pp") return pp_task(n_agents);
  throw std::invalid_argument("unknown task: " + name);
}

AgentBundle init_agent_bundle(const TaskSpec& task, Rng& rng, bool gate_no_memory) {
  AgentBundle b;
  const int gate_in = gate_no_memory ? task.msg_len : 2 * task.msg_len;
  if (task.name == "nav") {
    b.encoder = Mlp::random_init({task.obs_dim, 20, task.msg_len}, {R, T}, rng);
    b.actor = Mlp::random_init({task.actor_input(), 40, 40, task.n_actions}, {R, R, S}, rng);
    b.gate = Mlp::random_init({gate_in, 40, 40, 2}, {R, R, S}, rng);
  } else {
    b.encoder = Mlp::random_init({task.obs_dim, 40, task.msg_len}, {R, T}, rng);
    b.actor = Mlp::random_init({task.actor_input(), 80, 40, task.n_actions}, {R, R, S}, rng);
    b.gate = Mlp::random_init({gate_in, 80, 80, 2}, {R, R, S}, rng);
  }
  return b;
}

ValueBundle init_value_bundle(const TaskSpec& task, Rng& rng) {
  ValueBundle v;
  const int in = task.value_input();
  if (task.name == "nav") {
    v.critic = Mlp::random_init({in, 40, 40, 1}, {R, R, N}, rng);
    v.lagrangian = Mlp::random_init({in, 60, 60, 1}, {R, R, N}, rng);
    v.penalty = Mlp::random_init({in, 60, 60, 1}, {R, R, N}, rng);
  } else {
    v.critic = Mlp::random_init({in, 120, 80, 1}, {R, R, N}, rng);
    v.lagrangian = Mlp::random_init({in, 120, 80, 1}, {R, R, N}, rng);
    v.penalty = Mlp::random_init({in, 60, 40, 1}, {R, R, N}, rng);
  }
  return v;
}

std::vector<double> encode(const Mlp& encoder, std::span<const double> obs) {
  return encoder.forward(obs);
}

ActResult act(const Mlp& actor, std::span<const double> obs, std::span<const double> received,
              Rng& rng, bool greedy) {
  std::vector<double> input(obs.begin(), obs.end());
  input.insert(input.end(), received.begin(), received.end());
  ActResult r;
  r.dist = actor.forward(input);
  r.action = greedy ? argmax(r.dist) : categorical_sample(r.dist, rng);
  return r;
}

GateMode gate_mode_from_string(const std::string& name) {
  if (name == "learned") return GateMode::kLearned;
  if (name == "full") return GateMode::kFull;
  if (name == "none") return GateMode::kNone;
  if (name == "dropout") return GateMode::kDropout;
  throw std::invalid_argument("unknown gate mode: " + name);
}

std::string to_string(GateMode mode) {
  switch (mode) {
    case GateMode::kLearned: return "learned";
    case GateMode::kFull: return "full";
    case GateMode::kNone: return "none";
    case GateMode::kDropout: return "dropout";
  }
  throw std::logic_error("bad gate mode enum");
}

GateResult decide_gate(const Mlp& gate_net, GateMode mode, std::span<const double> gate_input,
                       Rng& rng, double dropout_p, bool greedy) {
  GateResult r;
  switch (mode) {
    case GateMode::kFull:
      r.open_prob = 1.0;
      r.gate = 1;
      return r;
    case GateMode::kNone:
      r.open_prob = 0.0;
      r.gate = 0;
      return r;
    case GateMode::kDropout:
      if (dropout_p < 0.0 || dropout_p > 1.0) throw std::invalid_argument("dropout_p must be in [0,1]");
      r.open_prob = dropout_p;
      r.gate = rng.bernoulli(dropout_p) ? 1 : 0;
      return r;
    case GateMode::kLearned: {
      const std::vector<double> dist = gate_net.forward(gate_input);
      r.open_prob = dist[1];
      r.gate = greedy ? argmax(dist) : categorical_sample(dist, rng);
      return r;
    }
  }
  throw std::logic_error("bad gate mode enum");
}

double value(const Mlp& value_net, std::span<const double> upsilon) {
  return value_net.forward(upsilon)[0];
}

}  // namespace etcnet
