#include "etcnet/env_nav.hpp"

#include <stdexcept>

namespace etcnet {

namespace {
constexpr double kRewardOnDest = 1.0;
constexpr double kRewardStep = -0.1;
}  // namespace

NavEnv::NavEnv(NavConfig config) : config_(config) {
  if (config_.grid_size < 4) throw std::invalid_argument("grid_size must be at least 4");
  if (config_.step_cap < 1) throw std::invalid_argument("step_cap must be positive");
  if (config_.p_move < 0.0 || config_.p_move > 1.0) throw std::invalid_argument("p_move must be in [0,1]");
}

std::vector<std::vector<double>> NavEnv::reset(Rng& rng) {
  // Agents and destinations on four distinct cells.
  std::vector<GridPos> taken;
  auto place = [&]() {
    while (true) {
      GridPos p{rng.uniform_int(config_.grid_size), rng.uniform_int(config_.grid_size)};
      bool clash = false;
      for (const GridPos& q : taken) clash |= (q == p);
      if (!clash) {
        taken.push_back(p);
        return p;
      }
    }
  };
  for (int i = 0; i < kAgents; ++i) agents_[i] = place();
  for (int i = 0; i < kAgents; ++i) dests_[i] = place();
  step_count_ = 0;

  return {observation(0), observation(1)};
}

std::vector<double> NavEnv::observation(int agent) const {
  const int other = 1 - agent;
  const double denom = static_cast<double>(config_.grid_size - 1);
  // [own pos, other agent pos, other agent's destination], all in [0,1].
  return {agents_[agent].x / denom, agents_[agent].y / denom,
          agents_[other].x / denom, agents_[other].y / denom,
          dests_[other].x / denom,  dests_[other].y / denom};
}

EnvStep NavEnv::step(const std::vector<int>& actions, Rng& rng) {
  if (actions.size() != kAgents) throw std::invalid_argument("expected one action per agent");
  for (int a : actions)
    if (a < 0 || a >= kNumMoves) throw std::invalid_argument("invalid action index " + std::to_string(a));

  for (int i = 0; i < kAgents; ++i) agents_[i] = clamped_move(agents_[i], actions[i], config_.grid_size);

  std::array<bool, kAgents> dest_moved{};
  for (int i = 0; i < kAgents; ++i) {
    if (rng.bernoulli(config_.p_move)) {
      const GridPos before = dests_[i];
      dests_[i] = clamped_move(dests_[i], rng.uniform_int(4), config_.grid_size);
      dest_moved[i] = !(dests_[i] == before);
    }
  }

  step_count_ += 1;

  EnvStep out;
  out.rewards.resize(kAgents);
  out.obs.resize(kAgents);
  std::array<bool, kAgents> reached{};
  for (int i = 0; i < kAgents; ++i) {
    reached[i] = agents_[i] == dests_[i];
    out.rewards[i] = reached[i] ? kRewardOnDest : kRewardStep;
    out.obs[i] = observation(i);
  }
  out.done = (reached[0] && reached[1]) || step_count_ >= config_.step_cap;
  out.info = {{"reached", {reached[0], reached[1]}},
              {"dest_moved", {dest_moved[0], dest_moved[1]}}};
  return out;
}

nlohmann::json NavEnv::state_json() const {
  return {{"agents", {{agents_[0].x, agents_[0].y}, {agents_[1].x, agents_[1].y}}},
          {"dests", {{dests_[0].x, dests_[0].y}, {dests_[1].x, dests_[1].y}}},
          {"step", step_count_}};
}

}  // namespace etcnet
