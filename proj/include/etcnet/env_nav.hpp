#pragma once

#include "etcnet/env_core.hpp"

namespace etcnet {

struct NavConfig {
  int grid_size = 10;
  int step_cap = 100;
  double p_move = 0.1;  // chance per step that a destination hops one cell
};

/// Cooperative navigation: two agents on a bounded grid, each heading for
/// its own (drifting) destination. An agent observes its own position, the
/// other agent's position and the OTHER agent's destination — never its
/// own, which is what makes communication matter.
class NavEnv final : public MultiAgentEnv {
 public:
  static constexpr int kAgents = 2;
  static constexpr int kObsDim = 6;

  explicit NavEnv(NavConfig config);

  int n_agents() const override { return kAgents; }
  int obs_dim() const override { return kObsDim; }
  int n_actions() const override { return kNumMoves; }
  int step_cap() const override { return config_.step_cap; }

  std::vector<std::vector<double>> reset(Rng& rng) override;
  EnvStep step(const std::vector<int>& actions, Rng& rng) override;
  nlohmann::json state_json() const override;

  const GridPos& agent_pos(int i) const { return agents_[i]; }
  const GridPos& dest_pos(int i) const { return dests_[i]; }
  int step_count() const { return step_count_; }
  const NavConfig& config() const { return config_; }

  std::vector<double> observation(int agent) const;

 private:
  NavConfig config_;
  std::array<GridPos, kAgents> agents_{};
  std::array<GridPos, kAgents> dests_{};
  int step_count_ = 0;
};

}  // namespace etcnet
