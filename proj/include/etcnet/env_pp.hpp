#pragma once

#include "etcnet/env_core.hpp"

namespace etcnet {

struct PpConfig {
  int grid_size = 10;
  int n_predators = 3;
  int n_preys = 1;
  int step_cap = 200;
};

/// Predator–prey on a torus. Predators see a 5x5 window around themselves
/// (prey flags, then predator flags, then own coordinates: 52 values);
/// preys see the whole map and flee the nearest predator.
class PpEnv final : public MultiAgentEnv {
 public:
  static constexpr int kView = 5;  // local view side length
  static constexpr int kObsDim = kView * kView * 2 + 2;

  explicit PpEnv(PpConfig config);

  int n_agents() const override { return config_.n_predators; }
  int obs_dim() const override { return kObsDim; }
  int n_actions() const override { return kNumMoves; }
  int step_cap() const override { return config_.step_cap; }

  std::vector<std::vector<double>> reset(Rng& rng) override;
  EnvStep step(const std::vector<int>& actions, Rng& rng) override;
  nlohmann::json state_json() const override;

  const GridPos& predator_pos(int i) const { return predators_[i]; }
  const GridPos& prey_pos(int k) const { return preys_[k]; }
  bool prey_alive(int k) const { return alive_[k]; }
  int step_count() const { return step_count_; }
  const PpConfig& config() const { return config_; }

  std::vector<double> observation(int predator) const;

  /// Escape move for one live prey: the move (in fixed priority order
  /// up, down, left, right, stay) that maximizes the post-move Euclidean
  /// torus distance to the nearest predator.
  int prey_policy(int prey) const;

  // test hooks
  void set_positions(std::vector<GridPos> predators, std::vector<GridPos> preys);

 private:
  PpConfig config_;
  std::vector<GridPos> predators_;
  std::vector<GridPos> preys_;
  std::vector<bool> alive_;
  int step_count_ = 0;
};

}  // namespace etcnet
