#include "etcnet/env_pp.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace etcnet {

namespace {
constexpr double kRewardCapture = 10.0;
constexpr double kRewardCollision = -1.0;
constexpr double kRewardStep = -0.05;
}  // namespace

PpEnv::PpEnv(PpConfig config) : config_(config) {
  if (config_.grid_size < kView) throw std::invalid_argument("grid_size must be at least 5");
  if (config_.n_predators < 2 || config_.n_predators > 4)
    throw std::invalid_argument("n_predators must be in [2,4]");
  if (config_.n_preys < 1) throw std::invalid_argument("n_preys must be positive");
  if (config_.step_cap < 1) throw std::invalid_argument("step_cap must be positive");
}

std::vector<std::vector<double>> PpEnv::reset(Rng& rng) {
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
  predators_.resize(config_.n_predators);
  preys_.resize(config_.n_preys);
  alive_.assign(config_.n_preys, true);
  for (auto& p : predators_) p = place();
  for (auto& p : preys_) p = place();
  step_count_ = 0;

  std::vector<std::vector<double>> obs(config_.n_predators);
  for (int i = 0; i < config_.n_predators; ++i) obs[i] = observation(i);
  return obs;
}

void PpEnv::set_positions(std::vector<GridPos> predators, std::vector<GridPos> preys) {
  predators_ = std::move(predators);
  preys_ = std::move(preys);
  alive_.assign(preys_.size(), true);
  config_.n_predators = static_cast<int>(predators_.size());
  config_.n_preys = static_cast<int>(preys_.size());
}

std::vector<double> PpEnv::observation(int predator) const {
  std::vector<double> obs(kObsDim, 0.0);
  const GridPos& self = predators_[predator];
  const int half = kView / 2;
  // Window cells in row-major order over (dy, dx) in [-2, 2]^2.
  auto cell_index = [&](const GridPos& p) -> int {
    const auto d = toroidal_delta(self, p, config_.grid_size);
    if (std::abs(d[0]) > half || std::abs(d[1]) > half) return -1;
    return (d[1] + half) * kView + (d[0] + half);
  };
  for (int k = 0; k < config_.n_preys; ++k) {
    if (!alive_[k]) continue;
    const int c = cell_index(preys_[k]);
    if (c >= 0) obs[c] = 1.0;
  }
  for (int j = 0; j < config_.n_predators; ++j) {
    if (j == predator) continue;
    const int c = cell_index(predators_[j]);
    if (c >= 0) obs[kView * kView + c] = 1.0;
  }
  const double denom = static_cast<double>(config_.grid_size - 1);
  obs[kObsDim - 2] = self.x / denom;
  obs[kObsDim - 1] = self.y / denom;
  return obs;
}

int PpEnv::prey_policy(int prey) const {
  if (!alive_[prey]) throw std::logic_error("prey_policy called on a captured prey");
  int best_move = kUp;
  long best_dist = -1;
  for (int move = 0; move < kNumMoves; ++move) {
    const GridPos next = wrapped_move(preys_[prey], move, config_.grid_size);
    long nearest = std::numeric_limits<long>::max();
    for (const GridPos& pred : predators_)
      nearest = std::min<long>(nearest, toroidal_sq_dist(next, pred, config_.grid_size));
    if (nearest > best_dist) {
      best_dist = nearest;
      best_move = move;
    }
  }
  return best_move;
}

EnvStep PpEnv::step(const std::vector<int>& actions, Rng& rng) {
  (void)rng;  // prey policy is deterministic; kept for interface symmetry
  if (static_cast<int>(actions.size()) != config_.n_predators)
    throw std::invalid_argument("expected one action per predator");
  for (int a : actions)
    if (a < 0 || a >= kNumMoves) throw std::invalid_argument("invalid action index " + std::to_string(a));

  for (int i = 0; i < config_.n_predators; ++i)
    predators_[i] = wrapped_move(predators_[i], actions[i], config_.grid_size);

  auto capture_pass = [&]() {
    int captured = 0;
    for (int k = 0; k < config_.n_preys; ++k) {
      if (!alive_[k]) continue;
      for (const GridPos& pred : predators_) {
        if (pred == preys_[k]) {
          alive_[k] = false;
          captured += 1;
          break;
        }
      }
    }
    return captured;
  };

  int captures = capture_pass();
  for (int k = 0; k < config_.n_preys; ++k)
    if (alive_[k]) preys_[k] = wrapped_move(preys_[k], prey_policy(k), config_.grid_size);
  captures += capture_pass();

  std::vector<int> collisions(config_.n_predators, 0);
  for (int i = 0; i < config_.n_predators; ++i)
    for (int j = i + 1; j < config_.n_predators; ++j)
      if (predators_[i] == predators_[j]) {
        collisions[i] += 1;
        collisions[j] += 1;
      }

  step_count_ += 1;

  EnvStep out;
  out.rewards.resize(config_.n_predators);
  out.obs.resize(config_.n_predators);
  std::vector<bool> prey_visible(config_.n_predators, false);
  bool all_captured = true;
  for (bool a : alive_) all_captured &= !a;
  for (int i = 0; i < config_.n_predators; ++i) {
    out.rewards[i] = kRewardStep + kRewardCapture * captures + kRewardCollision * collisions[i];
    out.obs[i] = observation(i);
    for (int c = 0; c < kView * kView; ++c) prey_visible[i] = prey_visible[i] || out.obs[i][c] > 0.5;
  }
  out.done = all_captured || step_count_ >= config_.step_cap;
  out.info = {{"captures", captures}, {"collisions", collisions}, {"prey_visible", prey_visible}};
  return out;
}

nlohmann::json PpEnv::state_json() const {
  nlohmann::json predators = nlohmann::json::array(), preys = nlohmann::json::array();
  for (const auto& p : predators_) predators.push_back({p.x, p.y});
  for (const auto& p : preys_) preys.push_back({p.x, p.y});
  return {{"predators", predators}, {"preys", preys}, {"alive", alive_}, {"step", step_count_}};
}

}  // namespace etcnet
