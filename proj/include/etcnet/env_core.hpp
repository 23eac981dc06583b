#pragma once

#include <array>
#include <cstdlib>
#include <string>
#include <vector>

#include <json.hpp>

#include "etcnet/rng.hpp"

namespace etcnet {

// Action order is load-bearing: it is also the tie-break priority of the
// prey escape policy.
enum Move : int { kUp = 0, kDown = 1, kLeft = 2, kRight = 3, kStay = 4 };
constexpr int kNumMoves = 5;

constexpr std::array<std::array<int, 2>, kNumMoves> kMoveDelta = {{
    {{0, 1}},   // up
    {{0, -1}},  // down
    {{-1, 0}},  // left
    {{1, 0}},   // right
    {{0, 0}},   // stay
}};

struct GridPos {
  int x = 0;
  int y = 0;
  friend bool operator==(const GridPos&, const GridPos&) = default;
};

/// Signed minimal displacement from a to b along one torus axis,
/// |delta| <= grid_size/2. At the exact half-way tie the sign of the plain
/// difference is kept, so delta(a,b) == -delta(b,a) always holds.
inline int toroidal_axis_delta(int a, int b, int grid_size) {
  const int naive = b - a;
  int d = naive % grid_size;
  if (d < 0) d += grid_size;           // now in [0, grid)
  if (2 * d == grid_size) return naive > 0 ? d : -d;
  return d > grid_size / 2 ? d - grid_size : d;
}

inline std::array<int, 2> toroidal_delta(const GridPos& a, const GridPos& b, int grid_size) {
  return {toroidal_axis_delta(a.x, b.x, grid_size), toroidal_axis_delta(a.y, b.y, grid_size)};
}

/// Manhattan distance on the torus.
inline int toroidal_manhattan(const GridPos& a, const GridPos& b, int grid_size) {
  const auto d = toroidal_delta(a, b, grid_size);
  return std::abs(d[0]) + std::abs(d[1]);
}

/// Squared Euclidean distance on the torus.
inline int toroidal_sq_dist(const GridPos& a, const GridPos& b, int grid_size) {
  const auto d = toroidal_delta(a, b, grid_size);
  return d[0] * d[0] + d[1] * d[1];
}

inline GridPos clamped_move(const GridPos& p, int move, int grid_size) {
  GridPos q{p.x + kMoveDelta[move][0], p.y + kMoveDelta[move][1]};
  q.x = q.x < 0 ? 0 : (q.x >= grid_size ? grid_size - 1 : q.x);
  q.y = q.y < 0 ? 0 : (q.y >= grid_size ? grid_size - 1 : q.y);
  return q;
}

inline GridPos wrapped_move(const GridPos& p, int move, int grid_size) {
  GridPos q{p.x + kMoveDelta[move][0], p.y + kMoveDelta[move][1]};
  q.x = (q.x + grid_size) % grid_size;
  q.y = (q.y + grid_size) % grid_size;
  return q;
}

/// One environment transition as seen by the trainer.
struct EnvStep {
  std::vector<double> rewards;             // per agent
  std::vector<std::vector<double>> obs;    // per agent
  bool done = false;
  nlohmann::json info;                     // per-task flags
};

/// Uniform face shared by the two tasks so the training loop, evaluator and
/// trajectory dump stay task-agnostic.
class MultiAgentEnv {
 public:
  virtual ~MultiAgentEnv() = default;
  virtual int n_agents() const = 0;
  virtual int obs_dim() const = 0;
  virtual int n_actions() const = 0;
  virtual int step_cap() const = 0;
  virtual std::vector<std::vector<double>> reset(Rng& rng) = 0;
  virtual EnvStep step(const std::vector<int>& actions, Rng& rng) = 0;
  virtual nlohmann::json state_json() const = 0;
};

}  // namespace etcnet
