#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <cmath>

#include "etcnet/env_nav.hpp"
#include "etcnet/env_pp.hpp"

using namespace etcnet;

namespace {

// Brute-force prey move: recompute the best escape move from scratch.
int oracle_prey_move(const PpEnv& env, int prey) {
  const int g = env.config().grid_size;
  int best = -1;
  long best_d = -1;
  for (int mv = 0; mv < kNumMoves; ++mv) {
    const GridPos next = wrapped_move(env.prey_pos(prey), mv, g);
    long nearest = 1 << 30;
    for (int p = 0; p < env.config().n_predators; ++p)
      nearest = std::min<long>(nearest, toroidal_sq_dist(next, env.predator_pos(p), g));
    if (nearest > best_d) {
      best_d = nearest;
      best = mv;
    }
  }
  return best;
}

}  // namespace

TEST_SUITE("envs") {

TEST_CASE("nav reset is deterministic and uses distinct cells") {
  NavEnv a({10, 100, 0.1}), b({10, 100, 0.1});
  Rng ra(4), rb(4);
  const auto oa = a.reset(ra);
  const auto ob = b.reset(rb);
  CHECK(oa == ob);
  CHECK(a.agent_pos(0) == b.agent_pos(0));
  CHECK(a.dest_pos(1) == b.dest_pos(1));
  CHECK_FALSE(a.agent_pos(0) == a.agent_pos(1));
  CHECK_FALSE(a.dest_pos(0) == a.dest_pos(1));
}

TEST_CASE("nav observation shows the other agent's destination") {
  NavEnv env({10, 100, 0.0});
  Rng rng(17);
  const auto obs = env.reset(rng);
  REQUIRE(obs[0].size() == 6);
  const double denom = 9.0;
  CHECK(obs[0][0] == doctest::Approx(env.agent_pos(0).x / denom));
  CHECK(obs[0][1] == doctest::Approx(env.agent_pos(0).y / denom));
  CHECK(obs[0][2] == doctest::Approx(env.agent_pos(1).x / denom));
  CHECK(obs[0][3] == doctest::Approx(env.agent_pos(1).y / denom));
  // The destination in view is the OTHER agent's, never its own.
  CHECK(obs[0][4] == doctest::Approx(env.dest_pos(1).x / denom));
  CHECK(obs[0][5] == doctest::Approx(env.dest_pos(1).y / denom));
  CHECK(obs[1][4] == doctest::Approx(env.dest_pos(0).x / denom));
  for (const auto& o : obs)
    for (double v : o) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
}

TEST_CASE("nav rewards and termination") {
  NavEnv env({10, 100, 0.0});  // destinations never move
  Rng rng(23);
  env.reset(rng);

  // Walk agent 0 onto its destination with stay for agent 1.
  for (int guard = 0; guard < 50; ++guard) {
    const GridPos a = env.agent_pos(0), d = env.dest_pos(0);
    if (a == d) break;
    int mv = kStay;
    if (a.x < d.x) mv = kRight;
    else if (a.x > d.x) mv = kLeft;
    else if (a.y < d.y) mv = kUp;
    else mv = kDown;
    const EnvStep out = env.step({mv, kStay}, rng);
    const bool on_dest = env.agent_pos(0) == env.dest_pos(0);
    CHECK(out.rewards[0] == doctest::Approx(on_dest ? 1.0 : -0.1));
  }
  CHECK(env.agent_pos(0) == env.dest_pos(0));
}

TEST_CASE("nav clamps at walls") {
  NavEnv env({10, 100, 0.0});
  Rng rng(3);
  env.reset(rng);
  // Push both agents into the left wall until pinned.
  for (int i = 0; i < 12; ++i) env.step({kLeft, kLeft}, rng);
  CHECK(env.agent_pos(0).x == 0);
  CHECK(env.agent_pos(1).x == 0);
  const EnvStep out = env.step({kLeft, kLeft}, rng);
  CHECK(env.agent_pos(0).x == 0);
  const bool on_dest = env.agent_pos(0) == env.dest_pos(0);
  CHECK(out.rewards[0] == doctest::Approx(on_dest ? 1.0 : -0.1));
}

TEST_CASE("nav ends when both agents sit on their destinations") {
  NavEnv env({10, 100, 0.0});
  Rng rng(29);
  env.reset(rng);
  auto drive = [&](int agent) {
    const GridPos a = env.agent_pos(agent), d = env.dest_pos(agent);
    if (a.x < d.x) return (int)kRight;
    if (a.x > d.x) return (int)kLeft;
    if (a.y < d.y) return (int)kUp;
    if (a.y > d.y) return (int)kDown;
    return (int)kStay;
  };
  bool done = false;
  for (int guard = 0; guard < 60 && !done; ++guard) done = env.step({drive(0), drive(1)}, rng).done;
  CHECK(done);
  CHECK(env.agent_pos(0) == env.dest_pos(0));
  CHECK(env.agent_pos(1) == env.dest_pos(1));
}

TEST_CASE("nav rejects bad actions") {
  NavEnv env({10, 100, 0.1});
  Rng rng(5);
  env.reset(rng);
  CHECK_THROWS_AS(env.step({5, 0}, rng), std::invalid_argument);
  CHECK_THROWS_AS(env.step({-1, 0}, rng), std::invalid_argument);
}

TEST_CASE("toroidal axis delta") {
  CHECK(std::abs(toroidal_axis_delta(1, 9, 10)) == 2);
  CHECK(toroidal_axis_delta(1, 9, 10) == -2);  // wrapping left is shorter
  CHECK(toroidal_axis_delta(4, 4, 10) == 0);
  CHECK(toroidal_delta({3, 7}, {3, 7}, 10) == std::array<int, 2>{0, 0});

  Rng rng(31);
  for (int i = 0; i < 1000; ++i) {
    const int g = 4 + rng.uniform_int(13);
    const GridPos a{rng.uniform_int(g), rng.uniform_int(g)};
    const GridPos b{rng.uniform_int(g), rng.uniform_int(g)};
    const auto ab = toroidal_delta(a, b, g);
    const auto ba = toroidal_delta(b, a, g);
    CHECK(ab[0] == -ba[0]);
    CHECK(ab[1] == -ba[1]);
    CHECK(std::abs(ab[0]) * 2 <= g);
    CHECK(std::abs(ab[1]) * 2 <= g);
    // Deltas land on the target modulo the grid.
    CHECK(((a.x + ab[0]) % g + g) % g == b.x);
    CHECK(((a.y + ab[1]) % g + g) % g == b.y);
  }
}

TEST_CASE("prey runs from an adjacent predator") {
  PpEnv env({10, 2, 1, 200});
  env.set_positions({{4, 5}, {0, 0}}, {{5, 5}});  // predator directly left
  CHECK(env.prey_policy(0) == kRight);
}

TEST_CASE("prey tie-break follows the fixed action order") {
  PpEnv env({10, 2, 1, 200});
  env.set_positions({{3, 5}, {7, 5}}, {{5, 5}});  // equidistant left and right
  CHECK(env.prey_policy(0) == kUp);               // up and down tie; up is first
}

TEST_CASE("prey move matches the enumeration oracle") {
  Rng rng(47);
  for (int trial = 0; trial < 3000; ++trial) {
    PpEnv env({6, 2, 1, 200});
    const GridPos prey{rng.uniform_int(6), rng.uniform_int(6)};
    GridPos p1{rng.uniform_int(6), rng.uniform_int(6)};
    GridPos p2{rng.uniform_int(6), rng.uniform_int(6)};
    if (p1 == prey || p2 == prey) continue;  // already captured
    env.set_positions({p1, p2}, {prey});
    CHECK(env.prey_policy(0) == oracle_prey_move(env, 0));
  }
}

TEST_CASE("pp observation layout and lengths") {
  PpEnv env({10, 3, 1, 200});
  env.set_positions({{5, 5}, {6, 5}, {0, 0}}, {{5, 6}});
  const auto obs = env.observation(0);
  REQUIRE(obs.size() == 52);
  // Window cell (dx, dy) maps to index (dy+2)*5 + (dx+2).
  CHECK(obs[(1 + 2) * 5 + (0 + 2)] == 1.0);        // prey one cell up
  CHECK(obs[25 + (0 + 2) * 5 + (1 + 2)] == 1.0);   // predator one cell right
  CHECK(obs[25 + (0 + 2) * 5 + (0 + 2)] == 0.0);   // own cell is not a neighbour flag
  CHECK(obs[50] == doctest::Approx(5.0 / 9.0));
  CHECK(obs[51] == doctest::Approx(5.0 / 9.0));
  // Far-away predator at (0,0) is outside the 5x5 view.
  int set = 0;
  for (int c = 25; c < 50; ++c) set += obs[c] > 0.5;
  CHECK(set == 1);
}

TEST_CASE("pp capture pays every predator and kills the prey") {
  PpEnv env({10, 2, 1, 200});
  // Predator 0 moves right onto the prey's cell before the prey can flee.
  env.set_positions({{4, 5}, {0, 0}}, {{5, 5}});
  Rng rng(1);
  const EnvStep out = env.step({kRight, kStay}, rng);
  CHECK_FALSE(env.prey_alive(0));
  CHECK(out.done);
  CHECK(out.rewards[0] == doctest::Approx(10.0 - 0.05));
  CHECK(out.rewards[1] == doctest::Approx(10.0 - 0.05));
  CHECK(out.info.at("captures").get<int>() == 1);
}

TEST_CASE("pp collision penalizes both parties") {
  PpEnv env({10, 2, 1, 200});
  env.set_positions({{4, 5}, {6, 5}}, {{0, 0}});
  Rng rng(1);
  const EnvStep out = env.step({kRight, kLeft}, rng);  // both land on (5,5)
  CHECK(out.rewards[0] == doctest::Approx(-1.0 - 0.05));
  CHECK(out.rewards[1] == doctest::Approx(-1.0 - 0.05));
  CHECK(out.info.at("collisions").get<std::vector<int>>() == std::vector<int>{1, 1});
}

TEST_CASE("pp wraps across the torus edges") {
  PpEnv env({10, 2, 1, 200});
  env.set_positions({{0, 0}, {5, 5}}, {{8, 8}});
  Rng rng(1);
  env.step({kLeft, kStay}, rng);
  CHECK(env.predator_pos(0).x == 9);
}

TEST_CASE("pp observations are translation invariant on the torus") {
  Rng rng(61);
  for (int trial = 0; trial < 200; ++trial) {
    const int g = 10;
    const GridPos shift{rng.uniform_int(g), rng.uniform_int(g)};
    std::vector<GridPos> preds, shifted_preds;
    for (int i = 0; i < 3; ++i) {
      const GridPos p{rng.uniform_int(g), rng.uniform_int(g)};
      preds.push_back(p);
      shifted_preds.push_back({(p.x + shift.x) % g, (p.y + shift.y) % g});
    }
    const GridPos prey{rng.uniform_int(g), rng.uniform_int(g)};
    const GridPos shifted_prey{(prey.x + shift.x) % g, (prey.y + shift.y) % g};

    PpEnv a({g, 3, 1, 200}), b({g, 3, 1, 200});
    a.set_positions(preds, {prey});
    b.set_positions(shifted_preds, {shifted_prey});
    for (int i = 0; i < 3; ++i) {
      const auto oa = a.observation(i), ob = b.observation(i);
      // Local-view flags are identical; own coordinates differ by the shift.
      for (int c = 0; c < 50; ++c) CHECK(oa[c] == ob[c]);
    }

    Rng ra(7), rb(7);
    const std::vector<int> actions{kUp, kLeft, kStay};
    const EnvStep sa = a.step(actions, ra);
    const EnvStep sb = b.step(actions, rb);
    CHECK(sa.rewards == sb.rewards);
    CHECK(sa.done == sb.done);
  }
}

TEST_CASE("episodes are deterministic given seed and actions") {
  auto run = [](std::uint64_t seed) {
    NavEnv env({10, 100, 0.3});
    Rng rng(seed);
    std::vector<double> trace;
    auto obs = env.reset(rng);
    Rng actions(99);
    for (int t = 0; t < 60; ++t) {
      const EnvStep out = env.step({actions.uniform_int(5), actions.uniform_int(5)}, rng);
      trace.push_back(out.rewards[0]);
      trace.push_back(out.rewards[1]);
      for (const auto& o : out.obs) trace.insert(trace.end(), o.begin(), o.end());
      if (out.done) obs = env.reset(rng);
    }
    return trace;
  };
  CHECK(run(13) == run(13));
}

TEST_CASE("observation lengths are pinned per task") {
  NavEnv nav({10, 100, 0.1});
  PpEnv pp({10, 4, 2, 200});
  Rng rng(2);
  for (const auto& o : nav.reset(rng)) CHECK(o.size() == 6);
  for (const auto& o : pp.reset(rng)) CHECK(o.size() == 52);
  CHECK(pp.n_agents() == 4);
}

}  // TEST_SUITE
