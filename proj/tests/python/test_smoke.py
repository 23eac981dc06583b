"""Smoke tests for the python module: budget math, environments, and a
miniature end-to-end training run."""

import json
import math

import pytest

etcnet = pytest.importorskip("etcnet")


def test_budget_reproduces_published_numbers():
    nav = etcnet.derive_budget(170, 2, 6, 45, 2, 0.69, gamma=0.95)
    assert 0.49 <= nav["p_sup"] <= 0.52
    assert nav["c_sup"] == pytest.approx(nav["p_sup"] / 0.05)
    assert nav["entropy_bound"] == pytest.approx(math.log(2 * math.pi * math.e * 0.69))

    pp = etcnet.derive_budget(580, 2, 15, 45, 3, 0.330, gamma=0.95)
    assert 0.325 <= pp["p_sup"] <= 0.34


def test_penalty_threshold_and_lambda_update():
    assert etcnet.penalty_threshold(0.5, 0.95) == pytest.approx(10.0)
    assert etcnet.lambda_update(0.5, 0.1, 12.0, 10.0) == pytest.approx(0.7)
    assert etcnet.lambda_update(0.05, 0.1, 0.0, 10.0) == 0.0


def test_mlp_forward_shapes_and_softmax():
    net = etcnet.Mlp.random_init([6, 20, 5], ["relu", "softmax"], seed=1)
    out = net.forward([0.1, 0.2, 0.3, 0.4, 0.5, 0.6])
    assert len(out) == 5
    assert sum(out) == pytest.approx(1.0, abs=1e-9)

    zero = etcnet.Mlp([4, 3], ["softmax"])
    assert zero.forward([1.0, 2.0, 3.0, 4.0]) == pytest.approx([1 / 3] * 3)


def test_entropy():
    assert etcnet.categorical_entropy([0.2] * 5) == pytest.approx(math.log(5))
    assert etcnet.categorical_entropy([1.0, 0.0]) == 0.0


def test_nav_env_observation_contract():
    env = etcnet.NavEnv(grid_size=10)
    rng = etcnet.Rng(7)
    obs = env.reset(rng)
    assert len(obs) == 2 and all(len(o) == 6 for o in obs)
    assert all(0.0 <= v <= 1.0 for o in obs for v in o)

    rewards, obs2, done, info = env.step([0, 4], rng)
    assert len(rewards) == 2 and len(obs2) == 2
    assert isinstance(done, bool)
    assert set(json.loads(info)) == {"reached", "dest_moved"}


def test_pp_env_observation_contract():
    env = etcnet.PpEnv(grid_size=10, n_predators=3)
    rng = etcnet.Rng(3)
    obs = env.reset(rng)
    assert len(obs) == 3 and all(len(o) == 52 for o in obs)
    rewards, obs2, done, info = env.step([0, 1, 2], rng)
    assert len(rewards) == 3
    assert json.loads(env.state())["step"] == 1


def test_env_determinism():
    def rollout(seed):
        env = etcnet.NavEnv()
        rng = etcnet.Rng(seed)
        env.reset(rng)
        trace = []
        for t in range(30):
            rewards, _, done, _ = env.step([t % 5, (t + 2) % 5], rng)
            trace.extend(rewards)
            if done:
                env.reset(rng)
        return trace

    assert rollout(11) == rollout(11)
    assert rollout(11) != rollout(12)


def test_pca_collinear_second_axis():
    obs = [[t, 2 * t, -t] for t in range(8)]
    result = etcnet.pca2d(obs)
    assert all(abs(p[1]) < 1e-8 for p in result["points"])


def test_tiny_training_round_trip(tmp_path):
    config = {
        "training": {
            "total_steps": 320,
            "eval_cadence": 320,
            "eval_episodes": 2,
            "measure_steps": 32,
        }
    }
    s1 = etcnet.run_stage1(config, seed=5, out_dir=tmp_path / "s1")
    assert s1["steps_run"] == 320
    assert (tmp_path / "s1" / "metrics.csv").exists()
    assert s1["final_send_prob"] == 1.0

    config["stage1_checkpoint"] = s1["checkpoint_dir"]
    s2 = etcnet.run_stage2(config, seed=5, out_dir=tmp_path / "s2")
    assert s2["final_p_sup"] > 0.0
    assert (tmp_path / "s2" / "lambda_trace.csv").exists()

    report = etcnet.evaluate_checkpoint(s2["checkpoint_dir"], episodes=3, seed=1)
    assert report["episodes"] == 3
    assert 0.0 <= report["send_prob"] <= 1.0


def test_config_error_surfaces():
    with pytest.raises(etcnet.ConfigError):
        etcnet.run_stage1({"budget": {"bandwidth": -1}}, seed=0, out_dir="/tmp/never")
