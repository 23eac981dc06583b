"""Event-triggered multi-agent communication under a bandwidth budget.

Thin python surface over the C++ core: budget calculus, the two gridworld
tasks, the two-stage trainer and checkpoint evaluation.
"""

import json as _json

from etcnet._core import (  # noqa: F401
    ConfigError,
    DivergenceError,
    Mlp,
    NavEnv,
    PpEnv,
    Rng,
    categorical_entropy,
    categorical_sample,
    derive_budget,
    evaluate_checkpoint,
    gaussian_entropy_bound,
    lambda_update,
    pca2d,
    penalty_threshold,
    sending_probability_bound,
    shaped_reward,
    td_error,
)
from etcnet import _core


def _as_config_json(config):
    if config is None:
        return ""
    if isinstance(config, str):
        return config
    return _json.dumps(config)


def run_stage1(config=None, seed=0, out_dir="runs/stage1"):
    """Train encoder/actor/critic at full communication."""
    return _core.run_stage1(_as_config_json(config), seed, str(out_dir))


def run_stage2(config=None, seed=0, out_dir="runs/stage2"):
    """Train the gating policy against the bandwidth budget."""
    return _core.run_stage2(_as_config_json(config), seed, str(out_dir))


def run_baseline(config=None, seed=0, out_dir="runs/baseline"):
    """Train a fixed-gating baseline (full / none / dropout)."""
    return _core.run_baseline(_as_config_json(config), seed, str(out_dir))
