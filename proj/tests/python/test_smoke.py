"""Python binding smoke tests: import, registry, dynamics, small synth."""

import math

import numpy as np
import pytest

import _shieldsynth as ss

FAST_CONFIG = """{
  "env": "pendulum-v1",
  "seed": 11,
  "bo": {"init_points": 3, "iterations": 3, "eval_episodes": 6, "eval_steps": 300},
  "eval": {"episodes": 10, "steps": 300}
}"""


def test_environment_registry():
    names = ss.environments()
    assert len(names) == 8
    assert "pendulum-v1" in names
    assert "platoon4" in names


def test_pendulum_linearization_matches_reference():
    A, B = ss.infer_dynamics("pendulum-v1")
    assert A.shape == (2, 2)
    assert abs(A[0, 0] - 1.9027) < 1e-3
    assert abs(A[0, 1] + 1.0) < 1e-3
    assert abs(A[1, 0] - 1.0) < 1e-3
    assert abs(B[0, 0] - 1.0) < 1e-3


def test_step_and_sampling_deterministic():
    s0 = ss.sample_initial("pendulum-v1", 7)
    assert np.array_equal(s0, ss.sample_initial("pendulum-v1", 7))
    nxt = ss.step("pendulum-v1", np.zeros(2), np.zeros(1))
    assert np.array_equal(nxt, np.zeros(2))


def test_shield_roundtrip_and_runtime():
    text = (
        "def shield(c, x1, x2):\n"
        "    K = -1.91256926*x1 + 0.98893131*x2\n"
        "    if abs(c - K) > 0.21988415:\n"
        "        return K\n"
        "    return c\n"
    )
    sh = ss.Shield.parse(text)
    assert sh.lambda_ == pytest.approx(0.21988415)
    cmd, intervened = sh.command(np.array([0.1, 0.05]), np.array([0.1]))
    k = -1.91256926 * 0.1 + 0.98893131 * 0.05
    if abs(0.1 - k) > 0.21988415:
        assert intervened and cmd[0] == k
    else:
        assert not intervened and cmd[0] == 0.1
    again = ss.Shield.parse(sh.emit())
    assert again.emit() == sh.emit()
    assert ss.Shield.from_json(sh.to_json()).lambda_ == sh.lambda_


def test_synthesize_and_evaluate_small_budget():
    out = ss.synthesize("pendulum-v1", FAST_CONFIG)
    sh = out["shield"]
    assert out["outer_iterations"] >= 1
    assert out["moas_horizon"] >= 0
    assert math.isfinite(sh.lambda_)

    shielded = ss.evaluate(
        "pendulum-v1", sh, episodes=10, steps=300, seed=3, config_json=FAST_CONFIG
    )
    assert shielded["episodes"] == 10
    assert shielded["violations"] >= 0
    assert shielded["necessary_interventions"] <= shielded["interventions"]


def test_errors_are_typed():
    with pytest.raises(ss.ConfigError):
        ss.synthesize("not-a-benchmark", "")
    with pytest.raises(ss.ShieldParseError):
        ss.Shield.parse("def shield(q):\n")
