"""
Tests for the pydantic models and process constants.
"""

import math

import numpy as np
import pytest
from pydantic import ValidationError

from core.errors import InvalidArgumentError
from core.kernels import fuchsian_kernel
from core.models import (
    Annulus, Ball, ExperimentConfig, GaugeEstimate, JumpPath, McEstimate, StableParams, TiltedPathConfig
)


def test_cauchy_levy_constant():
    assert StableParams(d=1, alpha=1.0).levy_const == pytest.approx(1.0 / math.pi)


def test_riesz_constant_in_three_dimensions(stable_3d):
    assert stable_3d.green_const == pytest.approx(1.0 / (2.0 * math.pi ** 2))


def test_recurrent_process_has_no_green_function():
    params = StableParams(d=1, alpha=1.5)
    assert params.green_const is None
    assert not params.is_transient
    with pytest.raises(InvalidArgumentError):
        params.require_transient()


def test_big_jump_rate():
    params = StableParams(d=1, alpha=1.0)
    assert params.big_jump_rate(1.0) == pytest.approx(2.0 / math.pi)
    assert params.big_jump_rate(0.25) == pytest.approx(4.0 * params.big_jump_rate(1.0))
    with pytest.raises(InvalidArgumentError):
        params.big_jump_rate(0.0)


def test_alpha_range_is_validated():
    with pytest.raises(ValidationError):
        StableParams(d=2, alpha=2.0)
    with pytest.raises(ValidationError):
        StableParams(d=0, alpha=1.0)


def test_jump_path_rejects_unordered_times():
    with pytest.raises(ValidationError):
        JumpPath(
            start=[0.0], horizon=1.0, times=[0.5, 0.3],
            pre=[[0.0], [1.0]], post=[[1.0], [2.0]], end=[2.0], cutoff=0.1
        )


def test_jump_path_rejects_null_jumps():
    with pytest.raises(ValidationError):
        JumpPath(start=[0.0], horizon=1.0, times=[0.5], pre=[[1.0]], post=[[1.0]], end=[1.0], cutoff=0.1)


def test_jump_path_views(one_jump_path):
    assert one_jump_path.d == 1
    assert one_jump_path.n_jumps == 1
    np.testing.assert_allclose(one_jump_path.jumps, [[2.0]])
    np.testing.assert_allclose(one_jump_path.knot_positions, [[0.0], [2.0]])
    np.testing.assert_allclose(one_jump_path.holding_times, [0.5, 0.5])
    event = one_jump_path.events[0]
    assert event.time == 0.5 and event.pre == (0.0,) and event.post == (2.0,)


def test_jump_path_is_immutable(one_jump_path):
    with pytest.raises(ValueError):
        one_jump_path.times[0] = 0.1


def test_mc_estimate_from_samples():
    estimate = McEstimate.from_samples([1.0, 2.0, 3.0, 4.0])
    assert estimate.mean == pytest.approx(2.5)
    assert estimate.std_err == pytest.approx(np.std([1, 2, 3, 4], ddof=1) / 2.0)
    assert estimate.ci95 == pytest.approx(1.96 * estimate.std_err)
    assert estimate.within(2.5)
    with pytest.raises(InvalidArgumentError):
        McEstimate.from_samples([1.0])


def test_mc_estimate_with_infinite_sample():
    estimate = McEstimate.from_samples([1.0, math.inf])
    assert math.isinf(estimate.std_err)


def test_ball_and_annulus_membership():
    ball = Ball(center=(0.0, 0.0), radius=1.0)
    inside = ball.contains(np.array([[0.5, 0.0], [1.0, 0.0], [0.0, 2.0]]))
    assert inside.tolist() == [True, False, False]
    assert Ball.whole_space(2).contains(np.array([[1e9, 1e9]])).all()
    shell = Annulus(center=(0.0,), inner=1.0, outer=2.0)
    assert shell.contains(np.array([[1.5], [0.5], [-1.5]])).tolist() == [True, False, True]
    with pytest.raises(ValidationError):
        Annulus(center=(0.0,), inner=2.0, outer=1.0)


def test_tilted_config_needs_a_dominating_bound(stable_1d):
    F = fuchsian_kernel(1.0, 1.0)
    with pytest.raises(ValidationError):
        TiltedPathConfig(base=stable_1d, F=F, dominating_bound=1.5, cutoff=0.1, horizon=1.0)
    config = TiltedPathConfig.for_kernel(stable_1d, F, 0.1, 1.0)
    assert config.dominating_bound == pytest.approx(1.0 + F.upper_bound)


def test_experiment_config_drops_derived_constants():
    config = ExperimentConfig.model_validate({
        "experiment": "validate",
        "params": {"d": 1, "alpha": 0.5, "levy_const": 123.0},
    })
    assert config.params.levy_const != 123.0
    np.testing.assert_array_equal(config.start_point(), [0.0])


def test_experiment_config_checks_start_dimension():
    with pytest.raises(ValidationError):
        ExperimentConfig.model_validate({
            "experiment": "gauge", "params": {"d": 3, "alpha": 1.0}, "start": [0.0, 0.0]
        })


def test_experiment_config_rejects_unknown_keys():
    with pytest.raises(ValidationError):
        ExperimentConfig.model_validate({"experiment": "validate", "params": {"d": 1, "alpha": 0.5}, "colour": 1})


def test_gauge_estimate_lies_in_unit_interval():
    with pytest.raises(ValidationError):
        GaugeEstimate(x=(0.0,), u_hat=McEstimate(mean=1.5, std_err=0.01, n=10), horizon_used=1.0, tail_flag=0.0)
