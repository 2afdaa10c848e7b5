"""
Tests for stable increments, jump-resolved paths and path statistics.
"""

import math

import numpy as np
import pytest

from core.errors import InvalidArgumentError
from core.models import Annulus, Ball, SmallJumpPolicy, StableParams
from core.montecarlo import path_stream
from core.stable_process import (
    StablePathSampler, characteristic_check, concat_paths, exit_data, first_hit_time, hitting_prob_estimate,
    isotropy_check, occupation_time, path_from_record, path_to_record, position_at, positive_stable,
    sample_increment, sample_jump_path, truncation_bias
)


def test_positive_stable_is_positive():
    draws = positive_stable(0.25, 1000, path_stream(1))
    assert draws.shape == (1000,)
    assert np.all(draws > 0.0)


def test_sample_increment_shapes(stable_3d):
    assert sample_increment(stable_3d, 1.0, path_stream(2)).shape == (3,)
    assert sample_increment(stable_3d, 1.0, path_stream(2), size=7).shape == (7, 3)
    with pytest.raises(InvalidArgumentError):
        sample_increment(stable_3d, 0.0, path_stream(2))


def test_exact_increments_match_the_characteristic_function(stable_1d):
    rows = characteristic_check(stable_1d, 1.0, (0.5, 1.0, 2.0), n_draws=20_000, seed=3)
    assert all(row.passed for row in rows)
    assert rows[0].target == pytest.approx(math.exp(-0.5 ** 0.5))


def test_jump_path_is_reproducible(stable_3d):
    first = sample_jump_path(stable_3d, [0.0, 0.0, 0.0], 2.0, 0.05, SmallJumpPolicy.DROP, path_stream(9), seed=9)
    second = sample_jump_path(stable_3d, [0.0, 0.0, 0.0], 2.0, 0.05, SmallJumpPolicy.DROP, path_stream(9), seed=9)
    np.testing.assert_array_equal(first.times, second.times)
    np.testing.assert_array_equal(first.post, second.post)
    assert first.n_jumps > 0


def test_dropped_small_jumps_leave_only_long_jumps(stable_1d):
    path = sample_jump_path(stable_1d, [1.0], 5.0, 0.1, SmallJumpPolicy.DROP, path_stream(4))
    assert np.all(np.linalg.norm(path.jumps, axis=1) >= 0.1)
    np.testing.assert_allclose(path.end, path.post[-1] if path.n_jumps else path.start)
    np.testing.assert_allclose(path.pre[1:], path.post[:-1])


def test_brownian_match_moves_between_jumps(stable_1d):
    path = sample_jump_path(stable_1d, [0.0], 5.0, 0.1, SmallJumpPolicy.BROWNIAN_MATCH, path_stream(4))
    assert path.policy == SmallJumpPolicy.BROWNIAN_MATCH
    assert path.n_jumps > 0
    assert not np.allclose(path.pre[0], path.start)


def test_start_dimension_is_checked(stable_3d):
    with pytest.raises(InvalidArgumentError):
        sample_jump_path(stable_3d, [0.0], 1.0, 0.1, SmallJumpPolicy.DROP, path_stream(0))


def test_segments_join_into_one_path(stable_1d):
    first = sample_jump_path(stable_1d, [0.0], 1.0, 0.1, SmallJumpPolicy.DROP, path_stream(5, 0), seed=5)
    second = sample_jump_path(
        stable_1d, first.end, 2.0, 0.1, SmallJumpPolicy.DROP, path_stream(5, 1), seed=5, t0=1.0, segment=1
    )
    joined = concat_paths([first, second])
    assert joined.n_jumps == first.n_jumps + second.n_jumps
    assert joined.horizon == 2.0
    np.testing.assert_array_equal(joined.end, second.end)
    with pytest.raises(InvalidArgumentError):
        concat_paths([second, first])


def test_position_at(one_jump_path):
    np.testing.assert_array_equal(position_at(one_jump_path, 0.25), [0.0])
    np.testing.assert_array_equal(position_at(one_jump_path, 0.75), [2.0])
    with pytest.raises(InvalidArgumentError):
        position_at(one_jump_path, 2.0)


def test_exit_data(one_jump_path):
    exit_ = exit_data(one_jump_path, Ball(center=(0.0,), radius=1.0))
    assert exit_.exited
    assert exit_.tau == 0.5
    assert exit_.pre == (0.0,) and exit_.post == (2.0,)
    assert not exit_data(one_jump_path, Ball(center=(0.0,), radius=5.0)).exited
    assert not exit_data(one_jump_path, Ball.whole_space(1)).exited
    with pytest.raises(InvalidArgumentError):
        exit_data(one_jump_path, Ball(center=(5.0,), radius=1.0))


def test_first_hit_time(one_jump_path):
    assert first_hit_time(one_jump_path, Ball(center=(2.0,), radius=0.5)) == 0.5
    assert math.isinf(first_hit_time(one_jump_path, Ball(center=(-3.0,), radius=0.5)))


def test_occupation_time(one_jump_path):
    unit = Ball(center=(0.0,), radius=1.0)
    assert occupation_time(one_jump_path, unit) == pytest.approx(0.5)
    assert occupation_time(one_jump_path, unit, until=0.25) == pytest.approx(0.25)
    shell = Annulus(center=(0.0,), inner=1.0, outer=3.0)
    assert occupation_time(one_jump_path, shell) == pytest.approx(0.5)


def test_path_record_keeps_the_events(stable_3d):
    path = sample_jump_path(stable_3d, [1.0, 0.0, 0.0], 1.0, 0.05, SmallJumpPolicy.DROP, path_stream(3), seed=3)
    record = path_to_record(path)
    assert len(record["events"]) == path.n_jumps
    restored = path_from_record(record)
    np.testing.assert_array_equal(restored.post, path.post)
    assert restored.seed == 3


def test_truncation_bias_shrinks_with_the_cutoff(stable_1d):
    coarse = truncation_bias(stable_1d, 0.1, 1.0, 1.0)
    fine = truncation_bias(stable_1d, 0.001, 1.0, 1.0)
    assert coarse.exponent_small > fine.exponent_small > 0.0
    assert coarse.bias > fine.bias
    assert coarse.target == pytest.approx(math.exp(-1.0))


def test_isotropy_pvalues(stable_3d):
    result = isotropy_check(stable_3d, 1.0, 2000, seed=8)
    assert 0.0 <= result["norm_pvalue"] <= 1.0
    assert 0.0 <= result["coordinate_pvalue"] <= 1.0


def test_sampler_map_is_schedule_independent(stable_1d):
    sampler = StablePathSampler(stable_1d, 0.1)
    serial = sampler.map(lambda p: p.end[0], [0.0], 600, 17, 1.0, workers=1)
    threaded = sampler.map(lambda p: p.end[0], [0.0], 600, 17, 1.0, workers=3)
    assert serial == threaded


def test_hitting_estimate_needs_a_start_outside_the_target(stable_1d, stable_3d):
    with pytest.raises(InvalidArgumentError):
        hitting_prob_estimate(stable_1d, [0.0], Ball(center=(0.0,), radius=1.0), 1.0, 10, 1)
    with pytest.raises(InvalidArgumentError):
        hitting_prob_estimate(StableParams(d=1, alpha=1.5), [5.0], Ball(center=(0.0,), radius=1.0), 1.0, 10, 1)
    estimate = hitting_prob_estimate(stable_3d, [0.0, 0.0, 0.0], Ball.whole_space(3), 1.0, 10, 1)
    assert estimate.mean == 1.0
