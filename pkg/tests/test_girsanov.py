"""
Tests for the transformed process: thinning, entropies and the dichotomy diagnostic.
"""

import math

import numpy as np
import pytest

from core.errors import InvalidArgumentError, InvariantViolation
from core.girsanov import (
    TiltedPathSampler, ball_series_diverges, ball_series_total, counterexample_divergence, dichotomy_diagnostic,
    entropy_P_vs_Ptilde,
    entropy_Ptilde_vs_P, green_sandwich_check, importance_sampling_check, jump_rate_comparison,
    sample_tilted_path, verdict_of
)
from core.kernels import (
    annulus_kernel, counterexample_kernel, fuchsian_kernel, root_ball_kernel, truncated_power_kernel, zero_kernel
)
from core.models import Ball, KernelSpec, TiltedPathConfig, Verdict
from core.montecarlo import path_stream
from core.stable_process import StablePathSampler


def test_zero_kernel_reproduces_the_base_paths(stable_3d):
    starts = np.zeros((4, 3))
    seeds = [11, 12, 13, 14]
    base = StablePathSampler(stable_3d, 0.05).sample(starts, seeds, 0.0, 2.0)
    tilted = TiltedPathSampler.for_kernel(stable_3d, zero_kernel(), 0.05).sample(starts, seeds, 0.0, 2.0)
    for b, t in zip(base, tilted):
        np.testing.assert_allclose(t.times, b.times)
        np.testing.assert_allclose(t.post, b.post)
        np.testing.assert_allclose(t.end, b.end)


def test_single_tilted_path(stable_1d):
    config = TiltedPathConfig.for_kernel(stable_1d, truncated_power_kernel(0.5, 1.0), 0.1, 5.0)
    assert config.dominating_bound == pytest.approx(1.5)
    path = sample_tilted_path(config, [0.0], path_stream(2), seed=2)
    assert path.horizon == 5.0
    assert np.all(np.linalg.norm(path.jumps, axis=1) >= 0.1)
    with pytest.raises(InvalidArgumentError):
        sample_tilted_path(config, [0.0, 0.0], path_stream(2))


def test_understated_bound_is_caught(stable_1d):
    liar = KernelSpec(name="liar", offset_fn=lambda x, w: np.full(len(x), 0.5), lower_bound=0.0, upper_bound=0.0)
    sampler = TiltedPathSampler.for_kernel(stable_1d, liar, 0.1)
    with pytest.raises(InvariantViolation):
        sampler.sample(np.zeros((1, 1)), [1], 0.0, 10.0)


def test_positive_kernel_raises_the_jump_rate(stable_1d):
    report = jump_rate_comparison(
        stable_1d, truncated_power_kernel(1.0, 1.0), Ball.whole_space(1), [0.0], 200, 4, 0.1, 10.0, workers=1
    )
    assert report.tilted_exceeds
    assert report.tilted_rate > 1.3 * report.base_rate


def test_verdict_thresholds():
    assert verdict_of(1.0) == Verdict.CONVERGENT_ALL
    assert verdict_of(0.95) == Verdict.CONVERGENT_ALL
    assert verdict_of(0.5) == Verdict.MIXED
    assert verdict_of(0.05) == Verdict.DIVERGENT_ALL
    assert verdict_of(0.0) == Verdict.DIVERGENT_ALL


def test_zero_kernel_is_convergent(stable_1d):
    report = dichotomy_diagnostic(stable_1d, zero_kernel(), [0.0], 1.0, 50, 2, 3, cutoff=0.1, workers=1)
    assert report.verdict == Verdict.CONVERGENT_ALL
    assert report.horizons == [1.0, 2.0, 4.0]
    assert len(report.qv) == 50


def test_dichotomy_rejects_an_unknown_law(stable_1d):
    with pytest.raises(InvalidArgumentError):
        dichotomy_diagnostic(stable_1d, zero_kernel(), [0.0], 1.0, 10, 1, 3, cutoff=0.1, under="other")


def test_zero_kernel_weights_are_one(stable_1d, quad):
    report = importance_sampling_check(stable_1d, zero_kernel(), [0.0], 1.0, 100, 5, 0.1, quad, workers=1)
    assert report.weight_mean.mean == pytest.approx(1.0)
    assert report.weight_mean.std_err == pytest.approx(0.0, abs=1e-15)
    assert {row.name for row in report.rows} == {"half_space", "unit_ball"}


def test_zero_kernel_entropies_vanish(stable_1d, quad):
    forward = entropy_P_vs_Ptilde(stable_1d, zero_kernel(), [0.0], 1.0, 50, 6, quad, cutoff=0.1, workers=1)
    assert forward.pathwise.mean == 0.0
    assert forward.green == 0.0
    assert forward.agree
    reverse = entropy_Ptilde_vs_P(stable_1d, zero_kernel(), [0.0], 1.0, 50, 6, quad, cutoff=0.1, workers=1)
    assert reverse.tilted.mean == 0.0
    assert reverse.within_sandwich
    assert reverse.cross_check


def test_zero_kernel_green_sandwich(stable_1d):
    report = green_sandwich_check(stable_1d, zero_kernel(), [1.0], [(0.5, 3.0)], 100, 8, 0.1, 2.0, workers=1)
    assert report.constant == 1.0
    assert report.passed
    assert report.rows[0].ratio == pytest.approx(1.0)


def test_counterexample_without_balls(stable_1d, quad):
    report = counterexample_divergence(stable_1d, 0.25, 1.0, 0, quad)
    assert report.balls == []
    assert report.hitting_sum == 0.0
    assert not report.divergent
    assert report.geometric_majorant == pytest.approx(1.0 / (1.0 - 2.0 ** -0.5))
    with pytest.raises(InvalidArgumentError):
        counterexample_divergence(stable_1d, 0.25, 1.0, 1, quad, kind="other")


def test_ball_series_decision():
    assert ball_series_diverges([2.4, 2.06, 2.01])
    assert math.isinf(ball_series_total([2.4, 2.06, 2.01]))
    assert not ball_series_diverges([1.0])
    assert ball_series_total([1.0]) == 1.0
    assert not ball_series_diverges([1.0, 0.4, 0.2])
    assert ball_series_total([1.0, 0.4, 0.2]) == pytest.approx(1.6 + 0.2)
    assert math.isinf(ball_series_total([1.0, 0.3, 0.31]))


def test_dichotomy_needs_a_doubling(stable_1d):
    with pytest.raises(InvalidArgumentError):
        dichotomy_diagnostic(stable_1d, annulus_kernel(0.5), [0.0], 1.0, 10, 0, 3, cutoff=0.5, workers=1)


def test_decaying_fuchsian_kernel_is_convergent(stable_3d):
    F = fuchsian_kernel(1.0, 1.0, decay=2.0)
    report = dichotomy_diagnostic(stable_3d, F, [0.0, 0.0, 0.0], 10.0, 100, 1, 11, cutoff=0.1, workers=1)
    assert report.verdict == Verdict.CONVERGENT_ALL


def test_annulus_kernel_is_divergent(stable_1d):
    report = dichotomy_diagnostic(stable_1d, annulus_kernel(0.5), [0.0], 40.0, 50, 1, 12, cutoff=0.5, workers=1)
    assert report.verdict == Verdict.DIVERGENT_ALL
    assert all(row[-1] > row[0] for row in report.qv)


def test_weights_of_a_positive_kernel(stable_1d, quad):
    report = importance_sampling_check(
        stable_1d, truncated_power_kernel(0.5, 1.0), [0.0], 1.0, 400, 5, 0.1, quad, k=4.0, workers=1
    )
    assert report.weight_mean.within(1.0, 4.0, 1e-9)
    assert all(row.agree for row in report.rows)


def test_reverse_entropy_sandwich_for_a_positive_kernel(stable_1d, quad):
    report = entropy_Ptilde_vs_P(
        stable_1d, truncated_power_kernel(0.5, 1.0), [0.0], 1.0, 40, 6, quad, cutoff=0.1, doublings=1, workers=1
    )
    lo, hi = report.sandwich
    assert 0.0 < lo < hi
    assert report.qv.mean > 0.0
    assert report.tilted.mean > 0.0
    assert report.within_sandwich


@pytest.mark.slow
def test_ball_entropy_is_finite_for_the_ball_kernel_and_infinite_for_its_root(stable_1d, quad):
    finite = entropy_P_vs_Ptilde(
        stable_1d, counterexample_kernel(stable_1d, 0.25, 1.0), [0.0], 1.0, 20, 6, quad,
        cutoff=0.1, doublings=1, n_balls=3, workers=1
    )
    assert len(finite.partial_sums) == 3
    assert math.isfinite(finite.green)
    assert finite.green >= finite.partial_sums[-1]
    assert finite.green_matched == finite.green
    infinite = entropy_P_vs_Ptilde(
        stable_1d, root_ball_kernel(stable_1d, 0.2, 0.6), [0.0], 1.0, 20, 6, quad,
        cutoff=0.1, doublings=1, n_balls=2, workers=1
    )
    assert len(infinite.partial_sums) == 2
    assert math.isinf(infinite.green)
    assert infinite.agree is None
    with pytest.raises(InvalidArgumentError):
        entropy_P_vs_Ptilde(
            stable_1d, counterexample_kernel(stable_1d, 0.25, 1.0), [0.0], 1.0, 10, 6, quad, cutoff=0.1, n_balls=1
        )


@pytest.mark.slow
def test_every_ball_adds_at_least_half_of_the_first(stable_1d, quad):
    report = counterexample_divergence(stable_1d, 0.25, 1.0, 4, quad)
    assert len(report.contributions) == 4
    assert report.above_half_first
    assert report.divergent
    assert report.majorant_holds
    assert report.hitting_sum <= report.geometric_majorant


@pytest.mark.slow
def test_root_ball_kernel_is_absolutely_continuous_with_infinite_entropy(stable_1d, quad):
    F = root_ball_kernel(stable_1d, 0.2, 0.6)
    report = dichotomy_diagnostic(stable_1d, F, [0.0], 0.5, 100, 1, 3, cutoff=0.1, workers=1)
    assert report.verdict == Verdict.CONVERGENT_ALL
    entropy = counterexample_divergence(stable_1d, 0.2, 0.6, 2, quad, kind="root_ball")
    assert entropy.divergent
