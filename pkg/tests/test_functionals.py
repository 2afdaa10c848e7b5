"""
Tests for the path functionals, the Doleans identities and the doubling driver.
"""

import math

import numpy as np
import pytest

from core.errors import InvalidArgumentError, InvariantViolation
from core.fields import ConstantField, levy_field
from core.functionals import (
    accumulate, accumulate_segments, bracket_check, compensator, doleans_exponential_pair_check,
    inverse_density_check, jump_sum, jump_values, levy_system_check, martingale_check, relative_flat_rule,
    run_doublings, sequence_equivalence_check, supermartingale_check, terminal_sample
)
from core.kernels import FieldKind, fuchsian_kernel, truncated_power_kernel, zero_kernel
from core.models import KernelSpec, SmallJumpPolicy
from core.montecarlo import path_stream
from core.stable_process import StablePathSampler, concat_paths, sample_jump_path


def test_jump_sums_on_a_single_jump(one_jump_path):
    F = truncated_power_kernel(0.5, 1.0)
    np.testing.assert_allclose(jump_values(one_jump_path, F), [0.5])
    assert jump_sum(one_jump_path, F, lambda f: f * f) == pytest.approx(0.25)


def test_accumulate_on_a_single_jump(one_jump_path):
    F = truncated_power_kernel(0.5, 1.0)
    series = accumulate(one_jump_path, F, ConstantField(0.3))
    np.testing.assert_allclose(series.times, [0.5, 1.0])
    np.testing.assert_allclose(series.A, [0.5, 0.5])
    np.testing.assert_allclose(series.compensator, [0.15, 0.3])
    np.testing.assert_allclose(series.M, [0.35, 0.2])
    np.testing.assert_allclose(series.QV, [0.25, 0.25])
    np.testing.assert_allclose(series.A_tilde, [1.0 - math.exp(-0.5)] * 2)
    terminal = series.terminal()
    assert terminal["logL"] == pytest.approx(0.2 + math.log(1.5) - 0.5)
    assert series.L[-1] == pytest.approx(math.exp(terminal["logL"]))


def test_jump_values_reject_a_killing_kernel(one_jump_path):
    bad = KernelSpec(name="bad", offset_fn=lambda x, w: np.full(len(x), -1.5), lower_bound=-0.9, upper_bound=0.0)
    with pytest.raises(InvariantViolation):
        jump_values(one_jump_path, bad)


def test_brownian_compensator_needs_parameters(stable_1d):
    path = sample_jump_path(stable_1d, [0.0], 1.0, 0.1, SmallJumpPolicy.BROWNIAN_MATCH, path_stream(1))
    with pytest.raises(InvalidArgumentError):
        compensator(path, ConstantField(1.0))
    assert compensator(path, ConstantField(1.0), stable_1d)[-1] == pytest.approx(1.0)


def test_doleans_pair_and_inverse_density_hold_pathwise(stable_3d):
    F = fuchsian_kernel(0.2, 1.5, decay=2.0)
    field = ConstantField(0.7)
    sampler = StablePathSampler(stable_3d, 0.05)
    for path in sampler.sample(np.zeros((5, 3)), [1, 2, 3, 4, 5], 0.0, 2.0):
        assert doleans_exponential_pair_check(path, F, field).passed
        assert inverse_density_check(path, F, field).passed


def test_doleans_pair_needs_small_kernel(one_jump_path):
    with pytest.raises(InvalidArgumentError):
        doleans_exponential_pair_check(one_jump_path, truncated_power_kernel(1.5, 1.0), ConstantField(0.0))


def test_segments_accumulate_like_the_joined_path(stable_1d):
    F = truncated_power_kernel(0.5, 1.0)
    field = ConstantField(0.2)
    first = sample_jump_path(stable_1d, [0.0], 1.0, 0.1, SmallJumpPolicy.DROP, path_stream(3, 0), seed=3)
    second = sample_jump_path(
        stable_1d, first.end, 3.0, 0.1, SmallJumpPolicy.DROP, path_stream(3, 1), seed=3, t0=1.0, segment=1
    )
    stitched = accumulate_segments([first, second], F, field).terminal()
    joined = accumulate(concat_paths([first, second]), F, field).terminal()
    for key, value in joined.items():
        assert stitched[key] == pytest.approx(value)


def test_sequence_equivalence_on_two_terms():
    report = sequence_equivalence_check([0.5, 0.5])
    assert report.sumsq == pytest.approx(0.5)
    assert report.sumsq_ratio == pytest.approx(2.0 / 9.0)
    assert report.product == pytest.approx((1.5 / 1.25 ** 2) ** 2)
    lo, hi = report.ratio_bounds
    assert lo == pytest.approx(1.0 / 2.25, rel=1e-6)
    assert hi == pytest.approx(1.0, abs=0.01)


def test_sequence_equivalence_for_inverse_square_roots():
    a = 1.0 / np.sqrt(np.arange(1, 10 ** 6 + 1))
    report = sequence_equivalence_check(a, (10 ** 2, 10 ** 4, 10 ** 6))
    products = [mark["product"] for mark in report.checkpoints]
    assert products[0] > products[1] > products[2]
    assert report.product < 0.05
    assert report.sumsq > 14.0
    assert report.product == pytest.approx(products[-1])


def test_sequence_equivalence_edge_cases():
    empty = sequence_equivalence_check([])
    assert empty.n == 0 and empty.product == 1.0
    with pytest.raises(InvalidArgumentError):
        sequence_equivalence_check([0.5, -1.0])


@pytest.mark.slow
def test_levy_system_identities_on_simulated_paths(stable_1d, quad):
    F = truncated_power_kernel(0.5, 1.5)
    cutoff = 0.1
    h_eval = levy_field(stable_1d, F, FieldKind.H, quad, cutoff)
    square = levy_field(stable_1d, F, FieldKind.SQUARE, quad, cutoff)
    sample = terminal_sample(
        StablePathSampler(stable_1d, cutoff), F, h_eval, [0.0], 2000, 101, 1.0, square_eval=square, workers=1
    )
    assert sample.A.shape == (2000,)
    assert sample.ends.shape == (2000, 1)
    np.testing.assert_allclose(sample.compensator, h_eval.value)
    assert levy_system_check(sample, k=4.0).passed
    assert martingale_check(sample).passed
    assert bracket_check(sample, k=4.0).passed
    assert supermartingale_check(sample).passed


def test_bracket_check_needs_the_square_compensator(stable_1d):
    sample = terminal_sample(StablePathSampler(stable_1d, 0.1), zero_kernel(), ConstantField(0.0), [0.0], 10, 1, 1.0)
    with pytest.raises(InvalidArgumentError):
        bracket_check(sample)


def test_doubling_stops_at_once_for_a_null_functional(stable_1d):
    run = run_doublings(
        StablePathSampler(stable_1d, 0.1), [0.0], 50, 5, 1.0, 4,
        lambda p: [0.0], relative_flat_rule(1e-3)
    )
    assert run.horizons == [1.0]
    assert run.flat_fraction == [1.0]
    assert run.tail_flag == 0.0


def test_doubling_values_do_not_depend_on_the_budget(stable_1d):
    sampler = StablePathSampler(stable_1d, 0.1)
    F = truncated_power_kernel(0.5, 1.0)
    increments = lambda p: [jump_sum(p, F)]
    short = run_doublings(sampler, [0.0], 300, 9, 1.0, 1, increments, relative_flat_rule(0.0), adaptive=False, workers=1)
    long = run_doublings(sampler, [0.0], 300, 9, 1.0, 2, increments, relative_flat_rule(0.0), adaptive=False, workers=3)
    assert long.horizons == [1.0, 2.0, 4.0]
    np.testing.assert_array_equal(long.values[:, :2, :], short.values)
    np.testing.assert_array_equal(long.ends[:, :2, :], short.ends)
    assert np.all(np.diff(long.values[:, :, 0], axis=1) >= 0.0)
