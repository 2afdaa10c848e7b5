"""
Tests for the kernel families, their class tags and Levy-integral fields.
"""

import math

import numpy as np
import pytest

from core.errors import InvalidArgumentError
from core.kernels import (
    FIELD_INTEGRANDS, FieldKind, annulus_kernel, counterexample_balls, counterexample_kernel, fuchsian_kernel,
    h_field, kernel_from_choice, sandwich_constants, scaled_kernel, square_h_field, root_ball_kernel,
    truncated_power_h, truncated_power_kernel, verify_kernel, zero_kernel
)
from core.models import KernelChoice, KernelSymmetry, KernelTagKind, StableParams


def test_zero_kernel():
    F = zero_kernel()
    assert F.is_zero
    np.testing.assert_array_equal(F.eval(np.ones((3, 2)), np.zeros((3, 2))), np.zeros(3))


def test_fuchsian_kernel_values():
    F = fuchsian_kernel(2.0, 1.0)
    x, y = np.array([[1.0, 0.0]]), np.array([[0.0, 0.0]])
    assert F.eval(x, y)[0] == pytest.approx(2.0 * 1.0 / (1.0 + 1.0 + 0.0))
    assert F.eval(y, x)[0] == F.eval(x, y)[0]
    assert F.eval(x, x)[0] == 0.0
    assert F.symmetry == KernelSymmetry.RADIAL
    assert F.tag(KernelTagKind.FUCHSIAN).C == 2.0


def test_decaying_fuchsian_carries_a_larger_constant():
    F = fuchsian_kernel(1.0, 0.5, decay=2.0)
    assert F.tag(KernelTagKind.FUCHSIAN).C == 3.0
    assert F.parameters["decay"] == 2.0


@pytest.mark.parametrize("factory", [
    lambda: zero_kernel(),
    lambda: fuchsian_kernel(1.0, 1.5),
    lambda: fuchsian_kernel(1.0, 0.5),
    lambda: fuchsian_kernel(0.5, 1.5, decay=2.0),
    lambda: fuchsian_kernel(0.5, 0.5, decay=2.0),
    lambda: truncated_power_kernel(0.5, 1.0),
    lambda: annulus_kernel(-0.5, 1.0, 2.0),
])
@pytest.mark.parametrize("d", [1, 3])
def test_verify_kernel_accepts_the_families(factory, d):
    report = verify_kernel(factory(), d, n_pairs=2000, seed=d)
    assert report.passed, report


def test_verify_kernel_on_the_ball_constructions(stable_1d):
    assert verify_kernel(counterexample_kernel(stable_1d, 0.25, 1.0), 1, n_pairs=2000, seed=1).passed
    report = verify_kernel(root_ball_kernel(stable_1d, 0.125, 0.5), 1, n_pairs=2000, seed=2)
    assert report.passed
    assert report.max_value > 0.0


def test_verify_kernel_catches_a_false_bound():
    F = truncated_power_kernel(1.0, 1.0).model_copy(update={"upper_bound": 0.1})
    assert not verify_kernel(F, 2, n_pairs=500, seed=0).passed


def test_counterexample_balls(stable_1d):
    balls = counterexample_balls(stable_1d, 0.25, 4)
    assert balls[0] == (1, 16.0, 9.0)
    assert balls[1] == (2, 256.0, 65.0)
    terms = [(r / c) ** 0.5 for _, c, r in balls]
    assert terms[0] == pytest.approx(0.75)
    assert sum(terms) == pytest.approx(1.86, abs=0.01)
    assert sum(terms) <= 1.0 / (1.0 - 2.0 ** -0.5)


def test_counterexample_kernel_lives_on_the_balls(stable_1d):
    F = counterexample_kernel(stable_1d, 0.25, 1.0)
    inside = F.eval(np.array([[16.0]]), np.array([[16.5]]))[0]
    assert inside == pytest.approx(0.5 / (16.0 ** 0.25 + 16.5 ** 0.25))
    assert F.eval(np.array([[0.0]]), np.array([[0.5]]))[0] == 0.0
    assert F.eval(np.array([[16.0]]), np.array([[18.0]]))[0] == 0.0


def test_ball_constructions_check_their_exponents(stable_1d, stable_3d):
    with pytest.raises(InvalidArgumentError):
        counterexample_kernel(stable_3d, 0.25, 1.5)
    with pytest.raises(InvalidArgumentError):
        counterexample_kernel(stable_1d, 0.25, 0.4)
    with pytest.raises(InvalidArgumentError):
        root_ball_kernel(stable_1d, 0.3, 0.5)


def test_scaled_kernel():
    F = scaled_kernel(fuchsian_kernel(1.0, 1.0), 0.5)
    assert F.upper_bound == pytest.approx(0.5)
    assert F.tag(KernelTagKind.IC_BETA).C == pytest.approx(0.5)
    with pytest.raises(InvalidArgumentError):
        scaled_kernel(fuchsian_kernel(1.0, 1.0), -2.0)


def test_kernel_from_choice(stable_1d):
    assert kernel_from_choice(KernelChoice(name="zero"), stable_1d).is_zero
    F = kernel_from_choice(KernelChoice(name="annulus", value=0.5, scale=2.0), stable_1d)
    assert F.upper_bound == pytest.approx(1.0)
    with pytest.raises(InvalidArgumentError):
        kernel_from_choice(KernelChoice(name="gaussian"), stable_1d)


def test_entropy_sandwich_constants():
    lo, hi = sandwich_constants(FIELD_INTEGRANDS[FieldKind.ENTROPY_H], 0.0, 1.0)
    assert lo == pytest.approx(1.0 - math.log(2.0), rel=1e-3)
    assert 0.5 <= hi < 0.51
    with pytest.raises(InvalidArgumentError):
        sandwich_constants(FIELD_INTEGRANDS[FieldKind.ENTROPY_H], -1.0, 1.0)


@pytest.mark.parametrize("d,alpha", [(1, 0.5), (3, 1.0)])
def test_h_field_matches_the_closed_form(d, alpha, quad):
    params = StableParams(d=d, alpha=alpha)
    F = truncated_power_kernel(0.5, 1.5)
    value = h_field(params, F, np.zeros(d), quad)
    assert value == pytest.approx(truncated_power_h(params, 0.5, 1.5), rel=1e-3)


def test_h_field_with_a_cutoff_is_smaller(stable_1d, quad):
    F = truncated_power_kernel(0.5, 1.5)
    full = h_field(stable_1d, F, [0.0], quad)
    cut = h_field(stable_1d, F, [0.0], quad, cutoff=0.5)
    assert 0.0 < cut < full


def test_annulus_square_field(stable_1d, quad):
    F = annulus_kernel(0.5, 1.0, 2.0)
    value = square_h_field(stable_1d, F, [3.0], quad)
    expected = stable_1d.levy_const * 2.0 * 0.25 * (1.0 - 2.0 ** -0.5) / 0.5
    assert value == pytest.approx(expected, rel=1e-3)


def test_diverging_near_diagonal_is_rejected(quad):
    params = StableParams(d=1, alpha=1.5)
    with pytest.raises(InvalidArgumentError):
        h_field(params, fuchsian_kernel(1.0, 1.0), [0.0], quad)
