"""
Tests for the Green functions, the Poisson kernel and the 3G integrals.
"""

import math

import numpy as np
import pytest

from core.errors import InvalidArgumentError
from core.fields import ConstantField
from core.models import Ball, StableParams
from core.potential import (
    ball_green, c1_table, expected_exit_time, exit_probability_beyond, green, green_potential,
    small_ball_check, poisson_constant_report, poisson_harmonicity, poisson_kernel, poisson_mass,
    r0_of, r0_table, three_g_integral
)


def test_green_is_symmetric_with_a_pole(stable_3d):
    x, y = np.array([1.0, 0.0, 0.0]), np.array([0.0, 2.0, 0.0])
    assert green(stable_3d, x, y) == pytest.approx(green(stable_3d, y, x))
    assert green(stable_3d, x, np.zeros(3)) == pytest.approx(1.0 / (2.0 * math.pi ** 2))
    assert math.isinf(green(stable_3d, x, x))
    rows = green(stable_3d, np.zeros((2, 3)), np.array([[1.0, 0.0, 0.0], [2.0, 0.0, 0.0]]))
    assert rows[1] == pytest.approx(rows[0] / 2.0)


def test_recurrent_process_has_no_green_function():
    with pytest.raises(InvalidArgumentError):
        green(StableParams(d=1, alpha=1.5), [0.0], [1.0])


def test_green_potential_of_a_constant_diverges(stable_3d, quad):
    assert math.isinf(green_potential(stable_3d, ConstantField(1.0), [0.0, 0.0, 0.0], quad))


def test_ball_green_lies_below_the_free_green(stable_3d):
    ball = Ball(center=(0.0, 0.0, 0.0), radius=2.0)
    x, y = np.array([0.5, 0.0, 0.0]), np.array([-0.5, 0.3, 0.0])
    value = ball_green(stable_3d, ball, x, y)
    assert 0.0 < value < green(stable_3d, x, y)
    assert value == pytest.approx(ball_green(stable_3d, ball, y, x))
    with pytest.raises(InvalidArgumentError):
        ball_green(stable_3d, ball, x, np.array([3.0, 0.0, 0.0]))


def test_expected_exit_time():
    cauchy = StableParams(d=1, alpha=1.0)
    assert expected_exit_time(cauchy, Ball(center=(0.0,), radius=1.0), [0.0]) == pytest.approx(1.0)
    riesz = StableParams(d=3, alpha=1.0)
    small = expected_exit_time(riesz, Ball(center=(0.0, 0.0, 0.0), radius=1.0), [0.5, 0.0, 0.0])
    large = expected_exit_time(riesz, Ball(center=(0.0, 0.0, 0.0), radius=1.0), [0.0, 0.0, 0.0])
    assert 0.0 < small < large
    with pytest.raises(InvalidArgumentError):
        expected_exit_time(cauchy, Ball(center=(0.0,), radius=1.0), [1.0])


@pytest.mark.parametrize("d,alpha", [(1, 0.5), (2, 1.5), (3, 1.0)])
def test_poisson_constant_matches_the_closed_form(d, alpha, quad):
    report = poisson_constant_report(StableParams(d=d, alpha=alpha), quad)
    assert report.closed_form_rel_error < 1e-6
    assert report.unnormalized_over_numeric > 1.0


@pytest.mark.parametrize("d,alpha", [(1, 0.5), (3, 1.0)])
def test_poisson_kernel_has_unit_mass(d, alpha, quad):
    params = StableParams(d=d, alpha=alpha)
    x = np.zeros(d)
    x[0] = 0.3
    assert poisson_mass(params, 1.0, x, quad) == pytest.approx(1.0, abs=1e-3)


def test_exit_probability_beyond_decreases(stable_3d, quad):
    x = [0.3, 0.0, 0.0]
    near = exit_probability_beyond(stable_3d, 1.0, x, 2.0, quad)
    far = exit_probability_beyond(stable_3d, 1.0, x, 4.0, quad)
    assert 0.0 < far < near < 1.0


def test_poisson_kernel_arguments(stable_1d, quad):
    assert poisson_kernel(stable_1d, 1.0, [0.0], np.array([2.0]), quad) > 0.0
    with pytest.raises(InvalidArgumentError):
        poisson_kernel(stable_1d, 1.0, [1.5], np.array([2.0]), quad)
    with pytest.raises(InvalidArgumentError):
        poisson_kernel(stable_1d, 1.0, [0.0], np.array([0.5]), quad)
    with pytest.raises(InvalidArgumentError):
        poisson_mass(stable_1d, 1.0, [0.0], quad, beyond=0.5)


def test_green_function_is_harmonic_inside_the_ball(stable_3d, quad):
    integral, target = poisson_harmonicity(stable_3d, 1.0, 3.0, quad)
    assert integral == pytest.approx(target, rel=1e-3)
    with pytest.raises(InvalidArgumentError):
        poisson_harmonicity(stable_3d, 1.0, 1.5, quad)


def test_three_g_integral(stable_1d, quad):
    value = three_g_integral(stable_1d, [0.2], [-0.3], 1.0, quad)
    assert math.isfinite(value) and value > 0.0
    with pytest.raises(InvalidArgumentError):
        three_g_integral(stable_1d, [0.2], [0.2], 1.0, quad)
    with pytest.raises(InvalidArgumentError):
        three_g_integral(stable_1d, [0.2], [-0.3], 0.5, quad)
    with pytest.raises(InvalidArgumentError):
        three_g_integral(stable_1d, [1.2], [-0.3], 1.0, quad)


def test_r0_formula(stable_1d, quad):
    assert r0_of(2.0, stable_1d, 1.0, 0.5, quad, c1=4.0) == pytest.approx(0.0625)
    assert r0_of(1.0, stable_1d, 2.0, 0.25, quad, c1=1.0) == pytest.approx(0.5)
    with pytest.raises(InvalidArgumentError):
        r0_of(0.0, stable_1d, 1.0, 0.5, quad, c1=1.0)
    with pytest.raises(InvalidArgumentError):
        r0_of(1.0, stable_1d, 0.4, 0.5, quad, c1=1.0)


def test_small_balls_keep_the_conditioned_sum_below_eps(stable_1d, quad):
    report = small_ball_check(stable_1d, 1.0, 1.0, 0.5, quad)
    assert report.passed
    assert report.radius == pytest.approx(report.r0 / 2.0)
    assert report.max_value < 0.5


def test_constant_tables(quad):
    rows = c1_table([(1, 0.5, 1.0)], quad)
    assert len(rows) == 1
    assert rows[0]["c1"] > 0.0
    assert rows[0]["mesh"] == quad.mesh
    r0_rows = r0_table([(1, 0.5, 1.0)], 1.0, 0.5, quad)
    assert r0_rows[0]["r0"] == pytest.approx(0.5 / rows[0]["c1"])
