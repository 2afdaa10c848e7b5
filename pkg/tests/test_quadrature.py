"""
Tests for the radial-angular quadrature.
"""

import math

import numpy as np
import pytest

from core.errors import InvalidArgumentError
from core.models import QuadratureSpec, sphere_area
from core.quadrature import adaptive, angular_rule, axial_rule, legendre_rule, radial_integral


@pytest.mark.parametrize("d", [1, 2, 3])
def test_angular_weights_sum_to_sphere_area(d):
    nodes, weights = angular_rule(d, 8)
    assert weights.sum() == pytest.approx(sphere_area(d))
    np.testing.assert_allclose(np.linalg.norm(nodes, axis=1), 1.0)


def test_angular_rule_stops_at_three_dimensions():
    with pytest.raises(InvalidArgumentError):
        angular_rule(4, 8)


@pytest.mark.parametrize("d", [2, 3, 5])
def test_axial_weights_sum_to_sphere_area(d):
    _, weights = axial_rule(d, 12)
    assert weights.sum() == pytest.approx(sphere_area(d))


def test_sphere_area_values():
    assert sphere_area(1) == pytest.approx(2.0)
    assert sphere_area(2) == pytest.approx(2.0 * math.pi)
    assert sphere_area(3) == pytest.approx(4.0 * math.pi)


def test_legendre_rule_on_unit_interval():
    x, w = legendre_rule(6)
    assert w.sum() == pytest.approx(1.0)
    assert np.all((x > 0.0) & (x < 1.0))
    assert float(w @ x ** 5) == pytest.approx(1.0 / 6.0)


def test_adaptive_on_an_empty_range(quad):
    assert adaptive(lambda r: 1.0, 2.0, 1.0, quad) == (0.0, 0.0, True)


def test_power_tail_substitution(quad):
    result = radial_integral(lambda r: 1.0, -2.0, quad, lower=1.0, shell_bound=1.0)
    assert not result.divergent
    assert result.value == pytest.approx(1.0, rel=1e-4)


def test_geometric_tail_extrapolation(quad):
    result = radial_integral(lambda r: 1.0, -3.0, quad, lower=1.0)
    assert result.value == pytest.approx(0.5, rel=1e-6)


def test_non_decaying_tail_is_flagged_divergent():
    result = radial_integral(lambda r: 1.0, -1.0, QuadratureSpec(), lower=1.0)
    assert result.divergent
    assert math.isinf(result.value)


def test_near_singularity_is_absorbed(quad):
    # integral of r^(-1/2) over (0, 1)
    result = radial_integral(lambda r: 1.0, -0.5, quad, upper=1.0, near_power=0.5)
    assert result.value == pytest.approx(2.0, rel=1e-6)


def test_non_integrable_exponents_are_rejected():
    with pytest.raises(InvalidArgumentError):
        QuadratureSpec(singularity_exponents=[-3.5]).check_exponents(3)
    QuadratureSpec(singularity_exponents=[-2.0]).check_exponents(3)
