"""
Tests for the field accessors used by the compensators.
"""

import numpy as np
import pytest

from core.fields import ConstantField, MemoizedField, RadialField, levy_field
from core.kernels import FieldKind, fuchsian_kernel, truncated_power_h, truncated_power_kernel, zero_kernel


def test_constant_field():
    values = ConstantField(0.25)(np.zeros((4, 3)))
    np.testing.assert_array_equal(values, np.full(4, 0.25))


def test_radial_field_interpolates_and_extrapolates():
    profile = lambda p: 1.0 / (1.0 + float(p @ p))
    field = RadialField.tabulate(profile, 2, r_max=100.0, n_radii=40)
    grid_point = np.array([[field.radii[10], 0.0]])
    assert field(grid_point)[0] == pytest.approx(profile(grid_point[0]))
    assert field(np.array([[0.0, 3.0]]))[0] == pytest.approx(0.1, rel=1e-2)
    far = field(np.array([[1000.0, 0.0], [2000.0, 0.0]]))
    assert far[1] == pytest.approx(far[0] / 4.0, rel=1e-2)


def test_radial_field_needs_the_origin():
    with pytest.raises(ValueError):
        RadialField(np.array([0.1, 1.0, 2.0, 3.0]), np.ones(4))


def test_memoized_field_computes_each_point_once():
    calls = []

    def compute(point):
        calls.append(point.copy())
        return float(point.sum())

    field = MemoizedField(compute)
    points = np.array([[1.0, 2.0], [1.0, 2.0], [0.5, 0.0]])
    np.testing.assert_array_equal(field(points), [3.0, 3.0, 0.5])
    field(points)
    assert len(calls) == 2
    assert field.size == 2


def test_levy_field_picks_the_accessor(stable_1d, quad):
    assert isinstance(levy_field(stable_1d, zero_kernel(), FieldKind.H, quad), ConstantField)
    field = levy_field(stable_1d, truncated_power_kernel(0.5, 1.5), FieldKind.H, quad)
    assert isinstance(field, ConstantField)
    assert field.value == pytest.approx(truncated_power_h(stable_1d, 0.5, 1.5), rel=1e-3)
    radial = levy_field(stable_1d, fuchsian_kernel(1.0, 1.5, decay=2.0), FieldKind.H, quad, r_max=100.0, n_radii=12)
    assert isinstance(radial, RadialField)
    values = radial(np.array([[0.0], [10.0], [100.0]]))
    assert np.all(values > 0.0)
    assert values[2] < values[1]
