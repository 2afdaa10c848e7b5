"""
Tests for the gauge estimates, the radial interpolant and the gauge identities.
"""

import math

import numpy as np
import pytest

from core.errors import InvalidArgumentError
from core.gauge import (
    GaugeInterpolant, build_gauge_interpolant, estimate_u, gauge_monotonicity_check, gauge_table, harnack_ratio_check,
    infinite_hitting_check, jensen_check, nested_gauge, u_integral_identity_check, u_limit_check,
    u_martingale_check
)
from core.kernels import annulus_kernel, counterexample_kernel, fuchsian_kernel, truncated_power_kernel, zero_kernel
from core.models import GaugeEstimate, McEstimate

FAST = {"cutoff": 0.1, "workers": 1}


def _synthetic(radii, values, std_err=0.01):
    return [
        GaugeEstimate(x=(r,), u_hat=McEstimate(mean=v, std_err=std_err, n=100), horizon_used=10.0, tail_flag=0.0)
        for r, v in zip(radii, values)
    ]


@pytest.fixture
def unit_gauge(stable_1d):
    return build_gauge_interpolant(
        stable_1d, zero_kernel(), 20, 1, radii=(0.0, 1.0, 2.0, 4.0), horizon=1.0, doublings=1, **FAST
    )


def test_zero_kernel_gauge_is_one(stable_1d):
    estimate = estimate_u(stable_1d, zero_kernel(), [0.0], 30, 2, horizon=1.0, **FAST)
    assert estimate.u_hat.mean == 1.0
    assert estimate.tail_flag == 0.0
    assert estimate.horizon_used == 1.0


def test_positive_kernel_gauge_is_below_one(stable_1d):
    estimate = estimate_u(stable_1d, annulus_kernel(1.0), [0.0], 50, 2, horizon=5.0, doublings=1, **FAST)
    assert 0.0 <= estimate.u_hat.mean < 1.0


def test_gauge_needs_a_non_negative_kernel(stable_1d):
    with pytest.raises(InvalidArgumentError):
        estimate_u(stable_1d, annulus_kernel(-0.5), [0.0], 10, 2, horizon=1.0, **FAST)


def test_gauge_estimate_stays_in_the_unit_interval():
    with pytest.raises(ValueError):
        GaugeEstimate(x=(0.0,), u_hat=McEstimate(mean=1.5, std_err=0.01, n=10), horizon_used=1.0, tail_flag=0.0)


def test_jensen_bound_for_the_zero_kernel(stable_1d):
    result = jensen_check(stable_1d, zero_kernel(), [0.0], 20, 3, green_value=0.0, horizon=1.0, **FAST)
    assert result.passed


def test_interpolant_on_log_linear_data():
    radii = [0.0, 1.0, 3.0, 7.0, 15.0]
    values = [1.0 - 0.1 * math.log1p(r) for r in radii]
    interpolant = GaugeInterpolant(radii=radii, estimates=_synthetic(radii, values), residual=0.0)
    np.testing.assert_allclose(interpolant(np.array([[3.0], [-7.0]])), [values[2], values[3]])
    assert interpolant(np.array([[100.0]]))[0] == pytest.approx(values[-1])
    assert interpolant.minimum == pytest.approx(values[-1])
    assert interpolant.budget == pytest.approx(0.01)


def test_zero_kernel_interpolant(unit_gauge):
    np.testing.assert_array_equal(unit_gauge.values, np.ones(4))
    assert unit_gauge.residual == 0.0
    np.testing.assert_allclose(unit_gauge(np.array([[0.5], [3.0], [50.0]])), 1.0)
    rows = gauge_table(unit_gauge)
    assert [row["r"] for row in rows] == [0.0, 1.0, 2.0, 4.0]
    assert all(row["u_hat"] == 1.0 for row in rows)


def test_interpolant_needs_a_radial_kernel(stable_1d):
    with pytest.raises(InvalidArgumentError):
        build_gauge_interpolant(stable_1d, counterexample_kernel(stable_1d, 0.25, 1.0), 10, 1, **FAST)


def test_nested_gauge_of_the_zero_kernel(stable_1d):
    u = nested_gauge(stable_1d, zero_kernel(), 5, 1, horizon=1.0, cutoff=0.1)
    np.testing.assert_array_equal(u(np.array([[0.0], [2.0]])), [1.0, 1.0])


def test_zero_kernel_identities(stable_1d, unit_gauge):
    F = zero_kernel()
    assert u_martingale_check(stable_1d, F, [0.5], 1.0, unit_gauge, 30, 4, **FAST).passed
    infinite = u_integral_identity_check(stable_1d, F, [0.5], unit_gauge, 30, 4, horizon=1.0, doublings=1, **FAST)
    assert infinite.passed
    assert infinite.values["grid_min_u"] == 1.0
    finite = u_integral_identity_check(stable_1d, F, [0.5], unit_gauge, 30, 4, horizon=1.0, t=2.0, **FAST)
    assert finite.passed
    assert finite.name == "u_integral_identity_finite"
    limit = u_limit_check(stable_1d, F, [0.5], unit_gauge, 30, 4, base_horizon=1.0, doublings=2, cutoff=0.1, workers=1)
    assert limit.monotone
    assert limit.fractions == [1.0, 1.0, 1.0]


def test_martingale_check_needs_positive_time(stable_1d, unit_gauge):
    with pytest.raises(InvalidArgumentError):
        u_martingale_check(stable_1d, zero_kernel(), [0.0], 0.0, unit_gauge, 10, 4, **FAST)


def test_larger_kernel_has_smaller_gauge(stable_1d):
    result = gauge_monotonicity_check(
        stable_1d, zero_kernel(), truncated_power_kernel(0.5, 1.0), [[0.0], [3.0]], 30, 5,
        horizon=1.0, doublings=1, **FAST
    )
    assert result.passed
    assert all(row["u_smaller"] >= row["u_larger"] for row in result.values["rows"])


@pytest.mark.slow
def test_transient_paths_visit_ever_more_annuli(stable_1d):
    report = infinite_hitting_check(stable_1d, 200, 9, 10.0, doublings=2, cutoff=0.01, workers=1)
    assert report.horizons == [10.0, 20.0, 40.0]
    assert report.increasing
    assert report.transient


def test_harnack_ratios_for_a_decaying_kernel(stable_3d):
    report = harnack_ratio_check(
        stable_3d, fuchsian_kernel(1.0, 1.0, decay=2.0), 30, 4, scales=(1.0, 2.0), horizon=2.0, doublings=1, **FAST
    )
    assert len(report.rows) == 2
    assert all(0.0 < e.mean <= 1.0 for row in report.rows for e in row.u)
    assert any(e.mean < 1.0 for e in report.rows[0].u)
    assert report.constant >= 1.0
    assert report.scale_invariant
    assert report.bounded_below


def test_gauge_along_paths_approaches_one(stable_3d):
    radii = [0.0, 1.0, 3.0, 7.0, 15.0]
    values = [1.0 - 0.2 / (1.0 + r) for r in radii]
    interpolant = GaugeInterpolant(radii=radii, estimates=_synthetic(radii, values), residual=0.0)
    report = u_limit_check(
        stable_3d, fuchsian_kernel(1.0, 1.0, decay=2.0), [0.5, 0.0, 0.0], interpolant, 200, 8,
        base_horizon=1.0, doublings=2, **FAST
    )
    assert report.horizons == [1.0, 2.0, 4.0]
    assert report.monotone
    assert report.fractions[-1] > report.fractions[0] + 0.2
