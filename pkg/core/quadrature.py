"""
Radial-angular quadrature shared by the kernel fields and the potential operators.
Polar integrals around a point: a spherical rule for the angle and adaptive
panels in the radius, with substitutions that absorb the known power singularities.
"""

import logging
import math
from functools import lru_cache
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel
from scipy import integrate, special

from .errors import InvalidArgumentError, NumericFailure
from .models import QuadratureSpec, sphere_area

logger = logging.getLogger(__name__)

MAX_ANGULAR_DIMENSION = 3


class QuadratureResult(BaseModel):
    """Value of a radial integral; divergent results carry value = +inf."""
    value: float
    error: float
    divergent: bool = False
    panels: int = 0


@lru_cache(maxsize=64)
def angular_rule(d: int, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Nodes on the unit sphere of R^d and weights summing to its area.

    d = 1 uses the two points +-1, d = 2 the midpoint rule in the angle and
    d = 3 Gauss-Legendre in cos(theta) times the midpoint rule in phi.
    """
    if d == 1:
        nodes, weights = np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    elif d == 2:
        m = 2 * n
        theta = 2.0 * np.pi * (np.arange(m) + 0.5) / m
        nodes = np.column_stack([np.cos(theta), np.sin(theta)])
        weights = np.full(m, 2.0 * np.pi / m)
    elif d == 3:
        t, wt = special.roots_legendre(n)
        m = 2 * n
        phi = 2.0 * np.pi * (np.arange(m) + 0.5) / m
        s = np.sqrt(1.0 - t ** 2)
        nodes = np.column_stack([
            np.outer(s, np.cos(phi)).ravel(),
            np.outer(s, np.sin(phi)).ravel(),
            np.repeat(t, m),
        ])
        weights = np.outer(wt, np.full(m, 2.0 * np.pi / m)).ravel()
    else:
        raise InvalidArgumentError(f"angular quadrature is available for d <= {MAX_ANGULAR_DIMENSION}, got d={d}")
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


@lru_cache(maxsize=64)
def axial_rule(d: int, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Rule for functions on the sphere that depend only on the first coordinate.

    Returns nodes t in [-1, 1] and weights with
    integral of f(omega) = sum_j w_j f(t_j e1 + sqrt(1 - t_j^2) e2).
    """
    if d == 1:
        t, w = np.array([1.0, -1.0]), np.array([1.0, 1.0])
    else:
        a = (d - 3) / 2.0
        t, w = special.roots_jacobi(n, a, a)
        w = w * sphere_area(d - 1)
    t.setflags(write=False)
    w.setflags(write=False)
    return t, w


def axial_points(t: np.ndarray, d: int) -> np.ndarray:
    """Unit vectors t e1 + sqrt(1 - t^2) e2 in R^d."""
    points = np.zeros((len(t), d))
    points[:, 0] = t
    if d > 1:
        points[:, 1] = np.sqrt(np.clip(1.0 - t ** 2, 0.0, None))
    return points


@lru_cache(maxsize=32)
def legendre_rule(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [0, 1]."""
    x, w = special.roots_legendre(n)
    return 0.5 * (x + 1.0), 0.5 * w


def adaptive(
    fn: Callable[[float], float],
    a: float,
    b: float,
    quad: QuadratureSpec,
    points: Sequence[float] = ()
) -> Tuple[float, float, bool]:
    """
    scipy quad with the laboratory's tolerances.

    Returns:
        (value, error estimate, whether the error meets the tolerance)
    """
    if b <= a:
        return 0.0, 0.0, True
    kwargs = dict(epsabs=quad.abs_tol, epsrel=quad.tol, limit=quad.max_refine, full_output=1)
    inner = sorted(p for p in points if a < p < b)
    if inner and math.isfinite(b):
        kwargs["points"] = inner
    out = integrate.quad(fn, a, b, **kwargs)
    value, error = float(out[0]), float(out[1])
    ok = error <= 10.0 * max(quad.tol * abs(value), quad.abs_tol) or len(out) < 4
    return value, error, ok


def radial_integral(
    shell: Callable[[float], float],
    exponent: float,
    quad: QuadratureSpec,
    lower: float = 0.0,
    upper: float = math.inf,
    near_power: Optional[float] = None,
    split: float = 1.0,
    shell_bound: Optional[float] = None,
    breakpoints: Sequence[float] = (),
    label: str = "radial"
) -> QuadratureResult:
    """
    Integral of r^exponent * shell(r) over (lower, upper).

    Near zero the substitution u = r^near_power is used, so the integrand is
    bounded when shell(r) = O(r^(near_power - 1 - exponent)). Beyond `split`
    an infinite range is handled by
      * the substitution r = split v^(-1/tau), tau = -1 - exponent, with
        panels in v and a tail bound from `shell_bound`, or
      * geometric panels in r with ratio extrapolation, declaring divergence
        when the panels stop decaying.

    Raises:
        NumericFailure: A finite piece missed its tolerance
    """
    total, error, panels = 0.0, 0.0, 0
    failures: List[str] = []

    near_hi = min(split, upper)
    if lower < near_hi:
        if near_power is not None and near_power > 0:
            p = near_power

            def near(u: float) -> float:
                r = u ** (1.0 / p)
                if r <= 0.0:
                    return 0.0
                return shell(r) * r ** (exponent + 1.0 - p) / p

            value, err, ok = adaptive(near, lower ** p, near_hi ** p, quad, [b ** p for b in breakpoints])
        else:
            value, err, ok = adaptive(lambda r: r ** exponent * shell(r), lower, near_hi, quad, breakpoints)
        total, error = total + value, error + err
        if not ok:
            failures.append(f"near segment ({lower:g}, {near_hi:g})")

    far_lo = max(lower, split)
    if far_lo < upper and math.isfinite(upper):
        value, err, ok = adaptive(lambda r: r ** exponent * shell(r), far_lo, upper, quad, breakpoints)
        total, error = total + value, error + err
        if not ok:
            failures.append(f"segment ({far_lo:g}, {upper:g})")
    elif far_lo < upper:
        tau = -1.0 - exponent
        if shell_bound is not None and tau > 0:
            value, err, panels, ok = _power_tail(shell, far_lo, tau, shell_bound, quad, total)
        else:
            value, err, panels, ok = _geometric_tail(shell, exponent, far_lo, quad, total, label)
            if not ok:
                logger.warning(f"{label}: tail panels do not decay, flagged divergent after {panels} panels")
                return QuadratureResult(value=math.inf, error=math.inf, divergent=True, panels=panels)
        total, error = total + value, error + err
        if not ok:
            failures.append("tail")

    if failures:
        raise NumericFailure(
            f"{label}: tolerance {quad.tol:g} not met on {', '.join(failures)}",
            partial_value=total, error_estimate=error, diagnostics={"failed": failures}
        )
    return QuadratureResult(value=total, error=error, panels=panels)


def _power_tail(
    shell: Callable[[float], float],
    a: float,
    tau: float,
    shell_bound: float,
    quad: QuadratureSpec,
    running: float
) -> Tuple[float, float, int, bool]:
    """Tail of r^(-1-tau) shell(r) over (a, inf) via r = a v^(-1/tau)."""
    factor = a ** (-tau) / tau
    fn = lambda v: factor * shell(a * v ** (-1.0 / tau))
    value, error, ok = 0.0, 0.0, True
    hi = 1.0
    for k in range(quad.max_panels):
        lo = hi / 2.0
        v, err, panel_ok = adaptive(fn, lo, hi, quad)
        value, error, ok = value + v, error + err, ok and panel_ok
        hi = lo
        remainder = factor * shell_bound * hi
        if remainder <= 0.5 * max(quad.tol * abs(running + value), quad.abs_tol):
            return value, error + remainder, k + 1, ok
    return value, error + factor * shell_bound * hi, quad.max_panels, ok


def _geometric_tail(
    shell: Callable[[float], float],
    exponent: float,
    a: float,
    quad: QuadratureSpec,
    running: float,
    label: str
) -> Tuple[float, float, int, bool]:
    """
    Tail over (a, inf) by panels [a 2^k, a 2^(k+1)] with geometric extrapolation.

    The last flag is False when the panels do not decay (divergence).
    """
    fn = lambda r: r ** exponent * shell(r)
    value, error = 0.0, 0.0
    history: List[float] = []
    zeros = 0
    for k in range(quad.max_panels):
        lo, hi = a * 2.0 ** k, a * 2.0 ** (k + 1)
        v, err, _ = adaptive(fn, lo, hi, quad)
        value, error = value + v, error + err
        history.append(abs(v))
        zeros = zeros + 1 if v == 0.0 else 0
        if zeros >= 3 and k >= 3:
            return value, error, k + 1, True
        if k < 3 or history[-2] == 0.0:
            continue
        ratios = [history[i] / history[i - 1] for i in range(len(history) - 3, len(history)) if history[i - 1] > 0]
        if not ratios:
            continue
        q = ratios[-1]
        if k >= 8 and len(ratios) == 3 and min(ratios) >= 0.98:
            return value, error, k + 1, False
        if q < 1.0:
            remainder = history[-1] * q / (1.0 - q)
            if remainder <= 0.5 * max(quad.tol * abs(running + value), quad.abs_tol):
                logger.debug(f"{label}: tail converged after {k + 1} panels")
                return value + math.copysign(remainder, v), error + remainder, k + 1, True
    return value, error, quad.max_panels, False
