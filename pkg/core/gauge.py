"""
Gauge function u(x) = E_x[exp(-A_infinity)] of a non-negative kernel.
Direct estimates with adaptive horizons, a radial interpolant, and the
identity, limit, Harnack and hitting checks built on them.
"""

import logging
import math
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.interpolate import PchipInterpolator

from .errors import InvalidArgumentError
from .functionals import jump_sum, jump_values, relative_flat_rule, run_doublings
from .models import (
    CheckResult, GaugeEstimate, JumpPath, KernelSpec, KernelSymmetry, McEstimate, StableParams
)
from .stable_process import StablePathSampler

logger = logging.getLogger(__name__)

DEFAULT_RADII = (0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0)
HARNACK_SCALES = (1.0, 2.0, 4.0, 8.0)

GaugeFunction = Callable[[np.ndarray], np.ndarray]


def _require_nonnegative(F: KernelSpec) -> None:
    if F.lower_bound < 0.0:
        raise InvalidArgumentError(f"the gauge needs F >= 0, {F.name} has inf F = {F.lower_bound}")


def _gauge_run(
    params: StableParams,
    F: KernelSpec,
    x: Sequence[float],
    n_paths: int,
    master_seed: int,
    horizon: float,
    cutoff: float,
    doublings: int,
    tol: float,
    adaptive: bool,
    workers: Optional[int]
) -> Tuple[GaugeEstimate, McEstimate]:
    _require_nonnegative(F)
    run = run_doublings(
        StablePathSampler(params, cutoff), x, n_paths, master_seed, horizon, doublings,
        lambda p: [jump_sum(p, F)], relative_flat_rule(tol), adaptive=adaptive, workers=workers
    )
    A = run.final[:, 0]
    estimate = GaugeEstimate(
        x=tuple(float(v) for v in np.asarray(x, dtype=float).reshape(-1)),
        u_hat=McEstimate.from_samples(np.exp(-A)),
        horizon_used=run.horizons[-1],
        tail_flag=run.tail_flag
    )
    return estimate, McEstimate.from_samples(A)


def estimate_u(
    params: StableParams,
    F: KernelSpec,
    x: Sequence[float],
    n_paths: int,
    master_seed: int,
    horizon: float = 10.0,
    cutoff: float = 1e-3,
    doublings: int = 4,
    tol: float = 1e-3,
    adaptive: bool = True,
    workers: Optional[int] = None
) -> GaugeEstimate:
    """
    Monte Carlo mean of exp(-A_T), T doubled until A is flat on most paths.

    Since A only grows, the estimate can only overshoot u; tail_flag is the
    fraction of paths still moving at the last horizon.
    """
    return _gauge_run(params, F, x, n_paths, master_seed, horizon, cutoff, doublings, tol, adaptive, workers)[0]


def jensen_check(
    params: StableParams,
    F: KernelSpec,
    x: Sequence[float],
    n_paths: int,
    master_seed: int,
    green_value: Optional[float] = None,
    horizon: float = 10.0,
    cutoff: float = 1e-3,
    doublings: int = 4,
    tol: float = 1e-3,
    workers: Optional[int] = None
) -> CheckResult:
    """u_hat >= exp(-E A_T) and, given G h(x) = E A_infinity, u_hat >= exp(-G h(x))."""
    estimate, mean_A = _gauge_run(params, F, x, n_paths, master_seed, horizon, cutoff, doublings, tol, True, workers)
    u = estimate.u_hat
    slack = 3.0 * u.std_err
    passed = u.mean >= math.exp(-mean_A.mean) - slack
    detail = f"u_hat = {u.mean:.4f} +- {u.std_err:.2g}, exp(-E A) = {math.exp(-mean_A.mean):.4f}"
    if green_value is not None:
        passed = passed and u.mean >= math.exp(-green_value) - slack
        detail += f", exp(-Gh) = {math.exp(-green_value):.4f}"
    return CheckResult(
        name="gauge_jensen_bound",
        passed=passed,
        detail=detail,
        values={"u": u.model_dump(), "A": mean_A.model_dump(), "green": green_value, "tail_flag": estimate.tail_flag}
    )


class GaugeInterpolant(BaseModel):
    """
    Monotone cubic fit of u in log(1 + |x|) through direct estimates on a radial grid.

    Values beyond the last radius are held at the last estimate; the error
    budget is the leave-one-out residual plus the largest standard error.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    radii: List[float]
    estimates: List[GaugeEstimate]
    residual: float

    @property
    def values(self) -> np.ndarray:
        return np.array([e.u_hat.mean for e in self.estimates])

    @property
    def budget(self) -> float:
        return self.residual + max(e.u_hat.std_err for e in self.estimates)

    @property
    def minimum(self) -> float:
        return float(np.min(self.values))

    def __call__(self, points: np.ndarray) -> np.ndarray:
        r = np.linalg.norm(np.atleast_2d(points), axis=1)
        grid = np.log1p(np.asarray(self.radii))
        curve = PchipInterpolator(grid, self.values, extrapolate=False)
        out = curve(np.log1p(np.clip(r, self.radii[0], self.radii[-1])))
        return np.clip(out, 0.0, 1.0)


def _leave_one_out(radii: np.ndarray, values: np.ndarray) -> float:
    if len(radii) < 4:
        return 0.0
    grid = np.log1p(radii)
    worst = 0.0
    for i in range(1, len(radii) - 1):
        keep = np.arange(len(radii)) != i
        fit = PchipInterpolator(grid[keep], values[keep])
        worst = max(worst, abs(float(fit(grid[i])) - values[i]))
    return worst


def build_gauge_interpolant(
    params: StableParams,
    F: KernelSpec,
    n_paths: int,
    master_seed: int,
    radii: Sequence[float] = DEFAULT_RADII,
    horizon: float = 10.0,
    cutoff: float = 1e-3,
    doublings: int = 4,
    tol: float = 1e-3,
    workers: Optional[int] = None
) -> GaugeInterpolant:
    """Estimate u at r e1 for every grid radius (common random numbers) and fit the interpolant."""
    if F.symmetry not in (KernelSymmetry.RADIAL, KernelSymmetry.TRANSLATION):
        raise InvalidArgumentError(f"{F.name} is not radial; its gauge cannot be interpolated in |x|")
    grid = np.asarray(sorted(radii), dtype=float)
    if len(grid) < 2 or grid[0] < 0.0:
        raise InvalidArgumentError("need at least two non-negative radii")
    estimates = []
    for r in grid:
        point = np.zeros(params.d)
        point[0] = r
        estimates.append(estimate_u(params, F, point, n_paths, master_seed, horizon, cutoff, doublings, tol, workers=workers))
    values = np.array([e.u_hat.mean for e in estimates])
    residual = _leave_one_out(grid, values)
    logger.info(f"gauge interpolant for {F.name}: {len(grid)} radii, min u {values.min():.4f}, residual {residual:.2g}")
    return GaugeInterpolant(radii=grid.tolist(), estimates=estimates, residual=residual)


def nested_gauge(
    params: StableParams,
    F: KernelSpec,
    n_inner: int,
    master_seed: int,
    horizon: float = 10.0,
    cutoff: float = 1e-3,
    doublings: int = 4,
    tol: float = 1e-3
) -> GaugeFunction:
    """u by a small inner Monte Carlo run per point, for kernels without radial structure."""

    def evaluate(points: np.ndarray) -> np.ndarray:
        rows = np.atleast_2d(points)
        return np.array([
            estimate_u(params, F, p, n_inner, master_seed, horizon, cutoff, doublings, tol, workers=1).u_hat.mean
            for p in rows
        ])

    return evaluate


class GaugeIdentityReport(BaseModel):
    """Two estimates of u(x) that an identity says are equal."""
    name: str
    lhs: McEstimate
    rhs: McEstimate
    budget: float
    passed: bool
    values: Dict[str, float] = Field(default_factory=dict)


def _compare(name: str, lhs: McEstimate, rhs: McEstimate, budget: float, **values: float) -> GaugeIdentityReport:
    passed = abs(lhs.mean - rhs.mean) <= 3.0 * lhs.combined_error(rhs) + budget
    logger.info(f"{name}: {lhs.mean:.4f} vs {rhs.mean:.4f} (budget {budget:.2g}) -> {'ok' if passed else 'FAILED'}")
    return GaugeIdentityReport(name=name, lhs=lhs, rhs=rhs, budget=budget, passed=passed, values=values)


def u_martingale_check(
    params: StableParams,
    F: KernelSpec,
    x: Sequence[float],
    t: float,
    interpolant: GaugeInterpolant,
    n_paths: int,
    master_seed: int,
    cutoff: float = 1e-3,
    direct: Optional[GaugeEstimate] = None,
    workers: Optional[int] = None
) -> GaugeIdentityReport:
    """u(x) against E_x[u(X_t) exp(-A_t)], u at X_t from the interpolant."""
    _require_nonnegative(F)
    if t <= 0:
        raise InvalidArgumentError("t must be positive")
    if direct is None:
        direct = estimate_u(params, F, x, n_paths, master_seed + 1, cutoff=cutoff, workers=workers)
    sampler = StablePathSampler(params, cutoff)
    nested = sampler.map(
        lambda p: float(interpolant(p.end)[0]) * math.exp(-jump_sum(p, F)), x, n_paths, master_seed, t, workers
    )
    return _compare("u_martingale", McEstimate.from_samples(nested), direct.u_hat, interpolant.budget, t=t)


def u_integral_identity_check(
    params: StableParams,
    F: KernelSpec,
    x: Sequence[float],
    interpolant: GaugeInterpolant,
    n_paths: int,
    master_seed: int,
    horizon: float = 10.0,
    cutoff: float = 1e-3,
    doublings: int = 4,
    tol: float = 1e-3,
    t: Optional[float] = None,
    green_value: Optional[float] = None,
    direct: Optional[GaugeEstimate] = None,
    workers: Optional[int] = None
) -> GaugeIdentityReport:
    """
    u(x) against 1 - E_x of the sum of u(X_s)(1 - exp(-F)) over all jumps.

    With `t`, checks u(x) = E_x[u(X_t) - sum over s <= t of u(X_s)(1 - exp(-F))]
    instead. Also checks the sum against E A_infinity = G h(x) and, when the
    grid minimum c of u is positive, the bound E A~_infinity <= 1/c - 1.
    """
    _require_nonnegative(F)
    if direct is None:
        direct = estimate_u(params, F, x, n_paths, master_seed + 1, horizon, cutoff, doublings, tol, workers=workers)

    def increments(path: JumpPath) -> List[float]:
        f = jump_values(path, F)
        damping = -np.expm1(-f)
        weighted = float(np.sum(interpolant(path.post) * damping)) if path.n_jumps else 0.0
        return [weighted, float(np.sum(damping))]

    if t is None:
        run = run_doublings(
            StablePathSampler(params, cutoff), x, n_paths, master_seed, horizon, doublings,
            increments, relative_flat_rule(tol), workers=workers
        )
        weighted_sum = McEstimate.from_samples(run.final[:, 0])
        damped = McEstimate.from_samples(run.final[:, 1])
        lhs = McEstimate(mean=1.0 - weighted_sum.mean, std_err=weighted_sum.std_err, n=weighted_sum.n)
        name = "u_integral_identity"
    else:
        sampler = StablePathSampler(params, cutoff)

        def finite(path: JumpPath) -> List[float]:
            weighted, total = increments(path)
            return [float(interpolant(path.end)[0]) - weighted, weighted, total]

        rows = np.array(sampler.map(finite, x, n_paths, master_seed, t, workers))
        lhs = McEstimate.from_samples(rows[:, 0])
        weighted_sum = McEstimate.from_samples(rows[:, 1])
        damped = McEstimate.from_samples(rows[:, 2])
        name = "u_integral_identity_finite"
    report = _compare(name, lhs, direct.u_hat, interpolant.budget, weighted_sum=weighted_sum.mean, damped=damped.mean)
    bounds_ok = True
    if green_value is not None and math.isfinite(green_value):
        bounds_ok &= weighted_sum.mean <= green_value + 3.0 * weighted_sum.std_err
    c = interpolant.minimum
    if t is None and c > 0.0:
        bounds_ok &= damped.mean <= 1.0 / c - 1.0 + 3.0 * damped.std_err
    report.values["grid_min_u"] = c
    report.passed = report.passed and bool(bounds_ok)
    return report


class LimitReport(BaseModel):
    horizons: List[float]
    fractions: List[float] = Field(..., description="Share of paths with u(X_T) > 1 - delta")
    delta: float
    monotone: bool


def u_limit_check(
    params: StableParams,
    F: KernelSpec,
    x: Sequence[float],
    u_eval: GaugeFunction,
    n_paths: int,
    master_seed: int,
    base_horizon: float = 10.0,
    doublings: int = 4,
    cutoff: float = 1e-3,
    delta: float = 0.05,
    workers: Optional[int] = None
) -> LimitReport:
    """u along every path at T 2^k; the fraction close to 1 should grow (within noise)."""
    _require_nonnegative(F)
    run = run_doublings(
        StablePathSampler(params, cutoff), x, n_paths, master_seed, base_horizon, doublings,
        lambda p: [jump_sum(p, F)], relative_flat_rule(0.0), adaptive=False, workers=workers
    )
    fractions = []
    for level in range(len(run.horizons)):
        values = u_eval(run.ends[:, level, :])
        fractions.append(float(np.mean(values > 1.0 - delta)))
    noise = [3.0 * math.sqrt(max(f * (1.0 - f), 1.0 / n_paths) / n_paths) for f in fractions]
    monotone = all(fractions[i] >= fractions[i - 1] - noise[i] - noise[i - 1] for i in range(1, len(fractions)))
    return LimitReport(horizons=run.horizons, fractions=fractions, delta=delta, monotone=monotone)


class HarnackRow(BaseModel):
    scale: float
    points: List[Tuple[float, ...]]
    u: List[McEstimate]
    ratio: float = Field(..., description="max u / min u over the annulus grid")
    radial_spread: float = Field(..., description="Largest spread between points of equal |x|, in std errs")


class HarnackReport(BaseModel):
    kernel: str
    rows: List[HarnackRow]
    constant: float = Field(..., description="Largest ratio over the scales")
    scale_invariant: bool
    bounded_below: bool
    radial: bool


def _annulus_points(d: int, R: float) -> List[np.ndarray]:
    points = []
    for r in (2.0 * R, 3.0 * R, 4.0 * R):
        axes = [np.eye(d)[0], -np.eye(d)[0]] + ([np.eye(d)[1]] if d > 1 else [])
        points.extend(r * axis for axis in axes)
    return points


def harnack_ratio_check(
    params: StableParams,
    F: KernelSpec,
    n_paths: int,
    master_seed: int,
    scales: Sequence[float] = HARNACK_SCALES,
    horizon: float = 10.0,
    cutoff: float = 1e-3,
    doublings: int = 4,
    tol: float = 1e-3,
    workers: Optional[int] = None
) -> HarnackReport:
    """
    max/min of u over point grids in the annuli 2R <= |x| <= 4R.

    The ratios must stay within a factor 2 of each other across R, and the
    smallest u on the largest annulus must stay above the smallest u on the
    smallest annulus divided by the empirical constant.
    """
    _require_nonnegative(F)
    rows = []
    for R in scales:
        points = _annulus_points(params.d, R)
        estimates = [
            estimate_u(params, F, p, n_paths, master_seed, horizon, cutoff, doublings, tol, workers=workers).u_hat
            for p in points
        ]
        means = np.array([e.mean for e in estimates])
        ratio = float(means.max() / means.min()) if means.min() > 0 else math.inf
        spread = 0.0
        norms = np.round([np.linalg.norm(p) for p in points], 12)
        for radius in np.unique(norms):
            group = [e for e, n in zip(estimates, norms) if n == radius]
            for a in group:
                for b in group:
                    error = max(a.combined_error(b), 1e-15)
                    spread = max(spread, abs(a.mean - b.mean) / error)
        rows.append(HarnackRow(scale=R, points=[tuple(p.tolist()) for p in points], u=estimates, ratio=ratio, radial_spread=spread))
        logger.info(f"Harnack V(0,{2 * R:g},{4 * R:g}) for {F.name}: ratio {ratio:.4f}")
    ratios = [row.ratio for row in rows]
    constant = max(ratios)
    smallest = min(e.mean for e in rows[0].u)
    largest = min(e.mean for e in rows[-1].u)
    return HarnackReport(
        kernel=F.name,
        rows=rows,
        constant=constant,
        scale_invariant=constant < 2.0 * min(ratios),
        bounded_below=largest >= smallest / constant,
        radial=all(row.radial_spread <= 4.0 for row in rows)
    )


class HittingReport(BaseModel):
    horizons: List[float]
    median_visits: List[float] = Field(..., description="Median number of annuli 2^n <= |x| < 2^(n+1) visited")
    median_norm: List[float]
    increasing: bool
    transient: bool


def infinite_hitting_check(
    params: StableParams,
    n_paths: int,
    master_seed: int,
    base_horizon: float,
    doublings: int = 2,
    cutoff: float = 1e-2,
    start: Optional[Sequence[float]] = None,
    workers: Optional[int] = None
) -> HittingReport:
    """Distinct dyadic annuli visited up to T 2^k; both the count and |X_T| should grow in T."""
    params.require_transient()
    horizons = [base_horizon * 2.0 ** k for k in range(doublings + 1)]
    origin = np.zeros(params.d) if start is None else np.asarray(start, dtype=float)

    def visits(path: JumpPath) -> List[float]:
        knots = path.knot_positions
        times = np.concatenate([[path.t0], path.times])
        norms = np.linalg.norm(knots, axis=1)
        index = np.where(norms >= 1.0, np.floor(np.log2(np.maximum(norms, 1.0))), -1.0)
        counts, positions = [], []
        for T in horizons:
            seen = index[(times <= T) & (index >= 0.0)]
            counts.append(float(len(np.unique(seen))))
            positions.append(float(norms[np.searchsorted(times, T, side="right") - 1]))
        return counts + positions

    rows = np.array(StablePathSampler(params, cutoff).map(visits, origin, n_paths, master_seed, horizons[-1], workers))
    k = len(horizons)
    medians = np.median(rows[:, :k], axis=0).tolist()
    norms = np.median(rows[:, k:], axis=0).tolist()
    return HittingReport(
        horizons=horizons,
        median_visits=medians,
        median_norm=norms,
        increasing=all(b > a for a, b in zip(medians, medians[1:])),
        transient=all(b > a for a, b in zip(norms, norms[1:]))
    )


def gauge_monotonicity_check(
    params: StableParams,
    smaller: KernelSpec,
    larger: KernelSpec,
    points: Sequence[Sequence[float]],
    n_paths: int,
    master_seed: int,
    horizon: float = 10.0,
    cutoff: float = 1e-3,
    doublings: int = 2,
    workers: Optional[int] = None
) -> CheckResult:
    """smaller <= larger pointwise gives u(smaller) >= u(larger); common paths, fixed horizons."""
    rows = []
    passed = True
    for p in points:
        a = estimate_u(params, smaller, p, n_paths, master_seed, horizon, cutoff, doublings, adaptive=False, workers=workers).u_hat
        b = estimate_u(params, larger, p, n_paths, master_seed, horizon, cutoff, doublings, adaptive=False, workers=workers).u_hat
        ok = a.mean >= b.mean - 3.0 * a.combined_error(b)
        passed = passed and ok
        rows.append({"x": list(map(float, p)), "u_smaller": a.mean, "u_larger": b.mean})
    return CheckResult(
        name="gauge_monotonicity",
        passed=passed,
        detail=f"{smaller.name} vs {larger.name} at {len(rows)} points",
        values={"rows": rows}
    )


def gauge_table(interpolant: GaugeInterpolant) -> List[Dict[str, float]]:
    """CSV rows |x|, u_hat, std_err, tail_flag."""
    return [
        {"r": r, "u_hat": e.u_hat.mean, "std_err": e.u_hat.std_err, "tail_flag": e.tail_flag, "horizon": e.horizon_used}
        for r, e in zip(interpolant.radii, interpolant.estimates)
    ]
