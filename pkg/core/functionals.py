"""
Additive and multiplicative path functionals.
Jump sums, compensators, the Doleans exponential density and the pathwise
identities between them, plus the doubling-horizon driver used for T = infinity.
"""

import logging
import math
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy import integrate, stats

from .errors import InvalidArgumentError, InvariantViolation
from .fields import ScalarField
from .kernels import sandwich_constants
from .models import CheckResult, FunctionalSeries, JumpPath, KernelSpec, McEstimate, SmallJumpPolicy, StableParams
from .montecarlo import derive_seed, map_chunks
from .stable_process import PathSampler, bridge_skeleton

logger = logging.getLogger(__name__)

IDENTITY_TOL = 1e-10


def jump_values(path: JumpPath, F: KernelSpec) -> np.ndarray:
    """F(X_{t-}, X_t) at every event; raises when 1 + F <= 0."""
    if path.n_jumps == 0:
        return np.zeros(0)
    f = F.offset(path.pre, path.jumps)
    if np.any(1.0 + f <= 0.0):
        raise InvariantViolation(f"{F.name}: 1 + F <= 0 on a jump, inf F must exceed -1")
    return f


def jump_sum(path: JumpPath, F: KernelSpec, fn: Callable[[np.ndarray], np.ndarray] = lambda f: f) -> float:
    """Sum of fn(F) over the jumps of the path."""
    return float(np.sum(fn(jump_values(path, F))))


def compensator_mesh(path: JumpPath) -> float:
    return min(0.01, (path.horizon - path.t0) / (path.n_jumps + 1) / 10.0)


def compensator(path: JumpPath, field: ScalarField, params: Optional[StableParams] = None) -> np.ndarray:
    """
    Integral of the field along the path up to each event time and the horizon.

    Piecewise constant under Drop; trapezoid rule on a Brownian-bridge
    skeleton under BrownianMatch.

    Returns:
        Array of length n_jumps + 1
    """
    if path.policy == SmallJumpPolicy.DROP:
        pieces = field(path.knot_positions) * path.holding_times
    else:
        if params is None:
            raise InvalidArgumentError("BrownianMatch compensators need the process parameters")
        gaps = bridge_skeleton(path, params, compensator_mesh(path))
        pieces = np.array([integrate.trapezoid(field(positions), times) for times, positions in gaps])
    return np.cumsum(pieces)


def accumulate(
    path: JumpPath,
    F: KernelSpec,
    h_eval: ScalarField,
    params: Optional[StableParams] = None
) -> FunctionalSeries:
    """
    A, A_tilde, [M], the compensator, M and log L along one path.

    Args:
        path: Path
        F: Kernel with inf F > -1
        h_eval: Levy integral of F as a field (matching the path's cutoff)
        params: Needed for BrownianMatch paths

    Returns:
        FunctionalSeries at every event time followed by the horizon
    """
    f = jump_values(path, F)

    def running(values: np.ndarray) -> np.ndarray:
        acc = np.cumsum(values)
        last = acc[-1] if len(acc) else 0.0
        return np.append(acc, last)

    A = running(f)
    comp = compensator(path, h_eval, params)
    M = A - comp
    return FunctionalSeries(
        times=np.append(path.times, path.horizon),
        A=A,
        A_tilde=running(-np.expm1(-f)),
        QV=running(f * f),
        compensator=comp,
        M=M,
        logL=M + running(np.log1p(f) - f)
    )


def accumulate_segments(
    segments: Sequence[JumpPath],
    F: KernelSpec,
    h_eval: ScalarField,
    params: Optional[StableParams] = None
) -> FunctionalSeries:
    """Series over consecutive segments, continued across segment boundaries."""
    if not segments:
        raise InvalidArgumentError("no segments")
    parts = [accumulate(s, F, h_eval, params) for s in segments]
    keys = ("A", "A_tilde", "QV", "compensator", "M", "logL")
    offsets = {key: 0.0 for key in keys}
    columns: Dict[str, List[np.ndarray]] = {key: [] for key in keys}
    times: List[np.ndarray] = []
    for i, part in enumerate(parts):
        last = i == len(parts) - 1
        keep = slice(None) if last else slice(0, -1)
        times.append(part.times[keep])
        for key in keys:
            values = getattr(part, key)
            columns[key].append(values[keep] + offsets[key])
            offsets[key] += values[-1]
    return FunctionalSeries(times=np.concatenate(times), **{k: np.concatenate(v) for k, v in columns.items()})


class DoleansReport(BaseModel):
    """Logs of E(M), E(-M) and E(-[M]) at the horizon."""
    log_e_m: float
    log_e_minus_m: float
    log_e_minus_qv: float
    rel_error: float
    passed: bool


def doleans_exponential_pair_check(
    path: JumpPath,
    F: KernelSpec,
    h_eval: ScalarField,
    params: Optional[StableParams] = None
) -> DoleansReport:
    """
    Check E(M) E(-M) = E(-[M]) from the closed jump-product forms.

    Requires |F| < 1 so that 1 - F^2 > 0.
    """
    if F.sup_abs >= 1.0:
        raise InvalidArgumentError(f"{F.name}: the pair identity needs |F| < 1 (sup |F| = {F.sup_abs:g})")
    f = jump_values(path, F)
    if np.any(np.abs(f) >= 1.0):
        raise InvalidArgumentError(f"{F.name}: |F| >= 1 on a jump")
    m_t = float(np.sum(f) - compensator(path, h_eval, params)[-1])
    log_e_m = m_t + float(np.sum(np.log1p(f) - f))
    log_e_minus_m = -m_t + float(np.sum(np.log1p(-f) + f))
    log_e_minus_qv = float(np.sum(np.log1p(-f * f)))
    rel_error = abs(math.expm1(log_e_m + log_e_minus_m - log_e_minus_qv))
    return DoleansReport(
        log_e_m=log_e_m,
        log_e_minus_m=log_e_minus_m,
        log_e_minus_qv=log_e_minus_qv,
        rel_error=rel_error,
        passed=rel_error < IDENTITY_TOL
    )


class InverseDensityReport(BaseModel):
    """log L for F and log of the density for F1 = -F/(1+F) under the tilted law."""
    log_l: float
    log_l_inverse: float
    abs_error: float
    passed: bool


def inverse_density_check(
    path: JumpPath,
    F: KernelSpec,
    h_eval: ScalarField,
    params: Optional[StableParams] = None
) -> InverseDensityReport:
    """
    Check that the density of F1 = -F/(1+F) against the tilted law is 1 / L.

    The tilted compensator of F1 is the integral of F1 (1 + F) N = -h, so it
    equals minus the base compensator of F.
    """
    f = jump_values(path, F)
    c = float(compensator(path, h_eval, params)[-1])
    log_l = float(np.sum(f)) - c + float(np.sum(np.log1p(f) - f))
    f1 = -f / (1.0 + f)
    m_tilde = float(np.sum(f1)) + c
    log_l_inverse = m_tilde + float(np.sum(np.log1p(f1) - f1))
    error = abs(log_l + log_l_inverse)
    return InverseDensityReport(
        log_l=log_l, log_l_inverse=log_l_inverse, abs_error=error, passed=error < IDENTITY_TOL
    )


class SequenceEquivalence(BaseModel):
    """Partial sums and products comparing sum a^2, sum (a/(1+a))^2 and prod (1+a)/(1+a/2)^2."""
    n: int
    sumsq: float
    sumsq_ratio: float
    product: float
    log_product: float
    ratio_bounds: List[float] = Field(..., description="c3, c4 with c3 a^2 <= (a/(1+a))^2 <= c4 a^2")
    checkpoints: List[Dict[str, float]] = Field(default_factory=list)


def sequence_equivalence_check(a: Sequence[float], checkpoints: Sequence[int] = ()) -> SequenceEquivalence:
    """
    The three quantities of a finite sequence with a_n > -1.

    Args:
        a: Sequence
        checkpoints: Prefix lengths at which partial values are also reported

    Returns:
        SequenceEquivalence
    """
    values = np.asarray(a, dtype=float)
    if np.any(values <= -1.0):
        raise InvalidArgumentError("sequence terms must exceed -1")
    if len(values) == 0:
        return SequenceEquivalence(n=0, sumsq=0.0, sumsq_ratio=0.0, product=1.0, log_product=0.0, ratio_bounds=[1.0, 1.0])
    sq = np.cumsum(values ** 2)
    sq_ratio = np.cumsum((values / (1.0 + values)) ** 2)
    log_prod = np.cumsum(np.log1p(values) - 2.0 * np.log1p(0.5 * values))
    c3, c4 = sandwich_constants(lambda f: (f / (1.0 + f)) ** 2, float(values.min()), float(values.max()))
    marks = []
    for n in sorted(set(checkpoints)):
        if 1 <= n <= len(values):
            marks.append({
                "n": float(n),
                "sumsq": float(sq[n - 1]),
                "sumsq_ratio": float(sq_ratio[n - 1]),
                "product": float(math.exp(log_prod[n - 1])),
            })
    return SequenceEquivalence(
        n=len(values),
        sumsq=float(sq[-1]),
        sumsq_ratio=float(sq_ratio[-1]),
        product=float(math.exp(log_prod[-1])),
        log_product=float(log_prod[-1]),
        ratio_bounds=[c3, c4],
        checkpoints=marks
    )


class TerminalSample(BaseModel):
    """Per-path terminal values of the functionals (arrays of length n_paths)."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    A: np.ndarray
    compensator: np.ndarray
    M: np.ndarray
    QV: np.ndarray
    logL: np.ndarray
    square_compensator: Optional[np.ndarray] = None
    ends: np.ndarray


def terminal_sample(
    sampler: PathSampler,
    F: KernelSpec,
    h_eval: ScalarField,
    start: Sequence[float],
    n_paths: int,
    master_seed: int,
    horizon: float,
    square_eval: Optional[ScalarField] = None,
    workers: Optional[int] = None
) -> TerminalSample:
    """Simulate n_paths paths and keep the terminal functionals of each."""
    params = sampler.params

    def reduce(path: JumpPath) -> List[float]:
        series = accumulate(path, F, h_eval, params)
        row = list(series.terminal().values())
        row.append(float(compensator(path, square_eval, params)[-1]) if square_eval is not None else 0.0)
        return row + path.end.tolist()

    rows = np.array(sampler.map(reduce, start, n_paths, master_seed, horizon, workers))
    return TerminalSample(
        A=rows[:, 0],
        compensator=rows[:, 3],
        M=rows[:, 4],
        QV=rows[:, 2],
        logL=rows[:, 5],
        square_compensator=rows[:, 6] if square_eval is not None else None,
        ends=rows[:, 7:]
    )


def levy_system_check(sample: TerminalSample, k: float = 3.0) -> CheckResult:
    """E A_T against E of the compensator, within k combined standard errors."""
    a = McEstimate.from_samples(sample.A)
    c = McEstimate.from_samples(sample.compensator)
    passed = a.agrees_with(c, k)
    return CheckResult(
        name="levy_system_identity",
        passed=passed,
        detail=f"E A_T = {a.mean:.5g} +- {a.std_err:.2g}, E int h = {c.mean:.5g} +- {c.std_err:.2g}",
        values={"A": a.model_dump(), "compensator": c.model_dump()}
    )


def martingale_check(sample: TerminalSample, k: float = 4.0) -> CheckResult:
    m = McEstimate.from_samples(sample.M)
    return CheckResult(
        name="martingale_mean_zero",
        passed=m.within(0.0, k),
        detail=f"E M_T = {m.mean:.4g} +- {m.std_err:.2g}",
        values={"M": m.model_dump()}
    )


def supermartingale_check(sample: TerminalSample, k: float = 4.0) -> CheckResult:
    L = McEstimate.from_samples(np.exp(sample.logL))
    return CheckResult(
        name="density_supermartingale",
        passed=L.mean <= 1.0 + k * L.std_err,
        detail=f"E L_T = {L.mean:.4g} +- {L.std_err:.2g}",
        values={"L": L.model_dump()}
    )


def bracket_check(sample: TerminalSample, k: float = 3.0) -> CheckResult:
    """E [M]_T against E of the integral of the F^2 field."""
    if sample.square_compensator is None:
        raise InvalidArgumentError("bracket check needs the F^2 compensator")
    qv = McEstimate.from_samples(sample.QV)
    sq = McEstimate.from_samples(sample.square_compensator)
    return CheckResult(
        name="bracket_compensator",
        passed=qv.agrees_with(sq, k),
        detail=f"E [M]_T = {qv.mean:.5g}, E <M>_T = {sq.mean:.5g}",
        values={"QV": qv.model_dump(), "angle": sq.model_dump()}
    )


def qv_rank_association(sample: TerminalSample, alpha_level: float = 0.01) -> CheckResult:
    """Larger terminal [M] goes with smaller terminal L (negative Spearman correlation)."""
    result = stats.spearmanr(sample.QV, sample.logL)
    rho, pvalue = float(result.statistic), float(result.pvalue)
    return CheckResult(
        name="qv_density_rank_association",
        passed=rho < 0.0 and pvalue < alpha_level,
        detail=f"spearman rho = {rho:.3f}, p = {pvalue:.2g}",
        values={"rho": rho, "pvalue": pvalue}
    )


class DoublingRun(BaseModel):
    """Cumulative per-path values at horizons T, 2T, 4T, ..."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    horizons: List[float]
    values: np.ndarray = Field(..., description="(n_paths, n_horizons, k)")
    ends: np.ndarray = Field(..., description="(n_paths, n_horizons, d)")
    flat_fraction: List[float]

    @property
    def tail_flag(self) -> float:
        return 1.0 - self.flat_fraction[-1]

    @property
    def final(self) -> np.ndarray:
        return self.values[:, -1, :]


FlatRule = Callable[[np.ndarray, np.ndarray], np.ndarray]


def relative_flat_rule(tol: float, column: int = 0) -> FlatRule:
    """Flat when the increment is at most tol * max(|value|, 1)."""
    def rule(previous: np.ndarray, current: np.ndarray) -> np.ndarray:
        step = np.abs(current[:, column] - previous[:, column])
        return step <= tol * np.maximum(np.abs(current[:, column]), 1.0)
    return rule


def run_doublings(
    sampler: PathSampler,
    start: Sequence[float],
    n_paths: int,
    master_seed: int,
    base_horizon: float,
    max_doublings: int,
    increments: Callable[[JumpPath], Sequence[float]],
    flat_rule: FlatRule,
    adaptive: bool = True,
    quorum: float = 0.95,
    workers: Optional[int] = None
) -> DoublingRun:
    """
    Extend every path segment by segment over (T 2^(k-1), T 2^k].

    Segment k of path i is drawn from the stream of (seed_i, k) and starts
    where segment k-1 ended, so the result does not depend on when the
    doubling stops. With `adaptive`, stops once `quorum` of the paths are flat.

    Args:
        sampler: Base or tilted sampler
        start: Common starting point
        n_paths: Number of paths
        master_seed: Seed of the path family
        base_horizon: First horizon T
        max_doublings: Largest k
        increments: Additive functionals of one segment
        flat_rule: (previous, current) cumulative values -> per-path flat flags
        adaptive: Stop early when flat
        quorum: Required flat fraction
        workers: Thread count

    Returns:
        DoublingRun
    """
    origin = np.asarray(start, dtype=float).reshape(-1)
    seeds = [derive_seed(master_seed, i) for i in range(n_paths)]
    state = np.repeat(origin[None, :], n_paths, axis=0)
    totals: Optional[np.ndarray] = None
    horizons: List[float] = []
    values: List[np.ndarray] = []
    ends: List[np.ndarray] = []
    fractions: List[float] = []
    t0 = 0.0
    for level in range(max_doublings + 1):
        t1 = base_horizon * 2.0 ** level
        positions = state

        def run(chunk: range) -> List[np.ndarray]:
            paths = sampler.sample(positions[chunk.start:chunk.stop], seeds[chunk.start:chunk.stop], t0, t1, level)
            return [np.concatenate([np.asarray(increments(p), dtype=float), p.end]) for p in paths]

        rows = np.array(map_chunks(run, n_paths, workers))
        step, state = rows[:, :-len(origin)], rows[:, -len(origin):]
        previous = np.zeros_like(step) if totals is None else totals
        totals = previous + step
        flat = flat_rule(previous, totals)
        fraction = float(np.mean(flat))
        horizons.append(t1)
        values.append(totals.copy())
        ends.append(state.copy())
        fractions.append(fraction)
        logger.info(f"{sampler.label} paths at T={t1:g}: flat fraction {fraction:.3f}")
        if adaptive and fraction >= quorum and (level >= 1 or not np.any(step)):
            break
        t0 = t1
    if adaptive and fractions[-1] < quorum:
        logger.warning(f"doubling budget exhausted at T={horizons[-1]:g}, flat fraction {fractions[-1]:.3f}")
    return DoublingRun(
        horizons=horizons,
        values=np.stack(values, axis=1),
        ends=np.stack(ends, axis=1),
        flat_fraction=fractions
    )
