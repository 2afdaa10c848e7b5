"""
The transformed process and its law relative to the stable one.
Thinning sampler for the jump intensity (1 + F) j, importance-sampling and
entropy estimators, the a.s.-finiteness diagnostic and the divergent-entropy
ball construction.
"""

import logging
import math
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field

from .errors import InvalidArgumentError, InvariantViolation, NumericFailure
from .fields import ConstantField, levy_field
from .functionals import accumulate, jump_sum, jump_values, relative_flat_rule, run_doublings
from .kernels import (
    FIELD_INTEGRANDS, FieldKind, counterexample_balls, counterexample_kernel, field_value,
    fuchsian_kernel, sandwich_constants, root_ball_kernel
)
from .models import (
    Annulus, Ball, DichotomyReport, JumpPath, KernelSpec, KernelTagKind, McEstimate, QuadratureSpec,
    SmallJumpPolicy, StableParams, TiltedPathConfig, Verdict
)
from .montecarlo import path_stream
from .potential import green, green_potential
from .quadrature import adaptive, axial_points, axial_rule
from .stable_process import (
    JumpProposals, PathSampler, StablePathSampler, draw_jump_proposals,
    hitting_prob_estimate, occupation_time
)

logger = logging.getLogger(__name__)

FLAT_QUORUM = 0.95
PROBABILITY_SLACK = 1e-12


def _thin(
    config: TiltedPathConfig,
    starts: np.ndarray,
    proposals: Sequence[JumpProposals],
    uniforms: Sequence[np.ndarray],
    seeds: Sequence[int],
    t0: float,
    horizon: float,
    segment: int
) -> List[JumpPath]:
    """
    Accept proposal k of every path in lockstep.

    A proposal from x with jump y is kept when U < (1 + F(x, x + y)) / K; the
    Gaussian gaps (BrownianMatch) run through rejected proposals as well.
    """
    F, K = config.F, config.dominating_bound
    starts = np.atleast_2d(np.asarray(starts, dtype=float))
    n_paths, d = starts.shape
    counts = np.array([len(p.times) for p in proposals], dtype=int)
    k_max = int(counts.max()) if n_paths else 0
    jumps = np.zeros((n_paths, k_max, d))
    draws = np.ones((n_paths, k_max))
    gauss = np.zeros((n_paths, k_max + 1, d))
    for i, (prop, u) in enumerate(zip(proposals, uniforms)):
        jumps[i, :counts[i]] = prop.jumps
        draws[i, :counts[i]] = u
        if prop.gauss is not None:
            gauss[i, :counts[i] + 1] = prop.gauss

    position = starts.copy()
    before = np.zeros((n_paths, k_max, d))
    accepted = np.zeros((n_paths, k_max), dtype=bool)
    for k in range(k_max):
        active = np.flatnonzero(counts > k)
        position[active] += gauss[active, k]
        before[active, k] = position[active]
        prob = (1.0 + F.offset(position[active], jumps[active, k])) / K
        if np.any(prob < 0.0) or np.any(prob > 1.0 + PROBABILITY_SLACK):
            raise InvariantViolation(
                f"{F.name}: acceptance probability outside [0, 1] (range {prob.min():.4g}..{prob.max():.4g})"
            )
        keep = active[draws[active, k] < prob]
        accepted[keep, k] = True
        position[keep] += jumps[keep, k]
    position += gauss[np.arange(n_paths), counts]

    paths = []
    for i in range(n_paths):
        n = counts[i]
        mask = accepted[i, :n]
        pre = before[i, :n][mask]
        step = jumps[i, :n][mask]
        paths.append(JumpPath(
            start=starts[i],
            horizon=horizon,
            times=proposals[i].times[mask],
            pre=pre.reshape(-1, d),
            post=(pre + step).reshape(-1, d),
            end=position[i],
            cutoff=config.cutoff,
            policy=config.policy,
            seed=seeds[i],
            t0=t0,
            segment=segment
        ))
    return paths


def sample_tilted_path(
    config: TiltedPathConfig,
    start: Sequence[float],
    stream: np.random.Generator,
    seed: int = 0,
    t0: float = 0.0,
    segment: int = 0
) -> JumpPath:
    """
    One path of the process with jump intensity (1 + F(x, y)) j(x, y).

    Proposals come from dominating_bound times the stable big-jump intensity,
    then one uniform per proposal decides acceptance.
    """
    origin = np.asarray(start, dtype=float).reshape(1, -1)
    if origin.shape[1] != config.base.d:
        raise InvalidArgumentError(f"start has dimension {origin.shape[1]}, expected {config.base.d}")
    proposal = draw_jump_proposals(
        config.base, config.dominating_bound, t0, config.horizon, config.cutoff, config.policy, stream
    )
    uniform = stream.random(len(proposal.times))
    return _thin(config, origin, [proposal], [uniform], [seed], t0, config.horizon, segment)[0]


class TiltedPathSampler(PathSampler):
    """
    Sampler of the transformed process.

    Path i of segment k uses the stream of (seed_i, k) like the base sampler;
    with F = 0 it reproduces the base paths exactly.
    """

    def __init__(self, config: TiltedPathConfig):
        super().__init__(config.base, config.cutoff, config.policy)
        self.config = config

    @classmethod
    def for_kernel(
        cls,
        params: StableParams,
        F: KernelSpec,
        cutoff: float,
        policy: SmallJumpPolicy = SmallJumpPolicy.DROP
    ) -> "TiltedPathSampler":
        return cls(TiltedPathConfig.for_kernel(params, F, cutoff, 1.0, policy))

    @property
    def label(self) -> str:
        return "tilted"

    def sample(
        self,
        starts: np.ndarray,
        seeds: Sequence[int],
        t0: float,
        horizon: float,
        segment: int = 0
    ) -> List[JumpPath]:
        cfg = self.config
        proposals, uniforms = [], []
        for seed in seeds:
            stream = path_stream(seed, segment)
            proposal = draw_jump_proposals(cfg.base, cfg.dominating_bound, t0, horizon, cfg.cutoff, cfg.policy, stream)
            proposals.append(proposal)
            uniforms.append(stream.random(len(proposal.times)))
        return _thin(cfg, starts, proposals, uniforms, seeds, t0, horizon, segment)


def _sampler(params: StableParams, F: KernelSpec, cutoff: float, policy: SmallJumpPolicy, under: str) -> PathSampler:
    if under == "base":
        return StablePathSampler(params, cutoff, policy)
    if under == "tilted":
        return TiltedPathSampler.for_kernel(params, F, cutoff, policy)
    raise InvalidArgumentError(f"unknown law '{under}', expected base or tilted")


class JumpRateReport(BaseModel):
    """Jumps per unit occupation time out of a region, base against tilted."""
    region: Ball
    base_rate: float
    tilted_rate: float
    base_jumps: int
    tilted_jumps: int
    tilted_exceeds: bool


def jump_rate_comparison(
    params: StableParams,
    F: KernelSpec,
    region: Ball,
    start: Sequence[float],
    n_paths: int,
    master_seed: int,
    cutoff: float,
    horizon: float,
    workers: Optional[int] = None
) -> JumpRateReport:
    """Empirical jump rate out of `region` under both laws (Drop policy)."""

    def counts(path: JumpPath) -> Tuple[float, float]:
        out = float(np.sum(region.contains(path.pre))) if path.n_jumps else 0.0
        return out, occupation_time(path, region)

    rates = {}
    totals = {}
    for under in ("base", "tilted"):
        sampler = _sampler(params, F, cutoff, SmallJumpPolicy.DROP, under)
        rows = np.array(sampler.map(counts, start, n_paths, master_seed, horizon, workers))
        jumps, time = rows[:, 0].sum(), rows[:, 1].sum()
        if time <= 0.0:
            raise NumericFailure(f"no occupation of the region under the {under} law")
        rates[under], totals[under] = jumps / time, int(jumps)
    return JumpRateReport(
        region=region,
        base_rate=rates["base"],
        tilted_rate=rates["tilted"],
        base_jumps=totals["base"],
        tilted_jumps=totals["tilted"],
        tilted_exceeds=rates["tilted"] > rates["base"]
    )


TestFunction = Callable[[np.ndarray], float]

DEFAULT_TEST_FUNCTIONS: Dict[str, TestFunction] = {
    "half_space": lambda x: float(x[0] > 0.5),
    "unit_ball": lambda x: float(np.linalg.norm(x) < 1.0),
}


class ImportanceRow(BaseModel):
    name: str
    tilted: McEstimate
    weighted: McEstimate
    agree: bool


class ImportanceSamplingReport(BaseModel):
    kernel: str
    horizon: float
    weight_mean: McEstimate = Field(..., description="E L_T under the base law (should be 1)")
    rows: List[ImportanceRow]

    @property
    def passed(self) -> bool:
        return all(row.agree for row in self.rows)


def importance_sampling_check(
    params: StableParams,
    F: KernelSpec,
    start: Sequence[float],
    horizon: float,
    n_paths: int,
    master_seed: int,
    cutoff: float,
    quad: QuadratureSpec,
    tests: Optional[Dict[str, TestFunction]] = None,
    k: float = 3.0,
    workers: Optional[int] = None
) -> ImportanceSamplingReport:
    """
    E under the tilted law of g(X_T) against E under the base law of g(X_T) L_T.

    The Doleans weights use the h field with the simulation cutoff, so both
    sides refer to the same truncated jump law. Base paths use master_seed + 1.
    """
    tests = tests or DEFAULT_TEST_FUNCTIONS
    names = sorted(tests)
    h_eval = levy_field(params, F, FieldKind.H, quad, cutoff)
    tilted = TiltedPathSampler.for_kernel(params, F, cutoff)
    ends = np.array(tilted.map(lambda p: p.end.copy(), start, n_paths, master_seed, horizon, workers))
    base = StablePathSampler(params, cutoff)

    def weighted(path: JumpPath) -> List[float]:
        weight = math.exp(accumulate(path, F, h_eval, params).logL[-1])
        return [weight] + [weight * tests[name](path.end) for name in names]

    rows = np.array(base.map(weighted, start, n_paths, master_seed + 1, horizon, workers))
    report_rows = []
    for j, name in enumerate(names):
        direct = McEstimate.from_samples([tests[name](x) for x in ends])
        reweighted = McEstimate.from_samples(rows[:, j + 1])
        report_rows.append(ImportanceRow(name=name, tilted=direct, weighted=reweighted, agree=direct.agrees_with(reweighted, k)))
        logger.info(f"importance sampling [{name}]: tilted {direct.mean:.4f}, weighted {reweighted.mean:.4f}")
    return ImportanceSamplingReport(
        kernel=F.name, horizon=horizon, weight_mean=McEstimate.from_samples(rows[:, 0]), rows=report_rows
    )


class CounterexampleReport(BaseModel):
    """Per-ball contributions to G h(0) for the ball construction, with the hitting bounds."""
    kernel: str
    field: FieldKind
    balls: List[Tuple[int, float, float]] = Field(..., description="(n, |x_n|, r_n)")
    contributions: List[float]
    partial_sums: List[float]
    within_factor_4: bool
    above_half_first: bool
    divergent: bool
    hitting_terms: List[float] = Field(..., description="(r_n / |x_n|)^(d - alpha)")
    hitting_sum: float
    geometric_majorant: float
    majorant_holds: bool


def ball_series_diverges(contributions: Sequence[float]) -> bool:
    """Linear growth: at least two balls, none adding less than half of the first."""
    if len(contributions) < 2 or contributions[0] <= 0.0:
        return False
    return all(c >= 0.5 * contributions[0] for c in contributions)


def ball_series_total(contributions: Sequence[float]) -> float:
    """
    Sum over all balls from the first few contributions.

    +inf when the series grows linearly or stops decreasing; otherwise the
    partial sum plus the geometric tail of the last ratio.
    """
    if ball_series_diverges(contributions):
        return math.inf
    total = float(sum(contributions))
    if len(contributions) >= 2 and contributions[-2] > 0.0:
        ratio = contributions[-1] / contributions[-2]
        if ratio >= 1.0:
            return math.inf
        total += contributions[-1] * ratio / (1.0 - ratio)
    return total


def _ball_contribution(
    params: StableParams,
    F: KernelSpec,
    kind: FieldKind,
    center: float,
    radius: float,
    quad: QuadratureSpec
) -> float:
    """Integral over B(center e1, radius) of G(0, y) fn-field(y) dy in coordinates shifted to the centre."""
    d = params.d
    t, weights = axial_rule(d, max(quad.angular_nodes, 4))
    directions = axial_points(t, d)
    origin = np.zeros(d)
    anchor = np.zeros(d)
    anchor[0] = center
    field_quad = quad.model_copy(update={"tol": max(quad.tol, 1e-6)})

    def shell(rho: float) -> float:
        total = 0.0
        for omega, w in zip(directions, weights):
            y = anchor + rho * omega
            total += w * green(params, origin, y) * field_value(params, F, y, kind, field_quad)
        return rho ** (d - 1) * total

    value, error, ok = adaptive(shell, 0.0, radius, quad, points=(max(radius - 1.0, 0.0),))
    if not ok:
        raise NumericFailure(
            f"ball contribution at |x_n|={center:g} missed its tolerance",
            partial_value=value, error_estimate=error
        )
    return value


def counterexample_divergence(
    params: StableParams,
    gamma: float,
    beta: float,
    n_balls: int,
    quad: QuadratureSpec,
    kind: str = "counterexample"
) -> CounterexampleReport:
    """
    Contribution of each ball to G h(0) and the Borel-Cantelli terms of the hitting probabilities.

    Args:
        params: Process parameters
        gamma: Decay exponent of the construction
        beta: Near-diagonal exponent
        n_balls: Number of balls
        quad: Tolerances
        kind: "counterexample" integrates h of the ball kernel; "root_ball" the entropy density
              F - log(1 + F) of the square-root kernel

    Returns:
        CounterexampleReport
    """
    if n_balls < 0:
        raise InvalidArgumentError("n_balls must be non-negative")
    if kind == "counterexample":
        F, field, k_gamma = counterexample_kernel(params, gamma, beta), FieldKind.H, gamma
    elif kind == "root_ball":
        F, field, k_gamma = root_ball_kernel(params, gamma, beta), FieldKind.ENTROPY_H, 2.0 * gamma
    else:
        raise InvalidArgumentError(f"unknown construction '{kind}'")
    balls = counterexample_balls(params, k_gamma, n_balls) if n_balls else []
    contributions: List[float] = []
    for n, center, radius in balls:
        value = _ball_contribution(params, F, field, center, radius, quad)
        contributions.append(value)
        logger.info(f"{F.name}: ball {n} (|x_n|={center:g}, r_n={radius:g}) contributes {value:.5g}")
    partial = np.cumsum(contributions).tolist() if contributions else []
    exponent = params.d - params.alpha
    terms = [(radius / center) ** exponent for _, center, radius in balls]
    majorant = [2.0 ** ((1 - n) * exponent) for n, _, _ in balls]
    if contributions:
        lowest, highest = min(contributions), max(contributions)
        within = lowest > 0.0 and highest / lowest <= 4.0
        above = all(c >= 0.5 * contributions[0] for c in contributions)
    else:
        within, above = True, True
    return CounterexampleReport(
        kernel=F.name,
        field=field,
        balls=balls,
        contributions=contributions,
        partial_sums=partial,
        within_factor_4=within,
        above_half_first=above,
        divergent=ball_series_diverges(contributions),
        hitting_terms=terms,
        hitting_sum=float(sum(terms)),
        geometric_majorant=1.0 / (1.0 - 2.0 ** (-exponent)),
        majorant_holds=all(t <= m * (1.0 + 1e-12) for t, m in zip(terms, majorant))
    )


class HittingRow(BaseModel):
    n: int
    center: float
    radius: float
    estimate: McEstimate
    bound: float
    respected: bool


def counterexample_hitting(
    params: StableParams,
    gamma: float,
    n_balls: int,
    n_paths: int,
    master_seed: int,
    horizon: float,
    cutoff: float = 1e-2,
    workers: Optional[int] = None
) -> List[HittingRow]:
    """Empirical P_0(hit ball n before the horizon) against (r_n / |x_n|)^(d - alpha)."""
    rows = []
    exponent = params.d - params.alpha
    for n, center, radius in counterexample_balls(params, gamma, n_balls):
        target = Ball(center=(center,) + (0.0,) * (params.d - 1), radius=radius)
        estimate = hitting_prob_estimate(
            params, np.zeros(params.d), target, horizon, n_paths, master_seed + n, cutoff, workers=workers
        )
        bound = (radius / center) ** exponent
        rows.append(HittingRow(
            n=n, center=center, radius=radius, estimate=estimate, bound=bound,
            respected=estimate.mean <= bound + 3.0 * estimate.std_err
        ))
    return rows


def _has_ball_construction(F: KernelSpec) -> bool:
    return F.tag(KernelTagKind.COUNTEREXAMPLE) is not None or F.tag(KernelTagKind.ROOT_BALL) is not None


class EntropyEstimate(BaseModel):
    """Entropy of the base law relative to the tilted one, by paths and by the Green potential."""
    kernel: str
    pathwise: McEstimate
    green: float = Field(..., description="G h(x) for the untruncated jump law (+inf when divergent)")
    green_matched: float = Field(..., description="G h(x) with jumps below the cutoff excluded")
    horizon_used: float
    tail_flag: float
    agree: Optional[bool] = Field(None, description="Pathwise against green_matched, when both are finite")
    partial_sums: List[float] = Field(default_factory=list, description="Per-ball partial sums for the ball constructions")


def entropy_P_vs_Ptilde(
    params: StableParams,
    F: KernelSpec,
    x: Sequence[float],
    horizon: float,
    n_paths: int,
    master_seed: int,
    quad: QuadratureSpec,
    cutoff: float = 1e-3,
    doublings: int = 4,
    tol: float = 1e-3,
    k: float = 3.0,
    n_balls: int = 4,
    workers: Optional[int] = None
) -> EntropyEstimate:
    """
    E_x of the sum of F - log(1 + F) over all jumps, two ways.

    The pathwise sum runs over base paths extended by doubling until flat; the
    Green form integrates the entropy density against G. For the ball
    constructions it is summed ball by ball over `n_balls` balls and
    extended by the geometric tail. Divergence is reported as +inf.
    """
    params.require_transient()
    if F.lower_bound <= -1.0:
        raise InvalidArgumentError("inf F must exceed -1")
    if _has_ball_construction(F) and n_balls < 2:
        raise InvalidArgumentError("the ball series needs n_balls >= 2")
    fn = FIELD_INTEGRANDS[FieldKind.ENTROPY_H]
    run = run_doublings(
        StablePathSampler(params, cutoff), x, n_paths, master_seed, horizon, doublings,
        lambda p: [jump_sum(p, F, fn)], relative_flat_rule(tol), workers=workers
    )
    pathwise = McEstimate.from_samples(run.final[:, 0])
    partial: List[float] = []
    if F.is_zero:
        green_value = matched = 0.0
    elif _has_ball_construction(F):
        contributions = _entropy_balls(params, F, n_balls, quad)
        partial = np.cumsum(contributions).tolist()
        green_value = matched = ball_series_total(contributions)
    else:
        green_value = green_potential(params, levy_field(params, F, FieldKind.ENTROPY_H, quad), x, quad, "entropy")
        matched = green_potential(params, levy_field(params, F, FieldKind.ENTROPY_H, quad, cutoff), x, quad, "entropy")
    agree = None
    if math.isfinite(matched) and math.isfinite(pathwise.std_err):
        agree = pathwise.within(matched, k, quad.tol * abs(matched) + 1e-12)
    logger.info(f"entropy(P|P~) for {F.name}: pathwise {pathwise.mean:.5g} +- {pathwise.std_err:.2g}, green {green_value:.5g}")
    return EntropyEstimate(
        kernel=F.name,
        pathwise=pathwise,
        green=green_value,
        green_matched=matched,
        horizon_used=run.horizons[-1],
        tail_flag=run.tail_flag,
        agree=agree,
        partial_sums=partial
    )


def _entropy_balls(params: StableParams, F: KernelSpec, n_balls: int, quad: QuadratureSpec) -> List[float]:
    """Contribution of each ball F lives on to the Green potential of its entropy density."""
    gamma = params.alpha - params.d / F.parameters["k"]
    values: List[float] = []
    for n, center, radius in counterexample_balls(params, gamma, n_balls):
        try:
            values.append(_ball_contribution(params, F, FieldKind.ENTROPY_H, center, radius, quad))
        except NumericFailure as exc:
            logger.warning(f"{F.name}: ball {n} contribution inexact ({exc}), keeping the partial value")
            values.append(exc.partial_value)
    return values


class ReverseEntropyEstimate(BaseModel):
    """Entropy of the tilted law relative to the base one."""
    kernel: str
    tilted: McEstimate = Field(..., description="Sum of log(1+F) - F/(1+F) under tilted paths")
    qv: McEstimate = Field(..., description="Sum of F^2 on the same paths")
    sandwich: Tuple[float, float]
    within_sandwich: bool
    fixed_horizon: float
    tilted_fixed: McEstimate
    weighted_fixed: McEstimate = Field(..., description="Same sum under base paths weighted by L_T")
    cross_check: bool
    horizon_used: float
    tail_flag: float


def entropy_Ptilde_vs_P(
    params: StableParams,
    F: KernelSpec,
    x: Sequence[float],
    horizon: float,
    n_paths: int,
    master_seed: int,
    quad: QuadratureSpec,
    cutoff: float = 1e-3,
    doublings: int = 4,
    tol: float = 1e-3,
    k: float = 3.0,
    workers: Optional[int] = None
) -> ReverseEntropyEstimate:
    """
    E~_x of the sum of log(1 + F) - F/(1 + F) over all jumps.

    Also checks the scalar sandwich against the sum of F^2 on the same tilted
    paths, and the importance-sampling cross-check at the first horizon.
    """
    if F.lower_bound <= -1.0:
        raise InvalidArgumentError("inf F must exceed -1")
    fn = FIELD_INTEGRANDS[FieldKind.REVERSE_ENTROPY]
    tilted = TiltedPathSampler.for_kernel(params, F, cutoff)

    def increments(path: JumpPath) -> List[float]:
        f = jump_values(path, F)
        return [float(np.sum(fn(f))), float(np.sum(f * f))]

    run = run_doublings(tilted, x, n_paths, master_seed, horizon, doublings, increments, relative_flat_rule(tol), workers=workers)
    value = McEstimate.from_samples(run.final[:, 0])
    qv = McEstimate.from_samples(run.final[:, 1])
    if F.is_zero:
        lo = hi = 0.0
    else:
        lo, hi = sandwich_constants(fn, min(F.lower_bound, 0.0), max(F.upper_bound, 0.0))
    slack = 1e-9 * max(abs(value.mean), 1.0)
    within = lo * qv.mean - slack <= value.mean <= hi * qv.mean + slack

    h_eval = levy_field(params, F, FieldKind.H, quad, cutoff) if not F.is_zero else ConstantField(0.0)
    base = StablePathSampler(params, cutoff)

    def weighted(path: JumpPath) -> float:
        series = accumulate(path, F, h_eval, params)
        return math.exp(series.logL[-1]) * float(np.sum(fn(jump_values(path, F))))

    weighted_fixed = McEstimate.from_samples(base.map(weighted, x, n_paths, master_seed + 1, horizon, workers))
    tilted_fixed = McEstimate.from_samples(run.values[:, 0, 0])
    cross = tilted_fixed.agrees_with(weighted_fixed, k)
    logger.info(f"entropy(P~|P) for {F.name}: {value.mean:.5g} +- {value.std_err:.2g}, sandwich [{lo:.3g}, {hi:.3g}] x {qv.mean:.4g}")
    return ReverseEntropyEstimate(
        kernel=F.name,
        tilted=value,
        qv=qv,
        sandwich=(lo, hi),
        within_sandwich=within,
        fixed_horizon=horizon,
        tilted_fixed=tilted_fixed,
        weighted_fixed=weighted_fixed,
        cross_check=cross,
        horizon_used=run.horizons[-1],
        tail_flag=run.tail_flag
    )


def verdict_of(fraction_flat: float, quorum: float = FLAT_QUORUM) -> Verdict:
    if fraction_flat >= quorum:
        return Verdict.CONVERGENT_ALL
    if fraction_flat <= 1.0 - quorum:
        return Verdict.DIVERGENT_ALL
    return Verdict.MIXED


def dichotomy_diagnostic(
    params: StableParams,
    F: KernelSpec,
    x: Sequence[float],
    base_horizon: float,
    n_paths: int,
    doublings: int,
    master_seed: int,
    cutoff: float = 1e-3,
    tol: float = 1e-3,
    under: str = "base",
    workers: Optional[int] = None
) -> DichotomyReport:
    """
    Sum of F^2 along every path at horizons T 2^k and the flatness verdict.

    All doublings are run so the raw values support other tolerances. A Mixed
    verdict is reported as is.
    """
    if F.lower_bound <= -1.0:
        raise InvalidArgumentError("inf F must exceed -1")
    if doublings < 1:
        raise InvalidArgumentError("the verdict needs at least one doubling")
    sampler = _sampler(params, F, cutoff, SmallJumpPolicy.DROP, under)
    run = run_doublings(
        sampler, x, n_paths, master_seed, base_horizon, doublings,
        lambda p: [jump_sum(p, F, lambda f: f * f)], relative_flat_rule(tol), adaptive=False, workers=workers
    )
    qv = run.values[:, :, 0]
    horizons = np.asarray(run.horizons)
    slopes = (np.log1p(qv[:, -1]) - np.log1p(qv[:, 0])) / math.log(horizons[-1] / horizons[0])
    fraction = run.flat_fraction[-1]
    verdict = verdict_of(fraction)
    logger.info(f"dichotomy for {F.name} under {under}: flat fraction {fraction:.3f} -> {verdict.value}")
    return DichotomyReport(
        kernel=F.name,
        under=under,
        horizons=run.horizons,
        qv=qv.tolist(),
        slopes=slopes.tolist(),
        fraction_flat=fraction,
        tol=tol,
        verdict=verdict
    )


class SandwichRow(BaseModel):
    shell: Annulus
    base: McEstimate
    tilted: McEstimate
    ratio: float
    ratio_error: float
    within: bool


class GreenSandwichReport(BaseModel):
    kernel: str
    constant: float = Field(..., description="((1 + sup F) / (1 + inf F))^2")
    rows: List[SandwichRow]

    @property
    def passed(self) -> bool:
        return all(row.within for row in self.rows)


def green_sandwich_check(
    params: StableParams,
    F: KernelSpec,
    start: Sequence[float],
    shells: Sequence[Tuple[float, float]],
    n_paths: int,
    master_seed: int,
    cutoff: float,
    horizon: float,
    k: float = 3.0,
    workers: Optional[int] = None
) -> GreenSandwichReport:
    """Occupation of radial shells by tilted and base paths; the ratio must lie in [1/c, c]."""
    constant = ((1.0 + F.upper_bound) / (1.0 + F.lower_bound)) ** 2
    regions = [Annulus(center=(0.0,) * params.d, inner=a, outer=b) for a, b in shells]

    def occupations(path: JumpPath) -> List[float]:
        return [occupation_time(path, region) for region in regions]

    samples = {}
    for under in ("base", "tilted"):
        sampler = _sampler(params, F, cutoff, SmallJumpPolicy.DROP, under)
        samples[under] = np.array(sampler.map(occupations, start, n_paths, master_seed, horizon, workers))
    rows = []
    for j, region in enumerate(regions):
        base = McEstimate.from_samples(samples["base"][:, j])
        tilted = McEstimate.from_samples(samples["tilted"][:, j])
        if base.mean <= 0.0 or tilted.mean <= 0.0:
            raise NumericFailure(f"no occupation of shell ({region.inner:g}, {region.outer:g})")
        ratio = tilted.mean / base.mean
        error = ratio * math.hypot(tilted.std_err / tilted.mean, base.std_err / base.mean)
        within = 1.0 / constant - k * error <= ratio <= constant + k * error
        rows.append(SandwichRow(shell=region, base=base, tilted=tilted, ratio=ratio, ratio_error=error, within=within))
    return GreenSandwichReport(kernel=F.name, constant=constant, rows=rows)


class ExpectationGrowthReport(BaseModel):
    """E_x A_T along doubling horizons for the plain Fuchsian kernel."""
    kernel: str
    horizons: List[float]
    means: List[McEstimate]
    increment_ratios: List[float]
    green: float = Field(..., description="G h(x), +inf when divergent")
    divergent: bool


def fuchsian_expectation_growth(
    params: StableParams,
    C: float,
    beta: float,
    x: Sequence[float],
    base_horizon: float,
    doublings: int,
    n_paths: int,
    master_seed: int,
    quad: QuadratureSpec,
    cutoff: float = 1e-2,
    decay: float = 0.0,
    workers: Optional[int] = None
) -> ExpectationGrowthReport:
    """
    Growth of E_x A_T and the Green potential of h for C|x-y|^beta / (1 + |x|^b + |y|^b).

    Without decay the expectation grows without bound (logarithmically in T):
    the doubling increments do not shrink and G h diverges.
    """
    params.require_transient()
    F = fuchsian_kernel(C, beta, decay)
    run = run_doublings(
        StablePathSampler(params, cutoff), x, n_paths, master_seed, base_horizon, doublings,
        lambda p: [jump_sum(p, F)], relative_flat_rule(0.0), adaptive=False, workers=workers
    )
    means = [McEstimate.from_samples(run.values[:, i, 0]) for i in range(len(run.horizons))]
    steps = np.diff([0.0] + [m.mean for m in means])
    ratios = [float(steps[i] / steps[i - 1]) if steps[i - 1] > 0 else math.nan for i in range(2, len(steps))]
    green_value = green_potential(params, levy_field(params, F, FieldKind.H, quad), x, quad, "expectation")
    tail = [r for r in ratios[-2:] if math.isfinite(r)]
    divergent = math.isinf(green_value) and bool(tail) and min(tail) > 0.5
    return ExpectationGrowthReport(
        kernel=F.name,
        horizons=run.horizons,
        means=means,
        increment_ratios=ratios,
        green=green_value,
        divergent=divergent
    )
