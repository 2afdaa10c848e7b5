"""
Isotropic alpha-stable paths for the laboratory.
Exact increments by subordination and jump-resolved paths with a small-jump cutoff,
plus exit, hitting and distributional checks on them.
"""

import logging
import math
from typing import Any, Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple, TypeVar, Union

import numpy as np
from pydantic import BaseModel, Field
from scipy import integrate, special, stats

from .errors import InvalidArgumentError
from .models import (
    Annulus, Ball, JumpPath, McEstimate, SmallJumpPolicy, StableParams
)
from .montecarlo import BRIDGE_STREAM, derive_seed, map_chunks, path_stream

logger = logging.getLogger(__name__)

T = TypeVar("T")
Region = Union[Ball, Annulus]


class ExitData(BaseModel):
    """First exit from a region; tau is +inf when the path stays inside up to its horizon."""
    tau: float
    pre: Optional[Tuple[float, ...]] = None
    post: Optional[Tuple[float, ...]] = None

    @property
    def exited(self) -> bool:
        return math.isfinite(self.tau)


class TruncationBias(BaseModel):
    """Characteristic function of the truncated process against the exact one."""
    cutoff: float
    xi_norm: float
    horizon: float
    exponent_small: float = Field(..., description="Levy exponent of the jumps below the cutoff")
    target: float
    truncated: float
    bias: float


class LawCheckRow(BaseModel):
    xi: float
    estimate: McEstimate
    target: float
    passed: bool


class CutoffRow(BaseModel):
    cutoff: float
    estimate: McEstimate
    target: float
    bias: float
    ks_statistic: float
    ks_pvalue: float


class ScalingReport(BaseModel):
    radius: float
    scale: float
    n_exited: Tuple[int, int]
    ks_tau_pvalue: float
    ks_position_pvalue: float


def uniform_directions(stream: np.random.Generator, n: int, d: int) -> np.ndarray:
    """n points uniform on the unit sphere of R^d."""
    gauss = stream.standard_normal((n, d))
    norms = np.linalg.norm(gauss, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    return gauss / norms


def positive_stable(index: float, size: int, stream: np.random.Generator) -> np.ndarray:
    """
    One-sided stable variates with Laplace transform exp(-lambda^index), 0 < index < 1.

    Kanter's representation of the Chambers-Mallows-Stuck method.
    """
    u = np.pi * stream.random(size)
    u = np.where(u == 0.0, 0.5 * np.pi, u)
    e = stream.exponential(size=size)
    a = index
    return (
        np.sin(a * u) / np.sin(u) ** (1.0 / a)
        * (np.sin((1.0 - a) * u) / e) ** ((1.0 - a) / a)
    )


def sample_increment(
    params: StableParams,
    t: float,
    stream: np.random.Generator,
    size: Optional[int] = None
) -> np.ndarray:
    """
    Exact draw of X_t - X_0.

    Args:
        params: Process parameters
        t: Duration
        stream: Random stream
        size: Number of draws; a single point when omitted

    Returns:
        Array of shape (d,) or (size, d)
    """
    if t <= 0:
        raise InvalidArgumentError(f"duration must be positive, got {t}")
    n = 1 if size is None else int(size)
    subordinator = positive_stable(params.alpha / 2.0, n, stream) * t ** (2.0 / params.alpha)
    gauss = stream.standard_normal((n, params.d))
    draws = np.sqrt(2.0 * subordinator)[:, None] * gauss
    return draws[0] if size is None else draws


class JumpProposals(NamedTuple):
    """Raw draws of one segment: event times, jump vectors and optional Gaussian gaps."""
    times: np.ndarray
    jumps: np.ndarray
    gauss: Optional[np.ndarray]


def draw_jump_proposals(
    params: StableParams,
    rate_factor: float,
    t0: float,
    horizon: float,
    cutoff: float,
    policy: SmallJumpPolicy,
    stream: np.random.Generator
) -> JumpProposals:
    """
    Draw big jumps at `rate_factor` times the stable intensity on (t0, horizon].

    Draw order is count, times, radii, directions, then Gaussian gaps, so a
    sampler consuming extra uniforms afterwards sees the same jumps.
    """
    if horizon <= t0:
        raise InvalidArgumentError(f"horizon {horizon} must exceed t0 {t0}")
    if cutoff <= 0:
        raise InvalidArgumentError(f"cutoff must be positive, got {cutoff}")
    rate = rate_factor * params.big_jump_rate(cutoff)
    n = int(stream.poisson(rate * (horizon - t0)))
    times = np.sort(stream.uniform(t0, horizon, n))
    radii = cutoff * (1.0 - stream.random(n)) ** (-1.0 / params.alpha)
    jumps = radii[:, None] * uniform_directions(stream, n, params.d)
    gauss = None
    if policy == SmallJumpPolicy.BROWNIAN_MATCH:
        gaps = np.diff(np.concatenate([[t0], times, [horizon]]))
        scale = np.sqrt(params.brownian_rate(cutoff) * gaps)
        gauss = stream.standard_normal((n + 1, params.d)) * scale[:, None]
    return JumpProposals(times=times, jumps=jumps, gauss=gauss)


def assemble_path(
    start: np.ndarray,
    proposals: JumpProposals,
    t0: float,
    horizon: float,
    cutoff: float,
    policy: SmallJumpPolicy,
    seed: int,
    segment: int = 0
) -> JumpPath:
    """Turn accepted jumps (and Gaussian gaps) into a JumpPath."""
    start = np.asarray(start, dtype=float)
    n, d = len(proposals.times), len(start)
    jumps = proposals.jumps.reshape(n, d)
    before = np.vstack([np.zeros((1, d)), np.cumsum(jumps, axis=0)[:-1]]) if n else np.zeros((0, d))
    drift = np.zeros((n, d))
    end = start + jumps.sum(axis=0)
    if proposals.gauss is not None:
        drift = np.cumsum(proposals.gauss[:n], axis=0)
        end = end + proposals.gauss.sum(axis=0)
    pre = start + drift + before
    return JumpPath(
        start=start,
        horizon=horizon,
        times=proposals.times,
        pre=pre,
        post=pre + jumps,
        end=end,
        cutoff=cutoff,
        policy=policy,
        seed=seed,
        t0=t0,
        segment=segment
    )


def sample_jump_path(
    params: StableParams,
    start: Sequence[float],
    horizon: float,
    cutoff: float,
    policy: SmallJumpPolicy,
    stream: np.random.Generator,
    seed: int = 0,
    t0: float = 0.0,
    segment: int = 0
) -> JumpPath:
    """
    Jump-resolved path on (t0, horizon].

    Args:
        params: Process parameters
        start: Position at t0
        horizon: Final time
        cutoff: Jumps shorter than this are dropped or replaced by Brownian motion
        policy: Small-jump policy
        stream: Random stream (consumed)
        seed: Seed recorded on the path
        t0: Initial time
        segment: Segment index recorded on the path

    Returns:
        Immutable JumpPath
    """
    start = np.asarray(start, dtype=float).reshape(-1)
    if len(start) != params.d:
        raise InvalidArgumentError(f"start has dimension {len(start)}, expected {params.d}")
    proposals = draw_jump_proposals(params, 1.0, t0, horizon, cutoff, policy, stream)
    return assemble_path(start, proposals, t0, horizon, cutoff, policy, seed, segment)


class PathSampler:
    """
    Draws independent paths, each from its own stream.

    Subclasses implement `sample`; `map` runs a per-path reducer over many
    paths on the worker pool without keeping the paths alive.
    """

    def __init__(self, params: StableParams, cutoff: float, policy: SmallJumpPolicy = SmallJumpPolicy.DROP):
        if cutoff <= 0:
            raise InvalidArgumentError(f"cutoff must be positive, got {cutoff}")
        self.params = params
        self.cutoff = cutoff
        self.policy = SmallJumpPolicy(policy)

    @property
    def label(self) -> str:
        return "base"

    def sample(
        self,
        starts: np.ndarray,
        seeds: Sequence[int],
        t0: float,
        horizon: float,
        segment: int = 0
    ) -> List[JumpPath]:
        raise NotImplementedError

    def map(
        self,
        fn: Callable[[JumpPath], T],
        start: Sequence[float],
        n_paths: int,
        master_seed: int,
        horizon: float,
        workers: Optional[int] = None
    ) -> List[T]:
        """Apply `fn` to n_paths fresh paths from `start`, in path-index order."""
        origin = np.asarray(start, dtype=float).reshape(-1)

        def run(chunk: range) -> List[T]:
            seeds = [derive_seed(master_seed, i) for i in chunk]
            starts = np.repeat(origin[None, :], len(chunk), axis=0)
            return [fn(path) for path in self.sample(starts, seeds, 0.0, horizon)]

        return map_chunks(run, n_paths, workers)


class StablePathSampler(PathSampler):
    """Sampler of the untilted process."""

    def sample(
        self,
        starts: np.ndarray,
        seeds: Sequence[int],
        t0: float,
        horizon: float,
        segment: int = 0
    ) -> List[JumpPath]:
        return [
            sample_jump_path(
                self.params, start, horizon, self.cutoff, self.policy,
                path_stream(seed, segment), seed=seed, t0=t0, segment=segment
            )
            for start, seed in zip(np.atleast_2d(starts), seeds)
        ]


def concat_paths(segments: Sequence[JumpPath]) -> JumpPath:
    """Join consecutive segments (each starting where the previous ended) into one path."""
    if not segments:
        raise InvalidArgumentError("no segments to join")
    first = segments[0]
    for prev, nxt in zip(segments, segments[1:]):
        if nxt.t0 != prev.horizon or not np.array_equal(nxt.start, prev.end):
            raise InvalidArgumentError("segments are not contiguous")
    d = first.d
    return JumpPath(
        start=first.start,
        horizon=segments[-1].horizon,
        times=np.concatenate([s.times for s in segments]),
        pre=np.vstack([s.pre.reshape(-1, d) for s in segments]),
        post=np.vstack([s.post.reshape(-1, d) for s in segments]),
        end=segments[-1].end,
        cutoff=first.cutoff,
        policy=first.policy,
        seed=first.seed,
        t0=first.t0,
        segment=first.segment
    )


def position_at(path: JumpPath, t: float) -> np.ndarray:
    """
    Position at time t.

    Exact under Drop; under BrownianMatch the bridge mean between anchors
    (use `bridge_skeleton` for sampled interior points).
    """
    if t < path.t0 or t > path.horizon:
        raise InvalidArgumentError(f"t={t} outside [{path.t0}, {path.horizon}]")
    k = int(np.searchsorted(path.times, t, side="right"))
    left = path.start if k == 0 else path.post[k - 1]
    if path.policy == SmallJumpPolicy.DROP:
        return left.copy()
    a = path.t0 if k == 0 else path.times[k - 1]
    b = path.horizon if k == path.n_jumps else path.times[k]
    right = path.end if k == path.n_jumps else path.pre[k]
    if b <= a:
        return left.copy()
    return left + (t - a) / (b - a) * (right - left)


def bridge_skeleton(
    path: JumpPath,
    params: StableParams,
    mesh: float
) -> List[Tuple[np.ndarray, np.ndarray]]:
    """
    Sampled positions on every gap between anchors.

    Returns one (times, positions) pair per gap. Under BrownianMatch the
    interior points are Brownian bridges drawn from the path's bridge stream,
    so the skeleton of a given path is reproducible.
    """
    if mesh <= 0:
        raise InvalidArgumentError(f"mesh must be positive, got {mesh}")
    starts_t = np.concatenate([[path.t0], path.times])
    ends_t = np.concatenate([path.times, [path.horizon]])
    left = path.knot_positions
    right = np.vstack([path.pre, path.end[None, :]])
    gaps: List[Tuple[np.ndarray, np.ndarray]] = []
    if path.policy == SmallJumpPolicy.DROP:
        for a, b, p in zip(starts_t, ends_t, left):
            gaps.append((np.array([a, b]), np.vstack([p, p])))
        return gaps
    rate = params.brownian_rate(path.cutoff)
    stream = path_stream(path.seed, path.segment, BRIDGE_STREAM)
    d = path.d
    for a, b, p, q in zip(starts_t, ends_t, left, right):
        length = b - a
        if length <= 0.0:
            gaps.append((np.array([a, b]), np.vstack([p, q])))
            continue
        m = max(1, int(math.ceil(length / mesh)))
        grid = np.linspace(a, b, m + 1)
        steps = stream.standard_normal((m, d)) * math.sqrt(rate * length / m)
        walk = np.vstack([np.zeros((1, d)), np.cumsum(steps, axis=0)])
        frac = ((grid - a) / length)[:, None]
        gaps.append((grid, p + walk - frac * (walk[-1] - (q - p))))
    return gaps


def exit_data(path: JumpPath, region: Region) -> ExitData:
    """
    First exit of the path from `region` before its horizon.

    Under BrownianMatch continuous exits are detected at the anchors only.
    """
    if not bool(region.contains(path.start[None, :])[0]):
        raise InvalidArgumentError("path must start inside the region")
    if isinstance(region, Ball) and math.isinf(region.radius):
        return ExitData(tau=math.inf)
    n = path.n_jumps
    out_post = ~region.contains(path.post) if n else np.zeros(0, dtype=bool)
    out_pre = np.zeros(n, dtype=bool)
    if path.policy == SmallJumpPolicy.BROWNIAN_MATCH and n:
        out_pre = ~region.contains(path.pre)
    hits = np.flatnonzero(out_post | out_pre)
    if len(hits):
        i = int(hits[0])
        if out_pre[i]:
            point = tuple(path.pre[i].tolist())
            return ExitData(tau=float(path.times[i]), pre=point, post=point)
        return ExitData(
            tau=float(path.times[i]), pre=tuple(path.pre[i].tolist()), post=tuple(path.post[i].tolist())
        )
    if path.policy == SmallJumpPolicy.BROWNIAN_MATCH and not bool(region.contains(path.end[None, :])[0]):
        point = tuple(path.end.tolist())
        return ExitData(tau=float(path.horizon), pre=point, post=point)
    return ExitData(tau=math.inf)


def first_hit_time(path: JumpPath, ball: Ball) -> float:
    """First event time at which the path sits in `ball`, +inf if never."""
    inside = ball.contains(path.post) if path.n_jumps else np.zeros(0, dtype=bool)
    if path.policy == SmallJumpPolicy.BROWNIAN_MATCH and path.n_jumps:
        inside = inside | ball.contains(path.pre)
    hits = np.flatnonzero(inside)
    if len(hits):
        return float(path.times[hits[0]])
    if path.policy == SmallJumpPolicy.BROWNIAN_MATCH and bool(ball.contains(path.end[None, :])[0]):
        return float(path.horizon)
    return math.inf


def occupation_time(path: JumpPath, region: Region, until: Optional[float] = None) -> float:
    """Time the piecewise-constant path spends in `region` on [t0, until]."""
    stop = path.horizon if until is None else min(until, path.horizon)
    edges = np.concatenate([[path.t0], path.times, [path.horizon]])
    durations = np.clip(np.minimum(edges[1:], stop) - edges[:-1], 0.0, None)
    inside = region.contains(path.knot_positions)
    return float(np.sum(durations[inside]))


def hitting_prob_estimate(
    params: StableParams,
    start: Sequence[float],
    target: Ball,
    horizon: float,
    n_paths: int,
    master_seed: int,
    cutoff: float = 1e-3,
    policy: SmallJumpPolicy = SmallJumpPolicy.DROP,
    workers: Optional[int] = None
) -> McEstimate:
    """
    Estimate P_x(T_B < horizon), a lower bound of P_x(T_B < infinity).

    Args:
        params: Process parameters (alpha < d)
        start: Starting point outside the target
        target: Ball to hit
        horizon: Simulation horizon
        n_paths: Number of paths
        master_seed: Seed of the path family
        cutoff: Small-jump cutoff
        policy: Small-jump policy
        workers: Thread count

    Returns:
        McEstimate of the hitting indicator
    """
    params.require_transient()
    origin = np.asarray(start, dtype=float)
    if math.isinf(target.radius):
        return McEstimate(mean=1.0, std_err=0.0, n=max(n_paths, 2))
    if bool(target.contains(origin[None, :])[0]):
        raise InvalidArgumentError("start must lie outside the target ball")
    sampler = StablePathSampler(params, cutoff, policy)
    hits = sampler.map(
        lambda path: float(math.isfinite(first_hit_time(path, target))),
        origin, n_paths, master_seed, horizon, workers
    )
    estimate = McEstimate.from_samples(hits)
    logger.debug(f"hitting B({target.center}, {target.radius}) from {origin.tolist()}: {estimate.mean:.4f}")
    return estimate


def spherical_mean_cos(s: np.ndarray, d: int) -> np.ndarray:
    """Average of cos(s * omega_1) over the unit sphere of R^d."""
    s = np.asarray(s, dtype=float)
    nu = d / 2.0 - 1.0
    safe = np.where(s < 1e-6, 1.0, s)
    value = special.gamma(d / 2.0) * (2.0 / safe) ** nu * special.jv(nu, safe)
    return np.where(s < 1e-6, 1.0 - s * s / (2.0 * d), value)


def small_jump_exponent(params: StableParams, cutoff: float, xi_norm: float) -> float:
    """Levy exponent at |xi| of the jumps shorter than the cutoff."""
    if cutoff <= 0:
        raise InvalidArgumentError(f"cutoff must be positive, got {cutoff}")
    if xi_norm == 0.0:
        return 0.0
    integrand = lambda r: (1.0 - spherical_mean_cos(xi_norm * r, params.d)) * r ** (-1.0 - params.alpha)
    value, _ = integrate.quad(integrand, 0.0, cutoff, limit=200)
    return params.levy_const * params.sphere_area * value


def truncation_bias(
    params: StableParams,
    cutoff: float,
    xi_norm: float,
    horizon: float,
    policy: SmallJumpPolicy = SmallJumpPolicy.DROP
) -> TruncationBias:
    """
    Gap between E cos(xi.X_T) of the truncated process and exp(-T|xi|^alpha).
    """
    exponent = abs(xi_norm) ** params.alpha
    small = small_jump_exponent(params, cutoff, abs(xi_norm))
    truncated_exponent = exponent - small
    if policy == SmallJumpPolicy.BROWNIAN_MATCH:
        truncated_exponent += 0.5 * params.brownian_rate(cutoff) * xi_norm ** 2
    target = math.exp(-horizon * exponent)
    truncated = math.exp(-horizon * truncated_exponent)
    return TruncationBias(
        cutoff=cutoff, xi_norm=xi_norm, horizon=horizon, exponent_small=small,
        target=target, truncated=truncated, bias=abs(truncated - target)
    )


def characteristic_check(
    params: StableParams,
    t: float,
    xi_values: Sequence[float],
    n_draws: int,
    seed: int,
    k: float = 4.0
) -> List[LawCheckRow]:
    """Mean of cos(xi X_t^1) over exact increments against exp(-t|xi|^alpha)."""
    draws = sample_increment(params, t, path_stream(seed), size=n_draws)[:, 0]
    rows = []
    for xi in xi_values:
        estimate = McEstimate.from_samples(np.cos(xi * draws))
        target = math.exp(-t * abs(xi) ** params.alpha)
        rows.append(LawCheckRow(xi=xi, estimate=estimate, target=target, passed=estimate.within(target, k)))
    return rows


def jump_characteristic_check(
    params: StableParams,
    t: float,
    xi_values: Sequence[float],
    n_paths: int,
    master_seed: int,
    cutoff: float,
    policy: SmallJumpPolicy = SmallJumpPolicy.DROP,
    k: float = 6.0,
    workers: Optional[int] = None
) -> List[LawCheckRow]:
    """The same check on the end points of jump-resolved paths, allowing for the truncation bias."""
    sampler = StablePathSampler(params, cutoff, policy)
    ends = np.array(sampler.map(lambda p: p.end[0], np.zeros(params.d), n_paths, master_seed, t, workers))
    rows = []
    for xi in xi_values:
        estimate = McEstimate.from_samples(np.cos(xi * ends))
        bias = truncation_bias(params, cutoff, xi, t, policy).bias
        target = math.exp(-t * abs(xi) ** params.alpha)
        rows.append(LawCheckRow(xi=xi, estimate=estimate, target=target, passed=estimate.within(target, k, bias)))
    return rows


def cutoff_consistency(
    params: StableParams,
    cutoffs: Sequence[float],
    horizon: float,
    xi_norm: float,
    n_paths: int,
    master_seed: int,
    policy: SmallJumpPolicy = SmallJumpPolicy.DROP,
    workers: Optional[int] = None
) -> List[CutoffRow]:
    """
    Compare jump-path end points with exact increments for decreasing cutoffs.

    Reports E cos(xi X_T^1), the analytic truncation bias and the two-sample
    KS statistic on the first coordinate.
    """
    exact = sample_increment(params, horizon, path_stream(master_seed, 0), size=n_paths)[:, 0]
    rows = []
    for cutoff in cutoffs:
        sampler = StablePathSampler(params, cutoff, policy)
        ends = np.array(sampler.map(lambda p: p.end[0], np.zeros(params.d), n_paths, master_seed, horizon, workers))
        ks = stats.ks_2samp(ends, exact)
        rows.append(CutoffRow(
            cutoff=cutoff,
            estimate=McEstimate.from_samples(np.cos(xi_norm * ends)),
            target=math.exp(-horizon * abs(xi_norm) ** params.alpha),
            bias=truncation_bias(params, cutoff, xi_norm, horizon, policy).bias,
            ks_statistic=float(ks.statistic),
            ks_pvalue=float(ks.pvalue)
        ))
        logger.info(f"cutoff {cutoff:g}: KS statistic {ks.statistic:.4f}")
    return rows


def isotropy_check(params: StableParams, t: float, n_draws: int, seed: int) -> Dict[str, float]:
    """KS p-values comparing X_t with a rotated independent copy (norm and first coordinate)."""
    first = sample_increment(params, t, path_stream(seed, 0), size=n_draws)
    second = sample_increment(params, t, path_stream(seed, 1), size=n_draws)
    if params.d == 1:
        rotation = -np.eye(1)
    else:
        rotation = stats.special_ortho_group.rvs(params.d, random_state=path_stream(seed, 2))
    rotated = second @ rotation.T
    return {
        "norm_pvalue": float(stats.ks_2samp(np.linalg.norm(first, axis=1), np.linalg.norm(rotated, axis=1)).pvalue),
        "coordinate_pvalue": float(stats.ks_2samp(first[:, 0], rotated[:, 0]).pvalue),
    }


def scaling_check(
    params: StableParams,
    radius: float,
    x: Sequence[float],
    scale: float,
    n_paths: int,
    master_seed: int,
    cutoff: float,
    horizon: float,
    workers: Optional[int] = None
) -> ScalingReport:
    """
    Law of (tau_D, R X_tau) from x against (R^{-alpha} tau_{RD}, X_tau) from Rx.

    The cutoff and horizon of the scaled run are scaled as well, so both
    truncated laws are exactly comparable.
    """
    origin = np.asarray(x, dtype=float)
    d = params.d

    def exits(r: float, eps: float, t_max: float, start: np.ndarray, seed: int) -> List[ExitData]:
        sampler = StablePathSampler(params, eps)
        region = Ball(center=(0.0,) * d, radius=r)
        return sampler.map(lambda p: exit_data(p, region), start, n_paths, seed, t_max, workers)

    small = exits(radius, cutoff, horizon, origin, master_seed)
    large = exits(scale * radius, scale * cutoff, scale ** params.alpha * horizon, scale * origin, master_seed + 1)
    tau_a = np.array([e.tau for e in small if e.exited])
    tau_b = np.array([e.tau for e in large if e.exited]) * scale ** (-params.alpha)
    pos_a = np.array([scale * e.post[0] for e in small if e.exited])
    pos_b = np.array([e.post[0] for e in large if e.exited])
    if min(len(tau_a), len(tau_b)) < 2:
        raise InvalidArgumentError("too few exits before the horizon for a scaling check")
    return ScalingReport(
        radius=radius,
        scale=scale,
        n_exited=(len(tau_a), len(tau_b)),
        ks_tau_pvalue=float(stats.ks_2samp(tau_a, tau_b).pvalue),
        ks_position_pvalue=float(stats.ks_2samp(pos_a, pos_b).pvalue)
    )


def path_to_record(path: JumpPath) -> Dict[str, Any]:
    """JSONL record of a path."""
    return {
        "seed": path.seed,
        "segment": path.segment,
        "start": path.start.tolist(),
        "t0": path.t0,
        "horizon": path.horizon,
        "cutoff": path.cutoff,
        "policy": path.policy.value,
        "events": [
            {"t": float(t), "pre": a.tolist(), "post": b.tolist()}
            for t, a, b in zip(path.times, path.pre, path.post)
        ],
        "end": path.end.tolist(),
    }


def path_from_record(record: Dict[str, Any]) -> JumpPath:
    """Inverse of `path_to_record`."""
    d = len(record["start"])
    events = record.get("events", [])
    return JumpPath(
        start=record["start"],
        horizon=record["horizon"],
        times=[e["t"] for e in events],
        pre=np.array([e["pre"] for e in events], dtype=float).reshape(len(events), d),
        post=np.array([e["post"] for e in events], dtype=float).reshape(len(events), d),
        end=record.get("end", record["start"]),
        cutoff=record["cutoff"],
        policy=SmallJumpPolicy(record["policy"]),
        seed=record["seed"],
        t0=record.get("t0", 0.0),
        segment=record.get("segment", 0)
    )
