"""
Potential theory of the isotropic stable process.
Green functions of the whole space and of balls, the Poisson kernel of a ball,
Green potentials, and the 3G and conditioned double integrals over a ball.
"""

import logging
import math
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field
from scipy import integrate, special

from .errors import InvalidArgumentError, NumericFailure
from .fields import ScalarField
from .kernels import truncated_power_kernel
from .models import Ball, KernelSpec, KernelTagKind, McEstimate, QuadratureSpec, SmallJumpPolicy, StableParams
from .quadrature import adaptive, angular_rule, legendre_rule, radial_integral
from .stable_process import StablePathSampler, exit_data, occupation_time

logger = logging.getLogger(__name__)

TUBE_WIDTH = 0.1
GRID_POINTS = (0.0, 0.2, 0.7, 0.99, -0.8)
NEAR_SHIFT = 1e-2


def _as_rows(points: np.ndarray, d: int) -> np.ndarray:
    return np.asarray(points, dtype=float).reshape(-1, d)


def green(params: StableParams, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """
    G(x, y) = c(d, alpha) |x - y|^(alpha - d); +inf on the diagonal.

    Broadcasts over rows; returns a float for two single points.
    """
    params.require_transient()
    x_arr, y_arr = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    single = x_arr.ndim == 1 and y_arr.ndim == 1
    dist = np.linalg.norm(np.atleast_2d(x_arr) - np.atleast_2d(y_arr), axis=1)
    with np.errstate(divide="ignore"):
        values = params.green_const * dist ** (params.alpha - params.d)
    values = np.where(dist == 0.0, math.inf, values)
    return float(values[0]) if single else values


def green_potential(
    params: StableParams,
    field: ScalarField,
    x: Sequence[float],
    quad: QuadratureSpec,
    label: str = "green potential"
) -> float:
    """
    Integral of G(x, y) h(y) dy for a non-negative field h.

    Polar coordinates at x with the exponent alpha - d absorbed by u = r^alpha;
    geometric panels outward.

    Returns:
        The potential, or +inf when the outer panels do not decay
    """
    params.require_transient()
    quad.check_exponents(params.d)
    exponent = quad.singularity_exponents[0] if quad.singularity_exponents else params.alpha - params.d
    nodes, weights = angular_rule(params.d, quad.angular_nodes)
    centre = np.asarray(x, dtype=float).reshape(1, params.d)

    def shell(r: float) -> float:
        return float(weights @ field(centre + r * nodes))

    result = radial_integral(
        shell, params.alpha - 1.0, quad, near_power=params.d + exponent, split=1.0, label=label
    )
    if result.divergent:
        logger.warning(f"{label}: divergent at x={centre.ravel().tolist()}")
        return math.inf
    return params.green_const * result.value


def _green_core(params: StableParams, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """G_B(x, y) |x - y|^(d - alpha) for the unit ball; rows broadcast."""
    a, b = params.alpha / 2.0, (params.d - params.alpha) / 2.0
    nx = np.sum(x * x, axis=-1)
    ny = np.sum(y * y, axis=-1)
    gap = np.sum((x - y) ** 2, axis=-1)
    product = np.clip((1.0 - nx) * (1.0 - ny), 0.0, None)
    denominator = product + gap
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(denominator > 0.0, product / denominator, 0.0)
    return params.green_const * special.betainc(a, b, ratio)


def unit_ball_green(params: StableParams, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Green function of the unit ball (zero outside, +inf on the diagonal)."""
    dist = np.linalg.norm(np.asarray(x) - np.asarray(y), axis=-1)
    core = _green_core(params, np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    with np.errstate(divide="ignore", invalid="ignore"):
        values = core * dist ** (params.alpha - params.d)
    return np.where(dist == 0.0, math.inf, values)


def ball_green(params: StableParams, ball: Ball, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """
    Green function of the process killed on leaving `ball`.

    G_B(x, y) = c(d, alpha) |x-y|^(alpha-d) I_{w/(1+w)}(alpha/2, (d-alpha)/2) with
    w = (1-|x|^2)(1-|y|^2)/|x-y|^2 on the unit ball, mapped to B(c, r) by
    G_{B(c,r)}(x, y) = r^(alpha-d) G_B((x-c)/r, (y-c)/r).
    """
    params.require_transient()
    d = params.d
    centre = np.asarray(ball.center, dtype=float)
    xs = (_as_rows(x, d) - centre) / ball.radius
    ys = (_as_rows(y, d) - centre) / ball.radius
    if np.any(np.linalg.norm(xs, axis=1) >= 1.0) or np.any(np.linalg.norm(ys, axis=1) >= 1.0):
        raise InvalidArgumentError("ball Green function arguments must lie in the open ball")
    values = ball.radius ** (params.alpha - d) * unit_ball_green(params, xs, ys)
    single = np.asarray(x).ndim == 1 and np.asarray(y).ndim == 1
    return float(values[0]) if single else values


def expected_exit_time(params: StableParams, ball: Ball, x: Sequence[float]) -> float:
    """E_x of the exit time of a ball, (r^2 - |x-c|^2)^(alpha/2) times a Gamma-function constant."""
    a, d = params.alpha, params.d
    offset = np.asarray(x, dtype=float) - np.asarray(ball.center, dtype=float)
    gap = ball.radius ** 2 - float(offset @ offset)
    if gap <= 0.0:
        raise InvalidArgumentError("point must lie in the open ball")
    constant = special.gamma(d / 2.0) / (2.0 ** a * special.gamma(1.0 + a / 2.0) * special.gamma((d + a) / 2.0))
    return float(constant * gap ** (a / 2.0))


def ball_green_mass(params: StableParams, ball: Ball, x: Sequence[float], region: Ball, quad: QuadratureSpec) -> float:
    """Integral of G_B(x, .) over a small ball `region` inside `ball` (x outside the region)."""
    d = params.d
    centre = np.asarray(region.center, dtype=float)
    point = np.asarray(x, dtype=float)
    if np.linalg.norm(point - centre) <= region.radius:
        raise InvalidArgumentError("x must lie outside the integration region")
    nodes, weights = angular_rule(d, quad.angular_nodes)

    def shell(rho: float) -> float:
        ys = centre + rho * nodes
        return float(weights @ ball_green(params, ball, np.repeat(point[None, :], len(ys), axis=0), ys))

    value, error, ok = adaptive(lambda rho: rho ** (d - 1) * shell(rho), 0.0, region.radius, quad)
    if not ok:
        raise NumericFailure("occupation integral missed its tolerance", partial_value=value, error_estimate=error)
    return value


class OccupationReport(BaseModel):
    """Monte Carlo occupation of a small ball before leaving the domain, against the G_B integral."""
    monte_carlo: McEstimate
    quadrature: float
    agree: bool


def occupation_oracle(
    params: StableParams,
    domain: Ball,
    x: Sequence[float],
    region: Ball,
    n_paths: int,
    master_seed: int,
    cutoff: float,
    horizon: float,
    quad: QuadratureSpec,
    workers: Optional[int] = None
) -> OccupationReport:
    """Expected time spent in `region` before leaving `domain`, two ways."""
    sampler = StablePathSampler(params, cutoff, SmallJumpPolicy.DROP)

    def occupation(path) -> float:
        tau = exit_data(path, domain).tau
        return occupation_time(path, region, until=tau)

    estimate = McEstimate.from_samples(sampler.map(occupation, x, n_paths, master_seed, horizon, workers))
    value = ball_green_mass(params, domain, x, region, quad)
    return OccupationReport(
        monte_carlo=estimate, quadrature=value, agree=estimate.within(value, 3.0, quad.tol * value)
    )


class PoissonConstantReport(BaseModel):
    """Normalization of the ball Poisson kernel."""
    numeric: float = Field(..., description="Constant fixed by unit total mass")
    closed_form: float = Field(..., description="Gamma(d/2) sin(pi alpha/2) / pi^(1+d/2)")
    unnormalized: float = Field(..., description="pi^(1+d/2) Gamma(d/2) sin(pi alpha/2)")
    unnormalized_over_numeric: float
    closed_form_rel_error: float


@lru_cache(maxsize=32)
def _poisson_constant(d: int, alpha: float, tol: float) -> float:
    params = StableParams(d=d, alpha=alpha)
    weight_exp = -alpha / 2.0
    inner, _ = integrate.quad(
        lambda rho: (rho + 1.0) ** weight_exp / rho, 1.0, 2.0, weight="alg", wvar=(weight_exp, 0.0), epsrel=tol
    )
    outer, _ = integrate.quad(lambda rho: (rho * rho - 1.0) ** weight_exp / rho, 2.0, math.inf, epsrel=tol, limit=200)
    return 1.0 / (params.sphere_area * (inner + outer))


def poisson_constant(params: StableParams, quad: QuadratureSpec) -> float:
    """Constant making the Poisson kernel of B(0, r) a probability density in z (pinned numerically)."""
    return _poisson_constant(params.d, params.alpha, min(quad.tol, 1e-8))


def poisson_constant_report(params: StableParams, quad: QuadratureSpec) -> PoissonConstantReport:
    a, d = params.alpha, params.d
    numeric = poisson_constant(params, quad)
    closed = special.gamma(d / 2.0) * math.sin(math.pi * a / 2.0) / math.pi ** (1.0 + d / 2.0)
    unnormalized = math.pi ** (1.0 + d / 2.0) * special.gamma(d / 2.0) * math.sin(math.pi * a / 2.0)
    return PoissonConstantReport(
        numeric=numeric,
        closed_form=float(closed),
        unnormalized=float(unnormalized),
        unnormalized_over_numeric=float(unnormalized / numeric),
        closed_form_rel_error=float(abs(closed / numeric - 1.0))
    )


def poisson_kernel(params: StableParams, r: float, x: Sequence[float], z: np.ndarray, quad: Optional[QuadratureSpec] = None) -> np.ndarray:
    """
    Exit density of B(0, r) from x at z, |x| < r < |z|.

    Vectorized over rows of z.
    """
    quad = quad or QuadratureSpec()
    d = params.d
    point = np.asarray(x, dtype=float)
    zs = _as_rows(z, d)
    nz = np.linalg.norm(zs, axis=1)
    if np.linalg.norm(point) >= r or np.any(nz <= r):
        raise InvalidArgumentError("Poisson kernel needs |x| < r < |z|")
    ratio = (r * r - float(point @ point)) / (nz * nz - r * r)
    values = poisson_constant(params, quad) * ratio ** (params.alpha / 2.0) * np.linalg.norm(zs - point, axis=1) ** (-d)
    return float(values[0]) if np.asarray(z).ndim == 1 else values


def poisson_mass(params: StableParams, r: float, x: Sequence[float], quad: QuadratureSpec, beyond: Optional[float] = None) -> float:
    """
    Mass of the Poisson kernel of B(0, r) from x on {|z| > beyond} (beyond defaults to r).

    The edge singularity (rho - r)^(-alpha/2) is removed by rho = r + u^(1/q), q = 1 - alpha/2.
    """
    d = params.d
    point = np.asarray(x, dtype=float)
    R = r if beyond is None else beyond
    if R < r:
        raise InvalidArgumentError("beyond must be at least r")
    if np.linalg.norm(point) >= r:
        raise InvalidArgumentError("x must lie in B(0, r)")
    nodes, weights = angular_rule(d, quad.angular_nodes)
    c_hat = poisson_constant(params, quad)
    gap = r * r - float(point @ point)
    q = 1.0 - params.alpha / 2.0

    def edge(delta: float) -> float:
        """Radial density times (rho - r)^(alpha/2), rho = r + delta."""
        rho = r + delta
        spherical = float(weights @ np.linalg.norm(rho * nodes - point, axis=1) ** (-d))
        return c_hat * (gap / (2.0 * r + delta)) ** (params.alpha / 2.0) * rho ** (d - 1) * spherical

    radial = lambda rho: edge(rho - r) * (rho - r) ** (-params.alpha / 2.0)

    total, error, ok = 0.0, 0.0, True
    far = max(2.0 * r, R)
    if R < far:
        if R == r:
            v, e, good = adaptive(lambda u: edge(u ** (1.0 / q)) / q, 0.0, (far - r) ** q, quad)
        else:
            v, e, good = adaptive(radial, R, far, quad)
        total, error, ok = total + v, error + e, ok and good
    v, e = integrate.quad(radial, far, math.inf, epsrel=quad.tol, epsabs=quad.abs_tol, limit=quad.max_refine)
    total, error = total + v, error + e
    if not ok:
        raise NumericFailure("Poisson mass missed its tolerance", partial_value=total, error_estimate=error)
    return total


def exit_probability_beyond(params: StableParams, r: float, x: Sequence[float], R: float, quad: QuadratureSpec) -> float:
    """P_x(|X at the exit from B(0, r)| > R)."""
    return poisson_mass(params, r, x, quad, beyond=R)


class ExitLawReport(BaseModel):
    monte_carlo: McEstimate
    quadrature: float
    unexited: int
    agree: bool


def exit_law_check(
    params: StableParams,
    r: float,
    R: float,
    x: Sequence[float],
    n_paths: int,
    master_seed: int,
    cutoff: float,
    horizon: float,
    quad: QuadratureSpec,
    workers: Optional[int] = None
) -> ExitLawReport:
    """Empirical P(|X_tau| > R) on leaving B(0, r) against the Poisson-kernel quadrature."""
    sampler = StablePathSampler(params, cutoff, SmallJumpPolicy.DROP)
    region = Ball(center=(0.0,) * params.d, radius=r)
    exits = sampler.map(lambda p: exit_data(p, region), x, n_paths, master_seed, horizon, workers)
    beyond = [float(e.exited and np.linalg.norm(e.post) > R) for e in exits]
    unexited = sum(1 for e in exits if not e.exited)
    estimate = McEstimate.from_samples(beyond)
    value = exit_probability_beyond(params, r, x, R, quad)
    return ExitLawReport(monte_carlo=estimate, quadrature=value, unexited=unexited, agree=estimate.within(value, 3.0))


def _riesz_sphere_mean(params: StableParams, rho: float, W: float) -> float:
    """Sphere integral of G(rho omega, w) over omega, |w| = W."""
    a, d = params.alpha, params.d
    if d == 1:
        return params.green_const * (abs(rho - W) ** (a - 1.0) + (rho + W) ** (a - 1.0))
    if d == 3:
        if abs(a - 1.0) < 1e-12:
            mean = math.log((W + rho) / abs(W - rho)) / (2.0 * W * rho)
        else:
            mean = ((W + rho) ** (a - 1.0) - abs(W - rho) ** (a - 1.0)) / (2.0 * (a - 1.0) * W * rho)
        return params.green_const * 4.0 * math.pi * mean
    raise InvalidArgumentError("the mean-value check is implemented for d = 1 and d = 3")


def poisson_harmonicity(params: StableParams, r: float, w: float, quad: QuadratureSpec) -> Tuple[float, float]:
    """
    Integral of P_r(0, z) G(z, w) dz against G(0, w), |w| > 2r.

    Returns:
        (integral, G(0, w))
    """
    params.require_transient()
    if w <= 2.0 * r:
        raise InvalidArgumentError("need |w| > 2r")
    c_hat = poisson_constant(params, quad)
    a, d = params.alpha, params.d

    def edge(delta: float) -> float:
        rho = r + delta
        density = c_hat * (r * r / (2.0 * r + delta)) ** (a / 2.0) * rho ** (-d)
        return rho ** (d - 1) * density * _riesz_sphere_mean(params, rho, w)

    radial = lambda rho: edge(rho - r) * (rho - r) ** (-a / 2.0)
    q = 1.0 - a / 2.0
    total = adaptive(lambda u: edge(u ** (1.0 / q)) / q, 0.0, r ** q, quad)[0]
    total += adaptive(radial, 2.0 * r, w, quad)[0]
    total += adaptive(radial, w, 2.0 * w, quad)[0]
    total += integrate.quad(radial, 2.0 * w, math.inf, epsrel=quad.tol, limit=quad.max_refine)[0]
    return total, params.green_const * w ** (a - d)


def _exit_distance(points: np.ndarray, directions: np.ndarray) -> np.ndarray:
    """Distance from each point to the unit sphere along each direction, shape (m, k)."""
    b = points @ directions.T
    c = 1.0 - np.sum(points * points, axis=1)
    return -b + np.sqrt(np.clip(b * b + c[:, None], 0.0, None))


def _mesh_sizes(mesh: int) -> Tuple[int, int]:
    """(radial, angular) node counts at a refinement level."""
    return 8 * 2 ** mesh, 4 * 2 ** mesh


PairFactor = Callable[[np.ndarray, np.ndarray], np.ndarray]


def _polar_nodes(d: int, centre: np.ndarray, power: float, mesh: int, reach: float = math.inf) -> Tuple[np.ndarray, np.ndarray]:
    """
    Nodes centre + rho omega inside the unit ball (rho < reach) with weights for rho^(power-1) d rho d omega.

    Returns:
        (points (k, d), weights (k,))
    """
    n_rad, n_ang = _mesh_sizes(mesh)
    directions, dir_weights = angular_rule(d, n_ang)
    t, v = legendre_rule(n_rad)
    limit = np.minimum(_exit_distance(centre[None, :], directions)[0], reach)
    u_max = limit ** power
    rho = np.outer(u_max, t) ** (1.0 / power)
    weights = (dir_weights * u_max)[:, None] * v[None, :] / power
    points = centre + rho[:, :, None] * directions[:, None, :]
    return points.reshape(-1, d), weights.ravel()


def _three_g_engine(params: StableParams, x: np.ndarray, w: np.ndarray, beta: float, factor: PairFactor, mesh: int) -> float:
    """
    Integral over the unit ball of G_B(x,y) G_B(z,w) / G_B(x,w) |y-z|^(beta-alpha-d) factor(y, z).

    Outer polar rule at x; inner split into a tube |z - y| < TUBE_WIDTH (polar
    at y) and the rest (polar at w), each with the radial power absorbed.
    """
    a, d = params.alpha, params.d
    if beta <= a:
        raise InvalidArgumentError(f"3G integral needs beta > alpha (beta={beta}, alpha={a})")
    ys, outer_w = _polar_nodes(d, x, a, mesh)
    outer_w = outer_w * _green_core(params, x[None, :], ys)
    zs_bulk, bulk_w = _polar_nodes(d, w, a, mesh)
    bulk_w = bulk_w * _green_core(params, zs_bulk, w[None, :])

    inner = np.empty(len(ys))
    for i, y in enumerate(ys):
        diff = np.linalg.norm(zs_bulk - y, axis=1)
        keep = diff >= TUBE_WIDTH
        ys_rep = np.repeat(y[None, :], int(keep.sum()), axis=0)
        bulk = np.sum(bulk_w[keep] * diff[keep] ** (beta - a - d) * factor(ys_rep, zs_bulk[keep]))
        zs_tube, tube_w = _polar_nodes(d, y, beta - a, mesh, reach=TUBE_WIDTH)
        g = unit_ball_green(params, zs_tube, w[None, :])
        g = np.where(np.isfinite(g), g, 0.0)
        tube = np.sum(tube_w * g * factor(np.repeat(y[None, :], len(zs_tube), axis=0), zs_tube))
        inner[i] = bulk + tube
    normaliser = float(unit_ball_green(params, x[None, :], w[None, :])[0])
    return float(np.sum(outer_w * inner) / normaliser)


def _unit_point(point: Sequence[float], d: int) -> np.ndarray:
    p = np.asarray(point, dtype=float).reshape(-1)
    if len(p) != d or np.linalg.norm(p) >= 1.0:
        raise InvalidArgumentError("3G arguments must be points of the open unit ball")
    return p


def three_g_integral(params: StableParams, x: Sequence[float], w: Sequence[float], beta: float, quad: QuadratureSpec) -> float:
    """
    Double integral of G_B(x,y) G_B(z,w)/G_B(x,w) |y-z|^(beta-alpha-d) over the unit ball.

    Fixed Gauss rules at refinement level quad.mesh.
    """
    params.require_transient()
    xp, wp = _unit_point(x, params.d), _unit_point(w, params.d)
    if np.array_equal(xp, wp):
        raise InvalidArgumentError("x and w must differ")
    value = _three_g_engine(params, xp, wp, beta, lambda y, z: np.ones(len(y)), quad.mesh)
    if not math.isfinite(value):
        raise NumericFailure("3G integral is not finite", partial_value=value)
    return value


def conditioned_expectation(
    params: StableParams,
    ball: Ball,
    x: Sequence[float],
    w: Sequence[float],
    F: KernelSpec,
    quad: QuadratureSpec
) -> float:
    """
    E_x^w of the sum of F over the jumps before leaving `ball`, for the process conditioned to die at w.

    Computed in unit-ball coordinates, where the integral is scale free.
    """
    params.require_transient()
    if F.lower_bound < 0.0:
        raise InvalidArgumentError("conditioned expectation needs F >= 0")
    if F.is_zero:
        return 0.0
    tag = F.tag(KernelTagKind.IC_BETA)
    if tag is None:
        raise InvalidArgumentError(f"{F.name} needs an ICBeta bound")
    d = params.d
    centre = np.asarray(ball.center, dtype=float)
    xp = _unit_point((np.asarray(x, dtype=float) - centre) / ball.radius, d)
    wp = _unit_point((np.asarray(w, dtype=float) - centre) / ball.radius, d)
    beta, r, levy = tag.beta, ball.radius, params.levy_const

    def factor(y: np.ndarray, z: np.ndarray) -> np.ndarray:
        gap = np.linalg.norm(y - z, axis=1)
        values = F.eval(centre + r * y, centre + r * z)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(gap > 0.0, levy * values * gap ** (-beta), 0.0)

    return _three_g_engine(params, xp, wp, beta, factor, quad.mesh)


def _grid_pairs(d: int, points: Sequence[float] = GRID_POINTS) -> List[Tuple[int, int, np.ndarray, np.ndarray]]:
    """(i, j, x, w) for i <= j; the diagonal is replaced by a near-coincident pair."""
    pairs = []
    for i, p in enumerate(points):
        for j, q in enumerate(points):
            if j < i:
                continue
            x = np.zeros(d)
            w = np.zeros(d)
            x[0], w[0] = p, q
            if i == j:
                w[0] = p - math.copysign(NEAR_SHIFT, p) if p != 0.0 else NEAR_SHIFT
            pairs.append((i, j, x, w))
    return pairs


class C1Report(BaseModel):
    d: int
    alpha: float
    beta: float
    mesh: int
    value: float = Field(..., description="Grid maximum, a lower bound of the supremum")
    grid: List[Dict[str, float]]


def c1_constant(params: StableParams, beta: float, quad: QuadratureSpec) -> C1Report:
    """Maximum of the 3G integral over the (x', w') grid, symmetric pairs computed once."""
    rows = []
    for i, j, x, w in _grid_pairs(params.d):
        value = three_g_integral(params, x, w, beta, quad)
        rows.append({"x": float(x[0]), "w": float(w[0]), "value": value})
        logger.debug(f"3G(x={x[0]:g}, w={w[0]:g}) = {value:.5g}")
    best = max(row["value"] for row in rows)
    logger.info(f"C1(d={params.d}, alpha={params.alpha:g}, beta={beta:g}) >= {best:.5g} at mesh {quad.mesh}")
    return C1Report(d=params.d, alpha=params.alpha, beta=beta, mesh=quad.mesh, value=best, grid=rows)


def r0_of(C: float, params: StableParams, beta: float, eps: float, quad: QuadratureSpec, c1: Optional[float] = None) -> float:
    """(eps / (C C1))^(1/beta)."""
    if C <= 0 or eps <= 0:
        raise InvalidArgumentError("C and eps must be positive")
    if beta <= params.alpha:
        raise InvalidArgumentError("need beta > alpha")
    c1 = c1 if c1 is not None else c1_constant(params, beta, quad).value
    return (eps / (C * c1)) ** (1.0 / beta)


class SmallBallReport(BaseModel):
    c1: float
    r0: float
    radius: float
    eps: float
    grid: List[Dict[str, float]]
    max_value: float
    passed: bool


def small_ball_check(params: StableParams, C: float, beta: float, eps: float, quad: QuadratureSpec) -> SmallBallReport:
    """
    Conditioned expectations of C (|x-y|^beta min 1) in B(0, r0/2) on a 3x3 grid, against eps.

    Each value v also gives the killing bound exp(-v) >= exp(-eps).
    """
    c1 = c1_constant(params, beta, quad).value
    r0 = r0_of(C, params, beta, eps, quad, c1)
    radius = r0 / 2.0
    ball = Ball(center=(0.0,) * params.d, radius=radius)
    F = truncated_power_kernel(C, beta)
    rows = []
    points = (0.0, 0.7, -0.8)
    for i, j, x, w in _grid_pairs(params.d, points):
        value = conditioned_expectation(params, ball, radius * x, radius * w, F, quad)
        rows.append({"x": float(radius * x[0]), "w": float(radius * w[0]), "value": value, "killing_lower": math.exp(-value)})
    top = max(row["value"] for row in rows)
    return SmallBallReport(
        c1=c1, r0=r0, radius=radius, eps=eps, grid=rows, max_value=top,
        passed=top < eps and all(math.exp(-eps) <= row["killing_lower"] <= 1.0 for row in rows)
    )


def c1_table(triples: Sequence[Tuple[int, float, float]], quad: QuadratureSpec) -> List[Dict[str, float]]:
    """One C1 row per (d, alpha, beta)."""
    rows = []
    for d, alpha, beta in triples:
        report = c1_constant(StableParams(d=d, alpha=alpha), beta, quad)
        rows.append({"d": d, "alpha": alpha, "beta": beta, "mesh": quad.mesh, "c1": report.value})
    return rows


def r0_table(triples: Sequence[Tuple[int, float, float]], C: float, eps: float, quad: QuadratureSpec) -> List[Dict[str, float]]:
    """One r0 row per (d, alpha, beta)."""
    rows = []
    for row in c1_table(triples, quad):
        params = StableParams(d=int(row["d"]), alpha=row["alpha"])
        r0 = r0_of(C, params, row["beta"], eps, quad, row["c1"])
        rows.append({**row, "C": C, "eps": eps, "r0": r0})
    return rows
