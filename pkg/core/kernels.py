"""
Jump kernels F(x, y) for the laboratory.
Kernel families, class tags, the Levy-integral fields built from them,
and a randomized verification suite.
"""

import logging
import math
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel

from .errors import InvalidArgumentError
from .models import (
    KernelChoice, KernelSpec, KernelSymmetry, KernelTag, KernelTagKind, QuadratureSpec, StableParams
)
from .montecarlo import path_stream
from .quadrature import angular_rule, radial_integral

logger = logging.getLogger(__name__)

# Largest exponent of 2 used for ball centres (keeps 2^(n k) finite).
MAX_CENTER_LOG2 = 1000.0


def _norms(points: np.ndarray) -> np.ndarray:
    return np.linalg.norm(points, axis=1)


def zero_kernel() -> KernelSpec:
    """F = 0."""
    return KernelSpec(
        name="zero",
        offset_fn=lambda x, w: np.zeros(len(x)),
        lower_bound=0.0,
        upper_bound=0.0,
        class_tags=frozenset({KernelTag(kind=KernelTagKind.IC_BETA, C=0.0, beta=2.0)}),
        symmetry=KernelSymmetry.TRANSLATION,
        range_bound=math.inf
    )


def fuchsian_kernel(C: float, beta: float, decay: float = 0.0) -> KernelSpec:
    """
    C |x-y|^beta / (1 + |x|^(beta+decay) + |y|^(beta+decay)).

    decay = 0 is the plain Fuchsian kernel; decay > 0 adds spatial decay and
    stays Fuchsian with constant 3C.

    Args:
        C: Amplitude
        beta: Near-diagonal exponent
        decay: Extra decay exponent

    Returns:
        Radial, non-negative KernelSpec
    """
    if C <= 0 or beta <= 0:
        raise InvalidArgumentError(f"fuchsian kernel needs C > 0 and beta > 0 (got C={C}, beta={beta})")
    if decay < 0:
        raise InvalidArgumentError(f"decay must be non-negative, got {decay}")
    power = beta + decay

    def offset(x: np.ndarray, w: np.ndarray) -> np.ndarray:
        return C * _norms(w) ** beta / (1.0 + _norms(x) ** power + _norms(x + w) ** power)

    spread = 2.0 ** max(beta - 1.0, 0.0)
    upper = C * spread * (1.0 if decay == 0.0 else 2.0)
    fuchsian_c = C if decay == 0.0 else 3.0 * C
    return KernelSpec(
        name=f"fuchsian(C={C:g},beta={beta:g},decay={decay:g})",
        offset_fn=offset,
        lower_bound=0.0,
        upper_bound=upper,
        class_tags=frozenset({
            KernelTag(kind=KernelTagKind.IC_BETA, C=C, beta=beta),
            KernelTag(kind=KernelTagKind.FUCHSIAN, C=fuchsian_c, beta=beta),
        }),
        symmetry=KernelSymmetry.RADIAL,
        parameters={"C": C, "beta": beta, "decay": decay}
    )


def truncated_power_kernel(C: float, beta: float) -> KernelSpec:
    """C (|x-y|^beta min 1); depends on x - y only."""
    if C <= 0 or beta <= 0:
        raise InvalidArgumentError(f"truncated power kernel needs C > 0 and beta > 0 (got C={C}, beta={beta})")
    return KernelSpec(
        name=f"truncated_power(C={C:g},beta={beta:g})",
        offset_fn=lambda x, w: C * np.minimum(_norms(w) ** beta, 1.0),
        lower_bound=0.0,
        upper_bound=C,
        class_tags=frozenset({KernelTag(kind=KernelTagKind.IC_BETA, C=C, beta=beta)}),
        symmetry=KernelSymmetry.TRANSLATION,
        parameters={"C": C, "beta": beta}
    )


def annulus_kernel(value: float, inner: float = 1.0, outer: float = 2.0) -> KernelSpec:
    """Constant `value` on inner < |x-y| < outer, zero elsewhere."""
    if value <= -1.0:
        raise InvalidArgumentError(f"annulus value must exceed -1, got {value}")
    if not 0.0 < inner < outer:
        raise InvalidArgumentError(f"annulus needs 0 < inner < outer (got {inner}, {outer})")

    def offset(x: np.ndarray, w: np.ndarray) -> np.ndarray:
        r = _norms(w)
        return np.where((r > inner) & (r < outer), value, 0.0)

    # |F| <= |value| (|w| / min(inner, 1))^2 on the support
    ic_c = abs(value) / min(inner, 1.0) ** 2
    return KernelSpec(
        name=f"annulus(value={value:g},inner={inner:g},outer={outer:g})",
        offset_fn=offset,
        lower_bound=min(value, 0.0),
        upper_bound=max(value, 0.0),
        class_tags=frozenset({KernelTag(kind=KernelTagKind.IC_BETA, C=ic_c, beta=2.0)}),
        symmetry=KernelSymmetry.TRANSLATION,
        range_bound=outer,
        parameters={"value": value, "inner": inner, "outer": outer}
    )


def counterexample_balls(params: StableParams, gamma: float, n_balls: int) -> List[Tuple[int, float, float]]:
    """
    Balls of the divergent-expectation construction.

    Returns:
        (n, |x_n|, r_n) for n = 1..n_balls, centres on the first axis
    """
    k = params.d / (params.alpha - gamma)
    balls = []
    for n in range(1, n_balls + 1):
        if n * k > MAX_CENTER_LOG2:
            raise InvalidArgumentError(f"ball {n} lies beyond floating-point range")
        center = 2.0 ** (n * k)
        balls.append((n, center, 2.0 ** (-n) * center + 1.0))
    return balls


def _ball_index(points: np.ndarray, k: float) -> np.ndarray:
    """Index n of the ball B(2^(n k) e1, 2^(-n) 2^(n k) + 1) holding each point, 0 for none."""
    norms = _norms(points)
    n_max = max(int(MAX_CENTER_LOG2 // k), 1)
    estimate = np.rint(np.log2(np.maximum(norms, 1.0)) / k).astype(int)
    index = np.zeros(len(points), dtype=int)
    for shift in (-1, 0, 1):
        n = np.clip(estimate + shift, 1, n_max)
        center = 2.0 ** (n * k)
        radius = center * 2.0 ** (-n.astype(float)) + 1.0
        offset = points.copy()
        offset[:, 0] -= center
        inside = (_norms(offset) < radius) & (index == 0)
        index[inside] = n[inside]
    return index


def _ball_kernel(params: StableParams, gamma: float, beta: float) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    k = params.d / (params.alpha - gamma)

    def phi(x: np.ndarray, w: np.ndarray) -> np.ndarray:
        z = x + w
        step = _norms(w)
        ix = _ball_index(x, k)
        mask = (ix > 0) & (step <= 1.0)
        if np.any(mask):
            mask &= ix == _ball_index(z, k)
        out = np.zeros(len(x))
        if np.any(mask):
            out[mask] = step[mask] ** beta / (_norms(x[mask]) ** gamma + _norms(z[mask]) ** gamma)
        return out

    return phi


def _check_ball_constraints(params: StableParams, gamma: float, beta: float) -> None:
    if not 0.0 < gamma < params.alpha < beta:
        raise InvalidArgumentError(f"need 0 < gamma < alpha < beta (gamma={gamma}, alpha={params.alpha}, beta={beta})")
    if params.alpha - gamma >= 0.5:
        raise InvalidArgumentError(f"need alpha - gamma < 1/2 (got {params.alpha - gamma:g})")
    if params.alpha >= params.d:
        raise InvalidArgumentError("the ball construction needs alpha < d")


def counterexample_kernel(params: StableParams, gamma: float, beta: float) -> KernelSpec:
    """
    |y-z|^beta / (|y|^gamma + |z|^gamma) when y, z share a ball and |y-z| <= 1.

    The n-th ball has centre 2^(n d/(alpha-gamma)) e1 and radius 2^(-n)|x_n| + 1.
    """
    _check_ball_constraints(params, gamma, beta)
    # every point of a ball has norm >= 7, so the value is below 1/(2 * 7^gamma) < 1/2
    return KernelSpec(
        name=f"counterexample(gamma={gamma:g},beta={beta:g})",
        offset_fn=_ball_kernel(params, gamma, beta),
        lower_bound=0.0,
        upper_bound=0.5,
        class_tags=frozenset({
            KernelTag(kind=KernelTagKind.COUNTEREXAMPLE, gamma=gamma, beta=beta),
            KernelTag(kind=KernelTagKind.IC_BETA, C=0.5, beta=beta),
        }),
        symmetry=KernelSymmetry.AXIAL,
        range_bound=1.0,
        parameters={"gamma": gamma, "beta": beta, "k": params.d / (params.alpha - gamma)}
    )


def root_ball_kernel(params: StableParams, gamma: float, beta: float) -> KernelSpec:
    """(1/8) sqrt(Phi) with Phi the ball kernel for (2 gamma, 2 beta)."""
    if not 2.0 * gamma < params.alpha < 2.0 * beta:
        raise InvalidArgumentError(f"need 2 gamma < alpha < 2 beta (gamma={gamma}, beta={beta})")
    _check_ball_constraints(params, 2.0 * gamma, 2.0 * beta)
    phi = _ball_kernel(params, 2.0 * gamma, 2.0 * beta)
    bound = 1.0 / (8.0 * math.sqrt(2.0))
    return KernelSpec(
        name=f"root_ball(gamma={gamma:g},beta={beta:g})",
        offset_fn=lambda x, w: np.sqrt(phi(x, w)) / 8.0,
        lower_bound=0.0,
        upper_bound=bound,
        class_tags=frozenset({
            KernelTag(kind=KernelTagKind.ROOT_BALL, gamma=gamma, beta=beta),
            KernelTag(kind=KernelTagKind.IC_BETA, C=bound, beta=beta),
        }),
        symmetry=KernelSymmetry.AXIAL,
        range_bound=1.0,
        parameters={"gamma": gamma, "beta": beta, "k": params.d / (params.alpha - 2.0 * gamma)}
    )


def scaled_kernel(F: KernelSpec, scale: float) -> KernelSpec:
    """scale * F, keeping the tags that survive scaling."""
    lower, upper = sorted((scale * F.lower_bound, scale * F.upper_bound))
    if lower <= -1.0:
        raise InvalidArgumentError(f"scaling by {scale} pushes inf F to {lower} <= -1")
    tags = set()
    for tag in F.class_tags:
        if tag.kind == KernelTagKind.IC_BETA:
            tags.add(tag.model_copy(update={"C": abs(scale) * tag.C}))
        elif tag.kind == KernelTagKind.FUCHSIAN and scale > 0:
            tags.add(tag.model_copy(update={"C": scale * tag.C}))
        elif tag.kind in (KernelTagKind.COUNTEREXAMPLE, KernelTagKind.ROOT_BALL):
            tags.add(tag)
    base = F.offset_fn
    return KernelSpec(
        name=f"{scale:g}*{F.name}",
        offset_fn=lambda x, w: scale * base(x, w),
        lower_bound=lower,
        upper_bound=upper,
        class_tags=frozenset(tags),
        symmetry=F.symmetry,
        range_bound=F.range_bound,
        parameters={**F.parameters, "scale": scale}
    )


def kernel_from_choice(choice: KernelChoice, params: StableParams) -> KernelSpec:
    """Build the kernel named in an experiment config."""
    name = choice.name.lower()
    if name == "zero":
        F = zero_kernel()
    elif name == "fuchsian":
        F = fuchsian_kernel(choice.C, choice.beta, choice.decay)
    elif name == "truncated_power":
        F = truncated_power_kernel(choice.C, choice.beta)
    elif name == "annulus":
        F = annulus_kernel(choice.value, choice.inner, choice.outer)
    elif name == "counterexample":
        F = counterexample_kernel(params, choice.gamma, choice.beta)
    elif name == "root_ball":
        F = root_ball_kernel(params, choice.gamma, choice.beta)
    else:
        raise InvalidArgumentError(f"unknown kernel family '{choice.name}'")
    if choice.scale is not None:
        F = scaled_kernel(F, choice.scale)
    return F


class FieldKind(str, Enum):
    """Integrands of the Levy-integral fields, as functions of the kernel value f."""
    H = "h"
    ENTROPY_H = "entropy_h"
    ENTROPY_H1 = "entropy_h1"
    SQUARE = "square_h"
    REVERSE_ENTROPY = "reverse_entropy_h"


FIELD_INTEGRANDS: Dict[FieldKind, Callable[[np.ndarray], np.ndarray]] = {
    FieldKind.H: lambda f: f,
    FieldKind.ENTROPY_H: lambda f: f - np.log1p(f),
    FieldKind.ENTROPY_H1: lambda f: (1.0 + f) * np.log1p(f) - f,
    FieldKind.SQUARE: lambda f: f * f,
    FieldKind.REVERSE_ENTROPY: lambda f: np.log1p(f) - f / (1.0 + f),
}

# Order of vanishing of each integrand at f = 0.
FIELD_ORDER = {
    FieldKind.H: 1,
    FieldKind.ENTROPY_H: 2,
    FieldKind.ENTROPY_H1: 2,
    FieldKind.SQUARE: 2,
    FieldKind.REVERSE_ENTROPY: 2,
}


def sandwich_constants(fn: Callable[[np.ndarray], np.ndarray], lower: float, upper: float, n: int = 4001) -> Tuple[float, float]:
    """
    Constants c_lo, c_hi with c_lo f^2 <= fn(f) <= c_hi f^2 on [lower, upper].

    Dense-grid extremes of fn(f)/f^2, including the limit at f = 0.
    """
    if lower <= -1.0 or upper < lower:
        raise InvalidArgumentError(f"invalid range [{lower}, {upper}]")
    grid = np.concatenate([np.linspace(lower, upper, n), [-1e-3, 1e-3]])
    grid = grid[(grid != 0.0) & (grid >= min(lower, -1e-3)) & (grid <= max(upper, 1e-3))]
    grid = grid[grid > -1.0]
    ratios = fn(grid) / grid ** 2
    return float(np.min(ratios)), float(np.max(ratios))


def _near_power(params: StableParams, F: KernelSpec, kind: FieldKind) -> float:
    tag = F.tag(KernelTagKind.IC_BETA)
    if tag is None:
        raise InvalidArgumentError(f"{F.name} carries no ICBeta bound; its Levy integrals are not controlled")
    power = FIELD_ORDER[kind] * tag.beta - params.alpha
    if power <= 0.0:
        raise InvalidArgumentError(
            f"{kind.value} of {F.name} diverges at the diagonal: needs {FIELD_ORDER[kind]} beta > alpha"
        )
    return power


def field_value(
    params: StableParams,
    F: KernelSpec,
    x: Sequence[float],
    kind: FieldKind,
    quad: QuadratureSpec,
    cutoff: float = 0.0
) -> float:
    """
    Levy integral of fn(F(x, .)) over |z - x| > cutoff.

    Args:
        params: Process parameters
        F: Kernel
        x: Point
        kind: Which integrand of F
        quad: Tolerances
        cutoff: Jumps shorter than this are excluded

    Returns:
        levy_const * integral of fn(F(x, x + w)) |w|^(-d-alpha) dw

    Raises:
        NumericFailure: Quadrature missed its tolerance
    """
    if F.is_zero:
        return 0.0
    fn = FIELD_INTEGRANDS[kind]
    power = _near_power(params, F, kind)
    nodes, weights = angular_rule(params.d, quad.angular_nodes)
    point = np.asarray(x, dtype=float).reshape(1, params.d)
    centre = np.repeat(point, len(nodes), axis=0)

    def shell(r: float) -> float:
        return float(weights @ fn(F.offset(centre, r * nodes)))

    bound = params.sphere_area * float(np.max(np.abs(fn(np.array([F.lower_bound, F.upper_bound])))))
    breaks = [v for key, v in F.parameters.items() if key in ("inner", "outer")]
    result = radial_integral(
        shell,
        -1.0 - params.alpha,
        quad,
        lower=cutoff,
        upper=F.range_bound,
        near_power=power,
        split=1.0,
        shell_bound=bound,
        breakpoints=breaks,
        label=f"{kind.value}[{F.name}]"
    )
    return params.levy_const * result.value


def h_field(params: StableParams, F: KernelSpec, x: Sequence[float], quad: QuadratureSpec, cutoff: float = 0.0) -> float:
    """h(x) = integral of F(x, z) j(x, z) dz."""
    return field_value(params, F, x, FieldKind.H, quad, cutoff)


def entropy_h_field(params: StableParams, F: KernelSpec, x: Sequence[float], quad: QuadratureSpec, cutoff: float = 0.0) -> float:
    """Density of the entropy of the base law relative to the tilted one."""
    return field_value(params, F, x, FieldKind.ENTROPY_H, quad, cutoff)


def entropy_h1_field(params: StableParams, F: KernelSpec, x: Sequence[float], quad: QuadratureSpec, cutoff: float = 0.0) -> float:
    """Density of the entropy of the tilted law relative to the base one (against the tilted Levy system)."""
    return field_value(params, F, x, FieldKind.ENTROPY_H1, quad, cutoff)


def square_h_field(params: StableParams, F: KernelSpec, x: Sequence[float], quad: QuadratureSpec, cutoff: float = 0.0) -> float:
    """Levy integral of F^2 (compensator of the bracket)."""
    return field_value(params, F, x, FieldKind.SQUARE, quad, cutoff)


def truncated_power_h(params: StableParams, C: float, beta: float) -> float:
    """Closed form of h for C (|w|^beta min 1): levy_const sigma C (1/(beta - alpha) + 1/alpha)."""
    if beta <= params.alpha:
        raise InvalidArgumentError("closed form needs beta > alpha")
    return params.levy_const * params.sphere_area * C * (1.0 / (beta - params.alpha) + 1.0 / params.alpha)


class KernelVerification(BaseModel):
    """Randomized checks of a kernel's structural claims."""
    kernel: str
    n_pairs: int
    symmetry_error: float
    diagonal_max: float
    min_value: float
    max_value: float
    ic_beta_ratio: Optional[float] = None
    fuchsian_ratio: Optional[float] = None
    root_ball_ratio: Optional[float] = None
    passed: bool


def _random_pairs(F: KernelSpec, d: int, n_pairs: int, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    stream = path_stream(seed)
    scales = stream.choice([0.1, 1.0, 10.0, 100.0], size=n_pairs)
    x = stream.standard_normal((n_pairs, d)) * scales[:, None]
    steps = stream.choice([1e-3, 1e-2, 0.1, 0.5, 1.0, 3.0, 10.0], size=n_pairs)
    y = x + stream.standard_normal((n_pairs, d)) * steps[:, None]
    k = F.parameters.get("k")
    if k is not None:
        # half of the pairs inside the first ball with |x - y| <= 1
        m = n_pairs // 2
        center, radius = 2.0 ** k, 2.0 ** (k - 1.0) + 1.0
        u = stream.standard_normal((m, d))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        x[:m] = u * (radius - 1.0) * stream.random((m, 1)) ** (1.0 / d)
        x[:m, 0] += center
        v = stream.standard_normal((m, d))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        y[:m] = x[:m] + v * stream.random((m, 1))
    return x, y


def verify_kernel(F: KernelSpec, d: int, n_pairs: int = 10_000, seed: int = 0) -> KernelVerification:
    """
    Check symmetry, diagonal vanishing, value bounds and class tags on random pairs.

    Args:
        F: Kernel under test
        d: Dimension
        n_pairs: Number of random pairs
        seed: Stream seed

    Returns:
        KernelVerification with the worst observed ratios
    """
    x, y = _random_pairs(F, d, n_pairs, seed)
    fxy = F.eval(x, y)
    fyx = F.eval(y, x)
    scale = np.maximum(np.abs(fxy), 1.0)
    symmetry_error = float(np.max(np.abs(fxy - fyx) / scale))
    diagonal_max = float(np.max(np.abs(F.eval(x, x))))
    dist = np.linalg.norm(x - y, axis=1)
    positive = dist > 0

    passed = symmetry_error <= 1e-12 and diagonal_max == 0.0
    passed &= float(np.min(fxy)) >= F.lower_bound - 1e-12 and float(np.max(fxy)) <= F.upper_bound + 1e-12

    ic_ratio = fuchsian_ratio = root_ball_ratio = None
    ic = F.tag(KernelTagKind.IC_BETA)
    if ic is not None and ic.C > 0:
        ic_ratio = float(np.max(np.abs(fxy[positive]) / (ic.C * dist[positive] ** ic.beta)))
        passed &= ic_ratio <= 1.0 + 1e-9
    fuchsian = F.tag(KernelTagKind.FUCHSIAN)
    if fuchsian is not None:
        b = fuchsian.beta
        bound = fuchsian.C * dist ** b / (1.0 + _norms(x) ** b + _norms(y) ** b)
        fuchsian_ratio = float(np.max(fxy[positive] / bound[positive]))
        passed &= fuchsian_ratio <= 1.0 + 1e-9
    root = F.tag(KernelTagKind.ROOT_BALL)
    if root is not None:
        far = positive & (_norms(x) >= 1.0) & (_norms(y) >= 1.0)
        bound = 0.5 * dist ** root.beta / (1.0 + _norms(x) ** root.gamma + _norms(y) ** root.gamma)
        root_ball_ratio = float(np.max(fxy[far] / bound[far])) if np.any(far) else 0.0
        passed &= root_ball_ratio <= 1.0 + 1e-9

    report = KernelVerification(
        kernel=F.name,
        n_pairs=n_pairs,
        symmetry_error=symmetry_error,
        diagonal_max=diagonal_max,
        min_value=float(np.min(fxy)),
        max_value=float(np.max(fxy)),
        ic_beta_ratio=ic_ratio,
        fuchsian_ratio=fuchsian_ratio,
        root_ball_ratio=root_ball_ratio,
        passed=bool(passed)
    )
    logger.debug(f"verify_kernel {F.name}: passed={report.passed}")
    return report
