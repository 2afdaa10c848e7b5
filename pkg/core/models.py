"""
Pydantic models for the laboratory's data structures.
Defines the process parameters, paths, kernels, estimates and experiment configuration.
"""

import math
from enum import Enum
from typing import Any, Callable, Dict, FrozenSet, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, computed_field, field_validator, model_validator
from scipy import special

from .errors import InvalidArgumentError


def sphere_area(d: int) -> float:
    """Surface area of the unit sphere in R^d (2 for d = 1)."""
    return float(2.0 * math.pi ** (d / 2.0) / special.gamma(d / 2.0))


class StableParams(BaseModel):
    """
    Isotropic alpha-stable process in R^d.
    The derived constants are exposed as computed fields so reports carry them.
    """
    model_config = ConfigDict(frozen=True)

    d: int = Field(..., ge=1, description="Dimension")
    alpha: float = Field(..., gt=0.0, lt=2.0, description="Stability index")

    @computed_field
    @property
    def levy_const(self) -> float:
        """Prefactor of the Levy density |y|^{-d-alpha}."""
        a, d = self.alpha, self.d
        return float(
            a * 2.0 ** (a - 1.0) * special.gamma((a + d) / 2.0)
            / (math.pi ** (d / 2.0) * special.gamma(1.0 - a / 2.0))
        )

    @computed_field
    @property
    def green_const(self) -> Optional[float]:
        """Prefactor of the Green function |x-y|^{alpha-d}; None when the process is recurrent."""
        a, d = self.alpha, self.d
        if a >= d:
            return None
        return float(
            2.0 ** (-a) * math.pi ** (-d / 2.0) * special.gamma((d - a) / 2.0) / special.gamma(a / 2.0)
        )

    @property
    def sphere_area(self) -> float:
        return sphere_area(self.d)

    @property
    def is_transient(self) -> bool:
        return self.alpha < self.d

    def require_transient(self) -> None:
        """Raise unless alpha < d (no Green function otherwise)."""
        if not self.is_transient:
            raise InvalidArgumentError(
                f"potential theory requires alpha < d (got d={self.d}, alpha={self.alpha})"
            )

    def big_jump_rate(self, cutoff: float) -> float:
        """Total intensity of jumps longer than the cutoff."""
        if cutoff <= 0:
            raise InvalidArgumentError(f"cutoff must be positive, got {cutoff}")
        return self.levy_const * self.sphere_area * cutoff ** (-self.alpha) / self.alpha

    def brownian_rate(self, cutoff: float) -> float:
        """Per-coordinate variance rate of the Gaussian matching the jumps below the cutoff."""
        if cutoff <= 0:
            raise InvalidArgumentError(f"cutoff must be positive, got {cutoff}")
        a, d = self.alpha, self.d
        return self.levy_const * self.sphere_area * cutoff ** (2.0 - a) / (d * (2.0 - a))


class SmallJumpPolicy(str, Enum):
    """Treatment of jumps shorter than the cutoff."""
    DROP = "Drop"
    BROWNIAN_MATCH = "BrownianMatch"


class JumpEvent(BaseModel):
    """One resolved jump (X_{t-}, X_t)."""
    model_config = ConfigDict(frozen=True)

    time: float = Field(..., ge=0.0)
    pre: Tuple[float, ...] = Field(..., description="Position just before the jump")
    post: Tuple[float, ...] = Field(..., description="Position just after the jump")

    @model_validator(mode="after")
    def _distinct(self) -> "JumpEvent":
        if self.pre == self.post:
            raise ValueError("a jump event must move the path")
        return self


class JumpPath(BaseModel):
    """
    Jump-resolved trajectory on (t0, horizon].

    Events are stored column-wise: times (n,), pre (n, d), post (n, d).
    Under Drop the path is constant between events; under BrownianMatch
    the displacement between consecutive anchors is Gaussian motion.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    start: np.ndarray = Field(..., description="Position at t0")
    horizon: float = Field(..., gt=0.0)
    times: np.ndarray = Field(..., description="Event times, strictly increasing")
    pre: np.ndarray = Field(..., description="Pre-jump positions")
    post: np.ndarray = Field(..., description="Post-jump positions")
    end: np.ndarray = Field(..., description="Position at the horizon")
    cutoff: float = Field(..., gt=0.0)
    policy: SmallJumpPolicy = SmallJumpPolicy.DROP
    seed: int = Field(0, ge=0)
    t0: float = Field(0.0, ge=0.0)
    segment: int = Field(0, ge=0, description="Stream index the path was drawn from")

    @field_validator("start", "end", mode="before")
    @classmethod
    def _as_point(cls, value: Any) -> np.ndarray:
        point = np.array(value, dtype=float).reshape(-1)
        point.setflags(write=False)
        return point

    @field_validator("times", mode="before")
    @classmethod
    def _as_times(cls, value: Any) -> np.ndarray:
        times = np.array(value, dtype=float).reshape(-1)
        times.setflags(write=False)
        return times

    @field_validator("pre", "post", mode="before")
    @classmethod
    def _as_points(cls, value: Any) -> np.ndarray:
        points = np.array(value, dtype=float)
        if points.ndim == 1:
            points = points.reshape(len(points), -1) if points.size else points.reshape(0, 1)
        points.setflags(write=False)
        return points

    @model_validator(mode="after")
    def _check_structure(self) -> "JumpPath":
        n, d = len(self.times), len(self.start)
        if self.horizon <= self.t0:
            raise ValueError("horizon must exceed t0")
        if self.end.shape != (d,):
            raise ValueError("end must have the dimension of start")
        if n == 0:
            return self
        if self.pre.shape != (n, d) or self.post.shape != (n, d):
            raise ValueError(f"pre/post must have shape ({n}, {d})")
        if self.times[0] < self.t0 or self.times[-1] > self.horizon:
            raise ValueError("event times must lie in (t0, horizon]")
        if n > 1 and np.any(np.diff(self.times) <= 0.0):
            raise ValueError("event times must be strictly increasing")
        if np.any(np.all(self.pre == self.post, axis=1)):
            raise ValueError("a jump event must move the path")
        return self

    @property
    def d(self) -> int:
        return len(self.start)

    @property
    def n_jumps(self) -> int:
        return len(self.times)

    @property
    def jumps(self) -> np.ndarray:
        return self.post - self.pre

    @property
    def events(self) -> List[JumpEvent]:
        return [
            JumpEvent(time=float(t), pre=tuple(a.tolist()), post=tuple(b.tolist()))
            for t, a, b in zip(self.times, self.pre, self.post)
        ]

    @property
    def knot_positions(self) -> np.ndarray:
        """Start followed by every post-jump position, shape (n+1, d)."""
        return np.vstack([self.start[None, :], self.post])

    @property
    def holding_times(self) -> np.ndarray:
        """Durations between consecutive knots, the last one ending at the horizon."""
        return np.diff(np.concatenate([[self.t0], self.times, [self.horizon]]))


class McEstimate(BaseModel):
    """Monte Carlo estimate with its standard error."""
    model_config = ConfigDict(frozen=True)

    mean: float
    std_err: float = Field(..., ge=0.0)
    n: int = Field(..., ge=2)

    @computed_field
    @property
    def ci95(self) -> float:
        return 1.96 * self.std_err

    @classmethod
    def from_samples(cls, values: Any) -> "McEstimate":
        """Reduce per-path samples to an estimate."""
        samples = np.asarray(values, dtype=float).reshape(-1)
        if len(samples) < 2:
            raise InvalidArgumentError("a Monte Carlo estimate needs at least two samples")
        if not np.all(np.isfinite(samples)):
            return cls(mean=float(np.mean(samples)), std_err=math.inf, n=len(samples))
        std_err = float(np.std(samples, ddof=1) / math.sqrt(len(samples)))
        return cls(mean=float(np.mean(samples)), std_err=std_err, n=len(samples))

    def combined_error(self, other: "McEstimate") -> float:
        return math.hypot(self.std_err, other.std_err)

    def within(self, target: float, k: float = 3.0, slack: float = 0.0) -> bool:
        """True when |mean - target| <= k std errs + slack."""
        return abs(self.mean - target) <= k * self.std_err + slack

    def agrees_with(self, other: "McEstimate", k: float = 3.0, slack: float = 0.0) -> bool:
        return abs(self.mean - other.mean) <= k * self.combined_error(other) + slack


class QuadratureSpec(BaseModel):
    """Tolerances for every quadrature in the laboratory."""
    model_config = ConfigDict(frozen=True)

    tol: float = Field(1e-4, gt=0.0, description="Relative tolerance")
    abs_tol: float = Field(1e-12, ge=0.0, description="Absolute floor for the error test")
    max_refine: int = Field(200, ge=10, description="Subinterval cap per adaptive integral")
    singularity_exponents: List[float] = Field(
        default_factory=list, description="Declared exponents at known singular points"
    )
    angular_nodes: int = Field(16, ge=2, description="Angular resolution per polar direction")
    max_panels: int = Field(60, ge=4, description="Cap on geometric tail panels")
    mesh: int = Field(0, ge=0, le=3, description="Refinement level of fixed-rule double integrals")

    def check_exponents(self, d: int) -> None:
        """Each declared exponent must be integrable in R^d."""
        for exponent in self.singularity_exponents:
            if exponent <= -d:
                raise InvalidArgumentError(
                    f"singular exponent {exponent} is not integrable in dimension {d}"
                )


class Ball(BaseModel):
    """Open ball; an infinite radius means the whole space."""
    model_config = ConfigDict(frozen=True)

    center: Tuple[float, ...]
    radius: float = Field(..., gt=0.0)

    @property
    def d(self) -> int:
        return len(self.center)

    @classmethod
    def whole_space(cls, d: int) -> "Ball":
        return cls(center=(0.0,) * d, radius=math.inf)

    def contains(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        if math.isinf(self.radius):
            return np.ones(len(points), dtype=bool)
        return np.linalg.norm(points - np.asarray(self.center), axis=1) < self.radius


class Annulus(BaseModel):
    """Open annulus inner < |x - center| < outer."""
    model_config = ConfigDict(frozen=True)

    center: Tuple[float, ...]
    inner: float = Field(..., ge=0.0)
    outer: float = Field(..., gt=0.0)

    @model_validator(mode="after")
    def _ordered(self) -> "Annulus":
        if self.outer <= self.inner:
            raise ValueError("outer radius must exceed inner radius")
        return self

    @property
    def d(self) -> int:
        return len(self.center)

    def contains(self, points: np.ndarray) -> np.ndarray:
        norms = np.linalg.norm(np.atleast_2d(points) - np.asarray(self.center), axis=1)
        return (norms > self.inner) & (norms < self.outer)


class KernelTagKind(str, Enum):
    """Class-membership predicates a kernel may carry."""
    IC_BETA = "ICBeta"
    FUCHSIAN = "Fuchsian"
    COUNTEREXAMPLE = "Counterexample"
    ROOT_BALL = "RootBall"


class KernelTag(BaseModel):
    """ICBeta/Fuchsian carry (C, beta); the ball constructions carry (gamma, beta)."""
    model_config = ConfigDict(frozen=True)

    kind: KernelTagKind
    beta: float
    C: Optional[float] = None
    gamma: Optional[float] = None


class KernelSymmetry(str, Enum):
    """Invariance a field computation may exploit."""
    TRANSLATION = "translation"
    RADIAL = "radial"
    AXIAL = "axial"
    NONE = "none"


OffsetFn = Callable[[np.ndarray, np.ndarray], np.ndarray]


class KernelSpec(BaseModel):
    """
    Symmetric jump kernel F(x, y), evaluated in offset form F(x, x + w).

    The offset form keeps precision when both points are far from the
    origin and their difference is small.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    name: str
    offset_fn: OffsetFn = Field(..., description="(x, w) -> F(x, x + w), rows of (m, d) arrays")
    lower_bound: float = Field(..., gt=-1.0, description="inf F")
    upper_bound: float = Field(..., description="sup F")
    class_tags: FrozenSet[KernelTag] = Field(default_factory=frozenset)
    symmetry: KernelSymmetry = KernelSymmetry.NONE
    range_bound: float = Field(math.inf, gt=0.0, description="F vanishes when |x - y| exceeds this")
    parameters: Dict[str, float] = Field(default_factory=dict)
    vanishes_on_diagonal: bool = True

    @model_validator(mode="after")
    def _bounds_ordered(self) -> "KernelSpec":
        if self.upper_bound < self.lower_bound:
            raise ValueError("upper_bound must not be below lower_bound")
        return self

    def offset(self, x: np.ndarray, w: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        w = np.atleast_2d(np.asarray(w, dtype=float))
        x, w = np.broadcast_arrays(x, w)
        return np.asarray(self.offset_fn(x, w), dtype=float).reshape(len(x))

    def eval(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        y = np.atleast_2d(np.asarray(y, dtype=float))
        return self.offset(x, y - x)

    __call__ = eval

    def tag(self, kind: KernelTagKind) -> Optional[KernelTag]:
        for tag in self.class_tags:
            if tag.kind == kind:
                return tag
        return None

    @property
    def is_zero(self) -> bool:
        return self.lower_bound == 0.0 and self.upper_bound == 0.0

    @property
    def sup_abs(self) -> float:
        return max(abs(self.lower_bound), abs(self.upper_bound))


class FunctionalSeries(BaseModel):
    """Values of the path functionals at every event time and at the horizon."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    times: np.ndarray
    A: np.ndarray
    A_tilde: np.ndarray
    QV: np.ndarray
    compensator: np.ndarray
    M: np.ndarray
    logL: np.ndarray

    @property
    def L(self) -> np.ndarray:
        return np.exp(self.logL)

    def terminal(self) -> Dict[str, float]:
        """Values at the horizon."""
        return {
            "A": float(self.A[-1]),
            "A_tilde": float(self.A_tilde[-1]),
            "QV": float(self.QV[-1]),
            "compensator": float(self.compensator[-1]),
            "M": float(self.M[-1]),
            "logL": float(self.logL[-1]),
        }


class TiltedPathConfig(BaseModel):
    """Thinning setup for the process whose jump intensity is (1 + F) times the stable one."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    base: StableParams
    F: KernelSpec
    dominating_bound: float = Field(..., gt=0.0)
    cutoff: float = Field(..., gt=0.0)
    horizon: float = Field(..., gt=0.0)
    policy: SmallJumpPolicy = SmallJumpPolicy.DROP

    @model_validator(mode="after")
    def _dominates(self) -> "TiltedPathConfig":
        if self.dominating_bound < 1.0 + self.F.upper_bound:
            raise ValueError(
                f"dominating_bound {self.dominating_bound} is below 1 + sup F = {1.0 + self.F.upper_bound}"
            )
        return self

    @classmethod
    def for_kernel(
        cls,
        base: StableParams,
        F: KernelSpec,
        cutoff: float,
        horizon: float,
        policy: SmallJumpPolicy = SmallJumpPolicy.DROP
    ) -> "TiltedPathConfig":
        """Use the tightest constant bound max(1, 1 + sup F)."""
        bound = max(1.0, 1.0 + F.upper_bound)
        return cls(base=base, F=F, dominating_bound=bound, cutoff=cutoff, horizon=horizon, policy=policy)


class Verdict(str, Enum):
    """Outcome of the flatness diagnostic."""
    CONVERGENT_ALL = "ConvergentAll"
    DIVERGENT_ALL = "DivergentAll"
    MIXED = "Mixed"


class DichotomyReport(BaseModel):
    """Per-path sums of F^2 along doubling horizons and the resulting verdict."""
    kernel: str
    under: str = Field("base", description="Law the paths were drawn from (base or tilted)")
    horizons: List[float]
    qv: List[List[float]] = Field(..., description="Per path, terminal sum of F^2 at each horizon")
    slopes: List[float] = Field(..., description="Per path growth exponent of the sum in the horizon")
    fraction_flat: float = Field(..., ge=0.0, le=1.0)
    tol: float
    verdict: Verdict


class GaugeEstimate(BaseModel):
    """Estimate of E_x[exp(-A_infinity)] with the truncation diagnostic."""
    x: Tuple[float, ...]
    u_hat: McEstimate
    horizon_used: float
    tail_flag: float = Field(..., ge=0.0, le=1.0)

    @model_validator(mode="after")
    def _in_unit_interval(self) -> "GaugeEstimate":
        if self.u_hat.mean < 0.0 or self.u_hat.mean > 1.0 + 3.0 * self.u_hat.std_err + 1e-12:
            raise ValueError(f"gauge estimate {self.u_hat.mean} outside [0, 1]")
        return self


class CheckResult(BaseModel):
    """One assertion of an experiment."""
    name: str
    passed: bool
    detail: str = ""
    values: Dict[str, Any] = Field(default_factory=dict)


class ExperimentKind(str, Enum):
    VALIDATE = "validate"
    DICHOTOMY = "dichotomy"
    ENTROPY = "entropy"
    COUNTEREXAMPLE = "counterexample"
    HARNACK = "harnack"
    GAUGE = "gauge"
    POTENTIAL_TABLES = "potential_tables"


class KernelChoice(BaseModel):
    """Kernel family selected by name; unused parameters are ignored by the family."""
    model_config = ConfigDict(extra="forbid")

    name: str = Field("zero", description="zero | fuchsian | truncated_power | annulus | counterexample | root_ball")
    C: float = Field(1.0, gt=0.0)
    beta: float = Field(1.0, gt=0.0)
    gamma: float = Field(0.25, gt=0.0)
    decay: float = Field(0.0, ge=0.0, description="Extra spatial decay exponent of the Fuchsian family")
    value: float = Field(0.5, gt=-1.0)
    inner: float = Field(1.0, ge=0.0)
    outer: float = Field(2.0, gt=0.0)
    scale: Optional[float] = Field(None, description="Multiply the kernel by this factor")


class MonteCarloSpec(BaseModel):
    """Simulation settings shared by every Monte Carlo estimator."""
    model_config = ConfigDict(extra="forbid")

    n_paths: int = Field(1000, ge=2)
    horizon: float = Field(10.0, gt=0.0)
    cutoff: float = Field(1e-3, gt=0.0)
    policy: SmallJumpPolicy = SmallJumpPolicy.DROP
    doublings: int = Field(4, ge=0, le=16)
    master_seed: int = Field(20240601, ge=0)
    tol: float = Field(1e-3, gt=0.0, description="Flatness tolerance of the doubling rule")
    dump_paths: bool = Field(False, description="Write the simulated paths as JSONL")


class ExperimentConfig(BaseModel):
    """A single experiment, as read from a JSON document."""
    model_config = ConfigDict(extra="forbid")

    experiment: ExperimentKind
    params: StableParams
    kernel: KernelChoice = Field(default_factory=KernelChoice)
    mc: MonteCarloSpec = Field(default_factory=MonteCarloSpec)
    quad: QuadratureSpec = Field(default_factory=QuadratureSpec)
    start: Optional[List[float]] = Field(None, description="Starting point, origin when omitted")
    output_dir: Optional[str] = Field(None, description="Defaults to OUTPUT_DIR")
    options: Dict[str, Any] = Field(default_factory=dict, description="Experiment specific knobs")

    @field_validator("params", mode="before")
    @classmethod
    def _drop_derived(cls, value: Any) -> Any:
        if isinstance(value, dict):
            return {k: v for k, v in value.items() if k in ("d", "alpha")}
        return value

    @model_validator(mode="after")
    def _start_dimension(self) -> "ExperimentConfig":
        if self.start is not None and len(self.start) != self.params.d:
            raise ValueError(f"start has {len(self.start)} coordinates, expected {self.params.d}")
        return self

    def start_point(self) -> np.ndarray:
        if self.start is None:
            return np.zeros(self.params.d)
        return np.asarray(self.start, dtype=float)
