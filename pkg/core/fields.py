"""
Scalar fields evaluated along paths.
Wraps the Levy-integral fields of a kernel so that compensators can evaluate
them on many positions: constant, radially interpolated or memoized per point.
"""

import logging
import math
from typing import Callable, Dict

import numpy as np
from scipy.interpolate import PchipInterpolator

from .kernels import FieldKind, field_value
from .models import KernelSpec, KernelSymmetry, QuadratureSpec, StableParams

logger = logging.getLogger(__name__)

PointFunction = Callable[[np.ndarray], float]


class ScalarField:
    """Vectorized field: (m, d) positions -> (m,) values."""

    def __call__(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class ConstantField(ScalarField):
    def __init__(self, value: float):
        self.value = float(value)

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return np.full(len(np.atleast_2d(points)), self.value)


class RadialField(ScalarField):
    """
    Field depending on |x| only, tabulated on a radial grid.

    PCHIP in log r between grid radii, linear between 0 and the first radius,
    and a power law fitted to the last two nodes beyond the grid.
    """

    def __init__(self, radii: np.ndarray, values: np.ndarray):
        if radii[0] != 0.0 or len(radii) < 4:
            raise ValueError("radial grid must start at 0 and hold at least four radii")
        self.radii = np.asarray(radii, dtype=float)
        self.values = np.asarray(values, dtype=float)
        self._interp = PchipInterpolator(np.log(self.radii[1:]), self.values[1:])
        last, prev = self.values[-1], self.values[-2]
        if last > 0.0 and prev > 0.0:
            self._slope = min(math.log(last / prev) / math.log(self.radii[-1] / self.radii[-2]), 0.0)
        else:
            self._slope = None

    @classmethod
    def tabulate(cls, compute: PointFunction, d: int, r_max: float = 1e4, n_radii: int = 48) -> "RadialField":
        radii = np.concatenate([[0.0], np.logspace(-2.0, math.log10(r_max), n_radii)])
        values = np.empty(len(radii))
        for i, r in enumerate(radii):
            point = np.zeros(d)
            point[0] = r
            values[i] = compute(point)
        return cls(radii, values)

    def __call__(self, points: np.ndarray) -> np.ndarray:
        r = np.linalg.norm(np.atleast_2d(points), axis=1)
        out = np.empty(len(r))
        r1, r_max = self.radii[1], self.radii[-1]
        small = r < r1
        out[small] = self.values[0] + (self.values[1] - self.values[0]) * r[small] / r1
        mid = ~small & (r <= r_max)
        out[mid] = self._interp(np.log(r[mid]))
        far = r > r_max
        if self._slope is None:
            out[far] = self.values[-1]
        else:
            out[far] = self.values[-1] * (r[far] / r_max) ** self._slope
        return out


class MemoizedField(ScalarField):
    """Direct evaluation, cached per exact position."""

    def __init__(self, compute: PointFunction):
        self.compute = compute
        self._cache: Dict[bytes, float] = {}

    def __call__(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.empty(len(points))
        for i, point in enumerate(points):
            key = point.tobytes()
            value = self._cache.get(key)
            if value is None:
                value = self.compute(point)
                self._cache[key] = value
            out[i] = value
        return out

    @property
    def size(self) -> int:
        return len(self._cache)


def levy_field(
    params: StableParams,
    F: KernelSpec,
    kind: FieldKind,
    quad: QuadratureSpec,
    cutoff: float = 0.0,
    r_max: float = 1e4,
    n_radii: int = 48
) -> ScalarField:
    """
    Field accessor for one Levy integral of F.

    Args:
        params: Process parameters
        F: Kernel
        kind: Integrand of F
        quad: Tolerances
        cutoff: Exclude jumps shorter than this (match the simulated law)
        r_max: Outer radius of the radial table
        n_radii: Number of tabulated radii

    Returns:
        ScalarField chosen from the kernel's symmetry
    """
    compute = lambda x: field_value(params, F, x, kind, quad, cutoff)
    if F.is_zero:
        return ConstantField(0.0)
    if F.symmetry == KernelSymmetry.TRANSLATION:
        return ConstantField(compute(np.zeros(params.d)))
    if F.symmetry == KernelSymmetry.RADIAL:
        logger.info(f"tabulating {kind.value} of {F.name} on {n_radii + 1} radii")
        return RadialField.tabulate(compute, params.d, r_max, n_radii)
    return MemoizedField(compute)
