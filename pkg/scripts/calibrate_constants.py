#!/usr/bin/env python3
"""
Constant calibration report.
Prints the Levy, Green and Poisson-kernel constants for a set of (d, alpha) pairs
and how the unnormalized Poisson constant pi^(1+d/2) Gamma(d/2) sin(pi alpha/2) compares with the numerically pinned one.
"""

import argparse
import sys
from pathlib import Path

from dotenv import load_dotenv

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from core.models import QuadratureSpec, StableParams  # noqa: E402
from core.potential import poisson_constant_report, poisson_mass  # noqa: E402
from core.quadrature import MAX_ANGULAR_DIMENSION  # noqa: E402

load_dotenv()

DEFAULT_PAIRS = ["1,0.5", "1,1.5", "2,1.0", "3,0.5", "3,1.0", "3,1.5"]


def calibrate(pairs, tol: float) -> bool:
    """Print one row per pair; False when a Poisson mass misses 1 by more than 1e-3."""
    quad = QuadratureSpec(tol=tol)
    ok = True
    print(f"{'d':>2} {'alpha':>6} {'levy_const':>12} {'green_const':>12} {'poisson':>12} "
          f"{'closed_err':>10} {'unnorm/num':>12} {'mass':>10}")
    for pair in pairs:
        d_text, alpha_text = pair.split(",")
        params = StableParams(d=int(d_text), alpha=float(alpha_text))
        green = f"{params.green_const:12.6g}" if params.green_const is not None else f"{'-':>12}"
        report = poisson_constant_report(params, quad)
        mass = "-"
        if params.d <= MAX_ANGULAR_DIMENSION:
            value = poisson_mass(params, 1.0, [0.3] + [0.0] * (params.d - 1), quad)
            ok &= abs(value - 1.0) <= 1e-3
            mass = f"{value:.6f}"
        print(f"{params.d:>2} {params.alpha:>6g} {params.levy_const:12.6g} {green} {report.numeric:12.6g} "
              f"{report.closed_form_rel_error:10.2e} {report.unnormalized_over_numeric:12.6g} {mass:>10}")
    return ok


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description="Print the process constants and Poisson normalization")
    parser.add_argument("pairs", nargs="*", default=DEFAULT_PAIRS, metavar="D,ALPHA")
    parser.add_argument("--tol", type=float, default=1e-6)
    args = parser.parse_args()
    sys.exit(0 if calibrate(args.pairs, args.tol) else 1)
