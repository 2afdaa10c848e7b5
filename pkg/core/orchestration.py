"""
Experiment runner for the laboratory.
Turns experiment configs into checks, tables and report files under the output directory.
"""

import asyncio
import json
import logging
import math
import platform
import time
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import aiofiles
import numpy as np
import pydantic
import scipy
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from core.errors import ConfigError, InvalidArgumentError
from core.fields import levy_field
from core.functionals import (
    bracket_check, doleans_exponential_pair_check, inverse_density_check,
    levy_system_check, martingale_check, sequence_equivalence_check, terminal_sample
)
from core.gauge import (
    HARNACK_SCALES, DEFAULT_RADII, build_gauge_interpolant, estimate_u, gauge_monotonicity_check,
    gauge_table, harnack_ratio_check, infinite_hitting_check, jensen_check, u_integral_identity_check,
    u_limit_check, u_martingale_check
)
from core.girsanov import (
    counterexample_divergence, counterexample_hitting, dichotomy_diagnostic, entropy_P_vs_Ptilde,
    entropy_Ptilde_vs_P, fuchsian_expectation_growth, green_sandwich_check, importance_sampling_check
)
from core.kernels import FieldKind, kernel_from_choice, scaled_kernel, root_ball_kernel, verify_kernel
from core.models import (
    Ball, CheckResult, ExperimentConfig, ExperimentKind, KernelSpec, QuadratureSpec, StableParams, Verdict
)
from core.potential import (
    c1_table, exit_law_check, green_potential, small_ball_check, occupation_oracle, poisson_constant_report,
    poisson_mass, r0_table
)
from core.settings import Settings, get_settings
from core.stable_process import (
    StablePathSampler, characteristic_check, jump_characteristic_check, path_to_record, scaling_check,
    truncation_bias
)
from utils.helpers import apply_overrides, config_digest, truncate_text, write_csv, write_json, write_jsonl

logger = logging.getLogger(__name__)

REPORT_SCHEMA = 1

MATRICES: Dict[str, List[Tuple[int, float]]] = {
    "default": [(1, 0.5), (3, 1.0)],
    "minimal": [(1, 0.5)],
    "empty": [],
}

VALIDATE_CHECKS = (
    "kernel", "characteristic", "levy_system", "doleans", "importance_sampling",
    "poisson", "occupation", "exit_law", "sequence", "scaling",
)

XI_VALUES = (0.5, 1.0, 2.0)
SEQUENCE_LENGTH = 10 ** 6
SEQUENCE_CHECKPOINTS = (10 ** 2, 10 ** 3, 10 ** 4, 10 ** 5, 10 ** 6)
POISSON_MASS_TOL = 1e-3

Assertion = Union[bool, CheckResult]


class ExperimentResult(BaseModel):
    """Checks, raw data and CSV tables of one experiment."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    checks: List[CheckResult] = Field(default_factory=list)
    data: Dict[str, Any] = Field(default_factory=dict)
    tables: Dict[str, List[Dict[str, Any]]] = Field(default_factory=dict)

    @property
    def failures(self) -> List[str]:
        return [check.name for check in self.checks if not check.passed]

    def guard(self, name: str, fn: Callable[[], Tuple[Any, Dict[str, Assertion]]]) -> Any:
        """
        Run one check group.

        `fn` returns (payload, assertions); each assertion becomes a check
        named group.key. An exception fails the group and is recorded.
        """
        try:
            payload, assertions = fn()
        except Exception as e:
            logger.error(f"check '{name}' raised: {e}", exc_info=True)
            self.checks.append(CheckResult(
                name=name, passed=False, detail=truncate_text(f"{type(e).__name__}: {e}")
            ))
            return None
        self.data[name] = payload
        for key, outcome in assertions.items():
            if isinstance(outcome, CheckResult):
                check = outcome.model_copy(update={"name": f"{name}.{key}"})
            else:
                check = CheckResult(name=f"{name}.{key}", passed=bool(outcome))
            self.checks.append(check)
            if not check.passed:
                logger.warning(f"check {check.name} failed {check.detail}".rstrip())
        return payload

    def merge(self, prefix: str, other: "ExperimentResult") -> None:
        for check in other.checks:
            self.checks.append(check.model_copy(update={"name": f"{prefix}/{check.name}"}))
        for key, value in other.data.items():
            self.data[f"{prefix}/{key}"] = value
        for key, rows in other.tables.items():
            self.tables[f"{prefix}_{key}"] = rows


class RunOutcome(BaseModel):
    """Exit status of a run and where its report went."""
    status: int = Field(..., ge=0, le=2)
    report_path: Optional[Path] = None
    failures: List[str] = Field(default_factory=list)
    message: str = ""


def _setup(config: ExperimentConfig) -> Tuple[StableParams, KernelSpec, np.ndarray]:
    return config.params, kernel_from_choice(config.kernel, config.params), config.start_point()


def _unit(d: int, value: float) -> np.ndarray:
    point = np.zeros(d)
    point[0] = value
    return point


def _validate_experiment(config: ExperimentConfig, workers: Optional[int]) -> ExperimentResult:
    """Cross-estimator consistency battery for one (d, alpha) point."""
    params, F, x = _setup(config)
    mc, quad, opts = config.mc, config.quad, config.options
    selected = set(opts.get("checks", VALIDATE_CHECKS))
    unknown = selected - set(VALIDATE_CHECKS)
    if unknown:
        raise InvalidArgumentError(f"unknown validate checks: {sorted(unknown)}")
    seed = mc.master_seed
    result = ExperimentResult()
    h_eval = levy_field(params, F, FieldKind.H, quad, mc.cutoff) if selected & {"levy_system", "doleans"} else None

    if "kernel" in selected:
        def kernel() -> Tuple[Any, Dict[str, Assertion]]:
            report = verify_kernel(F, params.d, opts.get("n_pairs", 10_000), seed)
            return report, {"structure": report.passed}
        result.guard("kernel", kernel)

    if "characteristic" in selected:
        def characteristic() -> Tuple[Any, Dict[str, Assertion]]:
            exact = characteristic_check(params, 1.0, XI_VALUES, opts.get("n_draws", 10 * mc.n_paths), seed)
            jump = jump_characteristic_check(
                params, 1.0, XI_VALUES, mc.n_paths, seed + 1, mc.cutoff, mc.policy, workers=workers
            )
            bias = [truncation_bias(params, mc.cutoff, xi, 1.0, mc.policy) for xi in XI_VALUES]
            payload = {"exact": exact, "jump_paths": jump, "truncation_bias": bias}
            return payload, {"exact": all(r.passed for r in exact), "jump_paths": all(r.passed for r in jump)}
        result.guard("characteristic", characteristic)

    if "levy_system" in selected:
        def levy_system() -> Tuple[Any, Dict[str, Assertion]]:
            square = levy_field(params, F, FieldKind.SQUARE, quad, mc.cutoff)
            sample = terminal_sample(
                StablePathSampler(params, mc.cutoff, mc.policy), F, h_eval, x, mc.n_paths, seed + 2,
                mc.horizon, square_eval=square, workers=workers
            )
            checks = {
                "identity": levy_system_check(sample),
                "martingale": martingale_check(sample),
                "bracket": bracket_check(sample),
            }
            return {key: check.values for key, check in checks.items()}, checks
        result.guard("levy_system", levy_system)

    if "doleans" in selected:
        def doleans() -> Tuple[Any, Dict[str, Assertion]]:
            n = min(mc.n_paths, opts.get("identity_paths", 1000))
            pair = F.sup_abs < 1.0

            def identities(path) -> List[float]:
                inverse = inverse_density_check(path, F, h_eval, params)
                errors = [inverse.abs_error, float(inverse.passed)]
                if pair:
                    report = doleans_exponential_pair_check(path, F, h_eval, params)
                    errors += [report.rel_error, float(report.passed)]
                return errors

            rows = np.array(StablePathSampler(params, mc.cutoff, mc.policy).map(
                identities, x, n, seed + 3, mc.horizon, workers
            ))
            payload = {"n_paths": n, "inverse_max_error": float(rows[:, 0].max())}
            assertions: Dict[str, Assertion] = {"inverse_density": bool(np.all(rows[:, 1] == 1.0))}
            if pair:
                payload["pair_max_rel_error"] = float(rows[:, 2].max())
                assertions["exponential_pair"] = bool(np.all(rows[:, 3] == 1.0))
            else:
                logger.info(f"{F.name}: sup |F| >= 1, exponential pair identity skipped")
            return payload, assertions
        result.guard("doleans", doleans)

    if "importance_sampling" in selected:
        def importance() -> Tuple[Any, Dict[str, Assertion]]:
            report = importance_sampling_check(
                params, F, x, mc.horizon, mc.n_paths, seed + 4, mc.cutoff, quad, workers=workers
            )
            return report, {"equality": report.passed}
        result.guard("importance_sampling", importance)

    if "poisson" in selected:
        def poisson() -> Tuple[Any, Dict[str, Assertion]]:
            report = poisson_constant_report(params, quad)
            mass = poisson_mass(params, 1.0, _unit(params.d, 0.3), quad)
            return {"constant": report, "mass": mass}, {"normalization": abs(mass - 1.0) <= POISSON_MASS_TOL}
        result.guard("poisson", poisson)

    if "occupation" in selected:
        def occupation() -> Tuple[Any, Dict[str, Assertion]]:
            origin = Ball(center=(0.0,) * params.d, radius=1.0)
            region = Ball(center=(0.0,) * params.d, radius=0.5)
            report = occupation_oracle(
                params, origin, np.zeros(params.d), region, mc.n_paths, seed + 5,
                mc.cutoff, mc.horizon, quad, workers
            )
            return report, {"ball_green": report.agree}
        result.guard("occupation", occupation)

    if "exit_law" in selected:
        def exit_law() -> Tuple[Any, Dict[str, Assertion]]:
            report = exit_law_check(
                params, 1.0, 2.0, np.zeros(params.d), mc.n_paths, seed + 6, mc.cutoff, mc.horizon, quad, workers
            )
            return report, {"beyond": report.agree}
        result.guard("exit_law", exit_law)

    if "sequence" in selected:
        def sequence() -> Tuple[Any, Dict[str, Assertion]]:
            a = 1.0 / np.sqrt(np.arange(1, SEQUENCE_LENGTH + 1))
            report = sequence_equivalence_check(a, SEQUENCE_CHECKPOINTS)
            products = [mark["product"] for mark in report.checkpoints]
            decades = np.diff(np.log(products))
            return report, {
                "decreasing": all(b < a for a, b in zip(products, products[1:])),
                "small_product": report.product < 0.05,
                "log_linear": bool(np.all((decades > -0.7) & (decades < -0.45))),
            }
        result.guard("sequence", sequence)

    if "scaling" in selected:
        def scaling() -> Tuple[Any, Dict[str, Assertion]]:
            report = scaling_check(
                params, 1.0, np.zeros(params.d), 2.0, mc.n_paths, seed + 7, mc.cutoff, mc.horizon, workers
            )
            return report, {"exit_law": min(report.ks_tau_pvalue, report.ks_position_pvalue) >= 1e-3}
        result.guard("scaling", scaling)

    return result


def _dichotomy_experiment(config: ExperimentConfig, workers: Optional[int]) -> ExperimentResult:
    params, F, x = _setup(config)
    mc, opts = config.mc, config.options
    result = ExperimentResult()

    def dichotomy() -> Tuple[Any, Dict[str, Assertion]]:
        report = dichotomy_diagnostic(
            params, F, x, mc.horizon, mc.n_paths, mc.doublings, mc.master_seed, mc.cutoff, mc.tol,
            under=opts.get("under", "base"), workers=workers
        )
        assertions: Dict[str, Assertion] = {"zero_two_law": report.verdict != Verdict.MIXED}
        if "expect" in opts:
            assertions["expected_verdict"] = report.verdict == Verdict(opts["expect"])
        result.tables["dichotomy"] = [
            {"path": i, "horizon": h, "qv": q[j], "slope": report.slopes[i]}
            for i, q in enumerate(report.qv)
            for j, h in enumerate(report.horizons)
        ]
        return report, assertions
    result.guard("dichotomy", dichotomy)

    if opts.get("expectation_growth") and config.kernel.name.lower() == "fuchsian":
        def growth() -> Tuple[Any, Dict[str, Assertion]]:
            choice = config.kernel
            report = fuchsian_expectation_growth(
                params, choice.C, choice.beta, x, mc.horizon, mc.doublings, mc.n_paths, mc.master_seed + 1,
                config.quad, mc.cutoff, choice.decay, workers
            )
            result.tables["expectation_growth"] = [
                {"horizon": h, "mean_A": m.mean, "std_err": m.std_err} for h, m in zip(report.horizons, report.means)
            ]
            return report, {"divergence": report.divergent == (choice.decay == 0.0 and choice.beta > params.alpha)}
        result.guard("expectation_growth", growth)
    return result


def _entropy_experiment(config: ExperimentConfig, workers: Optional[int]) -> ExperimentResult:
    params, F, x = _setup(config)
    mc, quad, opts = config.mc, config.quad, config.options
    result = ExperimentResult()

    def forward() -> Tuple[Any, Dict[str, Assertion]]:
        estimate = entropy_P_vs_Ptilde(
            params, F, x, mc.horizon, mc.n_paths, mc.master_seed, quad, mc.cutoff, mc.doublings, mc.tol,
            n_balls=opts.get("n_balls", 4), workers=workers
        )
        assertions: Dict[str, Assertion] = {}
        if estimate.agree is not None:
            assertions["pathwise_vs_green"] = estimate.agree
        if "expect_infinite" in opts:
            assertions["finiteness"] = math.isinf(estimate.green) == bool(opts["expect_infinite"])
        if estimate.partial_sums:
            result.tables["entropy_partial_sums"] = [
                {"n": i + 1, "partial_sum": s} for i, s in enumerate(estimate.partial_sums)
            ]
        return estimate, assertions
    result.guard("forward", forward)

    if opts.get("reverse", True):
        def reverse() -> Tuple[Any, Dict[str, Assertion]]:
            estimate = entropy_Ptilde_vs_P(
                params, F, x, mc.horizon, mc.n_paths, mc.master_seed + 1, quad, mc.cutoff, mc.doublings,
                mc.tol, workers=workers
            )
            return estimate, {"sandwich": estimate.within_sandwich, "weighted_cross_check": estimate.cross_check}
        result.guard("reverse", reverse)

    if opts.get("green_sandwich", False):
        def sandwich() -> Tuple[Any, Dict[str, Assertion]]:
            shells = [tuple(s) for s in opts.get("shells", [(0.0, 1.0), (1.0, 2.0), (2.0, 4.0)])]
            report = green_sandwich_check(
                params, F, x, shells, mc.n_paths, mc.master_seed + 2, mc.cutoff, mc.horizon, workers=workers
            )
            return report, {"occupation_ratio": report.passed}
        result.guard("green_sandwich", sandwich)
    return result


def _counterexample_experiment(config: ExperimentConfig, workers: Optional[int]) -> ExperimentResult:
    params = config.params
    mc, quad, opts, choice = config.mc, config.quad, config.options, config.kernel
    # (gamma, beta) of the ball kernel Phi; the square-root kernel uses half of each
    if choice.name.lower() == "root_ball":
        gamma, beta = 2.0 * choice.gamma, 2.0 * choice.beta
    else:
        gamma, beta = choice.gamma, choice.beta
    n_balls = int(opts.get("n_balls", 4))
    result = ExperimentResult()

    def divergence() -> Tuple[Any, Dict[str, Assertion]]:
        report = counterexample_divergence(params, gamma, beta, n_balls, quad, "counterexample")
        result.tables["balls"] = [
            {"n": n, "center": c, "radius": r, "contribution": g, "partial_sum": s, "hitting_term": t}
            for (n, c, r), g, s, t in zip(report.balls, report.contributions, report.partial_sums, report.hitting_terms)
        ]
        return report, {
            "linear_growth": report.above_half_first,
            "green_divergent": report.divergent,
            "majorant": report.majorant_holds and report.hitting_sum <= report.geometric_majorant,
        }
    result.guard("divergence", divergence)

    if opts.get("hitting", True):
        def hitting() -> Tuple[Any, Dict[str, Assertion]]:
            rows = counterexample_hitting(
                params, gamma, n_balls, mc.n_paths, mc.master_seed + 1, mc.horizon, mc.cutoff, workers
            )
            return rows, {"per_ball_bound": all(row.respected for row in rows)}
        result.guard("hitting", hitting)

    if opts.get("square_root", True):
        def square_root() -> Tuple[Any, Dict[str, Assertion]]:
            F = root_ball_kernel(params, gamma / 2.0, beta / 2.0)
            report = dichotomy_diagnostic(
                params, F, np.zeros(params.d), mc.horizon, mc.n_paths, mc.doublings, mc.master_seed + 2,
                mc.cutoff, mc.tol, workers=workers
            )
            entropy = counterexample_divergence(params, gamma / 2.0, beta / 2.0, n_balls, quad, "root_ball")
            result.tables["square_root_entropy"] = [
                {"n": n, "contribution": g, "partial_sum": s}
                for (n, _, _), g, s in zip(entropy.balls, entropy.contributions, entropy.partial_sums)
            ]
            payload = {"dichotomy": report, "entropy": entropy}
            return payload, {
                "absolutely_continuous": report.verdict == Verdict.CONVERGENT_ALL,
                "entropy_divergent": entropy.divergent,
            }
        result.guard("square_root", square_root)
    return result


def _harnack_experiment(config: ExperimentConfig, workers: Optional[int]) -> ExperimentResult:
    params, F, _ = _setup(config)
    mc, opts = config.mc, config.options
    result = ExperimentResult()

    def harnack() -> Tuple[Any, Dict[str, Assertion]]:
        report = harnack_ratio_check(
            params, F, mc.n_paths, mc.master_seed, opts.get("scales", HARNACK_SCALES),
            mc.horizon, mc.cutoff, mc.doublings, mc.tol, workers
        )
        result.tables["harnack"] = [
            {"R": row.scale, "ratio": row.ratio, "min_u": min(e.mean for e in row.u), "max_u": max(e.mean for e in row.u)}
            for row in report.rows
        ]
        assertions: Dict[str, Assertion] = {
            "scale_invariant": report.scale_invariant,
            "bounded_below": report.bounded_below,
        }
        if opts.get("check_radial", True):
            assertions["radial"] = report.radial
        return report, assertions
    result.guard("harnack", harnack)

    if opts.get("infinite_hitting", True) and params.is_transient:
        def hitting() -> Tuple[Any, Dict[str, Assertion]]:
            report = infinite_hitting_check(
                params, mc.n_paths, mc.master_seed + 1, mc.horizon, opts.get("hitting_doublings", 2),
                mc.cutoff, workers=workers
            )
            return report, {"visits_grow": report.increasing, "transient": report.transient}
        result.guard("infinite_hitting", hitting)
    return result


def _gauge_experiment(config: ExperimentConfig, workers: Optional[int]) -> ExperimentResult:
    params, F, x = _setup(config)
    mc, quad, opts = config.mc, config.quad, config.options
    seed = mc.master_seed
    t = float(opts.get("t", 1.0))
    result = ExperimentResult()
    state: Dict[str, Any] = {}

    def direct() -> Tuple[Any, Dict[str, Assertion]]:
        estimate = estimate_u(params, F, x, mc.n_paths, seed, mc.horizon, mc.cutoff, mc.doublings, mc.tol, workers=workers)
        state["direct"] = estimate
        green_value = None
        if params.is_transient:
            green_value = green_potential(params, levy_field(params, F, FieldKind.H, quad, mc.cutoff), x, quad)
        state["green"] = green_value
        jensen = jensen_check(
            params, F, x, mc.n_paths, seed, green_value, mc.horizon, mc.cutoff, mc.doublings, mc.tol, workers
        )
        mean = estimate.u_hat.mean
        in_range = mean == 1.0 if F.is_zero else 0.0 < mean < 1.0
        return {"estimate": estimate, "green": green_value}, {"range": in_range, "jensen": jensen}
    result.guard("estimate", direct)

    def interpolant() -> Tuple[Any, Dict[str, Assertion]]:
        fitted = build_gauge_interpolant(
            params, F, mc.n_paths, seed + 1, opts.get("radii", DEFAULT_RADII), mc.horizon, mc.cutoff,
            mc.doublings, mc.tol, workers
        )
        state["interpolant"] = fitted
        result.tables["gauge"] = gauge_table(fitted)
        return {"residual": fitted.residual, "budget": fitted.budget, "minimum": fitted.minimum}, {}
    result.guard("interpolant", interpolant)

    if "interpolant" not in state:
        return result
    fitted = state["interpolant"]
    base = state.get("direct")

    def martingale() -> Tuple[Any, Dict[str, Assertion]]:
        report = u_martingale_check(params, F, x, t, fitted, mc.n_paths, seed + 2, mc.cutoff, base, workers)
        return report, {"identity": report.passed}
    result.guard("u_martingale", martingale)

    def integral() -> Tuple[Any, Dict[str, Assertion]]:
        report = u_integral_identity_check(
            params, F, x, fitted, mc.n_paths, seed + 3, mc.horizon, mc.cutoff, mc.doublings, mc.tol,
            green_value=state.get("green"), direct=base, workers=workers
        )
        finite = u_integral_identity_check(
            params, F, x, fitted, mc.n_paths, seed + 4, mc.horizon, mc.cutoff, mc.doublings, mc.tol,
            t=t, direct=base, workers=workers
        )
        return {"infinite": report, "finite": finite}, {"infinite": report.passed, "finite": finite.passed}
    result.guard("u_integral", integral)

    def limit() -> Tuple[Any, Dict[str, Assertion]]:
        report = u_limit_check(params, F, x, fitted, mc.n_paths, seed + 5, mc.horizon, mc.doublings, mc.cutoff)
        result.tables["u_limit"] = [{"horizon": h, "fraction": f} for h, f in zip(report.horizons, report.fractions)]
        return report, {"monotone": report.monotone}
    result.guard("u_limit", limit)

    if opts.get("monotonicity", False):
        def monotonicity() -> Tuple[Any, Dict[str, Assertion]]:
            check = gauge_monotonicity_check(
                params, F, scaled_kernel(F, 2.0), [x], mc.n_paths, seed + 6, mc.horizon, mc.cutoff, workers=workers
            )
            return check.values, {"common_paths": check}
        result.guard("monotonicity", monotonicity)
    return result


def _potential_tables_experiment(config: ExperimentConfig, workers: Optional[int]) -> ExperimentResult:
    params, quad, opts, choice = config.params, config.quad, config.options, config.kernel
    triples = [tuple(t) for t in opts.get("triples", [[params.d, params.alpha, choice.beta]])]
    eps = float(opts.get("eps", 0.5))
    result = ExperimentResult()

    def c1() -> Tuple[Any, Dict[str, Assertion]]:
        coarse = quad if quad.mesh < 3 else quad.model_copy(update={"mesh": 2})
        fine = coarse.model_copy(update={"mesh": coarse.mesh + 1})
        changes = [
            {**a, "refined": b["c1"], "rel_change": abs(b["c1"] / a["c1"] - 1.0)}
            for a, b in zip(c1_table(triples, coarse), c1_table(triples, fine))
        ]
        result.tables["c1"] = changes
        finite = all(math.isfinite(row["c1"]) and math.isfinite(row["refined"]) for row in changes)
        return changes, {"finite": finite, "mesh_stable": all(row["rel_change"] < 0.05 for row in changes)}
    result.guard("c1", c1)

    def r0() -> Tuple[Any, Dict[str, Assertion]]:
        rows = r0_table(triples, choice.C, eps, quad)
        result.tables["r0"] = rows
        return rows, {}
    result.guard("r0", r0)

    if params.d <= 3 and choice.beta > params.alpha:
        def small_ball() -> Tuple[Any, Dict[str, Assertion]]:
            report = small_ball_check(params, choice.C, choice.beta, eps, quad)
            result.tables["small_ball"] = report.grid
            return report, {"below_eps": report.passed}
        result.guard("small_ball", small_ball)

    def poisson() -> Tuple[Any, Dict[str, Assertion]]:
        return poisson_constant_report(params, quad), {}
    result.guard("poisson_constant", poisson)
    return result


EXPERIMENTS: Dict[ExperimentKind, Callable[[ExperimentConfig, Optional[int]], ExperimentResult]] = {
    ExperimentKind.VALIDATE: _validate_experiment,
    ExperimentKind.DICHOTOMY: _dichotomy_experiment,
    ExperimentKind.ENTROPY: _entropy_experiment,
    ExperimentKind.COUNTEREXAMPLE: _counterexample_experiment,
    ExperimentKind.HARNACK: _harnack_experiment,
    ExperimentKind.GAUGE: _gauge_experiment,
    ExperimentKind.POTENTIAL_TABLES: _potential_tables_experiment,
}


def _versions() -> Dict[str, str]:
    return {
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pydantic": pydantic.VERSION,
    }


class ExperimentRunner:
    """
    Runs experiments off the event loop and persists their reports.

    Every experiment executes in a worker thread; report files are written
    by this runner only, one run at a time.
    """

    def __init__(self, settings: Optional[Settings] = None, workers: Optional[int] = None):
        """
        Args:
            settings: Runtime settings, the cached environment settings when omitted
            workers: Thread count for path-parallel work, THREADS when omitted
        """
        self.settings = settings or get_settings()
        self.workers = workers or self.settings.threads
        self._writer = asyncio.Lock()

    def output_root(self, config: Optional[ExperimentConfig] = None) -> Path:
        if config is not None and config.output_dir:
            return Path(config.output_dir)
        return Path(self.settings.output_dir)

    def run_dir(self, config: ExperimentConfig) -> Path:
        """<output_dir>/<experiment>-<config hash>."""
        return self.output_root(config) / f"{config.experiment.value}-{config_digest(self.config_echo(config))}"

    @staticmethod
    def config_echo(config: ExperimentConfig) -> Dict[str, Any]:
        return config.model_dump(mode="json")

    def load_config(self, document: Dict[str, Any], overrides: Sequence[str] = ()) -> ExperimentConfig:
        """
        Validate a config document after applying dotted overrides.

        Raises:
            ConfigError: On any parse or validation problem
        """
        if not isinstance(document, dict):
            raise ConfigError("an experiment config must be a JSON object")
        merged = apply_overrides(document, overrides)
        mc = merged.setdefault("mc", {})
        if isinstance(mc, dict):
            mc.setdefault("master_seed", self.settings.master_seed)
        try:
            return ExperimentConfig.model_validate(merged)
        except ValidationError as e:
            raise ConfigError(f"invalid experiment config: {e}") from e

    async def run_file(self, path: Path, overrides: Sequence[str] = ()) -> RunOutcome:
        """Read, validate and run a JSON config; parse errors give status 2."""
        try:
            async with aiofiles.open(path, "r", encoding="utf-8") as f:
                document = json.loads(await f.read())
            config = self.load_config(document, overrides)
        except (OSError, json.JSONDecodeError, ConfigError) as e:
            logger.error(f"cannot load config {path}: {e}")
            return RunOutcome(status=2, message=truncate_text(str(e)))
        return await self.run(config)

    async def run(self, config: ExperimentConfig) -> RunOutcome:
        """
        Execute the named experiment and write report.json, CSV tables and manifest.json.

        Returns:
            RunOutcome with status 0 when every check passed, 1 otherwise
        """
        started_at = datetime.now(timezone.utc).isoformat()
        clock = time.perf_counter()
        logger.info(f"running {config.experiment.value} for d={config.params.d}, alpha={config.params.alpha:g}")
        result = await self._execute(config.experiment.value, EXPERIMENTS[config.experiment], config)
        records = None
        if config.mc.dump_paths:
            records = await asyncio.to_thread(self._path_records, config)
        return await self._persist(
            self.run_dir(config), config.experiment.value, self.config_echo(config), config.mc.master_seed,
            result, started_at, time.perf_counter() - clock, records
        )

    async def validate_suite(self, matrix: str = "default", base: Optional[ExperimentConfig] = None) -> RunOutcome:
        """
        Run the validate battery on every (d, alpha) of a matrix; an empty matrix passes.

        Args:
            matrix: default | minimal | empty
            base: Config supplying kernel, Monte Carlo and quadrature settings
        """
        if matrix not in MATRICES:
            return RunOutcome(status=2, message=f"unknown matrix '{matrix}'")
        started_at = datetime.now(timezone.utc).isoformat()
        clock = time.perf_counter()
        template = base.model_dump(exclude={"params", "experiment", "start"}) if base is not None else {
            "mc": {"master_seed": self.settings.master_seed}
        }
        combined = ExperimentResult()
        configs = []
        for d, alpha in MATRICES[matrix]:
            config = ExperimentConfig.model_validate(
                {**template, "experiment": ExperimentKind.VALIDATE, "params": {"d": d, "alpha": alpha}}
            )
            configs.append(self.config_echo(config))
            result = await self._execute(f"validate d={d} alpha={alpha:g}", _validate_experiment, config)
            combined.merge(f"d{d}_alpha{alpha:g}", result)
        echo = {"matrix": matrix, "points": configs}
        directory = self.output_root(base) / f"validate-{matrix}-{config_digest(echo)}"
        seed = base.mc.master_seed if base is not None else self.settings.master_seed
        return await self._persist(directory, "validate", echo, seed, combined, started_at, time.perf_counter() - clock)

    async def tables(
        self,
        what: str,
        triples: Sequence[Tuple[int, float, float]],
        C: float = 1.0,
        eps: float = 0.5,
        quad: Optional[QuadratureSpec] = None
    ) -> RunOutcome:
        """Write the C1 or r0 table for (d, alpha, beta) triples."""
        if what not in ("c1", "r0"):
            return RunOutcome(status=2, message=f"unknown table '{what}'")
        quad = quad or QuadratureSpec()
        started_at = datetime.now(timezone.utc).isoformat()
        clock = time.perf_counter()
        echo = {"what": what, "triples": [list(t) for t in triples], "C": C, "eps": eps, "quad": quad.model_dump(mode="json")}
        result = ExperimentResult()

        def build() -> Tuple[Any, Dict[str, Assertion]]:
            rows = c1_table(triples, quad) if what == "c1" else r0_table(triples, C, eps, quad)
            result.tables[what] = rows
            return rows, {"finite": all(math.isfinite(row["c1"]) for row in rows)}

        await asyncio.to_thread(result.guard, what, build)
        directory = self.output_root() / f"tables-{what}-{config_digest(echo)}"
        return await self._persist(
            directory, "tables", echo, self.settings.master_seed, result, started_at, time.perf_counter() - clock
        )

    async def _execute(
        self,
        label: str,
        experiment: Callable[[ExperimentConfig, Optional[int]], ExperimentResult],
        config: ExperimentConfig
    ) -> ExperimentResult:
        try:
            return await asyncio.to_thread(experiment, config, self.workers)
        except Exception as e:
            logger.error(f"experiment {label} failed: {e}", exc_info=True)
            return ExperimentResult(checks=[CheckResult(
                name=config.experiment.value, passed=False, detail=truncate_text(f"{type(e).__name__}: {e}")
            )])

    def _path_records(self, config: ExperimentConfig) -> List[Dict[str, Any]]:
        mc = config.mc
        n = min(mc.n_paths, int(config.options.get("dump_limit", 100)))
        sampler = StablePathSampler(config.params, mc.cutoff, mc.policy)
        return sampler.map(path_to_record, config.start_point(), n, mc.master_seed, mc.horizon, self.workers)

    async def _persist(
        self,
        directory: Path,
        experiment: str,
        echo: Dict[str, Any],
        master_seed: int,
        result: ExperimentResult,
        started_at: str,
        wall_time: float,
        records: Optional[List[Dict[str, Any]]] = None
    ) -> RunOutcome:
        failures = result.failures
        report = {
            "schema": REPORT_SCHEMA,
            "experiment": experiment,
            "config": echo,
            "master_seed": master_seed,
            "passed": not failures,
            "failures": failures,
            "checks": result.checks,
            "data": result.data,
            "tables": sorted(result.tables),
        }
        async with self._writer:
            report_path = await write_json(directory / "report.json", report)
            for name, rows in sorted(result.tables.items()):
                await write_csv(directory / f"{name}.csv", rows)
            if records is not None:
                await write_jsonl(directory / "paths.jsonl", records)
            await write_json(directory / "manifest.json", {
                "schema": REPORT_SCHEMA,
                "experiment": experiment,
                "config": echo,
                "master_seed": master_seed,
                "versions": _versions(),
                "started_at": started_at,
                "wall_time_seconds": wall_time,
                "files": ["report.json"] + [f"{name}.csv" for name in sorted(result.tables)]
                + (["paths.jsonl"] if records is not None else []),
            })
        status = 1 if failures else 0
        if failures:
            logger.warning(f"{experiment}: {len(failures)} failed checks: {', '.join(failures)}")
        else:
            logger.info(f"{experiment}: all {len(result.checks)} checks passed")
        logger.info(f"report written to {report_path}")
        return RunOutcome(status=status, report_path=report_path, failures=failures)
