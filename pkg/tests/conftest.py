"""
Shared fixtures for the laboratory tests.
"""

import numpy as np
import pytest

from core.models import JumpPath, QuadratureSpec, StableParams
from core.orchestration import ExperimentRunner
from core.settings import Settings


@pytest.fixture
def stable_1d() -> StableParams:
    return StableParams(d=1, alpha=0.5)


@pytest.fixture
def stable_3d() -> StableParams:
    return StableParams(d=3, alpha=1.0)


@pytest.fixture
def quad() -> QuadratureSpec:
    return QuadratureSpec()


@pytest.fixture
def settings(tmp_path) -> Settings:
    return Settings(output_dir=tmp_path / "output", threads=1, log_level="WARNING", master_seed=7)


@pytest.fixture
def runner(settings) -> ExperimentRunner:
    return ExperimentRunner(settings, workers=1)


@pytest.fixture
def one_jump_path() -> JumpPath:
    """Start at 0, a single jump 0 -> 2 at t = 0.5, horizon 1."""
    return JumpPath(
        start=[0.0],
        horizon=1.0,
        times=[0.5],
        pre=np.array([[0.0]]),
        post=np.array([[2.0]]),
        end=[2.0],
        cutoff=0.1
    )
