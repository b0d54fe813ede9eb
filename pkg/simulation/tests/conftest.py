import numpy as np
import pytest

from simulation.schemas import (
    ExperimentConfig,
    FixedParameters,
    LinkBudget,
    ManifoldStepConfig,
    PowerRule,
    SweepKind,
)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def budget():
    return LinkBudget(P_max=1.0, Q_p=1.0, sigma2=1e-9, I_th=0.1)


@pytest.fixture
def small_config():
    """A cheap power sweep: 2x2 array, two power points, BoundaryOptimal."""
    return ExperimentConfig(
        sweep=SweepKind.POWER,
        sweep_values=[10.0, 20.0],
        trials=3,
        master_seed=7,
        fixed=FixedParameters(M=4, Mx=2, My=2, I_th_list=[0.1], prule=PowerRule.BOUNDARY_OPTIMAL),
        step=ManifoldStepConfig(max_inner=60),
    )
