import numpy as np
import pytest

from owmatcc import (AR1Config, SolverConfig, estimate_autocovariance,
                     fixed_point_solve, sample_training_sets, simulate_ar1,
                     train_chart)

XI_RAW = np.array([0.0319, -0.2740, 0.9611, -0.0098])
XI = XI_RAW / np.linalg.norm(XI_RAW)


@pytest.fixture(scope="session")
def ar1_config():
    return AR1Config()


@pytest.fixture(scope="session")
def ar1_training15(ar1_config):
    """5000 sets of 15 consecutive samples of the 4-d benchmark."""
    return sample_training_sets(
        lambda n, s: simulate_ar1(ar1_config, n, s), 5000, 15, 100, seed=1)


@pytest.fixture(scope="session")
def ar1_table15(ar1_training15):
    return estimate_autocovariance(ar1_training15)


@pytest.fixture(scope="session")
def ar1_training10(ar1_training15):
    return ar1_training15.window(10)


@pytest.fixture(scope="session")
def xi_unit():
    return XI.copy()


@pytest.fixture(scope="session")
def owma_report10(ar1_table15, xi_unit):
    return fixed_point_solve(ar1_table15, xi_unit, 10, SolverConfig())


@pytest.fixture(scope="session")
def owma_chart10(ar1_training10, owma_report10):
    return train_chart(ar1_training10, owma_report10.weight, alpha=0.01)
