import math

import numpy as np
import pytest

from generators.synthetic_generator import ModelSpec, generate
from regression.weighted_ols import Dataset

# Desk-scale parameters under which the guards hold: eps=1, delta=0.1 gives k=49
DESK_EPSILON = 1.0
DESK_DELTA = 0.1
DESK_K = 49
DESK_L0 = 1.0 / (96.0 * DESK_K)
DESK_N = 10240


def random_dataset(n: int, d: int, seed: int, sigma: float = 1.0) -> Dataset:
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, d))
    return Dataset(x, x @ np.ones(d) + sigma * rng.standard_normal(n))


@pytest.fixture
def small_data():
    return random_dataset(200, 3, seed=7)


@pytest.fixture
def gaussian_data():
    return generate(ModelSpec(n=500, d=2, sigma=1.0, seed=5))


@pytest.fixture(scope="session")
def balanced_data():
    """Balanced design: every row has leverage exactly d/n"""
    return generate(ModelSpec(n=DESK_N, d=2, sigma=1.0, family="balanced", seed=11))


@pytest.fixture
def desk_r0():
    return 6.0


def log_override_to(target_variance: float, log_c2: float) -> float:
    return math.exp(math.log(target_variance) - log_c2)
