import math

import numpy as np
import pytest

from conftest import random_dataset
from regression.goodness import GoodnessParams, check_goodness
from regression.weighted_ols import Dataset, weighted_ols
from utils.errors import InvalidParameter


def test_square_orthonormal_system_is_one_zero_good():
    data = Dataset([[1.0, 0.0], [0.0, 1.0]], [4.0, -1.0])
    report = check_goodness(data, np.ones(2), GoodnessParams(1.0, 1e-12))
    assert report
    assert report.max_leverage == pytest.approx(1.0)


def test_gaussian_data_is_good_at_log_scale():
    n, d = 1000, 3
    data = random_dataset(n, d, seed=7)
    c = 10.0
    params = GoodnessParams(c * d / n * math.log(n), c * math.sqrt(math.log(n)))
    assert check_goodness(data, np.ones(n), params).passed


def test_scaled_row_fails_leverage_exactly_there():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((50, 2))
    x[17] *= 100.0
    data = Dataset(x, x.sum(axis=1))
    report = check_goodness(data, np.ones(50), GoodnessParams(0.5))
    assert not report
    assert report.violating_indices("leverage") == [17]
    assert report.violating_indices("residual") == []


def test_residual_clause(small_data):
    state = weighted_ols(small_data)
    worst = int(np.argmax(np.abs(state.residuals)))
    bound = float(np.sort(np.abs(state.residuals))[-2])
    report = check_goodness(small_data, None, GoodnessParams(1.0, bound * 1.000001))
    assert report.violating_indices("residual") == [worst]
    assert report.cause is not None


def test_infinite_residual_bound_skips_residual_clause(small_data):
    report = check_goodness(small_data, None, GoodnessParams(1.0))
    assert report.passed
    assert report.violations == []


def test_zero_weight_rows_are_not_checked():
    x = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [50.0, 50.0]])
    data = Dataset(x, [1.0, 1.0, 2.0, 1000.0])
    assert check_goodness(data, [1.0, 1.0, 1.0, 0.0], GoodnessParams(1.0, 1.0)).passed


def test_singular_weighting_fails_with_cause(small_data):
    w = np.zeros(small_data.n)
    w[0] = 1.0
    report = check_goodness(small_data, w, GoodnessParams(1.0))
    assert not report.passed
    assert "singular" in report.cause


@pytest.mark.parametrize("leverage, residual", [(0.0, 1.0), (1.5, 1.0), (0.5, 0.0), (0.5, -2.0)])
def test_params_validation(leverage, residual):
    with pytest.raises(InvalidParameter):
        GoodnessParams(leverage, residual)
