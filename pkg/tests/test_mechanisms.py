import math

import numpy as np
import pytest
from scipy import linalg, stats

from privacy.mechanisms import (
    PrivacyParams,
    PtrOutcome,
    ptr_check,
    ptr_fail_probability,
    sample_shaped_gaussian,
    truncated_laplace,
)
from utils.errors import InvalidParameter, NotPositiveDefinite
from utils.rng import RngStream

PARAMS = PrivacyParams(epsilon=0.5, delta=0.05, sensitivity=4.0)
# Gate of the pipeline at epsilon = 1, delta = 0.1
PIPELINE_PARAMS = PrivacyParams(epsilon=1.0 / 3.0, delta=0.1 / 3.0, sensitivity=4.0)


def test_bounds():
    assert PARAMS.truncation_bound == pytest.approx(8.0 * math.log(1.0 + math.expm1(0.5) / 0.1))
    assert PARAMS.fail_frontier == pytest.approx(32.21, abs=0.01)
    assert PIPELINE_PARAMS.fail_frontier == pytest.approx(46.47, abs=0.01)


@pytest.mark.parametrize("epsilon, delta", [(1.5, 0.1), (0.0, 0.0), (0.5, 0.06), (0.5, 0.0)])
def test_params_validation(epsilon, delta):
    with pytest.raises(InvalidParameter):
        PrivacyParams(epsilon, delta)


def test_truncated_laplace_stays_in_range():
    rng = RngStream(4)
    bound = PARAMS.truncation_bound
    draws = np.array([truncated_laplace(rng, 8.0, bound) for _ in range(4000)])
    assert draws.min() >= -bound
    assert draws.max() < bound
    assert draws.mean() == pytest.approx(0.0, abs=0.5)


def test_truncated_laplace_at_uniform_zero():
    class _ZeroUniforms:
        def random(self, size=None):
            return 0.0

    rng = RngStream(0)
    rng.generator = _ZeroUniforms()
    assert truncated_laplace(rng, 8.0, 16.0) == pytest.approx(-16.0)


def test_score_zero_always_passes():
    assert all(ptr_check(0.0, PARAMS, RngStream(seed)) == PtrOutcome.PASS for seed in range(300))
    assert ptr_fail_probability(0.0, PARAMS) == 0.0


def test_frontier_always_fails():
    frontier = PARAMS.fail_frontier
    assert all(ptr_check(frontier, PARAMS, RngStream(seed)) == PtrOutcome.FAIL for seed in range(300))
    assert ptr_fail_probability(frontier, PARAMS) == 1.0
    assert ptr_fail_probability(frontier - 0.5, PARAMS) < 1.0


@pytest.mark.slow
@pytest.mark.parametrize("params", [PARAMS, PIPELINE_PARAMS])
def test_certain_zones_over_many_seeds(params):
    seeds = range(10_000)
    assert all(ptr_check(0.0, params, RngStream(seed)) == PtrOutcome.PASS for seed in seeds)
    assert all(ptr_check(params.fail_frontier, params, RngStream(seed)) == PtrOutcome.FAIL for seed in seeds)


def test_intermediate_score_is_a_coin():
    score = PARAMS.fail_frontier / 2.0
    assert ptr_fail_probability(score, PARAMS) == pytest.approx(0.5)
    outcomes = {ptr_check(score, PARAMS, RngStream(seed)) for seed in range(200)}
    assert outcomes == {PtrOutcome.PASS, PtrOutcome.FAIL}


def test_fail_probability_is_monotone():
    scores = np.linspace(0.0, PARAMS.fail_frontier, 50)
    probabilities = [ptr_fail_probability(s, PARAMS) for s in scores]
    assert all(a <= b for a, b in zip(probabilities, probabilities[1:]))


@pytest.mark.parametrize("params", [PARAMS, PIPELINE_PARAMS])
def test_gate_is_differentially_private_in_the_score(params):
    # Every pair of scores at most Delta apart, on a grid of step Delta/16
    step = params.sensitivity / 16.0
    scores = np.arange(0.0, params.fail_frontier + 2.0 * params.sensitivity, step)
    fail = np.array([ptr_fail_probability(s, params) for s in scores])
    factor = math.exp(params.epsilon)
    worst = 0.0
    for offset in range(1, 17):
        for a, b in ((fail[:-offset], fail[offset:]), (fail[offset:], fail[:-offset])):
            worst = max(worst, float(np.max(a - factor * b)), float(np.max((1.0 - a) - factor * (1.0 - b))))
    assert worst <= params.delta + 1e-12


def test_empirical_fail_rate_matches_closed_form():
    score = 16.0
    trials = 4000
    fails = sum(ptr_check(score, PARAMS, RngStream(seed)) == PtrOutcome.FAIL for seed in range(trials))
    expected = ptr_fail_probability(score, PARAMS)
    assert fails / trials == pytest.approx(expected, abs=4.0 * math.sqrt(expected * (1 - expected) / trials))


@pytest.mark.slow
def test_empirical_fail_rate_grid_is_monotone():
    scores = np.linspace(0.0, PARAMS.fail_frontier, 20)
    trials = 2000
    # Seed-paired: the same noisy thresholds are reused at every score
    rates = np.array([
        np.mean([ptr_check(s, PARAMS, RngStream(seed)) == PtrOutcome.FAIL for seed in range(trials)])
        for s in scores
    ])
    assert np.all(np.diff(rates) >= 0.0)
    assert rates[0] == 0.0 and rates[-1] == 1.0
    expected = np.array([ptr_fail_probability(s, PARAMS) for s in scores])
    np.testing.assert_allclose(rates, expected, atol=4.0 * math.sqrt(0.25 / trials))


def test_negative_score_rejected():
    with pytest.raises(InvalidParameter):
        ptr_check(-1.0, PARAMS, RngStream(0))


def test_vanishing_variance_returns_mean():
    mean = np.array([1.5, -2.0])
    draw = sample_shaped_gaussian(mean, np.eye(2), 1e-300, RngStream(1))
    np.testing.assert_allclose(draw, mean, rtol=1e-15)


def _draws(shape, c2, count, seed):
    rng = RngStream(seed)
    return np.array([sample_shaped_gaussian(np.zeros(shape.shape[0]), shape, c2, rng) for _ in range(count)])


def test_identity_shape_covariance():
    samples = _draws(np.eye(2), 1.0, 20000, seed=3)
    assert np.linalg.norm(np.cov(samples.T) - np.eye(2), 2) <= 0.05


def test_diagonal_shape_variances():
    samples = _draws(np.diag([4.0, 1.0]), 1.0, 20000, seed=3)
    np.testing.assert_allclose(samples.var(axis=0), [0.25, 1.0], rtol=0.05)


def test_whitened_draws_are_standard_normal():
    shape = np.array([[3.0, 1.2, 0.4], [1.2, 2.0, -0.3], [0.4, -0.3, 1.5]])
    c2 = 2.5
    samples = _draws(shape, c2, 5000, seed=8)
    quadratic = np.einsum("ij,jk,ik->i", samples, shape, samples) / c2
    assert stats.kstest(quadratic, stats.chi2(df=3).cdf).pvalue > 1e-3
    root = linalg.sqrtm(shape).real
    whitened = samples @ root / math.sqrt(c2)
    np.testing.assert_allclose(np.cov(whitened.T), np.eye(3), atol=0.08)


def test_shape_must_be_positive_definite():
    with pytest.raises(NotPositiveDefinite):
        sample_shaped_gaussian(np.zeros(2), np.diag([1.0, -1.0]), 1.0, RngStream(0))
    with pytest.raises(InvalidParameter):
        sample_shaped_gaussian(np.zeros(2), np.eye(2), 0.0, RngStream(0))


def test_same_seed_same_draw():
    shape = np.diag([2.0, 5.0])
    a = sample_shaped_gaussian(np.ones(2), shape, 1.0, RngStream(42))
    b = sample_shaped_gaussian(np.ones(2), shape, 1.0, RngStream(42))
    np.testing.assert_array_equal(a, b)
