import numpy as np
import pytest

from regression.divergence import psd_distance
from utils.errors import NotPositiveDefinite


def _random_spd(rng, d):
    a = rng.standard_normal((d, d))
    return a @ a.T + d * np.eye(d)


def test_identical_matrices():
    s = _random_spd(np.random.default_rng(1), 4)
    assert psd_distance(s, s) == pytest.approx(0.0, abs=1e-12)


def test_diagonal_example():
    assert psd_distance(np.eye(2), np.diag([2.0, 1.0])) == pytest.approx(1.0)


def test_symmetric_and_inversion_invariant():
    rng = np.random.default_rng(9)
    for _ in range(5):
        s1, s2 = _random_spd(rng, 3), _random_spd(rng, 3)
        distance = psd_distance(s1, s2)
        assert psd_distance(s2, s1) == pytest.approx(distance, rel=1e-10)
        assert psd_distance(np.linalg.inv(s1), np.linalg.inv(s2)) == pytest.approx(distance, rel=1e-8)


def test_rejects_indefinite_and_mismatched():
    with pytest.raises(NotPositiveDefinite):
        psd_distance(np.eye(2), np.diag([1.0, -1.0]))
    with pytest.raises(NotPositiveDefinite):
        psd_distance(np.eye(2), np.eye(3))
    with pytest.raises(NotPositiveDefinite):
        psd_distance(np.eye(2), np.array([[1.0, 0.5], [0.0, 1.0]]))
