import math

import numpy as np
import pytest

from privacy.histogram import bin_counts, required_sample_size, stable_histogram
from utils.errors import EmptyBins, InvalidParameter
from utils.rng import RngStream


def test_bin_counts_with_point_bin():
    points = [0.0, 0.0, 0.5, 1.0, 1.5, 2.0]
    bins = [(0.0, 0.0), (0.0, 1.0), (1.0, 2.0)]
    np.testing.assert_array_equal(bin_counts(points, bins), [2, 3, 2])


def test_empty_input_gives_empty_release():
    release = stable_histogram([], [(0.0, 1.0), (1.0, 2.0)], 1.0, 1e-3, RngStream(0))
    assert release.is_empty
    np.testing.assert_array_equal(release.proportions, [0.0, 0.0])
    with pytest.raises(EmptyBins):
        release.mode_bin()


def test_single_bin_is_accurate():
    points = np.full(10_000, 0.5)
    good = 0
    for seed in range(200):
        release = stable_histogram(points, [(0.0, 1.0)], 1.0, 1e-4, RngStream(seed))
        good += abs(release.proportions[0] - 1.0) <= 0.01
    assert good >= 198


def test_rare_bin_is_suppressed():
    points = np.concatenate([[1.0], np.full(999, 5.0)])
    release = stable_histogram(points, [(0.5, 1.5), (4.5, 5.5)], 1.0, 1e-4, RngStream(6))
    assert release.proportions[0] == 0.0
    assert release.mode_bin() == (4.5, 5.5)


def test_unoccupied_bins_report_zero():
    release = stable_histogram(np.full(100, 3.0), [(0.0, 1.0), (2.0, 4.0)], 1.0, 1e-3, RngStream(2))
    assert release.proportions[0] == 0.0
    assert release.counts.tolist() == [0, 100]


def test_noise_free_mode_prefers_smaller_edge_on_ties():
    points = [1.0, 1.0, 3.0, 3.0, 5.0]
    bins = [(0.5, 1.5), (2.5, 3.5), (4.5, 5.5)]
    release = stable_histogram(points, bins, math.inf, 1e-3, RngStream(0))
    np.testing.assert_allclose(release.proportions, [0.4, 0.4, 0.2])
    assert release.mode_bin() == (0.5, 1.5)


@pytest.mark.parametrize("eps0, delta0", [(0.0, 1e-3), (1.0, 0.5), (1.0, 0.0)])
def test_parameter_validation(eps0, delta0):
    with pytest.raises(InvalidParameter):
        stable_histogram(np.ones(10), [(0.0, 2.0)], eps0, delta0, RngStream(0))


def test_required_sample_size():
    n = required_sample_size(eps0=1.0, delta0=1e-3, accuracy=0.1, failure=0.05)
    assert n == math.ceil(80.0 * math.log(4.0 / 5e-5))
