"""
Stability-based private histogram
"""
import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from utils.errors import EmptyBins, InvalidParameter
from utils.rng import RngStream

Bin = Tuple[float, float]


@dataclass(frozen=True, eq=False)
class HistogramRelease:
    bins: Tuple[Bin, ...]
    proportions: np.ndarray
    counts: np.ndarray

    @property
    def is_empty(self) -> bool:
        return not np.any(self.proportions > 0.0)

    def mode_bin(self) -> Bin:
        """Bin with the largest noisy proportion; ties go to the smaller edge"""
        if self.is_empty:
            raise EmptyBins("every histogram bin was suppressed")
        best = max(range(len(self.bins)), key=lambda b: (self.proportions[b], -self.bins[b][0]))
        return self.bins[best]


def bin_counts(points, bins: Sequence[Bin]) -> np.ndarray:
    """Counts per bin; (lo, hi) means [lo, hi) and (lo, lo) the point bin [lo, lo]"""
    points = np.asarray(points, dtype=np.float64)
    counts = np.zeros(len(bins), dtype=int)
    for b, (lower, upper) in enumerate(bins):
        if lower == upper:
            counts[b] = int(np.count_nonzero(points == lower))
        else:
            counts[b] = int(np.count_nonzero((points >= lower) & (points < upper)))
    return counts


def stable_histogram(points, bins: Sequence[Bin], eps0: float, delta0: float, rng: RngStream) -> HistogramRelease:
    """
    Release noisy bin proportions

    Nonempty bins get Laplace noise of scale 2/(eps0 n) and are zeroed below
    t = 2 ln(2/delta0)/(eps0 n) + 1/n. Empty bins report exactly zero.
    eps0 = inf turns the noise off.
    """
    points = np.asarray(points, dtype=np.float64).ravel()
    bins = tuple((float(lo), float(hi)) for lo, hi in bins)
    n = points.shape[0]
    if n == 0:
        return HistogramRelease(bins, np.zeros(len(bins)), np.zeros(len(bins), dtype=int))
    if not eps0 > 0.0:
        raise InvalidParameter(f"eps0 must be positive, got {eps0}")
    if not 0.0 < delta0 < 1.0 / n:
        raise InvalidParameter(f"delta0 must lie in (0, 1/n) = (0, {1.0 / n:.4g}), got {delta0}")

    counts = bin_counts(points, bins)
    empirical = counts / n
    scale = 2.0 / (eps0 * n)
    threshold = 2.0 * math.log(2.0 / delta0) / (eps0 * n) + 1.0 / n

    proportions = np.zeros(len(bins))
    occupied = counts > 0
    noisy = empirical[occupied] + rng.laplace(scale, size=int(occupied.sum()))
    proportions[occupied] = np.where(noisy >= threshold, noisy, 0.0)

    return HistogramRelease(bins, proportions, counts)


def required_sample_size(eps0: float, delta0: float, accuracy: float, failure: float) -> int:
    """n >= (8/(eps0 beta)) ln(4/(alpha delta0)) guarantees accuracy beta with prob 1 - alpha"""
    return int(math.ceil(8.0 / (eps0 * accuracy) * math.log(4.0 / (failure * delta0))))
