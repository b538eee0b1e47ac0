"""
Private estimate of the label-noise variance sigma^2

The rows are split into k' consecutive blocks, each block is fitted by plain
OLS and its mean squared residual psi_j goes into a stable histogram over
geometric bins [2^{m/4}, 2^{(m+1)/4}). The left edge of the fullest noisy bin
is returned, or None when every bin is suppressed.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from privacy.histogram import stable_histogram
from regression.weighted_ols import Dataset, weighted_ols
from utils.errors import BlockTooSmall, InvalidParameter
from utils.rng import RngStream

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SigmaConfig:
    eps0: float
    delta0: float
    zeta: float
    c1: float = 8.0
    partitions: Optional[int] = None

    def __post_init__(self):
        if not self.eps0 > 0.0:
            raise InvalidParameter(f"eps0 must be positive, got {self.eps0}")
        if not 0.0 < self.delta0 < 1.0:
            raise InvalidParameter(f"delta0 must lie in (0, 1), got {self.delta0}")
        if not 0.0 < self.zeta < 1.0:
            raise InvalidParameter(f"zeta must lie in (0, 1), got {self.zeta}")
        if not self.c1 > 0.0:
            raise InvalidParameter(f"c1 must be positive, got {self.c1}")
        if self.partitions is not None and self.partitions < 1:
            raise InvalidParameter("partitions must be at least 1")

    @property
    def block_count(self) -> int:
        """k' = floor(C1 ln(1/(delta0 zeta)) / eps0) unless fixed by `partitions`"""
        if self.partitions is not None:
            return int(self.partitions)
        if math.isinf(self.eps0):
            return 0
        return int(math.floor(self.c1 * math.log(1.0 / (self.delta0 * self.zeta)) / self.eps0))


def block_statistics(data: Dataset, partitions: int) -> np.ndarray:
    """
    Mean squared OLS residual of each of `partitions` consecutive blocks

    Args:
        data: Dataset
        partitions: Number of blocks k'; the last n mod k' rows are dropped

    Returns:
        Array psi of length k'
    """
    if partitions < 1:
        raise InvalidParameter(f"need at least one partition, got {partitions}")
    size = data.n // partitions
    if size <= data.d:
        raise BlockTooSmall(f"blocks of {size} rows cannot be fitted in dimension {data.d}")

    psi = np.empty(partitions)
    for j in range(partitions):
        block = data.subset(slice(j * size, (j + 1) * size))
        fit = weighted_ols(block)
        psi[j] = float(np.mean(fit.residuals ** 2))
    return psi


def geometric_bin(value: float) -> Tuple[Optional[int], float, float]:
    """
    Bin of `value` in the geometric grid

    Returns:
        (m, lower, upper) with lower = 2^{m/4} <= value < 2^{(m+1)/4},
        or (None, 0.0, 0.0) for the point bin [0, 0]
    """
    if value < 0.0 or not math.isfinite(value):
        raise InvalidParameter(f"bin value must be finite and nonnegative, got {value}")
    if value == 0.0:
        return None, 0.0, 0.0
    m = math.floor(4.0 * math.log2(value))
    # log2 rounding can be off by one near an edge
    while 2.0 ** (m / 4.0) > value:
        m -= 1
    while 2.0 ** ((m + 1) / 4.0) <= value:
        m += 1
    return m, 2.0 ** (m / 4.0), 2.0 ** ((m + 1) / 4.0)


def estimate_sigma_squared(data: Dataset, cfg: SigmaConfig, rng: RngStream) -> Optional[float]:
    """Left edge of the fullest private bin of the block statistics, or None for an empty histogram"""
    partitions = cfg.block_count
    if partitions < 1:
        raise InvalidParameter(
            f"partition count floor(c1 ln(1/(delta0 zeta))/eps0) is {partitions}; set partitions explicitly"
        )
    psi = block_statistics(data, partitions)

    # Only bins that receive a point are materialized; the others are empty
    bins = sorted({geometric_bin(float(value))[1:] for value in psi})
    release = stable_histogram(psi, bins, cfg.eps0, cfg.delta0, rng)
    if release.is_empty:
        logger.info("Every sigma^2 bin was suppressed (k'=%d blocks)", partitions)
        return None
    return release.mode_bin()[0]
