"""
Synthetic data for the linear model y = X beta* + z

Three covariate families are available: Gaussian rows, Gaussian rows rejected
outside a ball (bounded subgaussian), and a balanced +-1 design built from
Hadamard columns whose rows all have leverage d/n.
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from scipy import linalg

from regression.weighted_ols import Dataset
from utils.errors import InvalidParameter, NotPositiveDefinite
from utils.rng import RngStream

logger = logging.getLogger(__name__)

# Bounded family: whitened rows satisfy |z| <= 4 sqrt(d), noise |z_i| <= 4 sigma
BOUND_FACTOR = 4.0


class CovariateFamily(str, Enum):
    GAUSSIAN = "gaussian"
    BOUNDED = "bounded-subgaussian"
    BALANCED = "balanced"


class AdjacencyMode(str, Enum):
    LEVERAGE = "leverage-outlier"
    RESIDUAL = "residual-outlier"
    RESAMPLE = "resample"


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """Linear model with covariance Sigma, coefficients beta* and noise level sigma"""
    n: int
    d: int
    sigma: float = 1.0
    beta_star: Optional[np.ndarray] = None
    covariance: Optional[np.ndarray] = None
    family: CovariateFamily = CovariateFamily.GAUSSIAN
    seed: Optional[int] = None

    def __post_init__(self):
        if self.n < 1 or self.d < 1:
            raise InvalidParameter(f"need n >= 1 and d >= 1, got n={self.n}, d={self.d}")
        if not self.sigma >= 0.0:
            raise InvalidParameter(f"sigma must be nonnegative, got {self.sigma}")

        beta = np.ones(self.d) if self.beta_star is None else np.array(self.beta_star, dtype=np.float64).ravel()
        if beta.shape != (self.d,):
            raise InvalidParameter(f"beta_star must have length {self.d}")
        cov = np.eye(self.d) if self.covariance is None else np.array(self.covariance, dtype=np.float64)
        if cov.shape != (self.d, self.d) or not np.allclose(cov, cov.T):
            raise InvalidParameter("covariance must be a symmetric d x d matrix")
        try:
            linalg.cholesky(cov, lower=True)
        except linalg.LinAlgError as exc:
            raise NotPositiveDefinite("covariance is not positive definite") from exc

        object.__setattr__(self, "beta_star", beta)
        object.__setattr__(self, "covariance", cov)
        object.__setattr__(self, "family", CovariateFamily(self.family))

    @property
    def covariance_root(self) -> np.ndarray:
        """Symmetric square root Sigma^{1/2}"""
        values, vectors = np.linalg.eigh(self.covariance)
        return (vectors * np.sqrt(values)) @ vectors.T

    def condition_number(self) -> float:
        values = np.linalg.eigvalsh(self.covariance)
        return float(values[-1] / values[0])


@dataclass(frozen=True, eq=False)
class AdjacentPair:
    """Two datasets that differ only in row i_star"""
    base: Dataset
    variant: Dataset
    i_star: int
    mode: AdjacencyMode
    magnitude: float

    def differing_rows(self) -> np.ndarray:
        x_diff = np.any(self.base.x != self.variant.x, axis=1)
        return np.flatnonzero(x_diff | (self.base.y != self.variant.y))


class SyntheticGenerator:
    """Draws datasets, fresh rows and label noise for one ModelSpec"""

    def __init__(self, spec: ModelSpec):
        self.spec = spec
        self.root = spec.covariance_root

    def generate(self) -> Dataset:
        rng = RngStream(self.spec.seed)
        x = self.covariates(self.spec.n, rng.spawn(0))
        y = x @ self.spec.beta_star + self.noise(self.spec.n, rng.spawn(1))
        return Dataset(x, y)

    def covariates(self, n: int, rng: RngStream) -> np.ndarray:
        family = self.spec.family
        if family == CovariateFamily.BALANCED:
            whitened = self._balanced_rows(n, rng)
        elif family == CovariateFamily.BOUNDED:
            whitened = self._bounded_rows(n, rng)
        else:
            whitened = rng.standard_normal((n, self.spec.d))
        return whitened @ self.root

    def noise(self, n: int, rng: RngStream) -> np.ndarray:
        sigma = self.spec.sigma
        if sigma == 0.0:
            return np.zeros(n)
        z = rng.standard_normal(n)
        if self.spec.family == CovariateFamily.BOUNDED:
            # Redraw entries outside the band until all lie inside
            outside = np.abs(z) > BOUND_FACTOR
            while outside.any():
                z[outside] = rng.standard_normal(int(outside.sum()))
                outside = np.abs(z) > BOUND_FACTOR
        return sigma * z

    def fresh_row(self, rng: RngStream):
        """One new (x, y) drawn from the model"""
        x = self.covariates(1, rng)[0]
        y = float(x @ self.spec.beta_star + self.noise(1, rng)[0])
        return x, y

    def _bounded_rows(self, n: int, rng: RngStream) -> np.ndarray:
        d = self.spec.d
        radius = BOUND_FACTOR * math.sqrt(d)
        rows = np.empty((0, d))
        while rows.shape[0] < n:
            draw = rng.standard_normal((n, d))
            rows = np.vstack([rows, draw[np.linalg.norm(draw, axis=1) <= radius]])
        return rows[:n]

    def _balanced_rows(self, n: int, rng: RngStream) -> np.ndarray:
        d = self.spec.d
        order = 1 << max(0, (d - 1).bit_length())
        if n % order:
            logger.info("Balanced design with n=%d not a multiple of %d; leverages are only approximately d/n", n, order)
        block = linalg.hadamard(order)[:, :d].astype(np.float64)
        reps = -(-n // order)
        rows = np.tile(block, (reps, 1))[:n]
        signs = np.where(rng.uniform(n) < 0.5, -1.0, 1.0)
        return (rows * signs[:, None])[rng.permutation(n)]


def generate(spec: ModelSpec) -> Dataset:
    """Draw a dataset from the model; deterministic under spec.seed"""
    return SyntheticGenerator(spec).generate()


def redraw_labels(data: Dataset, spec: ModelSpec, seed) -> Dataset:
    """Keep X and draw fresh labels y = X beta* + z (fixed-design replication)"""
    noise = SyntheticGenerator(spec).noise(data.n, RngStream(seed))
    return Dataset(data.x, data.x @ spec.beta_star + noise)


def make_adjacent(data: Dataset, i_star: int, mode, magnitude: float, sigma: float = 1.0,
                  spec: ModelSpec = None, seed=None) -> AdjacentPair:
    """
    Replace row i_star

    Args:
        data: Base dataset
        i_star: Index of the row to change
        mode: leverage-outlier scales x by (1 + magnitude); residual-outlier
            shifts y by magnitude * sigma; resample draws a fresh row from spec
        magnitude: Size of the perturbation (0 leaves an outlier row unchanged)
        sigma: Residual shift unit
        spec: Model for resample mode
        seed: Seed of the resampled row

    Returns:
        AdjacentPair(base, variant, i_star)
    """
    mode = AdjacencyMode(mode)
    if not 0 <= i_star < data.n:
        raise InvalidParameter(f"i_star must lie in [0, {data.n}), got {i_star}")

    if mode == AdjacencyMode.RESIDUAL:
        variant = data.with_row(i_star, data.x[i_star], data.y[i_star] + magnitude * sigma)
    elif mode == AdjacencyMode.LEVERAGE:
        variant = data.with_row(i_star, data.x[i_star] * (1.0 + magnitude), data.y[i_star])
    else:
        if spec is None:
            raise InvalidParameter("resample mode needs the ModelSpec to draw from")
        x_row, y_value = SyntheticGenerator(spec).fresh_row(RngStream(seed))
        variant = data.with_row(i_star, x_row, y_value)

    return AdjacentPair(data, variant, int(i_star), mode, float(magnitude))
