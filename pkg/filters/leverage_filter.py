"""
Stable leverage filtering

Runs a geometric ladder of leverage thresholds L_j = exp(j/k) L0 from the top
(j = 2k) down to j = 0. At each level the whole batch of rows whose leverage
under the retained set exceeds L_j is removed, repeatedly, until none remain.
Removals accumulate as j decreases, so the retained sets are nested.
"""
import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import linalg

from regression.weighted_ols import DEGENERACY_TOLERANCE, MAX_CONDITION
from utils.errors import InvalidParameter, SingularCovariance

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class LeverageFilterOutcome:
    """Score, fractional weights and the retained index set of every level"""
    score: int
    weights: np.ndarray
    level_sets: Tuple[np.ndarray, ...]
    thresholds: np.ndarray
    k: int
    singular_level: Optional[int] = None

    def retained_mask(self, j: int) -> np.ndarray:
        mask = np.zeros(self.weights.shape[0], dtype=bool)
        mask[self.level_sets[j]] = True
        return mask


def leverage_ladder(l0: float, k: int) -> np.ndarray:
    """L_j = exp(j/k) * l0 for j = 0..2k"""
    return np.exp(np.arange(2 * k + 1) / k) * l0


def _validate(x, l0: float, k: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise InvalidParameter("x must be an n x d matrix")
    if int(k) != k or k < 1:
        raise InvalidParameter(f"discretization k must be a positive integer, got {k}")
    if not l0 > 0.0:
        raise InvalidParameter(f"leverage threshold must be positive, got {l0}")
    if k * l0 > 1.0:
        raise InvalidParameter(f"k * l0 = {k * l0:.4g} exceeds 1")
    n, d = x.shape
    if n <= d:
        raise InvalidParameter(f"need n > d, got n={n}, d={d}")
    return x


def _retained_inverse(x: np.ndarray, active: np.ndarray, level: int):
    """Inverse covariance of the retained rows and the leverages of all rows"""
    rows = x[active]
    if rows.shape[0] <= x.shape[1]:
        raise SingularCovariance(f"only {rows.shape[0]} rows retained", level=level)
    s = rows.T @ rows
    if np.linalg.cond(s) > MAX_CONDITION:
        raise SingularCovariance("retained covariance is ill-conditioned", level=level)
    try:
        factor = linalg.cho_factor(s, lower=True)
    except linalg.LinAlgError as exc:
        raise SingularCovariance("retained covariance is singular", level=level) from exc
    s_inv = linalg.cho_solve(factor, np.eye(x.shape[1]))
    whitened = linalg.solve_triangular(factor[0], x.T, lower=True)
    return 0.5 * (s_inv + s_inv.T), np.einsum("ij,ij->j", whitened, whitened)


def _remove_batch(x: np.ndarray, s_inv: np.ndarray, leverages: np.ndarray, batch, level: int):
    """Remove the batch one row at a time with Sherman-Morrison updates"""
    for p in batch:
        u = s_inv @ x[p]
        denom = 1.0 - leverages[p]
        if denom <= DEGENERACY_TOLERANCE:
            raise SingularCovariance(f"removing row {p} leaves a singular covariance", level=level)
        cross = x @ u
        s_inv = s_inv + np.outer(u, u) / denom
        leverages = leverages + cross ** 2 / denom
    return s_inv, leverages


def _summarize(level_sets, n: int, k: int, thresholds, singular_level=None) -> LeverageFilterOutcome:
    sizes = np.array([len(a) for a in level_sets])
    score = int(min(k, min(n - sizes[j] + j for j in range(k + 1))))

    weights = np.zeros(n)
    for j in range(k + 1, 2 * k + 1):
        weights[level_sets[j]] += 1.0
    weights /= k

    return LeverageFilterOutcome(
        score=score,
        weights=weights,
        level_sets=tuple(level_sets),
        thresholds=thresholds,
        k=k,
        singular_level=singular_level,
    )


def stable_leverage_filtering(x, l0: float, k: int) -> LeverageFilterOutcome:
    """
    Stable leverage filter, top-down with a reused retained set

    Args:
        x: n x d design matrix
        l0: Base leverage threshold L0 (k * l0 <= 1)
        k: Discretization parameter

    Returns:
        LeverageFilterOutcome with SCORE = min{k, min_{j<=k} n - |A_j| + j}
        and w_i = |{j in k+1..2k : i in A_j}| / k
    """
    x = _validate(x, l0, k)
    n, d = x.shape
    thresholds = leverage_ladder(l0, k)

    active = np.ones(n, dtype=bool)
    s_inv, leverages = _retained_inverse(x, active, level=2 * k)

    level_sets = [None] * (2 * k + 1)
    singular_level = None
    for j in range(2 * k, -1, -1):
        if singular_level is None:
            try:
                while True:
                    out = np.flatnonzero(active & (leverages > thresholds[j]))
                    if out.size == 0:
                        break
                    active[out] = False
                    if active.sum() <= d:
                        raise SingularCovariance(f"only {active.sum()} rows retained", level=j)
                    # Small batches are cheaper as rank-one downdates
                    if out.size < d:
                        s_inv, leverages = _remove_batch(x, s_inv, leverages, out, level=j)
                    else:
                        s_inv, leverages = _retained_inverse(x, active, level=j)
            except SingularCovariance as exc:
                logger.warning("Leverage filter lost rank at level %d: %s", j, exc)
                singular_level = j
                active[:] = False
        level_sets[j] = np.flatnonzero(active)

    return _summarize(level_sets, n, k, thresholds, singular_level)


def stable_leverage_filtering_reference(x, l0: float, k: int) -> LeverageFilterOutcome:
    """Independent execution of every level from the full index set (test oracle)"""
    x = _validate(x, l0, k)
    n, d = x.shape
    thresholds = leverage_ladder(l0, k)

    level_sets = [None] * (2 * k + 1)
    singular_level = None
    for j in range(2 * k, -1, -1):
        active = np.ones(n, dtype=bool)
        try:
            while True:
                rows = x[active]
                if rows.shape[0] <= d:
                    raise SingularCovariance("too few rows", level=j)
                s = rows.T @ rows
                leverages = np.einsum("ij,ji->i", x, np.linalg.solve(s, x.T))
                out = active & (leverages > thresholds[j])
                if not out.any():
                    break
                active &= ~out
        except (SingularCovariance, np.linalg.LinAlgError):
            if singular_level is None:
                singular_level = j
            active[:] = False
        level_sets[j] = np.flatnonzero(active)

    return _summarize(level_sets, n, k, thresholds, singular_level)
