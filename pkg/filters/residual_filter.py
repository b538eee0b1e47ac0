"""
Greedy residual thresholding and stable residual filtering

Two implementations of the stable filter live here. The reference one runs the
greedy thresholding independently at every residual level. The fast one walks
the levels from the largest threshold down, carrying removals forward and
halting once k points are gone. They are functionally equivalent; the reference
is kept as the oracle for the fast path.
"""
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from regression.weighted_ols import (
    Dataset,
    RegressionState,
    as_weights,
    downdate_remove_point,
    weighted_ols,
)
from utils.errors import InvalidParameter


@dataclass(frozen=True, eq=False)
class ResidualFilterOutcome:
    """Score, weights v and the per-level thresholded weights u^(j)"""
    score: float
    weights: np.ndarray
    per_level_weights: np.ndarray  # shape (2k + 1, n)
    thresholds: np.ndarray
    level_scores: np.ndarray
    k: int
    early_exit_level: Optional[int] = None
    removal_order: Tuple[int, ...] = ()


def residual_ladder(l0: float, r0: float, k: int) -> np.ndarray:
    """R_j = exp(108 k l0)^j * r0 for j = 0..2k"""
    growth = math.exp(108.0 * k * l0)
    return r0 * growth ** np.arange(2 * k + 1)


def _largest_residual(state: RegressionState):
    """Supported row with the largest |e_i|; ties go to the lowest index"""
    magnitudes = np.where(state.weights != 0.0, np.abs(state.residuals), -np.inf)
    i_star = int(np.argmax(magnitudes))
    if magnitudes[i_star] == -np.inf:
        return None, 0.0
    return i_star, float(magnitudes[i_star])


def _threshold_state(state: RegressionState, r: float, removed: list, cap: int = None) -> RegressionState:
    """Remove the largest residual while it exceeds r (and fewer than cap removals happened)"""
    while cap is None or len(removed) < cap:
        i_star, magnitude = _largest_residual(state)
        if i_star is None or not magnitude > r:
            break
        state = downdate_remove_point(state, i_star)
        removed.append(i_star)
    return state


def residual_thresholding(data: Dataset, r: float, w=None, state: RegressionState = None) -> np.ndarray:
    """
    Zero out the largest-residual point one at a time until every supported
    residual is at most r

    Args:
        data: Dataset
        r: Residual threshold; a point is removed only when |e_i| > r
        w: Starting weights
        state: Optional fit of (data, w) to start from

    Returns:
        Weights u with u_i = w_i * 1{u_i != 0}
    """
    if state is None:
        state = weighted_ols(data, w)
    return _threshold_state(state, r, []).weights


def _validate(data: Dataset, w, l0: float, r0: float, k: int) -> np.ndarray:
    if int(k) != k or k < 1:
        raise InvalidParameter(f"discretization k must be a positive integer, got {k}")
    if not l0 > 0.0:
        raise InvalidParameter(f"leverage threshold must be positive, got {l0}")
    if not r0 > 0.0:
        raise InvalidParameter(f"residual threshold must be positive, got {r0}")
    return as_weights(w, data.n)


def _level_score(n: int, u: np.ndarray, j: int, k: int) -> float:
    return min(float(k), n - float(u.sum()) + j)


def _summarize(per_level, level_scores, thresholds, k, early_exit_level=None, removal_order=()):
    score = float(level_scores[: k + 1].min())
    weights = per_level[k + 1:].sum(axis=0) / k
    return ResidualFilterOutcome(
        score=score,
        weights=weights,
        per_level_weights=per_level,
        thresholds=thresholds,
        level_scores=level_scores,
        k=k,
        early_exit_level=early_exit_level,
        removal_order=tuple(removal_order),
    )


def stable_residual_filtering(data: Dataset, w, l0: float, r0: float, k: int) -> ResidualFilterOutcome:
    """Reference stable residual filter: one independent thresholding run per level"""
    w = _validate(data, w, l0, r0, k)
    thresholds = residual_ladder(l0, r0, k)
    initial = weighted_ols(data, w)

    per_level = np.zeros((2 * k + 1, data.n))
    level_scores = np.zeros(2 * k + 1)
    for j in range(2 * k + 1):
        u = _threshold_state(initial, thresholds[j], []).weights
        per_level[j] = u
        level_scores[j] = _level_score(data.n, u, j, k)

    return _summarize(per_level, level_scores, thresholds, k)


def stable_residual_filtering_fast(data: Dataset, w, l0: float, r0: float, k: int,
                                   initial_state: RegressionState = None) -> ResidualFilterOutcome:
    """
    Stable residual filter walking the thresholds from R_2k down to R_0

    Thresholding at a smaller level continues from the result at the larger
    one, so every removal happens once. After k removals the remaining levels
    are set to u = 0 and SCORE = k.
    """
    w = _validate(data, w, l0, r0, k)
    thresholds = residual_ladder(l0, r0, k)
    state = initial_state if initial_state is not None else weighted_ols(data, w)

    per_level = np.zeros((2 * k + 1, data.n))
    level_scores = np.full(2 * k + 1, float(k))
    removed = []
    early_exit_level = None
    for j in range(2 * k, -1, -1):
        state = _threshold_state(state, thresholds[j], removed, cap=k)
        if len(removed) >= k:
            # too many outliers
            early_exit_level = j
            break
        per_level[j] = state.weights
        level_scores[j] = _level_score(data.n, state.weights, j, k)

    return _summarize(per_level, level_scores, thresholds, k, early_exit_level, removed)


def count_representation(v: np.ndarray, w: np.ndarray, k: int) -> np.ndarray:
    """Integer counts c_i with v_i = w_i c_i / k (zero where w_i = 0)"""
    v = np.asarray(v, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    counts = np.zeros(v.shape[0], dtype=int)
    supported = w != 0.0
    counts[supported] = np.rint(v[supported] * k / w[supported]).astype(int)
    return counts
