"""
Weighted least squares with rank-one reweighting

All solves go through a Cholesky factorization of X^T W X. The explicit inverse
is kept in the state because the single-point updates need it.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from utils.errors import DegenerateRemoval, InvalidParameter, SingularCovariance

# Near-singular systems are rejected rather than solved
MAX_CONDITION = 1e12

# Removal is refused when w_j * h_j is this close to 1
DEGENERACY_TOLERANCE = 1e-10


@dataclass(frozen=True, eq=False)
class Dataset:
    """Design matrix and responses, read-only after construction"""
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=np.float64)
        y = np.array(self.y, dtype=np.float64)
        if x.ndim == 1:
            x = x.reshape(-1, 1)
        if x.ndim != 2 or y.ndim != 1:
            raise InvalidParameter("x must be an n x d matrix and y a length-n vector")
        if x.shape[0] != y.shape[0]:
            raise InvalidParameter(f"x has {x.shape[0]} rows but y has {y.shape[0]} entries")
        if x.shape[0] < 1 or x.shape[1] < 1:
            raise InvalidParameter("dataset needs n >= 1 and d >= 1")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise InvalidParameter("dataset entries must be finite")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def d(self) -> int:
        return self.x.shape[1]

    def with_row(self, index: int, x_row, y_value: float) -> "Dataset":
        """Copy of the dataset with one row replaced"""
        x = self.x.copy()
        y = self.y.copy()
        x[index] = x_row
        y[index] = y_value
        return Dataset(x, y)

    def subset(self, indices) -> "Dataset":
        return Dataset(self.x[indices], self.y[indices])


def as_weights(w, n: int) -> np.ndarray:
    """Validate a weight vector: length n, every entry in [0, 1]"""
    if w is None:
        return np.ones(n)
    w = np.array(w, dtype=np.float64).ravel()
    if w.shape[0] != n:
        raise InvalidParameter(f"weight vector has length {w.shape[0]}, expected {n}")
    if np.any(~np.isfinite(w)) or np.any(w < 0.0) or np.any(w > 1.0):
        raise InvalidParameter("weights must lie in [0, 1]")
    return w


def support(w) -> np.ndarray:
    """Indices of the nonzero weights"""
    return np.flatnonzero(np.asarray(w) != 0)


@dataclass(frozen=True, eq=False)
class RegressionState:
    """Weighted OLS fit with everything the rank-one updates need

    residuals follow the fitted-minus-observed convention e_i = x_i^T beta - y_i.
    Leverages and residuals are kept for every row, including zero-weight ones.
    """
    data: Dataset = field(repr=False)
    weights: np.ndarray
    s_inv: np.ndarray
    beta: np.ndarray
    leverages: np.ndarray
    residuals: np.ndarray

    @property
    def support(self) -> np.ndarray:
        return support(self.weights)

    @property
    def weight_mass(self) -> float:
        return float(self.weights.sum())

    def covariance(self) -> np.ndarray:
        """S_w = X^T diag(w) X"""
        x = self.data.x
        return x.T @ (self.weights[:, None] * x)


def _factor(s: np.ndarray):
    """Cholesky factor of an SPD matrix, with the condition-number guard"""
    if not np.all(np.isfinite(s)):
        raise SingularCovariance("covariance has non-finite entries")
    condition = np.linalg.cond(s)
    if not np.isfinite(condition) or condition > MAX_CONDITION:
        raise SingularCovariance(f"covariance condition number {condition:.3g} exceeds {MAX_CONDITION:.0e}")
    try:
        return linalg.cho_factor(s, lower=True)
    except linalg.LinAlgError as exc:
        raise SingularCovariance("Cholesky factorization of the covariance failed") from exc


def weighted_ols(data: Dataset, w=None) -> RegressionState:
    """
    Fit beta minimizing sum_i w_i (y_i - x_i^T beta)^2

    Args:
        data: Dataset to fit
        w: Weights in [0, 1] (all ones when omitted)

    Returns:
        RegressionState with leverages and residuals for all n rows
    """
    w = as_weights(w, data.n)
    if w.sum() <= 0.0:
        raise InvalidParameter("weight vector has zero mass")

    x, y = data.x, data.y
    s = x.T @ (w[:, None] * x)
    factor = _factor(s)

    beta = linalg.cho_solve(factor, x.T @ (w * y))
    s_inv = linalg.cho_solve(factor, np.eye(data.d))
    s_inv = 0.5 * (s_inv + s_inv.T)

    # h_i = |L^{-1} x_i|^2
    whitened = linalg.solve_triangular(factor[0], x.T, lower=True)
    leverages = np.einsum("ij,ij->j", whitened, whitened)
    residuals = x @ beta - y

    return RegressionState(data, w, s_inv, beta, leverages, residuals)


def cross_leverages(state: RegressionState, j: int) -> np.ndarray:
    """Column j of the hat matrix, H_{i,j} = x_i^T S^{-1} x_j"""
    x = state.data.x
    return x @ (state.s_inv @ x[j])


def hat_matrix(state: RegressionState) -> np.ndarray:
    """H = X S_w^{-1} X^T (dense, for diagnostics and tests)"""
    x = state.data.x
    return x @ state.s_inv @ x.T


def reweight_point(state: RegressionState, j: int, new_weight: float) -> RegressionState:
    """
    Change w_j to new_weight with a Sherman-Morrison update in O(nd)

    With delta = w_j - new_weight the covariance becomes S - delta x_j x_j^T and
        h_i'  = h_i + delta H_ij^2 / (1 - delta h_j)
        e_i'  = e_i + delta H_ij e_j / (1 - delta h_j)
        beta' = beta + delta e_j S^{-1} x_j / (1 - delta h_j)
    """
    if not 0.0 <= new_weight <= 1.0:
        raise InvalidParameter("new weight must lie in [0, 1]")
    delta = state.weights[j] - new_weight
    if delta == 0.0:
        return state

    x = state.data.x
    u = state.s_inv @ x[j]
    denom = 1.0 - delta * state.leverages[j]
    if denom <= DEGENERACY_TOLERANCE:
        raise DegenerateRemoval(
            f"removing weight {delta:.3g} from row {j} (leverage {state.leverages[j]:.6g}) "
            f"makes the covariance singular"
        )

    cross = x @ u
    scale = delta / denom
    e_j = state.residuals[j]

    weights = state.weights.copy()
    weights[j] = new_weight
    s_inv = state.s_inv + scale * np.outer(u, u)

    return RegressionState(
        data=state.data,
        weights=weights,
        s_inv=s_inv,
        beta=state.beta + (scale * e_j) * u,
        leverages=state.leverages + scale * cross ** 2,
        residuals=state.residuals + (scale * e_j) * cross,
    )


def downdate_remove_point(state: RegressionState, j: int) -> RegressionState:
    """Set w_j to zero, equivalent to refitting without row j"""
    if state.weights[j] == 0.0:
        raise InvalidParameter(f"row {j} is not in the support")
    if state.weights[j] * state.leverages[j] >= 1.0 - DEGENERACY_TOLERANCE:
        raise DegenerateRemoval(f"row {j} has leverage {state.leverages[j]:.6g}; removing it leaves a singular covariance")
    return reweight_point(state, j, 0.0)
