"""
(L, R)-goodness checks for weighted datasets
"""
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from regression.weighted_ols import Dataset, as_weights, weighted_ols
from utils.errors import InvalidParameter, SingularCovariance


@dataclass(frozen=True)
class GoodnessParams:
    """Leverage bound L in (0, 1] and residual bound R (math.inf for (L, inf)-goodness)"""
    leverage_bound: float
    residual_bound: float = math.inf

    def __post_init__(self):
        if not 0.0 < self.leverage_bound <= 1.0:
            raise InvalidParameter(f"leverage bound must lie in (0, 1], got {self.leverage_bound}")
        if not self.residual_bound > 0.0:
            raise InvalidParameter(f"residual bound must be positive, got {self.residual_bound}")


@dataclass(frozen=True)
class Violation:
    index: int
    leverage: float
    abs_residual: float
    clause: str  # 'leverage' or 'residual'


@dataclass
class GoodnessReport:
    passed: bool
    violations: List[Violation] = field(default_factory=list)
    cause: Optional[str] = None
    max_leverage: float = math.nan
    max_abs_residual: float = math.nan

    def __bool__(self):
        return self.passed

    def violating_indices(self, clause: str = None) -> List[int]:
        return sorted({v.index for v in self.violations if clause is None or v.clause == clause})


def check_goodness(data: Dataset, w, params: GoodnessParams, rtol: float = 1e-9) -> GoodnessReport:
    """
    Check that w is (L, R)-good for the dataset

    Every supported row must have h_i <= L and, when R is finite, |e_i| <= R.
    Both bounds get a relative slack of rtol for rounding.
    """
    w = as_weights(w, data.n)
    if w.sum() <= 0.0:
        raise InvalidParameter("weight vector has zero mass")

    try:
        state = weighted_ols(data, w)
    except SingularCovariance as exc:
        return GoodnessReport(passed=False, cause=f"singular covariance: {exc}")

    rows = state.support
    leverages = state.leverages[rows]
    abs_residuals = np.abs(state.residuals[rows])

    violations = []
    leverage_limit = params.leverage_bound * (1.0 + rtol)
    for i, h, e in zip(rows, leverages, abs_residuals):
        if h > leverage_limit:
            violations.append(Violation(int(i), float(h), float(e), "leverage"))

    if math.isfinite(params.residual_bound):
        residual_limit = params.residual_bound * (1.0 + rtol)
        for i, h, e in zip(rows, leverages, abs_residuals):
            if e > residual_limit:
                violations.append(Violation(int(i), float(h), float(e), "residual"))

    return GoodnessReport(
        passed=not violations,
        violations=violations,
        cause=None if not violations else f"{len(violations)} bound violation(s)",
        max_leverage=float(leverages.max()),
        max_abs_residual=float(abs_residuals.max()),
    )
