"""
Private ordinary least squares by stabilized solution perturbation

A fit runs in two phases. prepare() is deterministic: it checks the parameter
guards, runs the leverage and residual filters and forms the weighted solution
beta_hat with its covariance S_v. release() spends the randomness: the PTR gate
on max(SCORE_1, SCORE_2) and, on PASS, a draw from N(beta_hat, c^2 S_v^{-1}).
"""
import logging
import math
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Optional

import numpy as np

from filters.leverage_filter import stable_leverage_filtering
from filters.residual_filter import stable_residual_filtering_fast
from privacy.mechanisms import PrivacyParams, PtrOutcome, ptr_check, sample_shaped_gaussian
from regression.weighted_ols import Dataset, reweight_point, weighted_ols
from utils.errors import DegenerateRemoval, InvalidParameter, SingularCovariance
from utils.rng import RngStream

logger = logging.getLogger(__name__)

# Sensitivity of max{SCORE_1, SCORE_2} on adjacent datasets
SCORE_SENSITIVITY = 4.0

# Residual-filter weights move in steps of w_i/k
WEIGHT_TOLERANCE = 1e-12

RESEARCH_MODE_WARNING = (
    "research mode: diagnostics depend on the data and are not covered by the privacy guarantee"
)


class Outcome(str, Enum):
    ESTIMATE = "ESTIMATE"
    FAIL = "FAIL"


@dataclass(frozen=True)
class IsspConfig:
    epsilon: float
    delta: float
    l0: float
    r0: float
    noise_scale_override: float = 1.0
    seed: Optional[int] = None
    strict_privacy: bool = False
    debug_checks: bool = False

    def __post_init__(self):
        if not 0.0 < self.epsilon <= 1.0:
            raise InvalidParameter(f"epsilon must lie in (0, 1], got {self.epsilon}")
        if not 0.0 < self.delta <= self.epsilon / 10.0:
            raise InvalidParameter(f"delta must lie in (0, epsilon/10], got {self.delta}")
        if not (self.l0 > 0.0 and self.r0 > 0.0):
            raise InvalidParameter("outlier thresholds l0 and r0 must be positive")
        if not self.noise_scale_override > 0.0:
            raise InvalidParameter("noise scale override must be positive")


@dataclass(frozen=True)
class DerivedConstants:
    k: int
    log_c2: float
    leverage_guard: float  # 1/(96k)
    accuracy_guard: float  # 3 epsilon / (56 ln(12/delta))

    @property
    def c2(self) -> float:
        return math.exp(self.log_c2) if self.log_c2 < 709.0 else math.inf

    def passes_guards(self, l0: float) -> bool:
        return l0 <= self.leverage_guard and l0 <= self.accuracy_guard

    def guard_verdicts(self, l0: float) -> Dict[str, bool]:
        return {
            "l0 <= 1/(96k)": l0 <= self.leverage_guard,
            "l0 <= 3eps/(56 ln(12/delta))": l0 <= self.accuracy_guard,
        }

    def describe_guards(self, l0: float) -> str:
        failed = [name for name, ok in self.guard_verdicts(l0).items() if not ok]
        if not failed:
            return "guards satisfied"
        return f"guard violated: {', '.join(failed)} (l0={l0:.6g}, 1/(96k)={self.leverage_guard:.6g}, " \
               f"3eps/(56 ln(12/delta))={self.accuracy_guard:.6g})"


def gate_params(epsilon: float, delta: float) -> PrivacyParams:
    """PTR parameters: a third of the budget on max{SCORE_1, SCORE_2}"""
    return PrivacyParams(epsilon / 3.0, delta / 3.0, SCORE_SENSITIVITY)


def derived_constants(epsilon: float, delta: float, l0: float, r0: float) -> DerivedConstants:
    """
    k = ceil(12 ln(3/delta)/epsilon) + 8, raised to the gate's certain-FAIL
    frontier when that lies higher (small delta), and
    c^2 = 56448 exp(432 k^2 l0) l0 r0^2 ln(12/delta) / epsilon^2 (kept in log space)
    """
    k = math.ceil(12.0 * math.log(3.0 / delta) / epsilon) + 8
    # A score of k must fail with certainty
    k = max(k, math.ceil(gate_params(epsilon, delta).fail_frontier))
    log_c2 = (math.log(56448.0) + 432.0 * k * k * l0 + math.log(l0) + 2.0 * math.log(r0)
              + math.log(math.log(12.0 / delta)) - 2.0 * math.log(epsilon))
    return DerivedConstants(
        k=k,
        log_c2=log_c2,
        leverage_guard=1.0 / (96.0 * k),
        accuracy_guard=3.0 * epsilon / (56.0 * math.log(12.0 / delta)),
    )


@dataclass
class IsspDiagnostics:
    k: int
    c2: float
    noise_variance: float
    score_leverage: Optional[float] = None
    score_residual: Optional[float] = None
    weight_mass: Optional[float] = None
    fail_reason: Optional[str] = None
    message: str = ""
    timings: Dict[str, float] = field(default_factory=dict)
    warning: str = RESEARCH_MODE_WARNING


@dataclass
class IsspOutput:
    outcome: Outcome
    beta_tilde: Optional[np.ndarray] = None
    diagnostics: Optional[IsspDiagnostics] = None

    @property
    def failed(self) -> bool:
        return self.outcome == Outcome.FAIL


@dataclass(eq=False)
class PreparedRelease:
    """Deterministic half of a fit: scores, beta_hat and S_v"""
    constants: DerivedConstants
    noise_variance: float
    score: float
    beta_hat: Optional[np.ndarray] = None
    shape: Optional[np.ndarray] = None
    diagnostics: IsspDiagnostics = None
    fail_reason: Optional[str] = None


class IsspEstimator:
    """Differentially private OLS estimator"""

    def __init__(self, config: IsspConfig):
        self.config = config
        self.constants = derived_constants(config.epsilon, config.delta, config.l0, config.r0)
        self.ptr_params = gate_params(config.epsilon, config.delta)
        log_variance = self.constants.log_c2 + math.log(config.noise_scale_override)
        self.noise_variance = math.exp(log_variance) if log_variance < 709.0 else math.inf

    def prepare(self, data: Dataset) -> PreparedRelease:
        cfg = self.config
        k = self.constants.k
        diagnostics = IsspDiagnostics(k=k, c2=self.constants.c2, noise_variance=self.noise_variance)
        prepared = PreparedRelease(self.constants, self.noise_variance, float(k), diagnostics=diagnostics)

        # Step 1: parameter guards
        if not self.constants.passes_guards(cfg.l0):
            diagnostics.message = self.constants.describe_guards(cfg.l0)
            return self._fail(prepared, "guard")
        if not math.isfinite(self.noise_variance):
            diagnostics.message = (f"noise variance overflows float64 (log c^2 = {self.constants.log_c2:.1f}); "
                                   f"lower noise_scale_override")
            return self._fail(prepared, "overflow")

        try:
            # Step 2: leverage filter
            started = time.perf_counter()
            leverage = stable_leverage_filtering(data.x, cfg.l0, k)
            diagnostics.timings["leverage_filter"] = time.perf_counter() - started
            diagnostics.score_leverage = float(leverage.score)

            if leverage.score >= k:
                # PTR fails deterministically at score k
                diagnostics.message = "leverage score reached k"
                prepared.score = float(k)
                return self._fail(prepared, "ptr")

            # Step 3: residual filter, from the fit on the leverage weights
            started = time.perf_counter()
            initial = weighted_ols(data, leverage.weights)
            residual = stable_residual_filtering_fast(
                data, leverage.weights, cfg.l0, cfg.r0, k, initial_state=initial
            )
            diagnostics.timings["residual_filter"] = time.perf_counter() - started
            diagnostics.score_residual = float(residual.score)
            diagnostics.weight_mass = float(residual.weights.sum())
            prepared.score = max(float(leverage.score), float(residual.score))

            if prepared.score >= k:
                diagnostics.message = "residual score reached k"
                return self._fail(prepared, "ptr")

            # Step 4: beta_hat and S_v by rank-one reweighting of the initial fit
            started = time.perf_counter()
            state = initial
            changed = ~np.isclose(residual.weights, initial.weights, rtol=0.0, atol=WEIGHT_TOLERANCE)
            for j in np.flatnonzero(changed):
                state = reweight_point(state, int(j), float(residual.weights[j]))
            if cfg.debug_checks:
                self._cross_check(data, state, residual.weights)
            prepared.beta_hat = state.beta
            prepared.shape = state.covariance()
            diagnostics.timings["solve"] = time.perf_counter() - started

        except (SingularCovariance, DegenerateRemoval) as exc:
            diagnostics.message = f"singular covariance inside filters: {exc}"
            return self._fail(prepared, "singular")

        return prepared

    def release(self, prepared: PreparedRelease, rng: RngStream) -> IsspOutput:
        diagnostics = prepared.diagnostics
        if prepared.fail_reason is not None:
            return self._failure_output(diagnostics)

        started = time.perf_counter()
        gate = ptr_check(prepared.score, self.ptr_params, rng)
        diagnostics.timings["ptr"] = time.perf_counter() - started
        if gate == PtrOutcome.FAIL:
            diagnostics.fail_reason = "ptr"
            diagnostics.message = "propose-test-release gate failed"
            return self._failure_output(diagnostics)

        started = time.perf_counter()
        beta_tilde = sample_shaped_gaussian(prepared.beta_hat, prepared.shape, prepared.noise_variance, rng)
        diagnostics.timings["sample"] = time.perf_counter() - started

        if self.config.strict_privacy:
            public = IsspDiagnostics(k=diagnostics.k, c2=diagnostics.c2,
                                     noise_variance=diagnostics.noise_variance, warning="")
            return IsspOutput(Outcome.ESTIMATE, beta_tilde, public)
        return IsspOutput(Outcome.ESTIMATE, beta_tilde, diagnostics)

    def fit(self, data: Dataset, rng: RngStream = None) -> IsspOutput:
        if rng is None:
            rng = RngStream(self.config.seed)
        return self.release(self.prepare(data), rng)

    def _fail(self, prepared: PreparedRelease, reason: str) -> PreparedRelease:
        prepared.fail_reason = reason
        prepared.diagnostics.fail_reason = reason
        return prepared

    def _failure_output(self, diagnostics: IsspDiagnostics) -> IsspOutput:
        # The failure path reveals only the bit under strict privacy
        if self.config.strict_privacy:
            return IsspOutput(Outcome.FAIL)
        logger.warning("ISSP returned FAIL (%s); %s", diagnostics.fail_reason, RESEARCH_MODE_WARNING)
        return IsspOutput(Outcome.FAIL, None, diagnostics)

    @staticmethod
    def _cross_check(data: Dataset, state, weights):
        direct = weighted_ols(data, weights)
        if not np.allclose(direct.beta, state.beta, rtol=1e-8, atol=1e-10):
            raise AssertionError("rank-one beta_hat drifted from the direct weighted fit")
        if not np.allclose(direct.s_inv, state.s_inv, rtol=1e-8, atol=1e-12):
            raise AssertionError("rank-one S_v^{-1} drifted from the direct weighted fit")


def issp_fit(data: Dataset, config: IsspConfig, rng: RngStream = None) -> IsspOutput:
    """Run the private estimator once"""
    return IsspEstimator(config).fit(data, rng)
