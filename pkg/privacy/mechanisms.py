"""
Propose-test-release gate and shaped Gaussian release
"""
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import linalg

from utils.errors import InvalidParameter, NotPositiveDefinite
from utils.rng import RngStream


class PtrOutcome(str, Enum):
    PASS = "PASS"
    FAIL = "FAIL"


@dataclass(frozen=True)
class PrivacyParams:
    """(epsilon, delta) with 0 < epsilon <= 1, 0 < delta <= epsilon/10, and score sensitivity"""
    epsilon: float
    delta: float
    sensitivity: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.epsilon <= 1.0:
            raise InvalidParameter(f"epsilon must lie in (0, 1], got {self.epsilon}")
        # Relative slack: epsilon/3 and delta/3 at delta = epsilon/10 may differ by an ulp
        if not 0.0 < self.delta <= self.epsilon / 10.0 * (1.0 + 1e-12):
            raise InvalidParameter(f"delta must lie in (0, epsilon/10], got {self.delta}")
        if not self.sensitivity > 0.0:
            raise InvalidParameter(f"sensitivity must be positive, got {self.sensitivity}")

    @property
    def noise_scale(self) -> float:
        return self.sensitivity / self.epsilon

    @property
    def truncation_bound(self) -> float:
        """
        Half-width M of the threshold support [0, 2M]

        M = (Delta/epsilon) ln(1 + (e^epsilon - 1)/(2 delta)), the point where
        P[FAIL] reaches 1/2 on a ramp that grows by at most e^epsilon, plus delta,
        per Delta of score.
        """
        return self.noise_scale * math.log1p(math.expm1(self.epsilon) / (2.0 * self.delta))

    @property
    def fail_frontier(self) -> float:
        """Smallest score that fails with certainty"""
        return 2.0 * self.truncation_bound


def truncated_laplace(rng: RngStream, scale: float, bound: float) -> float:
    """
    Laplace(0, scale) truncated to [-bound, bound], sampled by inverse CDF

    The uniform is drawn from [0, 1), so draws never reach +bound.
    """
    floor = math.exp(-bound / scale)
    mass = -math.expm1(-bound / scale)
    u = float(rng.uniform())
    if u < 0.5:
        z = scale * math.log(floor + 2.0 * u * mass)
    else:
        z = -scale * math.log(floor + 2.0 * (1.0 - u) * mass)
    return min(max(z, -bound), bound)


def ptr_check(score: float, params: PrivacyParams, rng: RngStream) -> PtrOutcome:
    """
    Noisy threshold test on a Delta-sensitive score

    The threshold is M + Z with Z ~ Laplace(Delta/epsilon) truncated to [-M, M],
    and the gate fails iff score > threshold. Score 0 always passes, scores from
    2M on always fail, and P[FAIL] is the threshold's CDF, which is
    (epsilon, delta)-DP in the score.
    """
    if score < 0:
        raise InvalidParameter(f"score must be nonnegative, got {score}")
    bound = params.truncation_bound
    threshold = bound + truncated_laplace(rng, params.noise_scale, bound)
    if score >= params.fail_frontier or score > threshold:
        return PtrOutcome.FAIL
    return PtrOutcome.PASS


def ptr_fail_probability(score: float, params: PrivacyParams) -> float:
    """Exact P[FAIL] of ptr_check"""
    frontier = params.fail_frontier
    if score <= 0:
        return 0.0
    if score >= frontier:
        return 1.0
    b = params.noise_scale
    ramp = params.delta / math.expm1(params.epsilon)
    if score <= params.truncation_bound:
        return min(ramp * math.expm1(score / b), 0.5)
    return max(1.0 - ramp * math.expm1((frontier - score) / b), 0.5)


def sample_shaped_gaussian(mean, shape, c2: float, rng: RngStream) -> np.ndarray:
    """
    Draw from N(mean, c2 * shape^{-1})

    shape = L L^T is factored and L^T w = u solved for standard normal u,
    so Cov(w) = shape^{-1}.
    """
    mean = np.asarray(mean, dtype=np.float64)
    shape = np.asarray(shape, dtype=np.float64)
    if not c2 > 0.0:
        raise InvalidParameter(f"variance scale must be positive, got {c2}")
    try:
        lower = linalg.cholesky(shape, lower=True)
    except linalg.LinAlgError as exc:
        raise NotPositiveDefinite("noise shape matrix is not positive definite") from exc
    u = rng.standard_normal(mean.shape[0])
    w = linalg.solve_triangular(lower, u, lower=True, trans="T")
    return mean + math.sqrt(c2) * w
