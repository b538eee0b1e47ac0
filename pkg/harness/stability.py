"""
Sensitivity certification on adjacent datasets

Every trial draws a dataset, changes one row and runs both filters on both
datasets. The sensitivity, intertwining and goodness bounds that apply to the
observed scores are checked; any breach is a violation.
"""
import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from filters.leverage_filter import stable_leverage_filtering
from filters.residual_filter import (
    count_representation,
    residual_ladder,
    stable_residual_filtering,
    stable_residual_filtering_fast,
)
from generators.synthetic_generator import AdjacencyMode, ModelSpec, generate, make_adjacent
from harness.results import ResultTable
from harness.runner import run_tasks, stream_for
from regression.divergence import psd_distance
from regression.goodness import GoodnessParams, check_goodness
from regression.weighted_ols import Dataset, weighted_ols
from utils.errors import DpOlsError, InvalidParameter, PreconditionError

logger = logging.getLogger(__name__)

ALL_MODES = tuple(mode.value for mode in AdjacencyMode)

# k * l0 above this voids the stability claims
MAX_K_L0 = 1.0 / 96.0


@dataclass(frozen=True)
class StabilityConfig:
    trials: int = 500
    n: int = 20000
    d: int = 2
    k: int = 4
    l0: Optional[float] = None
    r0: float = 3.0
    sigma: float = 1.0
    magnitude: float = 50.0
    modes: Tuple[str, ...] = ALL_MODES
    family: str = "gaussian"
    seed: int = 0

    def __post_init__(self):
        if self.trials < 1:
            raise InvalidParameter("trials must be at least 1")
        if self.n <= self.d or self.d < 1:
            raise InvalidParameter(f"need n > d >= 1, got n={self.n}, d={self.d}")
        if self.k < 1:
            raise InvalidParameter("k must be a positive integer")
        if self.l0 is None:
            object.__setattr__(self, "l0", MAX_K_L0 / self.k)
        if not self.l0 > 0.0 or not self.r0 > 0.0:
            raise InvalidParameter("l0 and r0 must be positive")
        object.__setattr__(self, "modes", tuple(AdjacencyMode(m).value for m in self.modes))
        if self.k * self.l0 > MAX_K_L0 * (1.0 + 1e-12):
            raise PreconditionError(
                f"k * l0 = {self.k * self.l0:.4g} exceeds 1/96; the sensitivity bounds only hold "
                f"for k * l0 <= 1/96, so the suite would certify nothing"
            )


@dataclass
class SideRun:
    """Both filters on one dataset of the pair"""
    data: Dataset
    leverage: object
    reference: object = None
    fast: object = None

    @property
    def score1(self) -> float:
        return float(self.leverage.score)

    @property
    def score2(self) -> Optional[float]:
        return None if self.fast is None else float(self.fast.score)


def _run_side(data: Dataset, cfg: StabilityConfig) -> SideRun:
    side = SideRun(data, stable_leverage_filtering(data.x, cfg.l0, cfg.k))
    if side.score1 < cfg.k:
        w = side.leverage.weights
        side.reference = stable_residual_filtering(data, w, cfg.l0, cfg.r0, cfg.k)
        side.fast = stable_residual_filtering_fast(data, w, cfg.l0, cfg.r0, cfg.k)
    return side


class _Checks:
    def __init__(self):
        self.items: List[Tuple[str, float, float]] = []

    def add(self, clause: str, observed: float, bound: float):
        self.items.append((clause, float(observed), float(bound)))

    @property
    def violated(self) -> List[str]:
        return [clause for clause, observed, bound in self.items if observed > bound]


def _intertwining_misses(a: SideRun, b: SideRun, i_star: int, k: int) -> int:
    """Indices of I = supp(u^(j)) & supp(w_b) - {i*} missing from supp(u_b^(j+1))"""
    n = a.data.n
    misses = 0
    w_b = b.leverage.weights != 0.0
    for j in range(2 * k):
        u = a.reference.per_level_weights[j]
        if u.sum() < n - k:
            continue
        inside = (u != 0.0) & w_b
        inside[i_star] = False
        survivors = b.reference.per_level_weights[j + 1] != 0.0
        misses += int(np.count_nonzero(inside & ~survivors))
    return misses


def _equivalence_breaks(side: SideRun, k: int) -> int:
    fast, ref = side.fast, side.reference
    breaks = int(fast.score != ref.score)
    if fast.early_exit_level is None:
        breaks += int(not np.array_equal(fast.per_level_weights, ref.per_level_weights))
    if fast.early_exit_level is None or fast.early_exit_level <= k:
        breaks += int(not np.array_equal(fast.weights, ref.weights))
    return breaks


def _goodness_failures(side: SideRun, cfg: StabilityConfig) -> Tuple[int, int]:
    """(failing thresholding levels at (2 L0, R_j), 1 if v fails (4 L0, 2 R_2k))"""
    n, k = side.data.n, cfg.k
    ladder = residual_ladder(cfg.l0, cfg.r0, k)
    level_failures = 0
    for j in range(2 * k + 1):
        u = side.reference.per_level_weights[j]
        if u.sum() < n - k:
            continue
        if not check_goodness(side.data, u, GoodnessParams(2.0 * cfg.l0, ladder[j])):
            level_failures += 1
    v_report = check_goodness(side.data, side.fast.weights, GoodnessParams(4.0 * cfg.l0, 2.0 * ladder[2 * k]))
    return level_failures, int(not v_report)


def run_stability_trial(task) -> Dict:
    """One adjacent pair; task = (config, mode index, trial index)"""
    cfg, point, trial = task
    mode = cfg.modes[point]
    k = cfg.k
    row = {"trial": trial, "point": point, "mode": mode, "n": cfg.n, "d": cfg.d, "k": k,
           "l0": cfg.l0, "r0": cfg.r0, "magnitude": cfg.magnitude}

    rng = stream_for(cfg.seed, point, trial)
    spec = ModelSpec(n=cfg.n, d=cfg.d, sigma=cfg.sigma, family=cfg.family, seed=rng.spawn(0).seed_sequence)
    i_star = int(rng.spawn(1).integers(0, cfg.n))
    row["i_star"] = i_star

    checks = _Checks()
    try:
        data = generate(spec)
        pair = make_adjacent(data, i_star, mode, cfg.magnitude, cfg.sigma, spec=spec,
                             seed=rng.spawn(2).seed_sequence)
        a = _run_side(pair.base, cfg)
        b = _run_side(pair.variant, cfg)
    except DpOlsError as exc:
        row.update(violations=0, violated="", error=str(exc))
        return row

    row.update(score1=a.score1, score1_adjacent=b.score1, score2=a.score2, score2_adjacent=b.score2)
    checks.add("score1", abs(a.score1 - b.score1), 2)

    below = a.score1 < k and b.score1 < k
    if below:
        leverage_l1 = float(np.abs(a.leverage.weights - b.leverage.weights).sum())
        checks.add("leverage_weights", leverage_l1, 2)
        checks.add("score2", abs(a.score2 - b.score2), 4)
        checks.add("intertwining", _intertwining_misses(a, b, i_star, k) + _intertwining_misses(b, a, i_star, k), 0)
        for side in (a, b):
            checks.add("fast_equivalence", _equivalence_breaks(side, k), 0)
            level_failures, v_failure = _goodness_failures(side, cfg)
            checks.add("thresholding_goodness", level_failures, 0)
            if side.score2 < k:
                checks.add("weights_goodness", v_failure, 0)

    if below and a.score2 < k and b.score2 < k:
        _compare_weights(a, b, i_star, cfg, checks, row)

    violated = checks.violated
    row.update(violations=len(violated), violated=";".join(violated), error="")
    return row


def _compare_weights(a: SideRun, b: SideRun, i_star: int, cfg: StabilityConfig, checks: _Checks, row: Dict):
    k = cfg.k
    v, v_adj = a.fast.weights, b.fast.weights
    distance = float(np.abs(v - v_adj).sum())
    row["weight_l1"] = distance
    checks.add("weights", distance, 5)

    shared = (a.leverage.weights != 0.0) & (b.leverage.weights != 0.0)
    shared[i_star] = False
    counts = count_representation(v, a.leverage.weights, k)
    counts_adj = count_representation(v_adj, b.leverage.weights, k)
    drift = int(np.abs(counts - counts_adj)[shared].max(initial=0))
    row["max_count_drift"] = drift
    checks.add("count_drift", drift, 1)

    fit = weighted_ols(a.data, v)
    fit_adj = weighted_ols(b.data, v_adj)
    s_v, s_adj = fit.covariance(), fit_adj.covariance()
    leverage_bound = 4.0 * cfg.l0
    residual_bound = 2.0 * residual_ladder(cfg.l0, cfg.r0, k)[2 * k]

    row["d_pd"] = psd_distance(s_v, s_adj)
    if (1.0 + distance) * leverage_bound <= 0.5:
        checks.add("covariance", row["d_pd"], 2.0 * (2.0 + distance) * leverage_bound)

    gap = fit.beta - fit_adj.beta
    row["param_distance"] = float(gap @ s_v @ gap)
    if (distance + 2.0) * leverage_bound <= 0.25:
        checks.add("parameter", row["param_distance"],
                   4.0 * (distance + 2.0) ** 2 * leverage_bound * residual_bound ** 2)


def run_stability(cfg: StabilityConfig, workers: int = 1,
                  progress_callback: Callable[[str], None] = None) -> ResultTable:
    """Run trials x modes adjacent pairs and collect one row per pair"""
    tasks = [(cfg, point, trial) for point in range(len(cfg.modes)) for trial in range(cfg.trials)]
    if progress_callback:
        progress_callback(f"🔬 Certifying {len(tasks)} adjacent pairs ({', '.join(cfg.modes)})")
    rows = run_tasks(run_stability_trial, tasks, workers, progress_callback)
    table = ResultTable.from_records("stability", rows)

    violations = int(table.frame["violations"].sum())
    if violations:
        logger.warning("Stability suite found %d violation(s)", violations)
    return table


def reproducer(row: Dict, cfg: StabilityConfig) -> Dict:
    """Everything needed to rebuild a violating pair"""
    return {
        "seed": cfg.seed,
        "mode": row["mode"],
        "point": int(row["point"]),
        "trial": int(row["trial"]),
        "i_star": int(row["i_star"]),
        "magnitude": cfg.magnitude,
        "n": cfg.n,
        "d": cfg.d,
        "k": cfg.k,
        "l0": cfg.l0,
        "r0": cfg.r0,
        "violated": row["violated"],
    }
