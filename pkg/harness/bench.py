"""
Wall-clock benchmarks of the estimator phases
"""
import logging
import math
import time
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Tuple

import numpy as np
from scipy import stats

from estimators.issp import derived_constants
from filters.leverage_filter import stable_leverage_filtering
from filters.residual_filter import stable_residual_filtering, stable_residual_filtering_fast
from generators.synthetic_generator import ModelSpec, generate
from harness.results import ResultTable
from harness.runner import stream_for
from regression.weighted_ols import reweight_point, weighted_ols
from utils.errors import DpOlsError, InvalidParameter

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BenchConfig:
    n_grid: Tuple[int, ...] = (2000, 4000, 8000, 16000)
    d: int = 20
    epsilon: float = 1.0
    delta: float = 0.1
    l0_factor: float = 2.0
    r0: float = 4.0
    sigma: float = 1.0
    repeats: int = 3
    compare_reference: bool = True
    seed: int = 0

    def __post_init__(self):
        if not self.n_grid:
            raise InvalidParameter("n grid must not be empty")
        if self.repeats < 1:
            raise InvalidParameter("repeats must be at least 1")
        if min(self.n_grid) <= self.d:
            raise InvalidParameter("every n must exceed d")
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))

    @property
    def k(self) -> int:
        return derived_constants(self.epsilon, self.delta, 1.0, 1.0).k

    def l0_for(self, n: int) -> float:
        """l0 = l0_factor d / n, capped so that k l0 <= 1"""
        return min(self.l0_factor * self.d / n, 1.0 / self.k)


def _timed(func, *args, **kwargs):
    started = time.perf_counter()
    result = func(*args, **kwargs)
    return result, time.perf_counter() - started


def bench_point(cfg: BenchConfig, point: int, repeat: int) -> Dict:
    n = cfg.n_grid[point]
    k = cfg.k
    l0 = cfg.l0_for(n)
    r0 = cfg.r0 * cfg.sigma
    data = generate(ModelSpec(n=n, d=cfg.d, sigma=cfg.sigma, seed=stream_for(cfg.seed, point, repeat).seed_sequence))
    row = {"trial": repeat, "point": point, "n": n, "d": cfg.d, "k": k, "l0": l0, "r0": r0}

    try:
        _, row["time_factorization"] = _timed(weighted_ols, data)
        leverage, row["time_leverage_filter"] = _timed(stable_leverage_filtering, data.x, l0, k)
        w = leverage.weights
        initial, row["time_initial_fit"] = _timed(weighted_ols, data, w)
        fast, row["time_residual_fast"] = _timed(stable_residual_filtering_fast, data, w, l0, r0, k,
                                                 initial_state=initial)

        started = time.perf_counter()
        state = initial
        for j in np.flatnonzero(fast.weights != w):
            state = reweight_point(state, int(j), float(fast.weights[j]))
        row["time_rank_one"] = time.perf_counter() - started
    except DpOlsError as exc:
        row["error"] = str(exc)
        return row

    row["score_leverage"] = leverage.score
    row["score_residual"] = fast.score
    row["time_overhead"] = row["time_residual_fast"] + row["time_rank_one"]
    if cfg.compare_reference:
        reference, row["time_residual_reference"] = _timed(stable_residual_filtering, data, w, l0, r0, k)
        same = reference.score == fast.score
        if fast.early_exit_level is None or fast.early_exit_level <= k:
            same = same and np.array_equal(reference.weights, fast.weights)
        row["reference_identical"] = bool(same)
    row["error"] = ""
    return row


def scaling_exponent(table: ResultTable, column: str = "time_overhead") -> Optional[float]:
    """Slope of log(median time) against log n"""
    frame = table.frame
    if column not in frame:
        return None
    medians = frame.groupby("n")[column].median().dropna()
    medians = medians[medians > 0]
    if len(medians) < 2:
        return None
    fit = stats.linregress(np.log(medians.index.to_numpy(dtype=float)), np.log(medians.to_numpy()))
    return float(fit.slope)


def run_bench(cfg: BenchConfig, progress_callback: Callable[[str], None] = None) -> Tuple[ResultTable, Optional[float]]:
    """
    Time every phase over the n grid

    Runs serially so that timings are not distorted by other workers.
    """
    rows = []
    for point, n in enumerate(cfg.n_grid):
        if progress_callback:
            progress_callback(f"⏱️ n={n}, d={cfg.d}, k={cfg.k}")
        for repeat in range(cfg.repeats):
            rows.append(bench_point(cfg, point, repeat))

    table = ResultTable.from_records("bench", rows)
    exponent = scaling_exponent(table)
    if exponent is not None and not math.isnan(exponent):
        logger.info("Overhead scaling exponent in n: %.3f", exponent)
    return table, exponent
