"""
Accuracy sweeps of the private estimator

For every (n, kappa) point the harness runs seeded trials, records the
Sigma-norm error of the release and the excess in-sample MSE over OLS, and
summarizes them per point next to the closed-form predictions.
"""
import logging
import math
from dataclasses import dataclass
from itertools import product
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy import stats

from estimators.issp import IsspConfig, IsspEstimator, derived_constants
from generators.synthetic_generator import ModelSpec, SyntheticGenerator, redraw_labels
from harness.results import ResultTable
from harness.runner import run_tasks, stream_for
from regression.weighted_ols import weighted_ols
from utils.errors import DpOlsError, InvalidParameter

logger = logging.getLogger(__name__)

# Spawn branches of the root seed
DESIGN_BRANCH = 0
TRIAL_BRANCH = 1


@dataclass(frozen=True)
class AccuracyConfig:
    n_grid: Tuple[int, ...] = (10240,)
    d: int = 2
    sigma: float = 1.0
    kappas: Tuple[float, ...] = (1.0,)
    trials: int = 200
    epsilon: float = 1.0
    delta: float = 0.1
    l0: Optional[float] = None
    r0: float = 6.0
    noise_scale_override: float = 1.0
    target_variance: Optional[float] = None
    family: str = "balanced"
    fixed_design: bool = True
    seed: int = 0

    def __post_init__(self):
        if not self.n_grid or not self.kappas:
            raise InvalidParameter("n grid and kappa grid must not be empty")
        if self.trials < 1:
            raise InvalidParameter("trials must be at least 1")
        if any(kappa < 1.0 for kappa in self.kappas):
            raise InvalidParameter("condition numbers must be at least 1")
        if self.target_variance is not None and not self.target_variance > 0.0:
            raise InvalidParameter("target noise variance must be positive")
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))
        object.__setattr__(self, "kappas", tuple(float(kappa) for kappa in self.kappas))
        if self.l0 is None:
            k = derived_constants(self.epsilon, self.delta, 1.0, 1.0).k
            object.__setattr__(self, "l0", 1.0 / (96.0 * k))

    @property
    def residual_threshold(self) -> float:
        """R0 in response units: r0 sigma, or r0 itself for noiseless labels"""
        return self.r0 * self.sigma if self.sigma > 0 else self.r0

    @property
    def points(self) -> List[Tuple[int, float]]:
        return list(product(self.n_grid, self.kappas))

    def issp_config(self) -> IsspConfig:
        override = self.noise_scale_override
        if self.target_variance is not None:
            log_c2 = derived_constants(self.epsilon, self.delta, self.l0, self.residual_threshold).log_c2
            override = math.exp(math.log(self.target_variance) - log_c2)
        return IsspConfig(self.epsilon, self.delta, self.l0, self.residual_threshold, noise_scale_override=override)

    def model(self, point: int, seed) -> ModelSpec:
        n, kappa = self.points[point]
        covariance = np.eye(self.d)
        covariance[0, 0] = kappa
        return ModelSpec(n=n, d=self.d, sigma=self.sigma, covariance=covariance, family=self.family, seed=seed)


def run_accuracy_point(task) -> List[Dict]:
    """All trials of one (n, kappa) point; task = (config, point index)"""
    cfg, point = task
    n, kappa = cfg.points[point]
    estimator = IsspEstimator(cfg.issp_config())
    design = SyntheticGenerator(cfg.model(point, stream_for(cfg.seed, DESIGN_BRANCH, point).seed_sequence)).generate()

    rows = []
    for trial in range(cfg.trials):
        rng = stream_for(cfg.seed, TRIAL_BRANCH, point, trial)
        spec = cfg.model(point, rng.spawn(0).seed_sequence)
        if cfg.fixed_design:
            data = redraw_labels(design, spec, rng.spawn(0).seed_sequence)
        else:
            data = SyntheticGenerator(spec).generate()
        rows.append(_trial_row(cfg, estimator, spec, data, rng.spawn(1), trial, point, n, kappa))
    return rows


def _trial_row(cfg, estimator, spec, data, release_rng, trial, point, n, kappa) -> Dict:
    row = {"trial": trial, "point": point, "n": n, "d": cfg.d, "kappa": kappa, "sigma": cfg.sigma,
           "epsilon": cfg.epsilon, "delta": cfg.delta, "l0": cfg.l0, "r0": cfg.residual_threshold,
           "k": estimator.constants.k, "log_c2": estimator.constants.log_c2,
           "noise_variance": estimator.noise_variance}
    try:
        ols = weighted_ols(data)
        output = estimator.fit(data, release_rng)
    except DpOlsError as exc:
        row.update(outcome="ERROR", error=str(exc))
        return row

    gram = ols.covariance()
    row["predicted_excess_mse"] = estimator.noise_variance * cfg.d / n
    row["predicted_noise_error_sq"] = estimator.noise_variance * float(np.trace(spec.covariance @ ols.s_inv))
    row["outcome"] = output.outcome.value
    row["error"] = ""
    if output.diagnostics is not None:
        row["score_leverage"] = output.diagnostics.score_leverage
        row["score_residual"] = output.diagnostics.score_residual
    if output.failed:
        return row

    beta_tilde = output.beta_tilde
    gap = beta_tilde - spec.beta_star
    error = math.sqrt(float(gap @ spec.covariance @ gap))
    row["error_sigma"] = error / cfg.sigma if cfg.sigma > 0 else error
    shift = beta_tilde - ols.beta
    row["mse_ols"] = float(np.mean(ols.residuals ** 2))
    row["excess_mse"] = float(shift @ gram @ shift) / n
    row["mse_private"] = row["mse_ols"] + row["excess_mse"]
    return row


def summarize(table: ResultTable) -> ResultTable:
    """Per-point mean and standard error, plus a one-way ANOVA across kappa at each n"""
    frame = table.frame
    records = []
    for point, group in frame.groupby("point", sort=True):
        released = group[group["outcome"] == "ESTIMATE"]
        record = {
            "point": int(point),
            "n": int(group["n"].iloc[0]),
            "kappa": float(group["kappa"].iloc[0]),
            "trials": len(group),
            "fail_rate": float((group["outcome"] != "ESTIMATE").mean()),
            "predicted_excess_mse": float(group["predicted_excess_mse"].mean()),
            "predicted_noise_error_sq": float(group["predicted_noise_error_sq"].mean()),
        }
        for column in ("error_sigma", "excess_mse"):
            values = released[column].to_numpy(dtype=float) if column in released else np.array([])
            record[f"mean_{column}"] = float(values.mean()) if values.size else math.nan
            record[f"stderr_{column}"] = float(values.std(ddof=1) / math.sqrt(values.size)) if values.size > 1 else math.nan
        records.append(record)

    summary = ResultTable.from_records("accuracy-summary", records)
    summary.frame["anova_p"] = math.nan
    if "error_sigma" in frame:
        for n, group in frame[frame["outcome"] == "ESTIMATE"].groupby("n"):
            samples = [g["error_sigma"].to_numpy(dtype=float) for _, g in group.groupby("kappa")]
            if len(samples) >= 2 and all(s.size >= 2 for s in samples):
                p_value = float(stats.f_oneway(*samples).pvalue)
                summary.frame.loc[summary.frame["n"] == n, "anova_p"] = p_value
    return summary


def run_accuracy(cfg: AccuracyConfig, workers: int = 1,
                 progress_callback: Callable[[str], None] = None) -> Tuple[ResultTable, ResultTable]:
    if progress_callback:
        progress_callback(f"📈 Accuracy sweep: {len(cfg.points)} points x {cfg.trials} trials")
    tasks = [(cfg, point) for point in range(len(cfg.points))]
    rows = [row for point_rows in run_tasks(run_accuracy_point, tasks, workers, progress_callback)
            for row in point_rows]
    table = ResultTable.from_records("accuracy", rows)
    return table, summarize(table)


def error_series(summary: ResultTable) -> Dict[str, List[Tuple[float, float]]]:
    """Mean Sigma-norm error against n, one series per kappa"""
    series = {}
    for kappa, group in summary.frame.groupby("kappa", sort=True):
        points = [(float(n), float(e)) for n, e in zip(group["n"], group["mean_error_sigma"]) if np.isfinite(e)]
        series[f"kappa={kappa:g}"] = points
    return series
