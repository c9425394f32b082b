"""Monte Carlo ensembles over seeds.

Replicate ``i`` always runs on stream ``(master_seed, i)``, so any single run
can be regenerated without the others.  Ensemble moments are accumulated in
stream order with ``math.fsum`` (correctly rounded), which makes them
independent of how the replicates were scheduled across workers.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .rng import SeedSpec
from .sir import (
    EpidemicRun,
    InsufficientHorizonError,
    SirParams,
    count_secondary_cases,
    min_horizon,
    run_epidemic,
)


@dataclass
class Replicate:
    seed: SeedSpec
    trajectory: np.ndarray  # (steps + 1, n_aggregates)
    meta: dict = field(default_factory=dict)
    records: Optional[list] = None


@dataclass
class EnsembleResult:
    names: tuple
    runs: list
    mean_trajectory: np.ndarray
    variance_trajectory: np.ndarray
    params: object = None
    steps: int = 0
    master_seed: int = 0

    @property
    def n_runs(self) -> int:
        return len(self.runs)

    def column(self, name: str) -> np.ndarray:
        """``(n_runs, steps + 1)`` array of one aggregate across replicates."""
        j = self.names.index(name)
        return np.stack([r.trajectory[:, j] for r in self.runs])

    def meta_values(self, key: str) -> list:
        return [r.meta.get(key) for r in self.runs]


def ensemble_moments(trajectories: Sequence[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    """Per-cell mean and sample variance (ddof=1; 0 for a single run), summed exactly."""
    stack = np.stack([np.asarray(t, dtype=float) for t in trajectories])
    n = stack.shape[0]
    mean = np.empty(stack.shape[1:])
    var = np.zeros(stack.shape[1:])
    for idx in np.ndindex(*stack.shape[1:]):
        col = stack[(slice(None),) + idx]
        mu = math.fsum(col) / n
        mean[idx] = mu
        if n > 1:
            var[idx] = math.fsum((x - mu) ** 2 for x in col) / (n - 1)
    return mean, var


def sir_replicate(params: SirParams, steps: int, policy: str, keep_records: bool, seed: SeedSpec) -> Replicate:
    run = run_epidemic(params, steps, seed, policy)
    return Replicate(seed, run.counts, sir_run_meta(run), run.records() if keep_records else None)


def sir_run_meta(run: EpidemicRun) -> dict:
    try:
        secondary = count_secondary_cases(run)
    except InsufficientHorizonError:
        secondary = None
    infected = run.counts[:, 1]
    return {
        "secondary_cases": secondary,
        "total_infected": run.total_infected,
        "peak_infected": int(infected.max()),
        "peak_time": int(infected.argmax()),
        "extinct": run.total_infected == 1,
        "simulated_steps": run.simulated_steps,
    }


def _map(fn: Callable, seeds: list, workers: int) -> list:
    if workers <= 1 or len(seeds) < 2:
        return [fn(s) for s in seeds]
    chunk = max(1, len(seeds) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        out = list(pool.map(fn, seeds, chunksize=chunk))
    # pool.map preserves order; sort anyway so the merge never depends on it
    return sorted(out, key=lambda r: r.seed.stream_id)


def default_workers() -> int:
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)


def run_ensemble(
    model: Union[str, Callable],
    params,
    n_runs: int,
    steps: int,
    master_seed: int,
    *,
    policy: str = "fixed",
    workers: int = 1,
    keep_records: bool = False,
    first_stream: int = 0,
    names: Sequence[str] = None,
) -> EnsembleResult:
    """Run ``n_runs`` replicates on streams ``first_stream .. first_stream + n_runs - 1``.

    ``model`` is ``"sir"`` or a picklable callable
    ``runner(params, steps, seed) -> Replicate`` for other models.
    """
    if n_runs < 1:
        raise ValueError("n_runs must be >= 1")
    if model == "sir":
        fn = partial(sir_replicate, params, steps, policy, keep_records)
        names = ("S", "I", "R")
    else:
        fn = partial(model, params, steps)
        names = tuple(names or ())
    seeds = [SeedSpec(master_seed, first_stream + i) for i in range(n_runs)]
    runs = _map(fn, seeds, workers)
    mean, var = ensemble_moments([r.trajectory for r in runs])
    if not names:
        names = tuple(f"y{j}" for j in range(mean.shape[1]))
    return EnsembleResult(tuple(names), runs, mean, var, params, steps, master_seed)


def _secondary(params: SirParams, steps: int, policy: str, seed: SeedSpec) -> int:
    return count_secondary_cases(run_epidemic(params, steps, seed, policy))


def estimate_r0(
    params: SirParams,
    n_runs: int,
    master_seed: int,
    *,
    steps: int = None,
    policy: str = "fixed",
    first_stream: int = 0,
    workers: int = 1,
) -> tuple[float, float]:
    """Mean secondary cases of the index case over replicates, with its standard error.

    Only the index case's infectious period matters, so by default each run
    stops at the shortest horizon that guarantees its recovery.  Stream ``i``
    gives the same count whatever the horizon.
    """
    if n_runs < 1:
        raise ValueError("n_runs must be >= 1")
    need = min_horizon(params)
    if steps is None:
        steps = need
    if steps < need:
        raise InsufficientHorizonError(f"horizon {steps} shorter than the longest infectious period ({need} steps)")
    seeds = [SeedSpec(master_seed, first_stream + i) for i in range(n_runs)]
    fn = partial(_secondary, params, steps, policy)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            counts = list(pool.map(fn, seeds, chunksize=max(1, n_runs // (4 * workers))))
    else:
        counts = [fn(s) for s in seeds]
    return mean_and_se(counts)


def mean_and_se(values: Sequence[float]) -> tuple[float, float]:
    n = len(values)
    mu = math.fsum(values) / n
    if n < 2:
        return mu, 0.0
    var = math.fsum((v - mu) ** 2 for v in values) / (n - 1)
    return mu, math.sqrt(var / n)


def mc_stability(values: Sequence[float], batch: int, tol: float) -> Optional[int]:
    """Smallest run count at which the running mean has settled.

    The running mean is evaluated after every ``batch`` runs; the answer is
    the first ``n = j * batch`` for which adding the next batch moves the
    mean by less than ``tol``.  ``None`` if that never happens within the
    supplied values.
    """
    if batch < 2:
        raise ValueError("batch must be >= 2")
    if tol <= 0:
        raise ValueError("tol must be > 0")
    v = np.asarray(values, dtype=float)
    n_batches = len(v) // batch
    if n_batches < 2:
        return None
    means = [math.fsum(v[: j * batch]) / (j * batch) for j in range(1, n_batches + 1)]
    for j in range(len(means) - 1):
        if abs(means[j + 1] - means[j]) < tol:
            return (j + 1) * batch
    return None


def sir_summary(ens: EnsembleResult) -> dict:
    """R0 estimate, extinction fraction and peak statistics of a SIR ensemble."""
    secondary = ens.meta_values("secondary_cases")
    total = np.array(ens.meta_values("total_infected"))
    peaks = np.array(ens.meta_values("peak_infected"))
    j = ens.names.index("I")
    mean_I = ens.mean_trajectory[:, j]
    out = {
        "n_runs": ens.n_runs,
        "steps": ens.steps,
        "master_seed": ens.master_seed,
        "stream_ids": [ens.runs[0].seed.stream_id, ens.runs[-1].seed.stream_id],
        "extinction_fraction": float(np.mean(total == 1)),
        "final_size_mean": math.fsum(total.tolist()) / len(total),
        "mean_curve_peak_I": float(mean_I.max()),
        "mean_curve_peak_time": int(mean_I.argmax()),
        "mean_of_run_peaks_I": math.fsum(peaks.tolist()) / len(peaks),
        "median_peak_I_nonextinct": float(np.median(peaks[total > 1])) if np.any(total > 1) else None,
    }
    if all(s is not None for s in secondary):
        mu, se = mean_and_se(secondary)
        out["r0_estimate"] = mu
        out["r0_standard_error"] = se
    else:
        out["r0_estimate"] = None
        out["r0_standard_error"] = None
    return out
