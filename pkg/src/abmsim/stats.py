"""Stationarity and ergodicity diagnostics for simulated aggregate series.

The runs test here is the Wald-Wolfowitz test for randomness about the
median: values equal to the median are dropped, the rest are coded
above/below, and the number of maximal same-sign runs ``R`` is compared with
its null moments

    E[R]   = 2 n1 n2 / (n1 + n2) + 1
    Var[R] = 2 n1 n2 (2 n1 n2 - n1 - n2) / ((n1 + n2)^2 (n1 + n2 - 1))

through a two-sided normal approximation.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np


class InsufficientDataError(ValueError):
    pass


class PreconditionError(ValueError):
    pass


@dataclass(frozen=True)
class RunsTestResult:
    z: float
    p_value: float
    n1: int  # above the median
    n2: int  # below the median
    runs: int
    degenerate: bool = False

    def rejects(self, alpha: float) -> bool:
        return not self.degenerate and self.p_value < alpha


def runs_test(series: Sequence[float], min_length: int = 10) -> RunsTestResult:
    """Wald-Wolfowitz runs test about the median.

    A series with every value equal is reported as ``degenerate`` (trivially
    stationary, ``p = 1``).  Fewer than ``min_length`` values after dropping
    median ties, or all of them on one side, raises InsufficientDataError.
    """
    x = np.asarray(series, dtype=float)
    if x.size == 0:
        raise InsufficientDataError("empty series")
    if np.all(x == x[0]):
        return RunsTestResult(0.0, 1.0, 0, 0, 1, degenerate=True)
    med = np.median(x)
    signs = x[x != med] > med
    n = signs.size
    if n < min_length:
        raise InsufficientDataError(f"{n} values left after dropping median ties, need {min_length}")
    n1 = int(signs.sum())
    n2 = n - n1
    if n1 == 0 or n2 == 0:
        raise InsufficientDataError("all non-tied values lie on one side of the median")
    runs = 1 + int(np.count_nonzero(signs[1:] != signs[:-1]))
    mean = 2.0 * n1 * n2 / n + 1.0
    var = 2.0 * n1 * n2 * (2.0 * n1 * n2 - n1 - n2) / (n * n * (n - 1.0))
    z = (runs - mean) / math.sqrt(var)
    p = math.erfc(abs(z) / math.sqrt(2.0))
    return RunsTestResult(z, p, n1, n2, runs)


def _stationary(x, alpha) -> Optional[RunsTestResult]:
    """Runs-test result if the window passes, else None."""
    try:
        res = runs_test(x)
    except InsufficientDataError:
        return None
    return None if res.rejects(alpha) else res


@dataclass(frozen=True)
class EquilibriumReport:
    classification: str  # "none" | "transient" | "absorbing"
    window: Optional[tuple]  # (start, end), end exclusive
    mean: Optional[float]
    z: Optional[float]
    p_value: Optional[float]
    window_length: int
    alpha: float

    def to_dict(self) -> dict:
        d = asdict(self)
        d["window"] = list(self.window) if self.window is not None else None
        return d


def _window_starts(n: int, w: int, stride: int) -> list[int]:
    starts = list(range(0, n - w + 1, stride))
    if starts[-1] != n - w:
        starts.append(n - w)
    return starts


def classify_equilibrium(series: Sequence[float], w: int, alpha: float = 0.05, stride: int = None) -> EquilibriumReport:
    """Locate a statistical equilibrium by scanning windows of length ``w``.

    Windows start every ``stride`` (default ``w // 2``) points.  A window is
    stationary when the runs test does not reject at ``alpha`` (a constant
    window always is).  The series is absorbing from the earliest start
    after which every window, and every growing extension of that window to
    the end of the series, is stationary.  Failing that, the earliest
    stationary window is reported as transient.
    """
    x = np.asarray(series, dtype=float)
    n = x.size
    if not 1 <= w <= n:
        raise ValueError(f"window length {w} must lie in 1..{n}")
    stride = stride or max(1, w // 2)
    starts = _window_starts(n, w, stride)
    ok = [_stationary(x[s : s + w], alpha) for s in starts]

    # suffix_ok[i]: every window from i onward passes
    suffix_ok = [False] * len(starts)
    run = True
    for i in range(len(starts) - 1, -1, -1):
        run = run and ok[i] is not None
        suffix_ok[i] = run

    for i, s in enumerate(starts):
        if not suffix_ok[i]:
            continue
        # the last extension ends at n because starts always include n - w
        ext = [_stationary(x[s : t + w], alpha) for t in starts[i:]]
        if all(r is not None for r in ext):
            last = ext[-1]
            return EquilibriumReport("absorbing", (s, n), float(x[s:].mean()), last.z, last.p_value, w, alpha)

    for s, res in zip(starts, ok):
        if res is not None:
            return EquilibriumReport("transient", (s, s + w), float(x[s : s + w].mean()), res.z, res.p_value, w, alpha)
    return EquilibriumReport("none", None, None, None, None, w, alpha)


def autocov(series: Sequence[float], lag: int) -> float:
    """Biased sample autocovariance (normalised by the series length)."""
    x = np.asarray(series, dtype=float)
    n = x.size
    if not 0 <= lag < n:
        raise ValueError(f"lag {lag} must lie in 0..{n - 1}")
    d = x - x.mean()
    return float(np.dot(d[lag:], d[: n - lag]) / n)


def ergodicity_decay(series: Sequence[float], max_lag: int) -> float:
    """Average of the autocovariances at lags 1..max_lag."""
    if max_lag < 1:
        raise ValueError("max_lag must be >= 1")
    return sum(autocov(series, k) for k in range(1, max_lag + 1)) / max_lag


def decay_null_band(length: int, max_lag: int, variance: float = 1.0, n_sim: int = 2000, seed: int = 0) -> tuple[float, float]:
    """Mean and standard deviation of ``ergodicity_decay`` for i.i.d. Gaussian noise.

    Simulated with numpy's generator; a reference band for judging a decay
    value, not part of any model's random stream.
    """
    rng = np.random.default_rng(seed)
    vals = [ergodicity_decay(rng.normal(0.0, math.sqrt(variance), length), max_lag) for _ in range(n_sim)]
    return float(np.mean(vals)), float(np.std(vals, ddof=1))


@dataclass(frozen=True)
class MomentTestResult:
    passed: bool
    p_value: float
    z: float
    runs: int
    moments_a: tuple
    moments_b: tuple
    degenerate: bool = False


def series_moment(series: Sequence[float], q: int, w: int, alpha: float = 0.05) -> float:
    """q-th raw moment of a series over its equilibrium window."""
    rep = classify_equilibrium(series, w, alpha)
    if rep.classification == "none":
        raise PreconditionError("series has no stationary window; check it with classify_equilibrium first")
    s, e = rep.window
    return float(np.mean(np.asarray(series, dtype=float)[s:e] ** q))


def ergodicity_moment_test(
    ensemble_a: Sequence[Sequence[float]],
    ensemble_b: Sequence[Sequence[float]],
    q: int = 1,
    w: int = 20,
    alpha: float = 0.05,
) -> MomentTestResult:
    """Are the q-th moments invariant across two seed ensembles of the same process?

    Moments are computed per series over its equilibrium window, concatenated
    (ensemble A then B, each in seed order) and runs-tested about the pooled
    median.  A shift between ensembles clusters the signs and is rejected.
    If the pooled moments cannot be dichotomised (all tied, or every untied
    value on one side) the test cannot reject and reports a degenerate pass.
    """
    if len(ensemble_a) < 10 or len(ensemble_b) < 10:
        raise ValueError("each ensemble needs at least 10 series")
    ma = tuple(series_moment(s, q, w, alpha) for s in ensemble_a)
    mb = tuple(series_moment(s, q, w, alpha) for s in ensemble_b)
    try:
        res = runs_test(ma + mb)
    except InsufficientDataError:
        return MomentTestResult(True, 1.0, 0.0, 0, ma, mb, degenerate=True)
    return MomentTestResult(not res.rejects(alpha), res.p_value, res.z, res.runs, ma, mb, res.degenerate)
