"""One-parameter calibration of the transmission probability against a target R0.

Distance between simulated and target output is the squared difference.
Search: an 11-point grid over ``[b_min, b_max]`` followed by bisection on the
first grid interval whose estimates bracket the target.  Every evaluation
reuses streams ``0 .. n_runs - 1`` of the same master seed (common random
numbers), so differences between evaluations come from ``b`` alone.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

from .montecarlo import estimate_r0
from .sir import SirParams

GRID_POINTS = 11


class BracketError(RuntimeError):
    def __init__(self, message, log):
        super().__init__(message)
        self.log = log


@dataclass(frozen=True)
class CalibrationSpec:
    target: float = 1.6
    b_min: float = 0.0
    b_max: float = 0.2
    n_runs: int = 500
    tol: float = 0.05
    max_evals: int = 30
    master_seed: int = 7

    def __post_init__(self):
        if not 0.0 <= self.b_min < self.b_max <= 1.0:
            raise ValueError(f"search interval [{self.b_min}, {self.b_max}] must lie in [0, 1] with b_min < b_max")
        if self.tol <= 0:
            raise ValueError("tol must be > 0")
        if self.n_runs < 1:
            raise ValueError("n_runs must be >= 1")
        if self.max_evals < GRID_POINTS:
            raise ValueError(f"max_evals must allow the {GRID_POINTS}-point grid")


@dataclass(frozen=True)
class Evaluation:
    b: float
    estimate: float
    standard_error: float
    distance: float  # (estimate - target) ** 2
    phase: str  # "grid" | "bisect"


@dataclass
class CalibrationResult:
    b: float
    estimate: float
    distance: float
    success: bool
    evaluations: list = field(default_factory=list)
    bracket: Optional[tuple] = None

    def to_dict(self) -> dict:
        return {
            "b_star": self.b,
            "estimate": self.estimate,
            "squared_distance": self.distance,
            "success": self.success,
            "bracket": list(self.bracket) if self.bracket else None,
            "evaluations": [asdict(e) for e in self.evaluations],
        }


def calibrate_b(
    spec: CalibrationSpec,
    template: SirParams = None,
    *,
    workers: int = 1,
    evaluate: Callable[[float], tuple[float, float]] = None,
) -> CalibrationResult:
    """Find ``b`` whose Monte Carlo R0 estimate is closest to ``spec.target``.

    ``evaluate`` overrides the estimator (``b -> (estimate, se)``); by default
    it is :func:`estimate_r0` on ``template`` with ``b`` replaced.
    """
    template = template or SirParams()
    if evaluate is None:
        def evaluate(b):
            return estimate_r0(template.replace(b=b), spec.n_runs, spec.master_seed, workers=workers)

    log: list[Evaluation] = []

    def run(b, phase):
        est, se = evaluate(b)
        e = Evaluation(b, est, se, (est - spec.target) ** 2, phase)
        log.append(e)
        return e

    step = (spec.b_max - spec.b_min) / (GRID_POINTS - 1)
    grid = [run(spec.b_min + i * step if i < GRID_POINTS - 1 else spec.b_max, "grid") for i in range(GRID_POINTS)]

    bracket = None
    for lo, hi in zip(grid, grid[1:]):
        if lo.estimate <= spec.target <= hi.estimate:
            bracket = (lo, hi)
            break
    if bracket is None:
        if not any(e.distance <= spec.tol ** 2 for e in grid):
            raise BracketError(
                f"target {spec.target} not bracketed on [{spec.b_min}, {spec.b_max}] "
                f"(grid estimates {min(e.estimate for e in grid):.4g}..{max(e.estimate for e in grid):.4g})",
                [asdict(e) for e in grid],
            )
    else:
        lo, hi = bracket
        while len(log) < spec.max_evals and not _converged(log, spec.tol):
            mid = run(0.5 * (lo.b + hi.b), "bisect")
            if mid.estimate < spec.target:
                lo = mid
            else:
                hi = mid
        bracket = (lo.b, hi.b)

    best = min(log, key=lambda e: (e.distance, e.b))
    return CalibrationResult(best.b, best.estimate, best.distance, best.distance <= spec.tol ** 2, log, bracket)


def _converged(log, tol) -> bool:
    return any(e.distance <= tol ** 2 for e in log)
