"""Fixed-step RK4 integrator for the deterministic SIR system.

    dS/dt = -beta S I / N
    dI/dt =  beta S I / N - gamma I
    dR/dt =  gamma I

Used as a qualitative baseline next to the agent model; no mapping between
(b, infectious-period range) and (beta, gamma) is implied.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class NumericalBlowupError(ArithmeticError):
    pass


@dataclass(frozen=True)
class OdeSirParams:
    beta: float
    gamma: float
    S0: float
    I0: float
    R0: float = 0.0

    def __post_init__(self):
        for name in ("beta", "gamma", "S0", "I0", "R0"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.N <= 0:
            raise ValueError("population N = S0 + I0 + R0 must be positive")

    @property
    def N(self) -> float:
        return self.S0 + self.I0 + self.R0


def sir_rhs(y: np.ndarray, beta: float, gamma: float, n: float) -> np.ndarray:
    s, i, _ = y
    inf = beta * s * i / n
    rec = gamma * i
    return np.array([-inf, inf - rec, rec])


def integrate_sir(params: OdeSirParams, dt: float, horizon: float) -> np.ndarray:
    """Return an ``(n_steps + 1, 4)`` array of ``t, S, I, R``.

    The step count is ``round(horizon / dt)``; the last row sits at
    ``n_steps * dt``.  Compartments are clamped at zero in the output only.
    """
    if not dt > 0:
        raise ValueError("dt must be > 0")
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    n_steps = int(round(horizon / dt))
    b, g, n = params.beta, params.gamma, params.N
    y = np.array([params.S0, params.I0, params.R0], dtype=float)
    out = np.empty((n_steps + 1, 4))
    out[0] = (0.0, *y)
    for k in range(1, n_steps + 1):
        k1 = sir_rhs(y, b, g, n)
        k2 = sir_rhs(y + 0.5 * dt * k1, b, g, n)
        k3 = sir_rhs(y + 0.5 * dt * k2, b, g, n)
        k4 = sir_rhs(y + dt * k3, b, g, n)
        y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(y)):
            raise NumericalBlowupError(f"non-finite state at t={k * dt}")
        out[k] = (k * dt, *y)
    out[:, 1:] = np.maximum(out[:, 1:], 0.0)
    return out


def decay_solution(i0: float, gamma: float, t) -> np.ndarray:
    """Closed form of I(t) when beta = 0."""
    return i0 * np.exp(-gamma * np.asarray(t, dtype=float))


def conservation_error(traj: np.ndarray, n: float) -> float:
    """Largest |S + I + R - N| relative to N along a trajectory."""
    return float(np.max(np.abs(traj[:, 1:].sum(axis=1) - n)) / n)


def threshold_number(params: OdeSirParams) -> float:
    return math.inf if params.gamma == 0 else params.beta / params.gamma
