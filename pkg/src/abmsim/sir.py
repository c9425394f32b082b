"""SIR reference model: 400 fixed agents on a 20x20 lattice.

Agent state vector: ``(health, recovery_time, infector, infection_time)``
with health coded SUS=0, INF=1, REC=2 and -1 marking unset fields.

One PDA cycle of agent ``a`` at clock ``t``:

* SUS: draw ``n ~ U{contacts_min..contacts_max}``; draw ``n`` contacts with
  replacement (``global``: uniform over all other agents, self-draws
  redrawn; ``neighborhood``: uniform over the Moore-8 lattice neighbors);
  count infectious contacts ``k``.  If ``k > 0``, one uniform ``u`` decides
  infection with probability ``1 - (1 - b)**k``.  On infection draw the
  infectious period ``p ~ U{period_min..period_max}``, set
  ``recovery_time = t + p`` and attribute the infection to one of the ``k``
  infectious contact draws chosen uniformly (one more draw when ``k > 1``).
* INF: become REC once ``t >= recovery_time`` (``t > recovery_time`` with
  ``strict_recovery``).
* REC: absorbing.

The index case is infected at clock 0; its period is the first draw of the
run's stream.  Two execution paths exist: the generic engine driven by
:func:`sir_contract`, and the compiled kernel behind :func:`run_epidemic`.
Both consume the stream identically and produce identical trajectories.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import NamedTuple, Optional

import numba
import numpy as np

from .core import AgentState, GlobalState, ModelContract, StateVariable
from .environment import LatticeEnv
from .rng import RngStream, SeedSpec, new_state, permutation_jit, uniform01_jit, uniform_int_jit
from .scheduler import OrderPolicy, run_discrete_time

SUS, INF, REC = 0, 1, 2
UNSET = -1
SCHEMES = ("global", "neighborhood")
_POLICY_CODE = {OrderPolicy.FIXED: 0, OrderPolicy.SHUFFLED: 1, OrderPolicy.SYNCHRONOUS: 2}


class InsufficientHorizonError(ValueError):
    pass


@dataclass(frozen=True)
class SirParams:
    b: float = 0.047
    period_min: int = 3
    period_max: int = 6
    contacts_min: int = 1
    contacts_max: int = 8
    contact_scheme: str = "global"
    width: int = 20
    height: int = 20
    initial_infected: Optional[int] = None  # None: the cell at (width // 2, height // 2)
    strict_recovery: bool = False  # recover once t > recovery_time instead of t >= recovery_time

    def __post_init__(self):
        if not 0.0 <= self.b <= 1.0:
            raise ValueError(f"b must lie in [0, 1], got {self.b}")
        if not 1 <= self.period_min <= self.period_max:
            raise ValueError(f"need 1 <= period_min <= period_max, got [{self.period_min}, {self.period_max}]")
        if not 1 <= self.contacts_min <= self.contacts_max:
            raise ValueError(f"need 1 <= contacts_min <= contacts_max, got [{self.contacts_min}, {self.contacts_max}]")
        if self.contact_scheme not in SCHEMES:
            raise ValueError(f"contact_scheme must be one of {SCHEMES}, got {self.contact_scheme!r}")
        if self.width < 1 or self.height < 1 or self.width * self.height < 2:
            raise ValueError("lattice needs at least two cells")
        if self.initial_infected is not None and not 0 <= self.initial_infected < self.width * self.height:
            raise ValueError(f"initial_infected {self.initial_infected} outside the lattice")

    @property
    def n_agents(self) -> int:
        return self.width * self.height

    @property
    def index_case(self) -> int:
        if self.initial_infected is not None:
            return self.initial_infected
        return (self.height // 2) * self.width + self.width // 2

    @property
    def lattice(self) -> LatticeEnv:
        return LatticeEnv(self.width, self.height, "moore8", "clamp")

    def replace(self, **kw) -> "SirParams":
        d = asdict(self)
        d.update(kw)
        return SirParams(**d)


def infection_probability(k: int, b: float) -> float:
    """Chance that a susceptible with ``k`` infectious contacts is infected this step."""
    if not 0.0 <= b <= 1.0:
        raise ValueError(f"transmission probability must lie in [0, 1], got {b}")
    if k < 0:
        raise ValueError(f"contact count must be >= 0, got {k}")
    if k == 0:
        return 0.0
    return 1.0 - (1.0 - b) ** k


# --- generic-engine model ----------------------------------------------


class SirPercept(NamedTuple):
    agent: int
    health: int
    recovery_time: int
    clock: int
    population: tuple  # immutable view of all AgentStates
    candidates: Optional[tuple]  # neighbor ids, or None for global mixing


def _perception(params: SirParams, neighbors):
    def perceive(state: GlobalState, i: int) -> SirPercept:
        own = state.agents[i]
        cand = neighbors[i] if neighbors is not None else None
        return SirPercept(i, own[0], own[1], int(state.clock), state.agents, cand)

    return perceive


def _decision(percept: SirPercept, params: SirParams, rng: RngStream):
    if percept.health == SUS:
        n = rng.uniform_int(params.contacts_min, params.contacts_max)
        m = len(percept.population)
        infectious = []
        for _ in range(n):
            if percept.candidates is None:
                j = rng.uniform_int(0, m - 1)
                while j == percept.agent:
                    j = rng.uniform_int(0, m - 1)
            else:
                j = percept.candidates[rng.uniform_int(0, len(percept.candidates) - 1)]
            if percept.population[j][0] == INF:
                infectious.append(j)
        k = len(infectious)
        if k == 0:
            return ("stay",)
        if rng.uniform01() < infection_probability(k, params.b):
            period = rng.uniform_int(params.period_min, params.period_max)
            src = infectious[rng.uniform_int(0, k - 1)] if k > 1 else infectious[0]
            return ("infect", percept.clock + period, src, percept.clock)
        return ("stay",)
    if percept.health == INF and _recovers(percept.clock, percept.recovery_time, params.strict_recovery):
        return ("recover",)
    return ("stay",)


def _recovers(t, recovery_time, strict):
    return t > recovery_time if strict else t >= recovery_time


def _action(decision, state: GlobalState, i: int) -> AgentState:
    own = state.agents[i]
    if decision[0] == "infect":
        _, rec, src, t = decision
        return AgentState((INF, rec, src, t))
    if decision[0] == "recover":
        return AgentState((REC, own[1], own[2], own[3]))
    return own


def sir_counts(state: GlobalState) -> tuple[int, int, int]:
    c = [0, 0, 0]
    for a in state.agents:
        c[a[0]] += 1
    return tuple(c)


def sir_contract(params: SirParams) -> ModelContract:
    neighbors = None
    if params.contact_scheme == "neighborhood":
        lat = params.lattice
        neighbors = tuple(lat.neighbors(c) for c in range(lat.n_cells))
    return ModelContract(
        n_agents=params.n_agents,
        variables=(
            StateVariable("health", frozenset((SUS, INF, REC))),
            StateVariable("recovery_time"),
            StateVariable("infector"),
            StateVariable("infection_time"),
        ),
        perception=_perception(params, neighbors),
        decision=_decision,
        action=_action,
        params=params,
        statistic=sir_counts,
        statistic_names=("S", "I", "R"),
        name="sir",
    )


def susceptible_population(params: SirParams) -> GlobalState:
    a = AgentState((SUS, UNSET, UNSET, UNSET))
    return GlobalState(tuple(a for _ in range(params.n_agents)), None, 0)


def seed_index_case(params: SirParams, state: GlobalState, rng: RngStream) -> GlobalState:
    """Infect the index case at the current clock; consumes one period draw."""
    t = int(state.clock)
    period = rng.uniform_int(params.period_min, params.period_max)
    return state.replace_agent(params.index_case, AgentState((INF, t + period, UNSET, t)))


def initial_state(params: SirParams, rng: RngStream) -> GlobalState:
    return seed_index_case(params, susceptible_population(params), rng)


# --- compiled kernel ----------------------------------------------------


@numba.njit(cache=True)
def _sir_kernel(st, steps, b, pmin, pmax, cmin, cmax, use_nbrs, nbr_table, nbr_count, policy, strict,
                health, rec, infector, inf_time, counts, stop_when_absorbed):
    n = health.shape[0]
    s = 0
    i_ = 0
    r = 0
    for a in range(n):
        if health[a] == 0:
            s += 1
        elif health[a] == 1:
            i_ += 1
        else:
            r += 1
    counts[0, 0] = s
    counts[0, 1] = i_
    counts[0, 2] = r
    order = np.arange(n)
    view = health
    frozen = np.empty(n, np.int64)
    contacts = np.empty(cmax, np.int64)
    done = 0
    for step in range(steps):
        if stop_when_absorbed and i_ == 0:
            break
        t = step
        if policy == 1:
            permutation_jit(st, n, order)
        if policy == 2:
            frozen[:] = health
            view = frozen
        for idx in range(n):
            a = order[idx]
            h = health[a]
            if h == 0:
                m = uniform_int_jit(st, cmin, cmax)
                k = 0
                for c in range(m):
                    if use_nbrs:
                        j = nbr_table[a, uniform_int_jit(st, 0, nbr_count[a] - 1)]
                    else:
                        j = uniform_int_jit(st, 0, n - 1)
                        while j == a:
                            j = uniform_int_jit(st, 0, n - 1)
                    if view[j] == 1:
                        contacts[k] = j
                        k += 1
                if k > 0:
                    p = 1.0 - (1.0 - b) ** k
                    if uniform01_jit(st) < p:
                        period = uniform_int_jit(st, pmin, pmax)
                        if k > 1:
                            src = contacts[uniform_int_jit(st, 0, k - 1)]
                        else:
                            src = contacts[0]
                        health[a] = 1
                        rec[a] = t + period
                        infector[a] = src
                        inf_time[a] = t
                        s -= 1
                        i_ += 1
            elif h == 1:
                if t > rec[a] or (not strict and t == rec[a]):
                    health[a] = 2
                    i_ -= 1
                    r += 1
        counts[step + 1, 0] = s
        counts[step + 1, 1] = i_
        counts[step + 1, 2] = r
        done = step + 1
    # absorbed: the state is frozen for every remaining step
    for step in range(done, steps):
        counts[step + 1, 0] = s
        counts[step + 1, 1] = i_
        counts[step + 1, 2] = r
    return done


@dataclass
class EpidemicRun:
    """Outcome of one realisation."""

    params: SirParams
    seed: SeedSpec
    steps: int
    counts: np.ndarray  # (steps + 1, 3) int64: S, I, R per snapshot
    health: np.ndarray
    recovery_time: np.ndarray
    infector: np.ndarray
    infection_time: np.ndarray
    simulated_steps: int

    @property
    def index_case(self) -> int:
        return self.params.index_case

    def records(self) -> list[tuple[int, int, int]]:
        """``(infectee, infector, time)`` for every non-index infection, by time then id."""
        ids = np.flatnonzero(self.infector >= 0)
        out = [(int(a), int(self.infector[a]), int(self.infection_time[a])) for a in ids]
        out.sort(key=lambda r: (r[2], r[0]))
        return out

    @property
    def total_infected(self) -> int:
        return int(self.counts[-1, 1] + self.counts[-1, 2])

    @property
    def peak_infected(self) -> int:
        return int(self.counts[:, 1].max())

    def final_state(self) -> GlobalState:
        agents = tuple(
            AgentState((int(h), int(rt), int(src), int(ti)))
            for h, rt, src, ti in zip(self.health, self.recovery_time, self.infector, self.infection_time)
        )
        return GlobalState(agents, None, self.steps)


def run_epidemic(params: SirParams, steps: int, seed: SeedSpec, policy="fixed", stop_when_absorbed: bool = True) -> EpidemicRun:
    """Simulate one realisation from a fully susceptible population plus the index case.

    Once no agent is infectious the state can never change again, so by
    default the kernel stops there and repeats the absorbing counts; the
    recorded trajectory is identical to stepping through.
    """
    if steps < 0:
        raise ValueError("steps must be >= 0")
    policy = OrderPolicy(policy)
    n = params.n_agents
    health = np.zeros(n, np.int64)
    rec = np.full(n, UNSET, np.int64)
    infector = np.full(n, UNSET, np.int64)
    inf_time = np.full(n, UNSET, np.int64)
    st = new_state(seed)
    idx = params.index_case
    health[idx] = INF
    rec[idx] = uniform_int_jit(st, params.period_min, params.period_max)
    inf_time[idx] = 0
    if params.contact_scheme == "neighborhood":
        table, cnt = params.lattice.neighbor_arrays()
        use_nbrs = True
    else:
        table, cnt = np.zeros((1, 1), np.int64), np.zeros(1, np.int64)
        use_nbrs = False
    counts = np.zeros((steps + 1, 3), np.int64)
    done = _sir_kernel(
        st, steps, float(params.b), params.period_min, params.period_max, params.contacts_min,
        params.contacts_max, use_nbrs, table, cnt, _POLICY_CODE[policy], params.strict_recovery,
        health, rec, infector, inf_time, counts, stop_when_absorbed,
    )
    return EpidemicRun(params, seed, steps, counts, health, rec, infector, inf_time, int(done))


def run_epidemic_generic(params: SirParams, steps: int, seed: SeedSpec, policy="fixed") -> list[GlobalState]:
    """Same realisation through the generic PDA engine; returns full snapshots."""
    rng = RngStream(seed)
    init = initial_state(params, rng)
    return run_discrete_time(sir_contract(params), init, steps, policy, rng=rng, check_locality=False)


def count_secondary_cases(run: EpidemicRun) -> int:
    """Infections attributed to the index case; requires the index to have recovered."""
    idx = run.index_case
    if run.health[idx] != REC:
        raise InsufficientHorizonError(
            f"index case still infectious at t={run.steps} (recovers at t={int(run.recovery_time[idx])}); "
            "extend the horizon"
        )
    return int(np.count_nonzero(run.infector == idx))


def min_horizon(params: SirParams) -> int:
    """Fewest steps after which the index case has always recovered."""
    return params.period_max + (2 if params.strict_recovery else 1)
