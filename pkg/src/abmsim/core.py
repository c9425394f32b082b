"""Agent and global state, and the perception/decision/action contract.

A model supplies three functions per agent step:

    perception(state, i)            -> percept
    decision(percept, params, rng)  -> decision
    action(decision, state, i)      -> AgentState | (AgentState, messages)

The engine owns the write: the returned ``AgentState`` replaces agent ``i``
and nothing else.  Environment messages are folded into ``env_state`` through
``model.apply_message`` in emission order, after the agent's own replacement.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from typing import Any, Callable, Optional, Sequence

import numpy as np


class DomainError(Exception):
    """Raised by model functions to signal an invalid model state."""


class ModelRunError(RuntimeError):
    def __init__(self, message: str, agent: Optional[int] = None, clock=None, step: Optional[int] = None):
        self.base = message
        self.agent = agent
        self.clock = clock
        self.step = step
        where = []
        if step is not None:
            where.append(f"step={step}")
        if agent is not None:
            where.append(f"agent={agent}")
        if clock is not None:
            where.append(f"clock={clock}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)


class LocalityError(ModelRunError):
    """An action touched state belonging to another agent."""


@dataclass(frozen=True)
class StateVariable:
    name: str
    codes: Optional[frozenset] = None  # None means real-valued / unconstrained

    def check(self, value) -> bool:
        return self.codes is None or value in self.codes


@dataclass(frozen=True)
class AgentState:
    values: tuple

    def __getitem__(self, i):
        return self.values[i]

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class GlobalState:
    agents: tuple
    env_state: Any = None
    clock: float = 0

    @property
    def n_agents(self) -> int:
        return len(self.agents)

    def replace_agent(self, i: int, new: AgentState) -> "GlobalState":
        agents = list(self.agents)
        agents[i] = new
        return GlobalState(tuple(agents), self.env_state, self.clock)

    def with_env(self, env_state) -> "GlobalState":
        return GlobalState(self.agents, env_state, self.clock)

    def with_clock(self, clock) -> "GlobalState":
        if clock < self.clock:
            raise ValueError(f"clock cannot move backwards ({self.clock} -> {clock})")
        return GlobalState(self.agents, self.env_state, clock)

    def to_json(self) -> str:
        return json.dumps(
            {
                "clock": _plain(self.clock),
                "env_state": _plain(self.env_state),
                "agents": [[_plain(v) for v in a.values] for a in self.agents],
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "GlobalState":
        d = json.loads(text)
        agents = tuple(AgentState(tuple(a)) for a in d["agents"])
        return cls(agents, d.get("env_state"), d["clock"])


def _plain(v):
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (tuple, list)):
        return [_plain(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    return v


@dataclass
class ModelContract:
    """Pluggable model: PDA functions, parameters and the aggregate projection.

    ``statistic`` maps a ``GlobalState`` to a tuple of aggregates whose names
    are given by ``statistic_names``.
    """

    n_agents: int
    variables: Sequence[StateVariable]
    perception: Callable
    decision: Callable
    action: Callable
    params: Any
    statistic: Callable
    statistic_names: Sequence[str] = ()
    apply_message: Optional[Callable] = None
    on_event: Optional[Callable] = None
    between_steps: Optional[Callable] = None
    name: str = "model"
    allow_resize: bool = False

    def validate_agent(self, agent: AgentState, index: int = None, clock=None) -> None:
        if not isinstance(agent, AgentState):
            raise LocalityError(f"action must return an AgentState, got {type(agent).__name__}", index, clock)
        if len(agent.values) != len(self.variables):
            raise ModelRunError(
                f"agent state has {len(agent.values)} entries, model declares {len(self.variables)}", index, clock
            )
        for var, v in zip(self.variables, agent.values):
            if not var.check(v):
                raise ModelRunError(f"value {v!r} outside code set of {var.name!r}", index, clock)


def perceive_and_decide(model: ModelContract, view: GlobalState, agent: int, rng):
    """Run perception on ``view`` and the decision on the resulting percept."""
    try:
        percept = model.perception(view, agent)
        return model.decision(percept, model.params, rng)
    except DomainError as exc:
        raise ModelRunError(f"domain error: {exc}", agent, view.clock) from exc


def apply_action(model: ModelContract, decision, state: GlobalState, agent: int, check_locality: bool = True):
    """Apply one agent's action to ``state`` and return the new state."""
    # frozen agents with hashable values cannot be mutated in place; only
    # mutable payloads need a deep snapshot
    before = {}
    if check_locality:
        for j, a in enumerate(state.agents):
            if j != agent and not _hashable(a.values):
                before[j] = copy.deepcopy(a.values)
    try:
        out = model.action(decision, state, agent)
    except DomainError as exc:
        raise ModelRunError(f"domain error: {exc}", agent, state.clock) from exc
    messages = ()
    if isinstance(out, tuple) and not isinstance(out, AgentState):
        out, messages = out
    model.validate_agent(out, agent, state.clock)
    if check_locality:
        for j, old in before.items():
            if old != state.agents[j].values:
                raise LocalityError(f"action of agent {agent} modified agent {j}", agent, state.clock)
    new = state.replace_agent(agent, out)
    if messages:
        if model.apply_message is None:
            raise ModelRunError("action emitted environment messages but model has no apply_message", agent, state.clock)
        env = new.env_state
        for msg in messages:
            env = model.apply_message(env, msg)
        new = new.with_env(env)
    return new


def _hashable(v) -> bool:
    try:
        hash(v)
    except TypeError:
        return False
    return True


def pda_step(model: ModelContract, state: GlobalState, agent: int, rng, check_locality: bool = True) -> GlobalState:
    """One perception-decision-action cycle for ``agent``."""
    if not 0 <= agent < state.n_agents:
        raise IndexError(f"agent index {agent} out of range for {state.n_agents} agents")
    decision = perceive_and_decide(model, state, agent, rng)
    return apply_action(model, decision, state, agent, check_locality)


def project(model: ModelContract, state: GlobalState) -> tuple:
    return tuple(model.statistic(state))


def uniform_state(n_agents: int, values: Sequence, env_state=None, clock=0) -> GlobalState:
    """All agents start with the same state vector."""
    a = AgentState(tuple(values))
    return GlobalState(tuple(a for _ in range(n_agents)), env_state, clock)
