"""Discrete-time and discrete-event drivers.

Discrete time: the clock advances by one model unit per step.  During the
step at clock ``t`` every agent runs one PDA cycle; the snapshot recorded
after the step carries clock ``t + 1``.  Three agent-order policies:

* ``fixed``: agents 0..m-1, each sees the updates of those before it.
* ``shuffled``: a fresh Fisher-Yates permutation per step drawn from the
  run's stream before any agent acts.
* ``synchronous``: all perceptions and decisions read the frozen
  start-of-step state; actions then commit in agent-index order.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Optional

from .core import GlobalState, ModelContract, ModelRunError, apply_action, pda_step, perceive_and_decide, project
from .rng import RngStream, SeedSpec


class OrderPolicy(str, Enum):
    FIXED = "fixed"
    SHUFFLED = "shuffled"
    SYNCHRONOUS = "synchronous"


class SchedulingError(ValueError):
    pass


def _reraise_with_step(exc: ModelRunError, step: int):
    err = type(exc)(exc.base, exc.agent, exc.clock, step)
    raise err from exc


def advance(model: ModelContract, state: GlobalState, policy: OrderPolicy, rng: RngStream, check_locality=True) -> GlobalState:
    """Run one full time step and return the state at clock + 1."""
    m = state.n_agents
    if policy is OrderPolicy.SYNCHRONOUS:
        frozen = state
        decisions = [perceive_and_decide(model, frozen, i, rng) for i in range(m)]
        for i in range(m):
            state = apply_action(model, decisions[i], state, i, check_locality)
    else:
        order = rng.permutation(m) if policy is OrderPolicy.SHUFFLED else range(m)
        for i in order:
            state = pda_step(model, state, i, rng, check_locality)
    state = state.with_clock(state.clock + 1)
    if model.between_steps is not None:
        state = model.between_steps(state, rng)
        if state.n_agents != m and not model.allow_resize:
            raise ModelRunError("agent count changed but model does not declare creation/deletion", clock=state.clock)
    return state


def run_discrete_time(
    model: ModelContract,
    initial: GlobalState,
    steps: int,
    policy="fixed",
    seed: SeedSpec = None,
    *,
    rng: RngStream = None,
    record: str = "state",
    every: int = 1,
    check_locality: bool = True,
) -> list:
    """Evolve ``initial`` for ``steps`` steps.

    Returns snapshots (``record="state"``) or projected aggregates
    (``record="aggregate"``) at step 0 and every ``every``-th step; with
    ``every=1`` the result has ``steps + 1`` entries.
    """
    if steps < 0:
        raise ValueError("steps must be >= 0")
    if every < 1:
        raise ValueError("every must be >= 1")
    policy = OrderPolicy(policy)
    if rng is None:
        if seed is None:
            raise ValueError("either seed or rng is required")
        rng = RngStream(seed)
    keep = (lambda s: s) if record == "state" else (lambda s: project(model, s))
    state = initial
    out = [keep(state)]
    for step in range(steps):
        try:
            state = advance(model, state, policy, rng, check_locality)
        except ModelRunError as exc:
            _reraise_with_step(exc, step)
        if (step + 1) % every == 0:
            out.append(keep(state))
    return out


@dataclass(order=True)
class _Entry:
    time: float
    seq: int
    payload: Any = field(compare=False)


class EventQueue:
    """Pending events ordered by (timestamp, insertion sequence)."""

    def __init__(self, clock: float = 0.0):
        self.clock = clock
        self._heap: list[_Entry] = []
        self._seq = itertools.count()

    def push(self, time: float, payload) -> None:
        if time < self.clock:
            raise SchedulingError(f"event at t={time} scheduled in the past (clock={self.clock})")
        heapq.heappush(self._heap, _Entry(time, next(self._seq), payload))

    def pop(self):
        e = heapq.heappop(self._heap)
        self.clock = e.time
        return e.time, e.payload

    def peek_time(self) -> Optional[float]:
        return self._heap[0].time if self._heap else None

    def __len__(self):
        return len(self._heap)

    def __bool__(self):
        return bool(self._heap)


def run_discrete_event(
    model: ModelContract, initial: GlobalState, queue: EventQueue, horizon: float, rng: RngStream = None
) -> list[tuple[float, GlobalState]]:
    """Execute events in queue order until the queue drains or passes ``horizon``.

    The handler is ``model.on_event(state, payload, queue, rng)`` when the
    model defines one, otherwise the payload itself is called with the same
    arguments.  Handlers return the new state and may push future events.
    """
    if queue and queue.peek_time() < initial.clock:
        raise SchedulingError(f"queued event at t={queue.peek_time()} precedes initial clock {initial.clock}")
    queue.clock = max(queue.clock, initial.clock)
    state = initial
    traj = [(state.clock, state)]
    handler: Optional[Callable] = model.on_event if model is not None else None
    while queue and queue.peek_time() <= horizon:
        t, payload = queue.pop()
        state = state.with_clock(t)
        fn = handler if handler is not None else payload
        state = fn(state, payload, queue, rng) if handler is not None else fn(state, queue, rng)
        traj.append((t, state))
    return traj
