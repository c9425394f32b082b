"""Agent-based simulation engine with a stochastic SIR lattice reference model."""

__version__ = "0.1.0"

from .core import AgentState, GlobalState, ModelContract, StateVariable, pda_step, project
from .rng import RngStream, SeedSpec, create_stream
from .sir import SirParams, count_secondary_cases, infection_probability, run_epidemic

__all__ = [
    "AgentState",
    "GlobalState",
    "ModelContract",
    "RngStream",
    "SeedSpec",
    "SirParams",
    "StateVariable",
    "count_secondary_cases",
    "create_stream",
    "infection_probability",
    "pda_step",
    "project",
    "run_epidemic",
]
