"""Evolutionary game of miners choosing among proof-of-work mining pools.

Submodules
----------
model
    Pool strategies, network parameters and miner payoffs.
replicator
    Replicator dynamics and the fixed-step RK4 integrator.
agents
    Finite-population imitation simulation.
stability
    Rest points, Jacobians and stability verdicts.
experiments, cli
    Experiment runners and the ``poolgame`` command.
"""
from .agents import AgentPopulation, SimConfig
from .errors import (
    ConfigError,
    DegenerateStateError,
    DegenerateStrategiesError,
    EmptyPoolError,
    NotARestPointError,
    NumericalFailure,
    PoolGameError,
    UnsupportedShapeError,
)
from .kernels import BACKEND
from .model import NetworkParams, PoolStrategy, PopulationState, payoff_vector
from .replicator import IntegratorConfig, Trajectory, integrate, replicator_rhs
from .stability import RestPointReport, classify

__version__ = "0.1.0"

__all__ = [
    "AgentPopulation", "SimConfig", "ConfigError", "DegenerateStateError", "DegenerateStrategiesError",
    "EmptyPoolError", "NotARestPointError", "NumericalFailure", "PoolGameError", "UnsupportedShapeError",
    "BACKEND", "NetworkParams", "PoolStrategy", "PopulationState", "payoff_vector", "IntegratorConfig",
    "Trajectory", "integrate", "replicator_rhs", "RestPointReport", "classify",
]
