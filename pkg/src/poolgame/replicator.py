"""Replicator dynamics of pool shares and their numerical integration."""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .errors import NumericalFailure, UnsupportedShapeError
from .model import (
    NetworkParams,
    PoolStrategy,
    PopulationState,
    _shares,
    discounted_rewards,
    omegas,
    payoff_vector,
)


@dataclass(frozen=True)
class IntegratorConfig:
    """Fixed-step RK4 settings.

    ``record_every`` keeps every k-th step in the returned trajectory; the
    initial and final states are always kept.
    """

    step: float = 0.1
    max_time: float = 1e4
    convergence_tol: float = 1e-9
    record_every: int = 1

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError("step must be > 0")
        if not self.max_time > 0:
            raise ValueError("max_time must be > 0")
        if not self.convergence_tol > 0:
            raise ValueError("convergence_tol must be > 0")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")

    @property
    def n_steps(self) -> int:
        return int(math.ceil(self.max_time / self.step - 1e-9))


@dataclass
class Trajectory:
    """Recorded path of the population state.

    ``states`` has one row per entry of ``times``. ``payoffs``, when present,
    holds the per-pool miner payoffs at each recorded state (entrant payoff
    for empty pools). ``meta`` carries free-form provenance such as the seed
    of a stochastic run, written as a comment line on CSV export.
    """

    times: np.ndarray
    states: np.ndarray
    payoffs: Optional[np.ndarray] = None
    converged: bool = False
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.atleast_2d(np.asarray(self.states, dtype=float))
        if self.times.shape[0] != self.states.shape[0]:
            raise ValueError("times and states differ in length")
        if self.times.size > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    def __len__(self):
        return self.times.size

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    @property
    def n_pools(self) -> int:
        return self.states.shape[1]

    def with_payoffs(self, strategies, params) -> "Trajectory":
        """Return a copy with ``payoffs`` filled in for every recorded state."""
        pay = np.array([payoff_vector(x, strategies, params) for x in self.states])
        return Trajectory(self.times, self.states, pay, self.converged, dict(self.meta))

    def to_csv(self, dest=None) -> str:
        """Write ``t,x_1..x_M[,y_1..y_M,mean_payoff]`` rows; returns the text.

        ``dest`` may be a path or a text file object.
        """
        m = self.n_pools
        header = ["t"] + [f"x_{i + 1}" for i in range(m)]
        if self.payoffs is not None:
            header += [f"y_{i + 1}" for i in range(m)] + ["mean_payoff"]
        buf = io.StringIO()
        if self.meta:
            buf.write("# " + " ".join(f"{k}={v}" for k, v in self.meta.items()) + "\n")
        buf.write(",".join(header) + "\n")
        for r in range(len(self)):
            row = [self.times[r], *self.states[r]]
            if self.payoffs is not None:
                y = self.payoffs[r]
                row += [*y, float(np.dot(self.states[r], y))]
            buf.write(",".join(_fmt(v) for v in row) + "\n")
        text = buf.getvalue()
        if dest is not None:
            if hasattr(dest, "write"):
                dest.write(text)
            else:
                with open(dest, "w", newline="") as fh:
                    fh.write(text)
        return text


def _fmt(v: float) -> str:
    out = f"{float(v):.9g}"
    return "0" if out == "-0" else out


def _kernel_args(strategies, params):
    weights = discounted_rewards(strategies, params) / params.population
    return weights, omegas(strategies), float(params.power_price)


def replicator_rhs(x, strategies: Sequence[PoolStrategy], params: NetworkParams) -> np.ndarray:
    """Velocity ``x_i (y_i - mean payoff)`` of every pool share.

    Coordinates are treated independently, so the function can be evaluated
    slightly off the simplex (used for finite-difference Jacobians). Empty
    pools have zero velocity.
    """
    shares = _shares(x)
    if len(shares) != len(strategies):
        raise ValueError("state and strategies have different lengths")
    return kernels.replicator_rhs(shares, *_kernel_args(strategies, params))


def reduced_rhs_two_pool(x1: float, strategies, params: NetworkParams) -> float:
    """One-dimensional form of the two-pool dynamics in the share of pool 1."""
    if len(strategies) != 2:
        raise UnsupportedShapeError(f"two pools required, got {len(strategies)}")
    a, b = discounted_rewards(strategies, params)
    w1, w2 = strategies[0].omega, strategies[1].omega
    n, p = params.population, params.power_price
    x1 = float(x1)
    total = w1 * x1 + w2 * (1.0 - x1)
    return x1 * (1.0 - x1) * ((a - b) / (n * total) - p * (w1 - w2))


def integrate(x0, strategies, params: NetworkParams, cfg: Optional[IntegratorConfig] = None) -> Trajectory:
    """Integrate the replicator ODE from ``x0`` with fixed-step RK4.

    After every step negative components are clamped to zero and the state is
    renormalized onto the simplex. Integration stops early once the sup-norm
    of the velocity drops below ``cfg.convergence_tol``; the returned
    trajectory's ``converged`` flag records whether that happened.

    Raises
    ------
    NumericalFailure
        If a non-finite value appears; ``exc.time`` is the failing time.
    """
    cfg = cfg or IntegratorConfig()
    start = PopulationState(x0, tol=1e-9).shares
    if len(start) != len(strategies):
        raise ValueError("state and strategies have different lengths")
    times, states, converged, fail_time, _ = kernels.rk4_integrate(
        start, *_kernel_args(strategies, params), cfg.step, cfg.n_steps, cfg.convergence_tol, cfg.record_every
    )
    if not math.isnan(fail_time):
        raise NumericalFailure(fail_time)
    return Trajectory(times, states, converged=bool(converged))
