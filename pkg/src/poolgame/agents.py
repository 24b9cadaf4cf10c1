"""Finite-population simulation of miners revising their pool by imitation.

Each round every miner picks a candidate pool uniformly at random and moves
there with probability ``rate_scale * x_cand * max(y_cand - y_own, 0)``,
all miners reading the same state frozen at the start of the round.

Random numbers come from numpy's Philox4x64 counter-based generator seeded
with the 64-bit run seed. Round ``r`` consumes ``N`` candidate indices
followed by ``N`` uniforms, each in miner order, so the switching kernel
(serial or compiled) sees identical inputs for identical seeds.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from . import kernels
from .model import NetworkParams, PoolStrategy, PopulationState, _shares, payoff_vector
from .replicator import Trajectory

RNG_ALGORITHM = "numpy.Philox4x64-10"


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed) & 0xFFFFFFFFFFFFFFFF))


@dataclass
class AgentPopulation:
    """Pool membership of every miner plus per-pool tallies."""

    assignments: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        self.assignments = np.ascontiguousarray(self.assignments, dtype=np.int64)
        self.counts = np.ascontiguousarray(self.counts, dtype=np.int64)
        if self.counts.sum() != self.assignments.size:
            raise ValueError("counts do not sum to the number of miners")
        if not np.array_equal(np.bincount(self.assignments, minlength=self.counts.size), self.counts):
            raise ValueError("counts inconsistent with assignments")

    @property
    def size(self) -> int:
        return self.assignments.size

    @property
    def n_pools(self) -> int:
        return self.counts.size

    @property
    def state(self) -> np.ndarray:
        return self.counts / self.size

    def copy(self) -> "AgentPopulation":
        return AgentPopulation(self.assignments.copy(), self.counts.copy())

    @classmethod
    def from_state(cls, x, population: int) -> "AgentPopulation":
        """Deterministic population closest to ``x`` (largest-remainder rounding)."""
        shares = PopulationState(x, tol=1e-9).shares
        raw = shares * population
        counts = np.floor(raw).astype(np.int64)
        short = population - counts.sum()
        if short:
            # ties broken by pool index for reproducibility
            order = np.lexsort((np.arange(raw.size), -(raw - counts)))
            counts[order[:short]] += 1
        return cls(np.repeat(np.arange(shares.size), counts), counts)

    @classmethod
    def random(cls, population: int, n_pools: int, rng: np.random.Generator) -> "AgentPopulation":
        """Every miner joins a uniformly random pool."""
        assign = rng.integers(0, n_pools, size=population)
        return cls(assign, np.bincount(assign, minlength=n_pools))


@dataclass(frozen=True)
class SimConfig:
    """Settings of one stochastic run.

    The run stops when the empirical state has moved less than
    ``convergence_tol`` (sup-norm) over the last ``convergence_window``
    rounds, or after ``max_rounds`` rounds.
    """

    seed: int = 0
    max_rounds: int = 20000
    rate_scale: float = 1.0
    convergence_window: int = 200
    convergence_tol: float = 1e-3

    def __post_init__(self):
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be >= 1")
        if not self.rate_scale > 0:
            raise ValueError("rate_scale must be > 0")
        if self.convergence_window < 1:
            raise ValueError("convergence_window must be >= 1")
        if not self.convergence_tol > 0:
            raise ValueError("convergence_tol must be > 0")


def switch_table(x, strategies, params: NetworkParams, rate_scale: float = 1.0) -> np.ndarray:
    """Matrix of switching probabilities, row = current pool, column = candidate."""
    shares = _shares(x)
    y = payoff_vector(shares, strategies, params)
    gain = np.maximum(y[None, :] - y[:, None], 0.0)
    return np.clip(rate_scale * shares[None, :] * gain, 0.0, 1.0)


def switch_probability(current: int, candidate: int, x, strategies, params, rate_scale: float = 1.0) -> float:
    shares = _shares(x)
    y = payoff_vector(shares, strategies, params)
    prob = rate_scale * shares[candidate] * max(y[candidate] - y[current], 0.0)
    return float(min(max(prob, 0.0), 1.0))


def revision_round(pop: AgentPopulation, strategies, params, rng: np.random.Generator,
                   rate_scale: float = 1.0) -> AgentPopulation:
    """One synchronous revision round; returns a new population."""
    table = np.ascontiguousarray(switch_table(pop.state, strategies, params, rate_scale))
    candidates = rng.integers(0, pop.n_pools, size=pop.size)
    draws = rng.random(pop.size)
    out = pop.copy()
    kernels.apply_switches(out.assignments, candidates, draws, table, out.counts)
    return out


def ode_time_per_round(n_pools: int, rate_scale: float = 1.0) -> float:
    """Replicator time covered by one revision round in the large-N limit.

    The candidate is drawn uniformly from all pools, so the expected flow per
    round is the replicator velocity scaled by ``rate_scale / n_pools``.
    """
    return rate_scale / n_pools


def run(initial: Union[AgentPopulation, PopulationState, Sequence[float], str],
        strategies: Sequence[PoolStrategy], params: NetworkParams, cfg: SimConfig | None = None) -> Trajectory:
    """Iterate revision rounds until the empirical state settles.

    ``initial`` may be an :class:`AgentPopulation`, a population state (rounded
    to whole miners), ``"uniform"``, or ``"random"`` (each miner draws a pool
    from the run's generator before the first round).

    Returns a trajectory indexed by round number with ``meta`` recording the
    seed, rate scale and generator.
    """
    cfg = cfg or SimConfig()
    m = len(strategies)
    rng = make_rng(cfg.seed)
    if isinstance(initial, AgentPopulation):
        pop = initial.copy()
    elif isinstance(initial, str) and initial == "random":
        pop = AgentPopulation.random(params.population, m, rng)
    elif isinstance(initial, str) and initial == "uniform":
        pop = AgentPopulation.from_state(np.full(m, 1.0 / m), params.population)
    else:
        pop = AgentPopulation.from_state(initial, params.population)
    if pop.n_pools != m:
        raise ValueError("initial population and strategies differ in pool count")

    states = [pop.state]
    converged = False
    window = cfg.convergence_window
    for r in range(1, cfg.max_rounds + 1):
        pop = revision_round(pop, strategies, params, rng, cfg.rate_scale)
        states.append(pop.state)
        if r >= window and np.max(np.abs(states[r] - states[r - window])) < cfg.convergence_tol:
            converged = True
            break
    meta = {"seed": int(cfg.seed), "rate_scale": repr(float(cfg.rate_scale)), "rng": RNG_ALGORITHM}
    return Trajectory(np.arange(len(states), dtype=float), np.array(states), converged=converged, meta=meta)
