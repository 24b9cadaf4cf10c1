"""Payoff model for miners choosing between proof-of-work mining pools.

A pool ``i`` asks every member for a fixed hash rate ``omega_i`` and publishes
blocks of size ``s_i``. Pools win the block lottery in proportion to their
aggregate hash rate, lose a won block to orphaning with a probability that
grows with its propagation delay, and split the block reward evenly among
members. Each miner pays for its own hash rate.

All functions here are pure and work on plain floats / numpy arrays.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateStateError, EmptyPoolError

SIMPLEX_TOL = 1e-12


@dataclass(frozen=True)
class PoolStrategy:
    """Mining strategy of one pool.

    Parameters
    ----------
    omega : float
        Hash rate each member must contribute. Must be positive.
    block_size : float
        Size of the blocks the pool publishes. Must be non-negative.
    """

    omega: float
    block_size: float

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError(f"omega must be > 0, got {self.omega}")
        if not self.block_size >= 0:
            raise ValueError(f"block_size must be >= 0, got {self.block_size}")


@dataclass(frozen=True)
class NetworkParams:
    """Network-wide environment shared by all pools.

    ``delay_coeff`` is the combined per-size-unit delay of transmission and
    verification, so a block of size ``s`` needs ``delay_coeff * s`` seconds
    to reach the network. ``mean_block_interval`` is the target time between
    blocks. ``power_price`` is the cost of one unit of hash rate over one block
    interval. ``population`` is the number of miners.
    """

    delay_coeff: float = 0.005
    mean_block_interval: float = 600.0
    coinbase_reward: float = 1000.0
    fee_rate: float = 2.0
    power_price: float = 0.01
    population: int = 5000

    def __post_init__(self):
        checks = {
            "delay_coeff": self.delay_coeff >= 0,
            "mean_block_interval": self.mean_block_interval > 0,
            "coinbase_reward": self.coinbase_reward >= 0,
            "fee_rate": self.fee_rate >= 0,
            "power_price": self.power_price >= 0,
            "population": self.population >= 1,
        }
        for name, ok in checks.items():
            if not ok:
                raise ValueError(f"invalid {name}: {getattr(self, name)!r}")


class PopulationState:
    """Fractions of the miner population in each pool (a point on the simplex).

    Components are validated to lie in ``[0, 1]`` and sum to one within
    ``SIMPLEX_TOL``. The shares are stored as a read-only float array.
    """

    __slots__ = ("shares",)

    def __init__(self, shares, tol: float = SIMPLEX_TOL):
        arr = np.array(shares, dtype=float).reshape(-1)
        if arr.size == 0:
            raise ValueError("population state needs at least one pool")
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"non-finite shares: {arr}")
        if np.any(arr < 0) or np.any(arr > 1):
            raise ValueError(f"shares must lie in [0, 1]: {arr}")
        if abs(arr.sum() - 1.0) > tol:
            raise ValueError(f"shares must sum to 1 (got {arr.sum()!r})")
        arr.setflags(write=False)
        self.shares = arr

    @classmethod
    def uniform(cls, n_pools: int) -> "PopulationState":
        return cls(np.full(n_pools, 1.0 / n_pools), tol=1e-9)

    @classmethod
    def vertex(cls, n_pools: int, pool: int) -> "PopulationState":
        arr = np.zeros(n_pools)
        arr[pool] = 1.0
        return cls(arr)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.shares, dtype=dtype)

    def __len__(self):
        return self.shares.size

    def __getitem__(self, i):
        return self.shares[i]

    def __iter__(self):
        return iter(self.shares)

    def __eq__(self, other):
        if isinstance(other, PopulationState):
            return np.array_equal(self.shares, other.shares)
        return NotImplemented

    def __hash__(self):
        return hash(self.shares.tobytes())

    def __repr__(self):
        return f"PopulationState({self.shares.tolist()})"


def _shares(x) -> np.ndarray:
    if isinstance(x, PopulationState):
        return x.shares
    return np.asarray(x, dtype=float)


def omegas(strategies: Sequence[PoolStrategy]) -> np.ndarray:
    return np.array([s.omega for s in strategies], dtype=float)


def block_sizes(strategies: Sequence[PoolStrategy]) -> np.ndarray:
    return np.array([s.block_size for s in strategies], dtype=float)


def total_hash_rate(x, strategies: Sequence[PoolStrategy]) -> float:
    """Population-weighted hash rate ``sum_j omega_j x_j`` (per miner)."""
    return float(np.dot(omegas(strategies), _shares(x)))


def mine_probability(i: int, x, strategies: Sequence[PoolStrategy]) -> float:
    """Probability that pool ``i`` finds the next block.

    Raises
    ------
    DegenerateStateError
        If no pool carries any hash rate.
    """
    if not strategies:
        raise ValueError("need at least one pool")
    shares = _shares(x)
    if len(shares) != len(strategies):
        raise ValueError("state and strategies have different lengths")
    weights = omegas(strategies) * shares
    total = weights.sum()
    if not total > 0:
        raise DegenerateStateError("all pools have zero weighted hash rate")
    return float(weights[i] / total)


def propagation_delay(block_size: float, params: NetworkParams) -> float:
    if block_size < 0:
        raise ValueError("block_size must be >= 0")
    return params.delay_coeff * block_size


def orphan_probability(block_size: float, params: NetworkParams) -> float:
    """Chance a found block of this size loses the propagation race."""
    tau = propagation_delay(block_size, params)
    return -math.expm1(-tau / params.mean_block_interval)


def survival_factor(block_size: float, params: NetworkParams) -> float:
    """``1 - orphan_probability``, computed without cancellation."""
    return math.exp(-propagation_delay(block_size, params) / params.mean_block_interval)


def win_probability(i, x, strategies, params: NetworkParams) -> float:
    return mine_probability(i, x, strategies) * survival_factor(strategies[i].block_size, params)


def block_reward(strategy: PoolStrategy, params: NetworkParams) -> float:
    """Coinbase plus fees collected by a block of the pool's size."""
    return params.coinbase_reward + params.fee_rate * strategy.block_size


def expected_pool_reward(i, x, strategies, params: NetworkParams) -> float:
    return block_reward(strategies[i], params) * win_probability(i, x, strategies, params)


def miner_payoff(i, x, strategies, params: NetworkParams) -> float:
    """Expected net payoff of one miner in pool ``i`` per block interval.

    Raises
    ------
    EmptyPoolError
        If pool ``i`` has no members (the per-member share is undefined).
    """
    shares = _shares(x)
    if shares[i] <= 0:
        raise EmptyPoolError(f"pool {i} is empty; per-miner payoff undefined")
    share = block_reward(strategies[i], params) / (params.population * shares[i])
    survive = survival_factor(strategies[i].block_size, params)
    return share * mine_probability(i, x, strategies) * survive - params.power_price * strategies[i].omega


def discounted_rewards(strategies, params: NetworkParams) -> np.ndarray:
    """Per-pool ``(R + fee*s_i) * omega_i * survival_i``.

    For two pools these are the coefficients of the closed-form rest point.
    """
    return np.array(
        [block_reward(s, params) * s.omega * survival_factor(s.block_size, params) for s in strategies]
    )


def payoff_vector(x, strategies, params: NetworkParams) -> np.ndarray:
    """Per-miner payoffs of all pools, with ``x_i`` cancelled analytically.

    For inhabited pools this equals :func:`miner_payoff`. For an empty pool it
    is the payoff a single entrant would receive, which keeps ``x_i * y_i``
    continuous (and zero) on the simplex boundary.
    """
    shares = _shares(x)
    w = omegas(strategies)
    total = float(np.dot(w, shares))
    if not total > 0:
        raise DegenerateStateError("all pools have zero weighted hash rate")
    return discounted_rewards(strategies, params) / (params.population * total) - params.power_price * w


def mean_payoff(x, strategies, params: NetworkParams) -> float:
    """Population average of miner payoffs; empty pools contribute nothing."""
    shares = _shares(x)
    return float(np.dot(shares, payoff_vector(shares, strategies, params)))


def zero_payoff_hash_rate(strategies, params: NetworkParams) -> float:
    """Weighted hash rate at which every pool's miner payoff is zero.

    Only meaningful when all pools share the same block size; otherwise the
    zero-payoff sets of different pools do not coincide.
    """
    sizes = block_sizes(strategies)
    if not np.allclose(sizes, sizes[0], rtol=0, atol=0):
        raise ValueError("zero-payoff hyperplane requires equal block sizes")
    s0 = strategies[0]
    if params.power_price <= 0:
        return math.inf
    return block_reward(s0, params) * survival_factor(s0.block_size, params) / (
        params.population * params.power_price
    )
