import numpy as np
import pytest

from poolgame.model import NetworkParams, PoolStrategy

FIG1_X_STAR = 0.39800083310190004  # closed form evaluated by hand, see test_model oracles
HYPERPLANE = 23.980008331018997  # 1200 * exp(-1/1200) / (5000 * 0.01)


@pytest.fixture
def params():
    return NetworkParams(delay_coeff=0.005, mean_block_interval=600, coinbase_reward=1000,
                         fee_rate=2, power_price=0.01, population=5000)


@pytest.fixture
def fig1(params):
    return [PoolStrategy(30, 100), PoolStrategy(20, 100)], params


@pytest.fixture
def fig4(params):
    return [PoolStrategy(w, 100) for w in (10, 20, 30, 40)], params


@pytest.fixture
def symmetric(params):
    return [PoolStrategy(25, 100), PoolStrategy(25, 100)], params


def simplex_points(rng, m, n):
    return rng.dirichlet(np.ones(m), size=n)
