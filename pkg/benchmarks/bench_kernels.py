"""Time the compiled kernels against the pure-Python fallback.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 5]

Reports the best wall time per kernel for each backend and the speedup, and
checks that both backends return bit-identical results on the same inputs.
"""
import argparse
import timeit

import numpy as np

from poolgame import kernels
from poolgame.agents import AgentPopulation, make_rng, switch_table
from poolgame.model import NetworkParams, PoolStrategy, discounted_rewards, omegas


def cases():
    params = NetworkParams()
    two = [PoolStrategy(30, 100), PoolStrategy(20, 100)]
    four = [PoolStrategy(w, 100) for w in (10, 20, 30, 40)]

    def ode(strategies, x0, n_steps):
        w = discounted_rewards(strategies, params) / params.population
        om = omegas(strategies)
        return lambda be: be.rk4_integrate(np.asarray(x0, float), w, om, params.power_price, 0.1, n_steps, 0.0, 10)

    def switches(strategies, n_miners):
        m = len(strategies)
        pop = AgentPopulation.from_state(np.full(m, 1.0 / m), n_miners)
        table = np.ascontiguousarray(switch_table(pop.state, strategies, params))
        rng = make_rng(1)
        cand = rng.integers(0, m, size=n_miners)
        draws = rng.random(n_miners)

        def run(be):
            out = pop.copy()
            be.apply_switches(out.assignments, cand, draws, table, out.counts)
            return out.assignments, out.counts
        return run

    return {
        "rk4 2 pools, 2000 steps": ode(two, [0.75, 0.25], 2000),
        "rk4 4 pools, 2000 steps": ode(four, [0.25] * 4, 2000),
        "switch round, 5000 miners": switches(two, 5000),
        "switch round, 50000 miners": switches(four, 50000),
    }


def _same(a, b):
    if isinstance(a, (tuple, list)):
        return len(a) == len(b) and all(_same(u, v) for u, v in zip(a, b))
    if isinstance(a, np.ndarray):
        return a.shape == b.shape and a.tobytes() == b.tobytes()
    return a == b or (a != a and b != b)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    fast, slow = kernels.compiled_backend, kernels.python_backend
    if fast is None:
        raise SystemExit("compiled extension not built; run `pip install -e . --no-build-isolation`")
    print(f"{'kernel':<28}{'cython':>12}{'python':>12}{'speedup':>10}  identical")
    for name, fn in cases().items():
        t_fast = min(timeit.repeat(lambda: fn(fast), number=1, repeat=args.repeat))
        t_slow = min(timeit.repeat(lambda: fn(slow), number=1, repeat=args.repeat))
        same = _same(fn(fast), fn(slow))
        print(f"{name:<28}{t_fast * 1e3:>10.3f}ms{t_slow * 1e3:>10.2f}ms{t_slow / t_fast:>9.1f}x  {same}")


if __name__ == "__main__":
    main()
