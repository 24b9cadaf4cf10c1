"""Acceptance checks for the released behaviour.

Each test prints one ``PASS``/``FAIL`` line naming its criterion, then
asserts. Oracles are written out by hand where possible rather than taken
from the implementation.
"""
import dataclasses
import math
import time

import numpy as np
import pytest

from poolgame import agents, experiments
from poolgame.cli import EXIT_OK, main
from poolgame.config import load_config
from poolgame.model import omegas, payoff_vector
from poolgame.replicator import IntegratorConfig, integrate, replicator_rhs
from poolgame.stability import (
    ESS,
    NON_ESS,
    classify,
    jacobian_numeric,
    jacobian_two_pool_analytic,
    rest_points_two_pool,
    theorem2_asymptotic,
)

from conftest import FIG1_X_STAR, HYPERPLANE, simplex_points


@pytest.fixture
def verdict(capsys):
    """Print a single pass/fail line, then fail the test if needed."""

    def _report(number, title, ok, detail=""):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title}" + (f" ({detail})" if detail else ""))
        assert ok, detail

    return _report


def _x_star(delay):
    # x* = (a - b) / (N p (w1 - w2)^2) - w2 / (w1 - w2), with equal block sizes
    # a - b = (R + fee*s) (w1 - w2) exp(-delay*s/T)
    a_minus_b = 1200 * 10 * math.exp(-delay * 100 / 600)
    return a_minus_b / (5000 * 0.01 * 100) - 2.0


def test_c01_interior_rest_point(fig1, verdict):
    s, p = fig1
    x = rest_points_two_pool(s, p)[2].x_star[0]
    ok = abs(x - 0.39800) <= 1e-5 and abs(x - 0.4) <= 0.005 and abs(x - _x_star(0.005)) < 1e-12
    verdict(1, "closed-form interior rest point", ok, f"x*={x:.8f}")


def test_c02_ode_convergence(fig1, verdict):
    s, p = fig1
    t0 = time.perf_counter()
    traj = integrate([0.75, 0.25], s, p)
    elapsed = time.perf_counter() - t0
    x1 = traj.states[:, 0]
    steps = np.diff(x1[1:])
    monotone = bool(np.all(steps <= 0.0))
    rate = float(np.max(np.abs(replicator_rhs(traj.final_state, s, p))))
    ok = traj.converged and rate < 1e-9 and abs(x1[-1] - FIG1_X_STAR) < 1e-3 and monotone and elapsed < 1.0
    verdict(2, "replicator ODE converges monotonically to x*", ok,
            f"x1={x1[-1]:.6f}, |rhs|={rate:.2e}, monotone={monotone}, {elapsed:.3f}s")


def test_c03_agent_convergence(fig1, verdict):
    s, p = fig1
    t0 = time.perf_counter()
    single = agents.run([0.75, 0.25], s, p, agents.SimConfig(seed=2018)).final_state[0]
    finals = [agents.run([0.75, 0.25], s, p, agents.SimConfig(seed=seed)).final_state[0] for seed in range(30)]
    elapsed = time.perf_counter() - t0
    mean = float(np.mean(finals))
    ok = abs(single - FIG1_X_STAR) < 0.02 and abs(mean - FIG1_X_STAR) < 0.005 and elapsed < 30.0
    verdict(3, "agent simulation reaches x*", ok, f"seed 2018: {single:.4f}, 30-seed mean {mean:.5f}, {elapsed:.1f}s")


def test_c04_zero_payoff_across_sweep(verdict):
    cfg = load_config("fig3")
    worst = 0.0
    for i, _ in enumerate(cfg.sweep[1]):
        point = experiments.sweep_point(cfg, i)
        assert point.verdict == ESS
        inhabited = point.x_star > 0
        worst = max(worst, float(np.max(np.abs(point.payoffs[inhabited]))))
    verdict(4, "miner payoffs vanish at every swept equilibrium", worst < 5e-3, f"max |y|={worst:.2e}")


def test_c05_delay_sweep_trend(fig1, verdict):
    s, p = fig1
    delays = (0.005, 0.01, 0.05)
    expected = (0.39800, 0.39601, 0.38009)
    xs = [rest_points_two_pool(s, dataclasses.replace(p, delay_coeff=d))[2].x_star[0] for d in delays]
    close = all(abs(x - e) <= 1e-4 and abs(x - _x_star(d)) < 1e-12 for x, e, d in zip(xs, expected, delays))
    decreasing = all(b < a for a, b in zip(xs, xs[1:]))
    verdict(5, "x* falls strictly with the delay coefficient", close and decreasing,
            ", ".join(f"{x:.5f}" for x in xs))


def test_c06_four_pools(fig4, verdict):
    s, p = fig4
    cfg = load_config("fig4")
    t0 = time.perf_counter()
    ode = integrate(cfg.initial_shares(), s, p).final_state
    sim = agents.run(cfg.agent_initial(), s, p, cfg.sim)
    elapsed = time.perf_counter() - t0
    details, ok = [], sim.converged and elapsed < 60.0
    for label, x in (("ode", ode), ("agents", sim.final_state)):
        hashrate = float(omegas(s) @ x)
        y = payoff_vector(x, s, p)
        ok &= abs(hashrate - 23.980) <= 0.05 and abs(hashrate - HYPERPLANE) <= 0.05
        ok &= bool(np.max(np.abs(y)) < 5e-3) and x[0] > 0.25
        details.append(f"{label}: sum wx={hashrate:.4f}, x1={x[0]:.4f}, max|y|={np.max(np.abs(y)):.1e}")
    verdict(6, "four-pool run settles on the zero-payoff hyperplane", ok, "; ".join(details) + f"; {elapsed:.1f}s")


def test_c07_jacobian_oracle(fig1, verdict):
    s, p = fig1
    rng = np.random.default_rng(7)
    states = list(simplex_points(rng, 2, 100)) + [r.x_star for r in rest_points_two_pool(s, p)]
    worst = max(float(np.max(np.abs(jacobian_two_pool_analytic(x, s, p) - jacobian_numeric(x, s, p))))
                for x in states)
    verdict(7, "analytic Jacobian matches finite differences", worst < 1e-6, f"max entry error {worst:.2e}")


def test_c08_stability_verdicts(fig1, verdict):
    s, p = fig1
    interior = classify([FIG1_X_STAR, 1 - FIG1_X_STAR], s, p)
    vertices = [classify(v, s, p) for v in ([1.0, 0.0], [0.0, 1.0])]
    ok = interior.verdict == ESS and abs(interior.reduced_eigen + 9.99e-3) <= 1e-4
    ok &= all(v.verdict == NON_ESS for v in vertices)

    # direct perturbation: the dynamics leave both vertices and return to x*
    short = IntegratorConfig(max_time=50, convergence_tol=1e-300)
    escapes = []
    for start, vertex in ((1e-3, 0.0), (1 - 1e-3, 1.0)):
        x = integrate([start, 1 - start], s, p, short).final_state[0]
        escapes.append(abs(x - vertex) > abs(start - vertex))
    returns = [abs(integrate([FIG1_X_STAR + d, 1 - FIG1_X_STAR - d], s, p).final_state[0] - FIG1_X_STAR) < 1e-6
               for d in (-1e-2, 1e-2)]
    ok &= all(escapes) and all(returns)
    verdict(8, "interior point is ESS, vertices are not", ok,
            f"g'={interior.reduced_eigen:.5e}, vertices {[v.verdict for v in vertices]}")


def test_c09_printed_condition_audit(fig1, verdict):
    s, p = fig1
    t2 = theorem2_asymptotic(s, p)
    a = 1200 * 30 * math.exp(-100 * 0.005 / 600)
    oracle_gap = 1200 * 10 * math.exp(-100 * 0.005 / 600)
    report = classify([FIG1_X_STAR, 1 - FIG1_X_STAR], s, p)
    ok = abs(t2.a_minus_b - 11990) <= 1 and abs(t2.a_minus_b - oracle_gap) < 1e-9
    ok &= abs(t2.b_w1_minus_a_w2) <= 1e-6 * a * 20
    ok &= report.discrepancy and report.verdict == ESS and report.printed_prediction != ESS
    verdict(9, "published stability conditions disagree with the computed verdict", ok,
            f"a-b={t2.a_minus_b:.3f}, b*w1-a*w2={t2.b_w1_minus_a_w2:g}, printed={report.printed_prediction}")


COMMANDS = [
    ["evolve", "--config", "fig1", "--engine", "both"],
    ["agents", "--config", "fig1"],
    ["phase", "--config", "fig1"],
    ["sweep", "--config", "fig3"],
    ["sweep", "--config", "fig3", "--engine", "both", "--set", "scenario.name=fig3_agents"],
    ["classify", "--config", "fig1"],
    ["classify", "--config", "fig4"],
]


def test_c10_determinism(tmp_path, verdict):
    outputs = []
    for run in ("a", "b"):
        out = tmp_path / run
        for cmd in COMMANDS:
            assert main(cmd + ["--seed", "11", "--out", str(out)]) == EXIT_OK
        outputs.append({f.name: f.read_bytes() for f in sorted(out.glob("*.csv"))})
    same = outputs[0] == outputs[1] and len(outputs[0]) >= 6
    verdict(10, "reruns produce byte-identical CSV files", same, f"{len(outputs[0])} files compared")
