"""Experiment runners behind the command-line interface.

Each ``run_*`` function does all computation first and then writes its
output files, one writer per file. Results are returned for programmatic use.
"""
from __future__ import annotations

import dataclasses
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import agents, plotting
from .config import ExperimentConfig
from .errors import NotARestPointError, UnsupportedShapeError
from .model import payoff_vector
from .replicator import Trajectory, integrate, reduced_rhs_two_pool, replicator_rhs
from .stability import (
    DEGENERATE,
    RestPointReport,
    classify,
    find_rest_points_two_pool,
    polish_rest_point,
    rest_points_two_pool,
)

log = logging.getLogger(__name__)

PHASE_GRID_POINTS = 401


@dataclass
class EvolveResult:
    ode: Optional[Trajectory] = None
    agents: Optional[Trajectory] = None
    files: List[Path] = field(default_factory=list)

    @property
    def converged(self) -> bool:
        runs = [t for t in (self.ode, self.agents) if t is not None]
        return all(t.converged for t in runs)


def _out(cfg: ExperimentConfig, suffix: str) -> Path:
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    return cfg.out_dir / f"{cfg.name}_{suffix}"


def _engines(engine: str):
    return {"ode": ("ode",), "agents": ("agents",), "both": ("ode", "agents")}[engine]


def run_evolve(cfg: ExperimentConfig, engine: Optional[str] = None) -> EvolveResult:
    """Integrate the ODE and/or simulate agents from the configured start.

    Raises :class:`~poolgame.errors.NumericalFailure` from the ODE engine.
    """
    engines = _engines(engine or cfg.engine)
    res = EvolveResult()
    if "ode" in engines:
        traj = integrate(cfg.initial_shares(), cfg.strategies, cfg.params, cfg.integrator)
        res.ode = traj.with_payoffs(cfg.strategies, cfg.params)
        log.info("ode: t=%g converged=%s final=%s", traj.times[-1], traj.converged, traj.final_state)
    if "agents" in engines:
        traj = agents.run(cfg.agent_initial(), cfg.strategies, cfg.params, cfg.sim)
        res.agents = traj.with_payoffs(cfg.strategies, cfg.params)
        log.info("agents: rounds=%d converged=%s final=%s", len(traj) - 1, traj.converged, traj.final_state)

    series = {}
    if res.ode is not None:
        path = _out(cfg, "ode.csv")
        res.ode.to_csv(path)
        res.files.append(path)
        series["ode"] = (res.ode.times, res.ode.states, res.ode.payoffs)
    if res.agents is not None:
        path = _out(cfg, "agents.csv")
        res.agents.to_csv(path)
        res.files.append(path)
        # one revision round covers rate_scale / M units of replicator time
        scale = agents.ode_time_per_round(cfg.n_pools, cfg.sim.rate_scale)
        series["agents"] = (res.agents.times * scale, res.agents.states, res.agents.payoffs)
    path = _out(cfg, "evolve.svg")
    plotting.plot_evolution(series, path, title=cfg.name)
    res.files.append(path)
    return res


@dataclass
class PhaseResult:
    grid: np.ndarray
    field: np.ndarray
    trajectory: Trajectory
    rest_points: List[RestPointReport]
    files: List[Path] = field(default_factory=list)


def run_phase(cfg: ExperimentConfig, n_grid: int = PHASE_GRID_POINTS) -> PhaseResult:
    """Sample the two-pool velocity field and overlay the configured trajectory."""
    if cfg.n_pools != 2:
        raise UnsupportedShapeError(f"phase portraits need exactly two pools, got {cfg.n_pools}")
    grid = np.linspace(0.0, 1.0, n_grid)
    velocity = np.array([reduced_rhs_two_pool(g, cfg.strategies, cfg.params) for g in grid])
    traj = integrate(cfg.initial_shares(), cfg.strategies, cfg.params, cfg.integrator)
    rests = find_rest_points_two_pool(cfg.strategies, cfg.params)
    res = PhaseResult(grid, velocity, traj, rests)

    field_path = _out(cfg, "phase.csv")
    lines = ["x_1,dx_1_dt"] + [f"{_f(g)},{_f(v)}" for g, v in zip(grid, velocity)]
    field_path.write_text("\n".join(lines) + "\n")
    traj_path = _out(cfg, "phase_trajectory.csv")
    traj.to_csv(traj_path)
    svg = _out(cfg, "phase.svg")
    rate = np.array([replicator_rhs(x, cfg.strategies, cfg.params)[0] for x in traj.states])
    marks = [(r.x_star[0], r.verdict) for r in rests if r.feasible]
    plotting.plot_phase(grid, velocity, traj.states[:, 0], rate, marks, svg, title=cfg.name)
    res.files += [field_path, traj_path, svg]
    return res


def _f(v) -> str:
    out = f"{float(v):.9g}"
    return "0" if out == "-0" else out


@dataclass
class SweepPoint:
    value: float
    x_star: np.ndarray
    payoffs: np.ndarray
    verdict: str
    method: str
    flagged: bool
    agent_state: Optional[np.ndarray] = None


def _ode_equilibrium(cfg: ExperimentConfig):
    traj = integrate(cfg.initial_shares(), cfg.strategies, cfg.params, cfg.integrator)
    return polish_rest_point(traj.final_state, cfg.strategies, cfg.params)


def _classify_or_flag(x, cfg):
    try:
        return classify(x, cfg.strategies, cfg.params).verdict, False
    except NotARestPointError:
        return "unconverged", True


def sweep_point(cfg: ExperimentConfig, index: int) -> SweepPoint:
    """Equilibrium at grid point ``index`` of the configured sweep."""
    name, values = cfg.sweep
    value = values[index]
    point = cfg.with_param(name, value)
    strategies, params = point.strategies, point.params
    flagged = False
    if point.n_pools == 2 and strategies[0].omega != strategies[1].omega:
        interior = rest_points_two_pool(strategies, params)[2]
        if interior.feasible:
            x = interior.x_star
            verdict = classify(x, strategies, params, "interior").verdict
            method = "closed_form"
        else:
            # no interior equilibrium: record where the dynamics end up instead
            x = _ode_equilibrium(point)
            verdict, _ = _classify_or_flag(x, point)
            method, flagged = "ode", True
    else:
        x = _ode_equilibrium(point)
        verdict, flagged = _classify_or_flag(x, point)
        method = "ode"
    payoffs = payoff_vector(x, strategies, params)
    agent_state = None
    if "agents" in _engines(cfg.engine):
        sim = dataclasses.replace(cfg.sim, seed=cfg.seed ^ index)
        agent_state = agents.run(point.agent_initial(), strategies, params, sim).final_state
    return SweepPoint(float(value), np.asarray(x, dtype=float), payoffs, verdict, method, flagged, agent_state)


@dataclass
class SweepResult:
    parameter: str
    points: List[SweepPoint]
    files: List[Path] = field(default_factory=list)

    def to_csv(self) -> str:
        m = self.points[0].x_star.size
        cols = [self.parameter] + [f"x_star_{i + 1}" for i in range(m)] + [f"y_{i + 1}" for i in range(m)]
        cols += ["verdict", "method", "flagged"]
        with_agents = self.points[0].agent_state is not None
        if with_agents:
            cols += [f"agents_x_{i + 1}" for i in range(m)]
        rows = [",".join(cols)]
        for p in self.points:
            cells = [_f(p.value)] + [_f(v) for v in p.x_star] + [_f(v) for v in p.payoffs]
            cells += [p.verdict, p.method, str(p.flagged).lower()]
            if with_agents:
                cells += [_f(v) for v in p.agent_state]
            rows.append(",".join(cells))
        return "\n".join(rows) + "\n"


def run_sweep(cfg: ExperimentConfig, max_workers: Optional[int] = None) -> SweepResult:
    """Equilibrium versus one network parameter; grid points run concurrently."""
    if cfg.sweep is None:
        raise ValueError("configuration has no [sweep] section")
    name, values = cfg.sweep
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        points = list(pool.map(lambda i: sweep_point(cfg, i), range(len(values))))
    res = SweepResult(name, points)
    csv_path = _out(cfg, "sweep.csv")
    csv_path.write_text(res.to_csv())
    svg = _out(cfg, "sweep.svg")
    plotting.plot_sweep(name, values, np.array([p.x_star for p in points]),
                        np.array([p.payoffs for p in points]), svg, title=cfg.name)
    res.files += [csv_path, svg]
    return res


@dataclass
class ClassifyResult:
    reports: List[RestPointReport]
    files: List[Path] = field(default_factory=list)


def equilibria(cfg: ExperimentConfig) -> List[RestPointReport]:
    """Classified rest points: all of them for two pools, otherwise the
    vertices plus the state the ODE converges to from the configured start."""
    if cfg.n_pools == 2:
        return find_rest_points_two_pool(cfg.strategies, cfg.params)
    m = cfg.n_pools
    reports = [classify(np.eye(m)[i], cfg.strategies, cfg.params, "vertex") for i in range(m)]
    x = _ode_equilibrium(cfg)
    try:
        rep = classify(x, cfg.strategies, cfg.params, "converged")
    except NotARestPointError as exc:
        rep = RestPointReport(x, "converged", verdict="unconverged", notes=[str(exc)])
    reports.append(rep)
    return reports


def run_classify(cfg: ExperimentConfig) -> ClassifyResult:
    reports = equilibria(cfg)
    res = ClassifyResult(reports)
    csv_path = _out(cfg, "equilibria.csv")
    csv_path.write_text("\n".join([RestPointReport.csv_header(cfg.n_pools)] + [r.csv_row() for r in reports]) + "\n")
    txt_path = _out(cfg, "equilibria.txt")
    txt_path.write_text("\n".join(f"[rest_point.{i}]\n{r.to_text()}" for i, r in enumerate(reports)))
    res.files += [csv_path, txt_path]
    for r in reports:
        if r.verdict == DEGENERATE:
            log.info("degenerate rest point at %s", r.x_star)
    return res
