"""Experiment configuration files.

Configs are INI files with ``[scenario]``, ``[pools]``, ``[network]``,
``[integrator]``, ``[agents]`` and optional ``[sweep]`` sections. Every key
can be addressed in dotted form (``network.delay_coeff``) for overrides.
The shipped presets ``fig1``, ``fig3`` and ``fig4`` live in ``presets/``.
"""
from __future__ import annotations

import configparser
import dataclasses
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .agents import SimConfig
from .errors import ConfigError
from .model import NetworkParams, PoolStrategy, PopulationState
from .replicator import IntegratorConfig

PRESETS = ("fig1", "fig3", "fig4")
ENGINES = ("ode", "agents", "both")
SWEEPABLE = ("delay_coeff", "power_price", "fee_rate", "coinbase_reward", "population")

InitialState = Union[np.ndarray, str]


@dataclass
class ExperimentConfig:
    name: str
    strategies: Sequence[PoolStrategy]
    params: NetworkParams
    initial_state: InitialState = "uniform"
    engine: str = "ode"
    seed: int = 0
    sweep: Optional[Tuple[str, Tuple[float, ...]]] = None
    out_dir: Path = Path("out")
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    sim: SimConfig = field(default_factory=SimConfig)

    @property
    def n_pools(self) -> int:
        return len(self.strategies)

    def initial_shares(self) -> np.ndarray:
        """Concrete starting state for the ODE engine."""
        if isinstance(self.initial_state, str):
            if self.initial_state == "uniform":
                return np.full(self.n_pools, 1.0 / self.n_pools)
            seed = _random_seed(self.initial_state)
            rng = np.random.Generator(np.random.Philox(seed))
            return rng.dirichlet(np.ones(self.n_pools))
        return np.asarray(self.initial_state, dtype=float)

    def agent_initial(self):
        if isinstance(self.initial_state, str):
            if self.initial_state == "uniform":
                return "uniform"
            # Algorithm-style start: every miner picks a pool at random
            return "random"
        return self.initial_state

    def with_param(self, name: str, value: float) -> "ExperimentConfig":
        value = int(round(value)) if name == "population" else float(value)
        params = dataclasses.replace(self.params, **{name: value})
        return dataclasses.replace(self, params=params)


_RANDOM_RE = re.compile(r"^random\((\d+)\)$")


def _random_seed(text: str) -> int:
    match = _RANDOM_RE.match(text.strip())
    if not match:
        raise ConfigError("scenario.initial_state", f"unrecognized value {text!r}")
    return int(match.group(1))


def preset_text(name: str) -> str:
    if name not in PRESETS:
        raise ConfigError("config", f"unknown preset {name!r} (known: {', '.join(PRESETS)})")
    return resources.files("poolgame").joinpath("presets", f"{name}.ini").read_text()


def load_config(source: Union[str, Path], overrides: Optional[dict] = None) -> ExperimentConfig:
    """Read a config file path or a preset name.

    ``overrides`` maps dotted keys (``"network.power_price"``) to string values
    applied on top of the file.
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    src = str(source)
    if src in PRESETS and not Path(src).exists():
        parser.read_string(preset_text(src))
    else:
        path = Path(src)
        if not path.is_file():
            raise ConfigError("config", f"no such file or preset: {src}")
        try:
            parser.read(path)
        except configparser.Error as exc:
            raise ConfigError("config", str(exc)) from exc
    for key, value in (overrides or {}).items():
        section, _, opt = key.partition(".")
        if not opt:
            raise ConfigError(key, "override keys must be dotted, e.g. network.power_price")
        if not parser.has_section(section):
            parser.add_section(section)
        parser.set(section, opt, str(value))
    return parse_config(parser)


def _get(parser, section, key, conv, default=None):
    dotted = f"{section}.{key}"
    if not parser.has_option(section, key):
        if default is None:
            raise ConfigError(dotted, "missing")
        return default
    raw = parser.get(section, key)
    try:
        return conv(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(dotted, f"cannot parse {raw!r}: {exc}") from exc


def _floats(raw: str) -> Tuple[float, ...]:
    return tuple(float(v) for v in raw.replace(",", " ").split())


def _int(raw: str) -> int:
    value = float(raw)
    if value != int(value):
        raise ValueError("not an integer")
    return int(value)


def parse_config(parser: configparser.ConfigParser) -> ExperimentConfig:
    name = _get(parser, "scenario", "name", str, "experiment")
    engine = _get(parser, "scenario", "engine", str.strip, "ode")
    if engine not in ENGINES:
        raise ConfigError("scenario.engine", f"must be one of {ENGINES}, got {engine!r}")
    seed = _get(parser, "scenario", "seed", _int, 0)
    if not 0 <= seed < 2**64:
        raise ConfigError("scenario.seed", "must be an unsigned 64-bit integer")

    omega = _get(parser, "pools", "omega", _floats)
    sizes = _get(parser, "pools", "block_size", _floats)
    if len(omega) != len(sizes):
        raise ConfigError("pools.block_size", f"expected {len(omega)} values, got {len(sizes)}")
    if len(omega) < 2:
        raise ConfigError("pools.omega", "at least two pools are required")
    strategies = []
    for i, (w, s) in enumerate(zip(omega, sizes)):
        try:
            strategies.append(PoolStrategy(w, s))
        except ValueError as exc:
            raise ConfigError(f"pools[{i}]", str(exc)) from exc

    defaults = NetworkParams()
    net = {}
    for f in dataclasses.fields(NetworkParams):
        conv = _int if f.name == "population" else float
        net[f.name] = _get(parser, "network", f.name, conv, getattr(defaults, f.name))
    try:
        params = NetworkParams(**net)
    except ValueError as exc:
        raise ConfigError("network", str(exc)) from exc

    raw_init = _get(parser, "scenario", "initial_state", str.strip, "uniform")
    initial: InitialState
    if raw_init == "uniform":
        initial = "uniform"
    elif raw_init.startswith("random"):
        _random_seed(raw_init)
        initial = raw_init
    else:
        try:
            initial = PopulationState(_floats(raw_init), tol=1e-9).shares
        except ValueError as exc:
            raise ConfigError("scenario.initial_state", str(exc)) from exc
        if initial.size != len(strategies):
            raise ConfigError("scenario.initial_state", f"expected {len(strategies)} shares")

    idef, sdef = IntegratorConfig(), SimConfig()
    ikw = dict(
        step=_get(parser, "integrator", "step", float, idef.step),
        max_time=_get(parser, "integrator", "max_time", float, idef.max_time),
        convergence_tol=_get(parser, "integrator", "convergence_tol", float, idef.convergence_tol),
        record_every=_get(parser, "integrator", "record_every", _int, idef.record_every),
    )
    skw = dict(
        seed=seed,
        max_rounds=_get(parser, "agents", "max_rounds", _int, sdef.max_rounds),
        rate_scale=_get(parser, "agents", "rate_scale", float, sdef.rate_scale),
        convergence_window=_get(parser, "agents", "convergence_window", _int, sdef.convergence_window),
        convergence_tol=_get(parser, "agents", "convergence_tol", float, sdef.convergence_tol),
    )
    try:
        integrator = IntegratorConfig(**ikw)
    except ValueError as exc:
        raise ConfigError("integrator", str(exc)) from exc
    try:
        sim = SimConfig(**skw)
    except ValueError as exc:
        raise ConfigError("agents", str(exc)) from exc

    sweep = None
    if parser.has_section("sweep"):
        pname = _get(parser, "sweep", "parameter", str.strip)
        if pname not in SWEEPABLE:
            raise ConfigError("sweep.parameter", f"must be one of {SWEEPABLE}, got {pname!r}")
        values = _get(parser, "sweep", "values", _floats)
        if not values:
            raise ConfigError("sweep.values", "empty grid")
        for v in values:
            try:
                dataclasses.replace(params, **{pname: int(round(v)) if pname == "population" else v})
            except ValueError as exc:
                raise ConfigError("sweep.values", str(exc)) from exc
        sweep = (pname, values)

    out_dir = Path(_get(parser, "scenario", "out", str.strip, "out"))
    return ExperimentConfig(name=name, strategies=tuple(strategies), params=params, initial_state=initial,
                            engine=engine, seed=seed, sweep=sweep, out_dir=out_dir,
                            integrator=integrator, sim=sim)
