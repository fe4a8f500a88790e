"""Run configuration: INI-style document with five flat sections.

Example::

    [grid]
    d_h = 1
    n_h = 32

    [params]
    mode = convergence
    eps_list = 0.2, 0.1, 0.05, 0.025

Every key is optional; missing keys take the defaults of the dataclasses
below. Unknown sections or keys are errors. Lists are comma separated.
"""

import configparser
import math
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .constitutive import MaterialParams
from .spectral import Grid, NormSpec

__all__ = [
    "MODES",
    "ConfigError",
    "GridConfig",
    "ParamsConfig",
    "MonitorsConfig",
    "SteppingConfig",
    "OutputConfig",
    "RunConfig",
    "load_config",
    "serialize",
    "validate",
]

MODES = ("limit", "eps", "convergence", "lemmas", "selfconv")

# Sobolev index requirements per mode: (s1 lower bound, s2 lower bound)
_INDEX_BOUNDS = {
    "limit": (1.5, 0.5),
    "eps": (2.5, 1.5),
    "convergence": (2.5, 1.5),
    "selfconv": (2.5, 1.5),
    "lemmas": (1.0, 0.5),
}


class ConfigError(ValueError):
    """Invalid configuration; ``problems`` lists every violation found."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("invalid configuration:\n" + "\n".join(f"  - {p}" for p in self.problems))


@dataclass(frozen=True)
class GridConfig:
    d_h: int = 1
    n_h: int = 32
    n_y: int = 32
    l_h: float = 2 * math.pi


@dataclass(frozen=True)
class ParamsConfig:
    mode: str = "limit"
    theta: float = 0.5
    b: float = 0.3
    eps: float = 0.1
    eps_list: tuple = (0.2, 0.1, 0.05, 0.025)
    delta: float = 0.01
    s1: float = 2.6
    s2: float = 1.6
    radius_a: float = 0.1
    seed: int = 0


@dataclass(frozen=True)
class MonitorsConfig:
    kappa: float = 0.25
    lam: float = 0.4
    lam_tilde: float = 0.4
    eps1: float = 1e-2
    big_c1: float = 10.0
    small_c1: float = 1.0
    eps0: float = 1e-2
    energy_bound: float = 100.0
    ceiling: float = 1e6
    strict: bool = False
    lemma_samples: int = 100
    lemma_n_list: tuple = (32, 64)


@dataclass(frozen=True)
class SteppingConfig:
    dt: float = 1e-3
    t_final: float = 1.0
    output_every: int = 10
    dt_list: tuple = (4e-3, 2e-3, 1e-3)
    workers: int = 1


@dataclass(frozen=True)
class OutputConfig:
    dir: str = "out"


@dataclass(frozen=True)
class RunConfig:
    grid: GridConfig = field(default_factory=GridConfig)
    params: ParamsConfig = field(default_factory=ParamsConfig)
    monitors: MonitorsConfig = field(default_factory=MonitorsConfig)
    stepping: SteppingConfig = field(default_factory=SteppingConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def make_grid(self):
        g = self.grid
        return Grid(g.d_h, g.n_h, g.n_y, g.l_h)

    def material(self):
        return MaterialParams(self.params.theta, self.params.b)

    def norm(self):
        return NormSpec(self.params.s1, self.params.s2)

    @property
    def n_steps(self):
        return int(round(self.stepping.t_final / self.stepping.dt))

    def with_updates(self, **sections):
        """Copy with per-section overrides, e.g. ``with_updates(params={"eps": 0.05})``."""
        out = self
        for name, changes in sections.items():
            out = replace(out, **{name: replace(getattr(out, name), **changes)})
        return out


SECTIONS = {
    "grid": GridConfig,
    "params": ParamsConfig,
    "monitors": MonitorsConfig,
    "stepping": SteppingConfig,
    "output": OutputConfig,
}


def _convert(raw, default):
    if isinstance(default, bool):
        low = raw.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"expected a boolean, got {raw!r}")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    if isinstance(default, tuple):
        items = [s.strip() for s in raw.split(",") if s.strip()]
        kind = type(default[0]) if default else float
        return tuple(kind(s) for s in items)
    return raw.strip()


def _format(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ", ".join(_format(v) for v in value)
    return str(value)


def _key_line(lines, section, key):
    current = None
    for no, line in enumerate(lines, 1):
        s = line.strip()
        if s.startswith("[") and s.endswith("]"):
            current = s[1:-1].strip()
        elif current == section and s.split("=", 1)[0].split(":", 1)[0].strip() == key:
            return no
    return None


def load_config(text, validate_ranges=True):
    """Parse and validate a configuration document.

    Raises:
        ConfigError: listing every parse, type and range problem.
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError([f"parse error: {exc}"]) from None

    lines = text.splitlines()
    problems = []
    built = {}
    for name in parser.sections():
        if name not in SECTIONS:
            line = next((no for no, ln in enumerate(lines, 1) if ln.strip() == f"[{name}]"), "?")
            problems.append(f"line {line}: unknown section [{name}]")
    for name, cls in SECTIONS.items():
        defaults = cls()
        values = {}
        if parser.has_section(name):
            known = {f.name for f in fields(cls)}
            for key, raw in parser.items(name):
                line = _key_line(lines, name, key)
                where = f"line {line}: " if line else ""
                if key not in known:
                    problems.append(f"{where}unknown key '{key}' in [{name}]")
                    continue
                try:
                    values[key] = _convert(raw, getattr(defaults, key))
                except ValueError as exc:
                    problems.append(f"{where}[{name}] {key}: {exc}")
        built[name] = replace(defaults, **values)
    if problems:
        raise ConfigError(problems)
    config = RunConfig(**built)
    if validate_ranges:
        validate(config)
    return config


def validate(config, mode=None):
    """Check all numeric ranges; ``mode`` overrides ``params.mode`` for the
    Sobolev index requirements.

    Raises:
        ConfigError: listing every violated constraint.
    """
    g, p, m, s = config.grid, config.params, config.monitors, config.stepping
    mode = mode or p.mode
    problems = []

    def need(cond, msg):
        if not cond:
            problems.append(msg)

    need(g.d_h in (1, 2), f"grid.d_h = {g.d_h}: must be 1 or 2")
    for key in ("n_h", "n_y"):
        n = getattr(g, key)
        need(n >= 4 and n % 2 == 0, f"grid.{key} = {n}: must be even and >= 4")
    need(g.l_h > 0, f"grid.l_h = {g.l_h}: must be > 0")

    need(mode in MODES, f"params.mode = {mode!r}: must be one of {', '.join(MODES)}")
    need(0 < p.theta < 1, f"params.theta = {p.theta}: must lie in the open interval (0, 1)")
    need(-1 <= p.b <= 1, f"params.b = {p.b}: must satisfy |b| <= 1")
    need(p.eps > 0, f"params.eps = {p.eps}: must be > 0")
    need(len(p.eps_list) >= 2, f"params.eps_list: needs at least 2 values, got {len(p.eps_list)}")
    need(all(e > 0 for e in p.eps_list), "params.eps_list: all values must be > 0")
    need(
        all(x > y for x, y in zip(p.eps_list, p.eps_list[1:])),
        "params.eps_list: values must be strictly decreasing",
    )
    need(np.isfinite(p.delta) and p.delta >= 0, f"params.delta = {p.delta}: must be finite and >= 0")
    need(p.radius_a > 0, f"params.radius_a = {p.radius_a}: must be > 0")
    need(p.seed >= 0, f"params.seed = {p.seed}: must be >= 0")
    if mode in _INDEX_BOUNDS:
        lo1, lo2 = _INDEX_BOUNDS[mode]
        need(p.s1 > lo1, f"params.s1 = {p.s1}: mode '{mode}' requires s1 > {lo1}")
        need(p.s2 > lo2, f"params.s2 = {p.s2}: mode '{mode}' requires s2 > {lo2}")

    need(0 < m.kappa < 0.5, f"monitors.kappa = {m.kappa}: must lie in (0, 1/2)")
    for key in ("lam", "lam_tilde", "eps1", "big_c1", "small_c1", "eps0", "energy_bound", "ceiling"):
        val = getattr(m, key)
        need(val > 0, f"monitors.{key} = {val}: must be > 0")
    need(m.lemma_samples >= 1, f"monitors.lemma_samples = {m.lemma_samples}: must be >= 1")
    need(
        len(m.lemma_n_list) >= 1 and all(n >= 4 and n % 2 == 0 for n in m.lemma_n_list),
        "monitors.lemma_n_list: entries must be even and >= 4",
    )

    need(s.dt > 0, f"stepping.dt = {s.dt}: must be > 0")
    need(s.t_final > 0, f"stepping.t_final = {s.t_final}: must be > 0")
    if s.dt > 0 and s.t_final > 0:
        n = s.t_final / s.dt
        need(abs(n - round(n)) < 1e-9 * max(1.0, n), "stepping.t_final must be an integer multiple of stepping.dt")
    need(s.output_every >= 1, f"stepping.output_every = {s.output_every}: must be >= 1")
    need(s.workers >= 1, f"stepping.workers = {s.workers}: must be >= 1")
    need(len(s.dt_list) >= 3, "stepping.dt_list: needs at least 3 values")
    need(all(d > 0 for d in s.dt_list), "stepping.dt_list: all values must be > 0")
    need(
        all(abs(x / y - 2.0) < 1e-9 for x, y in zip(s.dt_list, s.dt_list[1:])),
        "stepping.dt_list: must be a halving sequence",
    )
    if s.t_final > 0:
        need(
            all(abs(s.t_final / d - round(s.t_final / d)) < 1e-9 * s.t_final / d for d in s.dt_list if d > 0),
            "stepping.t_final must be an integer multiple of every dt_list entry",
        )

    if problems:
        raise ConfigError(problems)
    return config


def serialize(config):
    """Render a configuration so that ``load_config(serialize(c)) == c``."""
    out = []
    for name in SECTIONS:
        out.append(f"[{name}]")
        section = getattr(config, name)
        for f in fields(section):
            out.append(f"{f.name} = {_format(getattr(section, f.name))}")
        out.append("")
    return "\n".join(out)


def as_dict(config):
    return {name: {f.name: getattr(getattr(config, name), f.name) for f in fields(getattr(config, name))} for name in SECTIONS}
