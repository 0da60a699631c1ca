"""Sectioned key=value run configuration with exhaustive validation."""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field

from .fields import Grid2D, RadialGrid
from .functional import DELTA_REG, PotentialSpec
from .nonlinearity import NonlinearitySpec
from .solver import SolverConfig

__all__ = ["ConfigError", "OutputConfig", "RunConfig", "DEFAULT_CONFIG_TEXT", "parse_config",
           "load_config"]

DEFAULT_CONFIG_TEXT = """\
[problem]
p = 1.5
a_inf = 1.0
b = 0.0
sigma = 2.0
constant_potential = false

[nonlinearity]
family = power_exp
lambda = 1.0
alpha0 = 1.0
qf = 5.0
theta = 0.0
M0 = 1.0
t0 = 1.0

[discretization]
L = 12.0
n = 128
radial_m = 131072
r_max = 2.0

[solver]
tol = 1e-5
max_iter = 5000
eta0 = 0.1
armijo = 1e-4
seed_offset = 0.0, 0.0
delta_reg = 1e-12

[output]
report = -
fields_dir = fields
verbosity = 1
"""

REQUIRED = {"problem": ("p", "a_inf")}

# section -> key -> (kind, default); defaults for required keys are None
SCHEMA = {
    "problem": {"p": ("float", None), "a_inf": ("float", None), "b": ("float", 0.0),
                "sigma": ("float", 2.0), "constant_potential": ("bool", False)},
    "nonlinearity": {"family": ("str", "power_exp"), "lambda": ("float", 1.0),
                     "alpha0": ("float", 1.0), "qf": ("float", 5.0), "theta": ("float", 0.0),
                     "M0": ("float", 1.0), "t0": ("float", 1.0), "table_t": ("floats", None),
                     "table_f": ("floats", None)},
    "discretization": {"L": ("float", 12.0), "n": ("int", 128), "radial_m": ("int", 131072),
                       "r_max": ("float", 2.0)},
    "solver": {"tol": ("float", 1e-5), "max_iter": ("int", 5000), "eta0": ("float", 0.1),
               "armijo": ("float", 1e-4), "seed_offset": ("floats", (0.0, 0.0)),
               "delta_reg": ("float", DELTA_REG)},
    "output": {"report": ("str", "-"), "fields_dir": ("str", "fields"), "verbosity": ("int", 1)},
}


class ConfigError(ValueError):
    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.errors))


@dataclass(frozen=True)
class OutputConfig:
    report: str = "-"
    fields_dir: str = "fields"
    verbosity: int = 1


@dataclass(frozen=True)
class RunConfig:
    p: float
    potential: PotentialSpec
    nonlinearity: NonlinearitySpec
    grid: Grid2D
    radial: RadialGrid
    solver: SolverConfig
    output: OutputConfig = field(default_factory=OutputConfig)

    def to_dict(self) -> dict:
        nl = self.nonlinearity
        return {
            "problem": {"p": self.p, "a_inf": self.potential.a_inf, "b": self.potential.b,
                        "sigma": self.potential.sigma,
                        "constant_potential": self.potential.constant_mode},
            "nonlinearity": {"family": nl.family, "lambda": nl.lam, "alpha0": nl.alpha0,
                             "qf": nl.qf, "theta": nl.theta, "M0": nl.M0, "t0": nl.t0},
            "discretization": {"L": self.grid.half_width, "n": self.grid.n,
                               "radial_m": self.radial.m, "r_max": self.radial.r_max},
            "solver": {"tol": self.solver.tol, "max_iter": self.solver.max_iter,
                       "eta0": self.solver.eta0, "armijo": self.solver.armijo,
                       "seed_offset": list(self.solver.seed_offset),
                       "delta_reg": self.solver.delta_reg},
            "output": {"report": self.output.report, "fields_dir": self.output.fields_dir,
                       "verbosity": self.output.verbosity},
        }


def _convert(kind, raw, where, errs):
    raw = raw.strip()
    try:
        if kind == "float":
            v = float(raw)
            if not math.isfinite(v):
                raise ValueError
            return v
        if kind == "int":
            return int(raw)
        if kind == "bool":
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError
        if kind == "floats":
            return tuple(float(x) for x in raw.replace(",", " ").split())
        return raw
    except ValueError:
        errs.append(f"{where}: cannot read {raw!r} as {kind}")
        return None


def _read_sections(text: str, errs) -> dict:
    cp = configparser.ConfigParser(interpolation=None, strict=True)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        errs.append(f"syntax: {exc}".splitlines()[0])
        return {}
    return {s: dict(cp.items(s)) for s in cp.sections()}


def _error_lists(fn, errs, prefix):
    try:
        return fn()
    except ValueError as exc:
        errs.extend(f"{prefix}: {m.strip()}" for m in str(exc).split(";"))
        return None


def parse_config(text: str, overrides: dict | None = None) -> RunConfig:
    """Validate ``text`` (plus ``{(section, key): value}`` overrides).

    Raises :class:`ConfigError` carrying every violation found.
    """
    errs: list = []
    sections = _read_sections(text, errs)
    for (sec, key), val in (overrides or {}).items():
        sections.setdefault(sec, {})[key] = str(val)
    vals: dict = {}
    for sec, keys in sections.items():
        if sec not in SCHEMA:
            errs.append(f"unknown section [{sec}]")
            continue
        for key, raw in keys.items():
            if key not in SCHEMA[sec]:
                errs.append(f"[{sec}] unknown key {key!r}")
                continue
            v = _convert(SCHEMA[sec][key][0], raw, f"[{sec}] {key}", errs)
            if v is not None:
                vals[(sec, key)] = v
    for sec, keys in REQUIRED.items():
        for key in keys:
            if (sec, key) not in vals and key not in sections.get(sec, {}):
                errs.append(f"[{sec}] missing required key {key!r}")

    def get(sec, key):
        return vals.get((sec, key), SCHEMA[sec][key][1])

    p = get("problem", "p")
    if p is not None and not 1.0 < p < 2.0:
        errs.append(f"[problem] p must lie in (1,2), got {p!r}")
    pot = None
    if get("problem", "a_inf") is not None:
        pot = _error_lists(lambda: PotentialSpec(get("problem", "a_inf"), get("problem", "b"),
                                                 get("problem", "sigma"),
                                                 get("problem", "constant_potential")),
                           errs, "[problem]")
    nl_kw = dict(family=get("nonlinearity", "family"), lam=get("nonlinearity", "lambda"),
                 alpha0=get("nonlinearity", "alpha0"), qf=get("nonlinearity", "qf"),
                 theta=get("nonlinearity", "theta"), M0=get("nonlinearity", "M0"),
                 t0=get("nonlinearity", "t0"), table_t=get("nonlinearity", "table_t"),
                 table_f=get("nonlinearity", "table_f"))
    if nl_kw["family"] == "callable":
        errs.append("[nonlinearity] family 'callable' is only available from Python")
        nl = None
    else:
        nl = _error_lists(lambda: NonlinearitySpec(**nl_kw), errs, "[nonlinearity]")
    grid = _error_lists(lambda: Grid2D(get("discretization", "L"), get("discretization", "n")),
                        errs, "[discretization]")
    radial = _error_lists(lambda: RadialGrid(get("discretization", "r_max"),
                                             get("discretization", "radial_m")),
                          errs, "[discretization]")
    off = get("solver", "seed_offset")
    solver = _error_lists(
        lambda: SolverConfig(half_width=get("discretization", "L"), n=get("discretization", "n"),
                             tol=get("solver", "tol"), max_iter=get("solver", "max_iter"),
                             eta0=get("solver", "eta0"), armijo=get("solver", "armijo"),
                             seed_offset=tuple(off), delta_reg=get("solver", "delta_reg")),
        errs, "[solver]")
    if not get("solver", "delta_reg") > 0:
        errs.append("[solver] delta_reg must be positive")
    verbosity = get("output", "verbosity")
    if verbosity is not None and verbosity < 0:
        errs.append("[output] verbosity must be nonnegative")
    if errs:
        raise ConfigError(errs)
    out = OutputConfig(get("output", "report"), get("output", "fields_dir"), verbosity)
    return RunConfig(p, pot, nl, grid, radial, solver, out)


def load_config(path: str, overrides: dict | None = None) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError([f"cannot read config {path!r}: {exc.strerror}"]) from exc
    return parse_config(text, overrides)
