"""Run configuration: INI-style ``key = value`` files with sections.

Schema (every key optional unless noted)::

    [scenario]   kind = landau | two_stream | custom ; eps ; k ; v0
    [grid]       n_f ; n_chi ; lv
    [time]       tau ; t_final
    [method]     backend = nufi | hybrid | sl_cubic | sl_linear ; zero_field
    [remap]      policy = fixed | adaptive | never ; n_remap ; delta
    [interp]     field ; map ; sl            (cubic_spline | linear | lagrange<m>)
    [output]     directory ; diag_every ; snapshot_every
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, fields, replace
from pathlib import Path

from . import phasegrid
from .flowmap import RemapPolicy
from .interp import Scheme
from .phasegrid import InitialCondition, PhaseGrid

BACKENDS = ("nufi", "hybrid", "sl_cubic", "sl_linear")

SCENARIO_DEFAULTS = {
    phasegrid.LANDAU: dict(eps=0.01, k=0.5, v0=0.0, lv=16.0, n_f=256, n_chi=128, tau=0.1, t_final=40.0),
    phasegrid.TWO_STREAM: dict(eps=0.05, k=0.2, v0=3.0, lv=20.0, n_f=1024, n_chi=64, tau=0.2, t_final=100.0),
    phasegrid.CUSTOM: dict(eps=0.0, k=0.5, v0=0.0, lv=16.0, n_f=256, n_chi=128, tau=0.1, t_final=40.0),
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    scenario: str = phasegrid.LANDAU
    eps: float = 0.01
    k: float = 0.5
    v0: float = 0.0
    backend: str = "hybrid"
    n_f: int = 256
    n_chi: int = 128
    lv: float = 16.0
    tau: float = 0.1
    t_final: float = 40.0
    remap: str = "fixed"
    n_remap: int = 20
    delta: float = 1e-2
    field_interp: str = "cubic_spline"
    map_interp: str = "lagrange3"
    sl_interp: str = "cubic_spline"
    output: str = ""
    diag_every: int = 1
    snapshot_every: int = 0
    zero_field: bool = False

    def __post_init__(self):
        _check(self.scenario in SCENARIO_DEFAULTS, "scenario.kind", f"unknown scenario {self.scenario!r}")
        _check(self.backend in BACKENDS, "method.backend", f"backend must be one of {BACKENDS}, got {self.backend!r}")
        _check(self.remap in ("fixed", "adaptive", "never"), "remap.policy",
               f"must be fixed, adaptive or never, got {self.remap!r}")
        _check(self.n_f >= 4, "grid.n_f", f"must be >= 4, got {self.n_f}")
        _check(self.n_chi >= 4, "grid.n_chi", f"must be >= 4, got {self.n_chi}")
        _check(self.n_f % self.n_chi == 0, "grid.n_chi",
               f"map grid {self.n_chi} must divide the sample grid {self.n_f}")
        _check(self.lv > 0 and math.isfinite(self.lv), "grid.lv", f"must be positive, got {self.lv}")
        _check(self.tau > 0 and math.isfinite(self.tau), "time.tau", f"must be positive, got {self.tau}")
        _check(self.t_final >= 0, "time.t_final", f"must be non-negative, got {self.t_final}")
        steps = self.t_final / self.tau
        _check(abs(steps - round(steps)) < 1e-9 * max(1.0, steps), "time.t_final",
               f"{self.t_final} is not an integer multiple of tau={self.tau}")
        _check(self.diag_every >= 1, "output.diag_every", f"must be >= 1, got {self.diag_every}")
        _check(self.snapshot_every >= 0, "output.snapshot_every", f"must be >= 0, got {self.snapshot_every}")
        for key, text in (("interp.field", self.field_interp), ("interp.map", self.map_interp),
                          ("interp.sl", self.sl_interp)):
            try:
                Scheme.parse(text)
            except ValueError as err:
                raise ConfigError(f"{key}: {err}") from None
        for key, attr in (("scenario", "ic"), ("remap", "policy")):
            try:
                getattr(self, attr)
            except ValueError as err:
                raise ConfigError(f"{key}: {err}") from None

    @property
    def steps(self) -> int:
        return int(round(self.t_final / self.tau))

    @property
    def ic(self) -> InitialCondition:
        return InitialCondition(self.scenario, self.eps, self.k, self.v0)

    @property
    def grid_f(self) -> PhaseGrid:
        return PhaseGrid(self.ic.Lx, self.lv, self.n_f, self.n_f)

    @property
    def grid_chi(self) -> PhaseGrid:
        return PhaseGrid(self.ic.Lx, self.lv, self.n_chi, self.n_chi)

    @property
    def policy(self) -> RemapPolicy:
        kind = "never" if self.backend == "nufi" else self.remap
        return RemapPolicy(kind, self.n_remap, self.delta)

    def schemes(self) -> dict[str, Scheme]:
        return {k: Scheme.parse(getattr(self, f"{k}_interp")) for k in ("field", "map", "sl")}

    def with_(self, **changes) -> "RunConfig":
        return replace(self, **changes)


def _check(ok, key, msg):
    if not ok:
        raise ConfigError(f"{key}: {msg}")


def default_config(scenario: str = phasegrid.LANDAU, **changes) -> RunConfig:
    if scenario not in SCENARIO_DEFAULTS:
        raise ConfigError(f"scenario.kind: unknown scenario {scenario!r}")
    return RunConfig(scenario=scenario, **{**SCENARIO_DEFAULTS[scenario], **changes})


# section.key -> (RunConfig field, type)
_KEYS = {
    "scenario.kind": ("scenario", str),
    "scenario.eps": ("eps", float),
    "scenario.k": ("k", float),
    "scenario.v0": ("v0", float),
    "grid.n_f": ("n_f", int),
    "grid.n_chi": ("n_chi", int),
    "grid.lv": ("lv", float),
    "time.tau": ("tau", float),
    "time.t_final": ("t_final", float),
    "method.backend": ("backend", str),
    "method.zero_field": ("zero_field", bool),
    "remap.policy": ("remap", str),
    "remap.n_remap": ("n_remap", int),
    "remap.delta": ("delta", float),
    "interp.field": ("field_interp", str),
    "interp.map": ("map_interp", str),
    "interp.sl": ("sl_interp", str),
    "output.directory": ("output", str),
    "output.diag_every": ("diag_every", int),
    "output.snapshot_every": ("snapshot_every", int),
}
assert {v[0] for v in _KEYS.values()} == {f.name for f in fields(RunConfig)}


def _convert(key, typ, raw: str):
    raw = raw.strip()
    if typ is str:
        return raw
    if typ is bool:
        low = raw.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{key}: expected a boolean, got {raw!r}")
    if typ is int and raw.lower() in ("inf", "never", "none"):
        return None
    try:
        return typ(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected {typ.__name__}, got {raw!r}") from None


def parse_text(text: str, source: str = "<string>") -> RunConfig:
    cp = configparser.ConfigParser(interpolation=None, default_section="__none__")
    try:
        cp.read_string(text, source=source)
    except configparser.Error as err:
        raise ConfigError(f"{source}: {err}") from None
    values = {}
    for section in cp.sections():
        for name, raw in cp.items(section):
            key = f"{section}.{name}"
            if key not in _KEYS:
                raise ConfigError(f"{key}: unknown key")
            attr, typ = _KEYS[key]
            values[attr] = _convert(key, typ, raw)
    if values.get("n_remap", 0) is None:
        # n_remap = inf is shorthand for never remapping
        values.pop("n_remap")
        values["remap"] = "never"
    scenario = values.pop("scenario", phasegrid.LANDAU)
    return default_config(scenario, **values)


def parse_config(path) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"{path}: no such config file")
    return parse_text(path.read_text(), str(path))


def dump_config(cfg: RunConfig) -> str:
    sections: dict[str, list[str]] = {}
    for key, (attr, _) in _KEYS.items():
        sec, name = key.split(".")
        sections.setdefault(sec, []).append(f"{name} = {getattr(cfg, attr)}")
    return "\n".join(f"[{s}]\n" + "\n".join(lines) + "\n" for s, lines in sections.items())
