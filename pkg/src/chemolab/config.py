"""Experiment configuration files.

INI text with one section per block and dotted names for nested blocks::

    [model]
    n = 3
    m = 1.25
    sign = attractive

    [geometry]
    kind = radial
    r_max = 40
    cells = 800

    [initial_data]
    family = gaussian
    mass = 50
    width = 0.3

    [solver]
    t_end = 10

    [outputs]
    directory = out
    p_list = 2, 4

    [sweep]
    workers = 4

    [sweep.axes]
    alpha = 1, 2, 3
    beta = 1, 2

Missing keys take the dataclass defaults.  ``dumps`` writes every field, so
``parse(dumps(cfg)) == cfg``.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from chemolab.diagnostics import SWEEP_AXES
from chemolab.dynamics import SolverConfig
from chemolab.errors import ConfigError
from chemolab.geometry import BoxGrid, RadialMesh
from chemolab.initial import FAMILIES
from chemolab.theory import ModelParams, Sign

GEOMETRY_KINDS = ("radial", "box")


@dataclass(frozen=True)
class GeometrySpec:
    kind: str = "radial"
    r_max: float = 8.0
    cells: int = 128
    extent: float = 8.0
    points_per_axis: int = 32

    def build(self, n: int):
        if self.kind == "radial":
            return RadialMesh(n, self.r_max, self.cells)
        if self.kind == "box":
            return BoxGrid(self.extent, self.points_per_axis, n)
        raise ConfigError(f"geometry kind must be one of {GEOMETRY_KINDS}, got {self.kind!r}")


@dataclass(frozen=True)
class InitialData:
    family: str = "gaussian"
    mass: float = 1.0
    # Gaussian width or ball radius; ignored for uniform data
    width: float = 1.0
    center: tuple[float, ...] | None = None


@dataclass(frozen=True)
class Outputs:
    directory: str = "chemolab_out"
    sample_dt: float | None = None
    p_list: tuple[float, ...] = (2.0,)


@dataclass(frozen=True)
class SweepSpec:
    axes: dict[str, tuple[float, ...]] = field(default_factory=dict)
    workers: int | None = None
    refine: bool = True


@dataclass(frozen=True)
class ExperimentConfig:
    model: ModelParams = field(default_factory=ModelParams)
    geometry: GeometrySpec = field(default_factory=GeometrySpec)
    initial_data: InitialData = field(default_factory=InitialData)
    solver: SolverConfig = field(default_factory=SolverConfig)
    outputs: Outputs = field(default_factory=Outputs)
    sweep: SweepSpec = field(default_factory=SweepSpec)

    def __post_init__(self):
        if self.initial_data.family not in FAMILIES:
            raise ConfigError(f"initial_data.family must be one of {FAMILIES}")
        if not self.initial_data.mass >= 0:
            raise ConfigError("initial_data.mass must be nonnegative")
        if not self.initial_data.width > 0:
            raise ConfigError("initial_data.width must be positive")
        if self.geometry.kind not in GEOMETRY_KINDS:
            raise ConfigError(f"geometry.kind must be one of {GEOMETRY_KINDS}")
        want = "explicit_radial" if self.geometry.kind == "radial" else "semi_implicit_box"
        if self.solver.scheme != want:
            raise ConfigError(f"geometry.kind={self.geometry.kind} needs solver.scheme={want}")
        bad = [k for k in self.sweep.axes if k not in SWEEP_AXES]
        if bad:
            raise ConfigError(f"unsupported sweep axes {bad}; choose from {SWEEP_AXES}")

    def mesh(self):
        return self.geometry.build(self.model.n)

    def solver_config(self) -> SolverConfig:
        """Solver block with the output cadence and p-list folded in."""
        return replace(
            self.solver,
            sample_dt=self.outputs.sample_dt if self.outputs.sample_dt is not None else self.solver.sample_dt,
            p_list=self.outputs.p_list,
        )

    def to_dict(self) -> dict:
        return {name: _section_dict(getattr(self, name)) for name in _SECTIONS}


_SECTIONS = ("model", "geometry", "initial_data", "solver", "outputs", "sweep")
_TYPES = {
    "model": ModelParams,
    "geometry": GeometrySpec,
    "initial_data": InitialData,
    "solver": SolverConfig,
    "outputs": Outputs,
    "sweep": SweepSpec,
}


def _section_dict(obj) -> dict:
    out = {}
    for f in fields(obj):
        v = getattr(obj, f.name)
        if isinstance(v, Sign):
            v = v.value
        elif isinstance(v, tuple):
            v = list(v)
        elif isinstance(v, dict):
            v = {k: list(x) for k, x in v.items()}
        out[f.name] = v
    return out


def _format(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, Sign):
        return v.value
    if isinstance(v, (tuple, list)):
        return ", ".join(_format(x) for x in v)
    return str(v)


def _parse_bool(s: str) -> bool:
    low = s.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {s!r}")


def _parse_floats(s: str) -> tuple[float, ...]:
    return tuple(float(x) for x in s.replace(",", " ").split())


def _parse_value(section: str, key: str, raw: str, default):
    raw = raw.strip()
    if raw.lower() == "none":
        return None
    try:
        if key in ("p_list", "center"):
            return _parse_floats(raw)
        if isinstance(default, bool):
            return _parse_bool(raw)
        if isinstance(default, Sign) or key in ("sign", "family", "kind", "scheme", "directory"):
            return raw
        if isinstance(default, int) or key in ("workers", "n", "cells", "points_per_axis", "pinned_steps", "max_steps"):
            return int(raw)
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key}: cannot parse {raw!r}") from exc


def parse(text: str) -> ExperimentConfig:
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    unknown = [s for s in cp.sections() if s not in _SECTIONS and s != "sweep.axes"]
    if unknown:
        raise ConfigError(f"unknown sections {unknown}")
    blocks = {}
    for name in _SECTIONS:
        cls = _TYPES[name]
        defaults = {f.name: getattr(cls(), f.name) for f in fields(cls)}
        kw = {}
        if cp.has_section(name):
            for key, raw in cp.items(name):
                if key not in defaults or key == "axes":
                    raise ConfigError(f"unknown key [{name}] {key}")
                kw[key] = _parse_value(name, key, raw, defaults[key])
        if name == "sweep" and cp.has_section("sweep.axes"):
            kw["axes"] = {k: _parse_floats(v) for k, v in cp.items("sweep.axes")}
        try:
            blocks[name] = cls(**kw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"[{name}] {type(exc).__name__}: {exc}") from exc
    return ExperimentConfig(**blocks)


def dumps(cfg: ExperimentConfig) -> str:
    lines = []
    for name in _SECTIONS:
        obj = getattr(cfg, name)
        lines.append(f"[{name}]")
        for f in fields(obj):
            if name == "sweep" and f.name == "axes":
                continue
            lines.append(f"{f.name} = {_format(getattr(obj, f.name))}")
        lines.append("")
    if cfg.sweep.axes:
        lines.append("[sweep.axes]")
        for k, vals in cfg.sweep.axes.items():
            lines.append(f"{k} = {_format(vals)}")
        lines.append("")
    return "\n".join(lines)


def load(path: str | os.PathLike) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse(text)
