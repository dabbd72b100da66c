"""Run configuration: YAML in, validated dataclasses out.

Parsing is strict: unknown keys and wrong types raise :class:`ConfigError`
naming the offending key path, e.g. ``drive.amplitude_s``.
"""
from __future__ import annotations

import copy
import dataclasses
import math
import typing
from dataclasses import dataclass, field

import numpy as np
import yaml

from .errors import ConfigError, DomainError
from .lattice import (AR40_MASS_U, ATOMIC_MASS_KG, CustomFourier, DriveSpec, Exact, LatticeParams, Linearized,
                      SawtoothFourier, Sine, UnitSystem)
from .stationary import PlaneWaveBasis


@dataclass
class UnitsConfig:
    wavelength_nm: float = 811.775
    mass_u: float = AR40_MASS_U

    def build(self):
        return UnitSystem(self.wavelength_nm * 1e-9, self.mass_u * ATOMIC_MASS_KG)


@dataclass
class LatticeConfig:
    v1: float = 6.25
    v2: float = 5.40
    phi_s: float = 0.0


@dataclass
class DriveConfig:
    waveform: str = "sine"  # sine | sawtooth | custom
    harmonics: int = 5
    terms: list = field(default_factory=list)  # custom: [[harmonic, amplitude, phase], ...]
    amplitude_s: float = 0.0
    omega_d: typing.Optional[float] = None  # hbar*omega/E_r
    frequency_hz: typing.Optional[float] = None  # needs units
    frequency_reading: str = "nu"  # nu: omega = 2 pi f ; angular: omega = f in rad/s
    phase: float = 0.0
    form: str = "linearized"  # linearized | exact
    epsilon: typing.Optional[float] = None
    cell_index: int = 148


@dataclass
class SolverConfig:
    n_max: int = 32
    n_states_kept: int = 15
    quasi_tol: float = 1e-8
    state_tol: float = 1e-6
    m_fourier: int = 12
    weight_floor: float = 1e-3
    multistate_ratio: float = 0.5
    max_steps: int = 131072


@dataclass
class GridConfig:
    start: float = 0.0
    stop: float = 1.0
    num: int = 11


@dataclass
class ScanConfig:
    axis: str = "omega_d"
    grid: typing.Any = None  # explicit list, or {start, stop, num}
    crossing_resolution: float = 1e-4

    def values(self):
        if self.grid is None:
            raise ConfigError("scan.grid", "missing")
        if isinstance(self.grid, GridConfig):
            if self.grid.num < 1:
                raise ConfigError("scan.grid.num", "must be at least 1")
            return [float(v) for v in np.linspace(self.grid.start, self.grid.stop, self.grid.num)]
        return [float(v) for v in self.grid]


@dataclass
class DynamicsConfig:
    t_final: typing.Optional[float] = None  # hbar/E_r
    tunneling_periods: typing.Optional[float] = None  # multiples of 2 pi hbar / Delta_12
    sample_dt: typing.Optional[float] = None  # default: one sample per drive period
    samples_per_period: int = 1
    readout: str = "projection"  # projection | spatial
    truncated: bool = False
    initial: str = "right"  # right | left
    fit_floor: float = 0.02
    fit_stroboscopic: bool = True


@dataclass
class VariantConfig:
    name: str = ""
    waveform: typing.Optional[str] = None  # none = undriven
    harmonics: typing.Optional[int] = None
    amplitude_s: typing.Optional[float] = None
    phi_s: typing.Optional[float] = None


@dataclass
class SymmetryConfig:
    variants: typing.List[VariantConfig] = field(default_factory=list)


@dataclass
class OutputConfig:
    directory: str = "out"
    plots: bool = False


@dataclass
class RunConfig:
    units: UnitsConfig = field(default_factory=UnitsConfig)
    lattice: LatticeConfig = field(default_factory=LatticeConfig)
    drive: DriveConfig = field(default_factory=DriveConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    scan: typing.Optional[ScanConfig] = None
    dynamics: DynamicsConfig = field(default_factory=DynamicsConfig)
    symmetry: SymmetryConfig = field(default_factory=SymmetryConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    description: str = ""

    # -- builders ---------------------------------------------------------

    def lattice_params(self):
        return _domain(lambda: LatticeParams(self.lattice.v1, self.lattice.v2, self.lattice.phi_s), "lattice")

    def basis(self):
        return _domain(lambda: PlaneWaveBasis(self.solver.n_max), "solver.n_max")

    def omega_d(self):
        d = self.drive
        if d.omega_d is not None and d.frequency_hz is not None:
            raise ConfigError("drive", "give either omega_d or frequency_hz, not both")
        if d.omega_d is not None:
            return d.omega_d
        if d.frequency_hz is None:
            raise ConfigError("drive.omega_d", "missing")
        units = self.units.build()
        if d.frequency_reading == "nu":
            return units.omega_from_hz(d.frequency_hz)
        if d.frequency_reading == "angular":
            return units.omega_from_rad_per_s(d.frequency_hz)
        raise ConfigError("drive.frequency_reading", f"expected nu or angular, got {d.frequency_reading!r}")

    def waveform(self, name=None, harmonics=None):
        d = self.drive
        name = d.waveform if name is None else name
        harmonics = d.harmonics if harmonics is None else harmonics
        if name == "sine":
            return Sine()
        if name == "sawtooth":
            return _domain(lambda: SawtoothFourier(harmonics), "drive.harmonics")
        if name == "custom":
            return _domain(lambda: CustomFourier(tuple(tuple(t) for t in d.terms)), "drive.terms")
        raise ConfigError("drive.waveform", f"expected sine, sawtooth or custom, got {name!r}")

    def drive_spec(self):
        return _domain(lambda: DriveSpec(self.waveform(), self.drive.amplitude_s, self.omega_d(), self.drive.phase),
                       "drive")

    def drive_form(self):
        if self.drive.form == "linearized":
            return Linearized()
        if self.drive.form == "exact":
            return Exact(self.drive.epsilon, self.drive.cell_index)
        raise ConfigError("drive.form", f"expected linearized or exact, got {self.drive.form!r}")


def _domain(build, path):
    try:
        return build()
    except DomainError as exc:
        raise ConfigError(path, str(exc)) from exc


# ---------------------------------------------------------------------------
# strict parsing


def _is_optional(tp):
    return typing.get_origin(tp) is typing.Union and type(None) in typing.get_args(tp)


def _convert(tp, value, path):
    if tp is typing.Any:
        return value
    if _is_optional(tp):
        if value is None:
            return None
        inner = [a for a in typing.get_args(tp) if a is not type(None)][0]
        return _convert(inner, value, path)
    origin = typing.get_origin(tp)
    if origin in (list, typing.List):
        if not isinstance(value, list):
            raise ConfigError(path, f"expected a list, got {type(value).__name__}")
        (inner,) = typing.get_args(tp) or (typing.Any,)
        return [_convert(inner, v, f"{path}[{i}]") for i, v in enumerate(value)]
    if tp is list:
        if not isinstance(value, list):
            raise ConfigError(path, f"expected a list, got {type(value).__name__}")
        return value
    if dataclasses.is_dataclass(tp):
        return _from_dict(tp, value, path)
    if tp is bool:
        if not isinstance(value, bool):
            raise ConfigError(path, f"expected true/false, got {value!r}")
        return value
    if tp is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(path, f"expected an integer, got {value!r}")
        return value
    if tp is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(path, f"expected a number, got {value!r}")
        if not math.isfinite(value):
            raise ConfigError(path, "must be finite")
        return float(value)
    if tp is str:
        if not isinstance(value, str):
            raise ConfigError(path, f"expected a string, got {value!r}")
        return value
    raise TypeError(f"unsupported config type {tp!r}")


def _from_dict(cls, data, path=""):
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(path, f"expected a mapping, got {type(data).__name__}")
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        key = f"{path}.{unknown[0]}" if path else str(unknown[0])
        raise ConfigError(key, "unknown key")
    kwargs = {}
    for name, value in data.items():
        sub = f"{path}.{name}" if path else name
        if cls is ScanConfig and name == "grid" and isinstance(value, dict):
            kwargs[name] = _from_dict(GridConfig, value, sub)
        elif cls is ScanConfig and name == "grid":
            kwargs[name] = _convert(typing.List[float], value, sub)
        else:
            kwargs[name] = _convert(hints[name], value, sub)
    return cls(**kwargs)


def deep_merge(base, override):
    out = copy.deepcopy(base)
    for key, value in (override or {}).items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = deep_merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def parse_config(data):
    cfg = _from_dict(RunConfig, data)
    _validate(cfg)
    return cfg


def _validate(cfg):
    cfg.lattice_params()
    cfg.basis()
    s = cfg.solver
    if not 2 <= s.n_states_kept <= cfg.basis().dim:
        raise ConfigError("solver.n_states_kept", f"must lie in [2, {cfg.basis().dim}]")
    for name in ("quasi_tol", "state_tol", "weight_floor", "multistate_ratio"):
        if not getattr(s, name) > 0:
            raise ConfigError(f"solver.{name}", "must be positive")
    if s.m_fourier < 1:
        raise ConfigError("solver.m_fourier", "must be at least 1")
    if cfg.dynamics.readout not in ("projection", "spatial"):
        raise ConfigError("dynamics.readout", f"expected projection or spatial, got {cfg.dynamics.readout!r}")
    if cfg.dynamics.initial not in ("right", "left"):
        raise ConfigError("dynamics.initial", f"expected right or left, got {cfg.dynamics.initial!r}")
    if cfg.scan is not None and cfg.scan.axis not in ("omega_d", "amplitude_s"):
        raise ConfigError("scan.axis", f"expected omega_d or amplitude_s, got {cfg.scan.axis!r}")


def load_config(path=None, preset=None):
    """Read a YAML file, optionally layered over a named preset."""
    from .presets import preset_dict

    data = preset_dict(preset) if preset else {}
    if path is not None:
        try:
            with open(path) as fh:
                loaded = yaml.safe_load(fh)
        except OSError as exc:
            raise ConfigError("", f"cannot read config {path}: {exc}") from exc
        except yaml.YAMLError as exc:
            raise ConfigError("", f"invalid YAML in {path}: {exc}") from exc
        if loaded is not None and not isinstance(loaded, dict):
            raise ConfigError("", "top level of the config must be a mapping")
        data = deep_merge(data, loaded or {})
    return parse_config(data)
