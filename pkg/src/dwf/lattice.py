"""Units, the static bichromatic double-well potential and its periodic drive.

Everything inside the engine is dimensionless: positions are ``kx`` with
``k = 2*pi/lambda``, energies are in recoil units ``E_r = h^2 / (2 m lambda^2)``,
times in ``hbar/E_r`` and angular frequencies in ``E_r/hbar``.  With this choice
a plane wave ``exp(i n kx)`` has kinetic energy exactly ``n^2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import constants
from scipy.optimize import brentq

from .errors import DomainError

AR40_MASS_U = 39.9623831238
ATOMIC_MASS_KG = constants.physical_constants["atomic mass constant"][0]

# Standing-wave angle of the long lattice (60 degree incidence).
LONG_LATTICE_ANGLE = math.pi / 3


def recoil_energy(wavelength, mass):
    """Return ``(E_r in J, E_r/h in Hz)`` for a lattice of the given wavelength."""
    if not wavelength > 0 or not mass > 0:
        raise DomainError("wavelength and mass must be positive")
    e_r = constants.h**2 / (2.0 * mass * wavelength**2)
    return e_r, e_r / constants.h


@dataclass(frozen=True)
class UnitSystem:
    """Conversion between SI quantities and the engine's recoil units."""

    wavelength: float  # m
    particle_mass: float  # kg

    def __post_init__(self):
        recoil_energy(self.wavelength, self.particle_mass)

    @classmethod
    def argon40(cls, wavelength_nm=811.775):
        return cls(wavelength_nm * 1e-9, AR40_MASS_U * ATOMIC_MASS_KG)

    @property
    def recoil_energy(self):
        return recoil_energy(self.wavelength, self.particle_mass)[0]

    @property
    def recoil_frequency(self):
        """E_r/h in Hz."""
        return recoil_energy(self.wavelength, self.particle_mass)[1]

    @property
    def time_unit(self):
        """hbar/E_r in seconds."""
        return constants.hbar / self.recoil_energy

    def omega_from_hz(self, nu):
        """Dimensionless hbar*omega/E_r for a drive at ordinary frequency ``nu`` (Hz)."""
        return nu / self.recoil_frequency

    def omega_from_rad_per_s(self, omega):
        """Dimensionless hbar*omega/E_r for an angular frequency in rad/s."""
        return omega * self.time_unit


@dataclass(frozen=True)
class LatticeParams:
    """Depths of the lambda/2 lattice (``v1``) and the lambda lattice (``v2``).

    ``phi_s`` shifts the long lattice against the short one; 0 gives a
    symmetric double well.
    """

    v1: float
    v2: float
    phi_s: float = 0.0

    def __post_init__(self):
        if self.v1 < 0 or self.v2 < 0:
            raise DomainError(f"lattice depths must be nonnegative, got v1={self.v1}, v2={self.v2}")


def static_potential(params, x):
    x = np.asarray(x, dtype=float)
    return params.v1 * np.cos(x) ** 2 + params.v2 * np.cos(0.5 * x + 0.5 * params.phi_s) ** 2


# ---------------------------------------------------------------------------
# drive waveforms


@dataclass(frozen=True)
class Sine:
    def components(self):
        return ((1, 1.0, 0.0),)


@lru_cache(maxsize=None)
def _sawtooth_norm(harmonics):
    m = np.arange(1, harmonics + 1)
    coef = (-1.0) ** (m + 1) / m

    def g(tau):
        return np.sum(coef * np.sin(m * tau))

    def dg(tau):
        return np.sum(coef * m * np.cos(m * tau))

    grid = np.linspace(0.0, 2 * math.pi, 64 * harmonics + 1)
    slope = np.array([dg(t) for t in grid])
    best = max(abs(g(t)) for t in grid)
    for a, b, fa, fb in zip(grid[:-1], grid[1:], slope[:-1], slope[1:]):
        if fa == 0.0:
            best = max(best, abs(g(a)))
        elif fa * fb < 0:
            best = max(best, abs(g(brentq(dg, a, b, xtol=1e-15))))
    return 1.0 / best


@dataclass(frozen=True)
class SawtoothFourier:
    """Band-limited sawtooth ``N * sum_m (-1)^(m+1) sin(m tau)/m``, scaled to max|f| = 1."""

    harmonics: int = 5

    def __post_init__(self):
        if self.harmonics < 1:
            raise DomainError("sawtooth needs at least one harmonic")

    def components(self):
        norm = _sawtooth_norm(self.harmonics)
        return tuple((m, norm * (-1.0) ** (m + 1) / m, 0.0) for m in range(1, self.harmonics + 1))


@dataclass(frozen=True)
class CustomFourier:
    """``f(tau) = sum a_h sin(h tau + phase_h)``, used as given (no rescaling)."""

    terms: tuple  # of (harmonic, amplitude, phase)

    def __post_init__(self):
        terms = tuple((int(h), float(a), float(p)) for h, a, p in self.terms)
        if not terms:
            raise DomainError("custom waveform needs at least one harmonic")
        if any(h < 0 for h, _, _ in terms):
            raise DomainError("harmonic indices must be nonnegative")
        object.__setattr__(self, "terms", terms)

    def components(self):
        return self.terms


@dataclass(frozen=True)
class DriveSpec:
    """Periodic drive ``S * f(omega_d * t + phase)``; ``phase`` is the drive phase at t=0."""

    waveform: object = Sine()
    amplitude_s: float = 0.0
    omega_d: float = 1.0
    phase: float = 0.0

    def __post_init__(self):
        if not self.omega_d > 0:
            raise DomainError(f"omega_d must be positive, got {self.omega_d}")
        if self.amplitude_s < 0:
            raise DomainError(f"drive amplitude must be nonnegative, got {self.amplitude_s}")

    @property
    def period(self):
        return 2 * math.pi / self.omega_d

    def fourier(self):
        """Complex coefficients ``{h: c_h}`` with ``f(t) = sum_h c_h exp(i h omega t)``."""
        coeffs = {}
        for h, a, p in self.waveform.components():
            c = a * np.exp(1j * (p + h * self.phase)) / 2j
            coeffs[h] = coeffs.get(h, 0.0) + c
            coeffs[-h] = coeffs.get(-h, 0.0) + np.conj(c)
        return coeffs


def drive_value(spec, t):
    tau = spec.omega_d * np.asarray(t, dtype=float) + spec.phase
    out = np.zeros_like(tau)
    for h, a, p in spec.waveform.components():
        out = out + a * np.sin(h * tau + p)
    return out


def symmetry_defect(spec, samples=2048):
    """RMS of ``f(t + T/2) + f(t)`` over one period; zero iff f is half-period antisymmetric."""
    t = np.arange(samples) * spec.period / samples
    d = drive_value(spec, t + 0.5 * spec.period) + drive_value(spec, t)
    return float(np.sqrt(np.mean(d**2)))


# ---------------------------------------------------------------------------
# drive forms


@dataclass(frozen=True)
class Linearized:
    """Static potential plus ``S sin(kx) f(t)``."""


@dataclass(frozen=True)
class Exact:
    """Angle-modulated long lattice ``V2 cos^2((x0 + kx) cos(pi/3 + eps f(t)))``.

    The double well sits ``cell_index`` long-lattice periods from the mirror
    (``x0 = 2 pi cell_index``), where the static phase is compensated.  With
    ``epsilon=None`` the angle amplitude is inferred from the drive's ``S`` via
    :func:`drive_slope`.
    """

    epsilon: float | None = None
    cell_index: int = 148

    @property
    def offset(self):
        return 2 * math.pi * self.cell_index


def _exact_long_lattice(params, form, epsilon, x, f):
    angle = np.cos(LONG_LATTICE_ANGLE + epsilon * f)
    return params.v2 * np.cos((form.offset + x) * angle + 0.5 * params.phi_s) ** 2


def drive_slope(params, form, samples=4096):
    """dS/d(epsilon): best-fit sin(kx) coefficient of the first-order term of the exact form."""
    x = -math.pi + 2 * math.pi * np.arange(samples) / samples
    h = 1e-7
    dv = (_exact_long_lattice(params, form, h, x, 1.0) - _exact_long_lattice(params, form, -h, x, 1.0)) / (2 * h)
    return float(np.mean(dv * np.sin(x)) * 2.0)


def exact_epsilon(params, form, spec):
    if form.epsilon is not None:
        return form.epsilon
    slope = drive_slope(params, form)
    if slope == 0:
        raise DomainError("exact form has no first-order drive (v2 = 0?)")
    return spec.amplitude_s / slope


def total_potential(params, form, spec, x, t):
    x = np.asarray(x, dtype=float)
    f = drive_value(spec, t)
    if isinstance(form, Linearized):
        return static_potential(params, x) + spec.amplitude_s * np.sin(x) * f
    if isinstance(form, Exact):
        eps = exact_epsilon(params, form, spec)
        return params.v1 * np.cos(x) ** 2 + _exact_long_lattice(params, form, eps, x, f)
    raise TypeError(f"unknown drive form {form!r}")


def parity_defect(params, form, spec, nx=256, nt=64):
    """max |V(-x, t + T/2) - V(x, t)| on a grid covering one cell and one period."""
    x = -math.pi + 2 * math.pi * np.arange(nx) / nx
    t = spec.period * np.arange(nt) / nt
    xx, tt = np.meshgrid(x, t)
    a = total_potential(params, form, spec, -xx, tt + 0.5 * spec.period)
    b = total_potential(params, form, spec, xx, tt)
    return float(np.max(np.abs(a - b)))
