"""Two-mode (lowest doublet) approximation of the driven double well.

Reduced to the doublet, the drive ``S f(t) sin(kx)`` modulates the well
asymmetry by ``+-S x12 f(t)``.  For a sine drive the tunneling term is then
renormalized by ``J0(2 S x12 / hbar omega)``, since the two wells move in
opposite directions and the bias swing is twice the single-well shift.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DomainError

# factor between S*x12/(hbar*omega) and the Bessel argument, see module docstring
BIAS_FACTOR = 2.0


@dataclass(frozen=True)
class TwoModeParams:
    delta_12: float
    x12: float

    def __post_init__(self):
        if self.delta_12 < 0 or self.x12 < 0:
            raise DomainError("delta_12 and x12 must be nonnegative")

    @classmethod
    def from_doublet(cls, doublet):
        return cls(doublet.delta_12, doublet.x12)


def bessel_j0(z):
    return special.j0(z)


def first_j0_zero():
    return float(special.jn_zeros(0, 1)[0])


def bessel_argument(tm, amplitude_s, omega_d):
    if not omega_d > 0:
        raise DomainError("omega_d must be positive")
    return BIAS_FACTOR * np.asarray(amplitude_s, dtype=float) * tm.x12 / omega_d


def signed_two_mode_splitting(tm, amplitude_s, omega_d):
    return bessel_j0(bessel_argument(tm, amplitude_s, omega_d)) * tm.delta_12


def two_mode_splitting(tm, amplitude_s, omega_d):
    """Effective splitting ``|J0(2 S x12 / hbar omega)| * Delta_12``."""
    return np.abs(signed_two_mode_splitting(tm, amplitude_s, omega_d))


def cdt_amplitude(tm, omega_d):
    """Smallest drive amplitude at which the two-mode splitting vanishes."""
    if not tm.x12 > 0:
        raise DomainError("x12 = 0: the drive does not couple the doublet")
    if not omega_d > 0:
        raise DomainError("omega_d must be positive")
    return first_j0_zero() * omega_d / (BIAS_FACTOR * tm.x12)
