"""Independent reference computations used by the tests.

None of these import the package; each solves the same physics by a
different route (position grid, power series, closed form, literal constants).
"""
import math

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh

# CODATA 2018, typed out on purpose
PLANCK_H = 6.62607015e-34
ATOMIC_MASS_UNIT = 1.66053906660e-27
AR40_MASS_U = 39.9623831238


def potential(v1, v2, phi_s, x):
    return v1 * np.cos(x) ** 2 + v2 * np.cos(0.5 * x + 0.5 * phi_s) ** 2


def fd_hamiltonian(v1, v2, phi_s=0.0, n_points=4096):
    """Periodic second-order finite differences for -d^2/dx^2 + V on [-pi, pi)."""
    h = 2 * math.pi / n_points
    x = -math.pi + h * np.arange(n_points)
    main = 2.0 / h**2 + potential(v1, v2, phi_s, x)
    off = -np.ones(n_points) / h**2
    lap = sp.diags([off[:-1], main, off[:-1]], [-1, 0, 1], format="lil")
    lap[0, n_points - 1] = lap[n_points - 1, 0] = -1.0 / h**2
    return x, lap.tocsc()


def fd_spectrum(v1, v2, phi_s=0.0, k=6, n_points=4096, vectors=False):
    x, h = fd_hamiltonian(v1, v2, phi_s, n_points)
    vmin = float(potential(v1, v2, phi_s, x).min())
    vals, vecs = eigsh(h, k=k, sigma=vmin - 1.0, which="LM")
    order = np.argsort(vals)
    vals, vecs = vals[order], vecs[:, order]
    if not vectors:
        return vals
    dx = 2 * math.pi / n_points
    return x, vals, vecs / math.sqrt(dx)  # normalized to int |psi|^2 dx = 1


def fd_doublet_geometry(v1, v2, n_points=4096):
    """x12 = <R|sin x|R> and the right-half-cell weight of R, from grid eigenvectors."""
    x, vals, vecs = fd_spectrum(v1, v2, 0.0, k=2, n_points=n_points, vectors=True)
    dx = 2 * math.pi / n_points
    p1, p2 = vecs[:, 0], vecs[:, 1]
    right = (p1 + p2) / math.sqrt(2)
    if np.sum(right[x > 0] ** 2) < np.sum(right[x < 0] ** 2):
        right = (p1 - p2) / math.sqrt(2)
    x12 = float(np.sum(right**2 * np.sin(x)) * dx)
    half = float(np.sum(right[(x > 0) & (x < math.pi)] ** 2) * dx)
    return vals[1] - vals[0], x12, half


def j0_series(z, terms=80):
    """J0 from its power series sum (-1)^m (z/2)^(2m) / (m!)^2."""
    z = float(z)
    total, term = 0.0, 1.0
    q = -(z * z) / 4.0
    for m in range(terms):
        if m:
            term *= q / (m * m)
        total += term
    return total


def j0_first_zero(lo=2.0, hi=3.0, tol=1e-13):
    """Bisection on the series J0."""
    flo = j0_series(lo)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = j0_series(mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def rabi_p_left(t, delta):
    """Two-level tunneling from |R>: population of |L>."""
    return np.sin(0.5 * delta * np.asarray(t)) ** 2


def recoil_hz(wavelength_m, mass_u=AR40_MASS_U):
    mass = mass_u * ATOMIC_MASS_UNIT
    return PLANCK_H / (2 * mass * wavelength_m**2)
