"""Undriven double well in a plane-wave basis and its lowest tunneling doublet.

Only the q=0 Bloch sector of one lambda-periodic cell is solved, so the basis is
``exp(i n kx)`` with integer ``n``; the tunneling splitting is the q=0 gap of
the lowest doublet.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, DomainError
from .lattice import static_potential

RESIDUAL_TOL = 1e-8
GRAM_TOL = 1e-10


@dataclass(frozen=True)
class PlaneWaveBasis:
    n_max: int = 32

    def __post_init__(self):
        if self.n_max < 8:
            raise DomainError(f"n_max must be at least 8, got {self.n_max}")

    @property
    def orders(self):
        return np.arange(-self.n_max, self.n_max + 1)

    @property
    def dim(self):
        return 2 * self.n_max + 1

    def wavefunction(self, coeffs, x):
        """psi(x) normalized so that the integral of |psi|^2 over one cell is sum |c_n|^2."""
        phases = np.exp(1j * np.outer(np.asarray(x, dtype=float), self.orders))
        return phases @ coeffs / math.sqrt(2 * math.pi)

    def mirror(self, coeffs):
        """Apply x -> -x, i.e. c_n -> c_{-n}."""
        return np.asarray(coeffs)[::-1]

    def half_cell_projector(self):
        """Matrix Q with <c|Q|c> = probability in kx in (0, pi)."""
        n = self.orders
        d = n[None, :] - n[:, None]  # exp(i (m - n) x) integrated over (0, pi)
        with np.errstate(divide="ignore", invalid="ignore"):
            q = np.where(d == 0, math.pi, (np.exp(1j * math.pi * d) - 1.0) / (1j * d))
        return q / (2 * math.pi)


def shift_operator(basis, k):
    """Matrix of exp(i k x) in the plane-wave basis (raises n by k)."""
    return np.eye(basis.dim, k=-k, dtype=complex)


def sin_matrix(basis):
    return (shift_operator(basis, 1) - shift_operator(basis, -1)) / 2j


def kinetic_matrix(basis):
    return np.diag(basis.orders.astype(float) ** 2).astype(complex)


def build_static_hamiltonian(params, basis=PlaneWaveBasis()):
    v1, v2, phi = params.v1, params.v2, params.phi_s
    h = kinetic_matrix(basis) + 0.5 * (v1 + v2) * np.eye(basis.dim)
    h += 0.25 * v1 * (shift_operator(basis, 2) + shift_operator(basis, -2))
    h += 0.25 * v2 * (np.exp(1j * phi) * shift_operator(basis, 1) + np.exp(-1j * phi) * shift_operator(basis, -1))
    return h


def potential_matrix(values, basis):
    """Plane-wave matrix of a potential sampled on ``x_j = -pi + 2 pi j / N``.

    ``values`` may carry leading batch axes; the last axis is the grid.
    """
    values = np.asarray(values, dtype=float)
    npts = values.shape[-1]
    if npts < 4 * basis.n_max + 1:
        raise DomainError("potential grid too coarse for the basis")
    # coefficient of exp(i k x): (1/N) sum_j V_j exp(-i k x_j), x_j offset by -pi
    vk = np.fft.fft(values, axis=-1) / npts
    n = basis.orders
    k = n[:, None] - n[None, :]
    return vk[..., k % npts] * np.exp(1j * math.pi * k)


@dataclass(frozen=True)
class EigenSolution:
    energies: np.ndarray
    vectors: np.ndarray  # plane-wave coefficients, one column per kept state
    n_states_kept: int
    basis: PlaneWaveBasis | None = None

    def operator(self, matrix):
        """Project a plane-wave operator onto the kept eigenstates."""
        return self.vectors.conj().T @ matrix @ self.vectors

    def to_plane_waves(self, coeffs):
        return self.vectors @ coeffs

    def from_plane_waves(self, state):
        return self.vectors.conj().T @ state


def _fix_phase(vectors):
    # largest coefficient real positive; near-ties resolved toward the lowest index
    out = vectors.copy()
    for j in range(out.shape[1]):
        mag = np.abs(out[:, j])
        idx = int(np.flatnonzero(mag >= mag.max() * (1 - 1e-9))[0])
        out[:, j] *= np.conj(out[idx, j]) / mag[idx]
    return out


def _parity_blocks(dim):
    """Orthonormal even and odd combinations of plane waves (c_n = +-c_{-n})."""
    mid = dim // 2
    r = 1 / math.sqrt(2)
    even = np.zeros((dim, mid + 1))
    odd = np.zeros((dim, mid))
    even[mid, 0] = 1.0
    for k in range(1, mid + 1):
        even[mid + k, k] = even[mid - k, k] = r
        odd[mid + k, k - 1], odd[mid - k, k - 1] = r, -r
    return even, odd


def _eigh(h):
    try:
        return np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"Hermitian eigensolver failed: {exc}") from exc


def solve_eigen(h, n_states_kept=15, basis=None):
    """Lowest ``n_states_kept`` eigenpairs of a plane-wave Hamiltonian.

    A mirror-symmetric matrix is diagonalized separately in its even and odd
    sectors so that near-degenerate pairs keep a definite parity.
    """
    h = np.asarray(h)
    if n_states_kept > h.shape[0] or n_states_kept < 1:
        raise DomainError(f"cannot keep {n_states_kept} states of a {h.shape[0]}-dimensional problem")
    dim = h.shape[0]
    if dim % 2 and np.abs(h - h[::-1, ::-1]).max() < 1e-13 * max(1.0, np.abs(h).max()):
        parts = []
        for block in _parity_blocks(dim):
            e, v = _eigh(block.T @ h @ block)
            parts.append((e, block @ v))
        energies = np.concatenate([e for e, _ in parts])
        vectors = np.hstack([v for _, v in parts])
        order = np.argsort(energies, kind="stable")
        energies, vectors = energies[order], vectors[:, order]
    else:
        energies, vectors = _eigh(h)
    energies = energies[:n_states_kept]
    vectors = _fix_phase(vectors[:, :n_states_kept])
    residual = np.linalg.norm(h @ vectors - vectors * energies, axis=0).max()
    if residual > RESIDUAL_TOL:
        raise ConvergenceError("eigenpair residual above tolerance", achieved=residual, target=RESIDUAL_TOL)
    return EigenSolution(energies, vectors, n_states_kept, basis)


def solve_lattice(params, basis=PlaneWaveBasis(), n_states_kept=15):
    return solve_eigen(build_static_hamiltonian(params, basis), n_states_kept, basis)


def spatial_parity(sol, tol=1e-8):
    """+1/-1 for each kept state with c_n = +-c_{-n}; 0 (broken) where neither holds."""
    out = []
    for v in sol.vectors.T:
        m = v[::-1]
        if np.linalg.norm(m - v) < tol:
            out.append(1)
        elif np.linalg.norm(m + v) < tol:
            out.append(-1)
        else:
            out.append(0)
    return out


@dataclass(frozen=True)
class DoubletData:
    delta_12: float
    x12: float
    dipole: complex  # <phi_1| sin kx |phi_2> in the fixed phase convention
    left_state: np.ndarray
    right_state: np.ndarray
    degenerate: bool = False
    right_half_cell: float = field(default=float("nan"))


def doublet_data(sol, basis=None):
    """Tunneling splitting, sin(kx) dipole and localized combinations of the lowest doublet.

    The relative phase of phi_2 is chosen so that <R|sin kx|R> = |x12|; between
    real even and odd states the matrix element is imaginary, so the bare sum
    phi_1 + phi_2 would not be localized.
    """
    basis = basis or sol.basis
    if sol.n_states_kept < 2:
        raise DomainError("doublet needs at least two kept states")
    phi1, phi2 = sol.vectors[:, 0], sol.vectors[:, 1]
    dipole = complex(phi1.conj() @ sin_matrix(basis) @ phi2)
    delta = float(sol.energies[1] - sol.energies[0])
    degenerate = delta < 1e-12 or abs(dipole) < 1e-14
    rel = np.conj(dipole) / abs(dipole) if abs(dipole) > 0 else 1.0
    right = (phi1 + rel * phi2) / math.sqrt(2)
    left = (phi1 - rel * phi2) / math.sqrt(2)
    q = basis.half_cell_projector()
    p_right = float(np.real(right.conj() @ q @ right))
    if p_right < 0.5:
        left, right = right, left
        p_right = float(np.real(right.conj() @ q @ right))
    return DoubletData(delta, abs(dipole), dipole, left, right, degenerate, p_right)
