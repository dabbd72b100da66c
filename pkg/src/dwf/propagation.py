"""Exponential-midpoint propagator shared by the Floquet and dynamics modules.

Each step applies ``exp(-i H(t_mid) dt)`` built from a Hermitian eigendecomposition,
so every step is unitary to rounding.  Steps are evaluated in batches and
multiplied in a balanced tree to keep the Python overhead per step small.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError
from .lattice import Exact, Linearized, drive_value, total_potential
from .stationary import build_static_hamiltonian, kinetic_matrix, potential_matrix, sin_matrix

CHUNK = 256
EXACT_GRID = 256


def _position_conjugate(vectors):
    # c_n -> conj(c_{-n}): complex conjugation of psi(x)
    return np.conj(vectors[::-1, :])


def real_rotation(vectors, energies, cluster_gap=1e-3, tol=1e-10):
    """Unitary ``Q`` such that ``vectors @ Q`` is real in position space, or None.

    The potential is real, so in that basis every projected Hamiltonian is real
    symmetric and the cheaper real eigensolver applies.  Near-degenerate states
    (closer than ``cluster_gap``) are rotated together, since the eigensolver
    may return arbitrary complex mixtures of them.
    """
    k = vectors.shape[1]
    q = np.zeros((k, k), dtype=complex)
    start = 0
    while start < k:
        stop = start + 1
        while stop < k and energies[stop] - energies[stop - 1] < cluster_gap:
            stop += 1
        block = vectors[:, start:stop]
        conj = _position_conjugate(block)
        cand = np.hstack([block + conj, 1j * (block - conj)])
        gram = (cand.conj().T @ cand).real
        lam, y = np.linalg.eigh(gram)
        m = stop - start
        w = cand @ y[:, -m:] / np.sqrt(lam[-m:])
        q[start:stop, start:stop] = block.conj().T @ w
        start = stop
    w = vectors @ q
    if np.abs(q.conj().T @ q - np.eye(k)).max() > tol or np.abs(_position_conjugate(w) - w).max() > 1e-8:
        return None
    return q


def cos_sin_basis(basis):
    """Unitary from plane waves to the real cos(n kx), sin(n kx) basis."""
    n = basis.n_max
    q = np.zeros((basis.dim, basis.dim), dtype=complex)
    q[n, 0] = 1.0
    r = 1 / math.sqrt(2)
    for k in range(1, n + 1):
        q[n + k, 2 * k - 1] = q[n - k, 2 * k - 1] = r
        q[n + k, 2 * k], q[n - k, 2 * k] = 1j * r, -1j * r
    return q


class DrivenHamiltonian:
    """``H(t)`` as a batch-evaluable callable, in the plane-wave basis or projected on ``vectors``.

    Matrices are returned in a basis that is real in position space (the cos/sin
    basis, or the kept states rotated by :func:`real_rotation`), so they are real
    symmetric; ``gauge`` holds that unitary and :meth:`from_gauge` undoes it.
    """

    def __init__(self, params, form, spec, basis, vectors=None, energies=None):
        self.params, self.form, self.spec, self.basis = params, form, spec, basis
        self.gauge = None
        if vectors is not None:
            if energies is None:
                energies = np.real(np.einsum("ij,ij->j", vectors.conj(),
                                             build_static_hamiltonian(params, basis) @ vectors))
            self.gauge = real_rotation(vectors, energies)
            if self.gauge is not None:
                vectors = vectors @ self.gauge
        else:
            self.gauge = cos_sin_basis(basis)
        self.vectors = vectors
        if isinstance(form, Linearized):
            if vectors is None:
                q = self.gauge
                self.h0 = q.conj().T @ build_static_hamiltonian(params, basis) @ q
                self.coupling = q.conj().T @ sin_matrix(basis) @ q
            else:
                q = self.gauge if self.gauge is not None else np.eye(len(energies))
                self.h0 = q.conj().T @ np.diag(energies) @ q
                self.coupling = vectors.conj().T @ sin_matrix(basis) @ vectors
        elif isinstance(form, Exact):
            self.kin = kinetic_matrix(basis)
            self.grid = -math.pi + 2 * math.pi * np.arange(EXACT_GRID) / EXACT_GRID
        else:
            raise TypeError(f"unknown drive form {form!r}")
        if self.gauge is not None and isinstance(form, Linearized):
            for name in ("h0", "coupling"):
                m = getattr(self, name)
                if np.abs(m.imag).max() > 1e-9 * max(1.0, np.abs(m).max()):
                    raise AssertionError("projected Hamiltonian not real in the position-real gauge")
                setattr(self, name, m.real.copy())

    @property
    def dim(self):
        return self.basis.dim if self.vectors is None else self.vectors.shape[1]

    @property
    def is_real(self):
        return self.gauge is not None

    def __call__(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if isinstance(self.form, Linearized):
            f = self.spec.amplitude_s * drive_value(self.spec, t)
            return self.h0[None] + f[:, None, None] * self.coupling[None]
        v = total_potential(self.params, self.form, self.spec, self.grid[None, :], t[:, None])
        h = self.kin[None] + potential_matrix(v, self.basis)
        w = self.vectors if self.vectors is not None else self.gauge
        h = w.conj().T[None] @ h @ w[None]
        h = 0.5 * (h + np.conj(np.swapaxes(h, -1, -2)))
        return h.real.copy() if self.gauge is not None else h

    def from_gauge(self, u):
        """Express an operator built from these matrices in the caller's basis."""
        if self.gauge is None:
            return u
        return self.gauge @ u @ self.gauge.conj().T


def ordered_product(us):
    """``us[n-1] @ ... @ us[0]`` by pairwise reduction."""
    us = np.asarray(us)
    while len(us) > 1:
        tail = None
        if len(us) % 2:
            tail, us = us[-1], us[:-1]
        us = us[1::2] @ us[0::2]
        if tail is not None:
            us[-1] = tail @ us[-1]
    return us[0]


def step_unitaries(hamiltonian, t_mid, dt):
    hs = hamiltonian(t_mid)
    try:
        ev, vec = np.linalg.eigh(hs)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"step eigendecomposition failed: {exc}") from exc
    return (vec * np.exp(-1j * ev * dt)[:, None, :]) @ np.conj(np.swapaxes(vec, 1, 2))


def propagate_segments(hamiltonian, t0, duration, nsteps, n_sub=1):
    """Cumulative propagators ``U(t0 + j*duration/n_sub, t0)`` for ``j = 1..n_sub``."""
    if nsteps % n_sub:
        raise DomainError("nsteps must be a multiple of n_sub")
    dt = duration / nsteps
    per = nsteps // n_sub
    acc = np.eye(hamiltonian.dim, dtype=complex)
    out = np.empty((n_sub, hamiltonian.dim, hamiltonian.dim), dtype=complex)
    for j in range(n_sub):
        for start in range(j * per, (j + 1) * per, CHUNK):
            stop = min(start + CHUNK, (j + 1) * per)
            t_mid = t0 + (np.arange(start, stop) + 0.5) * dt
            acc = ordered_product(step_unitaries(hamiltonian, t_mid, dt)) @ acc
        out[j] = hamiltonian.from_gauge(acc)
    return out


@dataclass(frozen=True)
class PeriodPropagator:
    """One-period propagator with intermediate snapshots at ``t = j T / n_sub``."""

    sub: np.ndarray  # sub[j] = U((j+1) T / n_sub, 0)
    period: float
    nsteps: int
    achieved: float

    @property
    def u(self):
        return self.sub[-1]

    @property
    def n_sub(self):
        return len(self.sub)


def eigenphase_distance(u_a, u_b, period):
    """Largest quasienergy shift between the spectra of two unitaries (set distance on the circle)."""
    pa = np.angle(np.linalg.eigvals(u_a))
    pb = np.angle(np.linalg.eigvals(u_b))
    d = np.abs(np.angle(np.exp(1j * (pa[:, None] - pb[None, :]))))
    return max(d.min(axis=1).max(), d.min(axis=0).max()) / period


def state_distance(u_a, u_b, state):
    return float(np.linalg.norm(u_a @ state - u_b @ state))


def refine_period(hamiltonian, period, tol, metric="quasienergy", state=None, n_sub=1,
                  dt_initial=0.05, max_steps=1 << 17):
    """Double the step count until the one-period result moves by less than ``tol``.

    The midpoint rule is second order, so after the first comparison the step
    count jumps to the estimated requirement; the final pair is always checked.
    """
    def measure(a, b):
        if metric == "quasienergy":
            return eigenphase_distance(a, b, period)
        return state_distance(a, b, state)

    n = max(n_sub, 8, 1 << math.ceil(math.log2(max(period / dt_initial, 1.0))))
    n = -(-n // n_sub) * n_sub
    prev = propagate_segments(hamiltonian, 0.0, period, n, n_sub)
    last = float("inf")
    while 2 * n <= max_steps:
        cur = propagate_segments(hamiltonian, 0.0, period, 2 * n, n_sub)
        last = measure(prev[-1], cur[-1])
        if last < tol:
            return PeriodPropagator(cur, period, 2 * n, last)
        # shift between n and 2n scales as n^-2
        need = 1.25 * n * math.sqrt(last / tol)
        target = 1 << math.ceil(math.log2(max(need, 1.0)))
        if target > 2 * n and 2 * target <= max_steps:
            n = target
            prev = propagate_segments(hamiltonian, 0.0, period, n, n_sub)
        else:
            n, prev = 2 * n, cur
    raise ConvergenceError("period propagator did not reach tolerance", achieved=last, target=tol, iterations=n)
