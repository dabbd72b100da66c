"""Time evolution of a localized particle and the observables read from it."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from .errors import DomainError
from .propagation import DrivenHamiltonian, refine_period
from .stationary import PlaneWaveBasis, doublet_data, solve_lattice

log = logging.getLogger(__name__)

STATE_TOL = 1e-6
POOR_FIT = 0.1
AMPLITUDE_FLOOR = 0.02


@dataclass(frozen=True)
class DynamicsTrace:
    times: np.ndarray
    p_left: np.ndarray
    p_right: np.ndarray
    momentum_orders: np.ndarray  # (n_times, 2 n_max + 1)
    orders: np.ndarray
    truncation_leakage: np.ndarray  # population outside the kept static states
    norm_error: float
    nsteps: int = 0
    samples_per_period: int = 1  # 0 when samples are several periods apart

    @property
    def leakage(self):
        return 1.0 - self.p_left - self.p_right


def populations_LR(state, doublet, basis=None, readout="projection"):
    """(p_left, p_right) of a plane-wave state.

    ``projection`` uses |<L|psi>|^2 and |<R|psi>|^2; ``spatial`` integrates
    |psi|^2 over the half cells (-pi, 0) and (0, pi).
    """
    state = np.asarray(state)
    if readout == "projection":
        return (float(np.abs(np.vdot(doublet.left_state, state)) ** 2),
                float(np.abs(np.vdot(doublet.right_state, state)) ** 2))
    if readout == "spatial":
        if basis is None:
            raise DomainError("spatial readout needs the plane-wave basis")
        right = float(np.real(np.vdot(state, basis.half_cell_projector() @ state)))
        return float(np.real(np.vdot(state, state))) - right, right
    raise DomainError(f"unknown readout {readout!r}")


def momentum_distribution(state, basis=None):
    """Population of each diffraction order n (momentum n hbar k)."""
    return np.abs(np.asarray(state)) ** 2


def sampling_plan(period, sample_dt):
    """Snap ``sample_dt`` to T/q or p*T; returns (effective dt, q, p)."""
    if not sample_dt > 0:
        raise DomainError("sample_dt must be positive")
    if sample_dt < period:
        q, p = max(1, round(period / sample_dt)), 1
        dt = period / q
    else:
        q, p = 1, max(1, round(sample_dt / period))
        dt = p * period
    if abs(dt - sample_dt) > 1e-9 * sample_dt:
        log.warning("sample_dt %.6g snapped to %.6g to stay commensurate with the drive period", sample_dt, dt)
    return dt, q, p


def propagate(params, form, spec, t_final, sample_dt, initial=None, basis=PlaneWaveBasis(), doublet=None,
              kept=None, truncated=False, readout="projection", state_tol=STATE_TOL, max_steps=1 << 16):
    """Sampled evolution from ``initial`` (default |R>) under the driven Hamiltonian.

    Propagation runs in the full plane-wave basis unless ``truncated``, in which
    case it is restricted to the kept static states ``kept`` (the Floquet basis).
    One period is built with the shared midpoint stepper; later samples reuse it.
    """
    if not t_final > 0:
        raise DomainError("t_final must be positive")
    if kept is None:
        kept = solve_lattice(params, basis)
    if doublet is None:
        doublet = doublet_data(kept, basis)
    psi0 = doublet.right_state if initial is None else np.asarray(initial, dtype=complex)
    if abs(np.linalg.norm(psi0) - 1) > 1e-10:
        raise DomainError("initial state must be normalized")

    period = spec.period
    dt, q, p = sampling_plan(period, sample_dt)
    if truncated:
        ham = DrivenHamiltonian(params, form, spec, basis, kept.vectors, kept.energies)
        start = kept.from_plane_waves(psi0)
    else:
        ham = DrivenHamiltonian(params, form, spec, basis)
        start = psi0
    prop = refine_period(ham, period, state_tol, metric="state", state=start, n_sub=q, max_steps=max_steps)
    u = prop.u
    step = np.linalg.matrix_power(u, p) if q == 1 else None

    n_samples = int(math.floor(t_final / dt + 1e-9)) + 1
    states = np.empty((n_samples, len(start)), dtype=complex)
    states[0] = start
    cur = start
    for k in range(1, n_samples):
        if q == 1:
            cur = step @ cur
            states[k] = cur
        else:
            j = k % q
            if j == 0:
                cur = u @ cur
                states[k] = cur
            else:
                states[k] = prop.sub[j - 1] @ cur
    times = dt * np.arange(n_samples)

    waves = states @ kept.vectors.T if truncated else states
    norms = np.linalg.norm(waves, axis=1)
    kept_pop = np.linalg.norm(waves @ kept.vectors.conj(), axis=1) ** 2
    lr = np.array([populations_LR(w, doublet, basis, readout) for w in waves])
    return DynamicsTrace(times, lr[:, 0], lr[:, 1], np.abs(waves) ** 2, basis.orders,
                         np.clip(norms**2 - kept_pop, 0.0, None), float(np.abs(norms - 1).max()), prop.nsteps,
                         q if p == 1 else 0)


@dataclass(frozen=True)
class FitResult:
    frequency: float  # E_r/hbar
    amplitude: float
    offset: float
    phase: float
    residual: float
    status: str  # ok, poor-fit, no-oscillation


def _seed_frequency(t, y, pad=8):
    n = len(y)
    spec = np.abs(np.fft.rfft(y - y.mean(), n=pad * n))
    spec[0] = 0.0
    k = int(np.argmax(spec))
    return 2 * math.pi * k / (pad * n * (t[1] - t[0]))


def fit_sinusoid(t, y, amplitude_floor=AMPLITUDE_FLOOR, poor_fit=POOR_FIT):
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(t) < 4:
        raise DomainError("need at least four samples to fit")
    dts = np.diff(t)
    if np.abs(dts - dts[0]).max() > 1e-9 * dts[0]:
        raise DomainError("fit expects uniformly sampled data")
    if 0.5 * (y.max() - y.min()) < amplitude_floor:
        return FitResult(0.0, 0.5 * float(y.max() - y.min()), float(np.mean(y)), 0.0, float(np.std(y)),
                         "no-oscillation")
    omega0 = _seed_frequency(t, y)

    def design(om):
        return np.column_stack([np.ones_like(t), np.sin(om * t), np.cos(om * t)])

    c0, a0, b0 = np.linalg.lstsq(design(omega0), y, rcond=None)[0]
    res = least_squares(lambda v: v[0] + v[1] * np.sin(v[3] * t) + v[2] * np.cos(v[3] * t) - y,
                        [c0, a0, b0, omega0], xtol=1e-15, ftol=1e-15, gtol=1e-15, method="lm")
    c, a, b, om = res.x
    if om < 0:
        om, a = -om, -a
    amp = math.hypot(a, b)
    rms = float(np.sqrt(np.mean(res.fun**2)))
    if amp < amplitude_floor:
        return FitResult(0.0, amp, float(np.mean(y)), 0.0, float(np.std(y)), "no-oscillation")
    status = "poor-fit" if rms > poor_fit else "ok"
    return FitResult(float(om), amp, float(c), float(math.atan2(b, a)), rms, status)


def fit_tunneling_frequency(trace, signal="p_left", stroboscopic=True, **kwargs):
    """Fit ``A + B sin(Omega t + theta)`` to a population trace; Omega seeded by the FFT peak.

    With ``stroboscopic`` only samples at whole drive periods enter the fit, which
    removes the micromotion at the drive frequency; frequencies then fold into
    ``[0, omega_d/2]`` like the Floquet splittings.
    """
    stride = trace.samples_per_period if stroboscopic and trace.samples_per_period > 1 else 1
    return fit_sinusoid(trace.times[::stride], getattr(trace, signal)[::stride], **kwargs)
