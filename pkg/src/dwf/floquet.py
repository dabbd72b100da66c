"""Quasienergies and Floquet modes of the driven double well.

The one-period propagator ``U(T)`` is built in the basis of the lowest static
eigenstates and diagonalized; the extended (Sambe) space matrix provides an
independent cross-check.  Quasienergies are reported in the zone
``(-omega/2, omega/2]`` and differences are folded into ``[0, omega/2]``.
"""
from __future__ import annotations

import logging
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg
from scipy.optimize import brentq, linear_sum_assignment, minimize_scalar

from .errors import ConvergenceError, DomainError
from .lattice import DriveSpec
from .propagation import DrivenHamiltonian, refine_period

log = logging.getLogger(__name__)

QUASI_TOL = 1e-8
PARITY_TOL = 1e-6
WEIGHT_FLOOR = 1e-3
MULTISTATE_RATIO = 0.5
EXACT_GAP = 1e-4
N_SUB = 8


def zone_reduce(eps, omega):
    """Map quasienergies into ``(-omega/2, omega/2]``."""
    eps = np.asarray(eps, dtype=float)
    return eps - omega * np.ceil((eps - 0.5 * omega) / omega)


def wrap_difference(d, omega):
    """Signed difference reduced to ``(-omega/2, omega/2]``."""
    return zone_reduce(d, omega)


def fold_gap(d, omega):
    """Unsigned quasienergy difference folded into ``[0, omega/2]``."""
    return np.abs(wrap_difference(d, omega))


@dataclass(frozen=True)
class FloquetSolution:
    quasienergies: np.ndarray
    modes_t0: np.ndarray  # columns in the kept static eigenbasis
    weights: np.ndarray
    omega_d: float
    parity: tuple = ()  # +1, -1, or 0 for broken
    parity_defects: np.ndarray | None = None
    harmonic: np.ndarray | None = None  # dominant Fourier index of each periodic mode
    sub_propagators: np.ndarray | None = field(default=None, repr=False)
    nsteps: int = 0

    @property
    def period(self):
        return 2 * math.pi / self.omega_d

    def reduced_parity(self):
        """Parity eigenvalues in the zone-reduced convention (before centering on the dominant harmonic)."""
        return np.asarray(self.parity) * (-1.0) ** np.asarray(self.harmonic)

    def dominant(self, count=2):
        """Mode indices by decreasing weight; ties go to the smaller index."""
        order = sorted(range(len(self.weights)), key=lambda j: (-round(float(self.weights[j]), 14), j))
        return order[:count]


@dataclass(frozen=True)
class SplittingSpectrum:
    lines: tuple  # (frequency, weight)


@dataclass(frozen=True)
class EffectiveSplitting:
    principal: float
    spectrum: SplittingSpectrum
    multistate: bool
    pair: tuple


def kept_right_state(sol, doublet):
    return sol.from_plane_waves(doublet.right_state)


def period_propagator(params, form, spec, sol, tol=QUASI_TOL, n_sub=1, max_steps=1 << 17):
    ham = DrivenHamiltonian(params, form, spec, sol.basis, sol.vectors, sol.energies)
    return refine_period(ham, spec.period, tol, n_sub=n_sub, max_steps=max_steps)


def one_period_propagator(params, form, spec, sol, tol=QUASI_TOL, max_steps=1 << 17):
    """U(T) over the kept eigenbasis, refined until quasienergies move by < ``tol``."""
    return period_propagator(params, form, spec, sol, tol, 1, max_steps).u


def quasienergies(u, omega_d, right_state=None):
    """Eigen-decomposition of U(T); modes sorted by quasienergy."""
    t_form, z = scipy.linalg.schur(np.asarray(u, dtype=complex), output="complex")
    phases = np.diag(t_form)
    period = 2 * math.pi / omega_d
    eps = zone_reduce(-np.angle(phases) / period, omega_d)
    order = np.argsort(eps, kind="stable")
    eps, z = eps[order], z[:, order]
    if right_state is None:
        weights = np.full(len(eps), np.nan)
    else:
        weights = np.abs(z.conj().T @ right_state) ** 2
    return FloquetSolution(eps, z, weights, omega_d)


def mirror_operator(sol):
    """x -> -x in the kept eigenbasis (exactly diagonal for a symmetric well)."""
    return sol.vectors.conj().T @ sol.vectors[::-1, :]


def _mode_samples(fs, sub):
    """Periodic parts Phi(t_j), t_j = j T / n for j = 0..n-1, shape (n, dim, modes)."""
    n = len(sub)
    t = fs.period * np.arange(n) / n
    out = np.empty((n,) + fs.modes_t0.shape, dtype=complex)
    out[0] = fs.modes_t0
    for j in range(1, n):
        out[j] = sub[j - 1] @ fs.modes_t0
    return out * np.exp(1j * np.outer(t, fs.quasienergies))[:, None, :]


def _dominant_harmonic(samples):
    n = samples.shape[0]
    power = (np.abs(np.fft.fft(samples, axis=0)) ** 2).sum(axis=1)
    m = np.argmax(power, axis=0)
    return np.where(m > n // 2, m - n, m)


def _symmetry_adapt(fs, sol, cluster_tol=1e-7):
    """Rotate (near-)degenerate modes onto parity eigenvectors so labels are well defined at crossings.

    ``cluster_tol`` sits above the quasienergy accuracy but keeps the phase slip over T/2 below PARITY_TOL.
    """
    sub = fs.sub_propagators
    half = sub[len(sub) // 2 - 1]
    pi = mirror_operator(sol)
    modes = fs.modes_t0.copy()
    eps = fs.quasienergies
    n = len(eps)
    seen = np.zeros(n, dtype=bool)
    for a in range(n):
        if seen[a]:
            continue
        group = [b for b in range(n) if not seen[b] and fold_gap(eps[b] - eps[a], fs.omega_d) < cluster_tol]
        seen[group] = True
        if len(group) < 2:
            continue
        block = modes[:, group]
        g = block.conj().T @ pi @ half @ block * np.exp(0.5j * eps[a] * fs.period)
        _, rot = np.linalg.eigh(0.5 * (g + g.conj().T))
        modes[:, group] = block @ rot
    return replace(fs, modes_t0=modes)


def parity_classify(fs, sol, spec=None, tol=PARITY_TOL):
    """Generalized-parity labels (+1, -1, or 0 = broken) and defects for every mode.

    ``P: x -> -x, t -> t + T/2`` acting on the periodic part of each mode.  Labels
    are reported for the representative centred on its dominant harmonic, which
    makes them equal to the static spatial parities at zero drive.
    """
    if fs.sub_propagators is None or len(fs.sub_propagators) % 2:
        raise DomainError("parity needs propagator snapshots at an even number of sub-steps")
    samples = _mode_samples(fs, fs.sub_propagators)
    half = samples[len(samples) // 2]
    mirrored = mirror_operator(sol) @ half
    lam = np.einsum("ij,ij->j", fs.modes_t0.conj(), mirrored)
    sign = np.where(lam.real >= 0, 1.0, -1.0)
    defects = np.linalg.norm(mirrored - fs.modes_t0 * sign, axis=0)
    harmonic = _dominant_harmonic(samples)
    labels = np.where(defects < tol, sign * (-1.0) ** harmonic, 0.0).astype(int)
    return tuple(int(v) for v in labels), defects, harmonic


def solve(params, form, spec, sol, doublet, tol=QUASI_TOL, n_sub=N_SUB, max_steps=1 << 17):
    """Full Floquet solution at one drive setting: quasienergies, modes, weights on |R>, parity."""
    prop = period_propagator(params, form, spec, sol, tol, n_sub, max_steps)
    fs = quasienergies(prop.u, spec.omega_d)
    fs = replace(fs, sub_propagators=prop.sub, nsteps=prop.nsteps)
    fs = _symmetry_adapt(fs, sol)
    right = kept_right_state(sol, doublet)
    weights = np.abs(fs.modes_t0.conj().T @ right) ** 2
    labels, defects, harmonic = parity_classify(fs, sol, spec)
    return replace(fs, weights=weights, parity=labels, parity_defects=defects, harmonic=harmonic)


def effective_splitting(fs, floor=WEIGHT_FLOOR, multistate_ratio=MULTISTATE_RATIO):
    order = fs.dominant(len(fs.weights))
    a, b = order[0], order[1]
    principal = float(fold_gap(fs.quasienergies[a] - fs.quasienergies[b], fs.omega_d))
    w = fs.weights
    lines = []
    for i in range(len(w)):
        for j in range(i + 1, len(w)):
            prod = w[i] * w[j]
            if prod > floor:
                lines.append((float(fold_gap(fs.quasienergies[i] - fs.quasienergies[j], fs.omega_d)), float(prod)))
    total = sum(p for _, p in lines)
    if total > 0:
        lines = [(f, p / total) for f, p in lines]
    lines.sort()
    third = w[order[2]] if len(order) > 2 else 0.0
    return EffectiveSplitting(principal, SplittingSpectrum(tuple(lines)), bool(third > multistate_ratio * w[b]), (a, b))


def _sambe_blocks(ham, period, n_harm, nt):
    t = period * np.arange(nt) / nt
    hk = np.fft.fft(ham(t), axis=0) / nt
    return {k: hk[k % nt] for k in range(-n_harm, n_harm + 1)}


def sambe_diagonalize(params, form, spec, sol, m_fourier=12, edge_tol=1e-8, return_vectors=False):
    """Quasienergies from the truncated extended-space matrix, zone reduced and sorted.

    Harmonics ``m = -M..M`` are kept; for each Floquet family the copy whose
    harmonic weight is centred closest to m = 0 is selected.
    """
    if m_fourier < 1:
        raise DomainError("m_fourier must be at least 1")
    ham = DrivenHamiltonian(params, form, spec, sol.basis, sol.vectors, sol.energies)
    k = ham.dim
    nblk = 2 * m_fourier + 1
    nt = 1 << math.ceil(math.log2(4 * m_fourier + 2 + 16))
    blocks = _sambe_blocks(ham, spec.period, 2 * m_fourier, nt)
    big = np.zeros((nblk * k, nblk * k), dtype=complex)
    ms = np.arange(-m_fourier, m_fourier + 1)
    for i, m in enumerate(ms):
        for j, mp in enumerate(ms):
            blk = blocks[m - mp].copy()
            if i == j:
                blk = blk + m * spec.omega_d * np.eye(k)
            big[i * k:(i + 1) * k, j * k:(j + 1) * k] = blk
    big = 0.5 * (big + big.conj().T)
    vals, vecs = np.linalg.eigh(big)
    w = (np.abs(vecs) ** 2).reshape(nblk, k, -1).sum(axis=1)
    centroid = ms @ w
    pick = np.argsort(np.abs(centroid), kind="stable")[:k]
    edge = (w[0, pick] + w[-1, pick]).max()
    if edge > edge_tol:
        warnings.warn(f"extended-space truncation m_fourier={m_fourier} may be under-converged "
                      f"(edge weight {edge:.2e})", RuntimeWarning, stacklevel=2)
    eps = zone_reduce(vals[pick], spec.omega_d)
    order = np.argsort(eps, kind="stable")
    if return_vectors:
        return eps[order], vecs[:, pick[order]]
    return eps[order]


def quasienergy_set_distance(a, b, omega):
    d = fold_gap(np.asarray(a)[:, None] - np.asarray(b)[None, :], omega)
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


# ---------------------------------------------------------------------------
# scans


@dataclass(frozen=True)
class ScanContext:
    params: object
    form: object
    template: DriveSpec
    axis: str
    sol: object
    doublet: object
    tol: float = QUASI_TOL
    floor: float = WEIGHT_FLOOR
    multistate_ratio: float = MULTISTATE_RATIO
    max_steps: int = 1 << 17

    def spec_at(self, x):
        if self.axis == "omega_d":
            return replace(self.template, omega_d=float(x))
        if self.axis == "amplitude_s":
            return replace(self.template, amplitude_s=float(x))
        raise DomainError(f"unknown scan axis {self.axis!r}")

    def solve_at(self, x):
        return solve(self.params, self.form, self.spec_at(x), self.sol, self.doublet, self.tol,
                     max_steps=self.max_steps)


@dataclass
class ScanRow:
    axis_value: float
    solution: FloquetSolution | None = None
    splitting: EffectiveSplitting | None = None
    branch: np.ndarray | None = None  # branch j sits at mode index branch[j]
    status: str = "ok"

    @property
    def ok(self):
        return self.status == "ok"


@dataclass
class ScanResult:
    context: ScanContext
    rows: list

    @property
    def axis_values(self):
        return np.array([r.axis_value for r in self.rows])

    def principal(self):
        return np.array([r.splitting.principal if r.ok else np.nan for r in self.rows])

    @property
    def failures(self):
        return sum(1 for r in self.rows if not r.ok)


def _scan_point(ctx, x):
    try:
        fs = ctx.solve_at(x)
    except (ConvergenceError, DomainError, np.linalg.LinAlgError) as exc:
        log.warning("scan point %s failed: %s", x, exc)
        return ScanRow(float(x), status=f"error: {exc}")
    fs = replace(fs, sub_propagators=None)
    return ScanRow(float(x), fs, effective_splitting(fs, ctx.floor, ctx.multistate_ratio))


def track_branches(rows):
    """Label modes across rows by maximal overlap with the previous successful row."""
    prev = None
    for row in rows:
        if not row.ok:
            continue
        k = len(row.solution.quasienergies)
        if prev is None:
            row.branch = np.arange(k)
        else:
            ov = np.abs(prev.solution.modes_t0.conj().T @ row.solution.modes_t0) ** 2
            # ties resolve to the smaller index through the stable assignment order
            r, c = linear_sum_assignment(-np.round(ov, 12))
            cur_of_prev = np.empty(k, dtype=int)
            cur_of_prev[r] = c
            row.branch = cur_of_prev[prev.branch]
        prev = row
    return rows


def scan(params, form, template, axis, grid, sol, doublet, jobs=1, **options):
    grid = [float(g) for g in grid]
    if not grid:
        raise DomainError("scan grid is empty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise DomainError("scan grid must be strictly ascending")
    ctx = ScanContext(params, form, template, axis, sol, doublet, **options)
    ctx.spec_at(grid[0])
    if jobs > 1 and len(grid) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_scan_point, [ctx] * len(grid), grid))
    else:
        rows = [_scan_point(ctx, x) for x in grid]
    return ScanResult(ctx, track_branches(rows))


# ---------------------------------------------------------------------------
# crossing detection


@dataclass(frozen=True)
class Crossing:
    lower: float
    upper: float
    location: float
    min_gap: float
    kind: str  # "exact-crossing" or "avoided"
    parity_a: int = 0
    parity_b: int = 0


def _track(fs, ref_a, ref_b):
    ov = np.abs(fs.modes_t0.conj().T @ np.column_stack([ref_a, ref_b])) ** 2
    a = int(np.argmax(ov[:, 0]))
    ov[a, 1] = -1.0
    b = int(np.argmax(ov[:, 1]))
    return a, b


def _opposite(fs, a, b):
    lab = fs.parity
    if lab[a] == 0 or lab[b] == 0:
        return False
    red = fs.reduced_parity()
    k = round((fs.quasienergies[a] - fs.quasienergies[b]) / fs.omega_d)
    return red[a] * red[b] * (-1) ** k < 0


def crossing_detect(result, resolution=1e-4, exact_gap=EXACT_GAP, prominence=1e-6):
    """Local minima of the dominant-pair gap, refined and classified.

    A minimum counts as an exact crossing when the refined gap is below
    ``exact_gap`` and the two tracked modes carry opposite generalized parity on
    both sides of the bracket; only those candidates are refined (to relative
    ``resolution``), the others report the grid minimum.
    """
    rows = [r for r in result.rows if r.ok]
    if len(rows) < 3:
        raise DomainError("crossing detection needs at least three successful scan points")
    ctx = result.context
    g = np.array([r.splitting.principal for r in rows])
    found = []
    for i in range(1, len(rows) - 1):
        left, mid, right = g[i - 1], g[i], g[i + 1]
        if not (mid <= left and mid <= right and max(left, right) - mid > prominence):
            continue
        lo, hi = rows[i - 1], rows[i + 1]
        a0, b0 = lo.splitting.pair
        ref_a, ref_b = lo.solution.modes_t0[:, a0], lo.solution.modes_t0[:, b0]
        cache = {r.axis_value: (r.solution,) + _track(r.solution, ref_a, ref_b) for r in (lo, rows[i], hi)}

        def evaluate(x):
            if x not in cache:
                fs = ctx.solve_at(x)
                cache[x] = (fs,) + _track(fs, ref_a, ref_b)
            return cache[x]

        def signed(x):
            fs, a, b = evaluate(x)
            return float(wrap_difference(fs.quasienergies[a] - fs.quasienergies[b], fs.omega_d))

        opposite = all(_opposite(*evaluate(r.axis_value)) for r in (lo, hi))
        if not opposite:
            # without opposite parities the pair cannot cross; keep the grid minimum
            fs, a, b = evaluate(rows[i].axis_value)
            found.append(Crossing(lo.axis_value, hi.axis_value, rows[i].axis_value, float(g[i]), "avoided",
                                  fs.parity[a], fs.parity[b]))
            continue
        d_lo, d_hi = signed(lo.axis_value), signed(hi.axis_value)
        quarter = 0.25 * rows[i].solution.omega_d
        xtol = resolution * abs(rows[i].axis_value)
        if d_lo * d_hi < 0 and abs(d_lo) < quarter and abs(d_hi) < quarter:
            x = brentq(signed, lo.axis_value, hi.axis_value, xtol=xtol)
        else:
            res = minimize_scalar(lambda v: abs(signed(v)), bounds=(lo.axis_value, hi.axis_value),
                                  method="bounded", options={"xatol": xtol})
            x = float(res.x)
            if abs(signed(rows[i].axis_value)) < abs(signed(x)):
                x = rows[i].axis_value
        gap = abs(signed(x))
        fs, a, b = evaluate(x)
        kind = "exact-crossing" if gap < exact_gap and opposite else "avoided"
        found.append(Crossing(lo.axis_value, hi.axis_value, float(x), gap, kind, fs.parity[a], fs.parity[b]))
    return found
