import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.signal import find_peaks

from dwf import floquet
from dwf.errors import DomainError
from dwf.lattice import DriveSpec, LatticeParams, Linearized, SawtoothFourier, Sine, UnitSystem
from dwf.presets import DEEP_CDT_AMPLITUDE
from dwf.stationary import doublet_data, solve_lattice, spatial_parity

SHALLOW = LatticeParams(6.25, 5.40)
DEEP = LatticeParams(8.27, 2.68)
OMEGA_6KHZ = UnitSystem.argon40().omega_from_hz(6000.0)


@pytest.fixture(scope="module")
def shallow():
    sol = solve_lattice(SHALLOW)
    return sol, doublet_data(sol)


@pytest.fixture(scope="module")
def deep():
    sol = solve_lattice(DEEP)
    return sol, doublet_data(sol)


@pytest.fixture(scope="module")
def cdt_solution(shallow, fig3a_crossings):
    sol, d = shallow
    (exact,) = [c for c in fig3a_crossings if c.kind == "exact-crossing"]
    return exact, floquet.solve(SHALLOW, Linearized(), DriveSpec(Sine(), 0.88, exact.location), sol, d)


# -- zone conventions --------------------------------------------------------------

@given(st.floats(-50, 50), st.floats(0.1, 5.0))
def test_zone_reduce_range_and_idempotent(eps, omega):
    r = float(floquet.zone_reduce(eps, omega))
    assert -0.5 * omega - 1e-12 < r <= 0.5 * omega + 1e-12
    assert float(floquet.zone_reduce(r, omega)) == pytest.approx(r, abs=1e-12)
    assert float(floquet.zone_reduce(eps + omega, omega)) == pytest.approx(r, abs=1e-9)


def test_zone_edges():
    assert floquet.zone_reduce(0.5, 1.0) == 0.5
    assert floquet.zone_reduce(-0.5, 1.0) == 0.5
    assert floquet.fold_gap(0.9, 1.0) == pytest.approx(0.1)


# -- propagator and quasienergies ----------------------------------------------------

def test_static_propagator_diagonal(shallow):
    sol, _ = shallow
    spec = DriveSpec(Sine(), 0.0, 1.3)
    u = floquet.one_period_propagator(SHALLOW, Linearized(), spec, sol)
    assert np.allclose(u, np.diag(np.exp(-1j * sol.energies * spec.period)), atol=1e-12)
    fs = floquet.quasienergies(u, spec.omega_d)
    assert np.allclose(np.sort(fs.quasienergies), np.sort(floquet.zone_reduce(sol.energies, 1.3)), atol=1e-12)


@pytest.mark.parametrize("params,spec", [
    (SHALLOW, DriveSpec(Sine(), 0.88, 0.63)),
    (SHALLOW, DriveSpec(SawtoothFourier(5), 0.88, 1.7)),
    (DEEP, DriveSpec(Sine(), DEEP_CDT_AMPLITUDE, OMEGA_6KHZ)),
    (LatticeParams(8.27, 2.68, 0.4), DriveSpec(Sine(), DEEP_CDT_AMPLITUDE, OMEGA_6KHZ)),
])
def test_solution_invariants(params, spec):
    sol = solve_lattice(params)
    d = doublet_data(sol)
    fs = floquet.solve(params, Linearized(), spec, sol, d)
    u = fs.sub_propagators[-1]
    assert np.abs(u.conj().T @ u - np.eye(15)).max() < 1e-10
    assert np.abs(fs.modes_t0.conj().T @ fs.modes_t0 - np.eye(15)).max() < 1e-8
    assert np.all(fs.weights >= 0)
    # |R> lies in the kept space exactly, so the weights are complete
    assert fs.weights.sum() == pytest.approx(1.0, abs=1e-8)
    assert np.all(np.abs(fs.quasienergies) <= 0.5 * spec.omega_d + 1e-12)


def test_weights_invariant_under_phase(deep):
    sol, d = deep
    spec = DriveSpec(Sine(), 0.3, OMEGA_6KHZ)
    fs = floquet.solve(DEEP, Linearized(), spec, sol, d)
    right = floquet.kept_right_state(sol, d)
    rotated = fs.modes_t0 * np.exp(1j * np.linspace(0, 5, 15))
    assert np.allclose(np.abs(rotated.conj().T @ right) ** 2, fs.weights, atol=1e-14)
    assert np.sort(fs.weights)[-2:].sum() > 0.95


def test_sambe_matches_propagator(shallow):
    sol, _ = shallow
    for omega in (0.7, 1.9):
        spec = DriveSpec(Sine(), 0.88, omega)
        u = floquet.one_period_propagator(SHALLOW, Linearized(), spec, sol)
        a = floquet.quasienergies(u, omega).quasienergies
        b = floquet.sambe_diagonalize(SHALLOW, Linearized(), spec, sol, m_fourier=16)
        assert floquet.quasienergy_set_distance(a, b, omega) < 1e-6


def test_sambe_static_limit(shallow):
    sol, _ = shallow
    spec = DriveSpec(Sine(), 0.0, 1.1)
    eps = floquet.sambe_diagonalize(SHALLOW, Linearized(), spec, sol, m_fourier=4)
    assert floquet.quasienergy_set_distance(eps, floquet.zone_reduce(sol.energies, 1.1), 1.1) < 1e-12


def test_sambe_half_period_shift_invariant(shallow):
    sol, _ = shallow
    spec = DriveSpec(Sine(), 0.88, 1.0)
    a = floquet.sambe_diagonalize(SHALLOW, Linearized(), spec, sol, m_fourier=16)
    b = floquet.sambe_diagonalize(SHALLOW, Linearized(), replace(spec, phase=math.pi), sol, m_fourier=16)
    assert floquet.quasienergy_set_distance(a, b, 1.0) < 1e-10


def test_sambe_truncation_warning(shallow):
    sol, _ = shallow
    with pytest.warns(RuntimeWarning, match="under-converged"):
        floquet.sambe_diagonalize(SHALLOW, Linearized(), DriveSpec(Sine(), 0.88, 0.5), sol, m_fourier=2)
    with pytest.raises(DomainError):
        floquet.sambe_diagonalize(SHALLOW, Linearized(), DriveSpec(Sine(), 0.88, 0.5), sol, m_fourier=0)


# -- splittings and parity -------------------------------------------------------------

def test_static_splitting_and_labels(shallow):
    sol, d = shallow
    fs = floquet.solve(SHALLOW, Linearized(), DriveSpec(Sine(), 0.0, 1.0), sol, d)
    eff = floquet.effective_splitting(fs)
    assert eff.principal == pytest.approx(d.delta_12, abs=1e-10)
    assert not eff.multistate
    static = spatial_parity(sol)
    order = np.argsort(floquet.zone_reduce(sol.energies, 1.0), kind="stable")
    # match modes to eigenstates by overlap
    for j, mode in enumerate(fs.modes_t0.T):
        k = int(np.argmax(np.abs(mode)))
        assert fs.parity[j] == static[k]
    assert len(order) == 15


def test_splitting_spectrum_properties(shallow):
    sol, d = shallow
    spec = DriveSpec(Sine(), 0.88, 1.5)
    fs = floquet.solve(SHALLOW, Linearized(), spec, sol, d)
    eff = floquet.effective_splitting(fs)
    lines = eff.spectrum.lines
    assert lines
    assert sum(w for _, w in lines) == pytest.approx(1.0)
    assert all(0 <= f <= 0.75 + 1e-12 and w >= 0 for f, w in lines)


def test_cdt_splitting_and_opposite_labels(shallow, cdt_solution):
    sol, d = shallow
    exact, fs = cdt_solution
    eff = floquet.effective_splitting(fs)
    assert eff.principal < 0.02 * d.delta_12
    a, b = eff.pair
    assert {fs.parity[a], fs.parity[b]} == {1, -1}
    assert max(fs.parity_defects[a], fs.parity_defects[b]) < 1e-6


@pytest.mark.parametrize("params,wf", [(SHALLOW, SawtoothFourier(5)), (LatticeParams(6.25, 5.4, 0.4), Sine())])
def test_broken_symmetry_labels(params, wf):
    sol = solve_lattice(params)
    d = doublet_data(sol)
    fs = floquet.solve(params, Linearized(), DriveSpec(wf, 0.88, 0.63), sol, d)
    assert set(fs.parity) == {0}
    a, b = floquet.effective_splitting(fs).pair
    assert min(fs.parity_defects[a], fs.parity_defects[b]) > 1e-2


def test_sawtooth_gap_exceeds_sine_minimum(fig3a_crossings, fig3b_scan):
    (exact,) = [c for c in fig3a_crossings if c.kind == "exact-crossing"]
    assert np.nanmin(fig3b_scan.principal()) > 10 * exact.min_gap
    assert np.nanmin(fig3b_scan.principal()) > 0


def test_truncation_robustness(shallow):
    for params, spec in [(SHALLOW, DriveSpec(Sine(), 0.88, 1.0)), (DEEP, DriveSpec(Sine(), 0.5, OMEGA_6KHZ))]:
        out = []
        for k in (15, 25):
            sol = solve_lattice(params, n_states_kept=k)
            fs = floquet.solve(params, Linearized(), spec, sol, doublet_data(sol))
            out.append(floquet.effective_splitting(fs).principal)
        assert abs(out[1] - out[0]) / out[0] < 0.01


# -- scans and crossings ------------------------------------------------------------

def test_scan_validation(shallow):
    sol, d = shallow
    spec = DriveSpec(Sine(), 0.88, 1.0)
    with pytest.raises(DomainError):
        floquet.scan(SHALLOW, Linearized(), spec, "omega_d", [], sol, d)
    with pytest.raises(DomainError):
        floquet.scan(SHALLOW, Linearized(), spec, "omega_d", [1.0, 0.9], sol, d)
    with pytest.raises(DomainError):
        floquet.scan(SHALLOW, Linearized(), spec, "phase", [1.0], sol, d)


def test_scan_failure_recorded(shallow):
    sol, d = shallow
    res = floquet.scan(SHALLOW, Linearized(), DriveSpec(Sine(), 0.88, 1.0), "omega_d", [0.9, 1.0], sol, d,
                       max_steps=64)
    assert res.failures == 2
    assert all(r.status.startswith("error") for r in res.rows)


def test_scan_parallel_matches_serial(deep):
    sol, d = deep
    spec = DriveSpec(Sine(), 0.0, OMEGA_6KHZ)
    grid = [0.0, 0.4, 0.8]
    serial = floquet.scan(DEEP, Linearized(), spec, "amplitude_s", grid, sol, d)
    parallel = floquet.scan(DEEP, Linearized(), spec, "amplitude_s", grid, sol, d, jobs=2)
    assert np.array_equal(serial.principal(), parallel.principal())
    for a, b in zip(serial.rows, parallel.rows):
        assert np.array_equal(a.branch, b.branch)
    assert serial.principal()[0] == pytest.approx(d.delta_12, abs=1e-10)


def test_amplitude_scan_monotone_to_cdt(deep):
    sol, d = deep
    grid = np.arange(0.0, 1.05, 0.1)
    res = floquet.scan(DEEP, Linearized(), DriveSpec(Sine(), 0.0, OMEGA_6KHZ), "amplitude_s", grid, sol, d)
    assert np.all(np.diff(res.principal()) < 0)


def test_static_scan_has_no_crossings(shallow):
    sol, d = shallow
    res = floquet.scan(SHALLOW, Linearized(), DriveSpec(Sine(), 0.0, 1.0), "omega_d", [0.9, 1.2, 1.5, 1.8], sol, d)
    assert np.allclose(res.principal(), d.delta_12, atol=1e-10)
    assert floquet.crossing_detect(res) == []


def test_crossing_detect_needs_three_points(shallow):
    sol, d = shallow
    res = floquet.scan(SHALLOW, Linearized(), DriveSpec(Sine(), 0.0, 1.0), "omega_d", [0.9, 1.2], sol, d)
    with pytest.raises(DomainError):
        floquet.crossing_detect(res)


def test_fig3a_single_exact_crossing(fig3a_crossings):
    exact = [c for c in fig3a_crossings if c.kind == "exact-crossing"]
    assert len(exact) == 1
    c = exact[0]
    assert c.min_gap < 1e-4 and {c.parity_a, c.parity_b} == {1, -1}
    assert 0.6 < c.location < 0.7


def test_fig3b_no_exact_crossing(fig3b_crossings):
    assert all(c.kind == "avoided" for c in fig3b_crossings)


def test_frequency_scan_shape(fig3a_scan, shallow):
    sol, d = shallow
    g = fig3a_scan.principal()
    # minima deeper than 10% of the static splitting; resonance ripples are shallower
    peaks, _ = find_peaks(-g, prominence=0.1 * d.delta_12)
    assert len(peaks) == 1
    assert fig3a_scan.axis_values[peaks[0]] < sol.energies[2] - sol.energies[1]
    for omega in (8.0, 15.0):
        fs = floquet.solve(SHALLOW, Linearized(), DriveSpec(Sine(), 0.88, omega), sol, d)
        assert floquet.effective_splitting(fs).principal == pytest.approx(d.delta_12, rel=0.01)


def test_branch_tracking_permutation(fig3a_scan):
    for row in fig3a_scan.rows:
        assert sorted(row.branch) == list(range(15))


@settings(max_examples=20, deadline=None)
@given(st.permutations(list(range(6))))
def test_dominant_tie_break(perm):
    w = np.array([0.3, 0.3, 0.2, 0.1, 0.05, 0.05])[list(perm)]
    fs = floquet.FloquetSolution(np.zeros(6), np.eye(6), w, 1.0)
    top = fs.dominant(2)
    assert sorted(w[top]) == [0.3, 0.3]
    assert top[0] < top[1]


def test_deep_cdt_preset_amplitude(deep):
    sol, d = deep
    res = floquet.scan(DEEP, Linearized(), DriveSpec(Sine(), 0.0, OMEGA_6KHZ), "amplitude_s", [1.0, 1.05, 1.1], sol, d)
    (c,) = floquet.crossing_detect(res)
    assert c.kind == "exact-crossing"
    assert c.location == pytest.approx(DEEP_CDT_AMPLITUDE, abs=2e-4)
