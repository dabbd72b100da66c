import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from dwf import floquet  # noqa: E402
from dwf.lattice import DriveSpec, LatticeParams, Linearized, SawtoothFourier, Sine  # noqa: E402
from dwf.presets import PRESETS  # noqa: E402
from dwf.stationary import doublet_data, solve_lattice  # noqa: E402

ACCEPTANCE_LINES = []


def full_acceptance():
    return os.environ.get("DWF_FULL_ACCEPTANCE", "") not in ("", "0")


def preset_grid(name):
    g = PRESETS[name]["scan"]["grid"]
    return np.linspace(g["start"], g["stop"], g["num"])


def _fig3_scan(waveform):
    p = LatticeParams(6.25, 5.40)
    sol = solve_lattice(p)
    d = doublet_data(sol)
    return floquet.scan(p, Linearized(), DriveSpec(waveform, 0.88, 1.0), "omega_d", preset_grid("fig3a"), sol, d)


@pytest.fixture(scope="session")
def fig3a_scan():
    return _fig3_scan(Sine())


@pytest.fixture(scope="session")
def fig3b_scan():
    return _fig3_scan(SawtoothFourier(5))


@pytest.fixture(scope="session")
def fig3a_crossings(fig3a_scan):
    return floquet.crossing_detect(fig3a_scan)


@pytest.fixture(scope="session")
def fig3b_crossings(fig3b_scan):
    return floquet.crossing_detect(fig3b_scan)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
