"""Named parameter sets.

Lattice depths, the drive amplitude 0.88 E_r, the 6 kHz drive and the
811.775 nm wavelength are the experimental values; scan grids, the CDT
amplitude of ``fig5`` and dynamics windows are choices made here.
"""
from __future__ import annotations

import copy

from .errors import ConfigError

SHALLOW = {"v1": 6.25, "v2": 5.40, "phi_s": 0.0}  # experimental
DEEP = {"v1": 8.27, "v2": 2.68, "phi_s": 0.0}  # experimental

# Sine CDT amplitude for DEEP at the 6 kHz (nu) drive, located with crossing_detect
# on an amplitude scan and checked in the test suite.
DEEP_CDT_AMPLITUDE = 1.0592

_FREQ_SCAN = {"axis": "omega_d", "grid": {"start": 0.45, "stop": 2.75, "num": 47}}

PRESETS = {
    "fig3a": {
        "description": "frequency scan, sine drive, S = 0.88 E_r",
        "lattice": SHALLOW,
        "drive": {"waveform": "sine", "amplitude_s": 0.88, "omega_d": 1.0},
        "scan": _FREQ_SCAN,
    },
    "fig3b": {
        "description": "frequency scan, band-limited sawtooth drive, S = 0.88 E_r",
        "lattice": SHALLOW,
        "drive": {"waveform": "sawtooth", "harmonics": 5, "amplitude_s": 0.88, "omega_d": 1.0},
        "scan": _FREQ_SCAN,
    },
    "fig4a": {
        "description": "tunneling splitting against drive frequency, S = 0.88 E_r",
        "lattice": SHALLOW,
        "drive": {"waveform": "sine", "amplitude_s": 0.88, "omega_d": 1.0},
        "scan": {"axis": "omega_d", "grid": {"start": 0.45, "stop": 3.5, "num": 62}},
        "dynamics": {"tunneling_periods": 4.0},
    },
    "fig4b": {
        "description": "tunneling splitting against drive amplitude at 6 kHz (omega = 2 pi x 6 kHz)",
        "lattice": DEEP,
        "drive": {"waveform": "sine", "frequency_hz": 6000.0, "frequency_reading": "nu"},
        "scan": {"axis": "amplitude_s", "grid": {"start": 0.0, "stop": 2.0, "num": 41}},
        "dynamics": {"tunneling_periods": 4.0},
    },
    "fig4b_angular": {
        "description": "as fig4b with 6 kHz read as an angular frequency (omega = 6000 rad/s)",
        "lattice": DEEP,
        "drive": {"waveform": "sine", "frequency_hz": 6000.0, "frequency_reading": "angular"},
        "scan": {"axis": "amplitude_s", "grid": {"start": 0.0, "stop": 0.4, "num": 41}},
        "dynamics": {"tunneling_periods": 4.0},
    },
    "fig5": {
        "description": "drive symmetry comparison at the CDT point of the deep lattice",
        "lattice": DEEP,
        "drive": {"waveform": "sine", "amplitude_s": DEEP_CDT_AMPLITUDE, "frequency_hz": 6000.0,
                  "frequency_reading": "nu"},
        "dynamics": {"tunneling_periods": 3.0, "samples_per_period": 4},
        "symmetry": {"variants": [
            {"name": "static", "waveform": "none"},
            {"name": "sine", "waveform": "sine"},
            {"name": "sawtooth", "waveform": "sawtooth", "harmonics": 5},
            {"name": "sine_phi0.4", "waveform": "sine", "phi_s": 0.4},
        ]},
    },
    "fig1a": {
        "description": "undriven tunneling in the deep lattice",
        "lattice": DEEP,
        "drive": {"waveform": "sine", "amplitude_s": 0.0, "frequency_hz": 6000.0, "frequency_reading": "nu"},
        "dynamics": {"tunneling_periods": 3.0, "samples_per_period": 4},
    },
    "fig1b": {
        "description": "sine drive at the CDT point",
        "lattice": DEEP,
        "drive": {"waveform": "sine", "amplitude_s": DEEP_CDT_AMPLITUDE, "frequency_hz": 6000.0,
                  "frequency_reading": "nu"},
        "dynamics": {"tunneling_periods": 3.0, "samples_per_period": 4},
    },
    "fig1c": {
        "description": "sawtooth drive with the CDT amplitude and frequency",
        "lattice": DEEP,
        "drive": {"waveform": "sawtooth", "harmonics": 5, "amplitude_s": DEEP_CDT_AMPLITUDE,
                  "frequency_hz": 6000.0, "frequency_reading": "nu"},
        "dynamics": {"tunneling_periods": 3.0, "samples_per_period": 4},
    },
}


def preset_names():
    return sorted(PRESETS)


def preset_dict(name):
    if name not in PRESETS:
        raise ConfigError("preset", f"unknown preset {name!r}; choose from {', '.join(preset_names())}")
    return copy.deepcopy(PRESETS[name])
