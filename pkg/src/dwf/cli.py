"""Command-line entry point: ``dwf <spectrum|floquet-scan|dynamics|symmetry-report>``."""
from __future__ import annotations

import argparse
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import floquet, twomode
from .config import load_config
from .csvio import write_csv
from .dynamics import fit_tunneling_frequency, propagate
from .errors import ConfigError, ConvergenceError, DomainError
from .lattice import DriveSpec, LatticeParams, Sine, parity_defect, static_potential, symmetry_defect
from .presets import preset_names
from .stationary import doublet_data, solve_lattice, spatial_parity
from .svg import COLORS, Plot

log = logging.getLogger("dwf")

EXIT_OK, EXIT_CONFIG, EXIT_CONVERGENCE, EXIT_PARTIAL = 0, 2, 3, 4


def _label(p):
    return {1: "+1", -1: "-1"}.get(int(p), "broken")


def _static(cfg, params=None):
    params = params or cfg.lattice_params()
    basis = cfg.basis()
    sol = solve_lattice(params, basis, cfg.solver.n_states_kept)
    return params, basis, sol, doublet_data(sol, basis)


# ---------------------------------------------------------------------------
# spectrum


def cmd_spectrum(cfg, out, plots=False):
    params, basis, sol, dbl = _static(cfg)
    parity = spatial_parity(sol)
    write_csv(out / "spectrum.csv", ["index", "energy_Er", "parity"],
              [[i + 1, float(e), _label(p)] for i, (e, p) in enumerate(zip(sol.energies, parity))])
    write_csv(out / "doublet.csv", ["delta12_Er", "x12", "right_half_cell_probability", "degenerate"],
              [[dbl.delta_12, dbl.x12, dbl.right_half_cell, dbl.degenerate]])
    if plots:
        x = np.linspace(-math.pi, math.pi, 401)
        plot = Plot("static potential over one cell", "kx", "V / E_r")
        plot.line(x, static_potential(params, x), label="V(x)")
        for e in sol.energies[:4]:
            plot.line(x[[0, -1]], [e, e], dash="4 3", width=1.0)
        plot.save(out / "potential.svg")
    return EXIT_OK


# ---------------------------------------------------------------------------
# floquet scan


def run_scan(cfg, jobs=1):
    if cfg.scan is None:
        raise ConfigError("scan", "missing")
    grid = cfg.scan.values()
    if not grid:
        raise ConfigError("scan.grid", "empty grid")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ConfigError("scan.grid", "must be strictly ascending")
    params, basis, sol, dbl = _static(cfg)
    s = cfg.solver
    return floquet.scan(params, cfg.drive_form(), cfg.drive_spec(), cfg.scan.axis, grid, sol, dbl, jobs=jobs,
                        tol=s.quasi_tol, floor=s.weight_floor, multistate_ratio=s.multistate_ratio,
                        max_steps=s.max_steps)


def scan_rows(result):
    ctx = result.context
    tm = twomode.TwoModeParams.from_doublet(ctx.doublet)
    k = ctx.sol.n_states_kept
    header = (["axis_value"] + [f"eps_alpha_{j + 1}" for j in range(k)] +
              ["principal_splitting_Er", "weight_1", "weight_2", "parity_1", "parity_2", "flag_multistate",
               "two_mode_splitting_Er", "status"])
    rows = []
    for r in result.rows:
        spec = ctx.spec_at(r.axis_value)
        two = float(twomode.two_mode_splitting(tm, spec.amplitude_s, spec.omega_d))
        if not r.ok:
            rows.append([r.axis_value] + [math.nan] * k + [math.nan] * 3 + ["", "", False, two, r.status])
            continue
        fs, sp = r.solution, r.splitting
        a, b = sp.pair
        rows.append([r.axis_value] + [float(fs.quasienergies[j]) for j in r.branch] +
                    [sp.principal, float(fs.weights[a]), float(fs.weights[b]), _label(fs.parity[a]),
                     _label(fs.parity[b]), sp.multistate, two, "ok"])
    return header, rows


def _scan_plots(result, out, header, rows):
    ctx = result.context
    x = result.axis_values
    axis_label = "hbar omega_d / E_r" if ctx.axis == "omega_d" else "S / E_r"
    qe = Plot("quasienergies (shading: weight on |R>)", axis_label, "quasienergy / E_r")
    for r in result.rows:
        if r.ok:
            qe.points(np.full(len(r.solution.quasienergies), r.axis_value), r.solution.quasienergies,
                      color="#1f77b4", alpha=np.sqrt(r.solution.weights))
    if ctx.axis == "omega_d":
        qe.line(x, x / 2, color="#999999", dash="2 2", width=1.0)
        qe.line(x, -x / 2, color="#999999", dash="2 2", width=1.0)
    qe.save(out / "quasienergy.svg")
    sp = Plot("effective tunneling splitting", axis_label, "splitting / E_r")
    sp.line(x, result.principal(), label="Floquet")
    sp.line(x, [row[header.index("two_mode_splitting_Er")] for row in rows], label="two-mode", dash="5 3")
    sp.line(x, np.full(len(x), ctx.doublet.delta_12), label="undriven", color="#999999", dash="2 2", width=1.0)
    sp.save(out / "splitting.svg")


def cmd_floquet_scan(cfg, out, plots=False, jobs=1):
    result = run_scan(cfg, jobs)
    header, rows = scan_rows(result)
    write_csv(out / "scan.csv", header, rows)
    crossings = []
    if sum(r.ok for r in result.rows) >= 3:
        crossings = floquet.crossing_detect(result, resolution=cfg.scan.crossing_resolution)
    write_csv(out / "crossings.csv",
              ["axis_lower", "axis_upper", "location", "min_gap_Er", "type", "parity_a", "parity_b"],
              [[c.lower, c.upper, c.location, c.min_gap, c.kind, _label(c.parity_a), _label(c.parity_b)]
               for c in crossings])
    if plots:
        _scan_plots(result, out, header, rows)
    return EXIT_PARTIAL if result.failures else EXIT_OK


# ---------------------------------------------------------------------------
# dynamics


def dynamics_window(cfg, spec, delta_12):
    d = cfg.dynamics
    if d.t_final is not None:
        t_final = d.t_final
    elif d.tunneling_periods is not None:
        t_final = d.tunneling_periods * 2 * math.pi / delta_12
    else:
        raise ConfigError("dynamics.t_final", "give t_final or tunneling_periods")
    if d.sample_dt is not None:
        sample_dt = d.sample_dt
    else:
        if d.samples_per_period < 1:
            raise ConfigError("dynamics.samples_per_period", "must be at least 1")
        sample_dt = spec.period / d.samples_per_period
    return t_final, sample_dt


def run_dynamics(cfg, params=None, spec=None, delta_ref=None):
    params, basis, sol, dbl = _static(cfg, params)
    spec = spec or cfg.drive_spec()
    t_final, sample_dt = dynamics_window(cfg, spec, delta_ref or dbl.delta_12)
    initial = dbl.right_state if cfg.dynamics.initial == "right" else dbl.left_state
    trace = propagate(params, cfg.drive_form(), spec, t_final, sample_dt, initial=initial, basis=basis,
                      doublet=dbl, kept=sol, truncated=cfg.dynamics.truncated, readout=cfg.dynamics.readout,
                      state_tol=cfg.solver.state_tol, max_steps=cfg.solver.max_steps)
    fit = fit_tunneling_frequency(trace, stroboscopic=cfg.dynamics.fit_stroboscopic,
                                  amplitude_floor=cfg.dynamics.fit_floor)
    return trace, fit, dbl


def _half_transfer(trace):
    hit = np.flatnonzero(trace.p_left >= 0.5)
    return float(trace.times[hit[0]]) if hit.size else math.nan


def cmd_dynamics(cfg, out, plots=False):
    trace, fit, dbl = run_dynamics(cfg)
    n = int(trace.orders.max())
    header = ["t_hbar_over_Er", "p_left", "p_right"] + [f"order_m{m}" for m in range(-n, n + 1)]
    write_csv(out / "trace.csv", header,
              [[t, pl, pr] + list(mo) for t, pl, pr, mo in zip(trace.times, trace.p_left, trace.p_right,
                                                                trace.momentum_orders)])
    write_csv(out / "fit.csv",
              ["frequency_Er", "amplitude", "offset", "phase", "residual", "status", "delta12_Er", "max_p_left",
               "t_half_transfer", "max_truncation_leakage", "norm_error"],
              [[fit.frequency, fit.amplitude, fit.offset, fit.phase, fit.residual, fit.status, dbl.delta_12,
                float(trace.p_left.max()), _half_transfer(trace), float(trace.truncation_leakage.max()),
                trace.norm_error]])
    if plots:
        plot = Plot("well populations", "t / (hbar/E_r)", "probability")
        plot.points(trace.times, trace.p_left, label="p_left")
        plot.points(trace.times, trace.p_right, color=COLORS[1], label="p_right")
        tt = np.linspace(trace.times[0], trace.times[-1], 1000)
        if fit.status != "no-oscillation":
            plot.line(tt, fit.offset + fit.amplitude * np.sin(fit.frequency * tt + fit.phase), label="fit")
        plot.save(out / "trace.svg")
    return EXIT_OK


# ---------------------------------------------------------------------------
# symmetry report


def _variant_setup(cfg, v):
    base = cfg.lattice_params()
    params = LatticeParams(base.v1, base.v2, base.phi_s if v.phi_s is None else v.phi_s)
    spec = cfg.drive_spec()
    amp = spec.amplitude_s if v.amplitude_s is None else v.amplitude_s
    if v.waveform in (None, "none"):
        return params, replace(spec, waveform=Sine(), amplitude_s=0.0)
    wf = cfg.waveform(v.waveform, v.harmonics)
    return params, replace(spec, waveform=wf, amplitude_s=amp)


def cmd_symmetry_report(cfg, out, plots=False):
    variants = cfg.symmetry.variants
    if len(variants) < 2:
        raise ConfigError("symmetry.variants", "need at least two variants")
    names = [v.name for v in variants]
    if any(not n for n in names):
        raise ConfigError("symmetry.variants", "every variant needs a name")
    dup = sorted({n for n in names if names.count(n) > 1})
    if dup:
        raise ConfigError("symmetry.variants", f"duplicate variant name {dup[0]!r}")
    setups = [_variant_setup(cfg, v) for v in variants]
    _, _, _, ref = _static(cfg)
    rows, traces = [], []
    for v, (params, spec) in zip(variants, setups):
        trace, fit, dbl = run_dynamics(cfg, params, spec, delta_ref=ref.delta_12)
        _, basis, sol, _ = _static(cfg, params)
        fs = floquet.solve(params, cfg.drive_form(), spec, sol, dbl, cfg.solver.quasi_tol,
                           max_steps=cfg.solver.max_steps)
        eff = floquet.effective_splitting(fs, cfg.solver.weight_floor, cfg.solver.multistate_ratio)
        a, b = eff.pair
        rows.append([v.name, type(spec.waveform).__name__, spec.amplitude_s, params.phi_s,
                     symmetry_defect(spec), parity_defect(params, cfg.drive_form(), spec),
                     float(max(fs.parity_defects[a], fs.parity_defects[b])), _label(fs.parity[a]),
                     _label(fs.parity[b]), eff.principal, fit.frequency, fit.amplitude, fit.status,
                     float(trace.p_left.max()), _half_transfer(trace)])
        traces.append((v.name, trace))
    write_csv(out / "symmetry.csv",
              ["variant", "waveform", "amplitude_s", "phi_s", "symmetry_defect", "potential_parity_defect",
               "mode_parity_defect", "parity_1", "parity_2", "floquet_splitting_Er", "fitted_frequency_Er",
               "fit_amplitude", "fit_status", "max_p_left", "t_half_transfer"], rows)
    if plots:
        plot = Plot("left-well population by drive variant", "t / (hbar/E_r)", "p_left")
        for name, tr in traces:
            plot.line(tr.times, tr.p_left, label=name)
        plot.save(out / "symmetry.svg")
    return EXIT_OK


COMMANDS = {
    "spectrum": cmd_spectrum,
    "floquet-scan": cmd_floquet_scan,
    "dynamics": cmd_dynamics,
    "symmetry-report": cmd_symmetry_report,
}


def build_parser():
    ap = argparse.ArgumentParser(prog="dwf", description="Floquet simulator for a driven double-well lattice")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", help="YAML run configuration")
    ap.add_argument("--preset", choices=preset_names(), help="built-in parameter set, overridden by --config")
    ap.add_argument("--out", help="output directory (default: output.directory of the config)")
    ap.add_argument("--jobs", type=int, default=1, help="parallel scan workers")
    ap.add_argument("--plots", action="store_true", help="also write SVG plots")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.config is None and args.preset is None:
            raise ConfigError("", "give --config and/or --preset")
        if args.jobs < 1:
            raise ConfigError("--jobs", "must be at least 1")
        cfg = load_config(args.config, args.preset)
        out = Path(args.out or cfg.output.directory)
        out.mkdir(parents=True, exist_ok=True)
        plots = args.plots or cfg.output.plots
        cmd = COMMANDS[args.command]
        if args.command == "floquet-scan":
            return cmd(cfg, out, plots, args.jobs)
        return cmd(cfg, out, plots)
    except (ConfigError, DomainError) as exc:
        print(f"dwf: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as exc:
        detail = ""
        if isinstance(exc, ConvergenceError) and exc.achieved is not None:
            detail = f" (achieved {exc.achieved:.3g}, target {exc.target:.3g})"
        print(f"dwf: numerical failure: {exc}{detail}", file=sys.stderr)
        return EXIT_CONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
