"""Command-line front end.

Subcommands: steady, sweep-b, scan-2d, temperature, fit-odmr, fit-strain,
synth.  Every run is a pure function of (config, seed): outputs are
byte-identical across reruns, with all numbers printed at full
round-trip precision.

Exit codes: 0 success, 2 input/config error, 3 numerical
non-convergence, 4 partial sweep failure (half or more points failed).
"""

import argparse
import json
import math
import os
import sys

import numpy as np

from . import odmr
from .config import ConfigError, RunConfig, load_config
from .model import (
    CalibrationError,
    build_collapse_ops,
    build_hamiltonian,
    calibrate_pump,
    liouvillian,
)
from .odmr import (
    esodmr_lineshape,
    fit_spectrum,
    fit_strain_distribution,
    format_fit_report,
    format_strain_report,
    load_spectrum,
    model_spectrum,
    polarization_from_amplitudes,
    save_spectrum,
)
from .solver import (
    SolverError,
    electron_polarization,
    nuclear_polarization,
    steady_state,
)
from .sweep import (
    SweepSpec,
    scan_field_strain,
    strain_averaged_polarization,
    sweep_field,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_PARTIAL = 4


def _fmt(x) -> str:
    return "%.17g" % x


def _error_record(exc) -> None:
    record = {"error": type(exc).__name__, "detail": str(exc)}
    print(json.dumps(record, sort_keys=True), file=sys.stderr)


def _ensure_out(out_dir: str) -> str:
    os.makedirs(out_dir, exist_ok=True)
    return out_dir


def _resolve_dissipation(cfg: RunConfig):
    if cfg.calibrate_target is None:
        return cfg.dissipation
    return calibrate_pump(cfg.calibrate_target, cfg.dissipation, cfg.system)


def cmd_steady(cfg: RunConfig, args, out_dir: str, seed: int) -> int:
    diss = _resolve_dissipation(cfg)
    ham = build_hamiltonian(cfg.system)
    lv = liouvillian(ham, build_collapse_ops(diss, cfg.system.dims))
    report = steady_state(lv)
    p_n = nuclear_polarization(report.rho, cfg.system.dims, cfg.system.nuclear_spin)
    p_e = electron_polarization(report.rho, cfg.system.dims)
    path = os.path.join(_ensure_out(out_dir), "steady_state.txt")
    with open(path, "w") as fh:
        fh.write("# steady-state report\n")
        fh.write(f"hilbert_dim {lv.hilbert_dim}\n")
        fh.write(f"null_space_dim {report.null_space_dim}\n")
        fh.write(f"residual_norm {_fmt(report.residual_norm)}\n")
        fh.write(f"p_nuclear {_fmt(p_n)}\n")
        fh.write(f"p_electron {_fmt(p_e)}\n")
        fh.write("rho_real\n")
        for row in report.rho.real:
            fh.write(" ".join(_fmt(v) for v in row) + "\n")
        fh.write("rho_imag\n")
        for row in report.rho.imag:
            fh.write(" ".join(_fmt(v) for v in row) + "\n")
    return EXIT_OK


def _write_sweep_csv(path, header, rows) -> None:
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def _sweep_exit(result) -> int:
    if 2 * result.n_failed >= result.status.size:
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_sweep_b(cfg: RunConfig, args, out_dir: str, seed: int) -> int:
    if cfg.sweep_axis1 is None:
        raise ConfigError("sweep-b requires a sweep.axis1 section")
    spec = SweepSpec(
        base=cfg.system,
        dissipation=_resolve_dissipation(cfg),
        axis1=cfg.sweep_axis1,
        axis2=cfg.sweep_axis2,
    )
    result = sweep_field(spec, threads=args.threads, checkpoint_path=args.checkpoint)
    out = _ensure_out(out_dir)
    rows = [
        (
            _fmt(b), _fmt(result.p_nuclear[i]), _fmt(result.p_electron[i]),
            _fmt(result.residual[i]), result.status[i],
        )
        for i, b in enumerate(result.axis1_values)
    ]
    _write_sweep_csv(
        os.path.join(out, "sweep_b.csv"),
        "b_gauss,nuclear_polarization,electron_polarization,residual,status",
        rows,
    )
    with open(os.path.join(out, "sweep_b_plot.dat"), "w") as fh:
        for i, b in enumerate(result.axis1_values):
            fh.write(f"{_fmt(b)} {_fmt(result.p_nuclear[i])}\n")
    return _sweep_exit(result)


def cmd_scan_2d(cfg: RunConfig, args, out_dir: str, seed: int) -> int:
    if cfg.sweep_axis1 is None or cfg.sweep_axis2 is None:
        raise ConfigError("scan-2d requires sweep.axis1 and sweep.axis2")
    spec = SweepSpec(
        base=cfg.system,
        dissipation=_resolve_dissipation(cfg),
        axis1=cfg.sweep_axis1,
        axis2=cfg.sweep_axis2,
    )
    result = scan_field_strain(spec, threads=args.threads, checkpoint_path=args.checkpoint)
    out = _ensure_out(out_dir)
    rows = []
    for i, b in enumerate(result.axis1_values):
        for j, e in enumerate(result.axis2_values):
            rows.append(
                (
                    _fmt(b), _fmt(e), _fmt(result.p_nuclear[i, j]),
                    _fmt(result.p_electron[i, j]), _fmt(result.residual[i, j]),
                    result.status[i, j],
                )
            )
    _write_sweep_csv(
        os.path.join(out, "scan_2d.csv"),
        "b_gauss,e_es_mhz,nuclear_polarization,electron_polarization,residual,status",
        rows,
    )
    with open(os.path.join(out, "scan_2d_plot.dat"), "w") as fh:
        for i, b in enumerate(result.axis1_values):
            for j, e in enumerate(result.axis2_values):
                fh.write(f"{_fmt(b)} {_fmt(e)} {_fmt(result.p_nuclear[i, j])}\n")
    return _sweep_exit(result)


def cmd_temperature(cfg: RunConfig, args, out_dir: str, seed: int) -> int:
    if cfg.temperature_table is None:
        raise ConfigError("temperature requires a temperature_table section")
    diss = _resolve_dissipation(cfg)
    rows = []
    n_failed = 0
    for temp, dist in cfg.temperature_table:
        try:
            p_n = strain_averaged_polarization(cfg.system, diss, dist)
            rows.append((_fmt(temp), _fmt(p_n), "ok"))
        except SolverError as exc:
            n_failed += 1
            rows.append((_fmt(temp), _fmt(math.nan), type(exc).__name__))
    out = _ensure_out(out_dir)
    _write_sweep_csv(
        os.path.join(out, "temperature.csv"),
        "temperature_k,nuclear_polarization,status",
        rows,
    )
    with open(os.path.join(out, "temperature_plot.dat"), "w") as fh:
        for temp, p_n, _status in rows:
            fh.write(f"{temp} {p_n}\n")
    if 2 * n_failed >= len(cfg.temperature_table):
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_fit_odmr(cfg: RunConfig, args, out_dir: str, seed: int) -> int:
    data = load_spectrum(args.spectrum)
    fit = cfg.fit
    report = fit_spectrum(
        data, fit.n_peaks, jacobian=fit.jacobian, max_iter=fit.max_iter
    )
    polarization = None
    if fit.m_values is not None:
        if len(fit.m_values) != fit.n_peaks:
            raise ConfigError(
                f"fit.m_values has {len(fit.m_values)} entries for {fit.n_peaks} peaks"
            )
        amplitudes = [pk.amplitude for pk in report.peak_set.peaks]
        sigmas = [unc[2] for unc in report.peak_uncertainties]
        polarization = polarization_from_amplitudes(
            amplitudes, fit.m_values, cfg.system.nuclear_spin, uncertainties=sigmas
        )
    path = os.path.join(_ensure_out(out_dir), "fit_odmr.txt")
    with open(path, "w") as fh:
        fh.write(format_fit_report(report, polarization))
    return EXIT_OK if report.converged else EXIT_NUMERICAL


def cmd_fit_strain(cfg: RunConfig, args, out_dir: str, seed: int) -> int:
    data = load_spectrum(args.spectrum)
    fit = cfg.fit
    report = fit_strain_distribution(
        data, fit.d_es_mhz, fit.natural_fwhm_mhz,
        fit_d_es=fit.fit_d_es, max_iter=fit.max_iter,
    )
    path = os.path.join(_ensure_out(out_dir), "fit_strain.txt")
    with open(path, "w") as fh:
        fh.write(format_strain_report(report))
    return EXIT_OK if report.converged else EXIT_NUMERICAL


def cmd_synth(cfg: RunConfig, args, out_dir: str, seed: int) -> int:
    synth = cfg.synth
    if synth is None:
        raise ConfigError("synth requires a synth section")
    grid = np.linspace(synth.grid.start_mhz, synth.grid.stop_mhz, synth.grid.count)
    header = [
        "synthetic spectrum (frequency_mhz, contrast)",
        f"kind {synth.kind}",
        f"seed {seed}",
        f"noise {_fmt(synth.noise)}",
    ]
    if synth.kind == "odmr":
        clean = model_spectrum(synth.peak_set, grid)
    else:
        clean = esodmr_lineshape(
            synth.strain, synth.d_es_mhz, synth.natural_fwhm_mhz, grid,
            amplitude=synth.amplitude,
        )
    contrast = clean.contrast
    if synth.noise > 0:
        rng = np.random.default_rng(seed)
        contrast = contrast + synth.noise * rng.standard_normal(contrast.size)
    spectrum = odmr.OdmrSpectrum(frequency=grid, contrast=contrast)
    path = os.path.join(_ensure_out(out_dir), "synth_spectrum.txt")
    save_spectrum(path, spectrum, header_lines=header)
    return EXIT_OK


COMMANDS = {
    "steady": cmd_steady,
    "sweep-b": cmd_sweep_b,
    "scan-2d": cmd_scan_2d,
    "temperature": cmd_temperature,
    "fit-odmr": cmd_fit_odmr,
    "fit-strain": cmd_fit_strain,
    "synth": cmd_synth,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nvpol",
        description="Steady-state nuclear-polarization simulation and ODMR analysis",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="YAML run configuration")
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--seed", type=int, default=None, help="override the config seed")
    common.add_argument("--threads", type=int, default=1, help="sweep worker threads")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("steady", parents=[common], help="single steady-state solve")
    for name in ("sweep-b", "scan-2d"):
        sp = sub.add_parser(name, parents=[common], help=f"{name} sweep to CSV")
        sp.add_argument("--checkpoint", default=None, help="resumable checkpoint file")
    sub.add_parser("temperature", parents=[common], help="strain-averaged temperature curve")
    for name in ("fit-odmr", "fit-strain"):
        sp = sub.add_parser(name, parents=[common], help=f"{name} on a spectrum file")
        sp.add_argument("spectrum", help="two-column spectrum file")
    sub.add_parser("synth", parents=[common], help="write a synthetic spectrum")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        cfg = load_config(args.config)
        seed = args.seed if args.seed is not None else cfg.seed
        return COMMANDS[args.command](cfg, args, out_dir=args.out, seed=seed)
    except (ConfigError, OSError) as exc:
        _error_record(exc)
        return EXIT_CONFIG
    except (CalibrationError, SolverError) as exc:
        _error_record(exc)
        return EXIT_NUMERICAL
    except ValueError as exc:
        _error_record(exc)
        return EXIT_CONFIG


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
