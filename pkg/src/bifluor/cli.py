"""Command line front end.

Six subcommands map onto the library layers:

* ``mollow``        monochromatic spectrum from the Bloch equations
* ``spectrum``      bichromatic spectrum plus the secular line list
* ``map``           spectra stacked over the dressed detuning Delta2
* ``subharmonics``  etalon-filtered dip scan over the weak detuning
* ``degenerate``    equal-frequency drives (phase average / tiny beat)
* ``fit``           Mollow fit (Rabi splitting, T2) of a measured CSV

Every run reads one key=value config (--config), writes CSV products
into --out, and records a metadata.txt with the package version,
timestamps, effective settings (including defaults), any warnings, and
a verbatim echo of the config.  Exit codes: 0 success, 1 validation or
configuration problem, 2 numerical failure, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import os
import sys
import warnings
from datetime import datetime, timezone

import numpy as np

from . import __version__, bloch, csvio
from .config import (
    ConfigFile,
    build_bichromatic_drive,
    build_emitter,
    build_grid,
    build_strong_drive,
    load_config,
    weak_rabi_from_config,
)
from .dressed import doubly_dressed_lines
from .emitter import EmitterParams, DriveField
from .errors import BifluorError, ConfigError
from .floquet import build_periodic_liouvillian, emission_spectrum, periodic_steady_state
from .scans import (
    EtalonFilter,
    central_intensity_curve,
    degenerate_spectrum,
    detuning_map,
    fit_delta1,
    plateau_edges,
    subharmonic_axis,
    subharmonic_scan,
)

__all__ = ["main"]


def _utcnow() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _prepare_out(out_dir: str) -> str:
    os.makedirs(out_dir, exist_ok=True)
    if not os.access(out_dir, os.W_OK):
        raise OSError(f"output directory {out_dir!r} is not writable")
    return out_dir


def _write_metadata(args, cfg: ConfigFile, started: str, notes, extra=None):
    lines = [
        f"command={args.command}",
        f"version={__version__}",
        f"started_utc={started}",
        f"finished_utc={_utcnow()}",
        f"config_path={cfg.path}",
        f"out={args.out}",
        f"strict={getattr(args, 'strict', False)}",
        f"workers={getattr(args, 'workers', 1)}",
    ]
    for key, val in (extra or {}).items():
        lines.append(f"{key}={val}")
    for key, val in cfg.effective().items():
        lines.append(f"config.{key}={val}")
    lines.append(f"n_warnings={len(notes)}")
    for i, note in enumerate(notes):
        lines.append(f"warning_{i}={note}")
    text = "\n".join(lines) + "\n---config---\n" + cfg.text
    csvio.atomic_write_text(os.path.join(args.out, "metadata.txt"), text)


def _axis_from_cfg(cfg: ConfigFile, prefix: str) -> np.ndarray:
    lo = cfg.get_float(f"{prefix}_min_ghz")
    hi = cfg.get_float(f"{prefix}_max_ghz")
    step = cfg.get_float(f"{prefix}_step_ghz")
    if step <= 0.0 or hi <= lo:
        raise ConfigError(f"{cfg.path}: bad {prefix} axis (need min < max, step > 0)")
    count = int(round((hi - lo) / step)) + 1
    return np.linspace(lo, hi, count)


def _cmd_mollow(args, cfg: ConfigFile):
    emitter = build_emitter(cfg)
    strong = build_strong_drive(cfg)
    grid = build_grid(cfg)
    cfg.raise_on_unused()
    spec = bloch.mollow_spectrum(emitter, strong, grid)
    csvio.write_spectrum(os.path.join(args.out, "mollow.csv"), spec)
    print(
        f"wrote mollow.csv ({grid.size} points, "
        f"elastic weight {spec.elastic_weight:.6g})"
    )
    return {}


def _cmd_spectrum(args, cfg: ConfigFile):
    emitter = build_emitter(cfg)
    drive = build_bichromatic_drive(cfg)
    grid = build_grid(cfg)
    tau_max = cfg.get_float("numerics.tau_max_ns", None)
    n_phases = cfg.get_int("numerics.n_phases", 16)
    cfg.raise_on_unused()
    pl = build_periodic_liouvillian(emitter, drive)
    state = periodic_steady_state(pl)
    spec = emission_spectrum(
        pl, state, grid, tau_max=tau_max, n_phases=n_phases, strict=args.strict
    )
    csvio.write_spectrum(os.path.join(args.out, "spectrum.csv"), spec)
    lines = doubly_dressed_lines(drive)
    csvio.write_lines(os.path.join(args.out, "lines.csv"), lines)
    print(
        f"wrote spectrum.csv ({grid.size} points) and lines.csv "
        f"(9 lines, daughter separation {lines.daughter_separation():.4g} GHz)"
    )
    return {"steady_state_cutoff": state.cutoff}


def _cmd_map(args, cfg: ConfigFile):
    emitter = build_emitter(cfg)
    strong = build_strong_drive(cfg)
    weak_rabi = weak_rabi_from_config(cfg, strong)
    phase = cfg.get_float("drive.relative_phase_rad", 0.0)
    grid = build_grid(cfg)
    axis = _axis_from_cfg(cfg, "scan.delta2")
    tau_max = cfg.get_float("numerics.tau_max_ns", None)
    n_phases = cfg.get_int("numerics.n_phases", 16)
    window = cfg.get_float("scan.window_ghz", 0.5)
    want_fit = cfg.get_bool("scan.fit_delta1", False)
    cfg.raise_on_unused()
    result = detuning_map(
        emitter,
        strong,
        weak_rabi,
        axis,
        grid,
        relative_phase=phase,
        workers=args.workers,
        tau_max=tau_max,
        n_phases=n_phases,
        strict=args.strict,
    )
    csvio.write_map(os.path.join(args.out, "map.csv"), result)
    curve = central_intensity_curve(result, window=window, center=strong.detuning)
    csvio.write_curve(
        os.path.join(args.out, "central_curve.csv"),
        curve.delta2,
        curve.intensity,
        x_name="delta2_ghz",
    )
    extra = {"n_failures": len(result.failures)}
    for i, (d2, msg) in enumerate(result.failures):
        extra[f"failure_{i}"] = f"delta2={d2!r}: {msg}"
    if want_fit:
        fit = fit_delta1(curve, strong.rabi, weak_rabi)
        extra["fit_delta1_ghz"] = repr(fit.delta1)
        extra["fit_delta1_converged"] = fit.converged
        print(f"fitted strong detuning: {fit.delta1:.4g} GHz")
    print(
        f"wrote map.csv ({axis.size} x {grid.size}) and central_curve.csv; "
        f"{len(result.failures)} failed rows"
    )
    return extra


def _cmd_subharmonics(args, cfg: ConfigFile):
    emitter = build_emitter(cfg)
    strong = build_strong_drive(cfg)
    alpha_sq = cfg.get_float("scan.alpha_squared", 0.359)
    orders = cfg.get_int_list("scan.orders", (1, 2, 3, 4, 5))
    n_phases = cfg.get_int("numerics.n_phases", 16)
    prominence = cfg.get_float("scan.prominence_frac", 0.1)
    tau_factor = cfg.get_float("scan.tau_factor", 35.0)
    etalon = EtalonFilter(
        center_ghz=cfg.get_float("etalon.center_ghz", 0.0),
        fsr_ghz=cfg.get_float("etalon.fsr_ghz"),
        fwhm_ghz=cfg.get_float("etalon.fwhm_ghz"),
    )
    if cfg.has("scan.delta3_min_ghz"):
        axis = _axis_from_cfg(cfg, "scan.delta3")
    else:
        points = cfg.get_int("scan.points_per_order", 16)
        axis = subharmonic_axis(strong.rabi, orders, points, alpha_sq)
    cfg.raise_on_unused()
    scan = subharmonic_scan(
        emitter,
        strong,
        axis,
        etalon,
        alpha_squared=alpha_sq,
        orders=orders,
        workers=args.workers,
        n_phases=n_phases,
        prominence_frac=prominence,
        tau_factor=tau_factor,
    )
    csvio.write_curve(
        os.path.join(args.out, "subharmonics.csv"),
        scan.delta3,
        scan.intensity,
        x_name="delta3_ghz",
    )
    csvio.write_dip_report(os.path.join(args.out, "dip_report.csv"), scan.dips)
    for dip in scan.dips:
        print(
            f"n={dip.order}: dip at {dip.dip_position_ghz:.4f} GHz "
            f"(bare {dip.unshifted_ghz:.4f}, formula shift "
            f"{dip.formula_shift_ghz:+.4f})"
        )
    print(f"wrote subharmonics.csv ({axis.size} points) and dip_report.csv")
    return {"n_dips": len(scan.dips)}


def _cmd_degenerate(args, cfg: ConfigFile):
    emitter = build_emitter(cfg)
    strong = build_strong_drive(cfg)
    alpha = cfg.get_float("drive.alpha")  # power ratio of the two fields
    grid = build_grid(cfg)
    method = cfg.get_str("scan.method", "phase_average")
    n_default = 256 if method == "phase_average" else 16
    n_phases = cfg.get_int("numerics.n_phases", n_default)
    epsilon = cfg.get_float("scan.epsilon_ghz", None)
    cfg.raise_on_unused()
    spec = degenerate_spectrum(
        emitter, strong, alpha, grid, method=method, n_phases=n_phases, epsilon=epsilon
    )
    csvio.write_spectrum(os.path.join(args.out, "degenerate.csv"), spec)
    extra = {"method": method}
    try:
        lo, hi = plateau_edges(
            spec.freq, spec.intensity, strong.rabi, alpha, strong.detuning
        )
        extra["plateau_low_ghz"] = repr(lo)
        extra["plateau_high_ghz"] = repr(hi)
        print(f"wrote degenerate.csv; upper plateau [{lo:.4g}, {hi:.4g}] GHz")
    except BifluorError:
        print("wrote degenerate.csv; plateau edges not resolvable")
    return extra


def _cmd_fit(args, cfg: ConfigFile):
    freq, intensity = csvio.read_spectrum(args.data)
    t1 = cfg.get_float("emitter.t1_ps")
    detuning = cfg.get_float("fit.detuning_ghz", 0.0)
    rabi2_guess = cfg.get_float("fit.rabi2_guess_ghz")
    t2_guess = cfg.get_float("fit.t2_guess_ps")
    amp_default = float(np.max(intensity) - np.min(intensity))
    amp_guess = cfg.get_float("fit.amplitude_guess", amp_default)
    offset_guess = cfg.get_float("fit.offset_guess", float(np.min(intensity)))
    cfg.raise_on_unused()
    fit = bloch.fit_mollow(
        freq,
        intensity,
        guess=(0.5 * rabi2_guess, t2_guess, amp_guess, offset_guess),
        t1_ps=t1,
        detuning=detuning,
    )
    emitter = EmitterParams(t1=t1, t2=fit.t2_ps)
    drive = DriveField(detuning=detuning, rabi=fit.omega)
    model = fit.amplitude * bloch.mollow_shape(emitter, drive, freq) + fit.offset
    csvio.write_curve(os.path.join(args.out, "fit_model.csv"), freq, model, "freq_ghz")
    result = {
        "rabi2_ghz": fit.rabi2,
        "t2_ps": fit.t2_ps,
        "amplitude": fit.amplitude,
        "offset": fit.offset,
        "rabi2_std_ghz": 2.0 * fit.std_errors[0],
        "t2_std_ps": fit.std_errors[1],
        "residual_norm": fit.residual_norm,
        "n_iter": fit.n_iter,
        "converged": fit.converged,
    }
    csvio.write_keyvalue(os.path.join(args.out, "fit_result.txt"), result)
    print(
        f"fit: Rabi splitting {fit.rabi2:.4f} GHz, T2 {fit.t2_ps:.2f} ps "
        f"({fit.n_iter} iterations, converged={fit.converged})"
    )
    return {key: repr(val) for key, val in result.items()}


_COMMANDS = {
    "mollow": _cmd_mollow,
    "spectrum": _cmd_spectrum,
    "map": _cmd_map,
    "subharmonics": _cmd_subharmonics,
    "degenerate": _cmd_degenerate,
    "fit": _cmd_fit,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bifluor",
        description="Resonance fluorescence of a driven two-level emitter",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("mollow", "monochromatic emission spectrum"),
        ("spectrum", "bichromatic emission spectrum and line list"),
        ("map", "spectra versus the dressed detuning Delta2"),
        ("subharmonics", "etalon-filtered subharmonic dip scan"),
        ("degenerate", "equal-frequency two-field spectrum"),
        ("fit", "fit Rabi splitting and T2 to a measured spectrum"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="key=value run configuration")
        p.add_argument("--out", default=".", help="output directory (default: .)")
        p.add_argument(
            "--strict",
            action="store_true",
            help="escalate truncation warnings to errors",
        )
        p.add_argument(
            "--workers",
            type=int,
            default=1,
            help="process count for scan rows (default: 1)",
        )
        if name == "fit":
            p.add_argument("--data", required=True, help="measured spectrum CSV")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        _prepare_out(args.out)
        started = _utcnow()
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            extra = _COMMANDS[args.command](args, cfg)
        notes = [f"{w.category.__name__}: {w.message}" for w in caught]
        for note in notes:
            print(f"warning: {note}", file=sys.stderr)
        _write_metadata(args, cfg, started, notes, extra)
        return 0
    except BifluorError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
