"""Command-line surface wiring the library into reproducible batch jobs.

Subcommands::

    simulate   write truth.csv + log.csv for the configured profile/models
    calibrate  estimate static biases (and scale polynomials when a
               reference channel is present) from a log
    tune       tune the configured filter variant (or the low-pass
               constants with --variant lowpass) against the reference
               encoder channel
    run        correct a log and run the configured filter; write estimates
    eval       MSE between an estimate column and a reference column
    spectrum   magnitude spectrum of one log column

Every command echoes the resolved configuration and seed, writes artifacts
into --out, and never embeds timestamps, so identical inputs produce
byte-identical outputs.

Exit codes: 0 ok, 2 usage, 3 parse, 4 numeric/contract, 5 optimization
failure.
"""

import argparse
import os
import sys

import numpy as np

from . import analysis, filters, tuning
from .config import check_dt_matches, load_config
from .correction import run_correction
from .errors import (
    ConfigError,
    OptimizationFailure,
    ParseError,
    TiltkitError,
)
from .logio import parse_log, read_columns, write_log, write_truth
from .model import default_dynamic_profile, simulate_run, zero_motion_profile
from .reference import GRAVITY

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_CONTRACT = 4
EXIT_OPTIMIZATION = 5

COMMANDS = ("simulate", "calibrate", "tune", "run", "eval", "spectrum")


def accumulate_reference(ref_counts, N_ref):
    """Reference tilt from encoder pulse counts: cumulative 360*n/N degrees.

    The angle before the first sample is zero (the rig starts vertical), so
    sample k already includes that sample's pulses.
    """
    if N_ref < 1:
        raise ConfigError(f"N_ref must be >= 1, got {N_ref}")
    counts = np.asarray(ref_counts, dtype=float)
    return np.cumsum(counts) * (360.0 / N_ref)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="tiltkit",
        description="Tilt measurement toolkit: simulate, correct, filter, tune.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="key=value config file")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--log", help="input CSV log")
        p.add_argument("--variant", help="filter variant override")
        p.add_argument("--dt-ms", type=float, dest="dt_ms", help="sample time override, ms")
        p.add_argument("--seed", type=int, help="seed override")
        p.add_argument("--debug-intermediates", action="store_true",
                       help="include correction intermediates in run output")
        if name == "eval":
            p.add_argument("--truth", help="reference CSV (e.g. simulate's truth.csv)")
            p.add_argument("--est-column", default="phi_hat_deg")
            p.add_argument("--ref-column", default="phi_deg")
        if name == "spectrum":
            p.add_argument("--channel", default="gyro_dps", help="column to analyse")
    return parser


def _resolve_config(args):
    config = load_config(args.config)
    if args.dt_ms is not None:
        config.dt_ms = args.dt_ms
    if args.seed is not None:
        config.seed = args.seed
    if args.variant is not None and args.variant != "lowpass":
        config.variant = filters.canonical_variant(args.variant)
    return config


def _echo(config):
    print("# resolved configuration")
    print(config.to_text(), end="")
    print(f"# seed={config.seed}")


def _outpath(args, name):
    os.makedirs(args.out, exist_ok=True)
    return os.path.join(args.out, name)


def _write_text(path, text):
    with open(path, "w") as fh:
        fh.write(text)


def cmd_simulate(config, args):
    if config.profile == "zero":
        profile = zero_motion_profile(config.duration_s, config.dt)
    elif config.profile == "dynamic":
        profile = default_dynamic_profile(config.duration_s, config.dt)
    else:
        raise ConfigError(f"unknown profile {config.profile!r} (zero|dynamic)")
    truth, log = simulate_run(profile, config.gyro_model(), config.accel_model(),
                              config.correction_params(), config.seed)
    write_truth(_outpath(args, "truth.csv"), truth)
    write_log(_outpath(args, "log.csv"), log)
    print(f"# wrote truth.csv and log.csv ({len(log)} samples)")
    return EXIT_OK


def cmd_calibrate(config, args):
    """Two-stage sensor calibration.

    On a static log (no reference channel): estimate the three channel
    biases by averaging; the y accelerometer rests at +g so its bias is the
    mean minus gravity.  On a deflection log (reference channel present):
    fit the scale-factor polynomials against the reference tilt, removing
    the biases already stored in the config (run the static stage first).
    """
    if not args.log:
        raise ConfigError("calibrate needs --log with a recording")
    log = parse_log(args.log)

    lines = []
    diag = []
    if log.ref_count is None:
        gyro_est = tuning.estimate_static_bias(log, "gyro_dps")
        acc_x_est = tuning.estimate_static_bias(log, "acc_x_mps2")
        acc_y_est = tuning.estimate_static_bias(log, "acc_y_mps2")
        lines += [
            f"gyro_bias_dps={gyro_est.bias!r}",
            f"accel_bias_x_mps2={acc_x_est.bias!r}",
            f"accel_bias_y_mps2={acc_y_est.bias - GRAVITY!r}",
        ]
        diag += [
            f"# gyro min={gyro_est.minimum!r} max={gyro_est.maximum!r} "
            f"windows={len(gyro_est.window_means)}",
            f"# acc_x min={acc_x_est.minimum!r} max={acc_x_est.maximum!r}",
            f"# acc_y min={acc_y_est.minimum!r} max={acc_y_est.maximum!r}",
            "# no reference channel: static stage only, polynomials not fitted",
        ]
    else:
        ref_phi = accumulate_reference(log.ref_count, config.N_ref)
        ref_rad = np.radians(ref_phi)
        px = log.acc_x_mps2 - config.accel_bias_x_mps2
        py = log.acc_y_mps2 - config.accel_bias_y_mps2
        fit_x = tuning.fit_scale_factor(np.column_stack([px, GRAVITY * np.sin(ref_rad)]))
        fit_y = tuning.fit_scale_factor(np.column_stack([py, GRAVITY * np.cos(ref_rad)]))
        for i, c in enumerate(fit_x.coefficients, start=1):
            lines.append(f"poly_x_{i}={c!r}")
        for i, c in enumerate(fit_y.coefficients, start=1):
            lines.append(f"poly_y_{i}={c!r}")
        diag.append(f"# scale fit mse_x={fit_x.mse!r} mse_y={fit_y.mse!r}")

    text = "\n".join(lines + diag) + "\n"
    _write_text(_outpath(args, "calibration.cfg"), text)
    print(text, end="")
    return EXIT_OK


def cmd_tune(config, args):
    if not args.log:
        raise ConfigError("tune needs --log with a training recording")
    log = parse_log(args.log)
    check_dt_matches(config, log)
    if log.ref_count is None:
        raise ConfigError("tune needs a log with the reference channel (ref_count)")
    ref_phi = accumulate_reference(log.ref_count, config.N_ref)
    params = config.correction_params()
    cfg = config.optimizer_config()

    if args.variant == "lowpass":
        res = tuning.tune_time_constants(log, ref_phi, params, cfg)
        text = (f"T_omega_s={res.T_omega!r}\nT_v_s={res.T_v!r}\n"
                f"# mse={res.mse!r} iterations={res.opt.iterations} "
                f"converged={res.opt.converged}\n")
        _write_text(_outpath(args, "tune_lowpass.cfg"), text)
        print(text, end="")
        return EXIT_OK

    corrected = run_correction(log, params)
    seed_params = config.filter_params()
    x0 = None
    if seed_params is not None:
        order = tuning.PARAM_ORDER[filters.canonical_variant(config.variant)]
        x0 = [seed_params[name] for name in order]
    result = tuning.tune_filter(config.variant, corrected, ref_phi, config.dt,
                                cfg=cfg, x0=x0)
    report = analysis.make_report([result])
    report.write(args.out)
    print(report.text, end="")
    return EXIT_OK


def cmd_run(config, args):
    if not args.log:
        raise ConfigError("run needs --log")
    log = parse_log(args.log)
    check_dt_matches(config, log)
    params = config.correction_params()
    corrected = run_correction(log, params)

    filter_params = config.filter_params()
    if filter_params is None:
        raise ConfigError(f"variant {config.variant} parameters missing from config")
    spec = filters.make_filter(config.variant, filter_params, config.dt)
    phi_hat = filters.run_filter(spec, corrected)

    header = ["t", "phi_hat_deg", "phi_bar_deg", "rate_bar_dps"]
    if args.debug_intermediates:
        header += ["a_c", "a_e", "a_t", "a_t_x", "a_t_y"]
    rows = []
    for k, c in enumerate(corrected):
        row = [repr(float(log.t[k])), repr(float(phi_hat[k])),
               repr(c.phi_bar), repr(c.rate_bar)]
        if args.debug_intermediates:
            row += [repr(c.a_c), repr(c.a_e), repr(c.a_t), repr(c.a_t_x), repr(c.a_t_y)]
        rows.append(row)
    path = _outpath(args, "estimate.csv")
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")
    print(f"# wrote estimate.csv ({len(rows)} samples)")
    return EXIT_OK


def cmd_eval(config, args):
    if not args.log:
        raise ConfigError("eval needs --log with the estimate CSV")
    est_cols = read_columns(args.log)
    if args.truth:
        ref_cols = read_columns(args.truth)
    else:
        ref_cols = est_cols
    if args.est_column not in est_cols:
        raise ConfigError(f"column {args.est_column!r} not in {args.log}")
    if args.ref_column not in ref_cols:
        raise ConfigError(f"column {args.ref_column!r} not found for reference")
    est = est_cols[args.est_column]
    ref = ref_cols[args.ref_column]
    if len(est) != len(ref):
        raise ConfigError(f"estimate has {len(est)} samples, reference {len(ref)}")
    value = analysis.mse(ref, est)
    text = f"mse_deg2={value!r}\nn={len(est)}\n"
    _write_text(_outpath(args, "eval.txt"), text)
    print(text, end="")
    return EXIT_OK


def cmd_spectrum(config, args):
    if not args.log:
        raise ConfigError("spectrum needs --log")
    cols = read_columns(args.log)
    if args.channel not in cols:
        raise ConfigError(f"column {args.channel!r} not in {args.log}")
    signal = cols[args.channel]
    sp = analysis.noise_spectrum(signal, config.dt)
    path = _outpath(args, "spectrum.csv")
    with open(path, "w") as fh:
        fh.write("frequency_hz,magnitude\n")
        for f, m in zip(sp.frequencies, sp.magnitudes):
            fh.write(f"{float(f)!r},{float(m)!r}\n")
    print(f"# wrote spectrum.csv ({len(sp.frequencies)} bins, "
          f"area={analysis.spectrum_area(sp)!r})")
    return EXIT_OK


_HANDLERS = {
    "simulate": cmd_simulate,
    "calibrate": cmd_calibrate,
    "tune": cmd_tune,
    "run": cmd_run,
    "eval": cmd_eval,
    "spectrum": cmd_spectrum,
}


def dispatch(command, config, args):
    """Run one subcommand against a resolved config; returns the exit code."""
    if command not in _HANDLERS:
        raise ConfigError(f"unknown command {command!r}")
    _echo(config)
    return _HANDLERS[command](config, args)


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else EXIT_USAGE
    try:
        config = _resolve_config(args)
        return dispatch(args.command, config, args)
    except (ParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OptimizationFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OPTIMIZATION
    except TiltkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONTRACT


if __name__ == "__main__":
    sys.exit(main())
