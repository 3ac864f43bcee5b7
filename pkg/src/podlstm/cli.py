"""``rom`` command-line front end.

Exit codes: 0 success, 2 usage/config error, 3 I/O error, 4 numeric failure.
"""
from __future__ import annotations

import argparse
import contextlib
import csv
import logging
import os
import sys

import numpy as np

from . import svg
from .config import ConfigError, load_config
from .fft import FilterConfig, filter_snapshots, row_psd
from .lstm import TrainingDivergedError, predict_rollout, train
from .pipeline import (
    ErrorReport,
    error_series,
    identify,
    offline,
    relative_l2_error,
    timed_online_predict,
)
from .pod import ReducedTrajectory, SVDError, compute_basis, project, reconstruct
from .serialization import load_basis, load_model, save_basis, save_model
from .snapshots import (
    FileFormatError,
    SnapshotMatrix,
    format_float,
    load_snapshots,
    save_snapshots,
)
from .synth import generate_eulerian

log = logging.getLogger("rom")

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_NUMERIC = 0, 2, 3, 4


class UsageError(Exception):
    pass


def _out(args, msg: str) -> None:
    if not args.quiet:
        print(msg)


# ------------------------------------------------------------------ commands


def cmd_synth(args) -> int:
    cfg = load_config(args.config)
    spec = cfg.synthetic_spec()
    try:
        S = generate_eulerian(
            spec,
            cfg.require("n_time"),
            cfg.require("dt"),
            cfg.get("t0", 0.0),
            name=cfg.get("name", "eps"),
            field=cfg.get("field", 0),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    save_snapshots(S, args.out, args.format)
    _out(args, f"wrote {S.n_dof}x{S.n_time} snapshots to {args.out}")
    return EXIT_OK


def _parse_indices(text: str, n_dof: int) -> list[int]:
    try:
        idx = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"bad DOF index list {text!r}") from None
    for i in idx:
        if not 0 <= i < n_dof:
            raise UsageError(f"DOF index {i} out of range [0, {n_dof})")
    if not idx:
        raise UsageError("no DOF indices given")
    return idx


def cmd_psd_report(args) -> int:
    S = load_snapshots(args.input, args.format)
    dofs = _parse_indices(args.dofs, S.n_dof)
    P = row_psd(S)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["dof_index", "bin", "frequency_hz", "psd"])
        for j in dofs:
            for k in range(S.n_time):
                w.writerow([j, k, format_float(P.frequencies[k]), format_float(P.values[j, k])])
    if args.svg:
        half = S.n_time // 2 + 1
        series = [svg.Series(P.frequencies[:half], P.values[j, :half], f"dof {j}") for j in dofs]
        svg.line_chart(
            series, args.svg, title="PSD", xlabel="frequency [Hz]", ylabel="PSD",
            log_y=True, hline=args.threshold,
        )
    _out(args, f"wrote PSD of {len(dofs)} dof(s) to {args.out}")
    return EXIT_OK


def cmd_filter(args) -> int:
    S = load_snapshots(args.input, args.format)
    try:
        cfg = FilterConfig(args.threshold, not args.no_keep_dc)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    F = filter_snapshots(S, cfg)
    save_snapshots(F, args.out, args.format)
    kept = np.linalg.norm(F.values) / max(np.linalg.norm(S.values), np.finfo(float).tiny)
    _out(args, f"filtered {S.n_dof} rows; norm ratio {kept:.6f}")
    return EXIT_OK


def cmd_pod(args) -> int:
    S = load_snapshots(args.input, args.format)
    if args.delta is not None and not 0 < args.delta <= 1:
        raise UsageError("--delta must lie in (0, 1]")
    if args.modes is not None and not 1 <= args.modes <= min(S.shape):
        raise UsageError(f"--modes must lie in [1, {min(S.shape)}]")
    basis = compute_basis(S, delta=args.delta, n_modes=args.modes)
    save_basis(basis, args.basis_out)
    _out(args, f"Nr = {basis.n_modes}")
    return EXIT_OK


def cmd_train(args) -> int:
    S = load_snapshots(args.input, args.format)
    basis = load_basis(args.basis)
    tcfg = load_config(args.config).training()
    C = project(S, basis)
    if C.n_time <= tcfg.sequence_length:
        raise UsageError(f"need more than {tcfg.sequence_length} snapshots to train")
    model, history = train(C, tcfg)
    save_model(model, args.model_out)
    loss_path = args.loss_out or os.path.splitext(args.model_out)[0] + ".loss.csv"
    with open(loss_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["epoch", "mse"])
        for e, v in enumerate(history):
            w.writerow([e, format_float(v)])
    _out(args, f"final loss {history[-1]:.6e}")
    return EXIT_OK


def cmd_predict(args) -> int:
    if args.steps < 1:
        raise UsageError("steps must be >= 1")
    model = load_model(args.model)
    basis = load_basis(args.basis)
    seed = load_snapshots(args.seed_snapshots, args.format)
    C = project(seed, basis)
    if C.n_time < model.sequence_length:
        raise UsageError(f"seed file has {C.n_time} snapshots, model needs {model.sequence_length}")
    future = predict_rollout(model, C.coefficients.T, args.steps)
    t0 = seed.t0 + seed.n_time * seed.dt
    out = reconstruct(basis, ReducedTrajectory(future.T, t0, seed.dt, seed.field), name=seed.name)
    save_snapshots(out, args.out, args.format)
    if args.reference:
        ref = load_snapshots(args.reference, args.format)
        ref = _align(ref, out)
        for k in range(out.n_time):
            err = relative_l2_error(ref.values[:, k], out.values[:, k])
            _out(args, f"t={out.times[k]:.6g} error {err:.4f}%")
    _out(args, f"wrote {args.steps} predicted snapshot(s) to {args.out}")
    return EXIT_OK


def _align(ref: SnapshotMatrix, out: SnapshotMatrix) -> SnapshotMatrix:
    """Columns of ``ref`` at the times of ``out``."""
    start = int(round((out.t0 - ref.t0) / ref.dt))
    if start < 0 or start + out.n_time > ref.n_time or not np.isclose(ref.dt, out.dt):
        raise UsageError("reference file does not cover the predicted times")
    return ref.columns(start, start + out.n_time)


def cmd_evaluate(args) -> int:
    fom = load_snapshots(args.fom, args.format)
    rom = load_snapshots(args.rom, args.format)
    if fom.shape != rom.shape:
        raise UsageError(f"shape mismatch: FOM {fom.shape}, ROM {rom.shape}")
    try:
        report = error_series(fom, rom, args.split)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(str(exc)) from None
    report.to_csv(args.report_out)
    if args.svg:
        _error_chart(report, args.svg)
    _out(args, _summary(report))
    return EXIT_OK


def _error_chart(report, path) -> None:
    divider = None
    if 0 < report.split_index < report.times.size:
        divider = 0.5 * (report.times[report.split_index - 1] + report.times[report.split_index])
    svg.line_chart(
        [svg.Series(report.times, report.relative_errors, "relative L2 error")],
        path, title="ROM error", xlabel="t [s]", ylabel="error [%]", vline=divider,
    )


def _summary(report) -> str:
    lines = []
    if report.split_index > 0:
        lines.append(f"train: mean {report.train_mean:.6g}% max {report.train_max:.6g}%")
    if report.split_index < report.times.size:
        lines.append(f"validation: mean {report.validation_mean:.6g}% max {report.validation_max:.6g}%")
    return "\n".join(lines)


def cmd_pipeline(args) -> int:
    cfg = load_config(args.config)
    pcfg = cfg.pipeline()
    os.makedirs(args.out_dir, exist_ok=True)
    join = lambda name: os.path.join(args.out_dir, name)  # noqa: E731

    if "input" in cfg:
        S = load_snapshots(cfg.get("input"))
    else:
        S = generate_eulerian(
            cfg.synthetic_spec(), cfg.require("n_time"), cfg.require("dt"), cfg.get("t0", 0.0),
            name=cfg.get("name", "eps"), field=cfg.get("field", 0),
        )
    save_snapshots(S, join("fom.bin"))
    try:
        pcfg.split.check(S.n_time, pcfg.training.sequence_length)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    art = offline(S, pcfg)
    save_snapshots(art.filtered_training, join("filtered_train.bin"))
    save_basis(art.basis, join("basis.bin"))
    save_model(art.model, join("model.bin"))
    with open(join("loss.csv"), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["epoch", "mse"])
        for e, v in enumerate(art.loss_history):
            w.writerow([e, format_float(v)])

    n_train, n_val = pcfg.split.n_train, pcfg.split.n_validation
    steps = cfg.get("predict_steps", n_val)
    ident = identify(art)
    online_seconds = 0.0
    # identification is scored against the filtered training data, prediction against raw FOM
    train_err = error_series(art.filtered_training, ident)
    errors = list(train_err.relative_errors)
    times = list(train_err.times)
    if steps > 0:
        pred, online_seconds = timed_online_predict(art, steps)
        save_snapshots(pred, join("prediction.bin"))
        n_cmp = min(steps, n_val)
        if n_cmp > 0:
            val = error_series(S.columns(n_train, n_train + n_cmp), pred.columns(0, n_cmp), 0)
            errors += list(val.relative_errors)
            times += list(val.times)
    report = ErrorReport(np.array(times), np.array(errors), n_train)
    report.to_csv(join("report.csv"))
    _error_chart(report, join("report.svg"))
    raw = error_series(S.columns(0, n_train), ident)
    with open(join("summary.txt"), "w", encoding="utf-8") as fh:
        fh.write(f"n_modes = {art.basis.n_modes}\n")
        fh.write(f"final_loss = {format_float(art.loss_history[-1])}\n")
        fh.write(f"identification_mean_percent = {format_float(report.train_mean)}\n")
        fh.write(f"identification_vs_unfiltered_mean_percent = {format_float(raw.train_mean)}\n")
        if report.split_index < report.times.size:
            fh.write(f"prediction_mean_percent = {format_float(report.validation_mean)}\n")
            fh.write(f"prediction_max_percent = {format_float(report.validation_max)}\n")
    _out(args, f"Nr = {art.basis.n_modes}, final loss {art.loss_history[-1]:.3e}")
    _out(args, _summary(report))
    _out(args, f"offline {art.offline_seconds:.2f} s, online {online_seconds:.4f} s")
    return EXIT_OK


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    def global_flags(suppress: bool) -> argparse.ArgumentParser:
        # subcommand copies use SUPPRESS so they do not clobber flags given before the command
        d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
        g = argparse.ArgumentParser(add_help=False)
        g.add_argument("--threads", type=int, default=d(1), help="BLAS thread count (default 1)")
        g.add_argument("--quiet", action="store_true", default=d(False), help="suppress informational output")
        g.add_argument("--format", choices=("binary", "csv"), default=d(None),
                       help="snapshot file format (default: by extension, .csv or binary)")
        return g

    common = global_flags(True)
    p = argparse.ArgumentParser(prog="rom", description="POD-LSTM reduced-order modelling toolkit",
                                parents=[global_flags(False)])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", parents=[common], help="generate synthetic snapshots")
    s.add_argument("config")
    s.add_argument("out")
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("psd-report", parents=[common], help="per-DOF PSD as CSV (+ SVG)")
    s.add_argument("input")
    s.add_argument("dofs", help="comma-separated DOF indices")
    s.add_argument("out")
    s.add_argument("--svg")
    s.add_argument("--threshold", type=float)
    s.set_defaults(func=cmd_psd_report)

    s = sub.add_parser("filter", parents=[common], help="PSD-threshold filtering")
    s.add_argument("input")
    s.add_argument("out")
    s.add_argument("--threshold", type=float, required=True)
    s.add_argument("--no-keep-dc", action="store_true", help="let the threshold act on bin 0 too")
    s.set_defaults(func=cmd_filter)

    s = sub.add_parser("pod", parents=[common], help="POD basis extraction")
    s.add_argument("input")
    s.add_argument("basis_out")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--delta", type=float)
    g.add_argument("--modes", type=int)
    s.set_defaults(func=cmd_pod)

    s = sub.add_parser("train", parents=[common], help="train the LSTM on projected snapshots")
    s.add_argument("input")
    s.add_argument("basis")
    s.add_argument("model_out")
    s.add_argument("config")
    s.add_argument("--loss-out")
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("predict", parents=[common], help="autoregressive rollout")
    s.add_argument("model")
    s.add_argument("basis")
    s.add_argument("seed_snapshots")
    s.add_argument("steps", type=int)
    s.add_argument("out")
    s.add_argument("--reference", help="FOM file covering the predicted times; prints per-step error")
    s.set_defaults(func=cmd_predict)

    s = sub.add_parser("evaluate", parents=[common], help="relative L2 error report")
    s.add_argument("fom")
    s.add_argument("rom")
    s.add_argument("report_out")
    s.add_argument("--svg")
    s.add_argument("--split", type=int, help="number of leading training columns (default: all)")
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("pipeline", parents=[common], help="synth/filter/pod/train/predict/evaluate")
    s.add_argument("config")
    s.add_argument("out_dir")
    s.set_defaults(func=cmd_pipeline)
    return p


def _thread_limit(n: int):
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:  # pragma: no cover
        return contextlib.nullcontext()
    return threadpool_limits(limits=n)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s")
    if args.threads < 1:
        print("rom: --threads must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        with _thread_limit(args.threads):
            return args.func(args)
    except (ConfigError, UsageError) as exc:
        print(f"rom: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, FileFormatError) as exc:
        print(f"rom: {exc}", file=sys.stderr)
        return EXIT_IO
    except (TrainingDivergedError, SVDError, FloatingPointError) as exc:
        print(f"rom: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"rom: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
