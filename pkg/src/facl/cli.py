"""Command-line interface.

Subcommands: ``gen`` (sequence generation), ``eval`` (metric reports),
``reconstruct`` (loss ablation by direct optimization), ``gradcheck``
(finite-difference validation), ``study`` (decomposition sweeps and the
transform/metric table).

Every subcommand takes ``--config FILE`` with flat ``key=value`` lines that
override defaults (explicit flags win over the file), and writes a manifest
sidecar with the fully resolved configuration next to its outputs, so any
output set can be reproduced bit-identically from its manifest.

Exit codes: 0 success, 2 usage or flag validation, 3 data error,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .arrayio import read_sequences, write_sequences
from .datagen import GenConfig, generate_dataset, load_digit_corpus, synthetic_digit_corpus
from .errors import DegenerateInputError, DivergenceError, ShapeError
from .losses import LOSSES, ScheduleConfig
from .metrics import MetricConfig, MetricReport, evaluate_sequences
from .optim import OptRunConfig, grad_check, reconstruct
from .transforms import (
    fal_curve_sweep,
    make_bimodal_field,
    metric_transform_table,
    table_to_csv,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4


class UsageError(Exception):
    pass


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(part) for part in text.split(",") if part.strip())


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(part) for part in text.split(",") if part.strip())


def _resolved(args: argparse.Namespace) -> dict:
    skip = {"func", "config", "subcommand"}
    return {k: v for k, v in vars(args).items() if k not in skip and v is not None}


def write_manifest(path, subcommand: str, args: argparse.Namespace, outputs: list) -> None:
    lines = [f"subcommand={subcommand}", f"version={__version__}"]
    lines += [f"{key}={value}" for key, value in sorted(_resolved(args).items())]
    lines += [f"output_{i}={out}" for i, out in enumerate(outputs)]
    Path(path).write_text("\n".join(lines) + "\n")


def _load_config_file(path) -> dict[str, str]:
    values = {}
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#") or "=" not in line:
            continue
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


def _apply_config(subparser: argparse.ArgumentParser, values: dict[str, str]) -> None:
    defaults = {}
    for action in subparser._actions:
        if action.dest in values:
            raw = values[action.dest]
            if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
                defaults[action.dest] = raw.lower() in ("1", "true", "yes")
            elif action.type is not None:
                defaults[action.dest] = action.type(raw)
            else:
                defaults[action.dest] = raw
    subparser.set_defaults(**defaults)


def _load_field(path) -> np.ndarray:
    arr = np.load(path)
    if arr.ndim != 2:
        raise ValueError(f"{path}: expected a 2D field, got shape {arr.shape}")
    return np.asarray(arr, dtype=np.float64)


# ---------------------------------------------------------------------------
# gen
# ---------------------------------------------------------------------------

def cmd_gen(args) -> int:
    if args.count < 1:
        raise UsageError(f"--count must be >= 1, got {args.count}")
    if args.mnist_path is None and not args.synthetic:
        raise UsageError("either --mnist-path or --synthetic is required")
    if args.mnist_path is not None:
        corpus = load_digit_corpus(args.mnist_path)
    else:
        corpus = synthetic_digit_corpus(args.corpus_size, seed=args.seed)
    cfg = GenConfig(
        canvas=args.canvas,
        digits=args.digits,
        seq_len=args.seq_len,
        noise_sigma=args.sigma,
        seed=args.seed,
    )
    data = generate_dataset(cfg, corpus, args.count, threads=args.threads)
    write_sequences(args.out, data)
    write_manifest(f"{args.out}.manifest.txt", "gen", args, [args.out])
    print(f"wrote {args.count} sequences of shape {data.shape[1:]} to {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# eval
# ---------------------------------------------------------------------------

def cmd_eval(args) -> int:
    preds = read_sequences(args.pred).astype(np.float64)
    obs = read_sequences(args.obs).astype(np.float64)
    if preds.shape != obs.shape:
        raise ShapeError(f"prediction {preds.shape} and observation {obs.shape} differ")
    config = MetricConfig(
        metrics=tuple(args.metrics.split(",")),
        thresholds=_floats(args.thresholds),
        fss_window=args.window,
        rhd_window=args.window,
        n_bins=args.bins,
        pool_sizes=_ints(args.pool),
    )
    report = MetricReport(meta={"sequences": preds.shape[0], "shape": preds.shape[1:], "config": config})
    if args.threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            parts = list(pool.map(
                lambda i: evaluate_sequences(preds[i], obs[i], config, sequence=i),
                range(preds.shape[0]),
            ))
    else:
        parts = [evaluate_sequences(preds[i], obs[i], config, sequence=i)
                 for i in range(preds.shape[0])]
    for part in parts:
        report.rows.extend(part.rows)
    report.to_csv(args.out_csv)
    write_manifest(f"{args.out_csv}.manifest.txt", "eval", args, [args.out_csv])
    print(report.summary())
    return EXIT_OK


# ---------------------------------------------------------------------------
# reconstruct
# ---------------------------------------------------------------------------

def cmd_reconstruct(args) -> int:
    target = _load_field(args.target)
    schedule = None
    if args.loss == "facl":
        schedule = ScheduleConfig(total_steps=args.steps, alpha=args.alpha, seed=args.seed)
    config = OptRunConfig(
        loss=args.loss,
        steps=args.steps,
        lr=args.lr,
        schedule=schedule,
        init=args.init,
        seed=args.seed,
    )
    run = reconstruct(target, config)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    trace_path = out_dir / "trace.csv"
    with open(trace_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "loss", "which"])
        for step, (value, which) in enumerate(zip(run.trace_loss, run.trace_which)):
            writer.writerow([step, repr(float(value)), which])
    final_path = out_dir / "final.npy"
    np.save(final_path, run.final.astype("<f4"))
    write_manifest(out_dir / "manifest.txt", "reconstruct", args, [trace_path, final_path])
    print(
        f"{args.loss} run: {args.steps} steps, final loss {run.trace_loss[-1]:.6e}, "
        f"outputs in {out_dir}"
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# gradcheck
# ---------------------------------------------------------------------------

def cmd_gradcheck(args) -> int:
    report = grad_check(
        args.loss,
        trials=args.trials,
        sizes=_ints(args.size),
        tolerance=args.tol,
        seed=args.seed,
    )
    print(report.summary())
    if args.dump_ref:
        _dump_reference(args.dump_ref, args.seed)
        write_manifest(f"{args.dump_ref}.manifest.txt", "gradcheck", args, [args.dump_ref])
        print(f"wrote reference dump to {args.dump_ref}")
    return EXIT_OK if report.passed else EXIT_NUMERIC


def _dump_reference(path, seed: int, size: int = 16) -> None:
    """Write a cross-check fixture: one random pair plus every loss value/gradient."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x4EF]))
    x = rng.uniform(0.0, 1.0, size=(size, size))
    xhat = rng.uniform(0.0, 1.0, size=(size, size))
    payload = {"x": x, "xhat": xhat}
    for name, fn in LOSSES.items():
        result = fn(x, xhat)
        payload[f"{name}_value"] = np.float64(result.value)
        payload[f"{name}_grad"] = result.gradient
    np.savez(path, **payload)


# ---------------------------------------------------------------------------
# study
# ---------------------------------------------------------------------------

def cmd_study(args) -> int:
    if args.mode == "fal-curves":
        from .datagen import render_digit

        digit = render_digit(args.seed % 10)
        field = np.zeros((64, 64))
        field[18:46, 18:46] = digit
        with open(args.out_csv, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["mode", "param", "l2", "cross_spatial", "cross_spectral", "cross_gap", "fal"])
            for mode, params in (("blur", np.arange(0.0, 8.5, 0.5)), ("translate", range(0, 9))):
                for row in fal_curve_sweep(field, mode, params):
                    writer.writerow(
                        [mode, row.param, row.l2, row.cross_spatial, row.cross_spectral, row.cross_gap, row.fal]
                    )
    else:
        field = make_bimodal_field(seed=args.seed)
        table_to_csv(metric_transform_table(field), args.out_csv)
    write_manifest(f"{args.out_csv}.manifest.txt", "study", args, [args.out_csv])
    print(f"wrote {args.mode} study to {args.out_csv}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser plumbing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="facl", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"facl {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    gen = sub.add_parser("gen", help="generate stochastic moving-digit sequences")
    gen.add_argument("--out", required=True, help="output NPY path")
    gen.add_argument("--count", type=int, default=10)
    gen.add_argument("--seq-len", type=int, default=20, dest="seq_len")
    gen.add_argument("--digits", type=int, default=2)
    gen.add_argument("--canvas", type=int, default=64)
    gen.add_argument("--sigma", type=float, default=1.0, help="velocity noise std dev")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--mnist-path", dest="mnist_path", help="IDX image file with digit sprites")
    gen.add_argument("--synthetic", action="store_true", help="use the procedural digit corpus")
    gen.add_argument("--corpus-size", type=int, default=256, dest="corpus_size")
    gen.add_argument("--threads", type=int, default=1)
    gen.add_argument("--config", help="flat key=value file overriding defaults")
    gen.set_defaults(func=cmd_gen)

    ev = sub.add_parser("eval", help="evaluate metrics between two sequence files")
    ev.add_argument("--pred", required=True)
    ev.add_argument("--obs", required=True)
    ev.add_argument("--metrics", default="mae,mse,ssim,fss,rhd,csi")
    ev.add_argument("--thresholds", default="0.5")
    ev.add_argument("--window", type=int, default=16)
    ev.add_argument("--bins", type=int, default=10)
    ev.add_argument("--pool", default="1,4,16")
    ev.add_argument("--out-csv", required=True, dest="out_csv")
    ev.add_argument("--threads", type=int, default=1)
    ev.add_argument("--config")
    ev.set_defaults(func=cmd_eval)

    rec = sub.add_parser("reconstruct", help="reconstruct a target field under a loss")
    rec.add_argument("--target", required=True, help="2D NPY field")
    rec.add_argument("--loss", required=True, choices=("mse", "fal", "fcl", "facl"))
    rec.add_argument("--steps", type=int, default=2000)
    rec.add_argument("--lr", type=float, default=1.0)
    rec.add_argument("--alpha", type=float, default=0.2)
    rec.add_argument("--init", default="constant", choices=("constant", "noise"))
    rec.add_argument("--seed", type=int, default=0)
    rec.add_argument("--out", required=True, help="output directory")
    rec.add_argument("--config")
    rec.set_defaults(func=cmd_reconstruct)

    gc = sub.add_parser("gradcheck", help="finite-difference gradient validation")
    gc.add_argument("--loss", required=True, choices=tuple(LOSSES))
    gc.add_argument("--size", default="8,16", help="comma-separated field sizes")
    gc.add_argument("--trials", type=int, default=50)
    gc.add_argument("--tol", type=float, default=1e-4)
    gc.add_argument("--seed", type=int, default=0)
    gc.add_argument("--dump-ref", dest="dump_ref", help="write an NPZ cross-check fixture")
    gc.add_argument("--config")
    gc.set_defaults(func=cmd_gradcheck)

    st = sub.add_parser("study", help="FAL decomposition sweeps / transform metric table")
    st.add_argument("--mode", required=True, choices=("fal-curves", "transform-table"))
    st.add_argument("--seed", type=int, default=0)
    st.add_argument("--out-csv", required=True, dest="out_csv")
    st.add_argument("--config")
    st.set_defaults(func=cmd_study)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "config", None):
            fresh = build_parser()
            sub_actions = [a for a in fresh._actions if isinstance(a, argparse._SubParsersAction)]
            subparser = sub_actions[0].choices[args.subcommand]
            _apply_config(subparser, _load_config_file(args.config))
            args = fresh.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DivergenceError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ShapeError, DegenerateInputError, OSError, ValueError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
