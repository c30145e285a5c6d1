"""Command-line entry point.

Every file-producing subcommand writes ``<stem>.manifest.json`` next to its
outputs. Exit codes: 0 success, 2 usage or configuration error, 3 data
error, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__, fileio
from .augment import RDM_FACTORS, UndefinedContributionError, amda_augment, draw_s, rdm_augment
from .experiments import (
    RUNNERS,
    ExperimentError,
    Member,
    ScenarioConfig,
    fit_config_scalers,
    read_scenario,
    scaled_windows,
)
from .metrics import histogram_divergence, regression_metrics
from .models import ARCHS, ModelSpec, NumericError, TrainOpts, load_checkpoint, predict, save_checkpoint, train
from .pipeline import (
    WindowSpec,
    inverse,
    read_scaler_manifest,
    read_windows,
    resample_dataset,
    split,
    write_scaler_manifest,
    write_windows,
)
from .sim_core import APPLIANCES, CalibrationError, simulate_facility

log = logging.getLogger("indunilm")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4


class UsageError(ValueError):
    pass


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _out_dir(args) -> Path:
    out = Path(args.out) if args.out else fileio.default_output_dir()
    out.mkdir(parents=True, exist_ok=True)
    return out


def _manifest(argv: list[str], options: dict, seeds: list[int]) -> fileio.RunManifest:
    text = json.dumps(options, sort_keys=True, default=str)
    return fileio.RunManifest(command=["indunilm"] + argv, config_digest=fileio.sha256_text(text), seeds=seeds)


def _finish(manifest: fileio.RunManifest, outputs: list[Path], path: Path, t0: float) -> None:
    """Digest the outputs and write the manifest. Wall-clock goes to an
    undigested timing sidecar so re-runs keep byte-identical manifests."""
    for p in outputs:
        manifest.add_output(p)
    timing = path.with_name(path.name.replace(".manifest.json", ".timing.json"))
    timing.write_text(json.dumps({"wall_clock_s": time.perf_counter() - t0}) + "\n")
    manifest.extra = {**manifest.extra, "unhashed_outputs": [timing.name]}
    manifest.write(path)
    log.info("wrote %s", path)


# --------------------------------------------------------------------------- #
# Subcommands

def cmd_simulate(args, argv) -> int:
    t0 = time.perf_counter()
    if (args.preset is None) == (args.config is None):
        raise UsageError("give exactly one of --preset or --config")
    if args.preset:
        cfg = fileio.load_preset(args.preset, seed=args.seed)
    else:
        cfg = fileio.read_config(args.config)
        if args.seed is not None:
            cfg = replace(cfg, seed=args.seed)
    ds = simulate_facility(cfg, calibrate=not args.no_calibrate)
    out = _out_dir(args)
    stem = f"{cfg.name}-seed{cfg.seed}"
    csv = fileio.write_facility_csv(ds, out / f"{stem}.csv")
    resolved = out / f"{stem}.cfg"
    resolved.write_text(fileio.format_config(ds.config))
    manifest = _manifest(argv, {"config": fileio.format_config(cfg), "calibrate": not args.no_calibrate}, [cfg.seed])
    if args.config:
        manifest.add_input(args.config)
    manifest.extra = {"dataset_id": ds.dataset_id, "calibrated_config": resolved.name}
    _finish(manifest, [csv, resolved], out / f"{stem}.manifest.json", t0)
    return EXIT_OK


def cmd_augment(args, argv) -> int:
    t0 = time.perf_counter()
    ds = fileio.read_facility_csv(args.input, strict=not args.lenient)
    out = _out_dir(args)
    stem = Path(args.input).stem
    outputs = []
    if args.method == "amda":
        if (args.s is None) == (args.s_range is None):
            raise UsageError("amda needs exactly one of --s or --s-range")
        if args.s_range is not None and len(args.s_range) != 2:
            raise UsageError("--s-range takes two numbers a,b")
        s = args.s if args.s is not None else draw_s(args.seed, args.s_range)
        aug, plan = amda_augment(ds, s, renormalize_aggregate=args.renormalize_aggregate, seed=args.seed)
        copies = [(aug, plan, f"{stem}.amda-s{s:.6g}")]
    else:
        if args.s is not None or args.s_range is not None or args.renormalize_aggregate:
            raise UsageError("rdm takes no --s, --s-range or --renormalize-aggregate")
        copies = [(a, p, f"{stem}.rdm-x{p.s:.6g}") for a, p in rdm_augment(ds, RDM_FACTORS)]
    for aug, plan, name in copies:
        outputs.append(fileio.write_facility_csv(aug, out / f"{name}.csv"))
        outputs.append(plan.write_manifest(out / f"{name}.plan.json"))
    options = {k: getattr(args, k) for k in ("method", "s", "s_range", "seed", "renormalize_aggregate")}
    manifest = _manifest(argv, options, [args.seed])
    manifest.add_input(args.input)
    manifest.extra = {"source": ds.dataset_id, "copies": len(copies)}
    _finish(manifest, outputs, out / f"{stem}.{args.method}.manifest.json", t0)
    return EXIT_OK


def cmd_preprocess(args, argv) -> int:
    t0 = time.perf_counter()
    ds = fileio.read_facility_csv(args.input, strict=not args.lenient)
    if args.target not in APPLIANCES:
        raise UsageError(f"unknown target {args.target!r}; choose from {', '.join(APPLIANCES)}")
    if args.sample_period != ds.sample_period:
        ds = resample_dataset(ds, args.sample_period)
    spec = WindowSpec(args.window, args.stride)
    n = spec.count(len(ds))
    if n < len(args.split):
        raise fileio.DataError(f"{args.input}: only {n} windows for a {len(args.split)}-way split")
    parts = split(n, args.split, args.seed)
    names = ("train", "val", "test")[: len(parts)]
    member = Member(ds, parts[0], parts[1] if len(parts) > 1 else np.array([], dtype=int))
    scalers = fit_config_scalers(member, args.target, spec)
    windows = scaled_windows(ds, args.target, scalers, spec)
    out = _out_dir(args)
    stem = Path(args.input).stem
    outputs = []
    for name, idx in zip(names, parts):
        outputs.append(write_windows(windows.subset(idx), out / f"{stem}.{name}.windows"))
    outputs.append(write_scaler_manifest(
        {"aggregate": scalers.aggregate, "target": scalers.target},
        out / f"{stem}.scalers.json",
        note="fitted on samples covered by training windows; predictions de-normalize with the target scaler",
    ))
    options = {k: getattr(args, k) for k in ("target", "sample_period", "window", "stride", "split", "seed")}
    manifest = _manifest(argv, options, [args.seed])
    manifest.add_input(args.input)
    manifest.extra = {"windows": {n_: len(p) for n_, p in zip(names, parts)}, "target": args.target}
    _finish(manifest, outputs, out / f"{stem}.preprocess.manifest.json", t0)
    return EXIT_OK


def cmd_train(args, argv) -> int:
    t0 = time.perf_counter()
    train_set = read_windows(args.train)
    val_set = read_windows(args.val)
    if train_set.inputs.shape[1] != val_set.inputs.shape[1]:
        raise fileio.DataError("train and val windows differ in length")
    spec = ModelSpec(args.arch, input_len=train_set.inputs.shape[1])
    opts = TrainOpts(
        learning_rate=args.lr, batch_size=args.batch, max_epochs=args.max_epochs,
        patience=args.patience, seed=args.seed,
    )
    model = train(spec, train_set, val_set, opts)
    out = _out_dir(args)
    ckpt = save_checkpoint(model, out / f"{args.name}.s2pm")
    log_path = out / f"{args.name}.log.tsv"
    rows = ["epoch\ttrain_loss\tval_loss"]
    rows += [f"{i}\t{a:.10g}\t{b:.10g}" for i, (a, b) in enumerate(model.training_log)]
    log_path.write_text("\n".join(rows) + "\n")
    manifest = _manifest(argv, {"spec": spec.to_dict(), "opts": opts.__dict__}, [args.seed])
    manifest.add_input(args.train)
    manifest.add_input(args.val)
    manifest.extra = {"best_epoch": model.best_epoch, "samples_seen": model.samples_seen}
    _finish(manifest, [ckpt, log_path], out / f"{args.name}.train.manifest.json", t0)
    return EXIT_OK


def _target_scaler(path):
    if path is None:
        return None
    scalers = read_scaler_manifest(path)
    if "target" not in scalers:
        raise fileio.SchemaError(f"{path}: no target scaler")
    return scalers["target"]


def cmd_predict(args, argv) -> int:
    t0 = time.perf_counter()
    model = load_checkpoint(args.model)
    windows = read_windows(args.windows)
    z = predict(model, windows.inputs).astype(np.float64)
    scaler = _target_scaler(args.scalers)
    out = _out_dir(args)
    path = out / f"{Path(args.windows).stem}.predictions.tsv"
    header = "center_index\tprediction_scaled" + ("\tprediction_W" if scaler else "")
    lines = [header]
    watts = inverse(scaler, z) if scaler else None
    for i, c in enumerate(windows.index_map):
        row = f"{int(c)}\t{z[i]:.10g}"
        if scaler:
            row += f"\t{watts[i]:.10g}"
        lines.append(row)
    path.write_text("\n".join(lines) + "\n")
    manifest = _manifest(argv, {"model": args.model, "windows": args.windows}, [])
    for p in (args.model, args.windows) + ((args.scalers,) if args.scalers else ()):
        manifest.add_input(p)
    _finish(manifest, [path], out / f"{Path(args.windows).stem}.predict.manifest.json", t0)
    return EXIT_OK


def cmd_evaluate(args, argv) -> int:
    t0 = time.perf_counter()
    model = load_checkpoint(args.model)
    windows = read_windows(args.windows)
    scaler = _target_scaler(args.scalers)
    z = predict(model, windows.inputs).astype(np.float64)
    y = inverse(scaler, windows.targets) / 1e6
    yhat = inverse(scaler, z) / 1e6
    m = regression_metrics(y, yhat)
    doc = {"mae_mw": m.mae, "mse_mw2": m.mse, "r2": m.r2, "nde": m.nde, "n": m.n, "unit": "MW"}
    out = _out_dir(args)
    stem = Path(args.windows).stem
    path = out / f"{stem}.metrics.json"
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    manifest = _manifest(argv, {"model": args.model, "windows": args.windows}, [])
    for p in (args.model, args.windows, args.scalers):
        manifest.add_input(p)
    _finish(manifest, [path], out / f"{stem}.evaluate.manifest.json", t0)
    print(json.dumps(doc, sort_keys=True))
    return EXIT_OK


def cmd_experiment(args, argv) -> int:
    overrides = {}
    if args.seeds is not None:
        overrides["seeds"] = args.seeds
    if args.months is not None:
        overrides["months"] = args.months
    if args.arch is not None:
        overrides["arch"] = args.arch
    if args.config:
        cfg = read_scenario(args.config, **overrides)
    else:
        cfg = replace(ScenarioConfig(), **overrides)
    report = RUNNERS[args.name](cfg)
    out = _out_dir(args)
    manifest = report.write(out, ["indunilm"] + argv)
    if args.config:
        manifest.add_input(args.config)
        manifest.write(out / "manifest.json")
    for row in report.metric_table():
        print(f"{row['variant']}\tNDE {row['nde_mean']:.4f} ± {row['nde_std']:.4f}")
    return EXIT_OK


def cmd_alignment(args, argv) -> int:
    t0 = time.perf_counter()
    if args.appliance not in APPLIANCES:
        raise UsageError(f"unknown appliance {args.appliance!r}")
    trains = [fileio.read_facility_csv(p, strict=not args.lenient) for p in args.train]
    test = fileio.read_facility_csv(args.test, strict=not args.lenient)
    pooled = np.concatenate([ds.column(args.appliance) for ds in trains])
    d = histogram_divergence(pooled, test.column(args.appliance), bins=args.bins)
    doc = {
        "appliance": args.appliance,
        "kl_train_test": d.kl,
        "kl_test_train": d.kl_reverse,
        "js": d.js,
        "bins": d.bins,
        "smoothing_eps": d.smoothing_eps,
        "train": [ds.dataset_id for ds in trains],
        "test": test.dataset_id,
    }
    out = _out_dir(args)
    path = out / f"{Path(args.test).stem}.alignment.json"
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    manifest = _manifest(argv, {"appliance": args.appliance, "bins": args.bins}, [])
    for p in list(args.train) + [args.test]:
        manifest.add_input(p)
    _finish(manifest, [path], out / f"{Path(args.test).stem}.alignment.manifest.json", t0)
    print(f"KL {d.kl:.6g}  reverse KL {d.kl_reverse:.6g}  JS {d.js:.6g}")
    return EXIT_OK


# --------------------------------------------------------------------------- #
# Parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="indunilm", description="Industrial NILM workbench")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--out", help=f"output directory (default ${fileio.OUTPUT_DIR_ENV} or ./out)")
        sp.set_defaults(func=func)
        return sp

    sp = add("simulate", cmd_simulate, "simulate one facility-year to CSV")
    sp.add_argument("--preset", choices=fileio.preset_names())
    sp.add_argument("--config")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--no-calibrate", action="store_true")

    sp = add("augment", cmd_augment, "write augmented copies of a facility CSV")
    sp.add_argument("--input", required=True)
    sp.add_argument("--method", choices=("amda", "rdm"), required=True)
    sp.add_argument("--s", type=float)
    sp.add_argument("--s-range", type=_floats)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--renormalize-aggregate", action="store_true")
    sp.add_argument("--lenient", action="store_true", help="warn instead of failing on validation errors")

    sp = add("preprocess", cmd_preprocess, "resample, scale and window a facility CSV")
    sp.add_argument("--input", required=True)
    sp.add_argument("--target", default="CHP")
    sp.add_argument("--sample-period", type=int, default=300)
    sp.add_argument("--window", type=int, default=288)
    sp.add_argument("--stride", type=int, default=5)
    sp.add_argument("--split", type=_floats, default=(0.7225, 0.1275, 0.15))
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--lenient", action="store_true")

    sp = add("train", cmd_train, "train a seq2point model on window files")
    sp.add_argument("--train", required=True)
    sp.add_argument("--val", required=True)
    sp.add_argument("--arch", choices=ARCHS, default="MLP")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--max-epochs", type=int, default=100)
    sp.add_argument("--patience", type=int, default=10)
    sp.add_argument("--lr", type=float, default=1e-3)
    sp.add_argument("--batch", type=int, default=64)
    sp.add_argument("--name", default="model")

    sp = add("predict", cmd_predict, "predict window centers with a checkpoint")
    sp.add_argument("--model", required=True)
    sp.add_argument("--windows", required=True)
    sp.add_argument("--scalers")

    sp = add("evaluate", cmd_evaluate, "metrics of a checkpoint on window files, in MW")
    sp.add_argument("--model", required=True)
    sp.add_argument("--windows", required=True)
    sp.add_argument("--scalers", required=True)

    sp = add("experiment", cmd_experiment, "run an evaluation protocol")
    sp.add_argument("name", choices=sorted(RUNNERS))
    sp.add_argument("--config")
    sp.add_argument("--seeds", type=_ints)
    sp.add_argument("--months", type=int)
    sp.add_argument("--arch", choices=ARCHS)

    sp = add("alignment", cmd_alignment, "histogram divergence between training and test CSVs")
    sp.add_argument("--train", nargs="+", required=True)
    sp.add_argument("--test", required=True)
    sp.add_argument("--appliance", default="CHP")
    sp.add_argument("--bins", type=int, default=100)
    sp.add_argument("--lenient", action="store_true")
    return p


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args, argv)
    except (UsageError, fileio.SchemaError, ExperimentError) as exc:
        print(f"indunilm: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (fileio.DataError, FileNotFoundError, UndefinedContributionError) as exc:
        print(f"indunilm: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericError, CalibrationError, FloatingPointError) as exc:
        print(f"indunilm: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"indunilm: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
