"""Command line front end.

Subcommands: prepare, tune, train, eval, extract, plot. Heavy imports
happen inside handlers so --threads can cap the BLAS pool before numpy
loads. Exit codes: 0 success, 2 usage error, 3 data or IO error,
4 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

FILTER_CHOICES = ("none", "contour", "edge-enhance-more", "find-edges", "sharpen")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="filternet",
        description="Classical 3x3 raster filters feeding a small from-scratch "
                    "CNN for 3-class chest X-ray classification.",
    )
    parser.add_argument("--threads", type=int, default=None, metavar="N",
                        help="cap math worker threads (default: all logical cores)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", help="scan a dataset tree into a manifest")
    p.add_argument("--input", required=True, metavar="DIR",
                   help="dataset root with train/ and test/ class folders")
    p.add_argument("--output", required=True, metavar="MANIFEST")
    p.add_argument("--balance", action="store_true",
                   help="add rotated copies: Normal x2, COVID-19 x4, Pneumonia as is")
    p.set_defaults(handler=_cmd_prepare)

    p = sub.add_parser("tune", help="bracketed hyperparameter search")
    p.add_argument("--manifest", required=True, metavar="M")
    p.add_argument("--max-epochs", type=int, default=15, metavar="R")
    p.add_argument("--factor", type=int, default=3, metavar="F")
    p.add_argument("--seed", type=int, default=42, metavar="S")
    p.add_argument("--trial-log", default=None, metavar="CSV")
    p.set_defaults(handler=_cmd_tune)

    p = sub.add_parser("train", help="train one model and write its artifacts")
    p.add_argument("--manifest", required=True, metavar="M")
    p.add_argument("--filter", default="none", choices=FILTER_CHOICES)
    p.add_argument("--dropout", type=float, default=0.0, choices=(0.0, 0.2, 0.5))
    p.add_argument("--epochs", type=int, default=15)
    p.add_argument("--val-split", type=float, default=0.3, metavar="FRACTION")
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--units", type=int, default=160)
    p.add_argument("--filters", type=int, default=64)
    p.add_argument("--kernel", type=int, default=5)
    p.add_argument("--lr", type=float, default=1e-4)
    p.add_argument("--seed", type=int, default=42, metavar="S")
    p.add_argument("--out", required=True, metavar="MODEL")
    p.add_argument("--history", required=True, metavar="CSV")
    p.add_argument("--report", required=True, metavar="JSON")
    p.set_defaults(handler=_cmd_train)

    p = sub.add_parser("eval", help="evaluate a trained model on a manifest split")
    p.add_argument("--model", required=True, metavar="MODEL")
    p.add_argument("--manifest", required=True, metavar="M")
    p.add_argument("--split", default="test", choices=("train", "test"))
    p.add_argument("--out-json", required=True, metavar="REPORT")
    p.add_argument("--out-cm", required=True, metavar="CSV")
    p.add_argument("--out-heatmap", default=None, metavar="PNG")
    p.set_defaults(handler=_cmd_eval)

    p = sub.add_parser("extract", help="write feature-map grids for one image")
    p.add_argument("--model", required=True, metavar="MODEL")
    p.add_argument("--image", required=True, metavar="FILE")
    p.add_argument("--out-dir", required=True, metavar="DIR")
    p.add_argument("--filter", default=None, choices=FILTER_CHOICES,
                   help="override the filter recorded in the model file")
    p.set_defaults(handler=_cmd_extract)

    p = sub.add_parser("plot", help="render a training-history CSV as a chart")
    p.add_argument("--history", required=True, metavar="CSV")
    p.add_argument("--out", required=True, metavar="PNG")
    p.add_argument("--metric", default="acc", choices=("acc", "loss"))
    p.set_defaults(handler=_cmd_plot)

    return parser


def _cmd_prepare(args) -> int:
    from .dataset import balance, save_manifest, scan_dataset

    manifest = scan_dataset(args.input)
    if args.balance:
        manifest = balance(manifest)
    save_manifest(manifest, args.output)
    train_counts = manifest.class_counts("train")
    test_counts = manifest.class_counts("test")
    print(f"manifest written: {args.output} "
          f"(train {train_counts}, test {test_counts})")
    return 0


def _cmd_tune(args) -> int:
    from .dataset import SplitSpec, load_manifest, split_train_val
    from .hyperband import (CNNTrialFactory, SearchSpace, compute_schedule,
                            search, trial_log_csv)
    from .seeding import derive_seed

    manifest = load_manifest(args.manifest)
    train_part, val_part = split_train_val(
        manifest.train_entries(), SplitSpec(0.3, derive_seed(args.seed, "split")))
    schedule = compute_schedule(args.max_epochs, args.factor)
    factory = CNNTrialFactory(train_part, val_part)
    result = search(SearchSpace(), schedule, factory, derive_seed(args.seed, "tuner"))
    if args.trial_log:
        with open(args.trial_log, "w", encoding="utf-8") as fh:
            fh.write(trial_log_csv(result.log))
    print(json.dumps(result.best.as_dict()))
    return 0


def _cmd_train(args) -> int:
    from .model import ModelSpec
    from .modelio import save_model
    from .training import TrainConfig, history_csv, report_json, train

    spec = ModelSpec(
        conv_filters=args.filters,
        kernel_size=args.kernel,
        dense_units=args.units,
        dropout_rate=args.dropout,
        raster_filter=args.filter,
    )
    config = TrainConfig(
        spec=spec,
        manifest_path=args.manifest,
        epochs=args.epochs,
        validation_fraction=args.val_split,
        batch_size=args.batch_size,
        learning_rate=args.lr,
        seed=args.seed,
    )
    report, params = train(config, log=lambda line: print(line, file=sys.stderr))
    save_model(args.out, spec, params)
    with open(args.history, "w", encoding="utf-8") as fh:
        fh.write(history_csv(report))
    with open(args.report, "w", encoding="utf-8") as fh:
        fh.write(report_json(report))
    print(f"model written: {args.out} "
          f"(test_accuracy={report.test_accuracy:.4f}, "
          f"test_loss={report.test_loss:.4f}, "
          f"train_seconds={report.train_seconds:.1f})")
    return 0


def _cmd_eval(args) -> int:
    from .charts import render_heatmap
    from .dataset import CLASS_NAMES, ImageSource, load_manifest
    from .metrics import (classification_report, confusion_matrix,
                          confusion_matrix_csv)
    from .modelio import load_model
    from .training import evaluate

    spec, params = load_model(args.model)
    manifest = load_manifest(args.manifest)
    entries = (manifest.train_entries() if args.split == "train"
               else manifest.test_entries())
    source = ImageSource.for_filter_name(
        spec.raster_filter, size=(spec.input_height, spec.input_width))
    result = evaluate(spec, params, entries, source)
    cm = confusion_matrix(result.labels, result.predictions)
    payload = {
        "split": args.split,
        "accuracy": result.accuracy,
        "loss": result.loss,
        "confusion_matrix": cm.tolist(),
        "report": classification_report(cm),
    }
    with open(args.out_json, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(payload, indent=2) + "\n")
    with open(args.out_cm, "w", encoding="utf-8") as fh:
        fh.write(confusion_matrix_csv(cm))
    if args.out_heatmap:
        render_heatmap(cm, CLASS_NAMES, args.out_heatmap)
    print(f"{args.split} accuracy={result.accuracy:.4f} loss={result.loss:.4f}")
    return 0


def _cmd_extract(args) -> int:
    from .introspect import GRID_LAYERS, extract_feature_maps, feature_grid
    from .modelio import load_model
    from .png import write_png
    from .raster import (apply_filter, get_filter, load_raster, resize,
                         to_tensor)

    spec, params = load_model(args.model)
    filter_name = args.filter if args.filter is not None else spec.raster_filter
    r = load_raster(args.image)
    if filter_name != "none":
        r = apply_filter(r, get_filter(filter_name))
    r = resize(r, spec.input_width, spec.input_height)
    fms = extract_feature_maps(spec, params, to_tensor(r))
    os.makedirs(args.out_dir, exist_ok=True)
    for layer in GRID_LAYERS:
        write_png(os.path.join(args.out_dir, f"{layer}.png"),
                  feature_grid(fms.maps[layer]))
    counts = fms.inactive_counts()
    with open(os.path.join(args.out_dir, "inactive_filters.json"), "w",
              encoding="utf-8") as fh:
        fh.write(json.dumps(counts, indent=2) + "\n")
    print(f"feature maps written to {args.out_dir} "
          f"(inactive: {json.dumps(counts)})")
    return 0


def _cmd_plot(args) -> int:
    import csv

    from .charts import ChartSeries, render_line_chart
    from .errors import DataError

    if not os.path.isfile(args.history):
        raise DataError(f"history file not found: {args.history}")
    epochs, rows = [], []
    with open(args.history, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            try:
                epochs.append(float(row["epoch"]))
                rows.append(row)
            except (KeyError, TypeError, ValueError):
                raise DataError(
                    f"bad history row in {args.history}: {row!r}") from None
    if len(epochs) < 2:
        raise DataError(f"history {args.history} needs at least 2 epochs to plot")
    train_key, val_key = (("train_acc", "val_acc") if args.metric == "acc"
                          else ("train_loss", "val_loss"))
    try:
        series = [
            ChartSeries("train", tuple(epochs),
                        tuple(float(r[train_key]) for r in rows)),
            ChartSeries("validation", tuple(epochs),
                        tuple(float(r[val_key]) for r in rows)),
        ]
    except (KeyError, TypeError, ValueError):
        raise DataError(
            f"history {args.history} lacks {train_key}/{val_key} columns") from None
    render_line_chart(series, args.out)
    print(f"chart written: {args.out}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads is not None:
        if args.threads < 1:
            parser.error(f"--threads must be at least 1, got {args.threads}")
        for var in ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS",
                    "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
            os.environ[var] = str(args.threads)

    from .errors import (DataError, FilterNetError, ModelFormatError,
                         NumericalError, ShapeError)

    try:
        return args.handler(args)
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (DataError, ModelFormatError, ShapeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (FilterNetError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
