"""The training loop: fixed validation split, per-epoch metrics, reports.

One run: split the manifest's train entries once (seeded), then for a
fixed number of epochs sweep reshuffled minibatches and take a full
metric pass over both partitions in evaluation mode. No early stopping
and no best-epoch selection; the final parameters are the result.
Wall-clock covers the epoch loop only. The held-out test split is
evaluated once at the end.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .adam import AdamState, adam_step, init_adam
from .dataset import (ImageSource, Manifest, SplitSpec, batches, eval_batches,
                      load_manifest, split_train_val)
from .errors import DataError, NumericalError
from .model import (ModelSpec, Params, backward_from_trace, init_params,
                    model_forward, spec_to_dict)
from .nn import sparse_ce_loss
from .seeding import derive_seed
from .tensor import argmax_last_axis


@dataclass(frozen=True)
class TrainConfig:
    spec: ModelSpec
    manifest_path: str = ""
    epochs: int = 15
    validation_fraction: float = 0.3
    batch_size: int = 32
    learning_rate: float = 1e-4
    seed: int = 42

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError(f"epochs must be at least 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch size must be at least 1, got {self.batch_size}")
        if self.learning_rate <= 0:
            raise ValueError(f"learning rate must be positive, got {self.learning_rate}")


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_acc: float
    train_loss: float
    val_acc: float
    val_loss: float


@dataclass(frozen=True)
class EvalResult:
    accuracy: float
    loss: float
    predictions: np.ndarray
    labels: np.ndarray


@dataclass(frozen=True)
class TrainReport:
    epochs: int
    history: tuple
    train_seconds: float
    test_accuracy: float
    test_loss: float
    config: dict = field(default_factory=dict)


def evaluate(spec: ModelSpec, params: Params, entries: Sequence,
             source: ImageSource, batch_size: int = 32) -> EvalResult:
    """Accuracy, mean loss, and predictions over entries, in eval mode."""
    if not entries:
        raise DataError("cannot evaluate an empty entry list")
    total_loss = 0.0
    preds = []
    labels = []
    for x, y in eval_batches(entries, batch_size, source):
        probs, _ = model_forward(spec, params, x, mode="eval")
        if not np.isfinite(probs).all():
            raise NumericalError("non-finite model output during evaluation")
        loss, _ = sparse_ce_loss(probs, y)
        total_loss += loss * len(y)
        preds.append(argmax_last_axis(probs))
        labels.append(y)
    preds = np.concatenate(preds)
    labels = np.concatenate(labels)
    return EvalResult(
        accuracy=float(np.mean(preds == labels)),
        loss=total_loss / len(entries),
        predictions=preds,
        labels=labels,
    )


def run_train_epoch(spec: ModelSpec, params: Params, state: AdamState,
                    entries: Sequence, source: ImageSource, batch_size: int,
                    epoch_index: int, seed: int) -> None:
    """One optimization sweep: reshuffle, then forward/backward/update."""
    shuffle_seed = derive_seed(seed, "shuffle", epoch_index)
    for batch_index, (x, y) in enumerate(batches(entries, batch_size,
                                                 shuffle_seed, source)):
        drop_seed = derive_seed(seed, "dropout", epoch_index, batch_index)
        probs, trace = model_forward(spec, params, x, mode="train", seed=drop_seed)
        if not np.isfinite(probs).all():
            raise NumericalError(
                f"non-finite loss at epoch {epoch_index} batch {batch_index}"
            )
        loss, d_logits = sparse_ce_loss(probs, y)
        if not np.isfinite(loss):
            raise NumericalError(
                f"non-finite loss at epoch {epoch_index} batch {batch_index}"
            )
        grads = backward_from_trace(spec, params, trace, d_logits)
        adam_step(params.as_dict(), grads.as_dict(), state)


def train(config: TrainConfig, manifest: Optional[Manifest] = None,
          log=None) -> tuple:
    """Full training run. Returns (TrainReport, Params).

    The manifest may be passed directly or loaded from
    config.manifest_path. The single config seed fans out into derived
    streams for weight init, the validation split, per-epoch shuffles,
    and per-batch dropout masks, so a run is a pure function of
    (manifest, config).
    """
    if manifest is None:
        manifest = load_manifest(config.manifest_path)
    spec = config.spec
    source = ImageSource.for_filter_name(
        spec.raster_filter, size=(spec.input_height, spec.input_width)
    )
    train_part, val_part = split_train_val(
        manifest.train_entries(),
        SplitSpec(config.validation_fraction, derive_seed(config.seed, "split")),
    )
    params = init_params(spec, derive_seed(config.seed, "init"))
    state = init_adam(params.as_dict(), config.learning_rate)

    history = []
    started = time.perf_counter()
    for epoch in range(1, config.epochs + 1):
        run_train_epoch(spec, params, state, train_part, source,
                        config.batch_size, epoch, config.seed)
        train_eval = evaluate(spec, params, train_part, source, config.batch_size)
        val_eval = evaluate(spec, params, val_part, source, config.batch_size)
        record = EpochRecord(
            epoch=epoch,
            train_acc=train_eval.accuracy,
            train_loss=train_eval.loss,
            val_acc=val_eval.accuracy,
            val_loss=val_eval.loss,
        )
        history.append(record)
        if log is not None:
            log(f"epoch {epoch}/{config.epochs} "
                f"train_acc={record.train_acc:.4f} train_loss={record.train_loss:.4f} "
                f"val_acc={record.val_acc:.4f} val_loss={record.val_loss:.4f}")
    train_seconds = time.perf_counter() - started

    test_entries = manifest.test_entries()
    if not test_entries:
        raise DataError("manifest has no test entries to evaluate")
    test_eval = evaluate(spec, params, test_entries, source, config.batch_size)

    report = TrainReport(
        epochs=config.epochs,
        history=tuple(history),
        train_seconds=train_seconds,
        test_accuracy=test_eval.accuracy,
        test_loss=test_eval.loss,
        config=_config_echo(config),
    )
    return report, params


def _config_echo(config: TrainConfig) -> dict:
    echo = {
        "manifest": config.manifest_path,
        "epochs": config.epochs,
        "validation_fraction": config.validation_fraction,
        "batch_size": config.batch_size,
        "learning_rate": config.learning_rate,
        "seed": config.seed,
    }
    echo.update(spec_to_dict(config.spec))
    return echo


def history_csv(report: TrainReport) -> str:
    """Per-epoch metrics as CSV, six decimal places, stable byte-for-byte."""
    lines = ["epoch,train_acc,train_loss,val_acc,val_loss"]
    for rec in report.history:
        lines.append(
            f"{rec.epoch},{rec.train_acc:.6f},{rec.train_loss:.6f},"
            f"{rec.val_acc:.6f},{rec.val_loss:.6f}"
        )
    return "\n".join(lines) + "\n"


def report_json(report: TrainReport) -> str:
    import json

    payload = {
        "epochs": report.epochs,
        "history": [
            {
                "epoch": rec.epoch,
                "train_acc": rec.train_acc,
                "train_loss": rec.train_loss,
                "val_acc": rec.val_acc,
                "val_loss": rec.val_loss,
            }
            for rec in report.history
        ],
        "train_seconds": report.train_seconds,
        "test_accuracy": report.test_accuracy,
        "test_loss": report.test_loss,
        "config": report.config,
    }
    return json.dumps(payload, indent=2) + "\n"
