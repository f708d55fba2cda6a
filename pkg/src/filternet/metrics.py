"""Confusion matrices and per-class precision/recall/F1 reports."""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .dataset import CLASS_NAMES
from .errors import ShapeError


def confusion_matrix(y_true, y_pred, n_classes: int = len(CLASS_NAMES)) -> np.ndarray:
    """Counts matrix with rows = true class, columns = predicted class."""
    t = np.asarray(y_true, dtype=np.int64).ravel()
    p = np.asarray(y_pred, dtype=np.int64).ravel()
    if t.shape != p.shape:
        raise ShapeError(
            f"confusion_matrix: {t.shape[0]} true labels vs {p.shape[0]} predictions"
        )
    if t.size == 0:
        raise ValueError("confusion_matrix needs at least one pair")
    for name, arr in (("true", t), ("predicted", p)):
        if arr.min() < 0 or arr.max() >= n_classes:
            raise ValueError(
                f"{name} labels must lie in [0, {n_classes}), got range "
                f"[{arr.min()}, {arr.max()}]"
            )
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (t, p), 1)
    return cm


def classification_report(cm: np.ndarray, class_names: Sequence[str] = CLASS_NAMES) -> dict:
    """Per-class precision, recall, F1, and support from a counts matrix.

    Undefined ratios (zero denominators) are reported as 0.0.
    """
    cm = np.asarray(cm)
    n = len(class_names)
    if cm.shape != (n, n):
        raise ShapeError(f"report needs a {n}x{n} matrix, got {cm.shape}")
    if cm.sum() == 0:
        raise ValueError("classification report needs a non-empty confusion matrix")
    classes = []
    for i, name in enumerate(class_names):
        tp = float(cm[i, i])
        pred = float(cm[:, i].sum())
        true = float(cm[i, :].sum())
        precision = tp / pred if pred > 0 else 0.0
        recall = tp / true if true > 0 else 0.0
        denom = precision + recall
        f1 = 2 * precision * recall / denom if denom > 0 else 0.0
        classes.append({
            "name": name,
            "precision": precision,
            "recall": recall,
            "f1": f1,
            "support": int(true),
        })
    return {
        "classes": classes,
        "accuracy": float(np.trace(cm)) / float(cm.sum()),
        "total": int(cm.sum()),
    }


def confusion_matrix_csv(cm: np.ndarray, class_names: Sequence[str] = CLASS_NAMES) -> str:
    """CSV with a labeled header row and one labeled row per true class."""
    cm = np.asarray(cm)
    n = len(class_names)
    if cm.shape != (n, n):
        raise ShapeError(f"csv needs a {n}x{n} matrix, got {cm.shape}")
    lines = ["true\\predicted," + ",".join(class_names)]
    for i, name in enumerate(class_names):
        lines.append(name + "," + ",".join(str(int(v)) for v in cm[i]))
    return "\n".join(lines) + "\n"


def report_to_json(report: dict) -> str:
    import json

    return json.dumps(report, indent=2) + "\n"
