"""Classical raster filters plus a small from-scratch CNN classifier.

Submodules load lazily so the CLI can configure the math thread pool
before numpy is imported.
"""
from __future__ import annotations

import importlib

__version__ = "0.1.0"

_EXPORTS = {
    "Raster": "raster",
    "FilterSpec": "raster",
    "FILTERS": "raster",
    "load_raster": "raster",
    "raster_from_array": "raster",
    "rotate": "raster",
    "apply_filter": "raster",
    "resize": "raster",
    "to_tensor": "raster",
    "get_filter": "raster",
    "Manifest": "dataset",
    "ManifestEntry": "dataset",
    "ImageSource": "dataset",
    "SplitSpec": "dataset",
    "CLASS_NAMES": "dataset",
    "scan_dataset": "dataset",
    "balance": "dataset",
    "split_train_val": "dataset",
    "save_manifest": "dataset",
    "load_manifest": "dataset",
    "batches": "dataset",
    "ModelSpec": "model",
    "Params": "model",
    "init_params": "model",
    "model_forward": "model",
    "model_backward": "model",
    "parameter_counts": "model",
    "AdamState": "adam",
    "init_adam": "adam",
    "adam_step": "adam",
    "save_model": "modelio",
    "load_model": "modelio",
    "save_checkpoint": "modelio",
    "load_checkpoint": "modelio",
    "TrainConfig": "training",
    "TrainReport": "training",
    "EpochRecord": "training",
    "train": "training",
    "evaluate": "training",
    "history_csv": "training",
    "report_json": "training",
    "BracketSchedule": "hyperband",
    "SearchSpace": "hyperband",
    "Assignment": "hyperband",
    "compute_schedule": "hyperband",
    "search": "hyperband",
    "CNNTrialFactory": "hyperband",
    "confusion_matrix": "metrics",
    "classification_report": "metrics",
    "confusion_matrix_csv": "metrics",
    "FeatureMapSet": "introspect",
    "extract_feature_maps": "introspect",
    "count_inactive_filters": "introspect",
    "feature_grid": "introspect",
    "ChartSeries": "charts",
    "render_line_chart": "charts",
    "render_heatmap": "charts",
    "RasterFilter": "estimators",
    "ConvNetClassifier": "estimators",
    "derive_seed": "seeding",
    "generate_dataset": "synthetic",
    "generate_solid_dataset": "synthetic",
    "FilterNetError": "errors",
    "ShapeError": "errors",
    "DataError": "errors",
    "ModelFormatError": "errors",
    "NumericalError": "errors",
}

__all__ = sorted(_EXPORTS) + ["__version__"]


def __getattr__(name):
    try:
        module = _EXPORTS[name]
    except KeyError:
        raise AttributeError(f"module {__name__!r} has no attribute {name!r}") from None
    return getattr(importlib.import_module(f".{module}", __name__), name)


def __dir__():
    return __all__
