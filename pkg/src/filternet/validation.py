"""Input validation helpers for the estimator layer."""
from __future__ import annotations

import numpy as np

from .errors import ShapeError


def check_image_batch(X, dtype=None, channels: int = 3) -> np.ndarray:
    """Validate a (n, h, w, channels) image batch and return it as an array."""
    X = np.asarray(X)
    if X.ndim != 4:
        raise ShapeError(
            f"expected images of shape (n, height, width, {channels}), got {tuple(X.shape)}"
        )
    if X.shape[3] != channels:
        raise ShapeError(f"expected {channels} channels, got {X.shape[3]}")
    if X.shape[0] == 0:
        raise ShapeError("image batch is empty")
    if dtype is not None:
        X = X.astype(dtype, copy=False)
    if np.issubdtype(X.dtype, np.floating) and not np.isfinite(X).all():
        raise ValueError("image batch contains non-finite values")
    return X


def check_labels(y, n_samples: int) -> np.ndarray:
    """Validate integer class labels aligned with an image batch."""
    y = np.asarray(y)
    if y.ndim != 1:
        raise ShapeError(f"labels must be one-dimensional, got shape {tuple(y.shape)}")
    if y.shape[0] != n_samples:
        raise ShapeError(f"{y.shape[0]} labels for {n_samples} samples")
    if not np.issubdtype(y.dtype, np.integer):
        rounded = np.rint(np.asarray(y, dtype=np.float64))
        if not np.array_equal(rounded, np.asarray(y, dtype=np.float64)):
            raise ValueError("labels must be integers")
        y = rounded
    return y.astype(np.int64)
