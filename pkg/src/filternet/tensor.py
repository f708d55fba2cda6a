"""Dense array helpers used by the numerical modules.

Arrays are plain numpy ndarrays in row-major order: float32 for
training math, float64 where tests need reference precision. The
helpers here add shape checking with readable messages; hot paths
elsewhere call numpy directly.
"""
from __future__ import annotations

from typing import Callable

import numpy as np

from .errors import ShapeError

Tensor = np.ndarray


def tensor(data, dtype=np.float32) -> np.ndarray:
    """Build a C-contiguous array of the given dtype (float32 default)."""
    return np.ascontiguousarray(np.asarray(data, dtype=dtype))


def tensor64(data) -> np.ndarray:
    """float64 variant, for finite-difference oracles and tests."""
    return tensor(data, dtype=np.float64)


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product of two rank-2 arrays.

    Raises ShapeError naming both shapes when the inner dimensions
    disagree or either input is not rank 2.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 2 or b.ndim != 2:
        raise ShapeError(
            f"matmul expects rank-2 inputs, got {tuple(a.shape)} and {tuple(b.shape)}"
        )
    if a.shape[1] != b.shape[0]:
        raise ShapeError(
            f"matmul inner dimensions disagree: {tuple(a.shape)} @ {tuple(b.shape)}"
        )
    return a @ b


def emap(a: np.ndarray, fn: Callable) -> np.ndarray:
    """Apply a scalar function elementwise, preserving shape and dtype."""
    a = np.asarray(a)
    if a.size == 0:
        return a.copy()
    return np.vectorize(fn, otypes=[a.dtype])(a)


def ezip(a: np.ndarray, b: np.ndarray, fn: Callable) -> np.ndarray:
    """Combine two same-shape arrays elementwise with a scalar function."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ShapeError(
            f"ezip requires matching shapes, got {tuple(a.shape)} and {tuple(b.shape)}"
        )
    if a.size == 0:
        return a.copy()
    return np.vectorize(fn, otypes=[np.result_type(a, b)])(a, b)


def argmax_last_axis(a: np.ndarray) -> np.ndarray:
    """Index of the maximum along the last axis, lowest index on ties."""
    a = np.asarray(a)
    if a.ndim == 0 or a.shape[-1] == 0:
        raise ShapeError(f"argmax_last_axis needs a non-empty last axis, got {tuple(a.shape)}")
    return np.argmax(a, axis=-1)
