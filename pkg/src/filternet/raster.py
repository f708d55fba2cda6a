"""8-bit RGB rasters and the classical operations applied before training.

The preprocessing chain is: decode, optional quarter/half turn,
optional 3x3 integer filter, bilinear resize, then scale to float32.
Filtering and resizing follow the exact integer conventions of the
classic imaging pipeline this reproduces: convolution in integer
arithmetic with divisor, offset, rounding half away from zero, and a
copied one-pixel border.
"""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import DataError, ShapeError


@dataclass(frozen=True)
class Raster:
    """An 8-bit RGB image: pixels is uint8 with shape (height, width, 3)."""

    width: int
    height: int
    pixels: np.ndarray

    def __post_init__(self):
        px = np.ascontiguousarray(self.pixels)
        if px.dtype != np.uint8:
            raise ShapeError(f"raster pixels must be uint8, got {px.dtype}")
        if px.shape != (self.height, self.width, 3):
            raise ShapeError(
                f"raster pixels shape {px.shape} does not match "
                f"(height={self.height}, width={self.width}, 3)"
            )
        px.flags.writeable = False
        object.__setattr__(self, "pixels", px)


def raster_from_array(pixels: np.ndarray) -> Raster:
    px = np.asarray(pixels, dtype=np.uint8)
    if px.ndim != 3 or px.shape[2] != 3:
        raise ShapeError(f"expected an array of shape (h, w, 3), got {px.shape}")
    return Raster(width=px.shape[1], height=px.shape[0], pixels=px)


@dataclass(frozen=True)
class FilterSpec:
    """A 3x3 integer convolution: weights row-major, positive divisor, offset."""

    name: str
    weights: tuple
    divisor: int
    offset: int

    def __post_init__(self):
        if len(self.weights) != 9:
            raise ValueError(f"filter {self.name!r} needs 9 weights, got {len(self.weights)}")
        if self.divisor <= 0:
            raise ValueError(f"filter {self.name!r} needs a positive divisor")


FILTERS = {
    "contour": FilterSpec(
        "contour", (-1, -1, -1, -1, 8, -1, -1, -1, -1), divisor=1, offset=255
    ),
    "edge-enhance-more": FilterSpec(
        "edge-enhance-more", (-1, -1, -1, -1, 9, -1, -1, -1, -1), divisor=1, offset=0
    ),
    "find-edges": FilterSpec(
        "find-edges", (-1, -1, -1, -1, 8, -1, -1, -1, -1), divisor=1, offset=0
    ),
    "sharpen": FilterSpec(
        "sharpen", (-2, -2, -2, -2, 32, -2, -2, -2, -2), divisor=16, offset=0
    ),
}

ROTATIONS = ("left90", "right90", "half")

# np.rot90 counts counterclockwise quarter turns.
_ROT_K = {"left90": 1, "half": 2, "right90": 3}


def get_filter(name: str) -> FilterSpec:
    try:
        return FILTERS[name]
    except KeyError:
        raise ValueError(
            f"unknown filter {name!r}; expected one of {sorted(FILTERS)}"
        ) from None


def load_raster(path: str) -> Raster:
    """Decode a PNG or JPEG file into an RGB raster.

    Grayscale sources are expanded by channel replication. Missing or
    undecodable files raise DataError naming the path.
    """
    if not os.path.isfile(path):
        raise DataError(f"cannot read image: {path}: no such file")
    try:
        with Image.open(path) as img:
            img.load()
            rgb = img.convert("RGB")
    except UnidentifiedImageError:
        raise DataError(f"cannot decode image: {path}: unrecognized format") from None
    except OSError as exc:
        raise DataError(f"cannot decode image: {path}: {exc}") from None
    arr = np.asarray(rgb, dtype=np.uint8)
    if arr.size == 0:
        raise DataError(f"cannot decode image: {path}: zero-sized image")
    return raster_from_array(arr)


def rotate(r: Raster, turn: str) -> Raster:
    """Rotate by an exact quarter or half turn (no resampling)."""
    if turn not in _ROT_K:
        raise ValueError(f"unknown rotation {turn!r}; expected one of {ROTATIONS}")
    out = np.ascontiguousarray(np.rot90(r.pixels, _ROT_K[turn]))
    return raster_from_array(out)


def apply_filter(r: Raster, spec: FilterSpec) -> Raster:
    """Apply a 3x3 integer filter per channel.

    Interior pixels get the weighted neighborhood sum divided by the
    divisor (rounded half away from zero) plus the offset, clamped to
    [0, 255]. The one-pixel border is copied from the input.
    """
    if r.width < 3 or r.height < 3:
        raise DataError(
            f"raster {r.width}x{r.height} is too small to filter (needs at least 3x3)"
        )
    src = r.pixels.astype(np.int32)
    h_out = r.height - 2
    w_out = r.width - 2
    acc = np.zeros((h_out, w_out, 3), dtype=np.int32)
    idx = 0
    for dy in range(3):
        for dx in range(3):
            w = spec.weights[idx]
            idx += 1
            if w:
                acc += w * src[dy:dy + h_out, dx:dx + w_out, :]
    d = spec.divisor
    # Round half away from zero in pure integer arithmetic.
    q = np.where(acc >= 0, (2 * acc + d) // (2 * d), -((-2 * acc + d) // (2 * d)))
    vals = np.clip(q + spec.offset, 0, 255).astype(np.uint8)
    out = r.pixels.copy()
    out[1:-1, 1:-1, :] = vals
    return raster_from_array(out)


def resize(r: Raster, width: int, height: int) -> Raster:
    """Bilinear resize with center-aligned sampling.

    Output pixel centers map back to source coordinates, the four
    neighbors are blended, and the result is rounded half up and
    clamped to [0, 255]. A same-size request returns the input
    unchanged; constant images stay constant for any target size.
    """
    if width < 1 or height < 1:
        raise ValueError(f"resize target must be at least 1x1, got {width}x{height}")
    if width == r.width and height == r.height:
        return r
    src = r.pixels.astype(np.float64)
    sy = r.height / height
    sx = r.width / width
    ys = np.clip((np.arange(height) + 0.5) * sy - 0.5, 0.0, r.height - 1)
    xs = np.clip((np.arange(width) + 0.5) * sx - 0.5, 0.0, r.width - 1)
    y0 = np.floor(ys).astype(np.int64)
    x0 = np.floor(xs).astype(np.int64)
    y1 = np.minimum(y0 + 1, r.height - 1)
    x1 = np.minimum(x0 + 1, r.width - 1)
    fy = (ys - y0)[:, None, None]
    fx = (xs - x0)[None, :, None]
    p00 = src[y0[:, None], x0[None, :], :]
    p01 = src[y0[:, None], x1[None, :], :]
    p10 = src[y1[:, None], x0[None, :], :]
    p11 = src[y1[:, None], x1[None, :], :]
    # Incremental form: constant inputs come out exactly constant.
    v = p00 + fx * (p01 - p00) + fy * (p10 - p00) + fx * fy * (p00 - p01 - p10 + p11)
    out = np.clip(np.floor(v + 0.5), 0.0, 255.0).astype(np.uint8)
    return raster_from_array(out)


def to_tensor(r: Raster) -> np.ndarray:
    """Scale pixels to float32 in [0, 1], shape (height, width, 3)."""
    return r.pixels.astype(np.float32) / np.float32(255.0)
