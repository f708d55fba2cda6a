"""Minimal deterministic PNG writer.

Charts, heatmaps, and feature-map grids are written through this
encoder so output bytes depend only on pixel content. Supports 8-bit
grayscale and 8-bit RGB, no interlacing, filter type 0 on every row.
"""
from __future__ import annotations

import struct
import zlib

import numpy as np

from .errors import ShapeError

_SIGNATURE = b"\x89PNG\r\n\x1a\n"


def _chunk(tag: bytes, payload: bytes) -> bytes:
    crc = zlib.crc32(tag + payload) & 0xFFFFFFFF
    return struct.pack(">I", len(payload)) + tag + payload + struct.pack(">I", crc)


def png_bytes(pixels: np.ndarray) -> bytes:
    """Encode a uint8 array of shape (h, w) or (h, w, 3) as PNG bytes."""
    arr = np.ascontiguousarray(pixels)
    if arr.dtype != np.uint8:
        raise ShapeError(f"png encoder expects uint8 pixels, got {arr.dtype}")
    if arr.ndim == 2:
        color_type = 0
        channels = 1
    elif arr.ndim == 3 and arr.shape[2] == 3:
        color_type = 2
        channels = 3
    else:
        raise ShapeError(f"png encoder expects (h, w) or (h, w, 3), got {arr.shape}")
    h, w = arr.shape[:2]
    if h == 0 or w == 0:
        raise ShapeError("png encoder needs at least one pixel")
    rows = np.zeros((h, 1 + w * channels), dtype=np.uint8)
    rows[:, 1:] = arr.reshape(h, w * channels)
    ihdr = struct.pack(">IIBBBBB", w, h, 8, color_type, 0, 0, 0)
    idat = zlib.compress(rows.tobytes(), 6)
    return _SIGNATURE + _chunk(b"IHDR", ihdr) + _chunk(b"IDAT", idat) + _chunk(b"IEND", b"")


def write_png(path: str, pixels: np.ndarray) -> None:
    with open(path, "wb") as fh:
        fh.write(png_bytes(pixels))
