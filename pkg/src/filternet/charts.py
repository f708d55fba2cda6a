"""Native chart rendering: training curves and confusion heatmaps.

Everything is drawn into uint8 RGB buffers and written through the
in-package PNG encoder, so identical inputs give identical bytes.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import font
from .png import write_png

WHITE = (255, 255, 255)
BLACK = (20, 20, 20)
AXIS = (90, 90, 90)
GRID = (225, 225, 225)

# Polyline palette; first two match the usual training/validation pairing.
PALETTE = (
    (31, 119, 180),   # blue
    (227, 86, 145),   # pink
    (44, 160, 44),    # green
    (255, 127, 14),   # orange
    (148, 103, 189),  # purple
)

_HEAT_LOW = np.array([255, 255, 255], dtype=np.float64)
_HEAT_HIGH = np.array([8, 48, 107], dtype=np.float64)


@dataclass(frozen=True)
class ChartSeries:
    """One labeled polyline: x strictly increasing, y finite."""

    label: str
    xs: tuple
    ys: tuple

    def __post_init__(self):
        xs = tuple(float(v) for v in self.xs)
        ys = tuple(float(v) for v in self.ys)
        if len(xs) != len(ys):
            raise ValueError(f"series {self.label!r}: {len(xs)} x values vs {len(ys)} y values")
        if len(xs) < 2:
            raise ValueError(f"series {self.label!r} needs at least 2 points")
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError(f"series {self.label!r}: x values must be strictly increasing")
        if not all(np.isfinite(ys)):
            raise ValueError(f"series {self.label!r}: y values must be finite")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)


def value_to_pixel(v: float, lo: float, hi: float, px_lo: int, px_hi: int) -> int:
    """Map a data value linearly onto a pixel span, rounding to nearest."""
    t = (v - lo) / (hi - lo)
    return px_lo + int(round(t * (px_hi - px_lo)))


def x_pixel(v, lo, hi, left, right):
    return value_to_pixel(v, lo, hi, left, right)


def y_pixel(v, lo, hi, top, bottom):
    # Screen y grows downward, data y grows upward.
    return bottom - (value_to_pixel(v, lo, hi, 0, bottom - top))


def _padded_range(lo: float, hi: float) -> tuple:
    if hi > lo:
        return lo, hi
    # Degenerate span: pad so a constant series sits mid-axis.
    return lo - 0.5, hi + 0.5


def _draw_line(buf, x0, y0, x1, y1, color):
    dx = abs(x1 - x0)
    dy = -abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    h, w = buf.shape[:2]
    while True:
        if 0 <= y0 < h and 0 <= x0 < w:
            buf[y0, x0] = color
        if x0 == x1 and y0 == y1:
            break
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x0 += sx
        if e2 <= dx:
            err += dx
            y0 += sy


def _fmt(v: float) -> str:
    return f"{v:.4g}"


def render_line_chart(series: Sequence[ChartSeries], out_path: str,
                      width: int = 800, height: int = 600) -> None:
    """Render labeled series as polylines with auto-scaled axes and a legend."""
    if not series:
        raise ValueError("render_line_chart needs at least one series")
    left, right = 70, width - 21
    top, bottom = 20, height - 46
    if right - left < 10 or bottom - top < 10:
        raise ValueError(f"chart size {width}x{height} is too small")

    x_lo, x_hi = _padded_range(min(s.xs[0] for s in series), max(s.xs[-1] for s in series))
    y_lo, y_hi = _padded_range(min(min(s.ys) for s in series), max(max(s.ys) for s in series))

    buf = np.full((height, width, 3), WHITE, dtype=np.uint8)

    for i in range(5):
        tx = x_lo + (x_hi - x_lo) * i / 4
        ty = y_lo + (y_hi - y_lo) * i / 4
        px = x_pixel(tx, x_lo, x_hi, left, right)
        py = y_pixel(ty, y_lo, y_hi, top, bottom)
        buf[top:bottom + 1, px] = GRID
        buf[py, left:right + 1] = GRID
        label = _fmt(tx)
        font.draw_text(buf, px - font.text_width(label) // 2, bottom + 8, label, BLACK)
        label = _fmt(ty)
        font.draw_text(buf, left - 8 - font.text_width(label), py - 3, label, BLACK)

    buf[top:bottom + 1, left] = AXIS
    buf[bottom, left:right + 1] = AXIS

    for i, s in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        pts = [
            (x_pixel(x, x_lo, x_hi, left, right), y_pixel(y, y_lo, y_hi, top, bottom))
            for x, y in zip(s.xs, s.ys)
        ]
        for (ax, ay), (bx, by) in zip(pts, pts[1:]):
            _draw_line(buf, ax, ay, bx, by, color)

    # Legend, top right inside the plot area.
    ly = top + 6
    for i, s in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        lx = right - 16 - font.text_width(s.label)
        buf[ly + 2:ly + 5, lx - 14:lx - 4] = color
        font.draw_text(buf, lx, ly, s.label, BLACK)
        ly += 12

    write_png(out_path, buf)


def render_heatmap(matrix: np.ndarray, class_names: Sequence[str], out_path: str,
                   cell_w: int = 110, cell_h: int = 80) -> None:
    """Render a counts matrix as a white-to-blue heatmap with cell labels.

    Rows are true classes, columns predicted classes. Cell color scales
    linearly from zero (white) to the matrix maximum (dark blue).
    """
    m = np.asarray(matrix)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] != len(class_names):
        raise ValueError(
            f"heatmap needs a square matrix matching {len(class_names)} class names, "
            f"got shape {m.shape}"
        )
    if (m < 0).any():
        raise ValueError("heatmap counts must be non-negative")
    n = m.shape[0]
    left, top = 110, 50
    width = left + n * cell_w + 20
    height = top + n * cell_h + 20
    buf = np.full((height, width, 3), WHITE, dtype=np.uint8)
    vmax = float(m.max())

    for j, name in enumerate(class_names):
        cx = left + j * cell_w + (cell_w - font.text_width(name)) // 2
        font.draw_text(buf, cx, top - 16, name, BLACK)
    for i, name in enumerate(class_names):
        cy = top + i * cell_h + cell_h // 2 - 3
        font.draw_text(buf, left - 8 - font.text_width(name), cy, name, BLACK)

    for i in range(n):
        for j in range(n):
            t = 0.0 if vmax == 0 else float(m[i, j]) / vmax
            color = np.rint(_HEAT_LOW + t * (_HEAT_HIGH - _HEAT_LOW)).astype(np.uint8)
            y0 = top + i * cell_h
            x0 = left + j * cell_w
            buf[y0:y0 + cell_h, x0:x0 + cell_w] = color
            label = str(int(m[i, j]))
            tcolor = WHITE if t > 0.5 else BLACK
            font.draw_text(
                buf,
                x0 + (cell_w - font.text_width(label, 2)) // 2,
                y0 + (cell_h - font.GLYPH_H * 2) // 2,
                label,
                tcolor,
                scale=2,
            )

    # Thin separators around cells keep equal counts distinguishable.
    for k in range(n + 1):
        buf[top + k * cell_h - (1 if k == n else 0), left:left + n * cell_w] = AXIS
        buf[top:top + n * cell_h, left + k * cell_w - (1 if k == n else 0)] = AXIS

    write_png(out_path, buf)
