"""Feature-map extraction and filter-activity census for a trained model."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ShapeError
from .model import ModelSpec, Params, model_forward

# Spatial layers rendered as grids, in network order.
GRID_LAYERS = ("conv1", "pool1", "conv2", "pool2")


@dataclass(frozen=True)
class FeatureMapSet:
    """Post-activation maps for one input image.

    maps holds (h, w, channels) arrays per spatial layer; active marks
    channels with any nonzero output. A channel is inactive only when
    its map is exactly zero everywhere, which is how a dead ReLU looks.
    """

    maps: dict
    active: dict

    def inactive_counts(self) -> dict:
        return {name: int((~flags).sum()) for name, flags in self.active.items()}


def extract_feature_maps(spec: ModelSpec, params: Params,
                         image: np.ndarray) -> FeatureMapSet:
    """Run one preprocessed image through the network in eval mode."""
    if image.ndim != 3:
        raise ShapeError(f"expected one (h, w, c) image, got {tuple(image.shape)}")
    _, trace = model_forward(spec, params, image[None], mode="eval")
    acts = trace.activations()
    maps = {name: np.ascontiguousarray(acts[name][0]) for name in GRID_LAYERS}
    active = {name: (arr != 0).any(axis=(0, 1)) for name, arr in maps.items()}
    return FeatureMapSet(maps=maps, active=active)


def count_inactive_filters(fms: FeatureMapSet) -> dict:
    """Channels per layer whose response is exactly zero everywhere."""
    return fms.inactive_counts()


def feature_grid(maps: np.ndarray, columns: int = 8) -> np.ndarray:
    """Tile per-channel maps into one grayscale image.

    Each channel is min-max normalized to 0..255 on its own (a constant
    channel renders black), laid out row-major with single-pixel white
    separators. Trailing cells beyond the channel count stay black.
    """
    m = np.asarray(maps)
    if m.ndim != 3:
        raise ShapeError(f"feature grid needs (h, w, channels), got {tuple(m.shape)}")
    if columns < 1:
        raise ValueError(f"columns must be at least 1, got {columns}")
    h, w, channels = m.shape
    rows = math.ceil(channels / columns)
    grid = np.zeros((rows * h + rows - 1, columns * w + columns - 1), dtype=np.uint8)
    # Separator lines between cells.
    for r in range(1, rows):
        grid[r * (h + 1) - 1, :] = 255
    for c in range(1, columns):
        grid[:, c * (w + 1) - 1] = 255
    for ch in range(channels):
        r, c = divmod(ch, columns)
        cell = m[:, :, ch].astype(np.float64)
        lo = cell.min()
        span = cell.max() - lo
        if span > 0:
            cell = np.floor((cell - lo) * (255.0 / span) + 0.5)
        else:
            cell = np.zeros_like(cell)
        y0 = r * (h + 1)
        x0 = c * (w + 1)
        grid[y0:y0 + h, x0:x0 + w] = cell.astype(np.uint8)
    return grid
