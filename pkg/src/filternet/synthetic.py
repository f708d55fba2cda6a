"""Deterministic synthetic image trees for tests and demos.

Three geometric texture families stand in for the three classes: a
bright filled disk, a checkerboard, and concentric rings. All three
are closed under quarter and half turns, so rotation balancing never
turns one class into another. Intensities and noise are seeded; the
same arguments always produce byte-identical files.
"""
from __future__ import annotations

import os

import numpy as np

from .dataset import CLASS_NAMES
from .png import write_png
from .seeding import derive_seed


def _disk(size: int, rng: np.random.Generator) -> np.ndarray:
    yy, xx = np.mgrid[0:size, 0:size]
    cy = size / 2 + rng.uniform(-size / 8, size / 8)
    cx = size / 2 + rng.uniform(-size / 8, size / 8)
    radius = rng.uniform(size / 5, size / 3)
    img = np.full((size, size), 40.0)
    img[(yy - cy) ** 2 + (xx - cx) ** 2 <= radius ** 2] = 210.0
    return img

def _checkerboard(size: int, rng: np.random.Generator) -> np.ndarray:
    cell = int(rng.integers(6, 10))
    off_y = int(rng.integers(0, cell))
    off_x = int(rng.integers(0, cell))
    yy, xx = np.mgrid[0:size, 0:size]
    board = (((yy + off_y) // cell + (xx + off_x) // cell) % 2).astype(np.float64)
    return 60.0 + board * 120.0

def _rings(size: int, rng: np.random.Generator) -> np.ndarray:
    yy, xx = np.mgrid[0:size, 0:size]
    cy = size / 2 + rng.uniform(-size / 10, size / 10)
    cx = size / 2 + rng.uniform(-size / 10, size / 10)
    period = rng.uniform(8.0, 12.0)
    r = np.sqrt((yy - cy) ** 2 + (xx - cx) ** 2)
    return 128.0 + 70.0 * np.cos(2.0 * np.pi * r / period)

_TEXTURES = (_disk, _checkerboard, _rings)


def _write_class_images(class_dir: str, class_id: int, count: int, size: int,
                        noise: float, seed: int, tag: str) -> None:
    os.makedirs(class_dir, exist_ok=True)
    for i in range(count):
        rng = np.random.default_rng(derive_seed(seed, tag, class_id, i))
        img = _TEXTURES[class_id](size, rng)
        img = img + rng.normal(0.0, noise, size=img.shape)
        gray = np.clip(np.rint(img), 0, 255).astype(np.uint8)
        rgb = np.repeat(gray[:, :, None], 3, axis=2)
        write_png(os.path.join(class_dir, f"img_{i:04d}.png"), rgb)


def generate_dataset(root: str, per_class_train: int = 40,
                     per_class_test: int = 60, size: int = 64,
                     noise: float = 14.0, seed: int = 7) -> str:
    """Write a three-class train/test image tree under root. Returns root."""
    for split, count in (("train", per_class_train), ("test", per_class_test)):
        for class_id, name in enumerate(CLASS_NAMES):
            _write_class_images(
                os.path.join(root, split, name), class_id, count, size,
                noise, seed, split,
            )
    return root


def generate_solid_dataset(root: str, per_class_train: int = 10,
                           per_class_test: int = 6, size: int = 16,
                           noise: float = 6.0, seed: int = 11) -> str:
    """Tiny tree of near-constant images at three intensity levels.

    Linearly separable by construction; used for fast overfit checks.
    """
    levels = (50.0, 140.0, 230.0)
    for split, count in (("train", per_class_train), ("test", per_class_test)):
        for class_id, name in enumerate(CLASS_NAMES):
            class_dir = os.path.join(root, split, name)
            os.makedirs(class_dir, exist_ok=True)
            for i in range(count):
                rng = np.random.default_rng(derive_seed(seed, split, class_id, i))
                img = np.full((size, size), levels[class_id])
                img = img + rng.normal(0.0, noise, size=img.shape)
                gray = np.clip(np.rint(img), 0, 255).astype(np.uint8)
                write_png(os.path.join(class_dir, f"img_{i:04d}.png"),
                          np.repeat(gray[:, :, None], 3, axis=2))
    return root
