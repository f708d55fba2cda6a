"""Dataset manifests, rotation balancing, splits, and batch iteration.

A manifest is a TSV of (split, class_id, augmentation, path) rows. It
records which rotated copies exist logically; rotations are applied at
load time, never written to disk. Class ids are fixed: 0 Normal,
1 COVID-19, 2 Pneumonia.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from .errors import DataError
from .raster import (FilterSpec, apply_filter, get_filter, load_raster,
                     resize, rotate, to_tensor)

CLASS_NAMES = ("Normal", "COVID-19", "Pneumonia")
SPLITS = ("train", "test")
AUGMENTATIONS = ("none", "left90", "right90", "half")

# Per-class rotated copies added by balancing: doubles Normal,
# quadruples COVID-19, leaves Pneumonia alone.
BALANCE_PLAN = {
    0: ("half",),
    1: ("left90", "right90", "half"),
    2: (),
}

_EXTENSIONS = (".png", ".jpg", ".jpeg")


@dataclass(frozen=True)
class ManifestEntry:
    split: str
    class_id: int
    augmentation: str
    path: str

    def __post_init__(self):
        if self.split not in SPLITS:
            raise DataError(f"bad split {self.split!r} for {self.path}")
        if not 0 <= self.class_id < len(CLASS_NAMES):
            raise DataError(f"bad class id {self.class_id} for {self.path}")
        if self.augmentation not in AUGMENTATIONS:
            raise DataError(f"bad augmentation {self.augmentation!r} for {self.path}")


@dataclass(frozen=True)
class Manifest:
    entries: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        seen = set()
        train_paths = set()
        test_paths = set()
        for e in self.entries:
            key = (e.path, e.augmentation)
            if key in seen:
                raise DataError(f"duplicate manifest entry: {e.path} ({e.augmentation})")
            seen.add(key)
            (train_paths if e.split == "train" else test_paths).add(e.path)
        shared = train_paths & test_paths
        if shared:
            raise DataError(f"path appears in both splits: {sorted(shared)[0]}")

    def train_entries(self) -> tuple:
        return tuple(e for e in self.entries if e.split == "train")

    def test_entries(self) -> tuple:
        return tuple(e for e in self.entries if e.split == "test")

    def class_counts(self, split: str) -> list:
        counts = [0] * len(CLASS_NAMES)
        for e in self.entries:
            if e.split == split:
                counts[e.class_id] += 1
        return counts


def scan_dataset(root: str) -> Manifest:
    """Walk <root>/{train,test}/<class>/ and list every image, sorted.

    Raises DataError naming the offending directory when a split or
    class directory is missing or holds no images.
    """
    if not os.path.isdir(root):
        raise DataError(f"dataset root not found: {root}")
    entries = []
    for split in SPLITS:
        for class_id, class_name in enumerate(CLASS_NAMES):
            class_dir = os.path.join(root, split, class_name)
            if not os.path.isdir(class_dir):
                raise DataError(f"missing class directory: {class_dir}")
            names = sorted(
                n for n in os.listdir(class_dir)
                if os.path.splitext(n)[1].lower() in _EXTENSIONS
            )
            if not names:
                raise DataError(f"no images found in: {class_dir}")
            for name in names:
                path = os.path.abspath(os.path.join(class_dir, name))
                entries.append(ManifestEntry(split, class_id, "none", path))
    return Manifest(tuple(entries))


def balance(manifest: Manifest, plan: Optional[dict] = None) -> Manifest:
    """Add rotated copies per class, to both splits, originals preserved.

    Refuses input that already contains augmented entries; balancing is
    not idempotent and must run on a raw scan.
    """
    plan = BALANCE_PLAN if plan is None else plan
    for e in manifest.entries:
        if e.augmentation != "none":
            raise DataError(
                f"manifest already contains augmented entries ({e.path}); "
                "balance must run on an unaugmented manifest"
            )
    extra = [
        ManifestEntry(e.split, e.class_id, turn, e.path)
        for e in manifest.entries
        for turn in plan.get(e.class_id, ())
    ]
    return Manifest(manifest.entries + tuple(extra))


def save_manifest(manifest: Manifest, path: str) -> None:
    for e in manifest.entries:
        if "\t" in e.path or "\n" in e.path:
            raise DataError(f"path not representable in a TSV manifest: {e.path!r}")
    lines = [
        f"{e.split}\t{e.class_id}\t{e.augmentation}\t{e.path}\n"
        for e in manifest.entries
    ]
    with open(path, "w", encoding="utf-8") as fh:
        fh.writelines(lines)


def load_manifest(path: str) -> Manifest:
    if not os.path.isfile(path):
        raise DataError(f"manifest not found: {path}")
    entries = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise DataError(f"{path}:{lineno}: expected 4 tab-separated fields")
            split, class_id, augmentation, img_path = parts
            try:
                cid = int(class_id)
            except ValueError:
                raise DataError(f"{path}:{lineno}: bad class id {class_id!r}") from None
            entries.append(ManifestEntry(split, cid, augmentation, img_path))
    if not entries:
        raise DataError(f"manifest is empty: {path}")
    return Manifest(tuple(entries))


@dataclass(frozen=True)
class SplitSpec:
    """Fraction of training entries held out for validation, and the seed."""

    fraction: float
    seed: int

    def __post_init__(self):
        if not 0.0 < self.fraction < 1.0:
            raise ValueError(f"validation fraction must be in (0, 1), got {self.fraction}")


def split_train_val(entries: Sequence[ManifestEntry], spec: SplitSpec) -> tuple:
    """Shuffle once by seed; the last ceil(fraction * n) entries validate.

    The partition is a function of (entries, spec) alone, so every
    caller with the same seed sees the same fixed validation set.
    """
    n = len(entries)
    if n < 2:
        raise DataError(f"need at least 2 training entries to split, got {n}")
    n_val = math.ceil(spec.fraction * n)
    if n_val >= n:
        raise DataError(
            f"validation fraction {spec.fraction} leaves no training data for n={n}"
        )
    order = np.random.default_rng(spec.seed).permutation(n)
    shuffled = [entries[i] for i in order]
    return tuple(shuffled[:n - n_val]), tuple(shuffled[n - n_val:])


class ImageSource:
    """Loads manifest entries as model-ready tensors, with caching.

    Pipeline order is fixed: rotate, filter, resize, normalize. The
    cache key is (path, augmentation); the filter and target size are
    properties of the source, fixed per run.
    """

    def __init__(self, filter_spec: Optional[FilterSpec] = None,
                 size: tuple = (100, 100), cache: bool = True):
        self.filter_spec = filter_spec
        self.height, self.width = size
        self._cache = {} if cache else None

    @classmethod
    def for_filter_name(cls, name: str, size: tuple = (100, 100), cache: bool = True):
        spec = None if name == "none" else get_filter(name)
        return cls(spec, size=size, cache=cache)

    def load(self, entry: ManifestEntry) -> np.ndarray:
        key = (entry.path, entry.augmentation)
        if self._cache is not None:
            hit = self._cache.get(key)
            if hit is not None:
                return hit
        r = load_raster(entry.path)
        if entry.augmentation != "none":
            r = rotate(r, entry.augmentation)
        if self.filter_spec is not None:
            r = apply_filter(r, self.filter_spec)
        r = resize(r, self.width, self.height)
        t = to_tensor(r)
        t.flags.writeable = False
        if self._cache is not None:
            self._cache[key] = t
        return t


def _stack(entries: Sequence[ManifestEntry], source: ImageSource) -> tuple:
    xs = np.stack([source.load(e) for e in entries])
    ys = np.array([e.class_id for e in entries], dtype=np.int64)
    return xs, ys


def batches(entries: Sequence[ManifestEntry], batch_size: int, epoch_seed: int,
            source: ImageSource) -> Iterator[tuple]:
    """Yield (images, labels) minibatches in a fresh seeded order."""
    if batch_size < 1:
        raise ValueError(f"batch size must be at least 1, got {batch_size}")
    if not entries:
        raise DataError("cannot iterate batches over an empty entry list")
    order = np.random.default_rng(epoch_seed).permutation(len(entries))
    for start in range(0, len(entries), batch_size):
        idx = order[start:start + batch_size]
        yield _stack([entries[i] for i in idx], source)


def eval_batches(entries: Sequence[ManifestEntry], batch_size: int,
                 source: ImageSource) -> Iterator[tuple]:
    """Yield minibatches in manifest order (no shuffling), for evaluation."""
    if batch_size < 1:
        raise ValueError(f"batch size must be at least 1, got {batch_size}")
    for start in range(0, len(entries), batch_size):
        yield _stack(entries[start:start + batch_size], source)
