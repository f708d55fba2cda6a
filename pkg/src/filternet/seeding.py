"""Deterministic seed derivation.

A single user-facing seed fans out into independent named streams
(weight init, validation split, epoch shuffles, dropout masks, tuner
sampling). Hashing the label chain keeps the streams decoupled: the
number of batches in one epoch can change without shifting the draws
of any other stream.
"""
from __future__ import annotations

import hashlib


def derive_seed(master: int, *labels) -> int:
    """Derive a 32-bit sub-seed from a master seed and a label chain.

    Labels may be strings or integers; they are joined into a single
    path string and hashed, so derive_seed(s, "shuffle", 3) is stable
    across platforms and runs.
    """
    path = "/".join(str(part) for part in (master, *labels))
    digest = hashlib.sha256(path.encode("utf-8")).digest()
    return int.from_bytes(digest[:4], "little")
