"""Layer primitives: convolution, pooling, dense, activations, loss.

All forward and backward passes are explicit; the only vendored math
is BLAS matrix multiplication reached through numpy. Kernels follow
channels-last layout (batch, height, width, channels) and work in
whatever float dtype the inputs carry, so the same code path serves
float32 training and float64 gradient checking.
"""
from __future__ import annotations

import math

import numpy as np
from numpy.lib.stride_tricks import as_strided

from .errors import ShapeError

# Cap on scratch elements for unrolled convolution windows, to bound
# peak memory when batches are large.
_MAX_COL_ELEMENTS = 32 * 1024 * 1024


def he_uniform_init(shape: tuple, fan_in: int, seed: int, dtype=np.float32) -> np.ndarray:
    """Sample uniformly from [-L, L] with L = sqrt(6 / fan_in)."""
    if fan_in < 1:
        raise ValueError(f"fan_in must be at least 1, got {fan_in}")
    limit = math.sqrt(6.0 / fan_in)
    rng = np.random.default_rng(seed)
    return rng.uniform(-limit, limit, size=shape).astype(dtype)


def _windows(x: np.ndarray, k: int) -> np.ndarray:
    """Read-only sliding k x k windows over (B, H, W, C): (B, Ho, Wo, k, k, C)."""
    b, h, w, c = x.shape
    s0, s1, s2, s3 = x.strides
    return as_strided(
        x,
        shape=(b, h - k + 1, w - k + 1, k, k, c),
        strides=(s0, s1, s2, s1, s2, s3),
        writeable=False,
    )


def _batch_chunks(batch: int, per_item: int):
    step = max(1, min(batch, _MAX_COL_ELEMENTS // max(per_item, 1)))
    for start in range(0, batch, step):
        yield start, min(start + step, batch)


def _promote(x: np.ndarray) -> tuple:
    if x.ndim == 3:
        return x[None], True
    if x.ndim == 4:
        return x, False
    raise ShapeError(f"expected (h, w, c) or (b, h, w, c), got {tuple(x.shape)}")


def conv2d_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Valid cross-correlation, stride 1.

    x: (B, H, W, Cin) or (H, W, Cin); w: (k, k, Cin, Cout); b: (Cout,).
    Returns (B, H-k+1, W-k+1, Cout), matching the input's batch rank.
    """
    x, squeeze = _promote(x)
    if w.ndim != 4 or w.shape[0] != w.shape[1]:
        raise ShapeError(f"conv kernel must be (k, k, cin, cout), got {tuple(w.shape)}")
    k, _, cin, cout = w.shape
    if x.shape[3] != cin:
        raise ShapeError(
            f"conv input has {x.shape[3]} channels but kernel expects {cin}"
        )
    if b.shape != (cout,):
        raise ShapeError(f"conv bias shape {tuple(b.shape)} does not match {cout} filters")
    bsz, h, wid = x.shape[:3]
    if h < k or wid < k:
        raise ShapeError(f"conv input {h}x{wid} is smaller than the {k}x{k} kernel")
    ho, wo = h - k + 1, wid - k + 1
    wmat = np.ascontiguousarray(w.reshape(k * k * cin, cout))
    out = np.empty((bsz, ho, wo, cout), dtype=np.result_type(x, w))
    per_item = ho * wo * k * k * cin
    for start, stop in _batch_chunks(bsz, per_item):
        cols = _windows(x[start:stop], k).reshape((stop - start) * ho * wo, k * k * cin)
        out[start:stop] = (cols @ wmat).reshape(stop - start, ho, wo, cout)
    out += b
    return out[0] if squeeze else out


def conv2d_backward(x: np.ndarray, w: np.ndarray, d_out: np.ndarray,
                    need_dx: bool = True) -> tuple:
    """Gradients of conv2d_forward. Returns (dw, db, dx or None)."""
    x, squeeze = _promote(x)
    d_out = d_out[None] if squeeze else d_out
    k, _, cin, cout = w.shape
    bsz, h, wid = x.shape[:3]
    ho, wo = h - k + 1, wid - k + 1
    if d_out.shape != (bsz, ho, wo, cout):
        raise ShapeError(
            f"conv output gradient shape {tuple(d_out.shape)} does not match "
            f"expected {(bsz, ho, wo, cout)}"
        )
    dtype = np.result_type(x, w)
    dw = np.zeros((k * k * cin, cout), dtype=dtype)
    db = d_out.sum(axis=(0, 1, 2))
    dx = np.zeros_like(x, dtype=dtype) if need_dx else None
    wmat_t = np.ascontiguousarray(w.reshape(k * k * cin, cout).T)
    per_item = ho * wo * k * k * cin
    for start, stop in _batch_chunks(bsz, per_item):
        n = stop - start
        cols = _windows(x[start:stop], k).reshape(n * ho * wo, k * k * cin)
        d_chunk = d_out[start:stop].reshape(n * ho * wo, cout)
        dw += cols.T @ d_chunk
        if need_dx:
            dcols = (d_chunk @ wmat_t).reshape(n, ho, wo, k, k, cin)
            for ki in range(k):
                for kj in range(k):
                    dx[start:stop, ki:ki + ho, kj:kj + wo, :] += dcols[:, :, :, ki, kj, :]
    dw = dw.reshape(k, k, cin, cout)
    if squeeze and dx is not None:
        dx = dx[0]
    return dw, db, dx


def maxpool2d_forward(x: np.ndarray) -> tuple:
    """2x2 max pooling, stride 2, trailing odd row/column dropped.

    Returns (pooled, argmax) where argmax holds each window's winning
    position (0..3, first on ties) for exact gradient routing.
    """
    x, squeeze = _promote(x)
    bsz, h, w, c = x.shape
    if h < 2 or w < 2:
        raise ShapeError(f"maxpool input {h}x{w} is smaller than the 2x2 window")
    ho, wo = h // 2, w // 2
    tiles = x[:, :ho * 2, :wo * 2, :].reshape(bsz, ho, 2, wo, 2, c)
    tiles = tiles.transpose(0, 1, 3, 2, 4, 5).reshape(bsz, ho, wo, 4, c)
    idx = tiles.argmax(axis=3).astype(np.uint8)
    out = np.take_along_axis(tiles, idx[:, :, :, None, :], axis=3)[:, :, :, 0, :]
    if squeeze:
        return out[0], idx[0]
    return out, idx


def maxpool2d_backward(d_out: np.ndarray, idx: np.ndarray, input_shape: tuple) -> np.ndarray:
    """Scatter pooled gradients back to the winning input positions."""
    squeeze = d_out.ndim == 3
    if squeeze:
        d_out, idx = d_out[None], idx[None]
        input_shape = (1,) + tuple(input_shape)
    bsz, h, w, c = input_shape
    ho, wo = h // 2, w // 2
    if d_out.shape != (bsz, ho, wo, c):
        raise ShapeError(
            f"pool gradient shape {tuple(d_out.shape)} does not match expected {(bsz, ho, wo, c)}"
        )
    buf = np.zeros((bsz, ho, wo, 4, c), dtype=d_out.dtype)
    np.put_along_axis(buf, idx[:, :, :, None, :].astype(np.int64),
                      d_out[:, :, :, None, :], axis=3)
    buf = buf.reshape(bsz, ho, wo, 2, 2, c).transpose(0, 1, 3, 2, 4, 5)
    dx = np.zeros(input_shape, dtype=d_out.dtype)
    dx[:, :ho * 2, :wo * 2, :] = buf.reshape(bsz, ho * 2, wo * 2, c)
    return dx[0] if squeeze else dx


def dense_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Affine map: x @ w + b. x is (n,) or (B, n); w is (n, m); b is (m,)."""
    if w.ndim != 2:
        raise ShapeError(f"dense weights must be rank 2, got {tuple(w.shape)}")
    n, m = w.shape
    if x.shape[-1] != n:
        raise ShapeError(
            f"dense input width {x.shape[-1]} does not match weight rows {n}"
        )
    if b.shape != (m,):
        raise ShapeError(f"dense bias shape {tuple(b.shape)} does not match {m} units")
    return x @ w + b


def dense_backward(x: np.ndarray, w: np.ndarray, d_out: np.ndarray) -> tuple:
    """Gradients of dense_forward for batched input. Returns (dw, db, dx)."""
    dw = x.T @ d_out
    db = d_out.sum(axis=0)
    dx = d_out @ w.T
    return dw, db, dx


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0)


def relu_backward(d_out: np.ndarray, activated: np.ndarray) -> np.ndarray:
    # Subgradient 0 at the kink; mask comes from the forward output.
    return d_out * (activated > 0)


def softmax(z: np.ndarray) -> np.ndarray:
    """Row-wise softmax with max subtraction; strictly positive output."""
    m = z.max(axis=-1, keepdims=True)
    e = np.exp(z - m)
    return e / e.sum(axis=-1, keepdims=True)


def dropout_forward(x: np.ndarray, rate: float, mode: str, seed: int) -> tuple:
    """Inverted dropout. Returns (output, scaled mask or None).

    Evaluation mode and rate 0 pass the input through bit-exact. In
    training mode each element survives with probability 1 - rate and
    survivors are scaled by 1 / (1 - rate), so expectation matches.
    """
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
    if mode not in ("train", "eval"):
        raise ValueError(f"mode must be 'train' or 'eval', got {mode!r}")
    if mode == "eval" or rate == 0.0:
        return x, None
    rng = np.random.default_rng(seed)
    keep = rng.random(x.shape) >= rate
    mask = keep.astype(x.dtype) / np.asarray(1.0 - rate, dtype=x.dtype)
    return x * mask, mask


def sparse_ce_loss(probs: np.ndarray, labels: np.ndarray) -> tuple:
    """Mean cross-entropy against integer labels, with the fused gradient.

    Probabilities are clamped to [1e-7, 1] before the log. Returns
    (loss, d_logits) where d_logits = (probs - onehot) / batch, the
    gradient with respect to the pre-softmax logits.
    """
    if probs.ndim != 2:
        raise ShapeError(f"probabilities must be (batch, classes), got {tuple(probs.shape)}")
    bsz, classes = probs.shape
    labels = np.asarray(labels)
    if labels.shape != (bsz,):
        raise ShapeError(
            f"labels shape {tuple(labels.shape)} does not match batch size {bsz}"
        )
    if labels.min() < 0 or labels.max() >= classes:
        raise ValueError(f"labels must lie in [0, {classes}), got range "
                         f"[{labels.min()}, {labels.max()}]")
    row_sums = probs.sum(axis=1)
    if not np.allclose(row_sums, 1.0, atol=1e-5):
        raise ValueError("probability rows must sum to 1 within 1e-5")
    picked = np.clip(probs[np.arange(bsz), labels], 1e-7, 1.0)
    loss = float(np.mean(-np.log(picked)))
    onehot = np.zeros_like(probs)
    onehot[np.arange(bsz), labels] = 1
    d_logits = (probs - onehot) / np.asarray(bsz, dtype=probs.dtype)
    return loss, d_logits
