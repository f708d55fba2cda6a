"""Shared test utilities: independent scalar oracles and runners.

The oracles here are deliberately naive (nested loops, raw arithmetic)
so they cannot share a bug with the vectorized implementations they
check.
"""
from __future__ import annotations

import io
import subprocess
import sys

import numpy as np
from PIL import Image


def naive_matmul(a, b):
    a = np.asarray(a)
    b = np.asarray(b)
    m, k = a.shape
    k2, n = b.shape
    assert k == k2
    out = np.zeros((m, n), dtype=np.result_type(a, b))
    for i in range(m):
        for j in range(n):
            acc = 0.0
            for t in range(k):
                acc += a[i, t] * b[t, j]
            out[i, j] = acc
    return out


def naive_filter(pixels, weights, divisor, offset):
    """Scalar 3x3 integer filter: rounding half away from zero, copied border."""
    h, w, _ = pixels.shape
    out = pixels.copy()
    for y in range(1, h - 1):
        for x in range(1, w - 1):
            for c in range(3):
                acc = 0
                i = 0
                for dy in (-1, 0, 1):
                    for dx in (-1, 0, 1):
                        acc += weights[i] * int(pixels[y + dy, x + dx, c])
                        i += 1
                if acc >= 0:
                    val = (2 * acc + divisor) // (2 * divisor)
                else:
                    val = -((2 * (-acc) + divisor) // (2 * divisor))
                val += offset
                out[y, x, c] = min(255, max(0, val))
    return out


def naive_conv2d(x, w, b):
    """Six-loop valid cross-correlation for one image (h, w, cin)."""
    h, wid, cin = x.shape
    k = w.shape[0]
    cout = w.shape[3]
    ho, wo = h - k + 1, wid - k + 1
    out = np.zeros((ho, wo, cout), dtype=np.float64)
    for i in range(ho):
        for j in range(wo):
            for f in range(cout):
                acc = 0.0
                for ki in range(k):
                    for kj in range(k):
                        for c in range(cin):
                            acc += float(x[i + ki, j + kj, c]) * float(w[ki, kj, c, f])
                out[i, j, f] = acc + float(b[f])
    return out


def naive_confusion(y_true, y_pred, n_classes=3):
    cm = [[0] * n_classes for _ in range(n_classes)]
    for t, p in zip(y_true, y_pred):
        cm[int(t)][int(p)] += 1
    return np.array(cm, dtype=np.int64)


def decode_png(data: bytes) -> np.ndarray:
    with Image.open(io.BytesIO(data)) as img:
        img.load()
        return np.asarray(img)


def read_png(path: str) -> np.ndarray:
    with open(path, "rb") as fh:
        return decode_png(fh.read())


def run_cli(argv):
    """Run the CLI in-process. Returns the exit code."""
    from filternet.cli import main

    return main(list(argv))


def run_cli_subprocess(argv, threads=1):
    """Run the CLI as a child process with a capped thread pool."""
    cmd = [sys.executable, "-m", "filternet", "--threads", str(threads)] + list(argv)
    return subprocess.run(cmd, capture_output=True, text=True)


def activation_pattern(spec, params, x, seed):
    """Discrete routing state of one train-mode forward pass.

    If this differs between two nearby points, the loss surface has a
    kink between them and a central difference across it does not
    measure the derivative backprop computes.
    """
    from filternet.model import model_forward

    _, tr = model_forward(spec, params, x, mode="train", seed=seed)
    return (
        tr.pool1_idx.copy(), tr.pool2_idx.copy(),
        (tr.conv1 > 0).copy(), (tr.conv2 > 0).copy(), (tr.dense1 > 0).copy(),
    )


def gradient_check(spec, data_seed, forward_seed, batch=4, step=1e-4,
                   rel_tol=1e-4, abs_floor=1e-7):
    """Central-difference check of every parameter gradient, in float64.

    Returns (checked, failures, skipped): coordinates whose +/- step
    evaluations straddle an activation-pattern change are skipped,
    because the finite difference is not a derivative estimate there.
    """
    from filternet.model import (backward_from_trace, init_params,
                                 model_forward)
    from filternet.nn import sparse_ce_loss

    rng = np.random.default_rng(data_seed)
    params = init_params(spec, data_seed, dtype=np.float64)
    x = rng.random((batch, spec.input_height, spec.input_width,
                    spec.input_channels))
    y = rng.integers(0, spec.classes, size=batch)

    def loss_at():
        probs, _ = model_forward(spec, params, x, mode="train", seed=forward_seed)
        return sparse_ce_loss(probs, y)[0]

    probs, trace = model_forward(spec, params, x, mode="train", seed=forward_seed)
    _, d_logits = sparse_ce_loss(probs, y)
    grads = backward_from_trace(spec, params, trace, d_logits).as_dict()

    checked = failures = skipped = 0
    for name, arr in params.items():
        flat = arr.ravel()
        g = grads[name].ravel()
        for i in range(flat.size):
            keep = flat[i]
            flat[i] = keep + step
            up = loss_at()
            flat[i] = keep - step
            down = loss_at()
            flat[i] = keep
            fd = (up - down) / (2 * step)
            diff = abs(g[i] - fd)
            if diff <= abs_floor:
                checked += 1
                continue
            rel = diff / max(abs(g[i]), abs(fd))
            if rel < rel_tol:
                checked += 1
                continue
            # Tolerance exceeded: valid only if no kink sits inside the stencil.
            flat[i] = keep + step
            pat_up = activation_pattern(spec, params, x, forward_seed)
            flat[i] = keep - step
            pat_down = activation_pattern(spec, params, x, forward_seed)
            flat[i] = keep
            if all(np.array_equal(u, d) for u, d in zip(pat_up, pat_down)):
                failures += 1
            else:
                skipped += 1
            checked += 1
    return checked, failures, skipped
