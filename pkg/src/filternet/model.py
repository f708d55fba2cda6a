"""The two-convolution classifier: spec, parameters, forward, backward.

Layer order is fixed: conv + relu, 2x2 maxpool, dropout, conv + relu,
2x2 maxpool, dropout, flatten, dense + relu, dense, softmax. Both conv
layers share the filter count and kernel size; both dropout layers
share one rate. Shapes follow from a ModelSpec alone, so parameter
counts are pure arithmetic.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import ShapeError
from .nn import (conv2d_backward, conv2d_forward, dense_backward,
                 dense_forward, dropout_forward, he_uniform_init,
                 maxpool2d_backward, maxpool2d_forward, relu, relu_backward,
                 softmax, sparse_ce_loss)
from .seeding import derive_seed


@dataclass(frozen=True)
class ModelSpec:
    """Hyperparameters that fully determine the architecture.

    raster_filter names the preprocessing filter the model was trained
    with ("none" or a 3x3 filter name); it travels with the model so
    evaluation can rebuild the same input pipeline.
    """

    conv_filters: int = 64
    kernel_size: int = 5
    dense_units: int = 160
    dropout_rate: float = 0.0
    input_height: int = 100
    input_width: int = 100
    input_channels: int = 3
    classes: int = 3
    raster_filter: str = "none"

    def __post_init__(self):
        if self.conv_filters < 1:
            raise ValueError(f"conv_filters must be at least 1, got {self.conv_filters}")
        if self.kernel_size < 1 or self.kernel_size % 2 == 0:
            raise ValueError(f"kernel_size must be odd and positive, got {self.kernel_size}")
        if self.dense_units < 1:
            raise ValueError(f"dense_units must be at least 1, got {self.dense_units}")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError(f"dropout_rate must be in [0, 1), got {self.dropout_rate}")
        if self.classes < 2:
            raise ValueError(f"classes must be at least 2, got {self.classes}")
        if self.input_channels < 1:
            raise ValueError(f"input_channels must be at least 1, got {self.input_channels}")
        if min(self.shape_chain()[-1][:2]) < 1:
            raise ValueError(
                f"input {self.input_height}x{self.input_width} is too small for "
                f"two {self.kernel_size}x{self.kernel_size} conv + pool stages"
            )

    def shape_chain(self) -> list:
        """Spatial shapes (h, w, c) after conv1, pool1, conv2, pool2."""
        k, f = self.kernel_size, self.conv_filters
        h1, w1 = self.input_height - k + 1, self.input_width - k + 1
        hp1, wp1 = h1 // 2, w1 // 2
        h2, w2 = hp1 - k + 1, wp1 - k + 1
        hp2, wp2 = h2 // 2, w2 // 2
        return [(h1, w1, f), (hp1, wp1, f), (h2, w2, f), (hp2, wp2, f)]

    @property
    def flatten_dim(self) -> int:
        hp2, wp2, f = self.shape_chain()[-1]
        return hp2 * wp2 * f


def parameter_counts(spec: ModelSpec) -> dict:
    """Exact learnable-parameter arithmetic per layer."""
    k, f, c = spec.kernel_size, spec.conv_filters, spec.input_channels
    conv1 = k * k * c * f + f
    conv2 = k * k * f * f + f
    dense1 = spec.flatten_dim * spec.dense_units + spec.dense_units
    dense2 = spec.dense_units * spec.classes + spec.classes
    return {
        "conv1": conv1,
        "conv2": conv2,
        "conv_total": conv1 + conv2,
        "dense1": dense1,
        "dense2": dense2,
        "total": conv1 + conv2 + dense1 + dense2,
    }


@dataclass
class Params:
    """Learnable tensors, in fixed serialization order."""

    conv1_w: np.ndarray
    conv1_b: np.ndarray
    conv2_w: np.ndarray
    conv2_b: np.ndarray
    dense1_w: np.ndarray
    dense1_b: np.ndarray
    dense2_w: np.ndarray
    dense2_b: np.ndarray

    FIELDS = ("conv1_w", "conv1_b", "conv2_w", "conv2_b",
              "dense1_w", "dense1_b", "dense2_w", "dense2_b")

    def items(self) -> list:
        return [(name, getattr(self, name)) for name in self.FIELDS]

    def as_dict(self) -> dict:
        return dict(self.items())

    def copy(self) -> "Params":
        return Params(**{name: arr.copy() for name, arr in self.items()})

    def astype(self, dtype) -> "Params":
        return Params(**{name: arr.astype(dtype) for name, arr in self.items()})

    def count(self) -> int:
        return sum(arr.size for _, arr in self.items())


def init_params(spec: ModelSpec, seed: int, dtype=np.float32) -> Params:
    """He-uniform weights (limit sqrt(6 / fan_in)), zero biases.

    Each tensor draws from its own derived stream, so the values of one
    layer do not depend on the sizes of the others.
    """
    k, f, c = spec.kernel_size, spec.conv_filters, spec.input_channels
    u, m = spec.dense_units, spec.classes
    flat = spec.flatten_dim
    return Params(
        conv1_w=he_uniform_init((k, k, c, f), k * k * c, derive_seed(seed, "conv1_w"), dtype),
        conv1_b=np.zeros(f, dtype=dtype),
        conv2_w=he_uniform_init((k, k, f, f), k * k * f, derive_seed(seed, "conv2_w"), dtype),
        conv2_b=np.zeros(f, dtype=dtype),
        dense1_w=he_uniform_init((flat, u), flat, derive_seed(seed, "dense1_w"), dtype),
        dense1_b=np.zeros(u, dtype=dtype),
        dense2_w=he_uniform_init((u, m), u, derive_seed(seed, "dense2_w"), dtype),
        dense2_b=np.zeros(m, dtype=dtype),
    )


@dataclass
class ForwardTrace:
    """Every intermediate needed for introspection and backprop."""

    x: np.ndarray
    conv1: np.ndarray
    pool1: np.ndarray
    pool1_idx: np.ndarray
    drop1_mask: Optional[np.ndarray]
    drop1: np.ndarray
    conv2: np.ndarray
    pool2: np.ndarray
    pool2_idx: np.ndarray
    drop2_mask: Optional[np.ndarray]
    drop2: np.ndarray
    flat: np.ndarray
    dense1: np.ndarray
    output: np.ndarray

    def activations(self) -> dict:
        """Introspection view: post-activation maps in layer order."""
        return {
            "conv1": self.conv1,
            "pool1": self.pool1,
            "conv2": self.conv2,
            "pool2": self.pool2,
            "flatten": self.flat,
            "dense1": self.dense1,
            "output": self.output,
        }


def _staged(layer: str):
    """Re-raise shape errors with the failing layer's name attached."""
    class _Ctx:
        def __enter__(self):
            return self

        def __exit__(self, exc_type, exc, tb):
            if exc_type is not None and issubclass(exc_type, ShapeError):
                raise ShapeError(f"{layer}: {exc}") from None
            return False
    return _Ctx()


def model_forward(spec: ModelSpec, params: Params, x: np.ndarray,
                  mode: str = "eval", seed: int = 0) -> tuple:
    """Run the full network. Returns (probabilities, trace).

    x is (B, H, W, C) or a single (H, W, C) image, which is promoted to
    a batch of one. In train mode the dropout masks are a pure function
    of seed, so a forward pass can be reproduced exactly.
    """
    if x.ndim == 3:
        x = x[None]
    if x.ndim != 4 or x.shape[1:] != (spec.input_height, spec.input_width,
                                      spec.input_channels):
        raise ShapeError(
            f"input: expected (batch, {spec.input_height}, {spec.input_width}, "
            f"{spec.input_channels}), got {tuple(x.shape)}"
        )
    with _staged("conv1"):
        conv1 = relu(conv2d_forward(x, params.conv1_w, params.conv1_b))
    with _staged("pool1"):
        pool1, idx1 = maxpool2d_forward(conv1)
    drop1, mask1 = dropout_forward(pool1, spec.dropout_rate, mode,
                                   derive_seed(seed, "drop1"))
    with _staged("conv2"):
        conv2 = relu(conv2d_forward(drop1, params.conv2_w, params.conv2_b))
    with _staged("pool2"):
        pool2, idx2 = maxpool2d_forward(conv2)
    drop2, mask2 = dropout_forward(pool2, spec.dropout_rate, mode,
                                   derive_seed(seed, "drop2"))
    flat = drop2.reshape(drop2.shape[0], -1)
    if flat.shape[1] != spec.flatten_dim:
        raise ShapeError(
            f"flatten: got width {flat.shape[1]}, expected {spec.flatten_dim}"
        )
    with _staged("dense1"):
        dense1 = relu(dense_forward(flat, params.dense1_w, params.dense1_b))
    with _staged("dense2"):
        logits = dense_forward(dense1, params.dense2_w, params.dense2_b)
    probs = softmax(logits)
    trace = ForwardTrace(
        x=x, conv1=conv1, pool1=pool1, pool1_idx=idx1,
        drop1_mask=mask1, drop1=drop1, conv2=conv2, pool2=pool2,
        pool2_idx=idx2, drop2_mask=mask2, drop2=drop2, flat=flat,
        dense1=dense1, output=probs,
    )
    return probs, trace


def backward_from_trace(spec: ModelSpec, params: Params, trace: ForwardTrace,
                        d_logits: np.ndarray) -> Params:
    """Backpropagate a logit gradient through a recorded forward pass."""
    dw2d, db2d, d_dense1 = dense_backward(trace.dense1, params.dense2_w, d_logits)
    d_z1 = relu_backward(d_dense1, trace.dense1)
    dw1d, db1d, d_flat = dense_backward(trace.flat, params.dense1_w, d_z1)
    d_drop2 = d_flat.reshape(trace.drop2.shape)
    if trace.drop2_mask is not None:
        d_drop2 = d_drop2 * trace.drop2_mask
    d_conv2 = relu_backward(
        maxpool2d_backward(d_drop2, trace.pool2_idx, trace.conv2.shape), trace.conv2
    )
    dw2c, db2c, d_drop1 = conv2d_backward(trace.drop1, params.conv2_w, d_conv2)
    if trace.drop1_mask is not None:
        d_drop1 = d_drop1 * trace.drop1_mask
    d_conv1 = relu_backward(
        maxpool2d_backward(d_drop1, trace.pool1_idx, trace.conv1.shape), trace.conv1
    )
    dw1c, db1c, _ = conv2d_backward(trace.x, params.conv1_w, d_conv1, need_dx=False)
    return Params(
        conv1_w=dw1c, conv1_b=db1c, conv2_w=dw2c, conv2_b=db2c,
        dense1_w=dw1d, dense1_b=db1d, dense2_w=dw2d, dense2_b=db2d,
    )


def model_backward(spec: ModelSpec, params: Params, x: np.ndarray,
                   labels: np.ndarray, mode: str = "train",
                   seed: int = 0) -> tuple:
    """Forward plus backward in one call. Returns (loss, gradients).

    Gradients are exact derivatives of the mean cross-entropy over the
    batch with respect to every parameter tensor, using the same
    dropout masks as the forward pass (both derive from seed).
    """
    probs, trace = model_forward(spec, params, x, mode=mode, seed=seed)
    loss, d_logits = sparse_ce_loss(probs, labels)
    return loss, backward_from_trace(spec, params, trace, d_logits)


def spec_to_dict(spec: ModelSpec) -> dict:
    return {
        "conv_filters": spec.conv_filters,
        "kernel_size": spec.kernel_size,
        "dense_units": spec.dense_units,
        "dropout_rate": spec.dropout_rate,
        "input": [spec.input_height, spec.input_width, spec.input_channels],
        "classes": spec.classes,
        "raster_filter": spec.raster_filter,
    }


def spec_from_dict(d: dict) -> ModelSpec:
    try:
        h, w, c = d["input"]
        return ModelSpec(
            conv_filters=int(d["conv_filters"]),
            kernel_size=int(d["kernel_size"]),
            dense_units=int(d["dense_units"]),
            dropout_rate=float(d["dropout_rate"]),
            input_height=int(h),
            input_width=int(w),
            input_channels=int(c),
            classes=int(d["classes"]),
            raster_filter=str(d.get("raster_filter", "none")),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"bad model spec dictionary: {exc}") from None


def with_filter(spec: ModelSpec, filter_name: str) -> ModelSpec:
    return replace(spec, raster_filter=filter_name)
