"""Adam optimizer with bias correction.

State and update work on ordered name-to-array mappings, so the same
code drives the full model (through Params.as_dict) and the scalar
fixtures in the tests. Updates happen in place; arrays keep their
identity across steps.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import NumericalError, ShapeError


@dataclass
class AdamState:
    learning_rate: float
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-7
    step: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError(f"learning rate must be positive, got {self.learning_rate}")
        if not 0 <= self.beta1 < 1 or not 0 <= self.beta2 < 1:
            raise ValueError(f"betas must lie in [0, 1), got {self.beta1}, {self.beta2}")
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")


def init_adam(tensors: Mapping[str, np.ndarray], learning_rate: float,
              beta1: float = 0.9, beta2: float = 0.999,
              epsilon: float = 1e-7) -> AdamState:
    """Fresh state: zeroed first and second moments matching each tensor."""
    return AdamState(
        learning_rate=learning_rate,
        beta1=beta1,
        beta2=beta2,
        epsilon=epsilon,
        step=0,
        m={name: np.zeros_like(arr) for name, arr in tensors.items()},
        v={name: np.zeros_like(arr) for name, arr in tensors.items()},
    )


def adam_step(tensors: Mapping[str, np.ndarray], grads: Mapping[str, np.ndarray],
              state: AdamState) -> AdamState:
    """One Adam update over every tensor, in place.

        m <- b1 m + (1 - b1) g        mhat = m / (1 - b1^t)
        v <- b2 v + (1 - b2) g^2      vhat = v / (1 - b2^t)
        p <- p - lr * mhat / (sqrt(vhat) + eps)

    Raises ShapeError when a gradient's shape disagrees with its tensor
    and NumericalError when a gradient contains non-finite values,
    naming the parameter either way.
    """
    if set(tensors) != set(grads) or set(tensors) != set(state.m):
        raise ShapeError(
            f"adam_step: tensor names {sorted(tensors)} do not match "
            f"gradients {sorted(grads)} and state {sorted(state.m)}"
        )
    t = state.step + 1
    b1, b2 = state.beta1, state.beta2
    bc1 = 1.0 - b1 ** t
    bc2 = 1.0 - b2 ** t
    for name, p in tensors.items():
        g = grads[name]
        if g.shape != p.shape:
            raise ShapeError(
                f"adam_step: gradient for {name!r} has shape {tuple(g.shape)}, "
                f"parameter has {tuple(p.shape)}"
            )
        if not np.isfinite(g).all():
            raise NumericalError(f"non-finite gradient for parameter {name!r}")
        m = state.m[name]
        v = state.v[name]
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * (g * g)
        p -= state.learning_rate * (m / bc1) / (np.sqrt(v / bc2) + state.epsilon)
    state.step = t
    return state
