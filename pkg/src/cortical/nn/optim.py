"""Adam with bias correction, in either ascent or descent mode."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .mlp import Mlp


@dataclass
class AdamState:
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    step: int = 0
    first_moment: list[np.ndarray] = field(default_factory=list)
    second_moment: list[np.ndarray] = field(default_factory=list)


def adam_new(mlp: Mlp, learning_rate: float, beta1: float = 0.5, beta2: float = 0.999,
             epsilon: float = 1e-8) -> AdamState:
    params = mlp.parameters()
    return AdamState(
        learning_rate=learning_rate,
        beta1=beta1,
        beta2=beta2,
        epsilon=epsilon,
        first_moment=[np.zeros_like(p.data) for p in params],
        second_moment=[np.zeros_like(p.data) for p in params],
    )


def adam_step(mlp: Mlp, gradients, state: AdamState, maximize: bool = False):
    """Apply one Adam update in place and return ``(mlp, state)``.

    With ``maximize`` the parameters move along the gradient.
    """
    params = mlp.parameters()
    gradients = list(gradients)
    if len(gradients) != len(params):
        raise ValueError(f"expected {len(params)} gradients, got {len(gradients)}")
    for p, g in zip(params, gradients):
        if np.shape(g) != p.shape:
            raise ValueError(f"gradient shape {np.shape(g)} does not match parameter {p.shape}")

    state.step += 1
    b1, b2 = state.beta1, state.beta2
    bc1 = 1.0 - b1**state.step
    bc2 = 1.0 - b2**state.step
    sign = 1.0 if maximize else -1.0
    for p, g, m, v in zip(params, gradients, state.first_moment, state.second_moment):
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * (g * g)
        step = (m / bc1) / (np.sqrt(v / bc2) + state.epsilon)
        p.data = (p.data + sign * state.learning_rate * step).astype(p.data.dtype, copy=False)
    return mlp, state


def clip_gradients(gradients, max_norm: float) -> tuple[list[np.ndarray], float]:
    """Rescale so the global L2 norm is at most ``max_norm``; returns the pre-clip norm."""
    norm = float(np.sqrt(sum(float(np.sum(g * g)) for g in gradients)))
    if norm > max_norm:
        scale = max_norm / norm
        gradients = [g * scale for g in gradients]
    return list(gradients), norm
