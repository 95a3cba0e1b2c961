"""Adadelta parameter updates.

Per parameter tensor, with decay gamma and stability constant epsilon:

    G <- gamma * G + (1 - gamma) * g**2          (squared-gradient window)
    u  = -(sqrt(D + eps) / sqrt(G + eps)) * g    (update, no learning rate)
    D <- gamma * D + (1 - gamma) * u**2          (squared-update window)
    W <- W + u

The method carries its own per-parameter scale in G and D, so there is no
global learning-rate argument anywhere in this module.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

GAMMA = 0.9
EPSILON = 1e-6


@dataclass
class AdadeltaState:
    """Decay windows over squared gradients (G) and squared updates (D)."""

    gamma: float = GAMMA
    epsilon: float = EPSILON
    grad_acc: dict[str, np.ndarray] = field(default_factory=dict)
    update_acc: dict[str, np.ndarray] = field(default_factory=dict)

    def _accumulators_for(self, name: str, like: np.ndarray) -> tuple:
        if name not in self.grad_acc:
            self.grad_acc[name] = np.zeros_like(like)
            self.update_acc[name] = np.zeros_like(like)
        return self.grad_acc[name], self.update_acc[name]


def adadelta_step(
    params: dict[str, np.ndarray],
    grads: dict[str, np.ndarray],
    state: AdadeltaState,
) -> tuple[dict[str, np.ndarray], AdadeltaState]:
    """Apply one minimization step in place; returns (params, state).

    Rejects the whole step (raising ValueError, mutating nothing) if any
    gradient component is not finite.
    """
    for name, grad in grads.items():
        if not np.all(np.isfinite(grad)):
            raise ValueError(f"non-finite gradient for {name}")
        if name not in params:
            raise KeyError(f"gradient for unknown parameter {name}")
    gamma = state.gamma
    eps = state.epsilon
    for name, grad in grads.items():
        g_acc, u_acc = state._accumulators_for(name, params[name])
        g_acc *= gamma
        g_acc += (1.0 - gamma) * np.square(grad)
        update = -np.sqrt(u_acc + eps) / np.sqrt(g_acc + eps) * grad
        u_acc *= gamma
        u_acc += (1.0 - gamma) * np.square(update)
        params[name] += update
    return params, state
