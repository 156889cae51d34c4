"""Per-dimension conditioner networks.

A conditioner is a fully connected net with three weight layers and tanh
hidden activations.  It maps the latent prefix z_{<j} to the free coupling
parameters of dimension j.  Forward passes cache the activations needed for
an exact reverse sweep; `backward` returns parameter gradients plus the
gradient with respect to the inputs (the prefix feeds earlier dimensions).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class ConditionerNet:
    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray
    W3: np.ndarray
    b3: np.ndarray

    @property
    def in_dim(self) -> int:
        return self.W1.shape[1]

    @property
    def out_dim(self) -> int:
        return self.W3.shape[0]

    def parameters(self) -> dict[str, np.ndarray]:
        return {"W1": self.W1, "b1": self.b1, "W2": self.W2, "b2": self.b2,
                "W3": self.W3, "b3": self.b3}

    def to_dict(self) -> dict:
        return {
            "weights": [self.W1.tolist(), self.W2.tolist(), self.W3.tolist()],
            "biases": [self.b1.tolist(), self.b2.tolist(), self.b3.tolist()],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ConditionerNet":
        w = [np.asarray(m, dtype=float) for m in d["weights"]]
        b = [np.asarray(m, dtype=float) for m in d["biases"]]
        return cls(w[0], b[0], w[1], b[1], w[2], b[2])


def init_conditioner(in_dim: int, out_dim: int, rng: np.random.Generator,
                     hidden: tuple[int, int] = (32, 32)) -> ConditionerNet:
    """All weights and biases drawn from a standard normal."""
    h1, h2 = hidden
    return ConditionerNet(
        W1=rng.standard_normal((h1, in_dim)),
        b1=rng.standard_normal(h1),
        W2=rng.standard_normal((h2, h1)),
        b2=rng.standard_normal(h2),
        W3=rng.standard_normal((out_dim, h2)),
        b3=rng.standard_normal(out_dim),
    )


def conditioner_forward(net: ConditionerNet, x: np.ndarray):
    """x: (N, in_dim) -> (out (N, out_dim), cache for backward)."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[1] != net.in_dim:
        raise ValueError(f"expected input width {net.in_dim}, got shape {x.shape}")
    h1 = np.tanh(x @ net.W1.T + net.b1)
    h2 = np.tanh(h1 @ net.W2.T + net.b2)
    out = h2 @ net.W3.T + net.b3
    return out, (x, h1, h2)


def conditioner_backward(net: ConditionerNet, cache, out_bar: np.ndarray):
    """Reverse sweep: returns (parameter gradients, input gradient)."""
    x, h1, h2 = cache
    grads = {
        "W3": out_bar.T @ h2,
        "b3": out_bar.sum(axis=0),
    }
    h2_bar = (out_bar @ net.W3) * (1.0 - h2 * h2)
    grads["W2"] = h2_bar.T @ h1
    grads["b2"] = h2_bar.sum(axis=0)
    h1_bar = (h2_bar @ net.W2) * (1.0 - h1 * h1)
    grads["W1"] = h1_bar.T @ x
    grads["b1"] = h1_bar.sum(axis=0)
    x_bar = h1_bar @ net.W1
    return grads, x_bar
