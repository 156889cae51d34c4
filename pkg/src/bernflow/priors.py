"""Base densities on the unit cube: Kumaraswamy, uniform, squashed normal.

All three are supported on [0, 1] per dimension and i.i.d. across
dimensions.  Log densities return -inf on and outside the cube boundary by
convention rather than raising.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

KUMARASWAMY = "kumaraswamy"
UNIFORM = "uniform"
SQUASHED_NORMAL = "squashed_normal"
PRIOR_KINDS = (KUMARASWAMY, UNIFORM, SQUASHED_NORMAL)

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class PriorSpec:
    kind: str = KUMARASWAMY
    a: float = 2.0
    b: float = 5.0
    dimension: int = 1

    def __post_init__(self):
        if self.kind not in PRIOR_KINDS:
            raise ValueError(f"unknown prior kind {self.kind!r}")
        if self.kind == KUMARASWAMY and (self.a <= 0 or self.b <= 0):
            raise ValueError("Kumaraswamy parameters must be positive")
        if self.dimension < 1:
            raise ValueError("dimension must be a positive integer")

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "dimension": self.dimension}
        if self.kind == KUMARASWAMY:
            d.update(a=self.a, b=self.b)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "PriorSpec":
        return cls(d["kind"], float(d.get("a", 2.0)), float(d.get("b", 5.0)),
                   int(d["dimension"]))


def kumaraswamy_cdf(a: float, b: float, x):
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    return -np.expm1(b * np.log1p(-(x**a)))


def kumaraswamy_icdf(a: float, b: float, u):
    u = np.asarray(u, dtype=float)
    return (-np.expm1(np.log1p(-u) / b)) ** (1.0 / a)


def prior_sample(spec: PriorSpec, count: int, rng) -> np.ndarray:
    """(count, dimension) array of samples; rng is a Generator or a seed."""
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    shape = (count, spec.dimension)
    if spec.kind == UNIFORM:
        return rng.random(shape)
    if spec.kind == KUMARASWAMY:
        return kumaraswamy_icdf(spec.a, spec.b, rng.random(shape))
    return 0.5 * (1.0 + np.tanh(rng.standard_normal(shape)))


def _per_dim_log_density(spec: PriorSpec, z: np.ndarray) -> np.ndarray:
    interior = (z > 0.0) & (z < 1.0)
    zs = np.where(interior, z, 0.5)  # dummy value where we will write -inf
    if spec.kind == UNIFORM:
        out = np.zeros_like(zs)
    elif spec.kind == KUMARASWAMY:
        a, b = spec.a, spec.b
        out = (math.log(a * b) + (a - 1.0) * np.log(zs)
               + (b - 1.0) * np.log1p(-(zs**a)))
    else:
        w = 0.5 * (np.log(zs) - np.log1p(-zs))  # atanh(2z - 1)
        out = (-0.5 * w * w - 0.5 * _LOG_2PI
               - np.log(2.0 * zs * (1.0 - zs)))
    return np.where(interior, out, -np.inf)


def prior_log_density(spec: PriorSpec, z):
    """Sum of per-dimension log densities; -inf on or outside the boundary."""
    z = np.asarray(z, dtype=float)
    scalar = z.ndim == 1
    out = np.sum(_per_dim_log_density(spec, z), axis=-1)
    return float(out) if scalar else out


def prior_log_density_grad(spec: PriorSpec, z: np.ndarray) -> np.ndarray:
    """d log p / d z per coordinate (points assumed strictly interior)."""
    z = np.asarray(z, dtype=float)
    if spec.kind == UNIFORM:
        return np.zeros_like(z)
    if spec.kind == KUMARASWAMY:
        a, b = spec.a, spec.b
        za = z**a
        return (a - 1.0) / z - (b - 1.0) * a * za / (z * (1.0 - za))
    w = 0.5 * (np.log(z) - np.log1p(-z))
    return -w / (2.0 * z * (1.0 - z)) - 1.0 / z + 1.0 / (1.0 - z)
