"""Unconstrained parameters -> strictly increasing coefficient vectors.

Both schemes map a free vector v of length n-1 to coefficients
alpha_0 < alpha_1 < ... < alpha_n with the endpoints pinned exactly to the
requested range [c, d]:

* "cumulative_positive" (default): gap_k = softplus(v_k) for k = 1..n-1 plus
  a synthetic final gap softplus(0), normalized to sum to d - c.  A zero raw
  vector therefore gives equally spaced coefficients.  softplus is not
  scale-equivariant, so adding a constant to all raw values does change the
  output; the shift-invariance property is deliberately not claimed.
* "reciprocal_square": alpha_{n-k} = c + (d-c) / (1 + v_1^2 + ... + v_k^2)
  for k = 1..n-1 with alpha_0 = c and alpha_n = d pinned directly.  The raw
  formula admits ties (any v_k = 0), so the same gap floor is applied.

Either way the normalized gaps are blended with the uniform gap vector at
weight n * GAP_FLOOR_FACTOR, guaranteeing every gap >= eps_mono where
eps_mono = GAP_FLOOR_FACTOR * (d - c).  Strictness then survives floating
point, which the downstream log-derivative terms require.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bernstein import Interval

GAP_FLOOR_FACTOR = 1e-6

CUMULATIVE = "cumulative_positive"
RECIPROCAL = "reciprocal_square"
SCHEMES = (CUMULATIVE, RECIPROCAL)


@dataclass(frozen=True)
class MonotoneParams:
    """Free parameters of length n-1 targeting the coefficient range."""

    raw: np.ndarray
    range: Interval = Interval(0.0, 1.0)
    scheme: str = CUMULATIVE

    def __post_init__(self):
        raw = np.array(self.raw, dtype=float)
        if raw.ndim != 1:
            raise ValueError("raw parameters must be a 1-D vector")
        if not np.all(np.isfinite(raw)):
            raise ValueError("raw parameters must be finite")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        raw.flags.writeable = False
        object.__setattr__(self, "raw", raw)


def softplus(v):
    return np.logaddexp(0.0, v)


def sigmoid(v):
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(v, dtype=float)))


def eps_mono(lo: float, hi: float) -> float:
    """Minimum admissible coefficient gap for the range [lo, hi]."""
    return GAP_FLOOR_FACTOR * (hi - lo)


def _blend_weights(w: np.ndarray) -> np.ndarray:
    """Mix normalized gaps with the uniform vector so each >= GAP_FLOOR_FACTOR."""
    n = w.shape[-1]
    kappa = n * GAP_FLOOR_FACTOR
    return (1.0 - kappa) * w + kappa / n


def _check_raw(raw: np.ndarray, n: int):
    if n < 1:
        raise ValueError(f"degree must be at least 1, got {n}")
    if raw.shape[-1] != n - 1:
        raise ValueError(f"need {n - 1} raw parameters for degree {n}, got {raw.shape[-1]}")
    if not np.all(np.isfinite(raw)):
        raise ValueError("raw parameters must be finite")


def coefficient_rows(raw: np.ndarray, n: int, rng: Interval, scheme: str = CUMULATIVE
                     ) -> np.ndarray:
    """Vectorized map: raw rows (..., n-1) -> coefficient rows (..., n+1)."""
    raw = np.asarray(raw, dtype=float)
    _check_raw(raw, n)
    c, d = rng.lo, rng.hi
    shape = raw.shape[:-1]
    if scheme == CUMULATIVE:
        gaps = np.concatenate(
            [softplus(raw), np.full(shape + (1,), softplus(0.0))], axis=-1)
        w = gaps / np.sum(gaps, axis=-1, keepdims=True)
    elif scheme == RECIPROCAL:
        q = np.cumsum(raw * raw, axis=-1)
        interior = c + (d - c) / (1.0 + q[..., ::-1])
        tilde = np.concatenate(
            [np.full(shape + (1,), c), interior, np.full(shape + (1,), d)], axis=-1)
        w = np.diff(tilde, axis=-1) / (d - c)
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    w = _blend_weights(w)
    alphas = np.empty(shape + (n + 1,))
    alphas[..., 0] = c
    alphas[..., 1:] = c + (d - c) * np.cumsum(w, axis=-1)
    alphas[..., -1] = d  # exact endpoint despite cumsum rounding
    return alphas


def to_coefficients(p: MonotoneParams, n: int) -> np.ndarray:
    """Strictly increasing coefficients alpha_0..alpha_n with pinned endpoints."""
    return coefficient_rows(p.raw, n, p.range, p.scheme)


def check_strictly_increasing(alphas) -> bool:
    """True iff consecutive gaps all reach the eps_mono floor for the range."""
    a = np.asarray(alphas, dtype=float)
    if a.shape[-1] < 2 or not np.all(np.isfinite(a)):
        return False
    span = a[..., -1] - a[..., 0]
    if np.any(span <= 0.0):
        return False
    floor = GAP_FLOOR_FACTOR * span * (1.0 - 1e-9)
    return bool(np.all(np.diff(a, axis=-1) >= np.asarray(floor)[..., None]))


def parameterization_jacobian(p: MonotoneParams, n: int) -> np.ndarray:
    """Dense (n+1, n-1) sensitivity d alpha_k / d v_j; endpoint rows are zero."""
    raw = np.asarray(p.raw, dtype=float)
    _check_raw(raw, n)
    c, d = p.range.lo, p.range.hi
    kappa = n * GAP_FLOOR_FACTOR
    J = np.zeros((n + 1, max(n - 1, 0)))
    if n == 1:
        return J
    if p.scheme == CUMULATIVE:
        gaps = np.concatenate([softplus(raw), [softplus(0.0)]])
        S = gaps.sum()
        s = np.concatenate([[0.0], np.cumsum(gaps)])  # s_0..s_n
        dgap = sigmoid(raw)  # d softplus / dv
        k = np.arange(n + 1)[:, None]
        j = np.arange(1, n)[None, :]
        ind = (j <= k).astype(float)
        J = (d - c) * (1.0 - kappa) * (ind - (s[:, None] / S)) / S * dgap[None, :]
    else:
        q = np.cumsum(raw * raw)
        r = 1.0 / (1.0 + q)  # r_k for k = 1..n-1
        # tilde alpha_{n-k} = c + (d-c) r_k; alpha = (1-kappa)*tilde + linear part
        for j in range(1, n):
            dr = -2.0 * raw[j - 1] * r**2  # d r_k / d v_j for k >= j, else 0
            for k in range(j, n):
                J[n - k, j - 1] = (1.0 - kappa) * (d - c) * dr[k - 1]
    J[0, :] = 0.0
    J[n, :] = 0.0
    return J


def coefficient_vjp_rows(raw: np.ndarray, n: int, rng: Interval, scheme: str,
                         alpha_bar: np.ndarray) -> np.ndarray:
    """Vector-Jacobian product: rows (..., n+1) adjoints -> (..., n-1) raw adjoints."""
    raw = np.asarray(raw, dtype=float)
    _check_raw(raw, n)
    c, d = rng.lo, rng.hi
    kappa = n * GAP_FLOOR_FACTOR
    if n == 1:
        return np.zeros(raw.shape)
    if scheme == CUMULATIVE:
        gaps = np.concatenate(
            [softplus(raw), np.full(raw.shape[:-1] + (1,), softplus(0.0))], axis=-1)
        S = np.sum(gaps, axis=-1, keepdims=True)
        s = np.cumsum(gaps, axis=-1)  # s_1..s_n
        # T1_j = sum_{k>=j} abar_k over k = 1..n; T2 = sum_k abar_k s_k / S
        abar_tail = alpha_bar[..., 1:]  # k = 1..n
        T1 = np.cumsum(abar_tail[..., ::-1], axis=-1)[..., ::-1]
        T2 = np.sum(abar_tail * s / S, axis=-1, keepdims=True)
        gbar = (d - c) * (1.0 - kappa) * (T1 - T2) / S
        return gbar[..., : n - 1] * sigmoid(raw)
    q = np.cumsum(raw * raw, axis=-1)
    r2 = (1.0 / (1.0 + q)) ** 2  # k = 1..n-1
    # alpha_{n-k} adjoints weight dr_k for every j <= k
    abar_rev = alpha_bar[..., 1:n][..., ::-1]  # index k = 1..n-1
    tail = np.cumsum((abar_rev * r2)[..., ::-1], axis=-1)[..., ::-1]
    return -2.0 * raw * (1.0 - kappa) * (d - c) * tail
