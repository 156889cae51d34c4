"""Bernstein-basis polynomials: evaluation, differentiation, basis conversion.

The central primitive is a polynomial written in the Bernstein basis of
degree n on an interval [a, b],

    B(x) = sum_k alpha_k * C(n, k) * t^k * (1 - t)^(n-k),   t = (x - a) / (b - a).

Evaluation goes through the de Casteljau recursion (repeated convex
combinations of the coefficients), which is the numerically stable path.
A non-negative direct-summation path over precomputed basis values is
exposed separately for batch-heavy callers; the two agree to ~1e-13.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

import numpy as np

MAX_DEGREE = 200

# Points within this absolute distance of a domain endpoint are treated as
# the endpoint itself; root finders legitimately return such values.
ENDPOINT_SNAP = 1e-12

_BINOM_CACHE: dict[int, np.ndarray] = {}


def binomial_row(n: int) -> np.ndarray:
    """C(n, 0..n) as floats via the multiplicative recurrence (no factorials)."""
    if n < 0:
        raise ValueError(f"degree must be non-negative, got {n}")
    row = _BINOM_CACHE.get(n)
    if row is None:
        row = np.empty(n + 1)
        row[0] = 1.0
        for k in range(1, n + 1):
            row[k] = row[k - 1] * (n - k + 1) / k
        row.flags.writeable = False
        _BINOM_CACHE[n] = row
    return row


@dataclass(frozen=True)
class Interval:
    """Closed interval [lo, hi] with lo < hi, both finite."""

    lo: float
    hi: float

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise ValueError(f"interval endpoints must be finite, got [{lo}, {hi}]")
        if not lo < hi:
            raise ValueError(f"interval requires lo < hi, got [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def to_unit(self, x):
        """Affine map sending [lo, hi] to [0, 1]."""
        return (np.asarray(x, dtype=float) - self.lo) / self.width

    def from_unit(self, t):
        return self.lo + self.width * np.asarray(t, dtype=float)


UNIT = Interval(0.0, 1.0)


def _check_coeffs(degree: int, coeffs: np.ndarray) -> np.ndarray:
    if degree < 0:
        raise ValueError(f"degree must be non-negative, got {degree}")
    if degree > MAX_DEGREE:
        raise ValueError(f"degree {degree} exceeds the cap of {MAX_DEGREE}")
    coeffs = np.array(coeffs, dtype=float)
    if coeffs.ndim != 1 or coeffs.shape[0] != degree + 1:
        raise ValueError(
            f"need {degree + 1} coefficients for degree {degree}, got shape {coeffs.shape}"
        )
    if not np.all(np.isfinite(coeffs)):
        raise ValueError("coefficients must be finite")
    coeffs.flags.writeable = False
    return coeffs


@dataclass(frozen=True)
class BernsteinPoly:
    """Polynomial in the Bernstein basis of `degree` on `domain`."""

    degree: int
    coeffs: np.ndarray
    domain: Interval = UNIT

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _check_coeffs(self.degree, self.coeffs))

    def __call__(self, x, outside: str = "raise"):
        """Evaluate by de Casteljau; scalar in, scalar out (arrays likewise).

        `outside` controls points beyond the domain: "raise" rejects them,
        "clamp" maps them to the nearest endpoint with a RuntimeWarning.
        """
        t = _unit_param(self.domain, x, outside)
        return decasteljau(self.coeffs, t)

    def derivative(self) -> "BernsteinPoly":
        return derivative(self)

    def to_dict(self) -> dict:
        return {
            "degree": self.degree,
            "domain": [self.domain.lo, self.domain.hi],
            "coeffs": self.coeffs.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BernsteinPoly":
        return cls(int(d["degree"]), np.asarray(d["coeffs"], dtype=float),
                   Interval(*d["domain"]))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, s: str) -> "BernsteinPoly":
        return cls.from_dict(json.loads(s))


@dataclass(frozen=True)
class PowerPoly:
    """Polynomial sum_k c_k x^k considered on `domain` (monomials in raw x)."""

    degree: int
    coeffs: np.ndarray
    domain: Interval = UNIT

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _check_coeffs(self.degree, self.coeffs))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for c in self.coeffs[::-1]:  # Horner
            out = out * x + c
        return out if out.ndim else float(out)


def _unit_param(domain: Interval, x, outside: str):
    """Map x into the unit parameter, snapping near-endpoint values exactly."""
    x = np.asarray(x, dtype=float)
    x = np.where(np.abs(x - domain.lo) <= ENDPOINT_SNAP, domain.lo, x)
    x = np.where(np.abs(x - domain.hi) <= ENDPOINT_SNAP, domain.hi, x)
    bad = (x < domain.lo) | (x > domain.hi)
    if np.any(bad):
        if outside == "clamp":
            import warnings

            warnings.warn("evaluation points clamped into the domain", RuntimeWarning)
            x = np.clip(x, domain.lo, domain.hi)
        else:
            offender = np.asarray(x)[bad].flat[0]
            raise ValueError(f"point {offender} outside domain [{domain.lo}, {domain.hi}]")
    return domain.to_unit(x)


def decasteljau(coeffs: np.ndarray, t):
    """de Casteljau evaluation at unit parameter t (t may be an array)."""
    t = np.asarray(t, dtype=float)
    scalar = t.ndim == 0
    beta = np.broadcast_to(coeffs.reshape(coeffs.shape + (1,) * t.ndim),
                           coeffs.shape + t.shape).copy()
    while beta.shape[0] > 1:
        beta = (1.0 - t) * beta[:-1] + t * beta[1:]
    out = beta[0]
    return float(out) if scalar else out


def decasteljau_rows(coeff_rows: np.ndarray, t: np.ndarray) -> np.ndarray:
    """de Casteljau for per-row coefficients: rows (N, n+1), t (N,) -> (N,)."""
    beta = np.array(coeff_rows, dtype=float)
    tc = t[:, None]
    while beta.shape[1] > 1:
        beta = (1.0 - tc) * beta[:, :-1] + tc * beta[:, 1:]
    return beta[:, 0]


def basis_at(n: int, k: int, x: float) -> float:
    """Single Bernstein basis value C(n,k) x^k (1-x)^(n-k) on the unit interval."""
    if not 0 <= k <= n:
        raise ValueError(f"basis index k={k} out of range for degree {n}")
    if n > MAX_DEGREE:
        raise ValueError(f"degree {n} exceeds the cap of {MAX_DEGREE}")
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x={x} outside [0, 1]")
    return float(binomial_row(n)[k] * x**k * (1.0 - x) ** (n - k))


def basis_matrix(n: int, t: np.ndarray) -> np.ndarray:
    """All basis values at unit parameters t: shape t.shape + (n+1,).

    Powers accumulate by cumulative products; intermediate underflow can only
    hit terms that are themselves below ~1e-240 for n <= 200.
    """
    t = np.asarray(t, dtype=float)
    shape = t.shape
    pw = np.ones(shape + (n + 1,))
    qw = np.ones(shape + (n + 1,))
    if n > 0:
        np.cumprod(np.broadcast_to(t[..., None], shape + (n,)), axis=-1,
                   out=pw[..., 1:])
        np.cumprod(np.broadcast_to((1.0 - t)[..., None], shape + (n,)), axis=-1,
                   out=qw[..., 1:])
        qw = qw[..., ::-1]
    return binomial_row(n) * pw * qw


def eval_basis_rows(coeff_rows: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Direct-summation evaluation: per-row coefficients against basis_matrix."""
    return np.sum(coeff_rows * basis_matrix(coeff_rows.shape[-1] - 1, t), axis=-1)


def derivative(p: BernsteinPoly) -> BernsteinPoly:
    """Exact derivative, one degree lower, on the same domain.

    Degree 0 yields the zero constant polynomial rather than an error.
    """
    if p.degree == 0:
        return BernsteinPoly(0, np.zeros(1), p.domain)
    coeffs = p.degree * np.diff(p.coeffs) / p.domain.width
    return BernsteinPoly(p.degree - 1, coeffs, p.domain)


def derivative_rows(coeff_rows: np.ndarray, width: float = 1.0) -> np.ndarray:
    """Derivative coefficients for per-row coefficient arrays."""
    n = coeff_rows.shape[-1] - 1
    return n * np.diff(coeff_rows, axis=-1) / width


def bernstein_operator(samples: np.ndarray, domain: Interval = UNIT) -> BernsteinPoly:
    """Polynomial whose k-th coefficient is the k-th sample.

    Feeding f(lo + width*k/n) for k = 0..n produces the degree-n Bernstein
    approximation of f on the domain; strictly increasing samples yield a
    strictly increasing polynomial.
    """
    samples = np.asarray(samples, dtype=float)
    return BernsteinPoly(len(samples) - 1, samples, domain)


def operator_nodes(n: int, domain: Interval = UNIT) -> np.ndarray:
    """The n+1 equispaced sampling points lo + width*k/n."""
    return domain.from_unit(np.arange(n + 1) / max(n, 1))


def from_power_basis(p: PowerPoly, target_degree: int | None = None) -> BernsteinPoly:
    """Exact conversion of a power-form polynomial to the Bernstein basis.

    On the unit domain t^j = sum_{k>=j} [C(k,j)/C(n,j)] b_{k,n}(t); general
    domains first rewrite the monomials in the unit parameter.
    """
    n = p.degree if target_degree is None else int(target_degree)
    if n < p.degree:
        raise ValueError(f"target degree {n} below polynomial degree {p.degree}")
    if n > MAX_DEGREE:
        raise ValueError(f"degree {n} exceeds the cap of {MAX_DEGREE}")
    a, w = p.domain.lo, p.domain.width
    # q: coefficients in the unit parameter, p(x) = sum_j q_j t^j, x = a + w t.
    q = np.zeros(n + 1)
    for j, c in enumerate(p.coeffs):
        if c == 0.0:
            continue
        i = np.arange(j + 1)
        q[: j + 1] += c * binomial_row(j) * a ** (j - i) * w**i
    binn = binomial_row(n)
    alphas = np.empty(n + 1)
    for k in range(n + 1):
        j = np.arange(min(k, n) + 1)
        alphas[k] = np.sum(q[j] * binomial_row(k) / binn[j])
    return BernsteinPoly(n, alphas, p.domain)


def to_power_basis(p: BernsteinPoly) -> PowerPoly:
    """Expand into monomials of raw x.

    The expansion alternates in sign; beyond degree ~30 the cancellation makes
    the result unreliable, which is inherent to the power form.
    """
    n = p.degree
    binn = binomial_row(n)
    # Unit-parameter power coefficients: q_j = C(n,j) sum_k (-1)^(j-k) C(j,k) alpha_k
    q = np.empty(n + 1)
    for j in range(n + 1):
        k = np.arange(j + 1)
        signs = np.where((j - k) % 2 == 0, 1.0, -1.0)
        q[j] = binn[j] * np.sum(signs * binomial_row(j) * p.coeffs[: j + 1])
    a, w = p.domain.lo, p.domain.width
    if a == 0.0 and w == 1.0:
        return PowerPoly(n, q, p.domain)
    # Substitute t = (x - a)/w and collect powers of x.
    c = np.zeros(n + 1)
    for i, qi in enumerate(q):
        if qi == 0.0:
            continue
        m = np.arange(i + 1)
        c[: i + 1] += qi / w**i * binomial_row(i) * (-a) ** (i - m)
    return PowerPoly(n, c, p.domain)


def elevate(p: BernsteinPoly, target_degree: int) -> BernsteinPoly:
    """Degree elevation: same polynomial, higher-degree coefficient vector."""
    if target_degree < p.degree:
        raise ValueError("cannot lower the degree by elevation")
    coeffs = p.coeffs
    for n in range(p.degree, target_degree):
        k = np.arange(n + 2)
        lo = np.concatenate(([0.0], coeffs))
        hi = np.concatenate((coeffs, [0.0]))
        coeffs = (k * lo + (n + 1 - k) * hi) / (n + 1)
    return BernsteinPoly(target_degree, coeffs, p.domain)


def with_coeffs(p: BernsteinPoly, coeffs: np.ndarray) -> BernsteinPoly:
    return replace(p, coeffs=coeffs)
