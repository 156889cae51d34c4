"""Condition numbers of polynomial values and roots in two bases.

For p(x) = sum_k c_k phi_k(x), relative coefficient perturbations of size
eps move the value by at most eps * C_phi(p(x)) with

    C_phi(p(x)) = sum_k |c_k phi_k(x)|,

and move an m-fold root x0 by roughly eps^(1/m) times

    Croot_phi(x0) = (m! / |p^(m)(x0)| * sum_k |c_k phi_k(x0)|)^(1/m).

The Bernstein basis minimizes both against the power basis on [a, b] with
0 <= a < b, which is the stability property the whole package leans on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .bernstein import (
    BernsteinPoly,
    Interval,
    PowerPoly,
    basis_matrix,
    derivative,
)

BERNSTEIN = "bernstein"
POWER = "power"

DERIVATIVE_TOL = 1e-12


class MultiplicityMismatchError(ValueError):
    """The m-th derivative vanishes at the claimed m-fold root."""


@dataclass(frozen=True)
class ConditionReport:
    """Value/root condition numbers of one polynomial at one point."""

    eval_point: float
    value_cond_bernstein: float
    value_cond_power: float
    root_cond_bernstein: float | None = None
    root_cond_power: float | None = None
    root_multiplicity: int = 1


def _as_arrays(coeffs, x):
    coeffs = np.asarray(coeffs, dtype=float)
    x = np.asarray(x, dtype=float)
    return coeffs, x


def _abs_terms(basis: str, coeffs: np.ndarray, domain: Interval, x: np.ndarray,
               weights: np.ndarray | None = None) -> np.ndarray:
    """sum_k w_k |phi_k(x)| with w_k defaulting to |c_k|; shape of x."""
    n = coeffs.shape[0] - 1
    w = np.abs(coeffs) if weights is None else weights
    if basis == BERNSTEIN:
        t = domain.to_unit(x)
        return np.sum(w * basis_matrix(n, t), axis=-1)
    if basis == POWER:
        k = np.arange(n + 1)
        return np.sum(w * np.abs(x[..., None]) ** k, axis=-1)
    raise ValueError(f"unknown basis {basis!r}")


def _check_in_domain(domain: Interval, x: np.ndarray):
    if np.any(x < domain.lo - 1e-12) or np.any(x > domain.hi + 1e-12):
        raise ValueError(f"point outside domain [{domain.lo}, {domain.hi}]")


def value_condition_number(basis: str, coeffs, domain: Interval, x):
    """C_phi(p(x)) = sum_k |c_k phi_k(x)|; x may be an array."""
    coeffs, x = _as_arrays(coeffs, x)
    _check_in_domain(domain, x)
    out = _abs_terms(basis, coeffs, domain, x)
    return float(out) if out.ndim == 0 else out


def perturbation_bound(basis: str, coeffs, domain: Interval, x, epsilon: float):
    """Valid bound on |delta p(x)| under perturb_coefficients with this epsilon.

    Coefficient magnitudes are floored at epsilon so the bound also covers the
    additive perturbation applied to exactly-zero coefficients.
    """
    coeffs, x = _as_arrays(coeffs, x)
    _check_in_domain(domain, x)
    floored = np.maximum(np.abs(coeffs), epsilon)
    return epsilon * _abs_terms(basis, coeffs, domain, x, weights=floored)


def _mth_derivative(basis: str, coeffs: np.ndarray, domain: Interval,
                    x0: float, m: int) -> float:
    if basis == BERNSTEIN:
        p = BernsteinPoly(coeffs.shape[0] - 1, coeffs, domain)
        for _ in range(m):
            p = derivative(p)
        return float(p(x0))
    n = coeffs.shape[0] - 1
    if m > n:
        return 0.0
    k = np.arange(m, n + 1)
    fall = np.ones_like(k, dtype=float)
    for i in range(m):
        fall *= k - i
    return float(np.sum(coeffs[m:] * fall * x0 ** (k - m)))


def root_condition_number(basis: str, coeffs, domain: Interval, x0: float,
                          multiplicity: int = 1) -> float:
    """Root condition number for an m-fold root x0 of the polynomial."""
    if multiplicity < 1:
        raise ValueError("multiplicity must be a positive integer")
    coeffs, x0a = _as_arrays(coeffs, np.asarray(float(x0)))
    _check_in_domain(domain, x0a)
    pm = _mth_derivative(basis, coeffs, domain, float(x0), multiplicity)
    if abs(pm) <= DERIVATIVE_TOL:
        raise MultiplicityMismatchError(
            f"|p^({multiplicity})({x0})| = {abs(pm):.3e} vanishes; "
            "root multiplicity does not match"
        )
    s = _abs_terms(basis, coeffs, domain, x0a)
    return float((math.factorial(multiplicity) / abs(pm) * s) ** (1.0 / multiplicity))


def perturb_coefficients(poly, epsilon: float, seed):
    """Relative coefficient noise c_k -> c_k (1 + u_k), u_k ~ U(-eps, eps).

    Exactly-zero coefficients get additive noise eps * u_k instead, keeping
    the perturbation-bound inequality applicable with epsilon-floored weights.
    Accepts a seed or a numpy Generator; returns the same polynomial type.
    """
    if epsilon < 0:
        raise ValueError(f"epsilon must be non-negative, got {epsilon}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    c = np.asarray(poly.coeffs, dtype=float)
    u = rng.uniform(-epsilon, epsilon, size=c.shape)
    perturbed = np.where(c != 0.0, c * (1.0 + u), epsilon * u)
    return replace(poly, coeffs=perturbed)


def condition_report(bern: BernsteinPoly, power: PowerPoly, x: float,
                     root: float | None = None, multiplicity: int = 1) -> ConditionReport:
    """Bundle value (and optional root) condition numbers for both forms."""
    vb = value_condition_number(BERNSTEIN, bern.coeffs, bern.domain, x)
    vp = value_condition_number(POWER, power.coeffs, power.domain, x)
    rb = rp = None
    if root is not None:
        rb = root_condition_number(BERNSTEIN, bern.coeffs, bern.domain, root, multiplicity)
        rp = root_condition_number(POWER, power.coeffs, power.domain, root, multiplicity)
    return ConditionReport(float(x), vb, vp, rb, rp, multiplicity)
