"""Inversion of strictly increasing Bernstein-form polynomials.

Solving B(z) = x is the same as finding the unique root of
sum_k (alpha_k - x) b_{k,n}(z), which exists in the bracket exactly when
(alpha_0 - x)(alpha_n - x) < 0.  The solver is a safeguarded Newton iteration
inside a shrinking sign-change bracket with bisection fallback, so
termination is guaranteed; convergence is declared on the residual
|B(z) - x| <= tol_f measured by the same evaluation the caller would use.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bernstein import BernsteinPoly, basis_matrix, decasteljau

NEWTON_BISECTION = "newton_bisection"
BISECTION_ONLY = "bisection_only"

UNIQUE_INTERIOR = "unique_interior"
AT_LOWER_END = "at_lower_end"
AT_UPPER_END = "at_upper_end"
OUT_OF_RANGE = "out_of_range"

_DERIV_FLOOR = 1e-14


class RootFindError(RuntimeError):
    """Solver failed to reach the requested residual tolerance."""


class OutOfRangeError(ValueError):
    """Target value lies outside [alpha_0, alpha_n]."""


@dataclass(frozen=True)
class RootConfig:
    """Tolerances for inversion.

    tol_x is measured in the unit parameter and sets the agreement scale
    between methods; tol_f (absolute, defaulting to 1e-13 * (alpha_n -
    alpha_0)) is the termination criterion.
    """

    tol_x: float = 1e-12
    tol_f: float | None = None
    max_iter: int = 100
    method: str = NEWTON_BISECTION

    def __post_init__(self):
        if self.tol_x <= 0 or (self.tol_f is not None and self.tol_f <= 0):
            raise ValueError("tolerances must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.method not in (NEWTON_BISECTION, BISECTION_ONLY):
            raise ValueError(f"unknown method {self.method!r}")


DEFAULT_CONFIG = RootConfig()


@dataclass(frozen=True)
class InversionResult:
    z: float
    iterations: int
    residual: float


def _resolved_tol_f(cfg: RootConfig, coeff_range: float) -> float:
    return cfg.tol_f if cfg.tol_f is not None else 1e-13 * coeff_range


def _require_increasing(coeffs: np.ndarray):
    if np.any(np.diff(coeffs) <= 0):
        raise ValueError("coefficients must be strictly increasing")


def root_bracket_check(p: BernsteinPoly, x: float, cfg: RootConfig = DEFAULT_CONFIG) -> str:
    """Locate x against the polynomial's range [alpha_0, alpha_n]."""
    _require_increasing(p.coeffs)
    a0, an = float(p.coeffs[0]), float(p.coeffs[-1])
    tol_f = _resolved_tol_f(cfg, an - a0)
    if abs(x - a0) <= tol_f:
        return AT_LOWER_END
    if abs(x - an) <= tol_f:
        return AT_UPPER_END
    if (a0 - x) * (an - x) < 0:
        return UNIQUE_INTERIOR
    return OUT_OF_RANGE


def invert_monotone_info(p: BernsteinPoly, x: float,
                         cfg: RootConfig = DEFAULT_CONFIG) -> InversionResult:
    """Solve B(z) = x, returning the point plus iteration diagnostics."""
    status = root_bracket_check(p, x, cfg)
    a0, an = float(p.coeffs[0]), float(p.coeffs[-1])
    tol_f = _resolved_tol_f(cfg, an - a0)
    if status == AT_LOWER_END:
        return InversionResult(p.domain.lo, 0, abs(x - a0))
    if status == AT_UPPER_END:
        return InversionResult(p.domain.hi, 0, abs(x - an))
    if status == OUT_OF_RANGE:
        raise OutOfRangeError(f"target {x} outside range [{a0}, {an}]")

    dom = p.domain
    n = p.degree
    dcoeffs = n * np.diff(p.coeffs)  # unit-parameter derivative coefficients
    use_newton = cfg.method == NEWTON_BISECTION
    tlo, thi = 0.0, 1.0
    t = min(max((x - a0) / (an - a0), 0.0), 1.0)  # secant through the endpoints
    for it in range(1, cfg.max_iter + 1):
        # Evaluate at the representable point the caller would get back.
        z = float(dom.from_unit(t))
        teff = float(dom.to_unit(z))
        f = decasteljau(p.coeffs, teff) - x
        if abs(f) <= tol_f:
            return InversionResult(z, it, abs(f))
        if f < 0:
            tlo = max(tlo, teff)
        else:
            thi = min(thi, teff)
        tnew = None
        if use_newton:
            fp = decasteljau(dcoeffs, teff)
            if abs(fp) >= _DERIV_FLOOR:
                cand = teff - f / fp
                if tlo < cand < thi:
                    tnew = cand
        if tnew is None:
            tnew = 0.5 * (tlo + thi)
        if tnew == t:
            tnew = 0.5 * (tlo + thi)
            if tnew == t:
                break  # bracket exhausted at float resolution
        t = tnew
    raise RootFindError(
        f"no z with |B(z) - x| <= {tol_f:.3e} within {cfg.max_iter} iterations "
        f"(target {x}); tolerances may be misconfigured"
    )


def invert_monotone(p: BernsteinPoly, x: float, cfg: RootConfig = DEFAULT_CONFIG) -> float:
    return invert_monotone_info(p, x, cfg).z


def invert_unit_rows(alphas: np.ndarray, u: np.ndarray, tol_f=None,
                     max_iter: int = 100, method: str = NEWTON_BISECTION):
    """Batched inversion on the unit domain with per-row coefficients.

    alphas: (N, n+1) or (1, n+1) strictly increasing rows; u: (N,) targets in
    [alpha_0, alpha_n] per row.  Returns (z, iterations) with z in [0, 1].
    Evaluation uses the non-negative basis-matrix path, which keeps the cost
    linear in the degree per Newton step.
    """
    alphas = np.asarray(alphas, dtype=float)
    u = np.asarray(u, dtype=float)
    n = alphas.shape[-1] - 1
    a0 = alphas[..., 0]
    an = alphas[..., -1]
    rng = an - a0
    tol = np.broadcast_to(1e-13 * rng if tol_f is None else np.asarray(tol_f), u.shape)

    lo_hit = np.abs(u - a0) <= tol
    hi_hit = np.abs(u - an) <= tol
    bad = ~lo_hit & ~hi_hit & ((a0 - u) * (an - u) >= 0)
    if np.any(bad):
        idx = int(np.flatnonzero(bad)[0])
        raise OutOfRangeError(f"target {u[bad].flat[0]} out of range at row {idx}")

    z = np.clip((u - a0) / rng, 0.0, 1.0)
    z = np.where(lo_hit, 0.0, np.where(hi_hit, 1.0, z))
    active = ~(lo_hit | hi_hit)
    if not np.any(active):
        return z + 0.0, np.zeros(u.shape, dtype=int)

    dalphas = n * np.diff(alphas, axis=-1)
    zlo = np.zeros(u.shape)
    zhi = np.ones(u.shape)
    iters = np.zeros(u.shape, dtype=int)
    newton = method == NEWTON_BISECTION
    for _ in range(max_iter):
        f = np.sum(alphas * basis_matrix(n, z), axis=-1) - u
        iters += active
        hit = np.abs(f) <= tol
        active &= ~hit
        if not np.any(active):
            return z, iters
        neg = f < 0
        zlo = np.where(active & neg, z, zlo)
        zhi = np.where(active & ~neg, z, zhi)
        mid = 0.5 * (zlo + zhi)
        if newton and n >= 1:
            fp = np.sum(dalphas * basis_matrix(n - 1, z), axis=-1)
            safe = np.abs(fp) >= _DERIV_FLOOR
            cand = z - f / np.where(safe, fp, 1.0)
            ok = safe & (cand > zlo) & (cand < zhi)
            step = np.where(ok, cand, mid)
        else:
            step = mid
        z = np.where(active, step, z)
    stuck = int(np.flatnonzero(active)[0])
    raise RootFindError(
        f"{int(active.sum())} rows unconverged after {max_iter} iterations "
        f"(first at index {stuck}); tolerances may be misconfigured"
    )
