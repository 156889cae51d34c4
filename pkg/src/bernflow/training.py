"""Maximum-likelihood training with exact analytic gradients.

The negative log likelihood of a batch is assembled from the inverse pass,

    NLL = mean_i [ -log p_prior(z_i) + sum_{layer, j} log B'(z_j)
                   + log |J_h| at the data point ],

and its gradient is computed by a hand-written reverse sweep over that
computation.  Root finding is differentiated through the implicit relation
B(z; alpha) = u, which gives dz/dalpha_k = -b_k(z) / B'(z) and
dz/du = 1 / B'(z) at the recovered root; conditioner networks replay their
cached activations; the monotone parameterization contributes its exact
vector-Jacobian product.  No autodiff framework is involved.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bernstein import basis_matrix
from .flow import (
    FlowModel,
    UNIT_RANGE,
    diffeo_inverse,
    diffeo_logjac,
    dim_coefficient_rows,
    log_density,
)
from .monotone import coefficient_vjp_rows
from .nets import conditioner_backward
from .priors import prior_log_density, prior_log_density_grad
from .rootfind import invert_unit_rows


class TrainingAbortError(RuntimeError):
    """Raised after three consecutive non-finite loss evaluations."""


@dataclass(frozen=True)
class TrainConfig:
    lr0: float = 0.01
    decay_factor: float = 0.9
    decay_every: int = 50
    beta1: float = 0.9
    beta2: float = 0.999
    eps_adam: float = 1e-8
    batch_size: int = 512
    max_iters: int = 2000
    seed: int = 0
    grad_clip: float | None = None

    def __post_init__(self):
        if self.lr0 <= 0:
            raise ValueError("lr0 must be positive")
        if not 0 < self.decay_factor <= 1:
            raise ValueError("decay_factor must lie in (0, 1]")
        if not (0 < self.beta1 < 1 and 0 < self.beta2 < 1):
            raise ValueError("Adam betas must lie in (0, 1)")
        if self.decay_every < 1 or self.batch_size < 1 or self.max_iters < 0:
            raise ValueError("decay_every, batch_size, max_iters must be positive")


@dataclass
class TrainHistory:
    nll: list = field(default_factory=list)
    grad_norm: list = field(default_factory=list)
    lr: list = field(default_factory=list)
    nonfinite: list = field(default_factory=list)
    final_nll: float | None = None

    def __len__(self):
        return len(self.nll)

    def to_csv(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("iteration,nll,grad_norm,lr,nonfinite\n")
            for i in range(len(self.nll)):
                fh.write(f"{i},{self.nll[i]!r},{self.grad_norm[i]!r},"
                         f"{self.lr[i]!r},{int(self.nonfinite[i])}\n")


def learning_rate(cfg: TrainConfig, iteration: int) -> float:
    return cfg.lr0 * cfg.decay_factor ** (iteration // cfg.decay_every)


def batch_nll(model: FlowModel, batch: np.ndarray) -> float:
    """Plain NLL in data units (no gradients)."""
    return float(-np.mean(log_density(model, np.atleast_2d(batch))))


def _second_deriv_rows(alphas: np.ndarray, t: np.ndarray) -> np.ndarray:
    n = alphas.shape[-1] - 1
    if n < 2:
        return np.zeros(t.shape)
    dd = n * (n - 1) * np.diff(alphas, n=2, axis=-1)
    return np.sum(dd * basis_matrix(n - 2, t), axis=-1)


def nll_and_gradients(model: FlowModel, batch: np.ndarray):
    """(scalar NLL, gradient dict keyed like model.parameters()).

    The batch is given in data units; gradients cover every free coupling
    parameter and all conditioner weights, including the dependence of
    later-dimension conditioners on earlier recovered latents.
    """
    x = np.atleast_2d(np.asarray(batch, dtype=float))
    N, d = x.shape
    if d != model.dimension:
        raise ValueError(f"batch dimension {d} does not match model {model.dimension}")
    M = len(model.layers)
    flip = model.reverse_between_layers

    y = diffeo_inverse(model.diffeo, x)
    jac_term = float(np.mean(diffeo_logjac(model.diffeo, y)))
    nll = jac_term

    # Inverse pass, caching everything the reverse sweep replays.
    caches: list[list[dict]] = [None] * M
    zs: list[np.ndarray] = [None] * M
    u = y
    for i in range(M - 1, -1, -1):
        layer = model.layers[i]
        n = layer.degree
        z = np.empty((N, d))
        dims = []
        for j in range(d):
            alphas, raw, netcache = dim_coefficient_rows(layer, j, z[:, :j], N)
            z[:, j], _ = invert_unit_rows(alphas, u[:, j])
            bn = basis_matrix(n, z[:, j])
            bnm1 = basis_matrix(n - 1, z[:, j]) if n >= 1 else None
            dalphas = n * np.diff(alphas, axis=-1)
            bprime = np.sum(dalphas * bnm1, axis=-1)
            bsecond = _second_deriv_rows(alphas, z[:, j])
            nll += float(np.mean(np.log(bprime)))
            dims.append(dict(alphas=alphas, raw=raw, netcache=netcache,
                             bn=bn, bnm1=bnm1, bprime=bprime, bsecond=bsecond))
        caches[i] = dims
        zs[i] = z
        u = z[:, ::-1] if (flip and i > 0) else z

    z0 = zs[0] if M > 0 else u
    nll -= float(np.mean(prior_log_density(model.prior, z0)))

    grads = {name: np.zeros_like(arr) for name, arr in model.parameters()}
    if not np.isfinite(nll):
        return nll, grads

    # Reverse sweep in ascending layer order (reverse of computation order).
    zbar = -prior_log_density_grad(model.prior, z0)
    for i in range(M):
        layer = model.layers[i]
        n = layer.degree
        dims = caches[i]
        for j in range(d):
            c = dims[j]
            zbar[:, j] += c["bsecond"] / c["bprime"]
        ubar = np.empty((N, d))
        for j in range(d - 1, -1, -1):
            c = dims[j]
            bprime = c["bprime"][:, None]
            # d log B' / d alpha_k = n (b_{k-1,n-1} - b_{k,n-1}) / B'
            D = np.zeros((N, n + 1))
            if n >= 1:
                D[:, 1:] += n * c["bnm1"]
                D[:, :-1] -= n * c["bnm1"]
            abar = D / bprime - zbar[:, j, None] * c["bn"] / bprime
            rbar = coefficient_vjp_rows(c["raw"], n, UNIT_RANGE, layer.scheme, abar)
            if j == 0:
                grads[f"layer{i}.dim0.free"] += rbar.sum(axis=0) / N
            else:
                netgrads, inbar = conditioner_backward(layer.nets[j], c["netcache"], rbar)
                for pname, g in netgrads.items():
                    grads[f"layer{i}.dim{j}.{pname}"] += g / N
                zbar[:, :j] += inbar
            ubar[:, j] = zbar[:, j] / c["bprime"]
        zbar = ubar[:, ::-1] if (flip and i < M - 1) else ubar

    return nll, grads


def grad_global_norm(grads: dict) -> float:
    return float(np.sqrt(sum(float(np.sum(g * g)) for g in grads.values())))


@dataclass
class AdamState:
    m: dict
    v: dict

    @classmethod
    def for_model(cls, model: FlowModel) -> "AdamState":
        return cls(m={name: np.zeros_like(a) for name, a in model.parameters()},
                   v={name: np.zeros_like(a) for name, a in model.parameters()})


def adam_step(params, grads: dict, state: AdamState, iteration: int,
              cfg: TrainConfig) -> None:
    """Bias-corrected Adam update, in place, at the scheduled learning rate."""
    lr = learning_rate(cfg, iteration)
    t = iteration + 1
    for name, arr in params:
        g = grads[name]
        if g.shape != arr.shape:
            raise ValueError(f"gradient shape mismatch for {name}")
        m = state.m[name]
        v = state.v[name]
        m *= cfg.beta1
        m += (1 - cfg.beta1) * g
        v *= cfg.beta2
        v += (1 - cfg.beta2) * g * g
        mhat = m / (1 - cfg.beta1**t)
        vhat = v / (1 - cfg.beta2**t)
        arr -= lr * mhat / (np.sqrt(vhat) + cfg.eps_adam)


def train(model: FlowModel, dataset, cfg: TrainConfig):
    """Run cfg.max_iters Adam iterations over shuffled mini-batches.

    `dataset` is anything with a `points` (N, d) array in the model box, or a
    bare array in data units.  Deterministic given cfg.seed; aborts after
    three consecutive non-finite losses rather than continuing silently.
    """
    points = np.asarray(getattr(dataset, "points", dataset), dtype=float)
    if points.ndim != 2:
        raise ValueError("training data must be an (N, d) array")
    rng = np.random.default_rng(cfg.seed)
    params = model.parameters()
    state = AdamState.for_model(model)
    history = TrainHistory()
    order = rng.permutation(len(points))
    pos = 0
    bad_streak = 0
    for it in range(cfg.max_iters):
        if pos >= len(order):
            order = rng.permutation(len(points))
            pos = 0
        idx = order[pos: pos + cfg.batch_size]  # last partial batch kept
        pos += cfg.batch_size
        nll, grads = nll_and_gradients(model, points[idx])
        finite = np.isfinite(nll) and all(np.all(np.isfinite(g)) for g in grads.values())
        lr = learning_rate(cfg, it)
        if not finite:
            bad_streak += 1
            history.nll.append(float(nll))
            history.grad_norm.append(float("nan"))
            history.lr.append(lr)
            history.nonfinite.append(True)
            if bad_streak >= 3:
                raise TrainingAbortError(
                    f"non-finite NLL for {bad_streak} consecutive iterations "
                    f"(last at iteration {it})")
            continue
        bad_streak = 0
        if cfg.grad_clip is not None:
            norm = grad_global_norm(grads)
            if norm > cfg.grad_clip:
                scale = cfg.grad_clip / norm
                grads = {k: g * scale for k, g in grads.items()}
        adam_step(params, grads, state, it, cfg)
        history.nll.append(float(nll))
        history.grad_norm.append(grad_global_norm(grads))
        history.lr.append(lr)
        history.nonfinite.append(False)
    history.final_nll = batch_nll(model, points)
    return model, history


@dataclass(frozen=True)
class AuditResult:
    max_rel_error: float
    by_group: dict
    checked: int


def finite_difference_audit(model: FlowModel, batch: np.ndarray,
                            step: float = 1e-5, max_exhaustive: int = 500,
                            sample_size: int = 200, seed: int = 0) -> AuditResult:
    """Compare analytic gradients against central finite differences.

    Exhaustive over every trainable scalar when the model has at most
    `max_exhaustive` of them, otherwise over `sample_size` random
    coordinates.  Errors are reported per parameter group for diagnosis.

    The relative-error denominator is floored at 10 * step: a central
    difference at step h carries O(1e-13)/h evaluation noise, so gradients
    smaller than that cannot be resolved relatively and are compared
    against the floor instead.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    _, grads = nll_and_gradients(model, batch)
    registry = model.parameters()
    coords = [(name, arr, k) for name, arr in registry for k in range(arr.size)]
    if len(coords) > max_exhaustive:
        rng = np.random.default_rng(seed)
        pick = rng.choice(len(coords), size=min(sample_size, len(coords)),
                          replace=False)
        coords = [coords[int(i)] for i in pick]
    floor = 10.0 * step
    worst = 0.0
    by_group: dict[str, float] = {}
    for name, arr, k in coords:
        old = arr.flat[k]
        arr.flat[k] = old + step
        hi = batch_nll(model, batch)
        arr.flat[k] = old - step
        lo = batch_nll(model, batch)
        arr.flat[k] = old
        fd = (hi - lo) / (2 * step)
        an = grads[name].flat[k]
        rel = abs(fd - an) / max(abs(fd), abs(an), floor)
        group = "free" if name.endswith(".free") else "net"
        by_group[group] = max(by_group.get(group, 0.0), rel)
        worst = max(worst, rel)
    return AuditResult(worst, by_group, len(coords))
