"""Autoregressive flows built from strictly increasing Bernstein couplings.

A model is a stack of layers, each mapping the unit cube to itself: in every
layer, dimension j passes through its own increasing polynomial whose
coefficients come from free parameters (first dimension) or from a
conditioner network fed the latent prefix z_{<j}.  A final diffeomorphism
carries the unit cube to the data region, so log densities are reported in
original data units.

Conditioning on the latent prefix makes the forward map cheap and the
inverse sequential per dimension: inverting dimension j needs the already
recovered z_{<j} to rebuild the coefficients before root finding.  Density
evaluation therefore costs d root finds per layer per point.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .bernstein import Interval, basis_matrix, decasteljau, decasteljau_rows
from .monotone import CUMULATIVE, SCHEMES, coefficient_rows
from .nets import ConditionerNet, conditioner_forward, init_conditioner
from .priors import PriorSpec, prior_log_density, prior_sample
from .rootfind import invert_unit_rows

UNIT_RANGE = Interval(0.0, 1.0)

AFFINE = "affine"
TANH_SQUASH = "tanh_squash"


@dataclass(frozen=True)
class TargetDiffeo:
    """Bijection between the model's unit cube and the data region."""

    kind: str
    lo: np.ndarray | None = None
    hi: np.ndarray | None = None
    shift: np.ndarray | None = None
    scale: np.ndarray | None = None

    def __post_init__(self):
        if self.kind == AFFINE:
            lo = np.atleast_1d(np.asarray(self.lo, dtype=float))
            hi = np.atleast_1d(np.asarray(self.hi, dtype=float))
            if np.any(hi <= lo):
                raise ValueError("affine diffeomorphism requires hi > lo per dimension")
            object.__setattr__(self, "lo", lo)
            object.__setattr__(self, "hi", hi)
        elif self.kind == TANH_SQUASH:
            shift = np.atleast_1d(np.asarray(self.shift, dtype=float))
            scale = np.atleast_1d(np.asarray(self.scale, dtype=float))
            if np.any(scale <= 0):
                raise ValueError("tanh squash scale must be positive")
            object.__setattr__(self, "shift", shift)
            object.__setattr__(self, "scale", scale)
        else:
            raise ValueError(f"unknown diffeomorphism kind {self.kind!r}")

    @property
    def dimension(self) -> int:
        arr = self.lo if self.kind == AFFINE else self.shift
        return arr.shape[0]

    def to_dict(self) -> dict:
        if self.kind == AFFINE:
            return {"kind": AFFINE, "lo": self.lo.tolist(), "hi": self.hi.tolist()}
        return {"kind": TANH_SQUASH, "shift": self.shift.tolist(),
                "scale": self.scale.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "TargetDiffeo":
        if d["kind"] == AFFINE:
            return cls(AFFINE, lo=np.asarray(d["lo"]), hi=np.asarray(d["hi"]))
        return cls(TANH_SQUASH, shift=np.asarray(d["shift"]),
                   scale=np.asarray(d["scale"]))


def affine_diffeo(lo, hi) -> TargetDiffeo:
    return TargetDiffeo(AFFINE, lo=np.asarray(lo, dtype=float),
                        hi=np.asarray(hi, dtype=float))


def identity_diffeo(dimension: int) -> TargetDiffeo:
    return affine_diffeo(np.zeros(dimension), np.ones(dimension))


def tanh_diffeo(shift, scale) -> TargetDiffeo:
    return TargetDiffeo(TANH_SQUASH, shift=np.asarray(shift, dtype=float),
                        scale=np.asarray(scale, dtype=float))


def diffeo_apply(h: TargetDiffeo, y):
    y = np.asarray(y, dtype=float)
    if h.kind == AFFINE:
        return h.lo + (h.hi - h.lo) * y
    return h.shift + h.scale * np.arctanh(2.0 * y - 1.0)


def diffeo_inverse(h: TargetDiffeo, x):
    x = np.asarray(x, dtype=float)
    if h.kind == AFFINE:
        return (x - h.lo) / (h.hi - h.lo)
    return 0.5 * (1.0 + np.tanh((x - h.shift) / h.scale))


def diffeo_logjac(h: TargetDiffeo, y):
    """log |dh/dy| at unit-cube points y; shape y.shape[:-1]."""
    y = np.asarray(y, dtype=float)
    if h.kind == AFFINE:
        const = float(np.sum(np.log(h.hi - h.lo)))
        return np.full(y.shape[:-1], const)
    terms = np.log(h.scale) - np.log(2.0 * y * (1.0 - y))
    return np.sum(terms, axis=-1)


@dataclass
class FlowLayer:
    """One unit-cube-to-unit-cube coupling stage.

    Dimension 0 is driven by `free_raw`; dimensions j >= 1 by `nets[j]`
    (entry 0 is a placeholder None so indices line up).
    """

    degree: int
    free_raw: np.ndarray
    nets: list = field(default_factory=lambda: [None])
    scheme: str = CUMULATIVE

    def __post_init__(self):
        self.free_raw = np.array(self.free_raw, dtype=float)
        if self.free_raw.shape != (self.degree - 1,):
            raise ValueError(
                f"free parameters must have length {self.degree - 1}, "
                f"got {self.free_raw.shape}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")

    @property
    def dimension(self) -> int:
        return len(self.nets)


@dataclass
class FlowModel:
    prior: PriorSpec
    layers: list
    diffeo: TargetDiffeo
    dimension: int
    reverse_between_layers: bool = False

    def __post_init__(self):
        for layer in self.layers:
            if layer.dimension != self.dimension:
                raise ValueError("layer dimension does not match the model")
        if self.diffeo.dimension != self.dimension:
            raise ValueError("diffeomorphism dimension does not match the model")
        if self.prior.dimension != self.dimension:
            raise ValueError("prior dimension does not match the model")

    def parameters(self) -> list[tuple[str, np.ndarray]]:
        """Named references to every trainable array (mutated in place)."""
        out = []
        for li, layer in enumerate(self.layers):
            out.append((f"layer{li}.dim0.free", layer.free_raw))
            for j in range(1, self.dimension):
                for pname, arr in layer.nets[j].parameters().items():
                    out.append((f"layer{li}.dim{j}.{pname}", arr))
        return out


def build_flow(dimension: int, degree: int, num_layers: int, prior: PriorSpec,
               diffeo: TargetDiffeo | None = None, rng=None,
               scheme: str = CUMULATIVE, hidden: tuple[int, int] = (32, 32),
               reverse_between_layers: bool = False) -> FlowModel:
    """Standard-normal initialized model; d = 1 uses no conditioner nets."""
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    if diffeo is None:
        diffeo = identity_diffeo(dimension)
    layers = []
    for _ in range(num_layers):
        free = rng.standard_normal(degree - 1)
        nets = [None]
        for j in range(1, dimension):
            nets.append(init_conditioner(j, degree - 1, rng, hidden))
        layers.append(FlowLayer(degree, free, nets, scheme))
    return FlowModel(prior, layers, diffeo, dimension, reverse_between_layers)


def _as_batch(pts, dimension: int):
    pts = np.asarray(pts, dtype=float)
    if pts.ndim == 1:
        if pts.shape[0] != dimension:
            raise ValueError(f"expected a point of dimension {dimension}")
        return pts[None, :], True
    if pts.ndim != 2 or pts.shape[1] != dimension:
        raise ValueError(f"expected points of dimension {dimension}, got {pts.shape}")
    return pts, False


def dim_coefficient_rows(layer: FlowLayer, j: int, z_prefix: np.ndarray | None,
                         count: int):
    """Coefficient rows for dimension j: (1, n+1) shared or (N, n+1) per point."""
    if j == 0:
        raw = layer.free_raw[None, :]
        cache = None
    else:
        raw, cache = conditioner_forward(layer.nets[j], z_prefix)
    alphas = coefficient_rows(raw, layer.degree, UNIT_RANGE, layer.scheme)
    return alphas, raw, cache


def _eval_rows(alphas: np.ndarray, t: np.ndarray) -> np.ndarray:
    if alphas.shape[0] == 1:
        return decasteljau(alphas[0], t)
    return decasteljau_rows(alphas, t)


def _deriv_rows(alphas: np.ndarray, t: np.ndarray) -> np.ndarray:
    n = alphas.shape[-1] - 1
    dalphas = n * np.diff(alphas, axis=-1)
    return np.sum(dalphas * basis_matrix(n - 1, t), axis=-1)


def layer_forward(layer: FlowLayer, z):
    """Apply the couplings: (x, logdet) with logdet = sum_j log B_j'(z_j) > -inf."""
    z2, single = _as_batch(z, layer.dimension)
    if np.any((z2 < 0.0) | (z2 > 1.0)):
        raise ValueError("layer input outside the unit cube")
    n = z2.shape[0]
    x = np.empty_like(z2)
    logdet = np.zeros(n)
    for j in range(layer.dimension):
        alphas, _, _ = dim_coefficient_rows(layer, j, z2[:, :j], n)
        x[:, j] = _eval_rows(alphas, z2[:, j])
        logdet += np.log(_deriv_rows(alphas, z2[:, j]))
    if single:
        return x[0], float(logdet[0])
    return x, logdet


def layer_inverse(layer: FlowLayer, x):
    """Recover z dimension by dimension; logdet uses the forward convention."""
    x2, single = _as_batch(x, layer.dimension)
    n = x2.shape[0]
    z = np.empty_like(x2)
    logdet = np.zeros(n)
    for j in range(layer.dimension):
        alphas, _, _ = dim_coefficient_rows(layer, j, z[:, :j], n)
        try:
            z[:, j], _ = invert_unit_rows(alphas, x2[:, j])
        except ValueError as exc:
            raise ValueError(f"inversion failed at dimension {j}: {exc}") from exc
        logdet += np.log(_deriv_rows(alphas, z[:, j]))
    if single:
        return z[0], float(logdet[0])
    return z, logdet


def forward(model: FlowModel, z):
    """Layers then the final diffeomorphism; returns (x, total_logdet)."""
    z2, single = _as_batch(z, model.dimension)
    y = z2
    total = np.zeros(z2.shape[0])
    for i, layer in enumerate(model.layers):
        if model.reverse_between_layers and i > 0:
            y = y[:, ::-1]
        y, ld = layer_forward(layer, y)
        total = total + ld
    x = diffeo_apply(model.diffeo, y)
    total = total + diffeo_logjac(model.diffeo, y)
    if single:
        return x[0], float(total[0])
    return x, total


def inverse(model: FlowModel, x):
    """Inverse map; total_logdet satisfies forward + inverse = 0 pointwise."""
    x2, single = _as_batch(x, model.dimension)
    y = diffeo_inverse(model.diffeo, x2)
    total = -diffeo_logjac(model.diffeo, y)
    for i in range(len(model.layers) - 1, -1, -1):
        y, ld = layer_inverse(model.layers[i], y)
        total = total - ld
        if model.reverse_between_layers and i > 0:
            y = y[:, ::-1]
    if single:
        return y[0], float(total[0])
    return y, total


def log_density(model: FlowModel, x):
    """Exact log density in data units; -inf outside the model's support."""
    x2, single = _as_batch(x, model.dimension)
    y = diffeo_inverse(model.diffeo, x2)
    ok = np.all((y >= 0.0) & (y <= 1.0), axis=1)
    out = np.full(x2.shape[0], -np.inf)
    if np.any(ok):
        z, total = inverse(model, x2[ok])
        out[ok] = prior_log_density(model.prior, z) + total
    return float(out[0]) if single else out


def sample(model: FlowModel, count: int, rng) -> np.ndarray:
    z = prior_sample(model.prior, count, rng)
    x, _ = forward(model, z)
    return x


def model_to_dict(model: FlowModel) -> dict:
    layers = []
    for layer in model.layers:
        dims = [{"free_raw": layer.free_raw.tolist()}]
        for j in range(1, model.dimension):
            dims.append({"net": layer.nets[j].to_dict()})
        layers.append({"degree": layer.degree, "scheme": layer.scheme, "dims": dims})
    return {
        "prior": model.prior.to_dict(),
        "diffeo": model.diffeo.to_dict(),
        "dimension": model.dimension,
        "reverse_between_layers": model.reverse_between_layers,
        "layers": layers,
    }


def model_from_dict(d: dict) -> FlowModel:
    dimension = int(d["dimension"])
    layers = []
    for ld in d["layers"]:
        degree = int(ld["degree"])
        dims = ld["dims"]
        free = np.asarray(dims[0]["free_raw"], dtype=float)
        nets = [None]
        for j in range(1, dimension):
            nets.append(ConditionerNet.from_dict(dims[j]["net"]))
        layers.append(FlowLayer(degree, free, nets, ld.get("scheme", CUMULATIVE)))
    return FlowModel(
        prior=PriorSpec.from_dict(d["prior"]),
        diffeo=TargetDiffeo.from_dict(d["diffeo"]),
        layers=layers,
        dimension=dimension,
        reverse_between_layers=bool(d.get("reverse_between_layers", False)),
    )


def save_checkpoint(model: FlowModel, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh)


def load_checkpoint(path) -> FlowModel:
    with open(path, encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))
