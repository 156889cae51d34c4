"""Dataset construction: synthetic generators, box rescaling, noise injection.

Models operate on the open unit cube, so every dataset carries its points
already rescaled into [margin, 1 - margin]^d together with the affine
diffeomorphism mapping the unit cube back to original data units.  Reported
log likelihoods stay in original units through that diffeomorphism.  Noise
injection happens in original units and the perturbed points are re-clamped
just inside the box.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .bernstein import Interval
from .flow import TargetDiffeo, affine_diffeo, diffeo_apply, diffeo_inverse

BOX_MARGIN = 1e-6  # hard interior margin every dataset must respect


@dataclass(frozen=True)
class Dataset:
    """Points inside the unit box plus the map back to original units."""

    points: np.ndarray
    diffeo: TargetDiffeo
    provenance: str = ""
    support_box: tuple = field(default=None)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2:
            raise ValueError("points must be an (N, d) array")
        if np.any(pts < BOX_MARGIN) or np.any(pts > 1.0 - BOX_MARGIN):
            raise ValueError(
                f"points must lie in [{BOX_MARGIN}, {1 - BOX_MARGIN}] per coordinate")
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)
        if self.support_box is None:
            object.__setattr__(
                self, "support_box",
                tuple(Interval(0.0, 1.0) for _ in range(pts.shape[1])))

    def __len__(self):
        return self.points.shape[0]

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    def to_original(self, pts=None) -> np.ndarray:
        return diffeo_apply(self.diffeo, self.points if pts is None else pts)


@dataclass(frozen=True)
class MixtureSpec1D:
    """1-D Gaussian mixture; weights are normalized at construction."""

    means: np.ndarray
    variances: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        means = np.asarray(self.means, dtype=float)
        var = np.asarray(self.variances, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if not (means.shape == var.shape == w.shape) or means.ndim != 1:
            raise ValueError("means, variances, weights must be equal-length vectors")
        if np.any(var <= 0) or np.any(w < 0) or w.sum() <= 0:
            raise ValueError("variances must be positive and weights non-negative")
        for a, name in ((means, "means"), (var, "variances"), (w, "weights")):
            a.flags.writeable = False
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "variances", var)
        object.__setattr__(self, "weights", w / w.sum())

    def pdf(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)[..., None]
        comp = np.exp(-0.5 * (x - self.means) ** 2 / self.variances)
        comp /= np.sqrt(2.0 * math.pi * self.variances)
        return np.sum(self.weights * comp, axis=-1)

    def sample(self, count: int, rng: np.random.Generator) -> np.ndarray:
        comps = rng.choice(len(self.weights), size=count, p=self.weights)
        return self.means[comps] + np.sqrt(self.variances[comps]) * rng.standard_normal(count)


FIVE_GAUSSIANS = MixtureSpec1D(
    means=(-5.0, -2.0, 0.0, 2.0, 5.0),
    variances=(1.5, 2.0, 1.0, 2.0, 1.0),
    weights=(0.2, 0.2, 0.2, 0.2, 0.2),
)

# As printed the seven weights sum to 3.0; normalization makes them a
# distribution, which MixtureSpec1D applies automatically.
SEVEN_GAUSSIANS = MixtureSpec1D(
    means=(-7.0, -5.0, -2.0, 0.0, 2.0, 5.0, 7.0),
    variances=(1.0, 1.0, 2.0, 2.0, 2.0, 1.0, 1.0),
    weights=(0.8, 0.2, 0.2, 0.6, 0.2, 0.2, 0.8),
)


def rescale_to_box(points: np.ndarray, margin: float = 0.02,
                   provenance: str = "") -> Dataset:
    """Affine per-dimension map of raw points onto [margin, 1 - margin]^d.

    The recorded diffeomorphism maps the unit box back to original units, so
    its log-Jacobian converts box-space log densities into original units.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[0] < 2:
        raise ValueError("need at least two points to determine a support box")
    if not 0 < margin < 0.5:
        raise ValueError("margin must lie in (0, 0.5)")
    lo = points.min(axis=0)
    hi = points.max(axis=0)
    if np.any(hi - lo <= 0):
        dim = int(np.flatnonzero(hi - lo <= 0)[0])
        raise ValueError(f"zero spread in dimension {dim}")
    span = (hi - lo) / (1.0 - 2.0 * margin)
    box_lo = lo - margin * span
    diffeo = affine_diffeo(box_lo, box_lo + span)
    boxed = diffeo_inverse(diffeo, points)
    boxed = np.clip(boxed, BOX_MARGIN, 1.0 - BOX_MARGIN)
    return Dataset(boxed, diffeo, provenance)


def into_box(diffeo: TargetDiffeo, points: np.ndarray, provenance: str = "") -> Dataset:
    """Map original-unit points through an existing box transform, clamping."""
    boxed = np.clip(diffeo_inverse(diffeo, np.atleast_2d(points)),
                    BOX_MARGIN, 1.0 - BOX_MARGIN)
    return Dataset(boxed, diffeo, provenance)


def gaussian_mixture_1d(spec: MixtureSpec1D, count: int, seed,
                        margin: float = 0.02) -> Dataset:
    """Seeded mixture sample rescaled into the box; exact pdf stays on spec."""
    if count < 1:
        raise ValueError("count must be at least 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    raw = spec.sample(count, rng)[:, None]
    return rescale_to_box(raw, margin,
                          provenance=f"gaussian_mixture_1d(k={len(spec.weights)})")


TOY2D_NAMES = ("moons", "rings", "checkerboard", "pinwheel")

RING_RADII = (1.0, 2.0)
RING_WIDTH = 0.1


def toy2d(name: str, count: int, seed, margin: float = 0.02) -> Dataset:
    """Standard 2-D toy distributions, seeded and count-exact."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    if name == "moons":
        k = count // 2
        theta = rng.uniform(0.0, math.pi, count)
        raw = np.empty((count, 2))
        raw[:k, 0] = np.cos(theta[:k])
        raw[:k, 1] = np.sin(theta[:k])
        raw[k:, 0] = 1.0 - np.cos(theta[k:])
        raw[k:, 1] = 0.5 - np.sin(theta[k:])
        raw += rng.normal(scale=0.05, size=(count, 2))
    elif name == "rings":
        which = rng.integers(0, 2, count)
        radius = np.asarray(RING_RADII)[which] + rng.uniform(
            -RING_WIDTH / 2, RING_WIDTH / 2, count)
        angle = rng.uniform(0.0, 2.0 * math.pi, count)
        raw = np.stack([radius * np.cos(angle), radius * np.sin(angle)], axis=1)
    elif name == "checkerboard":
        x = rng.uniform(-2.0, 2.0, count)
        offset = rng.integers(0, 2, count) * 2.0 - 1.0
        y = rng.uniform(0.0, 1.0, count) + offset * (np.floor(x) % 2)
        raw = np.stack([x, y], axis=1)
    elif name == "pinwheel":
        arms = 5
        arm = rng.integers(0, arms, count)
        r = rng.normal(1.0, 0.25, count)
        spread = rng.normal(0.0, 0.1, count)
        angle = arm * 2.0 * math.pi / arms + r * 0.8 + spread
        raw = np.stack([r * np.cos(angle), r * np.sin(angle)], axis=1)
    else:
        raise ValueError(f"unknown toy dataset {name!r}; pick from {TOY2D_NAMES}")
    return rescale_to_box(raw, margin, provenance=f"toy2d({name})")


def add_uniform_noise(ds: Dataset, magnitude: float = 1e-2, seed=0) -> Dataset:
    """Add U[0, magnitude] noise per coordinate in original units.

    The support box is kept; perturbed points are clamped back just inside.
    The test split of an experiment should stay noise-free.
    """
    if magnitude < 0:
        raise ValueError("noise magnitude must be non-negative")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    raw = ds.to_original()
    raw = raw + rng.uniform(0.0, magnitude, size=raw.shape)
    boxed = np.clip(diffeo_inverse(ds.diffeo, raw), BOX_MARGIN, 1.0 - BOX_MARGIN)
    return Dataset(boxed, ds.diffeo, ds.provenance + "+noise")


def load_csv(path, has_header: bool = False, delimiter: str = ",") -> np.ndarray:
    """Rectangular numeric table -> (N, d) array in original units.

    Callers put the result through rescale_to_box.  Non-numeric cells and
    ragged rows are errors naming the offending row and column.
    """
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        for lineno, row in enumerate(reader, start=1):
            if not row:
                continue
            if has_header and lineno == 1:
                continue
            values = []
            for col, cell in enumerate(row, start=1):
                try:
                    values.append(float(cell))
                except ValueError:
                    raise ValueError(
                        f"non-numeric cell {cell!r} at row {lineno}, column {col}"
                    ) from None
            if rows and len(values) != len(rows[0]):
                raise ValueError(
                    f"ragged row {lineno}: expected {len(rows[0])} columns, "
                    f"got {len(values)}")
            rows.append(values)
    if not rows:
        raise ValueError(f"no data rows in {path}")
    return np.asarray(rows, dtype=float)


def save_points_csv(path, points: np.ndarray, header: list[str] | None = None):
    points = np.atleast_2d(points)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        if header:
            writer.writerow(header)
        for row in points:
            writer.writerow([repr(float(v)) for v in row])
