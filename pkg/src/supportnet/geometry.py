"""Boxes, cubic annuli, support detection, diameter, capacity and Lipschitz estimates."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist, pdist

__all__ = [
    "Box",
    "annulus_index",
    "in_annulus",
    "SupportEstimate",
    "estimate_support_box",
    "metric_capacity",
    "estimate_lipschitz",
    "diameter",
]


@dataclass(frozen=True, eq=False)
class Box:
    """Axis-aligned box ``center ± halfwidths``."""

    center: np.ndarray
    halfwidths: np.ndarray

    def __post_init__(self):
        c = np.array(self.center, dtype=np.float64).reshape(-1)
        h = np.array(self.halfwidths, dtype=np.float64).reshape(-1)
        if h.shape == (1,) and c.shape[0] > 1:
            h = np.full_like(c, h[0])
        if c.shape != h.shape:
            raise ValueError(f"center and halfwidths differ in length: {c.shape} vs {h.shape}")
        if np.any(h < 0) or not (np.all(np.isfinite(c)) and np.all(np.isfinite(h))):
            raise ValueError("halfwidths must be finite and non-negative")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "halfwidths", h)

    @classmethod
    def cube(cls, d: int, halfwidth: float, center=None) -> "Box":
        return cls(np.zeros(d) if center is None else center, np.full(d, float(halfwidth)))

    @classmethod
    def from_bounds(cls, lower, upper) -> "Box":
        lo, hi = np.asarray(lower, dtype=np.float64), np.asarray(upper, dtype=np.float64)
        return cls((lo + hi) / 2.0, (hi - lo) / 2.0)

    @property
    def d(self) -> int:
        return self.center.shape[0]

    @property
    def lower(self) -> np.ndarray:
        return self.center - self.halfwidths

    @property
    def upper(self) -> np.ndarray:
        return self.center + self.halfwidths

    @property
    def volume(self) -> float:
        return float(np.prod(2.0 * self.halfwidths))

    @property
    def diameter(self) -> float:
        return float(2.0 * np.linalg.norm(self.halfwidths))

    def contains(self, X) -> np.ndarray:
        X = np.atleast_2d(X)
        return np.all(np.abs(X - self.center) <= self.halfwidths, axis=1)

    def sample(self, n: int, rng) -> np.ndarray:
        return rng.uniform(self.lower, self.upper, size=(n, self.d))

    def grid(self, points_per_axis: int) -> np.ndarray:
        """Closed tensor grid (endpoints included), shape ``(points_per_axis**d, d)``."""
        axes = [np.linspace(lo, hi, points_per_axis) for lo, hi in zip(self.lower, self.upper)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.reshape(-1) for m in mesh], axis=1)

    def to_dict(self) -> dict:
        return {"center": self.center.tolist(), "halfwidths": self.halfwidths.tolist()}

    def __repr__(self):
        return f"Box(center={self.center.tolist()}, halfwidths={self.halfwidths.tolist()})"


def annulus_index(x) -> np.ndarray | int:
    """Index ``n`` of the cubic annulus ``{n < ||x||_inf <= n + 1}`` containing ``x``.

    The closed unit cube gets index 0 so that every point has an index.
    """
    x = np.asarray(x, dtype=np.float64)
    r = np.max(np.abs(x), axis=-1)
    idx = np.maximum(np.ceil(r) - 1.0, 0.0).astype(np.int64)
    return int(idx) if idx.ndim == 0 else idx


def in_annulus(x, n: int) -> np.ndarray | bool:
    r = np.max(np.abs(np.asarray(x, dtype=np.float64)), axis=-1)
    if n == 0:
        return r <= 1.0
    return (n < r) & (r <= n + 1)


@dataclass(frozen=True)
class SupportEstimate:
    n_f: int
    tight_box: Box | None
    effectively_zero: bool


def estimate_support_box(f, scan_box: Box, grid_per_axis: int = 101, tol: float = 1e-9) -> SupportEstimate:
    """Smallest integer ``n >= 1`` with ``||f|| <= tol`` on every grid sample outside ``[-n, n]^d``.

    ``f`` is a callable on ``(m, d)`` arrays (a :class:`FunctionSpec` works).
    """
    X = scan_box.grid(grid_per_axis)
    values = np.asarray(f(X), dtype=np.float64).reshape(X.shape[0], -1)
    active = np.linalg.norm(values, axis=1) > tol
    if not active.any():
        return SupportEstimate(1, None, True)
    pts = X[active]
    radius = float(np.max(np.abs(pts)))
    n_f = max(1, math.ceil(radius))
    tight = Box.from_bounds(pts.min(axis=0), pts.max(axis=0))
    return SupportEstimate(n_f, tight, False)


def diameter(points) -> float:
    P = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if P.shape[0] == 0:
        raise ValueError("diameter of an empty set")
    if P.shape[0] == 1:
        return 0.0
    if P.shape[0] > 4000 and P.shape[1] <= 3:
        from scipy.spatial import ConvexHull, QhullError

        try:
            P = P[ConvexHull(P).vertices]
        except QhullError:
            pass
    return float(pdist(P).max())


def metric_capacity(points, trials: int = 64, radii_per_octave: int = 4) -> int:
    """Greedy lower bound on the metric capacity of a finite sample.

    For centers ``x0`` among the first ``trials`` points and radii ``r`` on a
    geometric grid covering the sample's distance scales, points within
    ``4r/5`` of ``x0`` are taken greedily (in input order) while pairwise
    distances stay above ``2r/5``; the disjoint balls ``B(x_i, r/5)`` then sit
    inside ``B(x0, r)``. The largest count is returned.

    Appending points to the sample never lowers the estimate: centers, the
    radius grid and the greedy order all extend the smaller sample's choices.
    """
    P = np.atleast_2d(np.asarray(points, dtype=np.float64))
    m = P.shape[0]
    if m == 0:
        raise ValueError("capacity of an empty set")
    if m == 1:
        return 1
    dists = cdist(P, P)
    positive = dists[dists > 0]
    if positive.size == 0:
        return 1
    # radii on a fixed absolute grid 2^(j/radii_per_octave)
    lo = math.floor(radii_per_octave * math.log2(positive.min() * 1.25)) - 1
    hi = math.ceil(radii_per_octave * math.log2(positive.max() * 2.5)) + 1
    radii = 2.0 ** (np.arange(lo, hi + 1) / radii_per_octave)
    best = 1
    for c in range(min(trials, m)):
        row = dists[c]
        for r in radii:
            candidates = np.flatnonzero(row <= 0.8 * r)
            if candidates.size <= best:
                continue
            available = np.ones(candidates.size, dtype=bool)
            count = 0
            while True:
                free = np.flatnonzero(available)
                if free.size == 0:
                    break
                count += 1
                available &= dists[candidates[free[0]], candidates] > 0.4 * r
            best = max(best, count)
    return best


def estimate_lipschitz(f, box: Box, pairs: int = 2000, seed: int = 0,
                       scales=(1e-1, 1e-2, 1e-3, 1e-4)) -> float:
    """Largest sampled difference quotient ``||f(x) - f(y)|| / ||x - y||``.

    Mixes random pairs with short axis-aligned and random-direction steps at
    several scales. The result is a lower bound on the Lipschitz constant.
    """
    rng = np.random.default_rng(seed)
    d = box.d
    size = float(np.max(2.0 * box.halfwidths)) or 1.0
    X = [box.sample(pairs, rng)]
    Y = [box.sample(pairs, rng)]
    base = box.sample(pairs, rng)
    for s in scales:
        step = s * size
        dirs = rng.normal(size=(pairs, d))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        axis = np.eye(d)[rng.integers(0, d, size=pairs)] * rng.choice([-1.0, 1.0], size=(pairs, 1))
        for u in (dirs, axis):
            Z = np.clip(base + step * u, box.lower, box.upper)
            X.append(base)
            Y.append(Z)
    X, Y = np.vstack(X), np.vstack(Y)
    dx = np.linalg.norm(X - Y, axis=1)
    keep = dx > 0
    fx = np.asarray(f(X[keep]), dtype=np.float64).reshape(keep.sum(), -1)
    fy = np.asarray(f(Y[keep]), dtype=np.float64).reshape(keep.sum(), -1)
    if not keep.any():
        return 0.0
    return float(np.max(np.linalg.norm(fx - fy, axis=1) / dx[keep]))
