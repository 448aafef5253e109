"""L1, sup and L1_loc estimates over boxes, cubic annuli and Euclidean balls.

All estimators take a callable ``f`` mapping ``(m, d)`` points to ``(m,)`` or
``(m, D)`` values and integrate the pointwise Euclidean norm. Sums go through
``numpy.sum`` (pairwise summation) over arrays in a fixed order, so results
depend only on the grid and seed.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import BudgetExceededError
from .geometry import Box

__all__ = [
    "QuadratureGrid",
    "pointwise_norm",
    "difference",
    "l1_norm",
    "sup_norm",
    "annulus_points",
    "annulus_l1",
    "ball_volume",
    "L1LocResult",
    "l1_loc_distance",
]

MODES = ("tensor-midpoint", "tensor-closed", "monte-carlo")
DEFAULT_MAX_POINTS = 4_000_000


@dataclass(frozen=True)
class QuadratureGrid:
    """Sampling plan over a box.

    ``tensor-midpoint`` uses cell midpoints (each carrying one cell volume),
    ``tensor-closed`` the closed grid including faces (for sup estimates),
    ``monte-carlo`` ``sample_count`` uniform samples drawn from ``seed``.
    """

    box: Box
    points_per_axis: int = 64
    mode: str = "tensor-midpoint"
    sample_count: int = 100_000
    seed: int = 0
    max_points: int = DEFAULT_MAX_POINTS

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.points_per_axis < 1 or self.sample_count < 1:
            raise ValueError("point counts must be positive")
        if self.size > self.max_points:
            raise BudgetExceededError(f"grid needs {self.size} points, budget is {self.max_points}")

    @property
    def size(self) -> int:
        if self.mode == "monte-carlo":
            return self.sample_count
        return self.points_per_axis**self.box.d

    def points(self) -> np.ndarray:
        box = self.box
        if self.mode == "monte-carlo":
            return box.sample(self.sample_count, np.random.default_rng(self.seed))
        if self.mode == "tensor-closed":
            return box.grid(self.points_per_axis)
        m = self.points_per_axis
        t = (np.arange(m) + 0.5) / m
        axes = [lo + (hi - lo) * t for lo, hi in zip(box.lower, box.upper)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.reshape(-1) for g in mesh], axis=1)

    def refined(self) -> "QuadratureGrid":
        if self.mode == "monte-carlo":
            return QuadratureGrid(self.box, self.points_per_axis, self.mode, 2 * self.sample_count,
                                  self.seed, self.max_points)
        m = self.points_per_axis
        m = 2 * m - 1 if self.mode == "tensor-closed" else 2 * m
        return QuadratureGrid(self.box, m, self.mode, self.sample_count, self.seed, self.max_points)


def pointwise_norm(f, X) -> np.ndarray:
    values = np.asarray(f(X), dtype=np.float64)
    if values.ndim == 1:
        return np.abs(values)
    return np.linalg.norm(values.reshape(X.shape[0], -1), axis=1)


def difference(f, g):
    """Callable ``x -> f(x) - g(x)`` (both reshaped to ``(m, D)``)."""

    def h(X):
        a = np.asarray(f(X), dtype=np.float64).reshape(X.shape[0], -1)
        b = np.asarray(g(X), dtype=np.float64).reshape(X.shape[0], -1)
        return a - b

    return h


def l1_norm(f, grid: QuadratureGrid, lipschitz: float | None = None) -> tuple[float, float]:
    """``(estimate, uncertainty)`` of ``∫_box ||f||``.

    The uncertainty is the Monte Carlo standard error, or for the midpoint rule
    the cell bound ``lipschitz * (cell diagonal / 2) * volume`` (NaN when no
    Lipschitz constant is given).
    """
    if grid.mode == "tensor-closed":
        raise ValueError("use tensor-midpoint or monte-carlo for integrals")
    X = grid.points()
    v = pointwise_norm(f, X)
    vol = grid.box.volume
    value = float(np.sum(v) / v.size * vol)
    if grid.mode == "monte-carlo":
        err = float(vol * np.std(v, ddof=1) / math.sqrt(v.size)) if v.size > 1 else math.inf
    elif lipschitz is None:
        err = math.nan
    else:
        cell = 2.0 * grid.box.halfwidths / grid.points_per_axis
        err = float(lipschitz * np.linalg.norm(cell) / 2.0 * vol)
    return value, err


def sup_norm(f, grid: QuadratureGrid, rtol: float | None = None) -> float:
    """Largest sampled ``||f||``: a lower bound on the true supremum.

    With ``rtol`` the grid is refined until the estimate changes by less than
    ``rtol`` (relative) or the point budget runs out.
    """
    best = float(np.max(pointwise_norm(f, grid.points())))
    if rtol is None:
        return best
    while True:
        try:
            grid = grid.refined()
        except BudgetExceededError:
            return best
        new = float(np.max(pointwise_norm(f, grid.points())))
        if abs(new - best) <= rtol * max(abs(new), 1e-300):
            return max(new, best)
        best = max(new, best)


def annulus_points(inner: float, outer: float, d: int, points_per_axis: int = 16,
                   max_points: int = DEFAULT_MAX_POINTS) -> tuple[np.ndarray, np.ndarray]:
    """Midpoint rule on ``[-outer, outer]^d \\ (-inner, inner)^d``.

    The annulus is split exactly into ``3^d - 1`` boxes (per axis: lower slab,
    middle, upper slab; all-middle excluded). Returns ``(points, weights)``.
    """
    if not (0 <= inner < outer):
        raise ValueError(f"need 0 <= inner < outer, got inner={inner}, outer={outer}")
    m = points_per_axis
    total = (3**d - 1) * m**d
    if total > max_points:
        raise BudgetExceededError(f"annulus grid needs {total} points, budget is {max_points}")
    t = (np.arange(m) + 0.5) / m
    segments = [
        (-outer + (outer - inner) * t, outer - inner),
        (-inner + 2.0 * inner * t, 2.0 * inner),
        (inner + (outer - inner) * t, outer - inner),
    ]
    pts, wts = [], []
    for choice in itertools.product(range(3), repeat=d):
        if all(c == 1 for c in choice):
            continue
        axes = [segments[c][0] for c in choice]
        vol = math.prod(segments[c][1] for c in choice)
        if vol == 0.0:
            continue
        mesh = np.meshgrid(*axes, indexing="ij")
        pts.append(np.stack([g.reshape(-1) for g in mesh], axis=1))
        wts.append(np.full(m**d, vol / m**d))
    return np.vstack(pts), np.concatenate(wts)


def annulus_l1(f, inner: float, outer: float, d: int, points_per_axis: int = 16,
               mode: str = "tensor-midpoint", samples: int = 200_000, seed: int = 0) -> float:
    """``∫ ||f||`` over the cubic annulus between ``[-inner, inner]^d`` and ``[-outer, outer]^d``."""
    if mode == "monte-carlo":
        if not (0 <= inner < outer):
            raise ValueError(f"need 0 <= inner < outer, got inner={inner}, outer={outer}")
        box = Box.cube(d, outer)
        X = box.sample(samples, np.random.default_rng(seed))
        keep = np.max(np.abs(X), axis=1) >= inner
        v = np.zeros(samples)
        v[keep] = pointwise_norm(f, X[keep])
        return float(np.sum(v) / samples * box.volume)
    X, w = annulus_points(inner, outer, d, points_per_axis)
    return float(np.sum(pointwise_norm(f, X) * w))


def ball_volume(d: int, radius: float = 1.0) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1) * radius**d


@dataclass(frozen=True)
class L1LocResult:
    value: float
    tail_bound: float
    summands: tuple
    integrals: tuple


def _ball_integral(h, d, radius, mode, samples, points_per_axis, rng) -> float:
    if mode == "monte-carlo":
        z = rng.normal(size=(samples, d))
        z /= np.linalg.norm(z, axis=1, keepdims=True)
        r = radius * rng.uniform(size=(samples, 1)) ** (1.0 / d)
        v = pointwise_norm(h, z * r)
        return float(np.sum(v) / samples * ball_volume(d, radius))
    grid = QuadratureGrid(Box.cube(d, radius), points_per_axis)
    X = grid.points()
    inside = np.linalg.norm(X, axis=1) <= radius
    v = np.zeros(X.shape[0])
    v[inside] = pointwise_norm(h, X[inside])
    return float(np.sum(v) / v.size * grid.box.volume)


def l1_loc_distance(f, g, terms: int, d: int, mode: str = "monte-carlo", samples: int = 100_000,
                    points_per_axis: int = 64, seed: int = 0) -> L1LocResult:
    """Partial sum of ``sum_n 2^-n I_n / (1 + I_n)`` with ``I_n = ∫_{||x||<=n} ||f - g||``.

    The omitted tail is at most ``2^-terms``.
    """
    if terms < 1:
        raise ValueError("terms must be >= 1")
    h = difference(f, g)
    rng = np.random.default_rng(seed)
    below_one = math.nextafter(1.0, 0.0)
    integrals, summands = [], []
    for n in range(1, terms + 1):
        I = _ball_integral(h, d, float(n), mode, samples, points_per_axis, rng)
        integrals.append(I)
        summands.append(2.0**-n * min(I / (1.0 + I), below_one))
    return L1LocResult(float(math.fsum(summands)), 2.0**-terms, tuple(summands), tuple(integrals))
