"""Relu + pooling networks that interpolate a Lipschitz target on a tensor grid.

The target is pulled back to ``[0, 1]^d`` by an affine normalization and
interpolated with tensor-product tents ``prod_i relu(1 - |u_i/h - j_i|)``.
The network has the same four-stage shape as the cube mask:

1. ``relu(±t)`` for every axis and grid index, ``t = u_i/h - j``,
2. tents ``relu(1 - relu(t) - relu(-t))``,
3. a relu copy layer laying the tents out so that ``log2(d)`` pooling layers
   multiply them into one bump per node,
4. a linear readout weighting each bump by the target value at its node.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .exceptions import BudgetExceededError, NotPowerOfTwoError
from .geometry import Box, diameter, metric_capacity
from .network import RELU, Activation, Affine, Network, Pool
from .targets import FunctionSpec

__all__ = [
    "Normalization",
    "jung_normalize",
    "box_normalize",
    "InterpolationPlan",
    "grid_nodes",
    "build_tent_interpolant",
    "approximate_lipschitz",
    "capacity_lipschitz_bound",
    "LipschitzApproximator",
]

DEFAULT_MAX_NODES = 1_000_000


@dataclass(frozen=True, eq=False)
class Normalization:
    """Affine map ``u = A x + b`` with diagonal ``A`` (stored as its diagonal ``scale``).

    ``lip_factor`` is the smallest entry of ``scale``: a target with Lipschitz
    constant ``L`` becomes ``L / lip_factor``-Lipschitz in ``u``.
    """

    scale: np.ndarray
    offset: np.ndarray
    kind: str
    degenerate: bool = False

    @property
    def A(self) -> np.ndarray:
        return np.diag(self.scale)

    @property
    def b(self) -> np.ndarray:
        return self.offset

    @property
    def lip_factor(self) -> float:
        return math.inf if self.degenerate else float(np.min(self.scale))

    def forward(self, X) -> np.ndarray:
        return np.asarray(X, dtype=np.float64) * self.scale + self.offset

    def inverse(self, U) -> np.ndarray:
        return (np.asarray(U, dtype=np.float64) - self.offset) / self.scale

    def to_dict(self) -> dict:
        return {"kind": self.kind, "scale": self.scale.tolist(), "offset": self.offset.tolist(),
                "degenerate": self.degenerate}



def jung_normalize(X) -> Normalization:
    """Scale a Jung-radius box around ``X`` onto ``[0, 1]^d``.

    ``X`` is a :class:`Box` or an ``(m, d)`` point sample. The center is the
    midpoint of the bounding box; every point of ``X`` lies within
    ``d * diam / sqrt(2d + 2)`` of it per coordinate (that value is at least
    ``diam / 2``), so the image sits inside the unit cube. The scale is
    ``sqrt(d + 1) / (diam * d * sqrt(2))``.
    """
    if isinstance(X, Box):
        center, d = X.center, X.d
        diam = X.diameter
    else:
        P = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if P.shape[0] == 0:
            raise ValueError("cannot normalize an empty set")
        d = P.shape[1]
        center = (P.min(axis=0) + P.max(axis=0)) / 2.0
        diam = diameter(P)
    if diam == 0.0:
        return Normalization(np.ones(d), 0.5 - center, "jung", degenerate=True)
    a = math.sqrt(d + 1) / (diam * d * math.sqrt(2.0))
    half = d * diam / math.sqrt(2 * d + 2)
    return Normalization(np.full(d, a), a * (half - center), "jung")


def box_normalize(box: Box) -> Normalization:
    """Map the box itself onto ``[0, 1]^d`` axis by axis (tighter than the Jung box)."""
    width = 2.0 * box.halfwidths
    if np.any(width == 0):
        return Normalization(np.ones(box.d), 0.5 - box.center, "box", degenerate=True)
    return Normalization(1.0 / width, -box.lower / width, "box")


def _normalize(spec: FunctionSpec, kind: str) -> Normalization:
    if kind == "jung":
        return jung_normalize(spec.support_box)
    if kind == "box":
        return box_normalize(spec.support_box)
    raise ValueError(f"normalization must be 'jung' or 'box', got {kind!r}")


@dataclass(frozen=True, eq=False)
class InterpolationPlan:
    grid_points_per_axis: int
    spacing: float
    normalization: Normalization
    lipschitz_normalized: float
    predicted_sup_error: float
    measured_sup_error: float = math.nan
    capacity_bound: float = math.nan

    @property
    def node_count(self) -> int:
        return self.grid_points_per_axis ** self.normalization.scale.shape[0]

    def to_dict(self) -> dict:
        return {
            "grid_points_per_axis": self.grid_points_per_axis,
            "spacing": self.spacing,
            "normalization": self.normalization.to_dict(),
            "lipschitz_normalized": self.lipschitz_normalized,
            "predicted_sup_error": self.predicted_sup_error,
            "measured_sup_error": self.measured_sup_error,
            "capacity_bound": self.capacity_bound,
        }


def grid_nodes(N: int, d: int) -> np.ndarray:
    """Nodes ``j * h`` of the normalized grid, C order, shape ``(N^d, d)``."""
    axis = np.arange(N) / (N - 1)
    mesh = np.meshgrid(*[axis] * d, indexing="ij")
    return np.stack([m.reshape(-1) for m in mesh], axis=1)


def _evaluate_nodes(spec: FunctionSpec, X: np.ndarray, n_jobs: int) -> np.ndarray:
    chunk = 65536
    pieces = [X[i:i + chunk] for i in range(0, X.shape[0], chunk)]
    try:
        if n_jobs > 1 and len(pieces) > 1:
            with ThreadPoolExecutor(n_jobs) as pool:
                values = list(pool.map(spec, pieces))
        else:
            values = [spec(p) for p in pieces]
    except Exception as exc:
        raise ValueError(f"target {spec.label!r} failed at a grid node: {exc}") from exc
    Y = np.vstack(values)
    if not np.all(np.isfinite(Y)):
        raise ValueError(f"target {spec.label!r} returned non-finite values at grid nodes")
    return Y


def _tent_layers(norm: Normalization, N: int, d: int) -> list:
    h_inv = float(N - 1)
    j = np.arange(N, dtype=np.float64)
    # stage 1: rows (axis i, node j, sign) -> ±(scale_i/h x_i + offset_i/h - j)
    rows = np.arange(2 * d * N)
    cols = np.repeat(np.arange(d), 2 * N)
    sign = np.tile([1.0, -1.0], d * N)
    slope = np.repeat(norm.scale * h_inv, 2 * N) * sign
    shift = (np.repeat(norm.offset * h_inv, N) - np.tile(j, d)).repeat(2) * sign
    split = sp.csr_matrix((slope, (rows, cols)), shape=(2 * d * N, d))
    tents = sp.csr_matrix((np.full(2 * d * N, -1.0), (rows // 2, rows)), shape=(d * N, 2 * d * N))
    # stage 3: row t*M + node copies the tent of axis t at that node's index
    M = N**d
    idx = np.indices((N,) * d).reshape(d, M)
    copy_cols = (np.arange(d)[:, None] * N + idx).reshape(-1)
    copy = sp.csr_matrix((np.ones(d * M), (np.arange(d * M), copy_cols)), shape=(d * M, d * N))
    return [
        Affine(split, shift),
        Activation([RELU] * (2 * d * N)),
        Affine(tents, np.ones(d * N)),
        Activation([RELU] * (d * N)),
        Affine(copy, np.zeros(d * M)),
        Activation([RELU] * (d * M)),
    ] + [Pool() for _ in range(d.bit_length() - 1)]


def build_tent_interpolant(spec: FunctionSpec, N: int, normalization: str | Normalization = "jung",
                           n_jobs: int = 1) -> Network:
    """Network ``H(x) = sum_nodes f(node) * bump_node(A x + b)``."""
    d = spec.d
    if d < 1 or d & (d - 1):
        raise NotPowerOfTwoError(f"tent products need d to be a power of two, got {d}")
    if N < 2:
        raise ValueError(f"need at least 2 grid points per axis, got {N}")
    norm = normalization if isinstance(normalization, Normalization) else _normalize(spec, normalization)
    nodes = norm.inverse(grid_nodes(N, d))
    values = _evaluate_nodes(spec, nodes, n_jobs)
    layers = _tent_layers(norm, N, d) + [Affine(values.T.copy())]
    return Network(d, spec.D, layers)


def capacity_lipschitz_bound(spec: FunctionSpec, sample_per_axis: int = 21, trials: int = 16) -> float:
    """``log2(cap) * L * diam * d * sqrt(2) / sqrt(d + 1)`` with the unknown constant set to 1.

    ``cap`` is the greedy capacity of the support-box grid points where the
    target is nonzero. Reported for comparison only.
    """
    X = spec.support_box.grid(sample_per_axis)
    keep = np.linalg.norm(spec(X), axis=1) > 0
    P = X[keep] if keep.any() else X[:1]
    cap = metric_capacity(P, trials=trials)
    d = spec.d
    return math.log2(max(cap, 2)) * spec.lipschitz * diameter(P) * d * math.sqrt(2.0) / math.sqrt(d + 1)


def _verify_points(box: Box, N: int, budget: int = 40_000) -> np.ndarray:
    per_axis = max(2, min(4 * (N - 1) + 1, int(budget ** (1.0 / box.d))))
    return box.grid(per_axis)


def approximate_lipschitz(spec: FunctionSpec, target_sup_error: float, normalization: str = "jung",
                          max_nodes: int = DEFAULT_MAX_NODES, nested: bool = False, verify: bool = True,
                          n_jobs: int = 1):
    """Smallest tent grid whose error bound ``L_norm * sqrt(d) * h`` meets ``target_sup_error``.

    ``nested=True`` rounds ``N - 1`` up to a power of two, so grids for smaller
    targets refine the grids for larger ones. Returns ``(network, plan)``;
    with ``verify`` the plan carries the sup error measured on a closed grid
    over the support box.
    """
    if not target_sup_error > 0:
        raise ValueError(f"target_sup_error must be positive, got {target_sup_error}")
    if not math.isfinite(spec.lipschitz) or spec.lipschitz < 0:
        raise ValueError(f"lipschitz constant must be finite and non-negative, got {spec.lipschitz}")
    d = spec.d
    norm = _normalize(spec, normalization)
    lip = 0.0 if spec.lipschitz == 0 else spec.lipschitz / norm.lip_factor
    if math.isinf(target_sup_error) or lip == 0.0:
        cells = 1
    else:
        cells = max(1, math.ceil(lip * math.sqrt(d) / target_sup_error))
        if nested:
            cells = 1 << (cells - 1).bit_length()
    N = cells + 1
    if N**d > max_nodes:
        raise BudgetExceededError(f"{N}^{d} grid nodes exceed the budget of {max_nodes}")
    net = build_tent_interpolant(spec, N, norm, n_jobs=n_jobs)
    h = 1.0 / (N - 1)
    measured = math.nan
    if verify:
        X = _verify_points(spec.support_box, N)
        measured = float(np.max(np.linalg.norm(net(X) - spec(X), axis=1)))
    plan = InterpolationPlan(N, h, norm, lip, lip * math.sqrt(d) * h, measured)
    return net, plan


class LipschitzApproximator(RegressorMixin, BaseEstimator):
    """Estimator wrapper around :func:`approximate_lipschitz`.

    ``fit`` takes a :class:`FunctionSpec` (there is no training data: the target
    is queried at grid nodes). ``predict`` evaluates the fitted network.
    """

    def __init__(self, target_sup_error: float = 0.1, normalization: str = "jung",
                 max_nodes: int = DEFAULT_MAX_NODES, nested: bool = False):
        self.target_sup_error = target_sup_error
        self.normalization = normalization
        self.max_nodes = max_nodes
        self.nested = nested

    def fit(self, spec: FunctionSpec, y=None):
        if not isinstance(spec, FunctionSpec):
            raise TypeError("fit expects a FunctionSpec")
        self.network_, self.plan_ = approximate_lipschitz(
            spec, self.target_sup_error, self.normalization, self.max_nodes, self.nested)
        self.n_features_in_ = spec.d
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "network_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        Y = self.network_(X)
        return Y[:, 0] if Y.shape[1] == 1 else Y
