"""Target functions: the :class:`FunctionSpec` container and a small catalog."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .geometry import Box

__all__ = ["FunctionSpec", "CATALOG", "get_target", "load_tabulated", "hinge_target"]


@dataclass(frozen=True, eq=False)
class FunctionSpec:
    """A black-box target ``R^d -> R^D`` with its claimed Lipschitz constant and support box.

    ``evaluator`` maps an ``(m, d)`` array to ``(m, D)`` (or ``(m,)`` when ``D == 1``).
    """

    evaluator: Callable
    d: int
    D: int
    lipschitz: float
    support_box: Box
    label: str = "target"
    meta: dict = field(default_factory=dict)

    def __call__(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        return np.asarray(self.evaluator(X), dtype=np.float64).reshape(X.shape[0], self.D)

    @property
    def is_zero(self) -> bool:
        return bool(self.meta.get("zero", False))


def _bump(X):
    return 2.0 * np.maximum(0.0, 1.0 - np.linalg.norm(X, axis=1))


def _boxdist(X):
    return np.maximum(0.0, 1.0 - np.max(np.abs(X), axis=1))


def _hinges(X):
    a = np.full(X.shape[1], 0.4)
    return (np.maximum(0.0, 0.5 - np.abs(X - a).sum(axis=1))
            + np.maximum(0.0, 0.5 - np.abs(X + a).sum(axis=1)))


def _bump_vec(X):
    b = _bump(X)
    return np.stack([b, _boxdist(X), -0.5 * b], axis=1)


def _zero(X):
    return np.zeros(X.shape[0])


# name -> (evaluator, D, lipschitz(d), support halfwidth, description)
CATALOG = {
    "bump": (_bump, 1, lambda d: 2.0, 1.0, "2 * max(0, 1 - ||x||_2)"),
    "boxdist": (_boxdist, 1, lambda d: 1.0, 1.0, "distance to the complement of [-1, 1]^d"),
    "hinges": (_hinges, 1, lambda d: 2.0 * math.sqrt(d), 1.0, "two l1 hinges centred at ±0.4"),
    "bump_vec": (_bump_vec, 3, lambda d: math.sqrt(6.0), 1.0, "(bump, boxdist, -bump/2)"),
    "zero": (_zero, 1, lambda d: 0.0, 1.0, "identically zero"),
}


def get_target(name: str, d: int = 2) -> FunctionSpec:
    if name not in CATALOG:
        raise KeyError(f"unknown target {name!r}; available: {sorted(CATALOG)}")
    fn, D, lip, hw, _ = CATALOG[name]
    return FunctionSpec(fn, d, D, lip(d), Box.cube(d, hw), label=name, meta={"zero": name == "zero"})


def hinge_target(weights, offsets, scales, box: Box, label: str = "hinge") -> FunctionSpec:
    """``x -> sum_i s_i |<w_i, x> - a_i|`` with Lipschitz bound ``sum_i |s_i| ||w_i||``."""
    W = np.atleast_2d(np.asarray(weights, dtype=np.float64))
    a = np.asarray(offsets, dtype=np.float64)
    s = np.asarray(scales, dtype=np.float64)
    lip = float(np.sum(np.abs(s) * np.linalg.norm(W, axis=1)))

    def fn(X):
        return np.abs(X @ W.T - a) @ s

    return FunctionSpec(fn, W.shape[1], 1, lip, box, label=label)


def load_tabulated(path, label: str | None = None) -> FunctionSpec:
    """Target from a CSV tabulated on a tensor grid.

    Header columns named ``x*`` are coordinates, the rest are values. Between
    grid points the values are interpolated multilinearly; outside the grid the
    target is 0.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = np.array([[float(v) for v in row] for row in reader if row], dtype=np.float64)
    xcols = [i for i, h in enumerate(header) if h.strip().lower().startswith("x")]
    ycols = [i for i in range(len(header)) if i not in xcols]
    if not xcols or not ycols:
        raise ValueError(f"{path}: need x* coordinate columns and at least one value column")
    coords = rows[:, xcols]
    axes = [np.unique(coords[:, j]) for j in range(len(xcols))]
    shape = tuple(len(a) for a in axes)
    if int(np.prod(shape)) != rows.shape[0]:
        raise ValueError(f"{path}: rows do not form a full tensor grid")
    idx = tuple(np.searchsorted(axes[j], coords[:, j]) for j in range(len(axes)))
    values = np.zeros(shape + (len(ycols),))
    values[idx] = rows[:, ycols]
    interp = RegularGridInterpolator(axes, values, bounds_error=False, fill_value=0.0)
    slopes = []
    for j, ax in enumerate(axes):
        if len(ax) < 2:
            slopes.append(0.0)
            continue
        diff = np.diff(values, axis=j)
        h = np.diff(ax).reshape([-1 if k == j else 1 for k in range(len(axes))] + [1])
        slopes.append(float(np.max(np.linalg.norm(diff / h, axis=-1))))
    lip = float(math.sqrt(sum(s * s for s in slopes)))
    box = Box.from_bounds([a[0] for a in axes], [a[-1] for a in axes])
    return FunctionSpec(interp, len(xcols), len(ycols), lip, box, label=label or str(path))
