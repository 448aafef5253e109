"""Exact piecewise-linear cube masks.

The univariate mask is 1 on ``[-n, n]``, 0 outside ``(-(n+delta), n+delta)``
and linear in between. It is built with width 2 and depth 2 as

    a± = relu(±x - n),  m = relu(1 - k (a+ + a-))

where ``k`` is the smallest double with ``k * delta >= 1`` in exact
arithmetic. On the plateau both ``a±`` are exactly 0. For ``|x| >= c``, with
``c`` the smallest double satisfying ``c - n >= delta`` exactly, rounding is
monotone, so ``fl(|x| - n) >= delta`` and ``fl(k * a) >= 1``. Hence the
plateau is exactly 1.0 and the exterior exactly 0.0 in IEEE double
arithmetic for every positive ``n`` and ``delta``. The ramp matches
``1 - (|x| - n) / delta`` to within a few ulps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.sparse as sp

from .exceptions import NotPowerOfTwoError
from .network import Activation, Affine, Network, Pool, RELU

__all__ = [
    "MaskSpec",
    "delta_for_epsilon",
    "epsilon_for_delta",
    "mask_thresholds",
    "build_univariate_mask",
    "build_cube_mask",
    "univariate_mask_value",
]


def _is_pow2(d: int) -> bool:
    return d >= 1 and d & (d - 1) == 0


@dataclass(frozen=True)
class MaskSpec:
    d: int
    n: float
    delta: float
    D: int = 1

    def __post_init__(self):
        if not _is_pow2(self.d):
            raise NotPowerOfTwoError(f"mask dimension must be a power of two, got {self.d}")
        if not (self.n > 0 and self.delta > 0 and math.isfinite(self.n) and math.isfinite(self.delta)):
            raise ValueError(f"n and delta must be positive and finite, got n={self.n}, delta={self.delta}")
        if self.D < 1:
            raise ValueError("D must be positive")

    @property
    def outer_halfwidth(self) -> float:
        return mask_thresholds(self.n, self.delta)[0]


def delta_for_epsilon(d: int, n: float, epsilon: float) -> float:
    """Transition width whose cubic annulus around ``[-n, n]^d`` has volume ``epsilon``.

    Solves ``2^d ((n + delta)^d - n^d) = epsilon``; written with ``log1p``/``expm1``
    so small ``epsilon`` does not cancel.
    """
    if d < 1 or not (n > 0) or not (epsilon > 0):
        raise ValueError(f"need d >= 1, n > 0, epsilon > 0; got d={d}, n={n}, epsilon={epsilon}")
    q = epsilon / (2.0**d * n**d)
    return n * math.expm1(math.log1p(q) / d)


def epsilon_for_delta(d: int, n: float, delta: float) -> float:
    """Volume ``2^d ((n + delta)^d - n^d)`` of the cubic annulus."""
    return 2.0**d * n**d * math.expm1(d * math.log1p(delta / n))


def mask_thresholds(n: float, delta: float) -> tuple[float, float]:
    """``(c, k)``: outer threshold and ramp slope used by the mask networks."""
    n, delta = float(n), float(delta)
    c = n + delta
    while Fraction(c) - Fraction(n) < Fraction(delta):
        c = math.nextafter(c, math.inf)
    k = 1.0 / delta
    while Fraction(k) * Fraction(delta) < 1:
        k = math.nextafter(k, math.inf)
    return c, k


def univariate_mask_value(x, n: float, delta: float) -> np.ndarray:
    """Closed-form mask ``clip(1 - (|x| - n)/delta, 0, 1)`` (reference, not a network)."""
    a = np.abs(np.asarray(x, dtype=np.float64))
    return np.clip(1.0 - (a - n) / delta, 0.0, 1.0)


def _mask_layers(d: int, n: float, delta: float, stages: int = 2) -> list:
    """Per-axis masks ``(m(x_1), ..., m(x_d))``; ``stages > 2`` appends exact relu
    pass-through stages so pooling can be placed later."""
    _, k = mask_thresholds(n, delta)
    rows = np.arange(2 * d)
    cols = np.repeat(np.arange(d), 2)
    split = sp.csr_matrix((np.tile([1.0, -1.0], d), (rows, cols)), shape=(2 * d, d))
    combine = sp.csr_matrix((np.full(2 * d, -k), (cols, rows)), shape=(d, 2 * d))
    layers = [
        Affine(split, np.full(2 * d, -float(n))),
        Activation([RELU] * (2 * d)),
        Affine(combine, np.ones(d)),
        Activation([RELU] * d),
    ]
    for _ in range(stages - 2):
        layers += [Affine(sp.identity(d, format="csr")), Activation([RELU] * d)]
    return layers


def build_univariate_mask(n: float, delta: float) -> Network:
    MaskSpec(1, n, delta)
    return Network(1, 1, _mask_layers(1, n, delta))


def build_cube_mask(spec: MaskSpec) -> Network:
    """``x -> prod_i m(x_i) * (1, ..., 1)`` using ``log2(d)`` pooling layers."""
    d = spec.d
    layers = _mask_layers(d, spec.n, spec.delta)
    layers += [Pool() for _ in range(d.bit_length() - 1)]
    layers.append(Affine(np.ones((spec.D, 1))))
    return Network(d, spec.D, layers)
