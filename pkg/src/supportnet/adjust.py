"""Support adjustment: multiply a relu network by an exact cube mask through one pooling layer."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
import scipy.sparse as sp

from .exceptions import NonReluError
from .masks import MaskSpec, _mask_layers, delta_for_epsilon, epsilon_for_delta, mask_thresholds
from .network import (
    Affine,
    ArchitectureStats,
    Network,
    Pool,
    compose,
    is_piecewise_linear,
    _to_stages,
    parallel_pair,
    stats,
)
from .quadrature import annulus_points, pointwise_norm

__all__ = ["AdjustmentCertificate", "adjust_support", "adjusted_width_bound", "adjusted_depth_bound",
           "estimate_annulus_sup"]

SUP_SAFETY = 1.25


def adjusted_width_bound(d: int, D: int, width_before: int) -> int:
    return max(d * (d - 1) + 2, D) + width_before


def adjusted_depth_bound(d: int, depth_before: int) -> int:
    return 2 + 3 * d + depth_before


@dataclass(frozen=True)
class AdjustmentCertificate:
    """What :func:`adjust_support` guarantees about its output ``g``.

    * ``g == f`` on ``[-inner_n, inner_n]^d``,
    * ``g == 0`` exactly where ``||x||_inf >= outer_halfwidth``,
    * ``||f - g||_L1 <= annulus_measure * sup_bound_effective <= l1_budget``.

    ``outer_halfwidth`` is the double actually used by the mask; it can exceed
    ``inner_n + delta`` by an ulp.
    """

    d: int
    D: int
    inner_n: float
    delta: float
    outer_halfwidth: float
    l1_budget: float
    sup_bound_used: float
    sup_bound_effective: float
    sup_bound_source: str
    annulus_measure: float
    stats_before: ArchitectureStats
    stats_after: ArchitectureStats

    @property
    def width_bound(self) -> int:
        return adjusted_width_bound(self.d, self.D, self.stats_before.width)

    @property
    def depth_bound(self) -> int:
        return adjusted_depth_bound(self.d, self.stats_before.depth)

    @property
    def architecture_ok(self) -> bool:
        return self.stats_after.width <= self.width_bound and self.stats_after.depth <= self.depth_bound

    def to_dict(self) -> dict:
        out = asdict(self)
        out["stats_before"] = self.stats_before.as_dict()
        out["stats_after"] = self.stats_after.as_dict()
        out["width_bound"] = self.width_bound
        out["depth_bound"] = self.depth_bound
        return out

    @classmethod
    def from_dict(cls, doc: dict) -> "AdjustmentCertificate":
        fields = {k: doc[k] for k in cls.__dataclass_fields__}
        fields["stats_before"] = ArchitectureStats(**doc["stats_before"])
        fields["stats_after"] = ArchitectureStats(**doc["stats_after"])
        return cls(**fields)


def _within_bounds(after: ArchitectureStats, before: ArchitectureStats, d: int, D: int) -> bool:
    return (after.width <= adjusted_width_bound(d, D, before.width)
            and after.depth <= adjusted_depth_bound(d, before.depth))


def _pool_shared(spec: MaskSpec, f: Network) -> Network:
    """Mask and ``f`` side by side, then one final pool.

    The mask's pooling is moved to ``f``'s first pooling stage (padding the mask
    with exact relu pass-throughs), so for tent interpolants the two share
    their pooling layers.
    """
    d = spec.d
    pooled = [i for i, s in enumerate(_to_stages(f)) if s.pools]
    depth = max(2, pooled[0] + 1) if pooled else 2
    layers = _mask_layers(d, spec.n, spec.delta, depth)
    layers += [Pool() for _ in range(d.bit_length() - 1)]
    mask = Network(d, spec.D, layers + [Affine(np.ones((spec.D, 1)))])
    paired = parallel_pair(mask, f)
    return compose(paired, Network(2 * spec.D, spec.D, [Pool()]))


def _pool_after(spec: MaskSpec, f: Network) -> Network:
    """Per-axis mask values alongside ``f``, then the mask product and the final
    multiplication as pure pooling steps on ``(mask values, f(x))``.

    Keeps the width near ``2d + width(f)`` for networks whose own stages do not
    line up with the mask's pooling, at the cost of ``log2(d)`` extra pools.
    """
    d, D = spec.d, spec.D
    core = Network(d, d, _mask_layers(d, spec.n, spec.delta))
    paired = parallel_pair(core, f)
    layers = list(paired.layers)
    carry = np.asarray(paired.final_bias)
    r = d
    while True:
        # input rows: mask values 0..r-1, then f values r..r+D-1
        if r > 1:
            h = r // 2
            rows = np.concatenate([np.arange(h), r + np.arange(D), h + np.arange(h)])
            out = 2 * (h + D)
            bias = np.concatenate([np.zeros(h + D + h), np.ones(D)])
        else:
            rows = np.concatenate([1 + np.arange(D), np.zeros(D, dtype=int)])
            out = 2 * D
            bias = np.zeros(out)
        W = sp.csr_matrix((np.ones(rows.size), (np.arange(rows.size), rows)), shape=(out, r + D))
        layers += [Affine(W, bias + W @ carry), Pool()]
        carry = np.zeros(out // 2)
        if r == 1:
            break
        r //= 2
    return Network(d, D, layers)


def estimate_annulus_sup(f, inner: float, outer: float, d: int, points_per_axis: int = 12) -> float:
    """Sampled max of ``||f||`` over the cubic annulus (midpoints plus both faces)."""
    X, _ = annulus_points(inner, outer, d, points_per_axis)
    faces = []
    for r in (inner, outer):
        Y = X.copy()
        i = np.argmax(np.abs(Y), axis=1)
        rows = np.arange(Y.shape[0])
        Y[rows, i] = np.sign(Y[rows, i]) * r
        faces.append(Y)
    return float(np.max(pointwise_norm(f, np.vstack([X, *faces]))))


def adjust_support(f: Network, n: float, epsilon: float, sup_bound: float | None = None):
    """Force ``f`` to vanish outside a cube slightly larger than ``[-n, n]^d``.

    Returns ``(g, certificate)`` with ``g = pool(mask, f)``. The transition width
    is chosen so the annulus volume times ``max(sup_bound, 1)`` equals
    ``epsilon``. When ``sup_bound`` is None it is estimated by sampling the
    annulus and inflated by 1.25.
    """
    if not is_piecewise_linear(f):
        raise NonReluError("support adjustment needs a relu network; analytic activations cannot vanish exactly")
    if not (epsilon > 0 and math.isfinite(epsilon)):
        raise ValueError(f"epsilon must be positive and finite, got {epsilon}")
    if not n > 0:
        raise ValueError(f"n must be positive, got {n}")
    d, D = f.input_dim, f.output_dim
    if sup_bound is None:
        widest = n + delta_for_epsilon(d, n, epsilon)
        sup_bound = SUP_SAFETY * estimate_annulus_sup(f, n, widest, d)
        source = "estimated"
    else:
        if not sup_bound >= 0:
            raise ValueError(f"sup_bound must be non-negative, got {sup_bound}")
        source = "supplied"
    effective = max(float(sup_bound), 1.0)
    delta = delta_for_epsilon(d, n, epsilon / effective)
    spec = MaskSpec(d, float(n), delta, D)
    g = _pool_shared(spec, f)
    before = stats(f)
    if not _within_bounds(stats(g), before, d, D):
        alt = _pool_after(spec, f)
        if _within_bounds(stats(alt), before, d, D) or stats(alt).width < stats(g).width:
            g = alt
    cert = AdjustmentCertificate(
        d=d,
        D=D,
        inner_n=float(n),
        delta=delta,
        outer_halfwidth=mask_thresholds(n, delta)[0],
        l1_budget=float(epsilon),
        sup_bound_used=float(sup_bound),
        sup_bound_effective=effective,
        sup_bound_source=source,
        annulus_measure=epsilon_for_delta(d, n, delta),
        stats_before=before,
        stats_after=stats(g),
    )
    return g, cert
