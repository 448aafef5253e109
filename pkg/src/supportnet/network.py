"""Feedforward networks with per-neuron activations and bilinear pooling.

A :class:`Network` is an ordered list of layers applied to an input ``x``:

* :class:`Affine` computes ``W @ z + b``,
* :class:`Activation` applies one activation per neuron,
* :class:`Pool` maps a width-``2m`` vector ``y`` to ``(y[i] * y[m + i])_{i<m}``,

followed by the addition of a constant ``final_bias``.

Evaluation is deterministic at the bit level. Affine maps are stored as CSR
matrices and applied with a row-by-row, column-ascending accumulation, so a
block-diagonal stacking of two networks reproduces each network's outputs
exactly. The composition helpers (:func:`parallel_pair`, :func:`sum_networks`,
...) rely on that property.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.special import erf, expit

from .exceptions import DocumentError, NonReluError, NotPowerOfTwoError, StructuralError

__all__ = [
    "ActivationKind",
    "Affine",
    "Activation",
    "Pool",
    "Network",
    "ArchitectureStats",
    "RELU",
    "IDENTITY",
    "evaluate",
    "iterated_pool",
    "parallel_pair",
    "affine_precompose",
    "compose",
    "sum_networks",
    "scale_output",
    "broadcast_scalar_to_D",
    "stats",
    "serialize",
    "deserialize",
    "is_piecewise_linear",
]

_TAGS = ("relu", "identity", "sigmoid", "tanh", "softplus", "swish", "gelu", "sin", "polynomial")

# Rows x batch elements held in memory per evaluation chunk.
_CHUNK_ELEMENTS = 1 << 22


@dataclass(frozen=True)
class ActivationKind:
    """One entry of the activation catalog.

    ``coefficients`` is only used by ``polynomial`` and lists the coefficients
    from the constant term upward.
    """

    tag: str
    coefficients: tuple = ()

    def __post_init__(self):
        if self.tag not in _TAGS:
            raise ValueError(f"unknown activation {self.tag!r}; expected one of {_TAGS}")
        if self.tag == "polynomial":
            coef = tuple(float(c) for c in self.coefficients)
            if not coef or not all(math.isfinite(c) for c in coef):
                raise ValueError("polynomial activation needs a non-empty list of finite coefficients")
            object.__setattr__(self, "coefficients", coef)
        elif self.coefficients:
            raise ValueError(f"{self.tag} takes no coefficients")

    @property
    def analytic(self) -> bool:
        return self.tag != "relu"

    def __call__(self, z):
        tag = self.tag
        if tag == "relu":
            return np.maximum(z, 0.0)
        if tag == "identity":
            return z
        if tag == "sigmoid":
            return expit(z)
        if tag == "tanh":
            return np.tanh(z)
        if tag == "softplus":
            return np.logaddexp(0.0, z)
        if tag == "swish":
            return z * expit(z)
        if tag == "gelu":
            return 0.5 * z * (1.0 + erf(z / math.sqrt(2.0)))
        if tag == "sin":
            return np.sin(z)
        return np.polynomial.polynomial.polyval(z, self.coefficients)

    @classmethod
    def parse(cls, value) -> "ActivationKind":
        """Build from a tag string, ``"poly:c0,c1,..."`` or an existing kind."""
        if isinstance(value, ActivationKind):
            return value
        if isinstance(value, str) and value.startswith(("poly:", "polynomial:")):
            coefs = value.split(":", 1)[1].split(",")
            return cls("polynomial", tuple(float(c) for c in coefs))
        return cls(str(value))


RELU = ActivationKind("relu")
IDENTITY = ActivationKind("identity")


def _as_csr(weights) -> sp.csr_matrix:
    if sp.issparse(weights):
        m = sp.csr_matrix(weights, dtype=np.float64)
    else:
        arr = np.asarray(weights, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError(f"weights must be 2-D, got shape {arr.shape}")
        m = sp.csr_matrix(arr)
    m.sum_duplicates()
    m.sort_indices()
    return m


class Affine:
    """``z -> W @ z + b``; ``weights`` may be dense or scipy-sparse."""

    __slots__ = ("matrix", "bias")

    def __init__(self, weights, bias=None):
        self.matrix = _as_csr(weights)
        out = self.matrix.shape[0]
        if bias is None:
            bias = np.zeros(out)
        bias = np.array(bias, dtype=np.float64).reshape(-1)
        if bias.shape[0] != out:
            raise StructuralError(f"weights have {out} rows but bias has length {bias.shape[0]}")
        bias.setflags(write=False)
        self.bias = bias

    @property
    def weights(self) -> np.ndarray:
        return self.matrix.toarray()

    @property
    def in_width(self) -> int:
        return self.matrix.shape[1]

    @property
    def out_width(self) -> int:
        return self.matrix.shape[0]

    def __repr__(self):
        return f"Affine({self.out_width}x{self.in_width}, nnz={self.matrix.nnz})"


class Activation:
    __slots__ = ("kinds", "_groups")

    def __init__(self, kinds: Sequence):
        self.kinds = tuple(ActivationKind.parse(k) for k in kinds)
        groups: dict[ActivationKind, list[int]] = {}
        for i, k in enumerate(self.kinds):
            groups.setdefault(k, []).append(i)
        self._groups = {k: np.asarray(v, dtype=np.intp) for k, v in groups.items()}

    @property
    def width(self) -> int:
        return len(self.kinds)

    def apply(self, z: np.ndarray) -> np.ndarray:
        if len(self._groups) == 1:
            (kind,) = self._groups
            return kind(z)
        out = np.empty_like(z)
        for kind, rows in self._groups.items():
            out[rows] = kind(z[rows])
        return out

    def __repr__(self):
        tags = sorted({k.tag for k in self.kinds})
        return f"Activation({self.width}, {'/'.join(tags)})"


class Pool:
    __slots__ = ()

    def __repr__(self):
        return "Pool()"


@dataclass(frozen=True)
class ArchitectureStats:
    width: int
    depth: int
    pool_count: int
    param_count: int

    def as_dict(self) -> dict:
        return {"width": self.width, "depth": self.depth,
                "pool_count": self.pool_count, "param_count": self.param_count}


@dataclass(frozen=True, eq=False)
class Network:
    """Immutable feedforward network with optional pooling layers."""

    input_dim: int
    output_dim: int
    layers: tuple = ()
    final_bias: np.ndarray = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        if self.input_dim < 1 or self.output_dim < 1:
            raise StructuralError("input_dim and output_dim must be positive")
        c = np.zeros(self.output_dim) if self.final_bias is None else np.array(self.final_bias, dtype=np.float64)
        c = c.reshape(-1)
        c.setflags(write=False)
        object.__setattr__(self, "final_bias", c)
        widths = _chain_widths(self.input_dim, self.layers)
        if widths[-1] != self.output_dim:
            raise StructuralError(f"network produces width {widths[-1]} but output_dim is {self.output_dim}")
        if c.shape[0] != self.output_dim:
            raise StructuralError(f"final_bias has length {c.shape[0]}, expected {self.output_dim}")
        object.__setattr__(self, "_widths", widths)

    @property
    def widths(self) -> tuple:
        """Input width followed by the output width of every layer."""
        return self._widths

    def predict(self, X) -> np.ndarray:
        """Evaluate on a batch ``X`` of shape ``(n_samples, input_dim)``."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.input_dim:
            raise StructuralError(f"expected inputs of shape (n, {self.input_dim}), got {X.shape}")
        n = X.shape[0]
        out = np.empty((n, self.output_dim))
        chunk = max(1, _CHUNK_ELEMENTS // max(self._widths))
        for start in range(0, n, chunk):
            Z = np.ascontiguousarray(X[start:start + chunk].T)
            for layer in self.layers:
                if isinstance(layer, Affine):
                    Z = layer.matrix @ Z
                    Z += layer.bias[:, None]
                elif isinstance(layer, Activation):
                    Z = layer.apply(Z)
                else:
                    m = Z.shape[0] // 2
                    Z = Z[:m] * Z[m:]
            out[start:start + chunk] = Z.T + self.final_bias
        return out

    __call__ = predict

    def __repr__(self):
        return f"Network({self.input_dim}->{self.output_dim}, layers={list(self.layers)})"


def _chain_widths(input_dim: int, layers) -> tuple:
    widths = [input_dim]
    w = input_dim
    for i, layer in enumerate(layers):
        if isinstance(layer, Affine):
            if layer.in_width != w:
                raise StructuralError(f"affine expects width {layer.in_width}, receives {w}", i)
            w = layer.out_width
        elif isinstance(layer, Activation):
            if layer.width != w:
                raise StructuralError(f"activation has {layer.width} kinds, receives width {w}", i)
        elif isinstance(layer, Pool):
            if w % 2:
                raise StructuralError(f"pool needs an even width, receives {w}", i)
            w //= 2
        else:
            raise StructuralError(f"unknown layer type {type(layer).__name__}", i)
        widths.append(w)
    return tuple(widths)


def evaluate(net: Network, x) -> np.ndarray:
    """Evaluate ``net`` at a single point (1-D) or a batch (2-D)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        if x.shape[0] != net.input_dim:
            raise StructuralError(f"input has length {x.shape[0]}, expected {net.input_dim}")
        return net.predict(x[None, :])[0]
    return net.predict(x)


def stats(net: Network) -> ArchitectureStats:
    """Width is the largest of the input and every layer output; depth counts
    activation stages (at least 1); pools are counted separately."""
    depth = sum(isinstance(layer, Activation) for layer in net.layers)
    pools = sum(isinstance(layer, Pool) for layer in net.layers)
    params = net.output_dim + sum(
        layer.out_width * (layer.in_width + 1) for layer in net.layers if isinstance(layer, Affine)
    )
    return ArchitectureStats(width=max(net.widths), depth=max(depth, 1), pool_count=pools, param_count=params)


def is_piecewise_linear(net: Network) -> bool:
    """True when every activation is relu or identity."""
    return all(
        all(k.tag in ("relu", "identity") for k in layer.kinds)
        for layer in net.layers
        if isinstance(layer, Activation)
    )


# ---------------------------------------------------------------------------
# Composition
# ---------------------------------------------------------------------------


def iterated_pool(d: int) -> Network:
    """``log2(d)`` pooling layers mapping a width-``d`` vector to the product of its entries."""
    if d < 2 or d & (d - 1):
        raise NotPowerOfTwoError(f"iterated pooling needs d = 2**k with k >= 1, got {d}")
    k = d.bit_length() - 1
    return Network(d, 1, [Pool() for _ in range(k)])


def _eye(n):
    return sp.identity(n, format="csr", dtype=np.float64)


def _close_bias(net: Network) -> list:
    """Layers of ``net`` with a nonzero final bias turned into an explicit affine."""
    layers = list(net.layers)
    if np.any(net.final_bias != 0.0):
        layers.append(Affine(_eye(net.output_dim), net.final_bias))
    return layers


def compose(head: Network, tail: Network) -> Network:
    """``tail ∘ head`` by appending ``tail``'s layers."""
    if tail.input_dim != head.output_dim:
        raise StructuralError(f"cannot feed width {head.output_dim} into a network expecting {tail.input_dim}")
    return Network(head.input_dim, tail.output_dim, _close_bias(head) + list(tail.layers), tail.final_bias)


def affine_precompose(net: Network, A, b=None) -> Network:
    """``x -> net(A @ x + b)``; the affine map is prepended as its own layer,
    so depth is unchanged and evaluation is exact."""
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    if A.shape[0] != net.input_dim:
        raise StructuralError(f"A maps into dimension {A.shape[0]}, net expects {net.input_dim}")
    pre = Affine(A, np.zeros(A.shape[0]) if b is None else b)
    return Network(A.shape[1], net.output_dim, [pre, *net.layers], net.final_bias)


def scale_output(net: Network, s: float) -> Network:
    D = net.output_dim
    return Network(net.input_dim, D, _close_bias(net) + [Affine(float(s) * _eye(D))])


def broadcast_scalar_to_D(net: Network, D: int) -> Network:
    if net.output_dim != 1:
        raise StructuralError(f"broadcast needs a scalar network, got output_dim {net.output_dim}")
    return Network(net.input_dim, D, _close_bias(net) + [Affine(np.ones((D, 1)))])


def sum_networks(f: Network, g: Network) -> Network:
    if f.output_dim != g.output_dim:
        raise StructuralError(f"output dims differ: {f.output_dim} vs {g.output_dim}")
    D = f.output_dim
    h = parallel_pair(f, g)
    return Network(f.input_dim, D, _close_bias(h) + [Affine(sp.hstack([_eye(D), _eye(D)]).tocsr())])


# Stage = affine map, optional activation, then ``pools`` pooling layers.
@dataclass
class _Stage:
    W: sp.csr_matrix
    b: np.ndarray
    kinds: tuple | None
    pools: int = 0

    @property
    def out_width(self) -> int:
        return self.W.shape[0] >> self.pools


def _to_stages(net: Network) -> list:
    stages: list[_Stage] = []
    width = net.input_dim
    for layer in net.layers:
        if isinstance(layer, Affine):
            stages.append(_Stage(layer.matrix, np.asarray(layer.bias), None, 0))
        else:
            if not stages or (isinstance(layer, Activation) and (stages[-1].kinds is not None or stages[-1].pools)):
                stages.append(_Stage(_eye(width), np.zeros(width), None, 0))
            if isinstance(layer, Activation):
                stages[-1].kinds = layer.kinds
            else:
                stages[-1].pools += 1
        width = stages[-1].out_width
    return stages


def _from_stages(stages) -> list:
    layers = []
    for s in stages:
        layers.append(Affine(s.W, s.b))
        if s.kinds is not None:
            layers.append(Activation(s.kinds))
        layers.extend(Pool() for _ in range(s.pools))
    return layers


def _pm_rows(n: int) -> sp.csr_matrix:
    """Rows ``(+e_0, -e_0, +e_1, -e_1, ...)``: splits ``y`` into relu-ready pairs."""
    rows = np.arange(2 * n)
    cols = np.repeat(np.arange(n), 2)
    vals = np.tile([1.0, -1.0], n)
    return sp.csr_matrix((vals, (rows, cols)), shape=(2 * n, n))


def _pad_stages(stages: list, k: int, input_dim: int) -> list:
    """Add ``k`` activation stages without changing the computed function.

    After a relu stage the signal is nonnegative, so identity+relu stages pass it
    through exactly. Otherwise the used input coordinates are carried forward as
    ``(relu(x), relu(-x))`` pairs and recombined by the first original stage;
    one of each pair is exactly zero, so ``x = relu(x) - relu(-x)`` is exact.
    """
    if k <= 0:
        return stages
    relu_at = [i for i, s in enumerate(stages) if s.kinds is not None and all(t.tag == "relu" for t in s.kinds)]
    if relu_at:
        i = relu_at[-1]
        w = stages[i].out_width
        filler = [_Stage(_eye(w), np.zeros(w), (RELU,) * w, 0) for _ in range(k)]
        return stages[: i + 1] + filler + stages[i + 1:]
    first = stages[0]
    used = np.flatnonzero(np.diff(first.W.tocsc().indptr))
    u = used.size
    select = _pm_rows(input_dim)[np.stack([2 * used, 2 * used + 1], axis=1).ravel()]
    carry = [_Stage(select.tocsr(), np.zeros(2 * u), (RELU,) * (2 * u), 0)]
    carry += [_Stage(_eye(2 * u), np.zeros(2 * u), (RELU,) * (2 * u), 0) for _ in range(k - 1)]
    W_new = (first.W[:, used] @ _pm_rows(u).T).tocsr()
    return carry + [_Stage(W_new, first.b, first.kinds, first.pools)] + stages[1:]


def _pool_layout(mf: int, mg: int, pools: int) -> np.ndarray:
    """Row order such that ``pools`` pooling layers return ``[F, G]`` concatenated.

    Pooling ``p`` times sends pre-pool index ``i + t*M`` (``t < 2**p``) into output
    ``i`` where ``M`` is the final width, so chunks of ``f`` and ``g`` rows
    alternate with period ``mf + mg``.
    """
    reps = 1 << pools
    order = []
    for t in range(reps):
        order.append(np.arange(t * mf, (t + 1) * mf))
        order.append(reps * mf + np.arange(t * mg, (t + 1) * mg))
    return np.concatenate(order)


def _extend_pools(s: _Stage, pools: int) -> _Stage:
    """Append all-ones channels so that extra pools multiply by exactly 1.0."""
    W, b, kinds = s.W, s.b, s.kinds
    for _ in range(pools - s.pools):
        w = W.shape[0]
        W = sp.vstack([W, sp.csr_matrix((w, W.shape[1]))]).tocsr()
        b = np.concatenate([b, np.ones(w)])
        if kinds is not None:
            kinds = kinds + (RELU,) * w
    return _Stage(W, b, kinds, pools)


def _merge(sf: _Stage, sg: _Stage, shared_input: bool) -> _Stage:
    p = max(sf.pools, sg.pools)
    sf, sg = _extend_pools(sf, p), _extend_pools(sg, p)
    if shared_input:
        W = sp.vstack([sf.W, sg.W])
    else:
        W = sp.block_diag([sf.W, sg.W])
    b = np.concatenate([sf.b, sg.b])
    if sf.kinds is None and sg.kinds is None:
        kinds = None
    else:
        kinds = (sf.kinds or (IDENTITY,) * sf.W.shape[0]) + (sg.kinds or (IDENTITY,) * sg.W.shape[0])
    order = _pool_layout(sf.W.shape[0] >> p, sg.W.shape[0] >> p, p)
    W = W.tocsr()[order]
    b = b[order]
    if kinds is not None:
        kinds = tuple(kinds[i] for i in order)
    return _Stage(W.tocsr(), b, kinds, p)


def parallel_pair(f: Network, g: Network) -> Network:
    """Network computing ``(f(x), g(x))`` bit-exactly.

    Both networks must be piecewise linear (relu/identity activations, pooling
    allowed). The shorter one is padded with exact pass-through stages; pooling
    stages are interleaved so each half is pooled independently.
    """
    if f.input_dim != g.input_dim:
        raise StructuralError(f"input dims differ: {f.input_dim} vs {g.input_dim}")
    for name, net in (("f", f), ("g", g)):
        if not is_piecewise_linear(net):
            raise NonReluError(f"{name} has analytic activations; exact parallelization needs relu networks")
    sf, sg = _to_stages(f), _to_stages(g)
    if not sf:
        sf = [_Stage(_eye(f.input_dim), np.zeros(f.input_dim), None, 0)]
    if not sg:
        sg = [_Stage(_eye(g.input_dim), np.zeros(g.input_dim), None, 0)]
    n = max(len(sf), len(sg))
    sf = _pad_stages(sf, n - len(sf), f.input_dim)
    sg = _pad_stages(sg, n - len(sg), g.input_dim)
    merged = [_merge(a, b, i == 0) for i, (a, b) in enumerate(zip(sf, sg))]
    return Network(
        f.input_dim,
        f.output_dim + g.output_dim,
        _from_stages(merged),
        np.concatenate([f.final_bias, g.final_bias]),
    )


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------

# Dense "w" is written when at least this fraction of entries is nonzero.
_DENSE_THRESHOLD = 0.25


def _hex(values) -> list:
    return [float(v).hex() for v in np.asarray(values, dtype=np.float64).reshape(-1)]


def _kind_to_json(kind: ActivationKind):
    if kind.tag == "polynomial":
        return {"tag": "polynomial", "coefficients": _hex(kind.coefficients)}
    return kind.tag


def serialize(net: Network) -> str:
    """JSON document with every float written as an exact hex-float string."""
    layers = []
    for layer in net.layers:
        if isinstance(layer, Affine):
            M = layer.matrix
            out, inp = M.shape
            entry: dict = {"type": "affine"}
            if out * inp and M.nnz / (out * inp) >= _DENSE_THRESHOLD:
                entry["w"] = [_hex(row) for row in M.toarray()]
            else:
                coo = M.tocoo()
                entry["shape"] = [out, inp]
                entry["w_sparse"] = {
                    "rows": coo.row.tolist(),
                    "cols": coo.col.tolist(),
                    "vals": _hex(coo.data),
                }
            entry["b"] = _hex(layer.bias)
            layers.append(entry)
        elif isinstance(layer, Activation):
            layers.append({"type": "act", "kinds": [_kind_to_json(k) for k in layer.kinds]})
        else:
            layers.append({"type": "pool"})
    doc = {
        "input_dim": net.input_dim,
        "output_dim": net.output_dim,
        "layers": layers,
        "final_bias": _hex(net.final_bias),
    }
    return json.dumps(doc, separators=(",", ":"))


def _float(value, path) -> float:
    try:
        if isinstance(value, str):
            return float.fromhex(value)
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            return float(value)
    except ValueError:
        pass
    raise DocumentError(path, f"expected a number or hex-float string, got {value!r}")


def _floats(values, path) -> np.ndarray:
    if not isinstance(values, list):
        raise DocumentError(path, "expected a list")
    return np.array([_float(v, f"{path}[{i}]") for i, v in enumerate(values)], dtype=np.float64)


def _kind_from_json(value, path) -> ActivationKind:
    try:
        if isinstance(value, dict):
            coefs = _floats(value.get("coefficients"), f"{path}.coefficients")
            return ActivationKind(value.get("tag", "polynomial"), tuple(coefs))
        return ActivationKind(value)
    except (ValueError, TypeError) as exc:
        if isinstance(exc, DocumentError):
            raise
        raise DocumentError(path, str(exc)) from None


def _int(doc, key, path) -> int:
    v = doc.get(key)
    if not isinstance(v, int) or isinstance(v, bool):
        raise DocumentError(f"{path}.{key}", "expected an integer")
    return v


def deserialize(doc) -> Network:
    """Inverse of :func:`serialize`; accepts a JSON string or parsed dict."""
    if isinstance(doc, (str, bytes)):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise DocumentError("$", f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise DocumentError("$", "expected an object")
    d = _int(doc, "input_dim", "$")
    D = _int(doc, "output_dim", "$")
    raw_layers = doc.get("layers")
    if not isinstance(raw_layers, list):
        raise DocumentError("$.layers", "expected a list")
    layers = []
    for i, entry in enumerate(raw_layers):
        path = f"$.layers[{i}]"
        if not isinstance(entry, dict):
            raise DocumentError(path, "expected an object")
        kind = entry.get("type")
        if kind == "affine":
            b = _floats(entry.get("b"), f"{path}.b")
            if "w" in entry:
                rows = entry["w"]
                if not isinstance(rows, list):
                    raise DocumentError(f"{path}.w", "expected a list of rows")
                W = np.array([_floats(r, f"{path}.w[{j}]") for j, r in enumerate(rows)], dtype=np.float64)
                if W.size == 0:
                    W = np.zeros((len(rows), 0))
                elif W.ndim != 2:
                    raise DocumentError(f"{path}.w", "rows have unequal lengths")
            elif "w_sparse" in entry:
                shape = entry.get("shape")
                sparse = entry["w_sparse"]
                if not (isinstance(shape, list) and len(shape) == 2 and isinstance(sparse, dict)):
                    raise DocumentError(path, "sparse weights need 'shape' and 'w_sparse'")
                vals = _floats(sparse.get("vals"), f"{path}.w_sparse.vals")
                try:
                    W = sp.csr_matrix((vals, (sparse["rows"], sparse["cols"])), shape=tuple(shape))
                except (KeyError, ValueError, TypeError) as exc:
                    raise DocumentError(f"{path}.w_sparse", str(exc)) from None
            else:
                raise DocumentError(path, "affine layer without weights")
            try:
                layers.append(Affine(W, b))
            except (StructuralError, ValueError) as exc:
                raise DocumentError(path, str(exc)) from None
        elif kind == "act":
            kinds = entry.get("kinds")
            if not isinstance(kinds, list):
                raise DocumentError(f"{path}.kinds", "expected a list")
            layers.append(Activation([_kind_from_json(k, f"{path}.kinds[{j}]") for j, k in enumerate(kinds)]))
        elif kind == "pool":
            layers.append(Pool())
        else:
            raise DocumentError(f"{path}.type", f"unknown layer type {kind!r}")
    c = _floats(doc.get("final_bias", [0.0] * D), "$.final_bias")
    try:
        return Network(d, D, layers, c)
    except StructuralError as exc:
        idx = exc.layer_index
        raise DocumentError("$" if idx is None else f"$.layers[{idx}]", str(exc)) from None
