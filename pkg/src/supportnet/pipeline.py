"""End-to-end runs: interpolate at ε/2, adjust support with budget ε/2, measure, report."""

from __future__ import annotations

import configparser
import csv
import dataclasses
import hashlib
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .adjust import adjust_support
from .exceptions import BudgetExceededError
from .geometry import Box, diameter, estimate_support_box, metric_capacity
from .interpolation import approximate_lipschitz
from .network import Affine, Network, serialize, stats
from .quadrature import QuadratureGrid, l1_norm, pointwise_norm, difference
from .targets import CATALOG, FunctionSpec, get_target, load_tabulated

__all__ = [
    "PipelineConfig",
    "load_config",
    "resolve_target",
    "theory_constants",
    "theory_width_bound",
    "theory_depth_bound",
    "support_formula",
    "ApproxReport",
    "certified_approximation",
    "run_pipeline",
    "write_report",
    "exterior_points",
    "VerificationResult",
    "verify_network",
]

SEED_ENV = "SUPPORTNET_SEED"
# relative slack for comparing computed doubles with closed-form bounds
FORMULA_RTOL = 4 * np.finfo(float).eps


@dataclass(frozen=True)
class PipelineConfig:
    target: str = "bump"
    d: int = 2
    epsilons: tuple = (0.5, 0.25, 0.125)
    width_param: int = 1
    max_nodes: int = 1_000_000
    max_quadrature_points: int = 4_000_000
    seed: int = 0
    output_dir: str = "supportnet-out"
    normalization: str = "box"
    workers: int = 1
    sup_grid: int = 201
    l1_grid: int = 200
    exterior_samples: int = 10_000

    def __post_init__(self):
        eps = tuple(float(e) for e in self.epsilons)
        object.__setattr__(self, "epsilons", eps)
        if not eps:
            raise ValueError("epsilons must not be empty")
        if any(not (e > 0 and math.isfinite(e)) for e in eps):
            raise ValueError(f"epsilons must be positive and finite, got {eps}")
        if any(b > a for a, b in zip(eps, eps[1:])):
            raise ValueError(f"epsilons must be non-increasing, got {eps}")
        if self.width_param < 1:
            raise ValueError("width_param must be a positive integer")

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["epsilons"] = list(self.epsilons)
        return out

    def digest(self) -> str:
        text = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()


def _parse_value(raw: str):
    text = raw.strip()
    if text.startswith("[") and text.endswith("]"):
        return [_parse_value(v) for v in text[1:-1].split(",") if v.strip()]
    if len(text) >= 2 and text[0] == text[-1] and text[0] in "\"'":
        return text[1:-1]
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    if "," in text:
        return [_parse_value(v) for v in text.split(",") if v.strip()]
    return text


def load_config(path, env=None) -> PipelineConfig:
    """Read a flat ``key = value`` file (TOML-like scalars and lists, ``#`` comments).

    ``SUPPORTNET_SEED`` in the environment overrides ``seed``.
    """
    env = os.environ if env is None else env
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",), comment_prefixes=("#", ";"))
    parser.optionxform = str
    parser.read_string("[run]\n" + Path(path).read_text())
    known = {f.name for f in dataclasses.fields(PipelineConfig)}
    values = {}
    for key, raw in parser["run"].items():
        if key not in known:
            raise ValueError(f"{path}: unknown key {key!r}")
        values[key] = _parse_value(raw)
    if "epsilons" in values and not isinstance(values["epsilons"], list):
        values["epsilons"] = [values["epsilons"]]
    if SEED_ENV in env:
        values["seed"] = int(env[SEED_ENV])
    for key in ("target", "output_dir", "normalization"):
        if key in values:
            values[key] = str(values[key])
    return PipelineConfig(**values)


def resolve_target(name: str, d: int = 2) -> FunctionSpec:
    """Catalog name, or a path to a tabulated CSV (optionally prefixed ``csv:``)."""
    if name.startswith("csv:"):
        return load_tabulated(name[4:])
    if name in CATALOG:
        return get_target(name, d)
    if name.endswith(".csv") and Path(name).exists():
        return load_tabulated(name)
    raise KeyError(f"unknown target {name!r}; use one of {sorted(CATALOG)} or a CSV path")


def theory_constants(d: int, D: int, c: float = 1.0) -> dict:
    return {
        "C1": c * 2.0**d * D ** (3.0 / d) * d**d + 3 * d,
        "C2": 2 * d + 2,
        "C3": max(d * (d - 1) + 2, D),
        "C4": d * (D + 1) + 3 ** (d + 3),
    }


def _int_root(N: int, d: int) -> int:
    r = int(round(N ** (1.0 / d)))
    while r**d > N:
        r -= 1
    while (r + 1) ** d <= N:
        r += 1
    return r


def theory_width_bound(d: int, D: int, N: int) -> int:
    C = theory_constants(d, D)
    return C["C3"] + C["C4"] * max(d * _int_root(N, d), N + 1)


def theory_depth_bound(d: int, D: int, N: int, epsilon: float, capacity: int, diam: float,
                      lipschitz: float, c: float = 1.0) -> float:
    """Theoretical depth bound; ``c`` is an unspecified absolute constant (placeholder 1)."""
    C = theory_constants(d, D, c)
    scale = epsilon ** (-d / 2) / (N * math.sqrt(math.log(N + 2, 3)))
    return scale * (math.log2(max(capacity, 1)) * diam * lipschitz) ** d * C["C1"] + C["C2"]


def support_formula(d: int, n_f: float, epsilon: float) -> float:
    """``(2^(-d-1) epsilon + n_f^d)^(1/d)``: the certified half-width limit for budget ``epsilon / 2``."""
    return (2.0 ** (-d - 1) * epsilon + n_f**d) ** (1.0 / d)


def exterior_points(d: int, outer: float, count: int, rng) -> np.ndarray:
    """Points with ``outer <= ||x||_inf <= outer + 1``: random shell points plus points on the face."""
    X = rng.uniform(-(outer + 1.0), outer + 1.0, size=(count, d))
    axis = rng.integers(0, d, size=count)
    sign = rng.choice([-1.0, 1.0], size=count)
    radius = rng.uniform(outer, outer + 1.0, size=count)
    radius[: count // 10] = outer
    X[np.arange(count), axis] = sign * radius
    return X


@dataclass
class ApproxReport:
    config: PipelineConfig
    n_f: int
    rows: list
    networks: list = field(default_factory=list)
    certificates: list = field(default_factory=list)

    @property
    def all_certified(self) -> bool:
        return all(r["certified"] for r in self.rows)


CSV_COLUMNS = [
    "eps", "status", "certified", "sup_error_measured", "l1_error_measured", "support_outer_halfwidth",
    "support_limit", "grid_points_per_axis", "interp_bound", "width", "depth", "pool_layers", "params",
    "adjust_width_bound", "adjust_depth_bound", "theory_width_bound", "theory_depth_bound", "diagnostic",
]


def _support_sample(spec: FunctionSpec, n_f: int, per_axis: int = 41) -> np.ndarray:
    X = Box.cube(spec.d, n_f).grid(per_axis)
    keep = pointwise_norm(spec, X) > 0
    return X[keep] if keep.any() else X[:1]


def certified_approximation(spec: FunctionSpec, epsilon: float, n_f: int, normalization: str = "box",
                            max_nodes: int = 1_000_000):
    """Interpolate to sup error ``epsilon / 2`` on ``[-n_f, n_f]^d``, then adjust with L1 budget ``epsilon / 2``.

    Returns ``(network, certificate, plan)``.
    """
    inner = dataclasses.replace(spec, support_box=Box.cube(spec.d, n_f))
    interp, plan = approximate_lipschitz(inner, epsilon / 2, normalization, max_nodes, nested=True, verify=False)
    readout = interp.layers[-1]
    assert isinstance(readout, Affine)
    # tents are non-negative and sum to at most 1, so node values bound the interpolant
    sup_bound = float(np.max(np.linalg.norm(readout.weights, axis=0)))
    g, cert = adjust_support(interp, float(n_f), epsilon / 2, sup_bound=sup_bound)
    return g, cert, plan


def _run_row(spec: FunctionSpec, n_f: int, eps: float, cfg: PipelineConfig, seed, geometry) -> tuple:
    d, D = spec.d, spec.D
    row = {"eps": eps, "status": "ok", "certified": False, "diagnostic": ""}
    try:
        g, cert, plan = certified_approximation(spec, eps, n_f, cfg.normalization, cfg.max_nodes)
    except BudgetExceededError as exc:
        row.update(status="infeasible", diagnostic=str(exc))
        return row, None, None
    st = stats(g)
    rng = np.random.default_rng(seed)

    per_axis = max(2, min(cfg.sup_grid, int(cfg.max_quadrature_points ** (1.0 / d))))
    Xs = Box.cube(d, n_f).grid(per_axis)
    sup_err = float(np.max(pointwise_norm(difference(g, spec), Xs)))
    l1_axis = max(1, min(cfg.l1_grid, int(cfg.max_quadrature_points ** (1.0 / d))))
    l1_err, _ = l1_norm(difference(g, spec), QuadratureGrid(Box.cube(d, n_f + 1.0), l1_axis,
                                                           max_points=cfg.max_quadrature_points))
    Xe = exterior_points(d, cert.outer_halfwidth, cfg.exterior_samples, rng)
    exterior_zero = bool(np.all(g(Xe) == 0.0))

    limit = support_formula(d, n_f, eps)
    capacity, diam = geometry
    checks = {
        "sup": sup_err <= eps,
        "exterior": exterior_zero,
        "support": cert.outer_halfwidth <= limit * (1 + FORMULA_RTOL),
        "architecture": cert.architecture_ok,
        "pools": st.pool_count == (d.bit_length() - 1) + 1,
    }
    failed = [k for k, ok in checks.items() if not ok]
    row.update(
        certified=not failed,
        diagnostic="" if not failed else "failed: " + ",".join(failed),
        sup_error_measured=sup_err,
        l1_error_measured=l1_err,
        support_outer_halfwidth=cert.outer_halfwidth,
        support_limit=limit,
        grid_points_per_axis=plan.grid_points_per_axis,
        interp_bound=plan.predicted_sup_error,
        width=st.width,
        depth=st.depth,
        pool_layers=st.pool_count,
        params=st.param_count,
        adjust_width_bound=cert.width_bound,
        adjust_depth_bound=cert.depth_bound,
        theory_width_bound=theory_width_bound(d, D, cfg.width_param),
        theory_depth_bound=theory_depth_bound(d, D, cfg.width_param, eps, capacity, diam, spec.lipschitz),
    )
    cert_doc = cert.to_dict()
    cert_doc.update(epsilon=eps, n_f=n_f, target=spec.label, sup_error_measured=sup_err,
                    interpolation=plan.to_dict())
    return row, g, cert_doc


def run_pipeline(cfg: PipelineConfig, spec: FunctionSpec | None = None) -> ApproxReport:
    """One row per ε; budget exhaustion marks a row infeasible and the run continues."""
    spec = resolve_target(cfg.target, cfg.d) if spec is None else spec
    d = spec.d
    scan = Box(spec.support_box.center, spec.support_box.halfwidths + 1.0)
    support = estimate_support_box(spec, scan, grid_per_axis=max(3, min(101, int(1e6 ** (1.0 / d)))))
    n_f = support.n_f
    sample = _support_sample(spec, n_f)
    geometry = (metric_capacity(sample, trials=16), diameter(sample))
    seeds = np.random.SeedSequence(cfg.seed).spawn(len(cfg.epsilons))

    def job(i):
        return _run_row(spec, n_f, cfg.epsilons[i], cfg, seeds[i], geometry)

    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            results = list(pool.map(job, range(len(cfg.epsilons))))
    else:
        results = [job(i) for i in range(len(cfg.epsilons))]
    report = ApproxReport(cfg, n_f, [r[0] for r in results])
    report.networks = [r[1] for r in results]
    report.certificates = [r[2] for r in results]
    return report


def _csv_text(rows) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n", extrasaction="ignore")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    return buf.getvalue()


def write_report(report: ApproxReport, out_dir=None) -> Path:
    """Write ``report.csv``, ``manifest.json`` and one ``net_i.json``/``cert_i.json`` per feasible row."""
    out = Path(report.config.output_dir if out_dir is None else out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.csv").write_text(_csv_text(report.rows))
    files = []
    for i, (net, cert) in enumerate(zip(report.networks, report.certificates)):
        if net is None:
            files.append(None)
            continue
        (out / f"net_{i}.json").write_text(serialize(net))
        (out / f"cert_{i}.json").write_text(json.dumps(cert, indent=2, sort_keys=True) + "\n")
        files.append({"net": f"net_{i}.json", "cert": f"cert_{i}.json"})
    manifest = {
        "tool": "supportnet",
        "version": __version__,
        "config": report.config.to_dict(),
        "config_hash": report.config.digest(),
        "n_f": report.n_f,
        "rows": report.rows,
        "files": files,
        "theory_depth_bound_note": "placeholder-constant: absolute constant c set to 1",
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return out


@dataclass
class VerificationResult:
    checks: list

    @property
    def passed(self) -> bool:
        return all(ok for _, ok, _ in self.checks)

    def summary(self) -> str:
        lines = [f"{'PASS' if ok else 'FAIL'} {name}: {detail}" for name, ok, detail in self.checks]
        lines.append("PASS" if self.passed else "FAIL")
        return "\n".join(lines)


def verify_network(net: Network, spec: FunctionSpec | None, cert: dict, seed: int = 20261016,
                   samples: int = 10_000) -> VerificationResult:
    """Re-check a certificate against a network from scratch.

    Exterior zeros beyond ``outer_halfwidth``, the sup error on the inner cube
    (when ``epsilon`` and a target are given), the bound ``||g|| <= sup bound``
    on the transition annulus, and the recorded architecture.
    """
    rng = np.random.default_rng(seed)
    d = net.input_dim
    checks = []
    outer = float(cert["outer_halfwidth"])
    inner = float(cert["inner_n"])
    Xe = exterior_points(d, outer, samples, rng)
    nonzero = int(np.count_nonzero(np.any(net(Xe) != 0.0, axis=1)))
    checks.append(("exterior-zero", nonzero == 0, f"{nonzero} of {samples} points beyond {outer!r} are nonzero"))

    if spec is not None and "epsilon" in cert:
        eps = float(cert["epsilon"])
        Xi = np.vstack([Box.cube(d, inner).sample(samples, rng),
                        Box.cube(d, inner).grid(max(2, int(40_000 ** (1.0 / d))))])
        err = float(np.max(pointwise_norm(difference(net, spec), Xi)))
        checks.append(("sup-error", err <= eps, f"max error {err:.6g} vs epsilon {eps:.6g}"))

    if outer > inner:
        width = outer - inner
        Xa = Box.cube(d, outer).sample(samples, rng)
        axis = rng.integers(0, d, size=samples)
        Xa[np.arange(samples), axis] = rng.choice([-1.0, 1.0], size=samples) * (inner + width * rng.uniform(size=samples))
        top = float(np.max(pointwise_norm(net, Xa)))
        bound = float(cert["sup_bound_effective"])
        checks.append(("annulus-bound", top <= bound * (1 + 1e-9), f"max on annulus {top:.6g} vs bound {bound:.6g}"))
        measure = float(cert["annulus_measure"])
        budget = float(cert["l1_budget"])
        ok = measure * bound <= budget * (1 + 1e-9)
        checks.append(("l1-budget", ok, f"annulus measure x bound {measure * bound:.6g} vs budget {budget:.6g}"))

    st = stats(net)
    recorded = cert.get("stats_after")
    if recorded is not None:
        same = recorded == st.as_dict()
        checks.append(("architecture", same, f"network {st.as_dict()} vs certificate {recorded}"))
    if "width_bound" in cert:
        ok = st.width <= cert["width_bound"] and st.depth <= cert["depth_bound"]
        checks.append(("adjust-bounds", ok, f"width {st.width} <= {cert['width_bound']}, "
                                            f"depth {st.depth} <= {cert['depth_bound']}"))
    return VerificationResult(checks)


def load_certificate(path) -> dict:
    doc = json.loads(Path(path).read_text())
    for key in ("outer_halfwidth", "inner_n"):
        if key not in doc:
            raise ValueError(f"{path}: certificate lacks {key!r}")
    return doc
