"""Command line entry point ``supportnet``.

Every subcommand exits 0 when its checks pass, 1 when a check fails and 2 on
bad input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from .adjust import adjust_support
from .baselines import separation_report
from .geometry import Box, diameter, estimate_support_box, metric_capacity
from .masks import MaskSpec, build_cube_mask, delta_for_epsilon
from .network import deserialize, serialize, stats
from .pipeline import load_certificate, load_config, resolve_target, run_pipeline, verify_network, write_report
from .quadrature import QuadratureGrid, annulus_l1, difference, l1_loc_distance, l1_norm, sup_norm


def _dump(doc) -> None:
    print(json.dumps(doc, indent=2, sort_keys=True))


def _load_net(path):
    return deserialize(Path(path).read_text())


def cmd_mask(args) -> int:
    delta = args.delta if args.delta is not None else delta_for_epsilon(args.d, args.n, args.epsilon)
    net = build_cube_mask(MaskSpec(args.d, args.n, delta, args.D))
    Path(args.out).write_text(serialize(net))
    _dump({"delta": delta, "outer_halfwidth": MaskSpec(args.d, args.n, delta).outer_halfwidth,
           "stats": stats(net).as_dict(), "out": args.out})
    return 0


def cmd_adjust(args) -> int:
    net = _load_net(args.net)
    g, cert = adjust_support(net, args.n, args.epsilon, args.sup_bound)
    Path(args.out).write_text(serialize(g))
    doc = cert.to_dict()
    Path(args.cert).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    _dump(doc)
    return 0 if cert.architecture_ok else 1


def cmd_approximate(args) -> int:
    cfg = load_config(args.config)
    report = run_pipeline(cfg)
    out = write_report(report, args.out)
    sys.stdout.write((out / "report.csv").read_text())
    return 0 if report.all_certified else 1


def cmd_verify(args) -> int:
    net = _load_net(args.net)
    cert = load_certificate(args.cert)
    spec = resolve_target(args.target, net.input_dim) if args.target else None
    result = verify_network(net, spec, cert, seed=args.seed)
    print(result.summary())
    return 0 if result.passed else 1


def _read_points(path) -> np.ndarray:
    rows = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row:
                continue
            try:
                rows.append([float(v) for v in row])
            except ValueError:
                if rows:
                    raise
    if not rows:
        raise ValueError(f"{path}: no numeric rows")
    return np.array(rows, dtype=np.float64)


def cmd_capacity(args) -> int:
    P = _read_points(args.points)
    _dump({"count": int(P.shape[0]), "dimension": int(P.shape[1]),
           "capacity": metric_capacity(P, trials=args.trials), "diameter": diameter(P)})
    return 0


def cmd_supportbox(args) -> int:
    spec = resolve_target(args.target, args.d)
    scan = Box(spec.support_box.center, spec.support_box.halfwidths + 1.0)
    est = estimate_support_box(spec, scan, grid_per_axis=args.grid, tol=args.tol)
    _dump({"target": spec.label, "n_f": est.n_f, "effectively_zero": est.effectively_zero,
           "tight_box": None if est.tight_box is None else est.tight_box.to_dict()})
    return 0


def cmd_norm(args) -> int:
    net = _load_net(args.net)
    d = net.input_dim
    if args.net2:
        other = _load_net(args.net2)
    elif args.target:
        other = resolve_target(args.target, d)
    else:
        other = None
    f = net if other is None else difference(net, other)
    box = Box.cube(d, args.halfwidth)
    doc = {"kind": args.kind}
    if args.kind == "l1":
        value, err = l1_norm(f, QuadratureGrid(box, args.grid, args.mode, args.samples, args.seed))
        doc.update(value=value, uncertainty=err, box=box.to_dict())
    elif args.kind == "sup":
        doc.update(value=sup_norm(f, QuadratureGrid(box, args.grid, "tensor-closed")), box=box.to_dict())
    elif args.kind == "annulus":
        doc.update(value=annulus_l1(f, args.inner, args.outer, d, args.grid), inner=args.inner, outer=args.outer)
    else:
        if other is None:
            other = lambda X: np.zeros((X.shape[0], net.output_dim))  # noqa: E731
        res = l1_loc_distance(net, other, args.terms, d, samples=args.samples, seed=args.seed)
        doc.update(value=res.value, tail_bound=res.tail_bound, summands=list(res.summands),
                   integrals=list(res.integrals))
    _dump(doc)
    return 0


def cmd_separate(args) -> int:
    spec = resolve_target(args.target, args.d)
    catalog = [c.strip() for c in args.catalog.split(",") if c.strip()]
    report = separation_report(spec, args.epsilon, catalog, hidden_width=args.hidden_width, seed=args.seed)
    buf = io.StringIO()
    fields = ["model", "sup_error", "l1_error", "tail_mass", "certified", "nontrivial"]
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for row in report["rows"]:
        writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    if args.out:
        Path(args.out).write_text(buf.getvalue())
    sys.stdout.write(buf.getvalue())
    if report["trivial_target"]:
        print("trivial target: separation not asserted")
        return 0
    print("separated" if report["separated"] else "NOT separated")
    return 0 if report["separated"] else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="supportnet", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("mask", help="write a cube mask network")
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--n", type=float, required=True)
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--delta", type=float)
    g.add_argument("--epsilon", type=float, help="annulus volume; delta is solved from it")
    s.add_argument("--D", type=int, default=1)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_mask)

    s = sub.add_parser("adjust", help="force a relu network to vanish outside a cube")
    s.add_argument("--net", required=True)
    s.add_argument("--n", type=float, required=True)
    s.add_argument("--epsilon", type=float, required=True)
    s.add_argument("--sup-bound", type=float, default=None)
    s.add_argument("--out", required=True)
    s.add_argument("--cert", required=True)
    s.set_defaults(func=cmd_adjust)

    s = sub.add_parser("approximate", help="run the pipeline from a config file")
    s.add_argument("--config", required=True)
    s.add_argument("--out", default=None, help="output directory (overrides output_dir)")
    s.set_defaults(func=cmd_approximate)

    s = sub.add_parser("verify", help="re-check a network against its certificate")
    s.add_argument("--net", required=True)
    s.add_argument("--cert", required=True)
    s.add_argument("--target", default=None)
    s.add_argument("--seed", type=int, default=20261016)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("capacity", help="metric capacity and diameter of a CSV point cloud")
    s.add_argument("--points", required=True)
    s.add_argument("--trials", type=int, default=64)
    s.set_defaults(func=cmd_capacity)

    s = sub.add_parser("supportbox", help="estimate n_f for a target")
    s.add_argument("--target", required=True)
    s.add_argument("--d", type=int, default=2)
    s.add_argument("--tol", type=float, default=1e-9)
    s.add_argument("--grid", type=int, default=101)
    s.set_defaults(func=cmd_supportbox)

    s = sub.add_parser("norm", help="norms and distances of serialized networks")
    s.add_argument("--kind", choices=["l1", "sup", "l1loc", "annulus"], required=True)
    s.add_argument("--net", required=True)
    g = s.add_mutually_exclusive_group()
    g.add_argument("--net2")
    g.add_argument("--target")
    s.add_argument("--grid", type=int, default=64, help="points per axis")
    s.add_argument("--mode", choices=["tensor-midpoint", "monte-carlo"], default="tensor-midpoint")
    s.add_argument("--samples", type=int, default=100_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--halfwidth", type=float, default=2.0, help="box [-h, h]^d for l1 and sup")
    s.add_argument("--inner", type=float, default=1.0)
    s.add_argument("--outer", type=float, default=2.0)
    s.add_argument("--terms", type=int, default=8)
    s.set_defaults(func=cmd_norm)

    s = sub.add_parser("separate", help="compare relu+pool with analytic fits")
    s.add_argument("--target", required=True)
    s.add_argument("--d", type=int, default=2)
    s.add_argument("--epsilon", type=float, default=0.25)
    s.add_argument("--catalog", default="sigmoid,tanh,swish,poly:8")
    s.add_argument("--hidden-width", type=int, default=64)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_separate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
