import dataclasses
import json
import math

import numpy as np
import pytest

from supportnet import __version__
from supportnet.adjust import adjust_support
from supportnet.geometry import Box
from supportnet.network import RELU, Activation, Affine, Network, deserialize, serialize, stats
from supportnet.pipeline import (
    PipelineConfig,
    certified_approximation,
    load_certificate,
    load_config,
    theory_constants,
    theory_depth_bound,
    theory_width_bound,
    resolve_target,
    run_pipeline,
    support_formula,
    verify_network,
    write_report,
)
from supportnet.targets import get_target

FAST = dict(sup_grid=61, l1_grid=40, exterior_samples=2000)


class TestConfig:
    def test_parse(self, tmp_path):
        path = tmp_path / "run.toml"
        path.write_text('# demo\ntarget = "boxdist"\nd = 2\nepsilons = [0.5, 0.25]  # two rows\nseed = 7\n')
        cfg = load_config(path, env={})
        assert cfg.target == "boxdist" and cfg.epsilons == (0.5, 0.25) and cfg.seed == 7

    def test_single_epsilon(self, tmp_path):
        path = tmp_path / "run.toml"
        path.write_text("epsilons = 0.3\n")
        assert load_config(path, env={}).epsilons == (0.3,)

    def test_env_overrides_seed(self, tmp_path):
        path = tmp_path / "run.toml"
        path.write_text("seed = 1\n")
        assert load_config(path, env={"SUPPORTNET_SEED": "99"}).seed == 99

    def test_unknown_key(self, tmp_path):
        path = tmp_path / "run.toml"
        path.write_text("epsilon = 0.1\n")
        with pytest.raises(ValueError, match="unknown key"):
            load_config(path, env={})

    @pytest.mark.parametrize("eps", [(), (0.0,), (0.1, 0.2), (math.nan,)])
    def test_bad_epsilons(self, eps):
        with pytest.raises(ValueError):
            PipelineConfig(epsilons=eps)

    def test_digest_tracks_content(self):
        assert PipelineConfig().digest() == PipelineConfig().digest()
        assert PipelineConfig(seed=1).digest() != PipelineConfig().digest()


def test_resolve_target(tmp_path):
    assert resolve_target("bump", 2).label == "bump"
    path = tmp_path / "t.csv"
    path.write_text("x0,v\n0,0\n0.5,1\n1,0\n")
    assert resolve_target(f"csv:{path}").d == 1
    assert resolve_target(str(path)).d == 1
    with pytest.raises(KeyError):
        resolve_target("nothing")


class TestFormulas:
    def test_constants_d2(self):
        C = theory_constants(2, 1)
        assert C == {"C1": 4.0 * 4 + 6, "C2": 6, "C3": 4, "C4": 2 * 2 + 3**5}

    def test_width_bound(self):
        # N = 1: C3 + C4 * max(d * 1, 2)
        assert theory_width_bound(2, 1, 1) == 4 + 247 * 2
        assert theory_width_bound(2, 1, 9) == 4 + 247 * 10

    def test_depth_bound_decreases_in_epsilon(self):
        args = dict(d=2, D=1, N=1, capacity=12, diam=2.8, lipschitz=2.0)
        assert theory_depth_bound(epsilon=0.1, **args) > theory_depth_bound(epsilon=0.5, **args)
        assert theory_depth_bound(epsilon=0.5, **args) > theory_constants(2, 1)["C2"]

    def test_support_formula(self):
        assert support_formula(2, 1, 0.5) == pytest.approx(math.sqrt(1 + 0.5 / 8))
        assert support_formula(1, 3, 0.4) == pytest.approx(3.1)


def test_certified_approximation_bump():
    spec = get_target("bump", 2)
    g, cert, plan = certified_approximation(spec, 0.5, 1)
    s = stats(g)
    assert cert.architecture_ok and s.pool_count == 2
    assert cert.outer_halfwidth <= support_formula(2, 1, 0.5) * (1 + 1e-15)
    X = Box.cube(2, 1.0).grid(81)
    assert np.max(np.abs(g(X) - spec(X))) <= 0.5
    assert plan.predicted_sup_error <= 0.25


@pytest.mark.parametrize("name", ["bump", "boxdist", "hinges", "bump_vec"])
def test_catalog_architecture(name):
    _, cert, _ = certified_approximation(get_target(name, 2), 0.5, 1)
    assert cert.stats_after.width <= max(2 * 1 + 2, cert.D) + cert.stats_before.width
    assert cert.stats_after.depth <= 2 + 3 * 2 + cert.stats_before.depth


@pytest.fixture(scope="module")
def small_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    cfg = PipelineConfig(epsilons=(0.5, 0.25), output_dir=str(out), **FAST)
    report = run_pipeline(cfg)
    write_report(report)
    return cfg, report, out


class TestRun:
    def test_rows_certified(self, small_run):
        _, report, _ = small_run
        assert report.all_certified and report.n_f == 1
        errs = [r["sup_error_measured"] for r in report.rows]
        assert errs[1] <= errs[0]
        for r in report.rows:
            assert r["sup_error_measured"] <= r["eps"]
            assert r["support_outer_halfwidth"] <= r["support_limit"] * (1 + 1e-15)
            assert r["pool_layers"] == 2

    def test_files(self, small_run):
        cfg, report, out = small_run
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["version"] == __version__
        assert manifest["config_hash"] == cfg.digest()
        assert manifest["files"][0] == {"net": "net_0.json", "cert": "cert_0.json"}
        header = (out / "report.csv").read_text().splitlines()[0]
        assert header.startswith("eps,status,certified")
        net = deserialize(json.loads((out / "net_0.json").read_text()))
        assert serialize(net) == (out / "net_0.json").read_text()

    def test_byte_stable(self, small_run, tmp_path):
        cfg, _, out = small_run
        again = write_report(run_pipeline(cfg), tmp_path)
        for name in ("report.csv", "manifest.json", "net_1.json", "cert_1.json"):
            assert (again / name).read_bytes() == (out / name).read_bytes()

    def test_workers_same_result(self, small_run):
        cfg, report, _ = small_run
        par = run_pipeline(dataclasses.replace(cfg, workers=2))
        assert par.rows == report.rows

    def test_verify_pass(self, small_run):
        _, _, out = small_run
        net = deserialize(json.loads((out / "net_0.json").read_text()))
        cert = load_certificate(out / "cert_0.json")
        result = verify_network(net, get_target("bump", 2), cert, samples=2000)
        assert result.passed, result.summary()
        assert result.summary().endswith("PASS")

    def test_verify_detects_tampered_halfwidth(self):
        # a target that is nonzero up to the cube boundary, so the mask ramp is visible
        f = Network(2, 1, [Affine(np.zeros((1, 2)), [1.0]), Activation([RELU])])
        g, cert = adjust_support(f, 1.0, 0.5, sup_bound=1.0)
        doc = cert.to_dict()
        assert verify_network(g, None, doc, samples=2000).passed
        doc["outer_halfwidth"] = cert.inner_n + 0.3 * cert.delta
        result = verify_network(g, None, doc, samples=2000)
        assert not result.passed
        assert "FAIL exterior-zero" in result.summary()

    def test_verify_detects_wrong_target(self, small_run):
        _, _, out = small_run
        net = deserialize(json.loads((out / "net_0.json").read_text()))
        cert = load_certificate(out / "cert_0.json")
        result = verify_network(net, get_target("boxdist", 2), cert, samples=2000)
        assert dict((n, ok) for n, ok, _ in result.checks)["sup-error"] is False


def test_zero_target_run(tmp_path):
    report = run_pipeline(PipelineConfig(target="zero", epsilons=(0.5,), **FAST))
    row = report.rows[0]
    assert row["certified"] and row["sup_error_measured"] == 0.0
    assert row["grid_points_per_axis"] == 2


def test_infeasible_row_continues():
    cfg = PipelineConfig(epsilons=(0.5, 1e-4), max_nodes=5000, **FAST)
    report = run_pipeline(cfg)
    assert report.rows[0]["certified"]
    assert report.rows[1]["status"] == "infeasible" and not report.rows[1]["certified"]
    assert report.networks[1] is None and not report.all_certified


def test_certificate_requires_fields(tmp_path):
    path = tmp_path / "c.json"
    path.write_text("{}")
    with pytest.raises(ValueError, match="outer_halfwidth"):
        load_certificate(path)
