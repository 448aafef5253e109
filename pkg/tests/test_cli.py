import json

import numpy as np
import pytest

from supportnet.cli import main
from supportnet.network import RELU, Activation, Affine, Network, deserialize, serialize


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def ramp(tmp_path):
    path = tmp_path / "ramp.json"
    path.write_text(serialize(Network(2, 1, [Affine([[1.0, 0.5]], [2.0]), Activation([RELU])])))
    return path


def test_mask(tmp_path, capsys):
    out = tmp_path / "mask.json"
    code, text, _ = run(capsys, "mask", "--d", "2", "--n", "1", "--delta", "0.5", "--out", str(out))
    assert code == 0
    doc = json.loads(text)
    assert doc["delta"] == 0.5 and doc["stats"]["pool_count"] == 1
    net = deserialize(out.read_text())
    assert net(np.array([[0.0, 0.0], [2.0, 0.0]]))[:, 0].tolist() == [1.0, 0.0]


def test_mask_from_epsilon(tmp_path, capsys):
    code, text, _ = run(capsys, "mask", "--d", "1", "--n", "1", "--epsilon", "0.5",
                        "--out", str(tmp_path / "m.json"))
    assert code == 0 and json.loads(text)["delta"] == pytest.approx(0.25)


def test_adjust_then_verify(tmp_path, ramp, capsys):
    g, c = tmp_path / "g.json", tmp_path / "c.json"
    code, text, _ = run(capsys, "adjust", "--net", str(ramp), "--n", "1", "--epsilon", "0.2",
                        "--out", str(g), "--cert", str(c))
    assert code == 0 and json.loads(text)["sup_bound_source"] == "estimated"
    code, text, _ = run(capsys, "verify", "--net", str(g), "--cert", str(c))
    assert code == 0 and text.strip().endswith("PASS")
    doc = json.loads(c.read_text())
    doc["outer_halfwidth"] = 1.0 + doc["delta"] / 4
    c.write_text(json.dumps(doc))
    code, text, _ = run(capsys, "verify", "--net", str(g), "--cert", str(c))
    assert code == 1 and "FAIL exterior-zero" in text


def test_adjust_rejects_analytic(tmp_path, capsys):
    path = tmp_path / "s.json"
    path.write_text(serialize(Network(1, 1, [Affine([[1.0]]), Activation(["tanh"])])))
    code, _, err = run(capsys, "adjust", "--net", str(path), "--n", "1", "--epsilon", "0.1",
                       "--out", str(tmp_path / "o.json"), "--cert", str(tmp_path / "c.json"))
    assert code == 2 and "relu" in err


def test_approximate(tmp_path, capsys):
    cfg = tmp_path / "run.toml"
    cfg.write_text("target = bump\nepsilons = [0.5]\nsup_grid = 41\nl1_grid = 20\nexterior_samples = 500\n")
    out = tmp_path / "out"
    code, text, _ = run(capsys, "approximate", "--config", str(cfg), "--out", str(out))
    assert code == 0
    assert text.splitlines()[0].startswith("eps,status,certified")
    assert {"report.csv", "manifest.json", "net_0.json", "cert_0.json"} <= {p.name for p in out.iterdir()}
    code, text, _ = run(capsys, "verify", "--net", str(out / "net_0.json"), "--cert", str(out / "cert_0.json"),
                        "--target", "bump")
    assert code == 0, text


def test_approximate_bad_config(tmp_path, capsys):
    cfg = tmp_path / "run.toml"
    cfg.write_text("epsilons = [0.1, 0.5]\n")
    code, _, err = run(capsys, "approximate", "--config", str(cfg))
    assert code == 2 and "non-increasing" in err


def test_capacity(tmp_path, capsys):
    path = tmp_path / "p.csv"
    path.write_text("x,y\n0,0\n1,0\n0,1\n")
    code, text, _ = run(capsys, "capacity", "--points", str(path))
    doc = json.loads(text)
    assert code == 0 and doc["count"] == 3 and doc["diameter"] == pytest.approx(2**0.5)


def test_supportbox(capsys):
    code, text, _ = run(capsys, "supportbox", "--target", "bump")
    assert code == 0 and json.loads(text)["n_f"] == 1


@pytest.mark.parametrize("kind", ["l1", "sup", "annulus", "l1loc"])
def test_norm(ramp, capsys, kind):
    code, text, _ = run(capsys, "norm", "--kind", kind, "--net", str(ramp), "--grid", "16", "--samples", "500",
                        "--terms", "3")
    assert code == 0 and json.loads(text)["value"] > 0


def test_norm_against_itself(ramp, capsys):
    code, text, _ = run(capsys, "norm", "--kind", "sup", "--net", str(ramp), "--net2", str(ramp))
    assert code == 0 and json.loads(text)["value"] == 0.0


def test_separate(tmp_path, capsys):
    out = tmp_path / "sep.csv"
    code, text, _ = run(capsys, "separate", "--target", "bump", "--catalog", "tanh,poly:4",
                        "--hidden-width", "16", "--out", str(out))
    assert code == 0 and text.strip().endswith("separated")
    assert out.read_text().splitlines()[1].startswith("relu+pool,")


def test_separate_zero_target(capsys):
    code, text, _ = run(capsys, "separate", "--target", "zero", "--catalog", "tanh", "--hidden-width", "8")
    assert code == 0 and "trivial target" in text


def test_unknown_target(capsys):
    code, _, err = run(capsys, "supportbox", "--target", "nothing")
    assert code == 2 and "unknown target" in err


def test_missing_file(tmp_path, capsys):
    code, _, err = run(capsys, "verify", "--net", str(tmp_path / "x.json"), "--cert", str(tmp_path / "c.json"))
    assert code == 2


def test_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["mask", "--d", "2"])
    assert exc.value.code == 2
