import os
import json
import tempfile
import yaml
from typer.testing import CliRunner
from interfaces.ui_iface.runner.cli import app

runner = CliRunner(mix_stderr=False)
HERGLOTZ = "interfaces/ui_iface/windows/herglotz.yaml"

def write_window(d, body):
    p = os.path.join(d, "w.yaml")
    with open(p, "w") as f:
        yaml.safe_dump(body, f)
    return p

def test_certify_frame():
    r = runner.invoke(app, ["certify", "--window", HERGLOTZ])
    assert r.exit_code == 0, r.stderr
    out = json.loads(r.stdout)
    assert out["verdict"] == "FRAME_CERTIFIED" and out["method"] == "herglotz"
    assert out["lattice"]["alpha"] == 0.7

def test_certify_density_obstruction_to_file():
    with tempfile.TemporaryDirectory() as d:
        p = os.path.join(d, "report.json")
        r = runner.invoke(app, ["certify", "--window", HERGLOTZ, "--alpha", "1.2", "--out", p])
        assert r.exit_code == 1
        with open(p, "r") as f:
            assert json.load(f)["method"] == "density-obstruction"

def test_certify_input_errors():
    with tempfile.TemporaryDirectory() as d:
        bad = write_window(d, {"a": [1.0, 0.0], "w": [1.0, 2.0], "lattice": {"alpha": 0.5}})
        r = runner.invoke(app, ["certify", "--window", bad])
        assert r.exit_code == 3 and "ZeroCoefficient" in r.stderr
        bare = write_window(d, {"a": [1.0], "w": [1.0]})
        assert runner.invoke(app, ["certify", "--window", bare]).exit_code == 3
        assert runner.invoke(app, ["certify", "--window", os.path.join(d, "missing.yaml")]).exit_code == 3

def test_validate_window_hash_is_stable():
    r1 = runner.invoke(app, ["validate-window", HERGLOTZ])
    r2 = runner.invoke(app, ["validate-window", HERGLOTZ])
    assert r1.exit_code == 0 and r1.stdout == r2.stdout
    out = json.loads(r1.stdout)
    assert out["N"] == 2 and out["class"]["herglotz"]

def test_counterexample_nfprop_roundtrip():
    with tempfile.TemporaryDirectory() as d:
        p = os.path.join(d, "nf.yaml")
        r = runner.invoke(app, ["counterexample", "--family", "nfprop", "--pole", "1,0", "--pole", "2,0",
                                "--pole", "3,0", "--out", p])
        assert r.exit_code == 0, r.stderr
        with open(p, "r") as f:
            body = yaml.safe_load(f)
        assert body["lattice"]["alpha"] == 0.5 and len(body["a"]) == 3
        v = runner.invoke(app, ["validate-window", p])
        assert v.exit_code == 0
        assert runner.invoke(app, ["counterexample", "--family", "quartic"]).exit_code == 3

def test_identities_and_sweep():
    r = runner.invoke(app, ["identities", "--window", HERGLOTZ, "--alpha", "0.8"])
    assert r.exit_code == 0
    assert json.loads(r.stdout)["generating_max"] < 1e-9
    with tempfile.TemporaryDirectory() as d:
        out = os.path.join(d, "s.csv")
        r = runner.invoke(app, ["sweep", "--window", HERGLOTZ, "--alpha-range", "1.1:1.2:0.1", "--out", out])
        assert r.exit_code == 0, r.stderr
        assert os.path.exists(out) and os.path.exists(os.path.join(d, "manifest.json"))
        i = runner.invoke(app, ["inspect", d])
        assert i.exit_code == 0 and "density-obstruction" in i.stdout

def test_config_driven_commands():
    with tempfile.TemporaryDirectory() as d:
        with open(HERGLOTZ, "r") as f:
            body = yaml.safe_load(f)
        write_window(d, body)
        cfg = os.path.join(d, "run.yaml")
        with open(cfg, "w") as f:
            yaml.safe_dump({"window": "w.yaml", "alpha_range": "1.1:1.2:0.1", "out": os.path.join(d, "s.csv")}, f)
        r = runner.invoke(app, ["sweep", "--config", cfg])
        assert r.exit_code == 0, r.stderr
        assert os.path.exists(os.path.join(d, "s.csv"))
        c = runner.invoke(app, ["certify", "--config", cfg, "--alpha", "1.2"])
        assert c.exit_code == 1, c.stderr
        assert json.loads(c.stdout)["method"] == "density-obstruction"
        assert runner.invoke(app, ["certify"]).exit_code == 3
