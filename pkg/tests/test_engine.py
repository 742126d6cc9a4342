import os
import pytest
import numpy as np
from interfaces.frame_iface.window import validate_window, Lattice
from interfaces.frame_iface.report import Verdict
from interfaces.frame_iface.errors import NotHerglotz, VerdictConflict
from interfaces.ui_iface.runner.registry import route
from interfaces.ui_iface.runner.engine import (parse_range, apply_defaults, stable_hash, certify_window, load_window,
                                               prepare_config, run_certify, load_config)

HERGLOTZ = validate_window([1.0, 1.0], [1.0, 2.0])
LEFT = validate_window([1.0, -0.5], [-1.0, -2.0])

@pytest.mark.parametrize("g,alpha,want", [
    (HERGLOTZ, 1.2, "density-obstruction"),
    (HERGLOTZ, 1.0, "critical"),
    (HERGLOTZ, 0.7, "herglotz"),
    (LEFT, 0.4, "high-density"),
    (LEFT, 1.0 / np.sqrt(2.0), "irrational"),
    (LEFT, 0.75, "near-critical"),
])
def test_routing(g, alpha, want):
    assert route(g, Lattice(alpha, 1.0)) == want

def test_routing_uses_the_product():
    assert route(HERGLOTZ, Lattice(2.0, 0.5)) == "critical"
    assert route(LEFT, Lattice(0.5, 0.8)) == "high-density"

def test_parse_range_inclusive():
    xs = parse_range("0.3:1.0:0.1")
    assert xs.size == 8 and xs[0] == 0.3 and xs[-1] == 1.0
    assert parse_range("0.5:0.5:0.1").tolist() == [0.5]
    with pytest.raises(ValueError):
        parse_range("0.5:0.4:0.1")
    with pytest.raises(ValueError):
        parse_range("0.1:0.4:0")

def test_defaults_and_hash():
    cfg = apply_defaults({"window": "w.yaml"})
    assert cfg["method"] == "auto" and cfg["tolerances"]["q_max"] == 64
    assert cfg["tolerances"]["oracle_sizes"] == [50, 100]
    assert stable_hash({"b": 1, "a": [1, 2]}) == stable_hash({"a": [1, 2], "b": 1})
    a = prepare_config({"window": "w.yaml", "alpha": 0.5})
    b = prepare_config({"window": "w.yaml", "alpha": 0.6})
    assert a["_config_hash"] != b["_config_hash"]

def test_density_obstruction_report():
    rep = certify_window(HERGLOTZ, Lattice(1.2, 1.0))
    assert rep.verdict == Verdict.NOT_FRAME_WITNESSED and rep.exit_code == 1
    assert rep.method == "density-obstruction"
    assert "oracle" not in rep.diagnostics

def test_explicit_method_propagates_input_errors():
    with pytest.raises(NotHerglotz):
        certify_window(LEFT, Lattice(0.5, 1.0), "herglotz")
    with pytest.raises(ValueError):
        certify_window(LEFT, Lattice(0.5, 1.0), "sis")

def test_auto_turns_precondition_failures_inconclusive():
    g = validate_window([1.0, 1.0], [-1.0 + 1j, -1.0 - 1j])
    rep = certify_window(g, Lattice(1.0 / np.sqrt(2.0), 1.0))
    assert rep.verdict in (Verdict.INCONCLUSIVE, Verdict.NOT_FRAME_WITNESSED)
    assert rep.diagnostics["error"] == "DegenerateRe"

def test_herglotz_through_dispatcher():
    rep = certify_window(HERGLOTZ, Lattice(0.7, 1.0))
    assert rep.verdict == Verdict.FRAME_CERTIFIED and rep.method == "herglotz"
    assert rep.diagnostics["oracle"]["A_est"] > 0.0

def test_degree3_file_is_witnessed():
    from interfaces.frame_iface.constructions import degree3_window
    ob = degree3_window(6.0 / 7.0)
    g, raw = load_window(ob.to_dict())
    rep = certify_window(g, Lattice(raw["lattice"]["alpha"], 1.0))
    assert rep.verdict == Verdict.NOT_FRAME_WITNESSED
    assert rep.certificate["witness"]["kind"] == "indicator-decay"
    assert abs(rep.certificate["witness"]["center"] - ob.witness_center) < 1e-6

def test_run_certify_payload():
    cfg = prepare_config({"window": "interfaces/ui_iface/windows/herglotz.yaml"})
    rep = run_certify(cfg)
    p = cfg["_payload"]
    assert p["verdict"] == rep.verdict.value
    assert p["lattice"] == {"alpha": 0.7, "beta": 1.0} and p["normalized_alpha"] == 0.7
    assert set(p) >= {"window", "lattice", "normalized_alpha", "method", "verdict", "A_crit", "B_crit",
                      "certificate", "diagnostics", "version"}

def test_conflict_carries_dump():
    e = VerdictConflict("boom", {"report": {}})
    assert isinstance(e, RuntimeError) and e.dump == {"report": {}}

def test_herglotz_sweep_all_frames():
    from interfaces.ui_iface.runner.engine import sweep_rows
    df = sweep_rows(HERGLOTZ, [0.3, 0.65, 1.0], [1.0])
    assert (df["verdict"] == "FRAME_CERTIFIED").all(), df["diag"].tolist()
    assert df["method"].tolist() == ["herglotz", "herglotz", "critical"]

def test_sweep_flips_at_the_hyperbola():
    from interfaces.ui_iface.runner.engine import sweep_rows
    df = sweep_rows(HERGLOTZ, [1.0], [0.9, 1.1], workers=2)
    assert df["beta"].tolist() == [0.9, 1.1]
    assert df["verdict"].tolist() == ["FRAME_CERTIFIED", "NOT_FRAME_WITNESSED"]

def test_load_packaged_sweep_config():
    cfg = load_config("interfaces/ui_iface/windows/herglotz-sweep.yaml")
    assert os.path.isabs(cfg["window"]) and os.path.exists(cfg["window"])
    assert cfg["workers"] == 2 and cfg["beta"] == 1.0 and cfg["_config_hash"]
    over = load_config("interfaces/ui_iface/windows/herglotz-sweep.yaml", workers=1, tolerances={"q_max": 32})
    assert over["workers"] == 1
    assert over["tolerances"] == {"q_max": 32, "witness_rel": 1e-8, "oracle_sizes": [50, 100]}
    assert over["_config_hash"] != cfg["_config_hash"]

def test_certify_config_leaves_beta_to_the_window():
    cfg = prepare_config({"window": "w.yaml", "alpha": 0.5})
    assert "beta" not in cfg
    assert prepare_config({"window": "w.yaml", "alpha_range": "0.1:0.2:0.1"})["beta"] == 1.0
