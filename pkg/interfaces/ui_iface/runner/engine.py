import os, json, time, hashlib, logging, yaml, numpy as np, pandas as pd
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, List, Tuple
from jsonschema import validate
from blake3 import blake3
from .registry import build_registry, route
from ..schemas.schema import get_window_schema, get_run_schema
from ...frame_iface import __version__
from ...frame_iface.window import RationalWindow, Lattice, validate_window, rescale_to_unit_beta
from ...frame_iface.report import CertificationReport, Verdict, inconclusive, _plain
from ...frame_iface.errors import CertError, Inconclusive, VerdictConflict
from ...frame_iface.orbit_rank import effectively_rational

log = logging.getLogger(__name__)

CSV_COLUMNS = ["alpha", "beta", "verdict", "method", "A_crit", "B_crit", "diag"]
ORACLE_DISAGREE = 1e-3

def _complex(v) -> complex:
    return complex(v[0], v[1]) if isinstance(v, (list, tuple)) else complex(v)

def load_window(src) -> Tuple[RationalWindow, Dict[str, Any]]:
    if isinstance(src, dict):
        raw = src
    else:
        with open(src, "r") as f:
            raw = yaml.safe_load(f)
    validate(raw, get_window_schema())
    g = validate_window([_complex(x) for x in raw["a"]], [_complex(x) for x in raw["w"]])
    return g, raw

def load_config(path: str, **overrides) -> Dict[str, Any]:
    with open(path, "r") as f:
        cfg = yaml.safe_load(f)
    if not isinstance(cfg, dict):
        raise ValueError(f"run config {path} must be a mapping")
    # window paths are relative to the config file
    if isinstance(cfg.get("window"), str) and not os.path.isabs(cfg["window"]):
        cfg["window"] = os.path.join(os.path.dirname(os.path.abspath(path)), cfg["window"])
    tols = overrides.pop("tolerances", None) or {}
    cfg.update({k: v for k, v in overrides.items() if v is not None})
    cfg["tolerances"] = {**cfg.get("tolerances", {}), **tols}
    return prepare_config(cfg)

def prepare_config(cfg: Dict[str, Any]) -> Dict[str, Any]:
    validate(cfg, get_run_schema())
    cfg = apply_defaults(cfg)
    cfg["_config_hash"] = stable_hash({k: v for k, v in cfg.items() if not k.startswith("_")})
    return cfg

def apply_defaults(cfg: Dict[str, Any]) -> Dict[str, Any]:
    if "alpha_range" in cfg:
        cfg.setdefault("beta", 1.0)
    cfg.setdefault("method", "auto")
    cfg.setdefault("seed", 0)
    cfg.setdefault("out", None)
    cfg.setdefault("workers", int(os.environ.get("GABORCERT_WORKERS", "1")))
    tol = cfg.get("tolerances", {})
    tol.setdefault("q_max", 64)
    tol.setdefault("witness_rel", 1e-8)
    tol.setdefault("oracle_sizes", [50, 100])
    cfg["tolerances"] = tol
    return cfg

def stable_hash(obj: Any) -> str:
    s = json.dumps(obj, sort_keys=True, separators=(",", ":"))
    return hashlib.blake2b(s.encode("utf-8"), digest_size=16).hexdigest()

def parse_range(spec: str) -> np.ndarray:
    start, stop, step = (float(x) for x in spec.split(":"))
    if step <= 0:
        raise ValueError(f"range step must be positive, got {spec!r}")
    if stop < start:
        raise ValueError(f"range is empty: {spec!r}")
    n = int(np.floor((stop - start) / step + 1e-9)) + 1
    return np.round(start + step * np.arange(n), 12)

def _oracle_pass(g: RationalWindow, lat: Lattice, rep: CertificationReport, tol: Dict[str, Any]) -> CertificationReport:
    from ...frame_iface.frame_oracle import lower_bound_estimate, column_witness_search, kernel_witness
    detail: Dict[str, Any] = {}
    try:
        lb = lower_bound_estimate(g, lat, tol["oracle_sizes"], detail=detail)
        rep.diagnostics["oracle"] = {"A_est": lb.A_est, "convergence": lb.convergence, "sizes": detail}
    except CertError as e:
        rep.diagnostics["oracle"] = {"skipped": str(e)}
        return rep
    if rep.verdict == Verdict.NOT_FRAME_WITNESSED:
        return rep
    wit = column_witness_search(g, lat, rel=tol["witness_rel"])
    _, alpha = rescale_to_unit_beta(g, lat)
    if wit is None and effectively_rational(alpha, tol["q_max"]) is not None:
        wit = kernel_witness(g, lat)
    if wit is not None:
        if rep.verdict == Verdict.FRAME_CERTIFIED:
            raise VerdictConflict(f"{rep.method} certified a frame but the oracle found a witness",
                                  {"report": rep.to_dict(), "witness": _plain(wit)})
        diag = dict(rep.diagnostics, superseded=rep.verdict.value)
        return CertificationReport(Verdict.NOT_FRAME_WITNESSED, rep.method, 0.0, rep.B_crit, {"witness": wit}, diag)
    if rep.verdict == Verdict.FRAME_CERTIFIED and rep.A_crit:
        small = [v["interior"] ** 2 < ORACLE_DISAGREE * rep.A_crit for v in detail.values()]
        if len(small) > 1 and all(small):
            log.warning(f"oracle sections fall below {ORACLE_DISAGREE} * A_crit; downgrading {rep.method}")
            return CertificationReport(Verdict.INCONCLUSIVE, rep.method, None, rep.B_crit, rep.certificate,
                                       dict(rep.diagnostics, reason="oracle disagreement"))
    return rep

def certify_window(g: RationalWindow, lat: Lattice, method: str = "auto", tol: Dict[str, Any] | None = None) -> CertificationReport:
    tol = apply_defaults({"tolerances": dict(tol or {})})["tolerances"]
    reg = build_registry()
    name = route(g, lat, tol["q_max"]) if method == "auto" else method
    if name not in reg:
        raise ValueError(f"method {method!r} does not produce a certification report")
    try:
        rep = reg[name](g, lat)
    except Inconclusive as e:
        rep = inconclusive(name, str(e), error=type(e).__name__)
    except CertError as e:
        if method != "auto":
            raise
        rep = inconclusive(name, str(e), error=type(e).__name__)
    rep.diagnostics.setdefault("routed", name)
    log.info(f"{name}: {rep.verdict.value} at alpha={lat.alpha}, beta={lat.beta}")
    if lat.product <= 1.0 + 1e-12:
        rep = _oracle_pass(g, lat, rep, tol)
    return rep

def report_payload(rep: CertificationReport, g: RationalWindow, lat: Lattice) -> Dict[str, Any]:
    out = rep.to_dict()
    out.update({"window": g.to_dict(), "lattice": lat.to_dict(), "normalized_alpha": lat.product})
    return out

def run_certify(cfg: Dict[str, Any]) -> CertificationReport:
    g, raw = load_window(cfg["window"])
    lat_raw = raw.get("lattice", {})
    alpha = cfg.get("alpha", lat_raw.get("alpha"))
    if alpha is None:
        raise ValueError("no alpha given and the window file carries no lattice")
    lat = Lattice(float(alpha), float(cfg.get("beta", lat_raw.get("beta", 1.0))))
    rep = certify_window(g, lat, cfg.get("method", "auto"), cfg.get("tolerances"))
    cfg["_payload"] = report_payload(rep, g, lat)
    return rep

def _sweep_cell(g: RationalWindow, ab: Tuple[float, float], method: str, tol: Dict[str, Any]) -> Dict[str, Any]:
    a, b = ab
    try:
        rep = certify_window(g, Lattice(a, b), method, tol)
        diag = json.dumps(_plain({k: v for k, v in rep.diagnostics.items() if k != "oracle"}), sort_keys=True, separators=(",", ":"))
    except VerdictConflict as e:
        rep = inconclusive(method, str(e))
        diag = json.dumps({"conflict": str(e)}, sort_keys=True, separators=(",", ":"))
    except CertError as e:
        rep = inconclusive(method, str(e))
        diag = json.dumps({"error": type(e).__name__, "reason": str(e)}, sort_keys=True, separators=(",", ":"))
    return {"alpha": a, "beta": b, "verdict": rep.verdict.value, "method": rep.method,
            "A_crit": rep.A_crit, "B_crit": rep.B_crit, "diag": diag}

def sweep_rows(g: RationalWindow, alphas, betas, method: str = "auto", tol: Dict[str, Any] | None = None, workers: int = 1) -> pd.DataFrame:
    cells = [(float(a), float(b)) for a in alphas for b in betas]
    with ThreadPoolExecutor(max_workers=max(1, int(workers))) as ex:
        rows = list(ex.map(lambda ab: _sweep_cell(g, ab, method, tol or {}), cells))
    return pd.DataFrame(rows, columns=CSV_COLUMNS)

def write_checksums(run_dir: str, files: List[str]):
    os.makedirs(os.path.join(run_dir, "checksums"), exist_ok=True)
    for fp in files:
        with open(fp, "rb") as f:
            h = blake3()
            while True:
                b = f.read(1048576)
                if not b:
                    break
                h.update(b)
        out = os.path.join(run_dir, "checksums", os.path.basename(fp) + ".blake3")
        with open(out, "w") as o:
            o.write(h.hexdigest())

def run_sweep(cfg: Dict[str, Any]) -> str:
    t0 = time.time()
    g, _ = load_window(cfg["window"])
    alphas = parse_range(cfg["alpha_range"])
    betas = parse_range(cfg["beta_range"]) if "beta_range" in cfg else np.array([float(cfg["beta"])])
    df = sweep_rows(g, alphas, betas, cfg["method"], cfg["tolerances"], cfg["workers"])
    out = cfg["out"] or "sweep.csv"
    run_dir = os.path.dirname(os.path.abspath(out))
    os.makedirs(run_dir, exist_ok=True)
    df.to_csv(out, index=False, float_format="%.17g", na_rep="")
    pq = os.path.splitext(out)[0] + ".parquet"
    df.to_parquet(pq, index=False)
    manifest = {
        "schema_version": "1.0",
        "config_hash": cfg.get("_config_hash"),
        "created": int(time.time()),
        "cells": int(len(df)),
        "outputs": [os.path.basename(out), os.path.basename(pq)],
        "version": __version__,
    }
    manifest["runtime_s"] = time.time() - t0
    mp = os.path.join(run_dir, "manifest.json")
    with open(mp, "w") as f:
        json.dump(manifest, f, separators=(",", ":"), sort_keys=True)
    write_checksums(run_dir, [out, pq, mp])
    log.info(f"sweep of {len(df)} cells written to {out}")
    return out

def run_identities(g: RationalWindow, alpha: float = 1.0, samples: int = 10, seed: int = 0) -> Dict[str, Any]:
    from ...frame_iface.multipliers import multiplier_table, identity_residuals
    tab = multiplier_table(g, alpha)
    rng = np.random.default_rng(seed)
    gen, res = [], []
    for _ in range(samples):
        # stay away from the poles 1/u_k
        while True:
            z = complex(rng.uniform(0.2, 2.0) * np.exp(2j * np.pi * rng.uniform()))
            if np.all(np.abs(1.0 - z * tab.u) > 1e-3):
                break
        r_gen, r_res = identity_residuals(tab, z, float(rng.uniform(0.0, 1.0)))
        gen.append(r_gen)
        res.append(max(r_res))
    return {"alpha": alpha, "samples": samples, "generating_max": float(max(gen)), "residue_max": float(max(res))}
