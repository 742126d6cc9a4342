import os, sys, json, logging, typer, yaml
from typing import Any, Dict, List, Optional
from jsonschema import ValidationError
app = typer.Typer(add_completion=False)

def _fail(e: Exception, code: int = 3):
    typer.echo(f"error: {type(e).__name__}: {e}", err=True)
    raise typer.Exit(code)

def _pole(s: str) -> complex:
    re, im = (float(x) for x in s.split(","))
    return complex(re, im)

@app.callback()
def main(log_level: str = typer.Option(os.environ.get("GABORCERT_LOG_LEVEL", "WARNING"), "--log-level")):
    logging.basicConfig(level=log_level.upper(), stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")

def _cli_config(config: Optional[str], base: Dict[str, Any], q_max: Optional[int], tol: Optional[float] = None) -> Dict[str, Any]:
    from .engine import load_config, prepare_config
    given = {k: v for k, v in base.items() if v is not None}
    tols = {k: v for k, v in (("q_max", q_max), ("witness_rel", tol)) if v is not None}
    if tols:
        given["tolerances"] = tols
    return load_config(config, **given) if config else prepare_config(given)

@app.command()
def certify(window: Optional[str] = typer.Option(None, "--window"), config: Optional[str] = typer.Option(None, "--config"),
            alpha: Optional[float] = None, beta: Optional[float] = None, method: Optional[str] = None,
            tol: Optional[float] = None, q_max: Optional[int] = None, out: Optional[str] = None):
    from .engine import run_certify
    from ...frame_iface.errors import CertError, VerdictConflict
    try:
        if not (window or config):
            raise ValueError("need --window or --config")
        cfg = _cli_config(config, {"window": window, "alpha": alpha, "beta": beta, "method": method}, q_max, tol)
        rep = run_certify(cfg)
    except VerdictConflict as e:
        typer.echo(json.dumps(e.dump, sort_keys=True, indent=2), err=True)
        _fail(e, 2)
    except (CertError, ValueError, ValidationError, OSError, yaml.YAMLError) as e:
        _fail(e)
    s = json.dumps(cfg["_payload"], sort_keys=True, indent=2)
    if out:
        with open(out, "w") as f:
            f.write(s)
        typer.echo(f"{rep.verdict.value} {rep.method} -> {os.path.abspath(out)}")
    else:
        typer.echo(s)
    raise typer.Exit(rep.exit_code)

@app.command()
def sweep(window: Optional[str] = typer.Option(None, "--window"), config: Optional[str] = typer.Option(None, "--config"),
          alpha_range: Optional[str] = typer.Option(None, "--alpha-range"), beta_range: Optional[str] = None,
          beta: Optional[float] = None, method: Optional[str] = None, q_max: Optional[int] = None,
          out: Optional[str] = None, workers: Optional[int] = None):
    from .engine import run_sweep
    from ...frame_iface.errors import CertError
    try:
        if not config and not (window and alpha_range):
            raise ValueError("need --config, or --window with --alpha-range")
        cfg = _cli_config(config, {"window": window, "alpha_range": alpha_range, "beta_range": beta_range, "beta": beta,
                                   "method": method, "out": out, "workers": workers}, q_max)
        p = run_sweep(cfg)
    except (CertError, ValueError, ValidationError, OSError, yaml.YAMLError) as e:
        _fail(e)
    typer.echo(os.path.abspath(p))

@app.command()
def inspect(run_dir: str):
    import pandas as pd
    with open(os.path.join(run_dir, "manifest.json"), "r") as f:
        m = json.load(f)
    typer.echo(json.dumps({"cells": m.get("cells"), "runtime_s": m.get("runtime_s"), "version": m.get("version")}, separators=(",", ":"), sort_keys=True))
    df = pd.read_parquet(os.path.join(run_dir, m["outputs"][1]))
    typer.echo(df.groupby(["verdict", "method"]).size().to_string())

@app.command()
def counterexample(family: str = typer.Option("degree3", "--family"), alpha: Optional[float] = None,
                   layout: str = "aligned", branch: Optional[int] = None, xi0: Optional[float] = None,
                   pole: List[str] = typer.Option(["0.3,1.0", "-0.2,0.5", "0.1,-0.8"], "--pole"),
                   theta: Optional[float] = None, out: Optional[str] = None):
    from ...frame_iface.errors import CertError
    from ...frame_iface.window import validate_window
    try:
        if family == "degree3":
            from ...frame_iface.constructions import degree3_window
            d = degree3_window(6.0 / 7.0 if alpha is None else alpha, branch, layout, xi0).to_dict()
        elif family == "nfprop":
            from ...frame_iface.constructions import nfprop_window
            w = [_pole(p) for p in pole]
            a, th = nfprop_window(w, alpha, theta)
            d = validate_window(a, w).to_dict()
            d.update({"name": "nfprop", "lattice": {"alpha": 1.0 / (len(w) - 1), "beta": 1.0}, "meta": {"theta": th}})
        else:
            raise ValueError(f"unknown family {family!r}; expected degree3 or nfprop")
    except (CertError, ValueError) as e:
        _fail(e)
    s = yaml.safe_dump(d, sort_keys=True)
    if out:
        with open(out, "w") as f:
            f.write(s)
        typer.echo(os.path.abspath(out))
    else:
        typer.echo(s)

@app.command()
def identities(window: str = typer.Option(..., "--window"), alpha: float = 1.0, samples: int = 10, seed: int = 0):
    from .engine import load_window, run_identities
    from ...frame_iface.errors import CertError
    try:
        g, _ = load_window(window)
        r = run_identities(g, alpha, samples, seed)
    except (CertError, ValueError, ValidationError, OSError, yaml.YAMLError) as e:
        _fail(e)
    typer.echo(json.dumps(r, separators=(",", ":"), sort_keys=True))

@app.command()
def sis(window: str = typer.Option(..., "--window"), alpha: float = 0.5, trials: int = 100, coeff_len: int = 64, seed: int = 0):
    from .engine import load_window
    from ...frame_iface.sis_sampling import sampling_experiment
    from ...frame_iface.report import _plain
    from ...frame_iface.errors import CertError
    try:
        g, _ = load_window(window)
        exp = sampling_experiment(g, alpha, trials, coeff_len, seed)
    except (CertError, ValueError, ValidationError, OSError, yaml.YAMLError) as e:
        _fail(e)
    typer.echo(json.dumps(_plain(exp.to_dict()), separators=(",", ":"), sort_keys=True))

@app.command()
def validate_window(path: str):
    from .engine import load_window, stable_hash
    from ...frame_iface.errors import CertError
    try:
        g, raw = load_window(path)
    except (CertError, ValidationError, OSError, yaml.YAMLError) as e:
        _fail(e)
    typer.echo(json.dumps({"hash": stable_hash(raw), "N": g.N, "class": g.cls.to_dict()}, separators=(",", ":"), sort_keys=True))
