import logging
import numpy as np
from dataclasses import dataclass, field
from typing import Any, Dict
from scipy.linalg import svdvals
from .window import RationalWindow, eval_window
from .multipliers import multiplier_table, TWO_PI
from .orbit_rank import m0_nonvanishing
from .errors import NotAmalgam, M0Vanishes, UnstableShifts

log = logging.getLogger(__name__)

AMALGAM_K = 4096
AMALGAM_SAMPLES = 16

@dataclass
class SISExperiment:
    g: RationalWindow
    alpha: float
    trials: int
    coeff_len: int
    ratios: np.ndarray
    sigma_min_sq: float = float("nan")
    sigma_max_sq: float = float("nan")
    bound: float = float("nan")
    samples: int = 0
    extra: Dict[str, Any] = field(default_factory=dict)

    @property
    def A_emp(self) -> float:
        return float(self.ratios.min())

    @property
    def B_emp(self) -> float:
        return float(self.ratios.max())

    def to_dict(self) -> Dict[str, Any]:
        return {"alpha": self.alpha, "trials": self.trials, "coeff_len": self.coeff_len, "A_emp": self.A_emp,
                "B_emp": self.B_emp, "sigma_min_sq": self.sigma_min_sq, "sigma_max_sq": self.sigma_max_sq,
                "bound": self.bound, "samples": self.samples, "window": self.g.to_dict(), **self.extra}

def _branches(g: RationalWindow, x: np.ndarray):
    neg = g.w.real < 0
    e = np.exp(TWO_PI * np.multiply.outer(x, g.w))
    right = (e[..., neg] * g.a[neg]).sum(axis=-1)
    left = -(e[..., ~neg] * g.a[~neg]).sum(axis=-1)
    return right, left

def _shift_energy(g: RationalWindow, xs: np.ndarray, ks: np.ndarray, zero_side: np.ndarray) -> np.ndarray:
    x = xs[:, None] - ks[None, :]
    with np.errstate(over="ignore", invalid="ignore"):
        right, left = _branches(g, x)
    use_right = (x > 0) | ((x == 0) & zero_side[:, None])
    v = np.where(use_right, right, left)
    return np.nansum(np.abs(v) ** 2, axis=1)

def stability_margin(g: RationalWindow, grid: int = 2048) -> float:
    """Lower bound of sum_k |profile(xi - k)|^2 over one period; positive means stable integer shifts."""
    rmin = float(np.abs(g.w.real).min())
    kstar = int(np.ceil(40.0 / (TWO_PI * rmin))) + 1
    ks = np.arange(-kstar, kstar + 1)
    xs = np.arange(grid + 1) / grid
    # the profile jumps at 0: node 0 takes the right limit, node 1 the left one
    side = np.ones(grid + 1, dtype=bool)
    side[-1] = False
    S = _shift_energy(g, xs, ks, side)
    x = xs[:, None] - ks[None, :]
    re = g.w.real
    with np.errstate(over="ignore"):
        mag = np.abs(g.a) * np.exp(TWO_PI * np.multiply.outer(x, re))
        grow = np.abs(g.a * TWO_PI * g.w) * np.exp(TWO_PI * np.multiply.outer(x, re))
    neg = re < 0
    right = x[..., None] > 0
    keep = np.where(right, neg, ~neg)
    b0 = np.where(keep, mag, 0.0).sum(axis=-1)
    b1 = np.where(keep, grow, 0.0).sum(axis=-1)
    D = 2.0 * np.maximum(b0[:-1] * b1[:-1], b0[1:] * b1[1:])
    D = np.nan_to_num(D, posinf=np.inf).sum(axis=1)
    margin = np.minimum(S[:-1], S[1:]) - 0.5 * D / grid
    return float(margin.min())

def amalgam_guard(g: RationalWindow, K: int = AMALGAM_K) -> float:
    scale = float(np.abs(g.a).sum())
    if abs(g.a.sum()) > 1e-12 * max(1.0, scale):
        raise NotAmalgam(f"sum of coefficients is {abs(g.a.sum()):.3e}; window decays like 1/t")
    ns = np.arange(-K, K)
    h = 1.0 / AMALGAM_SAMPLES
    t = ns[:, None] + h * (np.arange(AMALGAM_SAMPLES + 1))[None, :]
    vals = np.abs(eval_window(g, t))
    # |g'(t)| <= sum |a| / |t - i w|^2, bounded below on each unit interval
    cen = -g.w.imag
    d = np.maximum(0.0, np.maximum(ns[:, None] - cen[None, :], cen[None, :] - ns[:, None] - 1.0))
    dmin2 = g.w.real[None, :] ** 2 + d ** 2
    lip = (np.abs(g.a)[None, :] / dmin2).sum(axis=1)
    sups = vals.max(axis=1) + 0.5 * h * lip
    C = float((np.abs(g.a) * np.abs(g.w)).sum())
    tail = 4.0 * C / (K - 1)
    log.debug(f"amalgam norm truncated at K={K}, tail bound {tail:.3e}")
    return float(sups.sum() + tail)

def sampling_experiment(g: RationalWindow, alpha: float, trials: int = 100, coeff_len: int = 64, seed: int = 0) -> SISExperiment:
    margin = stability_margin(g)
    if margin <= 0:
        raise UnstableShifts(f"integer shifts are not stable (margin {margin:.3e})")
    w0 = amalgam_guard(g)
    m0 = m0_nonvanishing(multiplier_table(g, min(alpha, 1.0)), g)
    if not m0.ok:
        raise M0Vanishes(f"m0 vanishes near xi={m0.xi_min:.6f}")
    ks = np.arange(coeff_len) - coeff_len // 2
    T = coeff_len * (4.0 + max(1.0, 1.0 / (TWO_PI * float(np.abs(g.w.real).min()))))
    J = int(np.floor(T / alpha))
    tj = alpha * np.arange(-J, J + 1)
    S = eval_window(g, tj[:, None] - ks[None, :])
    C = np.empty((coeff_len, trials), dtype=np.complex128)
    for t in range(trials):
        rng = np.random.default_rng(seed + t)
        c = rng.standard_normal(coeff_len) + 1j * rng.standard_normal(coeff_len)
        C[:, t] = c / np.linalg.norm(c)
    ratios = (np.abs(S @ C) ** 2).sum(axis=0)
    sv = svdvals(S)
    exp = SISExperiment(g, float(alpha), int(trials), int(coeff_len), ratios, float(sv[-1] ** 2), float(sv[0] ** 2),
                        float((1.0 / alpha + 1.0) * w0 ** 2), int(tj.size), {"stability_margin": margin})
    log.info(f"sampling alpha={alpha}: A_emp={exp.A_emp:.3e}, B_emp={exp.B_emp:.3e}, sigma_min^2={exp.sigma_min_sq:.3e}")
    return exp
