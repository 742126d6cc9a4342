import logging
import numpy as np
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple
from scipy.integrate import quad
from scipy.linalg import svdvals
from scipy.optimize import minimize_scalar
from scipy.stats import qmc
from .window import RationalWindow, Lattice, rescale_to_unit_beta, window_from_dict
from .multipliers import MultiplierTable, multiplier_table, kernel_rows, kernel_relative_residual
from .orbit_rank import SectionMatrix, effectively_rational
from .report import PiecewiseG
from .errors import ConfigLimit, UnboundedSupport

log = logging.getLogger(__name__)

ALPHA_FLOOR = 0.02
XI_SAMPLES = 16
DEFAULT_SIZES = (50, 100)
WITNESS_REL = 1e-8
DECAY_QUOTIENT = 0.5
FIBER_LADDER = ((8, 4e-3), (16, 2e-3), (32, 1e-3))

class LowerBound(NamedTuple):
    A_est: float
    convergence: float

def section_matrix(tab: MultiplierTable, alpha: float, xi: float, depth: int) -> SectionMatrix:
    if alpha <= ALPHA_FLOOR:
        raise ConfigLimit(f"alpha'={alpha} <= {ALPHA_FLOOR}: section column count explodes")
    inv = 1.0 / alpha
    pts, offs = [], []
    for c in range(-depth, depth + 1):
        base = xi + c * inv
        # every integer n with base - n in [0, 1/alpha')
        n = np.arange(np.floor(base - inv) + 1, np.floor(base) + 1)
        v = base - n
        v = v[(v >= 0) & (v < inv)]
        pts.extend(v.tolist())
        offs.extend([c + depth] * v.size)
    S = tab.strings(np.array(pts))
    rows = tuple((int(o), S[i], float(p)) for i, (o, p) in enumerate(zip(offs, pts)))
    return SectionMatrix(rows, 2 * depth + tab.N)

def section_sigmas(tab: MultiplierTable, alpha: float, xi: float, size: int) -> Tuple[float, float]:
    """(zero-padded, interior) smallest singular values of the section with about `size` columns."""
    depth = max(1, size // 2)
    sec = section_matrix(tab, alpha, xi, depth)
    D = sec.dense()
    zp = float(svdvals(D)[-1]) if D.shape[0] >= D.shape[1] else 0.0
    interior = D[:, tab.N - 1:2 * depth + 1]
    return zp, float(svdvals(interior)[-1])

def lower_bound_estimate(g: RationalWindow, lat: Lattice, sizes: Sequence[int] = DEFAULT_SIZES,
                         xi_points: Optional[Sequence[float]] = None, detail: Optional[Dict[str, Any]] = None) -> LowerBound:
    gb, alpha = rescale_to_unit_beta(g, lat)
    tab = multiplier_table(gb, alpha)
    if xi_points is None:
        xi_points = qmc.Halton(d=1, scramble=False).random(XI_SAMPLES).ravel() / alpha
    sizes = sorted(int(s) for s in sizes)
    est = []
    for size in sizes:
        pairs = np.array([section_sigmas(tab, alpha, float(x), size) for x in xi_points])
        est.append(float(pairs[:, 1].min()) ** 2)
        if detail is not None:
            detail[size] = {"zero_padded": float(pairs[:, 0].min()), "interior": float(pairs[:, 1].min())}
    A = est[-1]
    conv = abs(est[-1] - est[-2]) / max(est[-1], np.finfo(float).tiny) if len(est) > 1 else float("nan")
    return LowerBound(A, float(conv))

def _support(G: PiecewiseG) -> Tuple[float, float]:
    lo, hi = G.support()
    if not (np.isfinite(lo) and np.isfinite(hi)):
        raise UnboundedSupport("test function must have bounded support")
    return lo, hi

def _G_at(G: PiecewiseG, x: float) -> complex:
    return sum((v for lo, hi, v in G.pieces if lo <= x < hi), 0j)

def quadratic_form(tab: MultiplierTable, alpha: float, G: PiecewiseG) -> float:
    nrm = G.norm_sq()
    if nrm == 0.0:
        return 0.0
    L, R = _support(G)
    inv = 1.0 / alpha
    N = tab.N
    edges = np.unique(np.array([e for lo, hi, _ in G.pieces for e in (lo, hi)]))
    total = 0.0
    for n in range(int(np.floor(L - N * inv)) - 1, int(np.ceil(R)) + 1):
        cuts = (edges[None, :] - n - np.arange(N)[:, None] * inv).ravel()
        cuts = np.unique(np.clip(np.concatenate([cuts, [0.0, inv]]), 0.0, inv))
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            if hi - lo <= 1e-15:
                continue
            mid = 0.5 * (lo + hi)
            c = np.array([_G_at(G, mid + n + s * inv) for s in range(N)])
            if not np.any(c):
                continue
            val, _ = quad(lambda x: float(np.abs(tab.strings(x)[0] @ c) ** 2), lo, hi, epsabs=0.0, epsrel=1e-10, limit=200)
            total += val
    return total / nrm

def witness_decay(g: RationalWindow, lat: Lattice, center: float, deltas: Sequence[float]) -> List[float]:
    gb, alpha = rescale_to_unit_beta(g, lat)
    tab = multiplier_table(gb, alpha)
    return [quadratic_form(tab, alpha, PiecewiseG.indicator(center, float(d))) for d in deltas]

def upper_bound_estimate(tab: MultiplierTable, alpha: float, grid: int = 4096) -> float:
    inv = 1.0 / alpha
    xs = np.linspace(0.0, inv, grid + 1)
    S = (np.abs(tab.strings(xs)) ** 2).sum(axis=1)
    b0 = tab.strings_bound(xs[:-1], xs[1:])
    b1 = tab.strings_bound(xs[:-1], xs[1:], deriv=1)
    slack = 0.5 * (xs[1] - xs[0]) * 2.0 * (b0 * b1).sum(axis=1)
    sup = float((np.maximum(S[:-1], S[1:]) + slack).max())
    return float(tab.N * np.ceil(inv - 1e-12) * sup)

def column_weight(tab: MultiplierTable, alpha: float, Y) -> np.ndarray:
    """Sum of |m_s|^2 over the points Y - n - s/alpha' that fall in [0, 1/alpha')."""
    Y = np.atleast_1d(np.asarray(Y, dtype=np.float64))
    inv = 1.0 / alpha
    out = np.zeros(Y.shape)
    for s in range(tab.N):
        base = Y - s * inv
        n = np.floor(base - inv) + 1
        for j in range(int(np.ceil(inv)) + 1):
            v = base - (n + j)
            ok = (v >= 0) & (v < inv)
            if np.any(ok):
                out[ok] += np.abs(tab.strings(v[ok])[:, s]) ** 2
    return out

def _decay_ladder(tab, alpha, ladder_G: List[PiecewiseG]) -> Tuple[List[float], List[float]]:
    ratios = [quadratic_form(tab, alpha, G) for G in ladder_G]
    quot = [r1 / r0 if r0 > 0 else 0.0 for r0, r1 in zip(ratios[:-1], ratios[1:])]
    return ratios, quot

def _witness(kind: str, gb: RationalWindow, alpha: float, ladder_G: List[PiecewiseG], ratios, quot, **extra) -> Dict[str, Any]:
    return {"kind": kind, "alpha": alpha, "window": gb.to_dict(), "G": ladder_G[-1].to_dict(),
            "ratio": ratios[-1], "ratios": ratios, "quotients": quot, **extra}

def column_witness_search(g: RationalWindow, lat: Lattice, deltas: Sequence[float] = (0.02, 0.01, 0.005),
                          grid: int = 4096, rel: float = WITNESS_REL) -> Optional[Dict[str, Any]]:
    gb, alpha = rescale_to_unit_beta(g, lat)
    tab = multiplier_table(gb, alpha)
    ys = np.arange(grid) / grid
    c = column_weight(tab, alpha, ys)
    i = int(np.argmin(c))
    h = 1.0 / grid
    res = minimize_scalar(lambda y: float(column_weight(tab, alpha, y)[0]), bounds=(ys[i] - h, ys[i] + h),
                          method="bounded", options={"xatol": 1e-14})
    y = float(res.x) % 1.0
    cy = float(column_weight(tab, alpha, y)[0])
    B = upper_bound_estimate(tab, alpha)
    if cy > rel * B:
        return None
    ladder_G = [PiecewiseG.indicator(y, float(d)) for d in deltas]
    ratios, quot = _decay_ladder(tab, alpha, ladder_G)
    if not quot or max(quot) > DECAY_QUOTIENT:
        log.info(f"column weight {cy:.3e} at Y={y:.6f} but decay quotients {quot} do not qualify")
        return None
    log.info(f"column witness at Y={y:.9f}, quotients {quot}")
    return _witness("indicator-decay", gb, alpha, ladder_G, ratios, quot, center=y, deltas=list(deltas), column_weight=cy)

def kernel_residual(tab: MultiplierTable, p: int, q: int, theta: float) -> float:
    xs = (theta % (1.0 / p)) + np.arange(q) / p
    return kernel_relative_residual(kernel_rows(tab.g.w, tab.alpha, xs), tab.g.a)

def tapered_fiber(theta: float, alpha: float, count: int, delta: float, phase: float = 0.0) -> PiecewiseG:
    # Hann-weighted bumps on the fiber theta + j/alpha', modulated by exp(2 pi i j phase)
    w = np.sin(np.pi * (np.arange(count) + 1) / (count + 1)) ** 2 * np.exp(2j * np.pi * phase * np.arange(count))
    return PiecewiseG(tuple((theta + j / alpha - delta, theta + j / alpha + delta, complex(w[j])) for j in range(count)))

def kernel_witness(g: RationalWindow, lat: Lattice, theta: Optional[float] = None,
                   ladder: Sequence[Tuple[int, float]] = FIBER_LADDER, grid: int = 4096) -> Optional[Dict[str, Any]]:
    gb, alpha = rescale_to_unit_beta(g, lat)
    frac = effectively_rational(alpha)
    if frac is None:
        return None
    p, q = frac.numerator, frac.denominator
    tab = multiplier_table(gb, alpha)
    if theta is None:
        ts = np.arange(grid) / grid / p
        r = np.array([kernel_residual(tab, p, q, float(t)) for t in ts])
        i = int(np.argmin(r))
        h = 1.0 / grid / p
        res = minimize_scalar(lambda t: kernel_residual(tab, p, q, float(t)), bounds=(ts[i] - h, ts[i] + h),
                              method="bounded", options={"xatol": 1e-14})
        theta = float(res.x) % (1.0 / p)
    if kernel_residual(tab, p, q, theta) > 1e-8:
        return None
    ladder_G = [tapered_fiber(theta, alpha, int(k), float(d)) for k, d in ladder]
    ratios, quot = _decay_ladder(tab, alpha, ladder_G)
    if max(quot) > DECAY_QUOTIENT:
        log.info(f"fiber kernel at theta={theta:.6f} but quotients {quot} do not qualify")
        return None
    return _witness("fiber-kernel", gb, alpha, ladder_G, ratios, quot, theta=theta, ladder=[list(x) for x in ladder])

def zak_zero_witness(gb: RationalWindow, t0: float, x0: float,
                     ladder: Sequence[Tuple[int, float]] = FIBER_LADDER) -> Optional[Dict[str, Any]]:
    """Tapered fiber through a zero of the critical-density Zak transform at z = exp(2 pi i t0), xi = x0."""
    tab = multiplier_table(gb, 1.0)
    ladder_G = [tapered_fiber(x0, 1.0, int(k), float(d), t0) for k, d in ladder]
    ratios, quot = _decay_ladder(tab, 1.0, ladder_G)
    if max(quot) > DECAY_QUOTIENT:
        log.info(f"Zak zero at t={t0:.6f}, xi={x0:.6f} but quotients {quot} do not qualify")
        return None
    return _witness("zak-zero", gb, 1.0, ladder_G, ratios, quot, t=t0, xi=x0, ladder=[list(x) for x in ladder])

def replay_witness(witness: Dict[str, Any]) -> float:
    gb = window_from_dict(witness["window"])
    alpha = float(witness["alpha"])
    return quadratic_form(multiplier_table(gb, alpha), alpha, PiecewiseG.from_dict(witness["G"]))
