import logging
import numpy as np
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, List, NamedTuple, Optional, Tuple
from scipy.linalg import qr, svdvals
from scipy.optimize import brentq
from .window import RationalWindow, Lattice, rescale_to_unit_beta
from .multipliers import MultiplierTable, multiplier_table, TWO_PI
from .report import CertificationReport, Verdict
from .errors import (AlphaOutOfRange, RationalCollision, NotFound, EffectivelyRational, M0Vanishes, DegenerateRe)
from ..ui_iface.runner.kernels import orbit_steps, return_times

log = logging.getLogger(__name__)

TOL_COLLIDE = 1e-12
TOL_RANK = 1e-8
Q_MAX = 64
RATIONAL_TOL = 1e-9
RETURN_STARTS = 1024
RETURN_CAP = 100000
MAX_CELLS = 200000

@dataclass(frozen=True)
class OrbitRecord:
    xi0: float
    tau: float
    points: Tuple[Tuple[float, int, int], ...]
    k: Tuple[int, ...]

    @property
    def l(self) -> int:
        return len(self.k)

    @property
    def K(self) -> int:
        return int(sum(self.k))

    @property
    def values(self) -> np.ndarray:
        return np.array([p[0] for p in self.points])

    def to_dict(self) -> Dict[str, Any]:
        return {"xi0": self.xi0, "tau": self.tau, "k": list(self.k), "K": self.K, "l": self.l,
                "points": [[v, n, m] for v, n, m in self.points]}

@dataclass(frozen=True)
class SectionMatrix:
    # rows of (col_offset, string M(point), point)
    rows: Tuple[Tuple[int, np.ndarray, float], ...]
    n_cols: int

    @property
    def shape(self) -> Tuple[int, int]:
        return len(self.rows), self.n_cols

    def dense(self) -> np.ndarray:
        out = np.zeros(self.shape, dtype=np.complex128)
        for r, (c, s, _) in enumerate(self.rows):
            out[r, c:c + s.size] = s
        return out

    def offsets(self) -> np.ndarray:
        return np.array([c for c, _, _ in self.rows], dtype=np.int64)

    def points(self) -> np.ndarray:
        return np.array([p for _, _, p in self.rows])

class RankWindow(NamedTuple):
    xi_hat: float
    l: int
    delta: float
    sigma_min: float
    rows: Tuple[int, ...]
    k: Tuple[int, ...]

class M0Check(NamedTuple):
    ok: bool
    min_abs: float
    xi_star: float
    xi_min: float
    slack: float

def orbit(xi: float, alpha: float, l: int) -> OrbitRecord:
    if not (0.0 < alpha < 1.0):
        raise AlphaOutOfRange(f"orbit needs alpha' in (0, 1), got {alpha}")
    inv = 1.0 / alpha
    if not (1.0 < xi < inv):
        raise ValueError(f"orbit start must lie in (1, {inv:.6g}), got {xi}")
    if l < 1:
        raise ValueError(f"need at least one level, got l={l}")
    tau = inv - 1.0
    ns, ms, ks, status = orbit_steps(float(xi), tau, inv, int(l), TOL_COLLIDE)
    if status:
        raise RationalCollision(f"orbit of xi={xi} at alpha'={alpha} hits an endpoint or returns to its start")
    vals = xi - ns + ms * tau
    pts = tuple((float(v), int(n), int(m)) for v, n, m in zip(vals, ns, ms))
    return OrbitRecord(float(xi), float(tau), pts, tuple(int(x) for x in ks))

def build_D(tab: MultiplierTable, orb: OrbitRecord) -> SectionMatrix:
    vals = orb.values
    S = tab.strings(vals)
    rows = tuple((int(m), S[i], float(vals[i])) for i, (_, _, m) in enumerate(orb.points))
    return SectionMatrix(rows, orb.K + tab.N)

def _pivot_sigma(D: np.ndarray, rows: Optional[np.ndarray] = None) -> Tuple[float, np.ndarray]:
    n = D.shape[1]
    if rows is None:
        if D.shape[0] < n:
            return 0.0, np.arange(0)
        scale = np.linalg.norm(D, axis=1)
        Dn = D / np.where(scale > 0, scale, 1.0)[:, None]
        _, _, piv = qr(Dn.T, pivoting=True, mode="economic")
        rows = np.sort(piv[:n])
    return float(svdvals(D[rows])[-1]), rows

def _window_sigma(tab: MultiplierTable, xi: float, alpha: float, l: int, rows: Optional[np.ndarray] = None):
    orb = orbit(xi, alpha, l)
    D = build_D(tab, orb).dense()
    s, rows = _pivot_sigma(D, rows)
    return s, rows, D, orb

def full_rank_window(tab: MultiplierTable, alpha: float, l_max: Optional[int] = None, grid: int = 2048) -> RankWindow:
    N = tab.N
    l_max = l_max or 3 * N
    inv = 1.0 / alpha
    xs = 1.0 + (inv - 1.0) * (np.arange(grid) + 0.5) / grid
    for l in range(max(1, N - 2), l_max + 1):
        best = None
        for xi in xs:
            try:
                s, rows, D, orb = _window_sigma(tab, float(xi), alpha, l)
            except RationalCollision:
                continue
            if rows.size == 0 or s <= TOL_RANK * np.linalg.norm(D, 2):
                continue
            if best is None or s > best[0]:
                best = (s, float(xi), rows, orb.k)
        if best is None:
            continue
        s, xi, rows, k = best
        delta = min(xi - 1.0, inv - xi, 0.05) / 2.0
        for _ in range(40):
            if _stable(tab, alpha, l, xi, delta, rows, k, s):
                log.info(f"full-rank window at xi={xi:.6f}, l={l}, delta={delta:.3e}, sigma={s:.3e}")
                return RankWindow(xi, l, delta, s, tuple(int(r) for r in rows), k)
            delta /= 2.0
    raise NotFound(f"no full-rank window for l <= {l_max} on a {grid}-point grid")

def _stable(tab, alpha, l, xi, delta, rows, k, s) -> bool:
    for d in (-delta, -delta / 2.0, delta / 2.0, delta):
        try:
            s2, _, _, orb = _window_sigma(tab, xi + d, alpha, l, rows)
        except (RationalCollision, ValueError):
            return False
        if orb.k != k or s2 < 0.5 * s:
            return False
    return True

def _dominance_threshold(g: RationalWindow) -> float:
    lead = g.N - 1
    if g.N == 1:
        return 0.0
    re = g.w.real
    al = abs(g.a[lead])

    def gap(x):
        rest = np.abs(g.a[:lead]) * np.exp(TWO_PI * x * (re[:lead] - re[lead]))
        return np.log(al) - np.log(rest.sum())

    if gap(0.0) > 0:
        return 0.0
    hi = 1.0
    while gap(hi) <= 0:
        hi *= 2.0
        if hi > 1e6:
            raise M0Vanishes("leading exponential never dominates m0")
    return float(brentq(gap, 0.0, hi, xtol=1e-14))

def m0_nonvanishing(tab: MultiplierTable, g: RationalWindow, grid: int = 4096, depth: int = 40) -> M0Check:
    """Cellwise lower bound of |m0| on [lo, max(xi*, 1/alpha')]; beyond xi* the leading term dominates."""
    if not g.cls.distinct_re:
        raise DegenerateRe("m0 dominance needs distinct Re w")
    m0 = tab.m[0]
    d1 = m0.derivative()
    xi_star = _dominance_threshold(g)
    hi = max(xi_star, 1.0 / tab.alpha)
    scale = float(np.abs(g.a).sum())
    lo = 0.0
    if abs(m0(0.0)) <= 1e-12 * scale:
        # zero at the boundary: admissible only if it is simple
        dv = abs(d1(0.0))
        if dv <= 1e-12 * scale:
            return M0Check(False, 0.0, xi_star, 0.0, 0.0)
        d2 = m0.derivative(2)
        # |m0'| >= dv/2 on (0, lo], so m0 has no other zero there
        lo = hi
        while lo * d2.sup_bound(0.0, lo) > 0.5 * dv:
            lo /= 2.0
    a = np.linspace(lo, hi, grid + 1)
    b, a = a[1:], a[:-1]
    va, vb = np.abs(m0(a)), np.abs(m0(b))
    k = int(np.argmin(va))
    min_abs, xi_min = float(min(va[k], vb[-1])), float(a[k] if va[k] <= vb[-1] else b[-1])
    bound = np.inf
    for _ in range(depth):
        lower = np.minimum(va, vb) - 0.5 * (b - a) * d1.sup_bound(a, b)
        good = lower > 0
        if good.any():
            bound = min(bound, float(lower[good].min()))
        if good.all():
            return M0Check(True, min_abs, xi_star, xi_min, min_abs - bound)
        a, b, va, vb = a[~good], b[~good], va[~good], vb[~good]
        if a.size > MAX_CELLS:
            break
        mid = 0.5 * (a + b)
        vm = np.abs(m0(mid))
        k = int(np.argmin(vm))
        if vm[k] < min_abs:
            min_abs, xi_min = float(vm[k]), float(mid[k])
        a, b = np.concatenate([a, mid]), np.concatenate([mid, b])
        va, vb = np.concatenate([va, vm]), np.concatenate([vm, vb])
    log.info(f"m0 not certified: {a.size} cells unresolved, |m0| = {min_abs:.3e} near xi = {xi_min:.6f}")
    return M0Check(False, min_abs, xi_star, xi_min, min_abs)

def effectively_rational(alpha: float, q_max: int = Q_MAX) -> Optional[Fraction]:
    f = Fraction(alpha).limit_denominator(q_max)
    return f if abs(float(f) - alpha) <= RATIONAL_TOL else None

def _interior_sigma(sec: SectionMatrix, N: int) -> float:
    D = sec.dense()
    cols = np.arange(N - 1, sec.n_cols - N + 1) if N > 1 else np.arange(sec.n_cols)
    if cols.size == 0:
        return float("nan")
    return float(svdvals(D[:, cols])[-1])

def certify_irrational(g: RationalWindow, lat: Lattice, grid: int = 2048, samples: int = 64) -> CertificationReport:
    gb, alpha = rescale_to_unit_beta(g, lat)
    if alpha >= 1.0:
        raise AlphaOutOfRange(f"irrational certifier needs alpha*beta < 1, got {alpha}")
    frac = effectively_rational(alpha)
    if frac is not None:
        raise EffectivelyRational(f"alpha*beta = {alpha} is within {RATIONAL_TOL} of {frac}")
    if alpha <= 1.0 / gb.N:
        from .density import certify_high_density
        return certify_high_density(g, lat)
    tab = multiplier_table(gb, alpha)
    m0 = m0_nonvanishing(tab, gb)
    if not m0.ok:
        raise M0Vanishes(f"m0 has |m0| = {m0.min_abs:.3e} near xi = {m0.xi_min:.6f}")
    win = full_rank_window(tab, alpha, 3 * gb.N, grid)
    tau = 1.0 / alpha - 1.0
    starts = 1.0 + tau * (np.arange(RETURN_STARTS) + 0.5) / RETURN_STARTS
    t = return_times(starts, tau, win.xi_hat - win.delta, win.xi_hat + win.delta, RETURN_CAP)
    if np.any(t < 0):
        raise NotFound(f"return time into the window exceeds {RETURN_CAP} levels")
    t_max = int(t.max())
    picks = np.unique(np.concatenate([np.linspace(0, RETURN_STARTS - 1, samples).astype(int), [int(np.argmax(t))]]))
    sig_int, x_diag = [], []
    for i in picks:
        try:
            orb = orbit(float(starts[i]), alpha, int(t[i]) + win.l)
        except RationalCollision:
            continue
        sec = build_D(tab, orb)
        sig_int.append(_interior_sigma(sec, gb.N))
        # first row entering each new column carries m0 on the diagonal
        offs = sec.offsets()
        first = np.unique(offs, return_index=True)[1]
        x_diag.append(float(np.abs(sec.dense()[first, offs[first]]).min()))
    sig_int = [s for s in sig_int if np.isfinite(s)]
    if not sig_int:
        raise NotFound("no admissible section for the interior bound")
    x_min = float(min(x_diag))
    if x_min < m0.min_abs - m0.slack:
        log.warning(f"X diagonal {x_min:.3e} below m0 bound {m0.min_abs - m0.slack:.3e}")
    A = float(min(sig_int)) ** 2
    from .frame_oracle import upper_bound_estimate
    B = upper_bound_estimate(tab, alpha)
    cert = {
        "bound_kind": "section-interior",
        "xi_hat": win.xi_hat, "l": win.l, "delta": win.delta, "sigma_window": win.sigma_min,
        "t_max": t_max, "x_diag_min": x_min,
        "m0": m0._asdict(), "rows_stated": win.l + sum(win.k) + 1, "rows_built": win.l + sum(win.k) + 2,
    }
    return CertificationReport(Verdict.FRAME_CERTIFIED, "irrational", A, B, cert, {"sections": len(sig_int)})
