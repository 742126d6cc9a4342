import logging
import numpy as np
from dataclasses import dataclass, field
from typing import Dict, Any, Tuple
from scipy.optimize import least_squares
from .window import RationalWindow, Lattice, rescale_to_unit_beta
from .multipliers import MultiplierTable, multiplier_table, TWO_PI
from .herglotz_cert import companion_batch, oriented_coeffs, chain_constants, assemble_lower_bound
from .report import CertificationReport, Verdict
from .errors import (PoleHit, InconclusivePositivity, PositivityFails, DivergentSeries, NotRealProfile,
                     ContractionNotReached, DensityTooLow, AlphaOutOfRange)
from ..ui_iface.runner.kernels import zak_grid, winding_count

log = logging.getLogger(__name__)

TORUS_GRID = (1024, 512)
M_MAX = 256

@dataclass
class PositivityCertificate:
    min_value: float
    grid: Tuple[int, int]
    lipschitz_slack: float
    certified: bool
    xi_range: Tuple[float, float] = (0.0, 0.0)
    tails: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {"min_value": self.min_value, "grid": list(self.grid), "lipschitz_slack": self.lipschitz_slack,
                "certified": self.certified, "xi_range": list(self.xi_range), "tails": self.tails}

def zak_eval(g: RationalWindow, alpha: float, z: complex, xi: float) -> complex:
    den = 1.0 - z * np.exp(TWO_PI * g.w / alpha)
    if np.any(np.abs(den) < 1e-14):
        raise PoleHit(f"z={z} is a pole of the Zak transform")
    return complex((g.a * np.exp(TWO_PI * xi * g.w) / den).sum())

def _tail_threshold(g: RationalWindow, zeta: np.ndarray, weight: np.ndarray, d: int, direction: float) -> Dict[str, Any]:
    # dominance of term d beyond xi = direction * X for the real part
    r = float(np.abs(zeta[d]))
    phase = float(np.angle(g.a[d]))
    ok = abs(g.w[d].imag) <= 1e-12 and np.cos(phase) - r > 1e-12
    out = {"term": d, "ok": bool(ok), "X": 0.0}
    if not ok:
        return out
    lead = weight[d] * np.abs(g.a[d]) * (np.cos(phase) - r) / (1.0 - r * r)
    others = [k for k in range(g.N) if k != d]
    if not others:
        return out
    X = 1.0
    for _ in range(200):
        xi = direction * X
        rest = sum(weight[k] * np.abs(g.a[k]) / (1.0 - np.abs(zeta[k])) * np.exp(TWO_PI * xi * (g.w[k].real - g.w[d].real)) for k in others)
        if rest < 0.5 * lead:
            out["X"] = float(X)
            return out
        X *= 1.5
    out["ok"] = False
    return out

def _torus_slack(cmax: np.ndarray, zeta: np.ndarray, lam_abs: np.ndarray, ts: np.ndarray, hx: float, conj: bool) -> np.ndarray:
    """Cellwise Lipschitz slack of sum_k c_k / (1 - zeta_k z) over the (xi, t) grid cells."""
    nt = ts.size - 1
    z = np.exp((-2j if conj else 2j) * np.pi * ts)
    den = np.abs(1.0 - np.outer(z, zeta))
    gap = np.abs(1.0 - np.abs(zeta))
    dcell = np.maximum(np.minimum(den[:-1], den[1:]) - np.pi * np.abs(zeta) / nt, gap)
    Dt = cmax @ (TWO_PI * np.abs(zeta) / dcell ** 2).T
    Dx = (cmax * lam_abs) @ (1.0 / dcell).T
    return 0.5 * (Dt / nt + Dx * hx)

def _cell_min(V: np.ndarray) -> np.ndarray:
    return np.minimum(np.minimum(V[:-1, :-1], V[1:, :-1]), np.minimum(V[:-1, 1:], V[1:, 1:]))

def re_zak_certificate(g: RationalWindow, alpha: float, grids: Tuple[int, int] = TORUS_GRID) -> PositivityCertificate:
    if not (g.cls.all_re_neg or g.cls.all_re_pos):
        raise PositivityFails("poles in both half-planes: positivity hypothesis not applicable")
    mirrored = g.cls.all_re_pos
    lam = TWO_PI * g.w
    u = np.exp(lam / alpha)
    # |zeta| < 1 in the geometric expansion of each term; mirrored terms carry the factor mu = 1/u
    zeta = 1.0 / u if mirrored else u
    weight = np.abs(zeta) if mirrored else np.ones(g.N)
    order = np.argsort(g.w.real)
    hi_tail = _tail_threshold(g, zeta, weight, int(order[-1]), +1.0)
    lo_tail = _tail_threshold(g, zeta, weight, int(order[0]), -1.0)
    tails = {"upper": hi_tail, "lower": lo_tail}
    tails_ok = hi_tail["ok"] and lo_tail["ok"]
    x_lo, x_hi = -max(lo_tail["X"], 1.0), max(hi_tail["X"], 1.0)
    nt, nx = grids
    ts = np.arange(nt + 1) / nt
    xs = np.linspace(x_lo, x_hi, nx + 1)
    F = zak_grid(g.a, lam, u, ts, xs, mirrored).real
    s = np.exp(np.outer(xs, lam.real)) @ (weight * np.abs(g.a))
    cmax = np.maximum(np.exp(np.outer(xs[:-1], lam.real)), np.exp(np.outer(xs[1:], lam.real))) * (weight * np.abs(g.a))
    slack = _torus_slack(cmax, zeta, np.abs(lam), ts, xs[1] - xs[0], mirrored)
    smin = np.minimum(s[:-1], s[1:])[:, None]
    corners = _cell_min(F)
    margin = (corners - slack) / smin
    i, j = np.unravel_index(int(np.argmin(margin)), margin.shape)
    cert = PositivityCertificate(float(corners[i, j] / smin[i, 0]), grids, float(slack[i, j] / smin[i, 0]),
                                 bool(tails_ok and margin[i, j] > 0), (float(x_lo), float(x_hi)), tails)
    if tails_ok and not cert.certified and float(F.min()) > 0:
        raise InconclusivePositivity(f"grid minimum positive but slack {cert.lipschitz_slack:.3e} exceeds margin; refine grid")
    return cert

def cosine_series_residual(g: RationalWindow, alpha: float, xi: float, t: float, terms: int) -> Tuple[float, float]:
    u = np.exp(TWO_PI * g.w / alpha)
    if np.any(np.abs(u) >= 1.0):
        raise DivergentSeries("geometric expansion needs |u_k| < 1 for all k")
    e = g.a * np.exp(TWO_PI * xi * g.w)
    n = np.arange(terms + 1)
    m0 = (e[None, :] * u[None, :] ** n[:, None]).sum(axis=1)
    series = float((np.exp(1j * n * t) * m0).real.sum())
    exact = zak_eval(g, alpha, np.exp(1j * t), xi).real
    tail = float((np.abs(e) * np.abs(u) ** (terms + 1) / (1.0 - np.abs(u))).sum())
    return abs(series - exact), tail

def _sign_certified(f, lo: float, hi: float, grid: int) -> bool:
    x = np.linspace(lo, hi, grid + 1)
    v = f(x).real
    h = x[1] - x[0]
    d = np.array([f.derivative().sup_bound(a, b) for a, b in zip(x[:-1], x[1:])])
    return bool(np.all(np.minimum(v[:-1], v[1:]) - 0.5 * h * d > 0))

def convexity_profile(g: RationalWindow, grid: int = 2048) -> Tuple[bool, bool, bool]:
    if not (g.cls.all_re_neg and np.all(g.w.imag == 0) and np.all(g.a.imag == 0)):
        raise NotRealProfile("convexity test needs real coefficients and real negative poles")
    from .multipliers import ExpPoly
    m0 = ExpPoly.from_terms(g.a, TWO_PI * g.w)
    d = int(np.argmax(g.w.real))
    out = []
    for j, want in ((0, 1.0), (1, -1.0), (2, 1.0)):
        f = m0.derivative(j) * want if j else m0 * want
        lead = want * (g.a[d] * (TWO_PI * g.w[d]) ** j).real
        if lead <= 0:
            out.append(False)
            continue
        X = 1.0
        for _ in range(200):
            rest = sum(abs(g.a[k] * (TWO_PI * g.w[k]) ** j) * np.exp(TWO_PI * X * (g.w[k].real - g.w[d].real)) for k in range(g.N) if k != d)
            if rest < 0.5 * lead:
                break
            X *= 1.5
        out.append(_sign_certified(f, 0.0, X, grid))
    return out[0], out[1], out[2]

def _winding_all(tab: MultiplierTable, xi: np.ndarray, rho: float, backward: bool) -> bool:
    n = tab.N - 1
    M = tab.strings(xi)
    for row in M:
        c = row[::-1] if backward else row
        # scale z -> rho z so coefficients stay moderate
        if winding_count(c, rho) != n:
            return False
    return True

def _relevant_modulus(g: RationalWindow, alpha: float, backward: bool) -> float:
    lam = TWO_PI * g.w.real / alpha
    return float(np.max(np.exp(lam) if backward else np.exp(-lam)))

def certify_near_critical(g: RationalWindow, lat: Lattice, grid: int = 512, torus: Tuple[int, int] = TORUS_GRID) -> CertificationReport:
    from .frame_oracle import upper_bound_estimate
    gb, alpha = rescale_to_unit_beta(g, lat)
    if abs(alpha - 1.0) <= 1e-12:
        return critical_density_check(g, lat, torus)
    if alpha > 1.0:
        raise DensityTooLow(f"alpha*beta = {alpha} > 1: no frame")
    pos = re_zak_certificate(gb, alpha, torus)
    if not pos.certified:
        why = "" if pos.tails["upper"]["ok"] and pos.tails["lower"]["ok"] else ", tail dominance fails"
        raise PositivityFails(f"Zak positivity not certified (min {pos.min_value:.3e}, slack {pos.lipschitz_slack:.3e}{why})")
    backward = gb.cls.all_re_neg
    tab = multiplier_table(gb, alpha)
    n = tab.N - 1
    xi = np.arange(grid) / grid
    rm = _relevant_modulus(gb, alpha, backward)
    payload: Dict[str, Any] = {"positivity": pos, "orientation": "backward" if backward else "forward", "relevant_modulus": rm}
    if n == 0:
        chain = chain_constants(tab, grid, backward, lambda: 0.0)
        bound = assemble_lower_bound(tab, chain, backward, grid)
        payload.update({"chain": chain, "lead": bound})
        return CertificationReport(Verdict.FRAME_CERTIFIED, "near-critical", bound["A_crit"], upper_bound_estimate(tab, alpha), payload, {})
    rho = 0.5 * (1.0 + rm)
    ok = _winding_all(tab, xi, rho, backward)
    tries = 0
    while not ok and tries < 10:
        rho = 0.5 * (1.0 + rho)
        ok = _winding_all(tab, xi, rho, backward)
        tries += 1
    if not ok:
        raise ContractionNotReached("chain polynomial roots not inside any circle of radius < 1")
    for _ in range(30):
        cand = 0.5 * (rho + rm)
        if cand - rm < 1e-6 or not _winding_all(tab, xi, cand, backward):
            break
        rho = cand
    payload["rho"] = rho
    F = companion_batch(oriented_coeffs(tab.strings(xi), backward, tab))
    P = F.copy()
    M, q = 0, np.inf
    for k in range(1, M_MAX + 1):
        q = float(np.linalg.norm(P, ord=2, axis=(1, 2)).max())
        if q <= 0.5:
            M = k
            break
        P = P @ F
    if M == 0:
        raise ContractionNotReached(f"sup ||F^M|| > 0.5 up to M={M_MAX}", q)
    sign = 1.0 if backward else -1.0
    W = np.broadcast_to(np.eye(n, dtype=np.complex128), (grid, n, n)).copy()
    K = 1.0
    for j in range(M):
        pts = np.mod(xi + sign * j / alpha, 1.0)
        W = W @ companion_batch(oriented_coeffs(tab.strings(pts), backward, tab))
        if j < M - 1:
            K = max(K, float(np.linalg.norm(W, ord=2, axis=(1, 2)).max()))
    q_prime = float(np.linalg.norm(W, ord=2, axis=(1, 2)).max())
    payload.update({"M": M, "q": q, "q_prime": q_prime, "K": K})
    if q_prime >= 1.0:
        raise ContractionNotReached(f"window product bound q'={q_prime:.4f} >= 1 at M={M}", q_prime)
    chain = chain_constants(tab, grid, backward, lambda: K * M / (1.0 - q_prime))
    bound = assemble_lower_bound(tab, chain, backward, grid)
    payload.update({"chain": chain, "lead": bound, "bound_kind": "criterion-operator"})
    log.info(f"near-critical certificate: M={M}, q'={q_prime:.4f}, A_crit={bound['A_crit']:.4g}")
    verdict = Verdict.FRAME_CERTIFIED if bound["A_crit"] > 0 else Verdict.INCONCLUSIVE
    return CertificationReport(verdict, "near-critical", bound["A_crit"], upper_bound_estimate(tab, alpha), payload, {"grid": grid})

def critical_density_check(g: RationalWindow, lat: Lattice, torus: Tuple[int, int] = TORUS_GRID) -> CertificationReport:
    gb, alpha = rescale_to_unit_beta(g, lat)
    if abs(alpha - 1.0) > 1e-12:
        raise AlphaOutOfRange(f"critical check needs alpha*beta = 1, got {alpha}")
    alpha = 1.0
    nt, nx = torus
    ts = np.arange(nt + 1) / nt
    xs = np.linspace(0.0, 1.0, nx + 1)
    lam = TWO_PI * gb.w
    u = np.exp(lam)
    A = np.abs(zak_grid(gb.a, lam, u, ts, xs, False))
    cmax = np.maximum(np.exp(np.outer(xs[:-1], lam.real)), np.exp(np.outer(xs[1:], lam.real))) * np.abs(gb.a)
    slack = _torus_slack(cmax, u, np.abs(lam), ts, xs[1] - xs[0], False)
    corners = _cell_min(A)
    margin = corners - slack
    zmax = float(A.max()) + float(slack.max())
    if float(margin.min()) > 0:
        i, j = np.unravel_index(int(np.argmin(margin)), margin.shape)
        lo = float(margin[i, j])
        cert = {"bound_kind": "zak-multiplier", "min_abs_zak": float(corners[i, j]), "slack": float(slack[i, j]), "grid": list(torus)}
        return CertificationReport(Verdict.FRAME_CERTIFIED, "critical", lo ** 2, zmax ** 2, cert, {})
    j, k = np.unravel_index(int(np.argmin(A)), A.shape)

    def resid(p):
        v = zak_eval(gb, alpha, np.exp(2j * np.pi * p[0]), p[1])
        return [v.real, v.imag]

    sol = least_squares(resid, x0=[ts[k], xs[j]], xtol=1e-15, ftol=1e-15, gtol=1e-15)
    t0, x0 = float(sol.x[0]), float(sol.x[1])
    val = abs(zak_eval(gb, alpha, np.exp(2j * np.pi * t0), x0))
    scale = float((np.abs(gb.a * np.exp(TWO_PI * x0 * gb.w)) / np.abs(1.0 - np.abs(u))).sum())
    if val <= 1e-10 * scale:
        from .frame_oracle import zak_zero_witness
        log.info(f"Zak zero located at t={t0:.6f}, xi={x0:.6f}")
        witness = zak_zero_witness(gb, t0, x0)
        if witness is not None:
            witness["abs_zak"] = val
            return CertificationReport(Verdict.NOT_FRAME_WITNESSED, "critical", 0.0, zmax ** 2, {"witness": witness}, {})
        raise InconclusivePositivity(f"Zak zero at t={t0:.6f}, xi={x0:.6f} without a decaying fiber witness")
    raise InconclusivePositivity(f"min |Z| on grid {float(A.min()):.3e} within slack {float(slack.max()):.3e}, no zero located")
