import logging
import numpy as np
from dataclasses import dataclass
from typing import Callable, Dict, Any, Optional, Sequence, Tuple
from .window import RationalWindow, Lattice, rescale_to_unit_beta
from .multipliers import MultiplierTable, multiplier_table, criterion_constants
from .report import CertificationReport, Verdict
from .errors import LeadingVanishes, NearDegenerate, NotHerglotz, DensityTooLow, ContractionNotReached

log = logging.getLogger(__name__)

TOL_DIV = 1e-12
CHAIN_FLOOR = 1e-12
CHAIN_MAX_STEPS = 200000

@dataclass(frozen=True, eq=False)
class InterlacingSpec:
    mu: np.ndarray

    @property
    def n(self) -> int:
        return int(self.mu.size) - 1

def interlacing_spec(mu: Sequence[float]) -> InterlacingSpec:
    mu = np.asarray(mu, dtype=np.float64).ravel()
    if mu.size < 1 or np.any(mu <= 0) or np.any(mu >= 1) or np.any(np.diff(mu) >= 0):
        raise ValueError(f"nodes must be strictly decreasing inside (0, 1), got {mu}")
    return InterlacingSpec(mu)

@dataclass(frozen=True, eq=False)
class ContractionNorm:
    nu: np.ndarray
    mu: InterlacingSpec
    V: np.ndarray
    scale: float
    c_low: float
    c_up: float

    @property
    def C(self) -> float:
        return self.c_up / self.c_low

    def norm(self, q) -> float:
        # q: coefficients in decreasing powers, length n
        return float(np.abs(self.nu * (self.V @ np.asarray(q))).sum())

def frobenius_matrix(b: Sequence[complex]) -> np.ndarray:
    """Companion matrix of z^n + b[n-1] z^(n-1) + ... + b[0]; first row is -(b[n-1], ..., b[0])."""
    b = np.asarray(b)
    n = b.size
    F = np.zeros((n, n), dtype=np.result_type(b.dtype, np.float64))
    if n == 0:
        return F
    F[0, :] = -b[::-1]
    F[np.arange(1, n), np.arange(n - 1)] = 1.0
    return F

def companion_batch(b: np.ndarray) -> np.ndarray:
    G, n = b.shape
    F = np.zeros((G, n, n), dtype=np.complex128)
    F[:, 0, :] = -b[:, ::-1]
    F[:, np.arange(1, n), np.arange(n - 1)] = 1.0
    return F

def oriented_coeffs(M: np.ndarray, backward: bool = False, tab: Optional[MultiplierTable] = None) -> np.ndarray:
    """Monic coefficients (increasing powers, leading dropped) of the chain polynomial for each row of M."""
    n = M.shape[1] - 1
    lead = M[:, 0] if backward else M[:, n]
    if tab is not None:
        x_scale = np.abs(M).max(axis=1)
        if np.any(np.abs(lead) <= TOL_DIV * x_scale):
            raise LeadingVanishes("leading multiplier vanishes on the grid")
    body = M[:, ::-1][:, :n] if backward else M[:, :n]
    return body / lead[:, None]

def pxi_polynomial(tab: MultiplierTable, xi: float) -> np.ndarray:
    M = tab.strings(xi)
    n = tab.N - 1
    scale = (np.abs(tab.g.a * np.exp(tab.lam * xi)) @ np.abs(tab.A))[n]
    if abs(M[0, n]) <= TOL_DIV * scale:
        raise LeadingVanishes(f"|m_{n}({xi})| = {abs(M[0, n]):.3e} at the division tolerance")
    return M[0, :n] / M[0, n]

def contraction_norm(spec: InterlacingSpec) -> ContractionNorm:
    mu = spec.mu
    n = spec.n
    if n >= 1 and float(np.min(-np.diff(mu))) < 1e-10:
        raise NearDegenerate(f"interlacing nodes too close: min gap {float(np.min(-np.diff(mu))):.3e}")
    nu = np.array([1.0 / np.prod(mu[k] - np.delete(mu, k)) for k in range(n + 1)])
    scale = float(np.abs(nu).max())
    nu = nu / scale
    V = np.vander(mu, n, increasing=False) if n > 0 else np.zeros((1, 0))
    if n == 0:
        return ContractionNorm(nu, spec, V, scale, 1.0, 1.0)
    T = nu[:, None] * V
    sv = np.linalg.svd(T, compute_uv=False)
    return ContractionNorm(nu, spec, V, scale, float(sv[-1]), float(np.sqrt(n + 1) * sv[0]))

def vertex_polynomial(mu: np.ndarray, l: int) -> np.ndarray:
    # p_l(x) = prod_{k != l} (x - mu_k), decreasing powers, monic
    return np.poly(np.delete(mu, l))

def verify_contraction(cn: ContractionNorm, l: int, q: Sequence[float]) -> Tuple[float, float]:
    p = vertex_polynomial(cn.mu.mu, l)
    b = p[1:][::-1]
    r = frobenius_matrix(b).T @ np.asarray(q, dtype=np.float64)
    return cn.norm(r), float(cn.mu.mu[0]) * cn.norm(q)

def vertex_weights(mu: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Convex weights lam with sum_l lam_l p_l = p for a monic p of degree n (decreasing powers)."""
    n = mu.size - 1
    P = np.stack([vertex_polynomial(mu, l)[1:] for l in range(n + 1)], axis=1)
    S = np.vstack([P, np.ones((1, n + 1))])
    rhs = np.concatenate([np.asarray(p, dtype=np.float64)[1:], [1.0]])
    return np.linalg.solve(S, rhs)

def interlacing_sign_changes(tab: MultiplierTable, mu: np.ndarray, xi: float) -> int:
    M = tab.strings(xi)[0]
    vals = np.array([np.polyval(M[::-1], x) for x in mu]).real
    return int(np.sum(np.sign(vals[1:]) != np.sign(vals[:-1])))

def lead_lower_bound(tab: MultiplierTable, index: int, lo: float, hi: float, grid: int) -> Tuple[float, float, float]:
    """(grid min, slack, argmin) of |m_index| on [lo, hi] with a cellwise derivative bound."""
    x = np.linspace(lo, hi, grid + 1)
    v = np.abs(tab.strings(x)[:, index])
    d = tab.strings_bound(x[:-1], x[1:], deriv=1)[:, index]
    h = x[1] - x[0]
    cell = np.minimum(v[:-1], v[1:]) - 0.5 * h * d
    i = int(np.argmin(cell))
    return float(np.min(v)), float(np.min(v) - cell[i]) if cell[i] < np.min(v) else 0.0, float(x[i])

def chain_constants(tab: MultiplierTable, grid: int, backward: bool, tail_factor: Callable[[], float]) -> Dict[str, Any]:
    """Series constants of the companion chain  sum_s || prod_{j<s} F(p_{xi -+ j/alpha'}) ||_2  over a xi-grid on [0, 1)."""
    n = tab.N - 1
    if n == 0:
        return {"C_sigma": 1.0, "S_sup": 1.0, "steps": 0, "tail": 0.0}
    xi = np.arange(grid) / grid
    sign = 1.0 if backward else -1.0
    P = np.broadcast_to(np.eye(n, dtype=np.complex128), (grid, n, n)).copy()
    sums = np.ones(grid)
    sup_sum = 1.0
    step = 0
    tail = 0.0
    while True:
        pts = np.mod(xi + sign * step / tab.alpha, 1.0)
        F = companion_batch(oriented_coeffs(tab.strings(pts), backward, tab))
        P = P @ F
        step += 1
        norms = np.linalg.norm(P, ord=2, axis=(1, 2))
        sums += norms
        top = float(norms.max())
        sup_sum += top
        if top < CHAIN_FLOOR:
            tail = top * tail_factor()
            break
        if step >= CHAIN_MAX_STEPS:
            raise ContractionNotReached(f"companion chain did not decay in {step} steps (sup norm {top:.3e})", top)
    log.debug(f"chain converged after {step} steps, sup sum {float(sums.max()):.4g}")
    return {"C_sigma": float(sums.max()) + tail, "S_sup": sup_sum + tail, "steps": step, "tail": tail}

def assemble_lower_bound(tab: MultiplierTable, chain: Dict[str, Any], backward: bool, grid: int) -> Dict[str, Any]:
    index = 0 if backward else tab.N - 1
    mn, slack, at = lead_lower_bound(tab, index, 0.0, 1.0, grid)
    lead = mn - slack
    A = (lead ** 2) / (chain["C_sigma"] * chain["S_sup"]) if lead > 0 else 0.0
    return {"lead_index": index, "lead_min": mn, "lead_slack": slack, "lead_argmin": at, "A_crit": A}

def certify_herglotz(g: RationalWindow, lat: Lattice, grid: int = 512) -> CertificationReport:
    from .frame_oracle import upper_bound_estimate
    if not g.cls.herglotz:
        raise NotHerglotz("window is not Herglotz (needs all a_k > 0 and w_k > 0 real)")
    if lat.product > 1.0 + 1e-12:
        raise DensityTooLow(f"alpha*beta = {lat.product} > 1: no frame")
    gb, alpha = rescale_to_unit_beta(g, lat)
    alpha = min(alpha, 1.0)
    tab = multiplier_table(gb, alpha)
    spec = interlacing_spec(np.exp(-2.0 * np.pi * gb.w.real / alpha))
    cn = contraction_norm(spec)
    mu1 = float(spec.mu[0])
    chain = chain_constants(tab, grid, False, lambda: cn.C / (1.0 - mu1))
    bound = assemble_lower_bound(tab, chain, False, grid)
    checks = np.linspace(0.0, 1.0, 100, endpoint=False)
    bad = [float(x) for x in checks if interlacing_sign_changes(tab, spec.mu, x) != spec.n]
    pmin, pmax = criterion_constants(gb, alpha)
    B = upper_bound_estimate(tab, alpha)
    log.info(f"herglotz certificate: C_sigma={chain['C_sigma']:.4g}, A_crit={bound['A_crit']:.4g}")
    cert = {
        "bound_kind": "criterion-operator",
        "c": mu1,
        "mu": spec.mu,
        "norm_equivalence": {"c_low": cn.c_low, "c_up": cn.c_up, "C": cn.C},
        "C_sigma": chain["C_sigma"],
        "S_sup": chain["S_sup"],
        "chain_steps": chain["steps"],
        "chain_tail": chain["tail"],
        "lead": bound,
        "criterion_constants": {"pmin": pmin, "pmax": pmax},
        "A_crit_frame_scaled": bound["A_crit"] * pmin ** 2,
    }
    diag = {"interlacing_failures": bad, "grid": grid}
    verdict = Verdict.FRAME_CERTIFIED if bound["A_crit"] > 0 and not bad else Verdict.INCONCLUSIVE
    return CertificationReport(verdict, "herglotz", bound["A_crit"], B, cert, diag)
