import logging
import numpy as np
from dataclasses import dataclass
from typing import NamedTuple
from scipy.linalg import svdvals
from .window import RationalWindow, Lattice, rescale_to_unit_beta
from .multipliers import MultiplierTable, multiplier_table, TWO_PI
from .report import CertificationReport, Verdict
from .errors import DensityTooHigh, DegenerateRe

log = logging.getLogger(__name__)

@dataclass(frozen=True, eq=False)
class BlockB:
    theta: float
    mat: np.ndarray

    def normalized(self) -> np.ndarray:
        sup = np.abs(self.mat).max(axis=1)
        return self.mat / np.where(sup > 0, sup, 1.0)[:, None]

class DetFactorization(NamedTuple):
    # determinants kept as (phase, log|.|) so huge theta does not overflow
    sign_B: complex
    log_B: float
    sign_X: complex
    log_X: float
    sign_Y: complex
    log_Y: float
    residual: float
    vandermonde_residual: float

    @property
    def detB(self) -> complex:
        return self.sign_B * np.exp(self.log_B)

    @property
    def detX(self) -> complex:
        return self.sign_X * np.exp(self.log_X)

    @property
    def detY(self) -> complex:
        return self.sign_Y * np.exp(self.log_Y)

def build_B(tab: MultiplierTable, theta: float, rows: int | None = None) -> BlockB:
    N = tab.N
    if theta < N - 1 - 1e-12:
        raise ValueError(f"block needs theta >= N-1 = {N - 1}, got {theta}")
    r = np.arange(rows or N)
    return BlockB(float(theta), tab.strings(theta - r))

def factor_X(g: RationalWindow, theta: float) -> np.ndarray:
    y = np.exp(-TWO_PI * g.w)
    A = g.a * np.exp(TWO_PI * theta * g.w)
    return A[None, :] * y[None, :] ** np.arange(g.N)[:, None]

def _vandermonde(u: np.ndarray) -> complex:
    out = 1.0 + 0j
    for k in range(u.size):
        for l in range(k + 1, u.size):
            out *= u[k] - u[l]
    return out

def detB_factorization(tab: MultiplierTable, g: RationalWindow, theta: float) -> DetFactorization:
    B = build_B(tab, theta).mat
    X = factor_X(g, theta)
    Y = tab.A
    sB, lB = np.linalg.slogdet(B)
    sX, lX = np.linalg.slogdet(X)
    sY, lY = np.linalg.slogdet(Y)
    res = abs(sB - sX * sY * np.exp(lX + lY - lB)) if np.isfinite(lB) else float("inf")
    v = _vandermonde(tab.u)
    detY = sY * np.exp(lY)
    vres = min(abs(detY - v), abs(detY + v)) / max(abs(v), np.finfo(float).tiny)
    return DetFactorization(complex(sB), float(lB), complex(sX), float(lX), complex(sY), float(lY), float(res), float(vres))

def translation_matrix(tab: MultiplierTable) -> np.ndarray:
    """T with M(xi + 1/alpha') = M(xi) T."""
    return np.linalg.solve(tab.A, tab.u[:, None] * tab.A)

def covariance_residual(tab: MultiplierTable, theta: float) -> float:
    # det B(theta + 1/alpha') = det B(theta) * prod(u)
    s0, l0 = np.linalg.slogdet(build_B(tab, theta).mat)
    s1, l1 = np.linalg.slogdet(build_B(tab, theta + 1.0 / tab.alpha).mat)
    pu = np.prod(tab.u)
    return float(abs(s1 - s0 * (pu / abs(pu)) * np.exp(l0 + np.log(abs(pu)) - l1)))

def _best_block(tab: MultiplierTable, theta: float, per_block: int) -> tuple[float, int]:
    rows = build_B(tab, theta, per_block + tab.N - 1)
    Bn = rows.normalized()
    best, at = -1.0, 0
    for j in range(per_block):
        s = float(svdvals(Bn[j:j + tab.N])[-1])
        if s > best:
            best, at = s, j
    return best, at

def certify_high_density(g: RationalWindow, lat: Lattice, grid: int = 512) -> CertificationReport:
    gb, alpha = rescale_to_unit_beta(g, lat)
    N = gb.N
    if alpha > 1.0 / N + 1e-12:
        raise DensityTooHigh(f"alpha*beta = {alpha} exceeds 1/N = {1.0 / N}")
    if not gb.cls.distinct_re:
        raise DegenerateRe("determinant factorization needs distinct Re w")
    tab = multiplier_table(gb, alpha)
    per_block = max(1, int(np.floor(1.0 / alpha + 1e-12)) - N + 1)
    thetas = (N - 1) + per_block - 1 + np.arange(grid) / grid / alpha
    sig = np.empty(grid)
    pick = np.empty(grid, dtype=np.int64)
    for i, th in enumerate(thetas):
        sig[i], pick[i] = _best_block(tab, float(th), per_block)
    fac = [detB_factorization(tab, gb, float(th)) for th in thetas[:: max(1, grid // 16)]]
    cov = covariance_residual(tab, float(thetas[0]))
    i = int(np.argmin(sig))
    log.info(f"high-density block: inf sigma_min={sig[i]:.3e} at theta={thetas[i]:.4f}")
    from .frame_oracle import upper_bound_estimate
    B = upper_bound_estimate(tab, alpha)
    cert = {"bound_kind": "determinant-lemma", "detY_vandermonde_residual": max(f.vandermonde_residual for f in fac),
            "factorization_residual": max(f.residual for f in fac), "covariance_residual": cov}
    diag = {"sigma_min_normalized": float(sig[i]), "theta_argmin": float(thetas[i]), "block_offset": int(pick[i]),
            "rows_per_block": per_block + N - 1}
    return CertificationReport(Verdict.FRAME_CERTIFIED, "high-density", None, B, cert, diag)
