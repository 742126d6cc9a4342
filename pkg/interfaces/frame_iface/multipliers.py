import numpy as np
from dataclasses import dataclass
from typing import List, Sequence, Tuple
from .window import RationalWindow
from .errors import ExponentOverflow, PoleHit, AlphaOutOfRange

EXP_GUARD = 700.0
TWO_PI = 2.0 * np.pi

@dataclass(frozen=True, eq=False)
class ExpPoly:
    """Finite exponential sum  xi -> sum_k coef[k] * exp(freq[k] * xi)."""
    coef: np.ndarray
    freq: np.ndarray

    @staticmethod
    def from_terms(coef: Sequence[complex], freq: Sequence[complex], tol: float = 1e-13) -> "ExpPoly":
        c = np.asarray(coef, dtype=np.complex128).ravel()
        f = np.asarray(freq, dtype=np.complex128).ravel()
        if c.size == 0:
            return ExpPoly(np.zeros(0, np.complex128), np.zeros(0, np.complex128))
        order = np.lexsort((f.imag, f.real))
        c, f = c[order], f[order]
        cs, fs = [c[0]], [f[0]]
        for ci, fi in zip(c[1:], f[1:]):
            if abs(fi - fs[-1]) <= tol * max(1.0, abs(fi)):
                cs[-1] += ci
            else:
                cs.append(ci)
                fs.append(fi)
        cs, fs = np.array(cs), np.array(fs)
        keep = cs != 0
        return ExpPoly(cs[keep], fs[keep])

    def __call__(self, xi):
        x = np.asarray(xi, dtype=np.float64)
        out = (self.coef * np.exp(x.reshape(-1, 1) * self.freq)).sum(axis=1)
        return out.reshape(x.shape) if x.ndim else complex(out[0])

    def __add__(self, other: "ExpPoly") -> "ExpPoly":
        return ExpPoly.from_terms(np.concatenate([self.coef, other.coef]), np.concatenate([self.freq, other.freq]))

    def __mul__(self, other):
        if isinstance(other, ExpPoly):
            c = np.outer(self.coef, other.coef).ravel()
            f = np.add.outer(self.freq, other.freq).ravel()
            return ExpPoly.from_terms(c, f)
        return ExpPoly.from_terms(self.coef * complex(other), self.freq)

    __rmul__ = __mul__

    def derivative(self, order: int = 1) -> "ExpPoly":
        return ExpPoly.from_terms(self.coef * self.freq ** order, self.freq)

    def conj(self) -> "ExpPoly":
        # conjugate as a function of real xi
        return ExpPoly(np.conj(self.coef), np.conj(self.freq))

    def abs_sq(self) -> "ExpPoly":
        return self * self.conj()

    def shift(self, d: float) -> "ExpPoly":
        return ExpPoly(self.coef * np.exp(self.freq * d), self.freq)

    def integrate(self, lo: float, hi: float) -> complex:
        h = hi - lo
        out = 0j
        for c, f in zip(self.coef, self.freq):
            if abs(f * h) < 1e-12:
                out += c * np.exp(f * lo) * h
            else:
                out += c * np.exp(f * lo) * np.expm1(f * h) / f
        return complex(out)

    def sup_bound(self, lo, hi):
        """Sup of |self| over [lo, hi]; lo and hi may be arrays of cell edges."""
        r = self.freq.real
        lo = np.asarray(lo, dtype=np.float64)[..., None]
        hi = np.asarray(hi, dtype=np.float64)[..., None]
        out = (np.abs(self.coef) * np.maximum(np.exp(r * lo), np.exp(r * hi))).sum(axis=-1)
        return float(out) if out.ndim == 0 else out

@dataclass(frozen=True, eq=False)
class MultiplierTable:
    g: RationalWindow
    alpha: float
    u: np.ndarray
    A: np.ndarray
    m: Tuple[ExpPoly, ...]

    @property
    def N(self) -> int:
        return self.g.N

    @property
    def lam(self) -> np.ndarray:
        return TWO_PI * self.g.w

    def strings(self, xi, deriv: int = 0) -> np.ndarray:
        """Rows M(xi) = (m_0(xi), ..., m_{N-1}(xi)) for every xi, shape (len(xi), N)."""
        x = np.asarray(xi, dtype=np.float64).reshape(-1)
        e = self.g.a * self.lam ** deriv * np.exp(np.outer(x, self.lam))
        return e @ self.A

    def strings_bound(self, lo, hi, deriv: int = 0) -> np.ndarray:
        """Cellwise sup bound of |m_s^{(deriv)}| over [lo, hi], shape (len(lo), N)."""
        lo = np.asarray(lo, dtype=np.float64).reshape(-1)
        hi = np.asarray(hi, dtype=np.float64).reshape(-1)
        r = self.lam.real
        grow = np.maximum(np.exp(np.outer(lo, r)), np.exp(np.outer(hi, r)))
        return (grow * np.abs(self.g.a * self.lam ** deriv)) @ np.abs(self.A)

def _exponent_guard(g: RationalWindow, alpha: float) -> None:
    if not (0.0 < alpha <= 1.0 + 1e-12):
        raise AlphaOutOfRange(f"normalized alpha must lie in (0, 1], got {alpha}")
    worst = float(np.max(np.abs(TWO_PI * g.w.real / alpha)))
    if worst > EXP_GUARD:
        raise ExponentOverflow(f"|2*pi*Re w/alpha'| = {worst:.1f} exceeds {EXP_GUARD}")

def elementary_coeffs(g: RationalWindow, alpha: float) -> np.ndarray:
    _exponent_guard(g, alpha)
    u = np.exp(TWO_PI * g.w / alpha)
    N = g.N
    A = np.zeros((N, N), dtype=np.complex128)
    for k in range(N):
        poly = np.ones(1, dtype=np.complex128)
        for j in range(N):
            if j != k:
                poly = np.convolve(poly, np.array([1.0, -u[j]]))
        A[k, :] = poly
    return A

def multiplier_table(g: RationalWindow, alpha: float) -> MultiplierTable:
    A = elementary_coeffs(g, alpha)
    u = np.exp(TWO_PI * g.w / alpha)
    lam = TWO_PI * g.w
    m = tuple(ExpPoly.from_terms(g.a * A[:, s], lam) for s in range(g.N))
    return MultiplierTable(g, float(alpha), u, A, m)

def identity_residuals(tab: MultiplierTable, z: complex, xi: float) -> Tuple[float, List[float]]:
    g, u, N = tab.g, tab.u, tab.N
    den = 1.0 - z * u
    if np.any(np.abs(den) < 1e-14):
        raise PoleHit(f"z={z} hits 1/u_k")
    e = g.a * np.exp(TWO_PI * xi * g.w)
    M = tab.strings(xi)[0]
    # floating-point scale of each m_s: sum of its term moduli
    Mabs = np.abs(e) @ np.abs(tab.A)
    powers = z ** np.arange(N)
    pden = np.prod(den)
    lhs = (M * powers).sum() / pden
    terms = e / den
    rhs = terms.sum()
    scale = max(float(np.abs(terms).max()), float((Mabs * np.abs(powers)).sum() / abs(pden)), np.finfo(float).tiny)
    r_gen = abs(lhs - rhs) / scale
    r_res = []
    for j in range(N):
        inv = u[j] ** -np.arange(N, dtype=np.float64)
        right = e[j] * u[j] ** (1 - N) * np.prod(u[j] - np.delete(u, j))
        sc = max(float((Mabs * np.abs(inv)).sum()), abs(right), np.finfo(float).tiny)
        r_res.append(float(abs((M * inv).sum() - right) / sc))
    return float(r_gen), r_res

def criterion_constants(g: RationalWindow, alpha: float) -> Tuple[float, float]:
    rho = np.exp(-TWO_PI * np.abs(g.w.real) / alpha)
    return float(np.prod(1.0 - rho)), float(np.prod(1.0 + rho))

def kernel_rows(w: Sequence[complex], alpha: float, xs: Sequence[float]) -> np.ndarray:
    """C[i, k] = exp(lam_k xs_i) prod_{j != k} (1 - u_j), so that C @ a = sum_s m_s(xs)."""
    lam = TWO_PI * np.asarray(w, dtype=np.complex128)
    u = np.exp(lam / alpha)
    col = np.array([np.prod(1.0 - np.delete(u, k)) for k in range(lam.size)])
    return np.exp(np.outer(np.asarray(xs, dtype=np.float64), lam)) * col[None, :]

def kernel_relative_residual(C: np.ndarray, a: np.ndarray) -> float:
    num = float(np.abs(C @ a).max())
    den = float((np.abs(C) * np.abs(a)[None, :]).sum(axis=1).max())
    return num / max(den, np.finfo(float).tiny)
