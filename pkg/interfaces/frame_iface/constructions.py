import logging
import numpy as np
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple
from scipy.linalg import svd
from scipy.optimize import newton
from .window import RationalWindow, validate_window
from .multipliers import multiplier_table, kernel_rows, kernel_relative_residual, TWO_PI
from .errors import AlphaOutOfRange, ContinuationLost, DuplicatePole, NullspaceRankMismatch, RankDeficient, NotFound
from ..ui_iface.runner.kernels import winding_count_fn

log = logging.getLogger(__name__)

W2 = 1.0 / TWO_PI
W3 = -1.0 / TWO_PI
ANCHOR_RADIUS = 1e-3
HOMOTOPY_STEP = 1e-4
LAYOUTS = ("stated", "aligned")
DEFAULT_XI0 = {"stated": 0.995, "aligned": 0.75}

@dataclass
class Obstruction3:
    alpha: float
    w: np.ndarray
    a: np.ndarray
    xi0: float
    roots_z: List[complex]
    layout: str = "aligned"
    branch: int = 0
    residuals: List[float] = field(default_factory=list)

    def window(self) -> RationalWindow:
        return validate_window(self.a, self.w)

    @property
    def points(self) -> Tuple[float, float, float]:
        return condition_points(self.xi0, 1.0 / self.alpha - 1.0, self.layout)

    @property
    def witness_center(self) -> Optional[float]:
        # only the aligned layout puts all three zeros on one lattice column
        return self.xi0 if self.layout == "aligned" else None

    def to_dict(self) -> Dict[str, Any]:
        d = self.window().to_dict()
        d.update({"name": f"degree3-{self.layout}", "lattice": {"alpha": float(self.alpha), "beta": 1.0},
                  "meta": {"xi0": self.xi0, "layout": self.layout, "branch": self.branch,
                           "residuals": list(self.residuals), "witness_center": self.witness_center}})
        return d

def condition_points(xi0: float, eps: float, layout: str) -> Tuple[float, float, float]:
    if layout == "stated":
        return xi0 - 2 * eps, xi0 - eps, xi0
    if layout == "aligned":
        return xi0, xi0 - eps, xi0 - 2 * eps
    raise ValueError(f"unknown layout {layout!r}, expected one of {LAYOUTS}")

def _elementary(u: np.ndarray) -> np.ndarray:
    # A[..., k, s] = (-1)^s e_s(u without u_k) for three poles
    A = np.empty(u.shape + (3,), dtype=np.complex128)
    for k in range(3):
        o = [j for j in range(3) if j != k]
        A[..., k, 0] = 1.0
        A[..., k, 1] = -(u[..., o[0]] + u[..., o[1]])
        A[..., k, 2] = u[..., o[0]] * u[..., o[1]]
    return A

def obstruction_condition_matrix(w1, alpha: float, layout: str, xi0: float = 0.0) -> np.ndarray:
    """C[s, k] = exp(2 pi w_k P_s) A_{k,s}; batched over w1."""
    w1 = np.atleast_1d(np.asarray(w1, dtype=np.complex128))
    w = np.stack([w1, np.full_like(w1, W2), np.full_like(w1, W3)], axis=-1)
    u = np.exp(TWO_PI * w / alpha)
    A = _elementary(u)
    P = np.array(condition_points(xi0, 1.0 / alpha - 1.0, layout))
    E = np.exp(TWO_PI * P[None, :, None] * w[:, None, :])
    return E * np.swapaxes(A, -1, -2)

def condition_det(w1, alpha: float, layout: str) -> np.ndarray:
    C = obstruction_condition_matrix(w1, alpha, layout)
    scale = np.prod(np.linalg.norm(C, axis=-2), axis=-1)
    return np.linalg.det(C) / scale

def stated_polynomial() -> np.ndarray:
    """Degree-12 polynomial (highest power first) equivalent to the obstruction equation at alpha = 6/7."""
    e = np.e
    c12 = e - 1 / e
    c7 = np.exp(1 / 6) - np.exp(-1 / 6)
    K = e ** 2 - e ** -2 - np.exp(1 / 3) + np.exp(-1 / 3)
    p = np.zeros(13)
    p[0] = c12
    p[12 - 7] = -c7
    p[12 - 6] = -K
    p[12 - 5] = -c7
    p[12] = c12
    return p

def _anchor(alpha: float) -> int:
    n = int(round(alpha / (1.0 - alpha)))
    if n < 2 or abs(alpha - n / (n + 1)) > ANCHOR_RADIUS:
        raise AlphaOutOfRange(f"alpha={alpha} is not within {ANCHOR_RADIUS} of some n/(n+1)")
    return n

def root_to_pole(z: complex, alpha: float) -> complex:
    eps = 1.0 / alpha - 1.0
    ang = np.angle(z)
    if ang <= -np.pi + 1e-12:
        ang += TWO_PI
    return complex(np.log(abs(z)), ang) / (TWO_PI * eps)

def _z_function(n: int, layout: str):
    alpha = n / (n + 1.0)
    return lambda z: condition_det(np.log(complex(z)) / (TWO_PI / n), alpha, layout)[0]

def _laurent_roots(n: int, layout: str, samples: int = 512) -> np.ndarray:
    f = _z_function(n, layout)
    z = np.exp(2j * np.pi * np.arange(samples) / samples)
    # undo the column-norm scaling so the samples form an exact Laurent polynomial
    C = obstruction_condition_matrix(np.log(z) / (TWO_PI / n), n / (n + 1.0), layout)
    c = np.fft.fft(np.linalg.det(C)) / samples
    jmax = 4 * (n + 1)
    ks = np.arange(-jmax, jmax + 1)
    coef = c[ks % samples]
    coef[np.abs(coef) < 1e-13 * np.abs(coef).max()] = 0.0
    nz = np.flatnonzero(coef)
    coef = coef[nz[0]:nz[-1] + 1]
    roots = np.roots(coef[::-1])
    roots = roots[np.abs(roots) > 1e-8]
    out = []
    for r in roots:
        try:
            rr = complex(newton(f, r, tol=1e-15, maxiter=100))
        except RuntimeError:
            continue
        if abs(f(rr)) < 1e-10:
            out.append(rr)
    return np.array(out)

def _dedupe(zs: Sequence[complex], tol: float = 1e-9) -> List[complex]:
    out: List[complex] = []
    for z in sorted(zs, key=lambda x: (round(x.real, 9), round(x.imag, 9))):
        if not any(abs(z - o) < tol * max(1.0, abs(z)) for o in out):
            out.append(complex(z))
    return out

def _anchor_roots(n: int, layout: str) -> List[complex]:
    if layout == "stated" and n == 6:
        p = stated_polynomial()
        roots = []
        for r in np.roots(p):
            roots.append(complex(newton(lambda z: np.polyval(p, z), r, fprime=lambda z: np.polyval(np.polyder(p), z), tol=1e-15, maxiter=50)))
        return _dedupe(roots)
    return _dedupe(_laurent_roots(n, layout))

def _continue(w0: complex, others: np.ndarray, a0: float, a1: float, layout: str) -> complex:
    w, a = w0, a0
    h = HOMOTOPY_STEP * np.sign(a1 - a0)
    while abs(a1 - a) > 1e-15:
        step = h if abs(h) < abs(a1 - a) else a1 - a
        while True:
            if abs(step) < 1e-9:
                raise ContinuationLost(f"root near w1={w:.6f} lost at alpha={a:.9f}")
            an = a + step
            fn = lambda x: condition_det(x, an, layout)[0]
            try:
                wn = complex(newton(fn, w, tol=1e-15, maxiter=100))
            except RuntimeError:
                step /= 2.0
                continue
            gap = np.abs(others - wn).min() if others.size else 1.0
            r = min(0.25 * gap, 1e-2)
            if abs(wn - w) < r and winding_count_fn(lambda x: condition_det(x, an, layout), wn, r) == 1:
                break
            step /= 2.0
        w, a = wn, an
    return w

def obstruction_pairs(alpha: float, layout: str = "stated") -> List[Tuple[complex, complex]]:
    """(z, w1) root pairs of the degree-3 obstruction at alpha, sorted."""
    if layout not in LAYOUTS:
        raise ValueError(f"unknown layout {layout!r}, expected one of {LAYOUTS}")
    n = _anchor(alpha)
    a0 = n / (n + 1.0)
    zs = _anchor_roots(n, layout)
    ws = np.array([root_to_pole(z, a0) for z in zs])
    if abs(alpha - a0) > 1e-15:
        # collisions with the fixed poles are roots for every alpha
        ws = np.array([w if not _admissible_pole(w) else _continue(w, np.delete(ws, i), a0, alpha, layout)
                       for i, w in enumerate(ws)])
        log.info(f"continued {ws.size} roots from alpha={a0:.6f} to {alpha:.6f}")
    eps = 1.0 / alpha - 1.0
    pairs = [(complex(np.exp(TWO_PI * eps * w)), complex(w)) for w in ws]
    return sorted(pairs, key=lambda p: (round(p[0].real, 9), round(p[0].imag, 9)))

def obstruction_roots(alpha: float, layout: str = "stated") -> List[complex]:
    return [z for z, _ in obstruction_pairs(alpha, layout)]

def _admissible_pole(w1: complex) -> bool:
    return min(abs(w1 - W2), abs(w1 - W3)) > 1e-8

def _admissible(w1: complex) -> bool:
    return (min(abs(w1 - W2), abs(w1 - W3)) > 1e-8 and abs(w1.real) >= 0.01
            and min(abs(w1.real - W2), abs(w1.real - W3)) > 1e-8)

def degree3_window(alpha: float, branch: Optional[int] = None, layout: str = "aligned", xi0: Optional[float] = None) -> Obstruction3:
    pairs = obstruction_pairs(alpha, layout)
    xi0 = DEFAULT_XI0[layout] if xi0 is None else float(xi0)
    if branch is None:
        ok = [i for i, (_, w) in enumerate(pairs) if _admissible(w)]
        if not ok:
            raise NotFound(f"no admissible obstruction root at alpha={alpha}")
        branch = min(ok, key=lambda i: (abs(pairs[i][1]), i))
    z, w1 = pairs[branch]
    if min(abs(w1 - W2), abs(w1 - W3)) <= 1e-8:
        raise DuplicatePole(f"branch {branch} gives w1={w1:.6f}, colliding with a fixed pole")
    C = obstruction_condition_matrix(w1, alpha, layout, xi0)[0]
    _, s, Vh = svd(C)
    if s[2] / s[0] >= 1e-10:
        raise NullspaceRankMismatch(f"condition matrix has full rank (s3/s1 = {s[2] / s[0]:.2e})")
    if s[1] / s[0] <= 1e-8:
        raise NullspaceRankMismatch(f"condition matrix nullity exceeds one (s2/s1 = {s[1] / s[0]:.2e})")
    a = np.conj(Vh[-1])
    a = a / np.linalg.norm(a)
    w = np.array([w1, W2, W3])
    g = validate_window(a, w)
    tab = multiplier_table(g, alpha)
    P = condition_points(xi0, 1.0 / alpha - 1.0, layout)
    res = [abs(complex(tab.m[s](P[s]))) for s in range(3)]
    out = Obstruction3(float(alpha), w, a, xi0, [p[0] for p in pairs], layout, int(branch), res)
    log.info(f"degree-3 window: layout={layout}, w1={w1:.6f}, residuals={max(res):.2e}")
    return out

def rational_kernel_window(w: Sequence[complex], alpha: Fraction, theta: float) -> np.ndarray:
    """Coefficients a with sum_s m_s = 0 on every row form of the fiber of theta at alpha = p/q."""
    alpha = Fraction(alpha)
    p, q = alpha.numerator, alpha.denominator
    w = np.asarray(w, dtype=np.complex128)
    if w.size != q + 1:
        raise ValueError(f"alpha={alpha} needs {q + 1} poles, got {w.size}")
    xs = (theta % (1.0 / p)) + np.arange(q) / p
    C = kernel_rows(w, float(alpha), xs)
    scale = np.linalg.norm(C, axis=0)
    _, s, Vh = svd(C / scale[None, :])
    if s[-1] / s[0] <= 1e-10:
        raise RankDeficient(f"kernel conditions have rank < {q} at theta={theta}")
    a = np.conj(Vh[-1]) / scale
    a = a / np.linalg.norm(a)
    rel = kernel_relative_residual(C, a)
    if rel >= 1e-10:
        raise RankDeficient(f"kernel residual {rel:.2e} at theta={theta}")
    return a

def nfprop_window(w: Sequence[complex], alpha: Optional[float] = None, theta: Optional[float] = None) -> Tuple[np.ndarray, float]:
    N = len(w)
    if N < 2:
        raise ValueError("kernel construction needs at least two poles")
    if alpha is not None and abs(alpha - 1.0 / (N - 1)) > 1e-12:
        raise AlphaOutOfRange(f"construction is at alpha = 1/(N-1) = {1.0 / (N - 1)}, got {alpha}")
    re = np.sort(np.real(w))
    if np.any(np.diff(re) <= 1e-12):
        raise ValueError("poles need distinct real parts")
    base = N - 1 + 0.25 if theta is None else float(theta)
    for bump in (0.0, 0.1, 0.2, 0.05, 0.15, 0.3, 0.35):
        try:
            return rational_kernel_window(w, Fraction(1, N - 1), base + bump), base + bump
        except RankDeficient:
            log.warning(f"kernel rank deficient at theta={base + bump}, perturbing")
    raise RankDeficient(f"no admissible theta near {base}")
