import numpy as np
from dataclasses import dataclass
from typing import Any, Dict, Sequence, Tuple
from .errors import ZeroCoefficient, RealPole, DuplicatePole, UndefinedAtZero

TOL_POLE = 1e-12
TOL_DUP = 1e-12

@dataclass(frozen=True)
class WindowClass:
    herglotz: bool
    all_re_neg: bool
    all_re_pos: bool
    distinct_re: bool
    zero_sum: bool

    def to_dict(self) -> Dict[str, Any]:
        return {"herglotz": self.herglotz, "all_re_neg": self.all_re_neg, "all_re_pos": self.all_re_pos,
                "distinct_re": self.distinct_re, "zero_sum": self.zero_sum}

@dataclass(frozen=True, eq=False)
class RationalWindow:
    a: np.ndarray
    w: np.ndarray
    cls: WindowClass

    @property
    def N(self) -> int:
        return int(self.a.shape[0])

    def to_dict(self) -> Dict[str, Any]:
        return {"a": [[float(x.real), float(x.imag)] for x in self.a],
                "w": [[float(x.real), float(x.imag)] for x in self.w]}

@dataclass(frozen=True)
class Lattice:
    alpha: float
    beta: float = 1.0

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError(f"lattice steps must be positive, got alpha={self.alpha}, beta={self.beta}")

    @property
    def density(self) -> float:
        return 1.0 / (self.alpha * self.beta)

    @property
    def product(self) -> float:
        return self.alpha * self.beta

    def to_dict(self) -> Dict[str, Any]:
        return {"alpha": float(self.alpha), "beta": float(self.beta)}

def classify(a: np.ndarray, w: np.ndarray) -> WindowClass:
    re = w.real
    real_a = bool(np.all(np.abs(a.imag) <= TOL_POLE * np.abs(a)))
    real_w = bool(np.all(np.abs(w.imag) <= TOL_POLE * np.maximum(np.abs(w), 1.0)))
    herglotz = real_a and real_w and bool(np.all(a.real > 0)) and bool(np.all(re > 0))
    gaps = np.diff(np.sort(re))
    distinct_re = bool(np.all(gaps > TOL_DUP)) if gaps.size else True
    zero_sum = bool(abs(a.sum()) <= TOL_POLE * max(1.0, float(np.abs(a).sum())))
    return WindowClass(herglotz, bool(np.all(re < 0)), bool(np.all(re > 0)), distinct_re, zero_sum)

def validate_window(a: Sequence[complex], w: Sequence[complex]) -> RationalWindow:
    a = np.asarray(a, dtype=np.complex128).ravel()
    w = np.asarray(w, dtype=np.complex128).ravel()
    if a.shape != w.shape or a.size == 0:
        raise ValueError(f"coefficient and pole lists must have the same nonzero length, got {a.size} and {w.size}")
    if np.any(a == 0):
        raise ZeroCoefficient(f"zero coefficient at index {int(np.flatnonzero(a == 0)[0])}")
    bad = np.flatnonzero(np.abs(w.real) < TOL_POLE)
    if bad.size:
        raise RealPole(f"pole {w[bad[0]]} has |Re w| < {TOL_POLE}")
    order = np.lexsort((w.imag, w.real))
    a, w = a[order], w[order]
    for k in range(w.size - 1):
        d = w[k + 1:] - w[k]
        hit = (np.abs(d.real) <= TOL_DUP) & (np.abs(d.imag) <= TOL_DUP)
        if np.any(hit):
            raise DuplicatePole(f"pole {w[k]} repeated")
    a.setflags(write=False)
    w.setflags(write=False)
    return RationalWindow(a, w, classify(a, w))

def eval_window(g: RationalWindow, t):
    t = np.asarray(t, dtype=np.float64)
    out = (g.a[None, :] / (t.reshape(-1, 1) - 1j * g.w[None, :])).sum(axis=1)
    return out.reshape(t.shape) if t.ndim else complex(out[0])

def rescale_to_unit_beta(g: RationalWindow, lat: Lattice) -> Tuple[RationalWindow, float]:
    b = float(lat.beta)
    if b == 1.0:
        return g, float(lat.alpha)
    return validate_window(b * g.a, b * g.w), float(lat.alpha) * b

def fourier_profile(g: RationalWindow, xi):
    x = np.asarray(xi, dtype=np.float64)
    flat = x.ravel()
    neg = g.w.real < 0
    with np.errstate(over="ignore", invalid="ignore"):
        right = (g.a[neg] * np.exp(2.0 * np.pi * flat[:, None] * g.w[neg])).sum(axis=1)
        left = -(g.a[~neg] * np.exp(2.0 * np.pi * flat[:, None] * g.w[~neg])).sum(axis=1)
    out = np.where(flat > 0, right, left)
    at0 = flat == 0
    if np.any(at0):
        if neg.any() and (~neg).any():
            raise UndefinedAtZero("profile at xi=0 is undefined for poles in both half-planes")
        out[at0] = 0.5 * (right[at0] + left[at0])
    return out.reshape(x.shape) if x.ndim else complex(out[0])

def window_from_dict(d: Dict[str, Any]) -> RationalWindow:
    a = [complex(p[0], p[1]) for p in d["a"]]
    w = [complex(p[0], p[1]) for p in d["w"]]
    return validate_window(a, w)
