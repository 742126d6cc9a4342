import numpy as np
from dataclasses import dataclass, field
from typing import Optional, Dict, Any, List, Tuple
from enum import Enum
from . import __version__

class Verdict(Enum):
    FRAME_CERTIFIED = "FRAME_CERTIFIED"
    NOT_FRAME_WITNESSED = "NOT_FRAME_WITNESSED"
    INCONCLUSIVE = "INCONCLUSIVE"

EXIT_CODES = {Verdict.FRAME_CERTIFIED: 0, Verdict.NOT_FRAME_WITNESSED: 1, Verdict.INCONCLUSIVE: 2}
EXIT_INPUT_ERROR = 3

@dataclass(frozen=True)
class PiecewiseG:
    # G = sum of value * indicator[lo, hi)
    pieces: Tuple[Tuple[float, float, complex], ...]

    def norm_sq(self) -> float:
        return float(sum((hi - lo) * abs(v) ** 2 for lo, hi, v in self.pieces))

    def support(self) -> Tuple[float, float]:
        return min(p[0] for p in self.pieces), max(p[1] for p in self.pieces)

    def to_dict(self) -> Dict[str, Any]:
        return {"pieces": [[float(lo), float(hi), [float(np.real(v)), float(np.imag(v))]] for lo, hi, v in self.pieces]}

    @staticmethod
    def from_dict(d: Dict[str, Any]) -> "PiecewiseG":
        return PiecewiseG(tuple((float(lo), float(hi), complex(v[0], v[1])) for lo, hi, v in d["pieces"]))

    @staticmethod
    def indicator(center: float, delta: float) -> "PiecewiseG":
        return PiecewiseG(((center - delta, center + delta, 1.0 + 0j),))

@dataclass
class CertificationReport:
    verdict: Verdict
    method: str
    A_crit: Optional[float] = None
    B_crit: Optional[float] = None
    certificate: Dict[str, Any] = field(default_factory=dict)
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.verdict]

    @property
    def witness(self) -> Optional[Dict[str, Any]]:
        return self.certificate.get("witness")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "verdict": self.verdict.value,
            "method": self.method,
            "A_crit": _plain(self.A_crit),
            "B_crit": _plain(self.B_crit),
            "certificate": _plain(self.certificate),
            "diagnostics": _plain(self.diagnostics),
            "version": __version__,
        }

def inconclusive(method: str, reason: str, **diag) -> CertificationReport:
    d = {"reason": reason}
    d.update(diag)
    return CertificationReport(Verdict.INCONCLUSIVE, method, diagnostics=d)

def _plain(x: Any) -> Any:
    if x is None:
        return None
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (complex, np.complexfloating)):
        return [float(np.real(x)), float(np.imag(x))]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    if isinstance(x, Enum):
        return x.value
    if hasattr(x, "to_dict"):
        return _plain(x.to_dict())
    return x
