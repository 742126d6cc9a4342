class CertError(ValueError):
    pass

class ZeroCoefficient(CertError):
    pass

class RealPole(CertError):
    pass

class DuplicatePole(CertError):
    pass

class UndefinedAtZero(CertError):
    pass

class ExponentOverflow(CertError, OverflowError):
    pass

class PoleHit(CertError):
    pass

class LeadingVanishes(CertError):
    pass

class NearDegenerate(CertError):
    pass

class NotHerglotz(CertError):
    pass

class DensityTooLow(CertError):
    pass

class DensityTooHigh(CertError):
    pass

class DegenerateRe(CertError):
    pass

class DivergentSeries(CertError):
    pass

class NotRealProfile(CertError):
    pass

class AlphaOutOfRange(CertError):
    pass

class ConfigLimit(CertError):
    pass

class RationalCollision(CertError):
    pass

class EffectivelyRational(CertError):
    pass

class M0Vanishes(CertError):
    pass

class NullspaceRankMismatch(CertError):
    pass

class RankDeficient(CertError):
    pass

class UnboundedSupport(CertError):
    pass

class NotAmalgam(CertError):
    pass

class UnstableShifts(CertError):
    pass

class ContinuationLost(CertError):
    pass

# no verdict; the dispatcher turns these into INCONCLUSIVE reports
class Inconclusive(CertError):
    pass

class InconclusivePositivity(Inconclusive):
    pass

class PositivityFails(Inconclusive):
    pass

class ContractionNotReached(Inconclusive):
    def __init__(self, msg: str, q_prime: float = float("nan")):
        super().__init__(msg)
        self.q_prime = q_prime

class NotFound(Inconclusive):
    pass

class VerdictConflict(RuntimeError):
    def __init__(self, msg: str, dump: dict | None = None):
        super().__init__(msg)
        self.dump = dump or {}
