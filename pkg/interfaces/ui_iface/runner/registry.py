from typing import Callable, Dict
from ...frame_iface.window import RationalWindow, Lattice
from ...frame_iface.report import CertificationReport, Verdict
from ...frame_iface.orbit_rank import effectively_rational, Q_MAX

METHODS = ("auto", "herglotz", "irrational", "high-density", "near-critical", "critical", "oracle",
           "counterexample", "sis", "identities")
TOL_PRODUCT = 1e-12

def density_obstruction(g: RationalWindow, lat: Lattice, **_) -> CertificationReport:
    cert = {"bound_kind": "density", "alpha_beta": lat.product, "density": lat.density}
    return CertificationReport(Verdict.NOT_FRAME_WITNESSED, "density-obstruction", None, None, cert, {})

def oracle_only(g: RationalWindow, lat: Lattice, **_) -> CertificationReport:
    # the dispatcher's oracle pass fills in estimates and witnesses
    return CertificationReport(Verdict.INCONCLUSIVE, "oracle", None, None, {}, {"reason": "oracle estimates only"})

def build_registry() -> Dict[str, Callable[..., CertificationReport]]:
    from ...frame_iface.herglotz_cert import certify_herglotz
    from ...frame_iface.orbit_rank import certify_irrational
    from ...frame_iface.density import certify_high_density
    from ...frame_iface.zak_positivity import certify_near_critical, critical_density_check
    return {
        "density-obstruction": density_obstruction,
        "critical": critical_density_check,
        "herglotz": certify_herglotz,
        "high-density": certify_high_density,
        "irrational": certify_irrational,
        "near-critical": certify_near_critical,
        "oracle": oracle_only,
    }

def route(g: RationalWindow, lat: Lattice, q_max: int = Q_MAX) -> str:
    p = lat.product
    if p > 1.0 + TOL_PRODUCT:
        return "density-obstruction"
    if abs(p - 1.0) <= TOL_PRODUCT:
        return "critical"
    if g.cls.herglotz:
        return "herglotz"
    if p <= 1.0 / g.N + TOL_PRODUCT:
        return "high-density"
    if effectively_rational(p, q_max) is None:
        return "irrational"
    return "near-critical"
