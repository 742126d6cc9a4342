import pytest
import numpy as np
from interfaces.frame_iface.window import validate_window, Lattice
from interfaces.frame_iface.herglotz_cert import (interlacing_spec, contraction_norm, verify_contraction, frobenius_matrix,
                                                  vertex_polynomial, vertex_weights, certify_herglotz, pxi_polynomial)
from interfaces.frame_iface.multipliers import multiplier_table
from interfaces.frame_iface.frame_oracle import lower_bound_estimate
from interfaces.frame_iface.report import Verdict
from interfaces.frame_iface.errors import NotHerglotz, DensityTooLow, NearDegenerate

def random_spec(rng):
    n = int(rng.integers(1, 7))
    while True:
        mu = np.sort(rng.uniform(0.05, 0.95, n + 1))[::-1]
        if np.min(-np.diff(mu)) > 1e-3:
            return interlacing_spec(mu)

def test_contraction_on_random_specs():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        spec = random_spec(rng)
        cn = contraction_norm(spec)
        n = spec.n
        mu1 = float(spec.mu[0])
        q = rng.standard_normal(n)
        l = int(rng.integers(0, n + 1))
        lhs, rhs = verify_contraction(cn, l, q)
        assert lhs <= rhs * (1 + 1e-9) + 1e-14, f"contraction fails for mu={spec.mu}, l={l}"
        Fs = [frobenius_matrix(vertex_polynomial(spec.mu, j)[1:][::-1]).T for j in range(n + 1)]
        m = int(rng.integers(1, 51))
        v = q.copy()
        for j in rng.integers(0, n + 1, m):
            v = Fs[j] @ v
        assert np.linalg.norm(v) <= cn.C * mu1 ** m * np.linalg.norm(q) * (1 + 1e-9) + 1e-300

def test_frobenius_characteristic_polynomial():
    b = np.array([0.2, -0.5, 1.5])
    F = frobenius_matrix(b)
    assert np.allclose(np.poly(F), [1.0, 1.5, -0.5, 0.2])

def test_vertex_weights_are_convex_for_interlacing_polynomial():
    mu = np.array([0.9, 0.6, 0.3])
    p = np.poly([0.75, 0.45])
    lam = vertex_weights(mu, p)
    assert np.all(lam >= -1e-12) and abs(lam.sum() - 1.0) < 1e-12

def test_spec_rejects_bad_nodes():
    with pytest.raises(ValueError):
        interlacing_spec([0.3, 0.6])
    with pytest.raises(ValueError):
        interlacing_spec([1.2, 0.5])
    with pytest.raises(NearDegenerate):
        contraction_norm(interlacing_spec([0.5, 0.5 - 1e-12]))

@pytest.mark.parametrize("alpha", [0.3, 0.7, 0.99, 1.0])
def test_two_pole_herglotz_certified(alpha):
    g = validate_window([1.0, 1.0], [1.0, 2.0])
    rep = certify_herglotz(g, Lattice(alpha, 1.0))
    assert rep.verdict == Verdict.FRAME_CERTIFIED, rep.diagnostics
    assert 0.0 < rep.A_crit <= rep.B_crit
    assert rep.certificate["c"] < 1.0
    assert rep.diagnostics["interlacing_failures"] == []

@pytest.mark.parametrize("alpha", [0.3, 0.7, 0.99, 1.0])
def test_oracle_interior_bound_stabilizes(alpha):
    g = validate_window([1.0, 1.0], [1.0, 2.0])
    detail = {}
    lb = lower_bound_estimate(g, Lattice(alpha, 1.0), sizes=(200, 400), detail=detail)
    assert lb.A_est > 0.0
    assert lb.convergence < 0.1, f"interior estimates {detail}"

def test_pxi_roots_interlace():
    g = validate_window([1.0, 2.0, 0.5], [0.4, 0.9, 1.5])
    tab = multiplier_table(g, 0.8)
    mu = np.exp(-2 * np.pi * g.w.real / 0.8)
    for xi in (0.1, 0.5, 0.9):
        roots = np.sort(np.roots(np.concatenate([[1.0], pxi_polynomial(tab, xi)[::-1]])).real)[::-1]
        assert np.all(mu[:-1] >= roots - 1e-12) and np.all(roots >= mu[1:] - 1e-12)

def test_rejections():
    with pytest.raises(NotHerglotz):
        certify_herglotz(validate_window([1.0, -1.0], [1.0, 2.0]), Lattice(0.5, 1.0))
    with pytest.raises(DensityTooLow):
        certify_herglotz(validate_window([1.0], [1.0]), Lattice(1.2, 1.0))
