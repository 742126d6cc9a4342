import pytest
import numpy as np
from interfaces.frame_iface.window import validate_window, Lattice
from interfaces.frame_iface.multipliers import multiplier_table
from interfaces.frame_iface.density import (build_B, detB_factorization, covariance_residual, translation_matrix,
                                            certify_high_density)
from interfaces.frame_iface.report import Verdict
from interfaces.frame_iface.errors import DensityTooHigh, DegenerateRe

def spread_window(rng, N):
    re = 0.25 * (np.arange(N) + 1) * rng.choice([-1.0, 1.0]) + rng.uniform(-0.05, 0.05, N)
    w = re + 1j * rng.uniform(-1.0, 1.0, N)
    a = rng.standard_normal(N) + 1j * rng.standard_normal(N)
    return validate_window(a, w)

def test_factorization_on_random_windows():
    rng = np.random.default_rng(5)
    for _ in range(100):
        N = int(rng.integers(1, 6))
        g = spread_window(rng, N)
        tab = multiplier_table(g, 0.5)
        theta = N - 1 + float(rng.uniform(0.0, 2.0))
        f = detB_factorization(tab, g, theta)
        assert f.residual < 1e-9, f"N={N}, residual {f.residual}"
        assert f.vandermonde_residual < 1e-9

def test_two_pole_vandermonde_exact():
    g = validate_window([1.0, 2.0], [0.3, 0.7 + 0.2j])
    tab = multiplier_table(g, 0.4)
    f = detB_factorization(tab, g, 1.5)
    want = tab.u[1] - tab.u[0]
    assert abs(f.detY - want) <= 1e-12 * abs(want)

def test_block_needs_enough_history():
    tab = multiplier_table(validate_window([1.0, 1.0, 1.0], [0.2, 0.5, 0.9]), 0.3)
    with pytest.raises(ValueError):
        build_B(tab, 1.0)
    assert build_B(tab, 2.0).mat.shape == (3, 3)

def test_translation_covariance():
    g = validate_window([1.0, -0.5], [0.3, 0.6])
    tab = multiplier_table(g, 0.45)
    T = translation_matrix(tab)
    xi = np.array([0.1, 0.4])
    lhs = tab.strings(xi + 1.0 / tab.alpha)
    assert np.allclose(lhs, tab.strings(xi) @ T, rtol=1e-10)
    assert covariance_residual(tab, 1.3) < 1e-9

def test_high_density_certificate():
    g = validate_window([1.0, 1.0], [1.0, 2.0])
    rep = certify_high_density(g, Lattice(0.3, 1.0))
    assert rep.verdict == Verdict.FRAME_CERTIFIED
    assert rep.A_crit is None and rep.B_crit > 0
    assert rep.certificate["bound_kind"] == "determinant-lemma"
    assert rep.diagnostics["sigma_min_normalized"] > 0

def test_high_density_guards():
    g = validate_window([1.0, 1.0], [1.0, 2.0])
    with pytest.raises(DensityTooHigh):
        certify_high_density(g, Lattice(0.6, 1.0))
    with pytest.raises(DegenerateRe):
        certify_high_density(validate_window([1.0, 1.0], [1.0 + 1j, 1.0 - 1j]), Lattice(0.3, 1.0))
