import pytest
import numpy as np
from interfaces.frame_iface.window import (validate_window, eval_window, fourier_profile, rescale_to_unit_beta,
                                           window_from_dict, Lattice)
from interfaces.frame_iface.errors import ZeroCoefficient, RealPole, DuplicatePole, UndefinedAtZero, CertError

def test_herglotz_classification():
    g = validate_window([1.0, 1.0], [1.0, 2.0])
    assert g.N == 2
    assert g.cls.herglotz and g.cls.all_re_pos and g.cls.distinct_re
    assert not g.cls.zero_sum

def test_zero_sum_and_left_half():
    g = validate_window([1.0, -1.0], [1.0, 2.0])
    assert g.cls.zero_sum and not g.cls.herglotz
    h = validate_window([1.0, -0.5], [-1.0, -2.0])
    assert h.cls.all_re_neg and not h.cls.all_re_pos

def test_complex_coefficients_are_not_herglotz():
    g = validate_window([1.0 + 0.5j, 1.0], [1.0, 2.0])
    assert not g.cls.herglotz

def test_rejects_bad_windows():
    with pytest.raises(ZeroCoefficient):
        validate_window([1.0, 0.0], [1.0, 2.0])
    with pytest.raises(RealPole):
        validate_window([1.0], [0.5j])
    with pytest.raises(DuplicatePole):
        validate_window([1.0, 2.0], [1.0 + 1j, 1.0 + 1j])
    with pytest.raises(ValueError):
        validate_window([1.0], [1.0, 2.0])

def test_input_errors_share_a_base():
    with pytest.raises(CertError):
        validate_window([0.0], [1.0])

def test_eval_matches_formula():
    g = validate_window([1.0, -2.0 + 1j], [1.0, -0.5 + 2j])
    t = np.linspace(-3.0, 3.0, 7)
    want = sum(a / (t - 1j * w) for a, w in zip(g.a, g.w))
    assert np.allclose(eval_window(g, t), want, rtol=1e-14)
    assert isinstance(eval_window(g, 0.5), complex)

def test_profile_one_sided_and_undefined():
    g = validate_window([1.0], [1.0])
    assert fourier_profile(g, 0.3) == 0
    assert abs(fourier_profile(g, -0.3) + np.exp(-0.6 * np.pi)) < 1e-14
    mixed = validate_window([1.0, 1.0], [1.0, -1.0])
    with pytest.raises(UndefinedAtZero):
        fourier_profile(mixed, np.array([0.0, 0.5]))

def test_rescale_to_unit_beta():
    g = validate_window([1.0, 1.0], [1.0, 2.0])
    gb, alpha = rescale_to_unit_beta(g, Lattice(0.35, 2.0))
    assert abs(alpha - 0.7) < 1e-15
    assert np.allclose(gb.w, [2.0, 4.0]) and np.allclose(gb.a, [2.0, 2.0])

def test_window_dict_roundtrip_preserves_order():
    g = validate_window([2.0 - 1j, 1.0], [0.5 + 1j, -1.0])
    h = window_from_dict(g.to_dict())
    assert np.array_equal(g.a, h.a) and np.array_equal(g.w, h.w)

def test_rescale_round_trip():
    g = validate_window([1.0 - 0.5j, 2.0], [0.4 + 1j, -1.3])
    gb, alpha = rescale_to_unit_beta(g, Lattice(0.35, 2.0))
    back, alpha_back = rescale_to_unit_beta(gb, Lattice(alpha, 0.5))
    assert abs(alpha_back - 0.35) < 1e-15
    assert np.allclose(back.a, g.a, rtol=1e-15) and np.allclose(back.w, g.w, rtol=1e-15)

def test_profile_decay_rate():
    g = validate_window([1.0, 0.5, -2.0, 1.0], [-1.0, -2.0, 1.5, 3.0])
    xs = np.linspace(5.0, 10.0, 51)
    right = np.polyfit(xs, np.log(np.abs(fourier_profile(g, xs))), 1)[0]
    left = np.polyfit(xs, np.log(np.abs(fourier_profile(g, -xs))), 1)[0]
    assert abs(right / (-2.0 * np.pi * 1.0) - 1.0) < 0.05, right
    assert abs(left / (-2.0 * np.pi * 1.5) - 1.0) < 0.05, left
