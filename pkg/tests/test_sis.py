import pytest
import numpy as np
from interfaces.frame_iface.window import validate_window
from interfaces.frame_iface.sis_sampling import sampling_experiment, stability_margin, amalgam_guard
from interfaces.frame_iface.errors import NotAmalgam, UnstableShifts

ALPHA = 1.0 / np.sqrt(2.0)

@pytest.fixture
def zero_sum():
    return validate_window([1.0, -1.0], [1.0, 2.0])

def test_stability_and_amalgam(zero_sum):
    assert stability_margin(zero_sum) > 0.0
    assert np.isfinite(amalgam_guard(zero_sum))
    with pytest.raises(NotAmalgam):
        amalgam_guard(validate_window([1.0, 1.0], [1.0, 2.0]))

def test_sampling_bounds_stable(zero_sum):
    small = sampling_experiment(zero_sum, ALPHA, trials=100, coeff_len=64, seed=0)
    large = sampling_experiment(zero_sum, ALPHA, trials=100, coeff_len=128, seed=0)
    assert small.A_emp > 0.0
    assert 0.5 <= large.A_emp / small.A_emp <= 2.0
    for exp in (small, large):
        assert exp.B_emp <= exp.bound
        assert exp.sigma_min_sq <= exp.A_emp * (1 + 1e-12) and exp.B_emp <= exp.sigma_max_sq * (1 + 1e-12)

def test_sampling_is_seeded(zero_sum):
    a = sampling_experiment(zero_sum, ALPHA, trials=10, coeff_len=32, seed=4)
    b = sampling_experiment(zero_sum, ALPHA, trials=10, coeff_len=32, seed=4)
    assert np.array_equal(a.ratios, b.ratios)
    d = a.to_dict()
    assert d["trials"] == 10 and "stability_margin" in d

def test_margin_and_amalgam_scale_with_the_window(zero_sum):
    double = validate_window(2.0 * zero_sum.a, zero_sum.w)
    m1, m2 = stability_margin(zero_sum), stability_margin(double)
    assert abs(m2 - 4.0 * m1) <= 1e-12 * abs(4.0 * m1)
    n1, n2 = amalgam_guard(zero_sum), amalgam_guard(double)
    assert abs(n2 - 2.0 * n1) <= 1e-12 * 2.0 * n1

@pytest.fixture
def critical_zero():
    # zero sum, and the integer-sample symbol vanishes at 1/2
    w = np.array([-2.0, -1.0, 0.5])
    r = np.exp(np.pi * w) / (1.0 - np.exp(2 * np.pi * w))
    a = np.cross(np.ones(3), r)
    return validate_window(a, w)

def test_sampling_collapses_at_critical_density(critical_zero):
    assert abs(critical_zero.a.sum()) < 1e-14
    short = sampling_experiment(critical_zero, 1.0, trials=10, coeff_len=32, seed=0)
    long = sampling_experiment(critical_zero, 1.0, trials=10, coeff_len=128, seed=0)
    assert long.sigma_min_sq <= 0.25 * short.sigma_min_sq

def test_unstable_shifts_are_refused(zero_sum, monkeypatch):
    monkeypatch.setattr("interfaces.frame_iface.sis_sampling.stability_margin", lambda g: 0.0)
    with pytest.raises(UnstableShifts):
        sampling_experiment(zero_sum, ALPHA, trials=4, coeff_len=16)
