import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qwalk.curve import Curve
from qwalk.elliptic import EllipticData
from qwalk.errors import WrongRegime
from qwalk.fixtures import W1, W2, W3, W2_drift, diagonal_walk, random_walk, random_walks
from qwalk.gluing import (Gluing, delta_zero_structure, sample_M, sigma_delta_zero, sigma_map)


def _gl(w):
    return Gluing(EllipticData(Curve(w)))


def _cross_ratio(a, b, c, d):
    return (a - c) * (b - d) / ((a - d) * (b - c))


PROBES = np.array([0.3 + 0.1j, 0.5 - 0.05j, 0.2 + 0.2j, 0.6 + 0.01j, 0.45 + 0.15j])


@pytest.mark.parametrize("make", [W1, W2, W3, W2_drift, diagonal_walk])
def test_gluing_on_fixtures(make):
    assert _gl(make()).gluing_defect(360) < 1e-8


def test_gluing_on_random_walks():
    for w in random_walks(20, seed=11):
        assert _gl(w).gluing_defect(360) < 1e-8


def test_w1_is_mobius_image_of_joukowski():
    w = W1()
    gl = _gl(w)
    F = lambda t: w[(1, 0)] * t + w[(-1, 0)] / t
    a, b = gl.w(PROBES), F(PROBES)
    assert abs(_cross_ratio(*a[:4]) - _cross_ratio(*b[:4])) < 1e-10
    assert abs(_cross_ratio(*a[1:]) - _cross_ratio(*b[1:])) < 1e-10


def test_w2_is_mobius_image_of_rational_form():
    w = W2()
    curve = Curve(w)
    gl = Gluing(EllipticData(curve))
    x2 = curve.bx.x2
    s = np.sqrt(w[(-1, 1)] * w[(0, -1)] / (w[(1, 0)] ** 2 * x2))
    F = lambda t: t / ((t - x2) * (t - s) ** 2)
    a, b = gl.w_hat(PROBES), F(PROBES)
    assert abs(_cross_ratio(*a[:4]) - _cross_ratio(*b[:4])) < 1e-10
    assert abs(_cross_ratio(*a[1:]) - _cross_ratio(*b[1:])) < 1e-10


@pytest.mark.parametrize("make,kind", [(W1, "pole"), (W2_drift, "holomorphic"),
                                       (W3, "algebraic")])
def test_regime_at_x3(make, kind):
    gl = _gl(make())
    assert gl.at_x3.kind == kind
    gl.check_regime()


def test_simple_pole_at_x2():
    gl = _gl(W3())
    x2 = gl.curve.bx.x2
    for eps in (1e-4, 1e-5):
        assert (gl.w(x2 + eps) * eps) == pytest.approx(gl.res_x2, rel=20 * eps)


def test_algebraic_branch_values():
    gl = _gl(W3())
    x3 = gl.curve.bx.x3
    a = gl.at_x3
    for eps in (1e-6, 1e-8):
        approx = a.w1 + a.w2 * np.sqrt(eps)
        assert abs(gl.w(x3 - eps) - approx) < 50 * eps


def test_double_pole_count_matches_period_ratio():
    for w in [W1(), W2_drift(), W3()] + random_walks(10, seed=4):
        gl = _gl(w)
        assert len(gl.double_poles()) == gl.expected_double_poles()


def test_no_other_pole_inside_M():
    """w is bounded away from x2 on a grid of the domain bounded by M."""
    gl = _gl(W3())
    M = sample_M(gl.curve, 256)
    x2 = gl.curve.bx.x2
    inner = []
    for lam in (0.3, 0.6, 0.9):
        inner.append(x2 + lam * (M - x2))
    z = np.concatenate(inner)
    z = z[np.abs(z - x2) > 0.05]
    assert np.all(np.isfinite(gl.w(z)))
    assert np.max(np.abs(gl.w(z))) < 1e3


def test_sigma_involution_even_case():
    gl = _gl(W1())
    bx = gl.curve.bx
    t = np.array([1.01, 1.03, 0.95 + 0.02j])
    assert np.allclose(sigma_map(gl, sigma_map(gl, t)), t, atol=1e-10)
    assert sigma_map(gl, bx.x3) == pytest.approx(bx.x2, abs=1e-9)
    assert np.allclose(gl.w(sigma_map(gl, t)), gl.w(t), rtol=1e-8)
    with pytest.raises(WrongRegime):
        sigma_map(_gl(W3()), 1.0)


def test_delta_zero_circle():
    w = W1()
    curve = Curve(w)
    st_ = delta_zero_structure(w)
    assert st_.resid_alpha < 1e-14 and st_.resid_beta < 1e-14
    g, rho, sig = sigma_delta_zero(curve)
    M = sample_M(curve, 64)
    assert np.allclose(np.abs(M - g), rho, rtol=1e-9)
    assert g == pytest.approx(st_.center) and rho == pytest.approx(st_.radius)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_gluing_property(seed):
    gl = _gl(random_walk(np.random.default_rng(seed)))
    assert gl.gluing_defect(120) < 1e-8
    assert gl.res_x2 != 0
