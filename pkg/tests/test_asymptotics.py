from math import atan, pi, tan

import numpy as np
import pytest

from qwalk.asymptotics import (_phi_derivs, axis_bracket, chi1_prime, green_axis,
                               green_interior, green_residue_form, interior_bracket,
                               interior_constant, martin_kernel, phi, rc_constants, saddle,
                               saddle_path, tail_asymptotics, tail_constant_h1,
                               tail_unified)
from qwalk.curve import Curve
from qwalk.fixtures import W1, W3, diagonal_walk
from qwalk.oracle import dp_green

from conftest import agf_for


# --- saddle points --------------------------------------------------------

@pytest.mark.parametrize("make", [W1, W3, diagonal_walk])
def test_saddle_invariants(make):
    w = make()
    for g in (0.1, 0.5, pi / 4, 1.2):
        sp = saddle(w, g)
        assert abs(phi(w, sp.u, sp.v) - 1) < 1e-12
        _, pu, pv = _phi_derivs(w, sp.u, sp.v)[:3]
        assert pu > 0 and pv > 0
        assert abs(pu / pv - 1 / tan(g)) < 1e-10 * (1 + 1 / tan(g))


def test_saddle_endpoints():
    w = W1()
    curve = Curve(w)
    sp0 = saddle(w, 0.0)
    assert abs(sp0.s_x - curve.bx.x3) < 1e-10
    assert abs(sp0.s_y - curve.Y1(curve.bx.x3 + 0j).real) < 1e-10
    sp1 = saddle(w, pi / 2)
    y3 = curve.by.x3
    assert abs(sp1.s_y - y3) < 1e-10
    assert abs(sp1.s_x - curve.X_at_branch(y3)) < 1e-10


def test_saddle_monotone_path():
    path = saddle_path(W3(), np.linspace(0, pi / 2, 50))
    sx = np.array([p.s_x for p in path])
    sy = np.array([p.s_y for p in path])
    assert np.all(np.diff(sx) < 0) and np.all(np.diff(sy) > 0)


def test_critical_point_of_chi():
    curve = Curve(W3())
    for g in (0.3, pi / 4, 1.0):
        sp = saddle(curve.walk, g)
        assert abs(chi1_prime(curve, g, sp.s_x)) < 1e-9


@pytest.mark.parametrize("make", [W1, W3])
def test_expansion_constants_at_the_axis(make):
    w = make()
    curve = Curve(w)
    kx, ky = rc_constants(curve)
    s0 = saddle(w, 0.0)

    def est(r):
        sp = saddle(w, atan(r))
        return (sp.s_y - s0.s_y) / r, (s0.s_x - sp.s_x) / r ** 2
    a1, b1 = est(1e-2)
    a2, b2 = est(1e-3)
    # first-order Richardson in r
    assert abs((10 * a2 - a1) / 9 - ky) < 1e-4 * abs(ky)
    assert abs((10 * b2 - b1) / 9 - kx) < 1e-4 * abs(kx)


# --- tails -----------------------------------------------------------------

@pytest.mark.parametrize("name", ["W1", "W3", "diagonal"])
def test_unified_equals_regime_sum(name):
    ta = tail_asymptotics(agf_for(name))
    assert ta.regime_formula_valid
    assert abs(ta.unified - ta.regime_sum) < 1e-6
    assert abs(ta.h2k_const - ta.h2k_derivative) < 1e-6


def test_regime_formula_flagged_with_double_poles():
    ta = tail_asymptotics(agf_for("W2_drift"))
    assert ta.regime == "Odd2N1" and not ta.regime_formula_valid
    # the gluing part does not vanish: h1 alone is not the tail constant
    assert abs(ta.h2k_derivative) > 0.1 * abs(ta.h1k_const)


def test_h1_constant_is_first_term_of_unified():
    agf = agf_for("W3")
    c = agf.curve
    x3 = c.bx.x3
    s = np.sqrt(c.cp.c(x3) / c.cp.a(x3))
    pref = np.sqrt(-x3 * c.cp.d.deriv()(x3)) / (4 * np.sqrt(pi) * c.cp.a(x3))
    assert tail_constant_h1(c) == pytest.approx(pref * c.walk.m0 * s ** (c.walk.m0 - 1) * x3,
                                                rel=1e-13)


def test_tail_ratio_has_inverse_k_correction():
    """h_k k^(3/2) x3^k / K = 1 + c/k + ...: (ratio - 1) k stays bounded and the ratio -> 1."""
    agf = agf_for("W1")
    ta = tail_asymptotics(agf)
    h = agf.hx.coefficients(320)
    r = {k: h[k - 1] / ta.predict(k) for k in (80, 160, 320)}
    assert abs(r[320] - 1) < abs(r[160] - 1) < abs(r[80] - 1)
    c = [(r[k] - 1) * k for k in r]
    assert max(c) / min(c) < 1.2


def test_diagonal_tail_doubling():
    agf = agf_for("diagonal")
    ta = tail_asymptotics(agf)
    assert ta.parity_factor == 2
    assert ta.constant == pytest.approx(2 * tail_unified(agf))
    h = agf.hx.coefficients(201)
    # admissible (even) k follow the doubled constant, odd k vanish
    r = h[199] / ta.predict(200)
    assert abs(r - 1) < 0.05
    assert abs(h[200]) < 1e-12


# --- Green functions ---------------------------------------------------------

@pytest.mark.parametrize("name", ["W1", "W3", "W2_drift", "diagonal"])
def test_interior_bracket_positive(name):
    agf = agf_for(name)
    assert interior_bracket(agf, saddle(agf.walk, pi / 4, curve=agf.curve)) > 0
    assert axis_bracket(agf) > 0


def test_interior_constant_independent_of_start():
    sp = saddle(W1(), pi / 4)
    assert interior_constant(Curve(W1((1, 1))), sp) == interior_constant(Curve(W1((2, 3))), sp)


def test_residue_form_matches_dp():
    for name, start in (("W1", (1, 1)), ("W3", (2, 3))):
        agf = agf_for(name, start)
        G = dp_green(agf.walk, 150)
        for i in range(1, 7):
            for j in range(1, 7):
                assert abs(green_residue_form(agf, i, j) - G[i - 1, j - 1]) < 1e-6


def test_interior_ratio_approaches_one():
    agf = agf_for("W1")
    G = dp_green(agf.walk, 300)
    r = [green_interior(agf, i, i) / G[i - 1, i - 1] for i in (14, 28, 56)]
    assert r[0] < r[1] < r[2] < 1.0
    assert r[2] > 0.9


def test_axis_ratio_w1():
    agf = agf_for("W1")
    G = dp_green(agf.walk, 200)
    r = green_axis(agf, 40, 2) / G[39, 1]
    assert 0.85 <= r <= 1.15


# --- Martin kernel ------------------------------------------------------------

def test_martin_same_start_is_one():
    agf = agf_for("W3")
    assert martin_kernel(agf, agf, 0.0) == 1.0
    assert martin_kernel(agf, agf, 0.7) == 1.0


def test_martin_continuity_and_tail_limit():
    a, b = agf_for("W1"), agf_for("W1", (2, 2))
    m0 = martin_kernel(a, b, 0.0)
    assert abs(martin_kernel(a, b, 1e-3) / m0 - 1) < 1e-2
    h = a.hx.coefficients(48)[47] / b.hx.coefficients(48)[47]
    assert abs(h / m0 - 1) < 0.03


@pytest.mark.parametrize("seed", [3, 4])
def test_residue_form_matches_dp_random_walks(seed):
    from qwalk.fixtures import random_walks
    from qwalk.genfun import absorption_gf
    for w in random_walks(2, seed=seed, start=(3, 2)):
        agf = absorption_gf(w)
        G = dp_green(w, 300)
        for i, j in ((1, 1), (2, 3), (5, 2), (4, 4)):
            assert abs(green_residue_form(agf, i, j) - G[i - 1, j - 1]) < 1e-12
