"""Asymptotics: tails of the absorption probabilities, saddle points, Green
functions and Martin-kernel ratios.

Tails
-----
Near x3 the branch Y0 has a square-root singularity, and h = x^n0 Y0^m0 -
ht(Y0) - h00 inherits it.  With [x^k] (1 - x/x3)^(1/2) ~ -k^(-3/2) x3^(-k) /
(2 sqrt(pi)) this gives

    h_k ~ K k^(-3/2) x3^(-k),
    K = (-x3 d'(x3))^(1/2) / (4 sqrt(pi) a(x3)) [m0 s^(m0-1) x3^n0 - ht'(s)],

with s = (c(x3)/a(x3))^(1/2) (``tail_unified``).  The first term alone is the
contribution of the residue part h1 (``tail_constant_h1``); the second is the
contribution of the gluing part h2, for which ``tail_constant_h2`` gives the
regime-specific closed form.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import atan, cos, pi, sin, sqrt, tan

import numpy as np

from .constants import NEWTON_MAXIT, NEWTON_TOL
from .curve import Curve
from .elliptic import roots_legendre
from .errors import CheckFailed, NewtonDiverged, QuadratureNotConverged, WrongRegime
from .genfun import AbsorptionGF, _density
from .gluing import Gluing
from .walk_model import JUMPS, WalkParams


def _parity_factor(w: WalkParams) -> int:
    return 2 if w.is_diagonal else 1


def _y_at_x3(curve: Curve):
    x3 = curve.bx.x3
    return sqrt(curve.cp.c(x3) / curve.cp.a(x3))


# --- tail constants ------------------------------------------------------

def tail_constant_h1(curve: Curve, n0: int | None = None, m0: int | None = None) -> float:
    """m0 x3^(n0+1/2)/(4 sqrt(pi)) (-d'(x3)/(a c))^(1/2) (c/a)^(m0/2), all at x3.

    Not doubled for diagonal walks; see ``tail_asymptotics``.
    """
    n0 = curve.walk.n0 if n0 is None else n0
    m0 = curve.walk.m0 if m0 is None else m0
    cp, x3 = curve.cp, curve.bx.x3
    a, c, dd = cp.a(x3), cp.c(x3), cp.d.deriv()(x3)
    return float(m0 * x3 ** (n0 + 0.5) / (4 * sqrt(pi)) * sqrt(-dd / (a * c)) * (c / a) ** (m0 / 2))


def _slit_integral(gl: Gluing, fun, n: int = 512) -> float:
    """int_{x1}^{x2} fun(t) dt after t = mid + half sin(theta)."""
    bx = gl.curve.bx
    th, wt = roots_legendre(n)
    th, wt = th * pi / 2, wt * pi / 2
    mid, half = 0.5 * (bx.x1 + bx.x2), 0.5 * (bx.x2 - bx.x1)
    t = mid + half * np.sin(th)
    return float(np.sum(fun(t) * wt * half * np.cos(th)))


def tail_constant_h2(gl: Gluing, n0: int | None = None, m0: int | None = None,
                     regime: str | None = None) -> float:
    """Contribution of the gluing part to the tail constant, by regime.

    * Even2N: -m0 x2^n0 x3^(1/2)/(4 sqrt(pi)) (d'(x2)/(a c))^(1/2)
      (-Res(w,x2)/Res(w,x3))^(1/2) (c/a)^(m0/2), with a, c at x2.
    * Odd2N1: 0.
    * Irrational: with w(x) = w1 + w2 (x3 - x)^(1/2) + ... near x3,
      -x3^(1/2) w2 / (2 pi^(3/2)) int t^n0 mu w' sqrt(-d) / (w - w1)^2 dt.
    """
    curve = gl.curve
    n0 = curve.walk.n0 if n0 is None else n0
    m0 = curve.walk.m0 if m0 is None else m0
    regime = gl.regime if regime is None else regime
    cp, bx = curve.cp, curve.bx
    if regime == "Odd2N1":
        return 0.0
    if regime == "Even2N":
        x2, x3 = bx.x2, bx.x3
        a, c, dd = cp.a(x2), cp.c(x2), cp.d.deriv()(x2)
        ratio = -gl.res_x2 / gl.res_x3
        val = (-m0 * complex(x2) ** n0 * sqrt(x3) / (4 * sqrt(pi))
               * np.sqrt(complex(dd / (a * c))) * np.sqrt(complex(ratio))
               * np.sqrt(complex(c / a)) ** m0)
        return float(val.real)
    if regime == "Irrational":
        at = gl.at_x3
        w1, w2 = at.w1, at.w2

        def integrand(t):
            return _density(gl, n0, m0, t) / (np.real(gl.w(t + 0j)) - w1) ** 2
        integral = _slit_integral(gl, integrand)
        return float(-sqrt(bx.x3) * w2 * integral / (2 * pi ** 1.5))
    raise WrongRegime(f"unknown regime {regime!r}")


def tail_constant_h2_irrational_p13_prefactor(gl: Gluing, n0=None, m0=None) -> float:
    """The Irrational-regime constant written with the prefactor
    sqrt(x3) p13'(omega2/2) sqrt(-f'(x3)) / sqrt(pi (f3 - f2)(f3 - f1)).

    This form does not agree with ``tail_unified``; it is kept only to
    document the discrepancy.  Use ``tail_constant_h2``."""
    curve = gl.curve
    n0 = curve.walk.n0 if n0 is None else n0
    m0 = curve.walk.m0 if m0 is None else m0
    ed = gl.ed
    e1, e2, e3 = ed.e
    x3 = curve.bx.x3
    dp = float(np.real(ed.p13.dp(0.5 * ed.omega2)))
    w1 = gl.at_x3.w1

    def integrand(t):
        return _density(gl, n0, m0, t) * pi / (np.real(gl.w(t + 0j)) - w1) ** 2
    integral = _slit_integral(gl, integrand)
    return float(sqrt(x3) * dp * sqrt(-ed.f.deriv(x3)) / sqrt(pi * (e3 - e2) * (e3 - e1)) * integral)


def tail_unified(agf: AbsorptionGF, n0: int | None = None, m0: int | None = None) -> float:
    """(-x3 d'(x3))^(1/2)/(4 sqrt(pi) a(x3)) [m0 s^(m0-1) x3^n0 - ht'(s)], s = Y(x3)."""
    curve = agf.curve
    n0 = curve.walk.n0 if n0 is None else n0
    m0 = curve.walk.m0 if m0 is None else m0
    cp, x3 = curve.cp, curve.bx.x3
    s = _y_at_x3(curve)
    pref = sqrt(-x3 * cp.d.deriv()(x3)) / (4 * sqrt(pi) * cp.a(x3))
    return float(pref * (m0 * s ** (m0 - 1) * x3 ** n0 - agf.hy.h_prime(s).real))


def tail_constant_h2_from_derivative(agf: AbsorptionGF) -> float:
    """The gluing-part constant as -(-x3 d'(x3))^(1/2)/(4 sqrt(pi) a(x3)) ht'(Y(x3))."""
    cp, x3 = agf.curve.cp, agf.curve.bx.x3
    s = _y_at_x3(agf.curve)
    return float(-sqrt(-x3 * cp.d.deriv()(x3)) / (4 * sqrt(pi) * cp.a(x3)) * agf.hy.h_prime(s).real)


@dataclass
class TailAsymptotics:
    """h_k ~ constant k^(-power) rate^(-k) on admissible k.

    ``constant`` always comes from ``tail_unified``.  ``h2k_const`` is the
    regime closed form, which is only meaningful when ``regime_formula_valid``
    (w has no double pole on ]x2, x3[); ``h2k_derivative`` is the same
    contribution computed from ht'.
    """
    regime: str
    rate: float            # x3
    power: float           # 3/2
    constant: float
    parity_factor: int
    h1k_const: float
    h2k_const: float
    h2k_derivative: float
    unified: float
    regime_formula_valid: bool

    @property
    def regime_sum(self) -> float:
        return self.h1k_const + self.h2k_const

    def predict(self, k):
        k = np.asarray(k, dtype=float)
        return self.constant * k ** (-self.power) * self.rate ** (-k)

    def as_dict(self):
        return {"regime": self.regime, "rate": self.rate, "power": self.power,
                "constant": self.constant, "parity_factor": self.parity_factor,
                "h1k_const": self.h1k_const, "h2k_const": self.h2k_const,
                "h2k_derivative": self.h2k_derivative, "regime_sum": self.regime_sum,
                "unified": self.unified, "regime_formula_valid": self.regime_formula_valid}


def tail_asymptotics(agf: AbsorptionGF) -> TailAsymptotics:
    """Tail constants of h_k; diagonal walks get the factor 2 on admissible k."""
    w = agf.walk
    pf = _parity_factor(w)
    c1 = tail_constant_h1(agf.curve)
    c2 = tail_constant_h2(agf.gl)
    cd = tail_constant_h2_from_derivative(agf)
    cu = tail_unified(agf)
    valid = len(agf.gl.double_poles()) == 0
    return TailAsymptotics(agf.gl.regime, float(agf.curve.bx.x3), 1.5, pf * cu, pf, pf * c1, pf * c2,
                           pf * cd, pf * cu, valid)


# --- saddle points --------------------------------------------------------

@dataclass
class SaddlePoint:
    gamma: float
    u: float
    v: float
    s_x: float
    s_y: float


def _phi_derivs(w: WalkParams, u, v):
    """phi and its first and second partial derivatives."""
    out = np.zeros(6)  # phi, pu, pv, puu, puv, pvv
    for (i, j) in JUMPS:
        p = w[(i, j)]
        if p == 0:
            continue
        e = p * np.exp(i * u + j * v)
        out += e * np.array([1, i, j, i * i, i * j, j * j])
    return out


def phi(w: WalkParams, u, v):
    return _phi_derivs(w, u, v)[0]


def _newton_saddle(w, gamma, u, v):
    sg, cg = sin(gamma), cos(gamma)
    for _ in range(NEWTON_MAXIT):
        f, pu, pv, puu, puv, pvv = _phi_derivs(w, u, v)
        F = np.array([f - 1.0, sg * pu - cg * pv])
        J = np.array([[pu, pv], [sg * puu - cg * puv, sg * puv - cg * pvv]])
        du, dv = np.linalg.solve(J, -F)
        u, v = u + du, v + dv
        if abs(du) + abs(dv) < NEWTON_TOL * (1 + abs(u) + abs(v)):
            return u, v
    raise NewtonDiverged(f"saddle Newton did not converge at gamma={gamma}: last (u, v)=({u}, {v})")


def saddle(w: WalkParams, gamma: float, steps: int = 64, curve: Curve | None = None) -> SaddlePoint:
    """Point of phi(u, v) = 1 where grad phi points along (cos gamma, sin gamma).

    Continued from gamma = 0, where (u, v) = (ln x3, ln Y(x3)).
    """
    if not 0.0 <= gamma <= pi / 2:
        raise ValueError("gamma must lie in [0, pi/2]")
    curve = Curve(w) if curve is None else curve
    x3 = curve.bx.x3
    u, v = np.log(x3), np.log(_y_at_x3(curve))
    u, v = _newton_saddle(w, 0.0, u, v)
    for g in np.linspace(0.0, gamma, steps + 1)[1:]:
        u, v = _newton_saddle(w, g, u, v)
    _, pu, pv = _phi_derivs(w, u, v)[:3]
    if pu < -1e-12 or pv < -1e-12:
        raise CheckFailed("saddle gradient left the first quadrant")
    return SaddlePoint(float(gamma), float(u), float(v), float(np.exp(u)), float(np.exp(v)))


def saddle_path(w: WalkParams, gammas, curve: Curve | None = None):
    """Saddle points along an increasing grid of angles (one continuation)."""
    curve = Curve(w) if curve is None else curve
    x3 = curve.bx.x3
    u, v = _newton_saddle(w, 0.0, np.log(x3), np.log(_y_at_x3(curve)))
    out, prev = [], 0.0
    for g in gammas:
        for gg in np.linspace(prev, g, 9)[1:]:
            u, v = _newton_saddle(w, gg, u, v)
        prev = g
        out.append(SaddlePoint(float(g), float(u), float(v), float(np.exp(u)), float(np.exp(v))))
    return out


def chi1_prime(curve: Curve, gamma: float, x: float, h: float = 1e-4) -> float:
    """d/dx of x Y1(x)^tan(gamma) (Richardson-extrapolated central difference)."""
    tg = tan(gamma)

    def chi(z):
        return z * curve.Y1(z + 0j).real ** tg

    def D(step):
        return (chi(x + step) - chi(x - step)) / (2 * step)
    return float((4 * D(h / 2) - D(h)) / 3)


def rc_constants(curve: Curve):
    """Expansion constants at gamma = 0: (kx, ky) with
    s_x(0) - s_x(r) ~ kx r^2 and s_y(r) - s_y(0) ~ ky r for r = j/i -> 0."""
    cp, x3 = curve.cp, curve.bx.x3
    a, c, Pl = cp.a(x3), cp.c(x3), cp.Pl(x3)
    kx = x3 ** 2 * Pl / (-cp.d.deriv()(x3) * a * c)
    ky = x3 * sqrt(Pl) / (2 * a ** 1.5 * sqrt(c))
    return float(kx), float(ky)


# --- Green functions -------------------------------------------------------

def _second_derivative(f, x, h=1e-3):
    def D(s):
        return (f(x + s) - 2 * f(x) + f(x - s)) / (s * s)
    return (4 * D(h / 2) - D(h)) / 3


def _x1_real(curve: Curve, y):
    return float(np.real(curve.X1(complex(y))))


def interior_constant(curve: Curve, sp: SaddlePoint, dt_power: float = 0.5) -> float:
    """C(gamma) = (2 pi)^(-1/2) dt(s_y)^(-dt_power) s_y (-D2)^(-1/2), with
    D2 = d^2/dy^2 [X1(s_y y)/s_x y^tan(gamma)] at y = 1.

    ``dt_power=0.5`` is the value that matches the truncated-lattice Green
    function; ``dt_power=1`` is kept for comparison.
    """
    tg = tan(sp.gamma)
    D2 = _second_derivative(lambda y: _x1_real(curve, sp.s_y * y) / sp.s_x * y ** tg, 1.0)
    dt = curve.cp.dt(sp.s_y)
    return float((2 * pi) ** -0.5 * dt ** (-dt_power) * sp.s_y * (-D2) ** -0.5)


def _green_parity(w: WalkParams, i: int, j: int) -> int:
    if not w.is_diagonal:
        return 1
    return 2 if (i + j - w.n0 - w.m0) % 2 == 0 else 0


def interior_bracket(agf: AbsorptionGF, sp: SaddlePoint) -> float:
    """s_x^n0 s_y^m0 - h(s_x) - ht(s_y) - h00 (positive for a valid walk)."""
    w = agf.walk
    return float((sp.s_x ** w.n0 * sp.s_y ** w.m0 - agf.h(sp.s_x) - agf.htilde(sp.s_y)
                  - agf.h00).real)


def green_interior(agf: AbsorptionGF, i: int, j: int, dt_power: float = 0.5) -> float:
    """Leading-order G_{i,j} for a direction strictly inside the quadrant."""
    gamma = atan(j / i)
    sp = saddle(agf.walk, gamma, curve=agf.curve)
    br = interior_bracket(agf, sp)
    if br <= 0:
        raise CheckFailed(f"interior bracket {br} is not positive")
    C = interior_constant(agf.curve, sp, dt_power)
    return float(_green_parity(agf.walk, i, j) * br * C / sqrt(i) * sp.s_x ** (-i) * sp.s_y ** (-j))


def axis_bracket(agf: AbsorptionGF) -> float:
    """m0 s_x(0)^n0 s_y(0)^(m0-1) - ht'(s_y(0))."""
    w = agf.walk
    x3, s = agf.curve.bx.x3, _y_at_x3(agf.curve)
    return float(w.m0 * x3 ** w.n0 * s ** (w.m0 - 1) - agf.hy.h_prime(s).real)


def axis_constant(curve: Curve) -> float:
    """C0 = (2/pi)^(1/2) s_y'(0) s_x(0)^(1/2) / (-dt(s_y(0)) X1''(s_y(0)))^(1/2)."""
    x3, s = curve.bx.x3, _y_at_x3(curve)
    ky = rc_constants(curve)[1]
    X2 = _second_derivative(lambda y: _x1_real(curve, y), s, h=1e-3 * s)
    return float(sqrt(2 / pi) * ky * sqrt(x3) / sqrt(-curve.cp.dt(s) * X2))


def green_axis(agf: AbsorptionGF, i: int, j: int) -> float:
    """Leading-order G_{i,j} for j/i -> 0."""
    sp = saddle(agf.walk, atan(j / i), curve=agf.curve)
    return float(_green_parity(agf.walk, i, j) * axis_constant(agf.curve) * axis_bracket(agf)
                 * j / (i * sqrt(i)) * sp.s_x ** (-i) * sp.s_y ** (-j))


def _residue_form_sum(agf: AbsorptionGF, i: int, j: int, n: int) -> float:
    curve = agf.curve
    w = agf.walk
    th = 2 * pi * (np.arange(n) + 0.5) / n
    z = np.exp(1j * th)
    cp = curve.cp
    # x-integral: dx = i z dtheta, so -(1/2 pi i) int ... dx = -mean(... z)
    Y0, Y1 = curve.Y(z)
    sd = cp.a(z) * (Y1 - Y0)
    hx = agf.h(z)
    I1 = -np.mean(hx / (sd * z ** i * Y1 ** j) * z)
    X0, X1 = curve.X(z)
    sdt = cp.at(z) * (X1 - X0)
    hy = agf.htilde(z)
    Xs = X1 if i > w.n0 else X0
    I2 = (-np.mean((hy + agf.h00) / (sdt * X1 ** i * z ** j) * z)
          + np.mean(Xs ** (w.n0 - i) * z ** (w.m0 - j) / sdt * z))
    return float((I1 + I2).real)


def green_residue_form(agf: AbsorptionGF, i: int, j: int, n: int = 512,
                       tol: float = 1e-13, n_max: int = 1 << 16) -> float:
    """G_{i,j} from the two contour integrals over |x| = 1 and |y| = 1.

    G = -(1/2 pi i) int h(x) / (sqrt(d) x^i Y1^j) dx
        -(1/2 pi i) int (ht(y) + h00) / (sqrt(dt) X1^i y^j) dy
        +(1/2 pi i) int Xs^(n0-i) y^m0 / (sqrt(dt) y^j) dy,
    with sqrt(d) = a (Y1 - Y0) (analytic off the cuts).

    The inner x-integral of x^(n0-i) / Q is minus the residue at X1 only when
    i > n0; for i <= n0 the residue at infinity enters, and the sum of the
    outer residues equals the residue at X0.  So Xs = X1 for i > n0 and
    Xs = X0 otherwise.

    The trapezoidal rule converges geometrically at a rate set by the
    distance of the nearest branch point to the unit circle, so the node
    count starts at ``n`` and doubles until two successive sums agree to
    ``tol`` (relative to max(1, |G|)).

    Raises
    ------
    QuadratureNotConverged
        If ``n_max`` nodes are not enough.
    """
    prev = _residue_form_sum(agf, i, j, n)
    while n < n_max:
        n *= 2
        cur = _residue_form_sum(agf, i, j, n)
        if abs(cur - prev) <= tol * max(1.0, abs(cur)):
            return cur
        prev = cur
    raise QuadratureNotConverged(f"residue form for G[{i},{j}] not converged at {n} nodes")


# --- Martin kernel ------------------------------------------------------------

def martin_kernel(agf0: AbsorptionGF, agf1: AbsorptionGF, gamma: float) -> float:
    """lim G^{(n0,m0)}_{i,j} / G^{(n1,m1)}_{i,j} along direction gamma."""
    if agf0.walk.p != agf1.walk.p and dict(agf0.walk.p) != dict(agf1.walk.p):
        raise ValueError("both starts must belong to the same walk")
    if gamma == 0.0:
        return axis_bracket(agf0) / axis_bracket(agf1)
    sp = saddle(agf0.walk, gamma, curve=agf0.curve)
    return interior_bracket(agf0, sp) / interior_bracket(agf1, sp)
