"""Periods, uniformization and the group of the walk.

The kernel curve has genus one.  A Mobius map ``f`` sending x4 to infinity
turns dx/sqrt(d(x)) into 2 dz/sqrt(4z^3 - g2 z - g3), so the curve is
uniformized by the Weierstrass function p_12 with periods (omega1, omega2):
x(omega) = f^{-1}(p_12(omega)).  The Galois automorphism delta = eta o xi is
the translation omega -> omega + omega3, and the group of the walk is finite
exactly when omega3/omega2 is rational.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from fractions import Fraction
from math import inf, isinf, pi, sqrt

import numpy as np
from scipy.special import elliprf, roots_legendre as _roots_legendre

from .constants import QUAD_MAX_NODES, QUAD_NODES, QUAD_TOL, RATIO_MAX_DEN, RATIO_TOL
from .curve import Curve
from .errors import DenominatorZero, QuadratureNotConverged
from .walk_model import WalkParams
from .weierstrass import Weierstrass


# --- quadrature ---------------------------------------------------------

@lru_cache(maxsize=32)
def _legendre(n: int):
    x, w = _roots_legendre(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def roots_legendre(n: int):
    """Gauss-Legendre nodes and weights on [-1, 1] (cached, read-only)."""
    return _legendre(int(n))


def gauss_adaptive(fun, a: float, b: float, n: int = QUAD_NODES, tol: float = QUAD_TOL,
                   nmax: int = QUAD_MAX_NODES):
    """Gauss-Legendre on [a, b], doubling the node count until the relative
    change drops below ``tol``.  ``fun`` must accept an array."""
    prev = None
    while n <= nmax:
        x, w = roots_legendre(n)
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        val = half * np.dot(w, fun(mid + half * x))
        if prev is not None and abs(val - prev) <= tol * abs(val):
            return val
        prev = val
        n *= 2
    raise QuadratureNotConverged(f"no convergence on [{a}, {b}] with {nmax} nodes")


def _other_factor(curve: Curve, skip: tuple[int, int]):
    """x -> |L prod_{i not in skip} (x - x_i)|, with L the leading coefficient of d."""
    bx = curve.bx
    roots = [bx.x1, bx.x2, bx.x3, bx.x4]
    d = curve.cp.d.coef
    keep = [r for k, r in enumerate(roots) if k not in skip and not isinf(r)]
    lead = d[4] if not bx.x4_inf else d[3]
    if len(d) < 5:
        lead = d[-1]

    def g(x):
        out = np.full_like(x, abs(lead), dtype=float)
        for r in keep:
            out = out * np.abs(x - r)
        return out
    return g


def _sin_quad(curve: Curve, lo: float, hi: float, skip):
    """int_lo^hi dx / sqrt(|d(x)|) where lo, hi are consecutive roots of d."""
    g = _other_factor(curve, skip)
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    # x = mid + half sin(theta): (x - lo)(hi - x) = half^2 cos^2(theta)
    return gauss_adaptive(lambda th: 1.0 / np.sqrt(g(mid + half * np.sin(th))), -pi / 2, pi / 2)


# --- the Mobius map f ----------------------------------------------------

@dataclass(frozen=True)
class FMap:
    """z = f(t): d''(x4)/6 + d'(x4)/(t - x4), or (d''(0) + d'''(0) t)/6 when x4 = inf."""
    x4: float
    x4_inf: bool
    d1: float  # d'(x4), or d'''(0) when x4 = inf
    d2: float  # d''(x4), or d''(0)

    @classmethod
    def from_curve(cls, curve: Curve) -> "FMap":
        d = curve.cp.d
        if curve.bx.x4_inf:
            return cls(inf, True, float(d.deriv(3)(0.0)), float(d.deriv(2)(0.0)))
        x4 = curve.bx.x4
        return cls(x4, False, float(d.deriv(1)(x4)), float(d.deriv(2)(x4)))

    def __call__(self, t):
        if self.x4_inf:
            return (self.d2 + self.d1 * t) / 6
        return self.d2 / 6 + self.d1 / (t - self.x4)

    def deriv(self, t):
        if self.x4_inf:
            return self.d1 / 6 + 0 * t
        return -self.d1 / (t - self.x4) ** 2

    def inv(self, z):
        if self.x4_inf:
            return (6 * z - self.d2) / self.d1
        return self.x4 + self.d1 / (z - self.d2 / 6)

    def sqrt_d(self, pz, dpz):
        """sqrt(d(x)) at x = f^{-1}(pz) expressed through p and p' (up to a global sign)."""
        if self.x4_inf:
            return 3 * dpz / self.d1
        return self.d1 * dpz / (2 * (pz - self.d2 / 6) ** 2)


# --- group --------------------------------------------------------------

@dataclass(frozen=True)
class GroupInfo:
    kind: str                 # "finite" | "infinite"
    order: int | None         # 2n when finite
    ratio: tuple[int, int] | None   # omega3/omega2 = p/q in lowest terms
    raw_ratio: float          # omega3/omega2 as computed
    omega23: float            # omega2/omega3
    regime: str               # "Even2N" | "Odd2N1" | "Irrational" (omega2/omega3 not in N)

    def as_dict(self):
        return {"kind": self.kind, "order": self.order,
                "ratio": list(self.ratio) if self.ratio else None,
                "raw_ratio": self.raw_ratio, "omega2_over_omega3": self.omega23,
                "regime": self.regime}


def classify_ratio(omega2: float, omega3: float, tol: float = RATIO_TOL,
                   max_den: int = RATIO_MAX_DEN) -> GroupInfo:
    """Continued-fraction detection of omega3/omega2 = p/q (q <= max_den)."""
    r = omega3 / omega2
    frac = Fraction(r).limit_denominator(max_den)
    finite = abs(r - frac.numerator / frac.denominator) < tol
    if finite:
        p, q = frac.numerator, frac.denominator
        regime = "Irrational" if p != 1 else ("Even2N" if q % 2 == 0 else "Odd2N1")
        return GroupInfo("finite", 2 * q, (p, q), r, omega2 / omega3, regime)
    return GroupInfo("infinite", None, None, r, omega2 / omega3, "Irrational")


def delta_det(w: WalkParams) -> float:
    """The determinant whose sign compares omega3 with omega2/2 (zero iff order 4)."""
    m = np.array([[w[(1, 1)], w[(1, 0)], w[(1, -1)]],
                  [w[(0, 1)], -1.0, w[(0, -1)]],
                  [w[(-1, 1)], w[(-1, 0)], w[(-1, -1)]]])
    return float(np.linalg.det(m))


# --- elliptic data ------------------------------------------------------

class EllipticData:
    """Periods, the two Weierstrass functions and the uniformization of one walk."""

    def __init__(self, curve: Curve):
        self.curve = curve
        w = curve.walk
        bx = curve.bx
        self.f = FMap.from_curve(curve)
        # omega1: imaginary period, i int_{x1}^{x2} dx/sqrt(-d)
        if curve.cp.zero_drift:
            self.omega1 = complex(0, inf)
        else:
            self.omega1 = 1j * _sin_quad(curve, bx.x1, bx.x2, (0, 1))
        # omega2: int_{x2}^{x3} dx/sqrt(d)
        self.omega2 = _sin_quad(curve, bx.x2, bx.x3, (1, 2))
        self.e = (float(self.f(bx.x1)), float(self.f(bx.x2)), float(self.f(bx.x3)))
        # omega3: int_{X(y1)}^{x1} dx/sqrt(d), computed after z = f(x) (the arc
        # from X(y1) to x1 may pass through infinity; its image is [e1, zY])
        self.xy1 = _double_root(curve.cp.at, curve.cp.bt, curve.by.x1)
        self.zY = float(self.f(self.xy1))
        e1, e2, e3 = self.e
        S = sqrt(self.zY - e1)
        self.omega3 = 2 * gauss_adaptive(
            lambda s: 1.0 / np.sqrt((e1 - e2 + s * s) * (e1 - e3 + s * s)), 0.0, S)
        Q = abs(self.omega1.imag) if not isinf(self.omega1.imag) else inf
        self.p12 = Weierstrass(self.omega2, Q)
        self.p13 = Weierstrass(self.omega3, Q)
        self.delta = delta_det(w)
        self.group = classify_ratio(self.omega2, self.omega3)
        self._sign = 1.0
        self._sign = self._fix_sign()

    # Carlson cross-checks of the quadratures
    def carlson_periods(self):
        e1, e2, e3 = self.e
        w2 = 2 * float(elliprf(0.0, e1 - e2, e1 - e3))
        w1 = 2 * float(elliprf(0.0, e1 - e3, e2 - e3)) if e2 > e3 else inf
        w3 = w2 - 2 * float(elliprf(self.zY - e1, self.zY - e2, self.zY - e3))
        return 1j * w1, w2, w3

    def period_checks(self):
        """Relative mismatches p12(half periods) vs f(branch points)."""
        e = self.e
        vals = [self.p12.p(self.omega2 / 2), self.p12.p((self.omega2 + self.omega3) / 2)]
        out = [abs(vals[0] - e[0]) / (1 + abs(e[0])),
               abs(vals[1] - self.zY) / (1 + abs(self.zY))]
        if not isinf(self.omega1.imag):
            v2 = self.p12.p((self.omega1 + self.omega2) / 2)
            out.append(abs(v2 - e[1]) / (1 + abs(e[1])))
        return out

    # --- uniformization
    def _xy(self, omega, sign):
        pz = self.p12.p(omega)
        dpz = self.p12.dp(omega)
        x = self.f.inv(pz)
        cp = self.curve.cp
        s = sign * self.f.sqrt_d(pz, dpz)
        a, b, c = cp.a(x), cp.b(x), cp.c(x)
        # y = (-b + s)/(2a) = 2c/(-b - s); use the better-conditioned form
        num1, den2 = -b + s, -b - s
        y = np.where(np.abs(num1) >= np.abs(den2),
                     num1 / np.where(a != 0, 2 * a, 1e-300), 2 * c / den2)
        return x, y

    def _fix_sign(self):
        # anchor: omega = (omega2+omega3)/2 lies over (X(y1), y1)
        y1 = self.curve.by.x1
        om = 0.5 * (self.omega2 + self.omega3)
        if isinf(self.omega1.imag):
            om = om + 0j
        err = {}
        for sgn in (1.0, -1.0):
            err[sgn] = abs(self._xy(np.asarray(om), sgn)[1] - y1)
        return 1.0 if err[1.0] <= err[-1.0] else -1.0

    def uniformize(self, omega):
        """(x(omega), y(omega)) on the kernel curve."""
        x, y = self._xy(np.asarray(omega, dtype=complex), self._sign)
        return _sc(x), _sc(y)

    def x_of(self, omega):
        return _sc(self.f.inv(self.p12.p(omega)))


def _double_root(A, B, y):
    """-B(y)/(2A(y)), or infinity when the leading coefficient vanishes there."""
    a = float(A(y))
    if abs(a) <= 1e-14 * (1 + np.max(np.abs(A.coef))):
        return inf
    return float(-B(y) / (2 * a))


def _sc(v):
    return v[()] if np.ndim(v) == 0 else v


def periods(curve: Curve):
    ed = EllipticData(curve)
    return ed.omega1, ed.omega2, ed.omega3


def classify_group(ed: EllipticData) -> GroupInfo:
    return ed.group


# --- Galois automorphisms -------------------------------------------------

def xi(curve: Curve, x, y):
    a = curve.cp.a(x)
    den = a * y
    if np.any(den == 0):
        raise DenominatorZero("a(x) y = 0")
    return x, curve.cp.c(x) / den


def eta(curve: Curve, x, y):
    at = curve.cp.at(y)
    den = at * x
    if np.any(den == 0):
        raise DenominatorZero("at(y) x = 0")
    return curve.cp.ct(y) / den, y


def galois(curve: Curve, point, which: str):
    x, y = point
    if which == "xi":
        return xi(curve, x, y)
    if which == "eta":
        return eta(curve, x, y)
    if which == "delta":
        return eta(curve, *xi(curve, x, y))
    raise ValueError(f"unknown automorphism {which!r}")
