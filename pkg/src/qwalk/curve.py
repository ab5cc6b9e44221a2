"""The kernel curve Q(x, y) = 0.

Q(x, y) = a(x) y^2 + b(x) y + c(x) = at(y) x^2 + bt(y) x + ct(y), where the
"t" (tilde) polynomials are those of the mirrored walk p_ij -> p_ji.  The two
algebraic functions Y0, Y1 (roots in y) are branched at the four real roots
x1..x4 of d = b^2 - 4ac; we label Y0 the root of smaller modulus, which is
analytic off the cuts [x1, x2] and [x3, x4] (the latter through infinity when
x4 < 0 or x4 is infinite).
"""
from __future__ import annotations

from dataclasses import dataclass
from math import inf

import numpy as np
from numpy.polynomial import Polynomial as Poly

from .constants import CUT_TOL
from .errors import CheckFailed, OnCut, PoleOfBranch, RootFindingFailed
from .walk_model import WalkParams

_ZERO_LEAD = 1e-14


@dataclass(frozen=True)
class CurvePolynomials:
    a: Poly
    b: Poly
    c: Poly
    d: Poly
    at: Poly
    bt: Poly
    ct: Poly
    dt: Poly
    r: Poly
    r1: Poly
    r2: Poly
    rt: Poly
    r1t: Poly
    r2t: Poly
    zero_drift: bool = False

    @property
    def Pl(self) -> Poly:
        return self.r ** 2 - self.r1 * self.r2

    def swapped(self) -> "CurvePolynomials":
        """Polynomials of the mirrored walk."""
        return CurvePolynomials(self.at, self.bt, self.ct, self.dt, self.a, self.b, self.c,
                                self.d, self.rt, self.r1t, self.r2t, self.r, self.r1, self.r2,
                                self.zero_drift)


def _abc(p):
    a = Poly([p(-1, 1), p(0, 1), p(1, 1)])
    b = Poly([p(-1, 0), -1.0, p(1, 0)])
    c = Poly([p(-1, -1), p(0, -1), p(1, -1)])
    return a, b, c


def _rs(a, b, c):
    r = a * c.deriv() - a.deriv() * c
    r1 = b * a.deriv() - b.deriv() * a
    r2 = c * b.deriv() - c.deriv() * b
    return r, r1, r2


def build_polynomials(w: WalkParams) -> CurvePolynomials:
    """a, b, c, d in x and their mirrored counterparts in y, plus r, r1, r2."""
    a, b, c = _abc(lambda i, j: w[(i, j)])
    at, bt, ct = _abc(lambda i, j: w[(j, i)])
    d = b * b - 4 * a * c
    dt = bt * bt - 4 * at * ct
    zero = abs(w.drift[0]) < 1e-14 and abs(w.drift[1]) < 1e-14
    return CurvePolynomials(a, b, c, d, at, bt, ct, dt, *_rs(a, b, c), *_rs(at, bt, ct),
                            zero_drift=zero)


# --- branch points ------------------------------------------------------

@dataclass(frozen=True)
class BranchPoints:
    """Real roots of the discriminant, labelled x1..x4.

    ``x4_inf`` flags the cubic case (x4 at infinity); ``x4`` is then ``inf``.
    ``diagonal`` marks the opposed-pairs labelling x2 = -x1, x3 = -x4.
    """
    x1: float
    x2: float
    x3: float
    x4: float
    x4_inf: bool
    diagonal: bool

    def as_tuple(self):
        return (self.x1, self.x2, self.x3, self.x4)

    def on_cut(self, x, tol=CUT_TOL):
        """Boolean mask: is x on [x1, x2] or on [x3, x4] (through infinity if needed)."""
        x = np.asarray(x, dtype=complex)
        re, im = x.real, x.imag
        near_real = np.abs(im) <= tol * (1 + np.abs(re))
        inner = (re >= self.x1 - tol) & (re <= self.x2 + tol)
        if self.x4_inf:
            outer = re >= self.x3 - tol
        elif self.x4 > 0:
            outer = (re >= self.x3 - tol) & (re <= self.x4 + tol)
        else:
            outer = (re >= self.x3 - tol) | (re <= self.x4 + tol)
        return near_real & (inner | outer)


def _polish(poly: Poly, z: complex, steps: int = 2) -> complex:
    dp = poly.deriv()
    for _ in range(steps):
        den = dp(z)
        if den == 0:
            break
        z = z - poly(z) / den
    return z


def _real_roots(poly: Poly, what: str):
    coef = poly.coef.copy()
    scale = np.max(np.abs(coef))
    lead = len(coef) - 1
    while lead > 0 and abs(coef[lead]) <= _ZERO_LEAD * scale:
        lead -= 1
    trimmed = Poly(coef[:lead + 1])
    roots = trimmed.roots()  # companion-matrix eigenvalues
    roots = np.array([_polish(trimmed, complex(z)) for z in roots])
    if np.any(np.abs(roots.imag) > 1e-7 * (1 + np.abs(roots.real))):
        raise RootFindingFailed(f"non-real roots of {what}: {roots}")
    roots = roots.real
    res = np.abs(trimmed(roots)) / (scale * (1 + np.abs(roots)) ** lead)
    if np.any(res > 1e-10):
        raise RootFindingFailed(f"residual {res.max():.3g} at roots of {what}")
    return np.sort(roots), lead


def _branch_points(d: Poly, zero_drift: bool, diagonal: bool, what: str) -> BranchPoints:
    coef = d.coef
    if zero_drift:
        # d = (x-1)^2 q(x) exactly: deflate the double root at 1
        q, rem = divmod(d, Poly([1.0, -2.0, 1.0]))
        roots, deg = _real_roots(q, what)
        roots = np.concatenate([roots, [1.0, 1.0]])
        deg += 2
    else:
        roots, deg = _real_roots(d, what)
    if abs(coef[0]) <= _ZERO_LEAD * np.max(np.abs(coef)):
        roots[np.argmin(np.abs(roots))] = 0.0
    if diagonal:
        r = np.sort(np.abs(roots))
        small, big = 0.5 * (r[0] + r[1]), 0.5 * (r[2] + r[3])
        return BranchPoints(-small, small, big, -big, False, True)
    roots = roots[np.argsort(np.abs(roots), kind="stable")]
    if deg == 3:
        x1, x2, x3 = roots
        x4, x4_inf = inf, True
    elif deg == 4:
        x1, x2, x3, x4 = roots
        x4_inf = False
    else:
        raise RootFindingFailed(f"{what} has degree {deg}; expected 3 or 4")
    bp = BranchPoints(float(x1), float(x2), float(x3), float(x4), x4_inf, False)
    if not (abs(x1) <= abs(x2) <= 1 <= abs(x3) and x2 > 0 and x3 > 0):
        raise RootFindingFailed(f"unexpected branch-point layout for {what}: {bp}")
    return bp


def branch_points(cp: CurvePolynomials, diagonal: bool = False):
    """Return ``(bx, by)``: branch points of Y (roots of d) and of X (roots of dt)."""
    bx = _branch_points(cp.d, cp.zero_drift, diagonal, "d")
    by = _branch_points(cp.dt, cp.zero_drift, diagonal, "dt")
    return bx, by


# --- algebraic branches -------------------------------------------------

def quadratic_roots(a, b, c):
    """Both roots of a z^2 + b z + c, ordered (smaller modulus, larger modulus).

    Uses the cancellation-free pairing q = -(b + s sqrt(disc))/2, roots q/a and
    c/q.  A vanishing leading coefficient yields an infinite larger root.
    """
    a, b, c = np.broadcast_arrays(np.asarray(a, complex), np.asarray(b, complex),
                                  np.asarray(c, complex))
    s = np.sqrt(b * b - 4 * a * c)
    q = np.where(np.abs(b + s) >= np.abs(b - s), -(b + s) / 2, -(b - s) / 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        r_big = np.where(a != 0, q / np.where(a != 0, a, 1), complex(inf, 0))
        r_small = np.where(q != 0, c / np.where(q != 0, q, 1), 0)
    swap = np.abs(r_small) > np.abs(r_big)
    lo = np.where(swap, r_big, r_small)
    hi = np.where(swap, r_small, r_big)
    return lo, hi


class Curve:
    """Polynomials, branch points and branch evaluators of one walk."""

    def __init__(self, w: WalkParams):
        self.walk = w
        self.cp = build_polynomials(w)
        self.bx, self.by = branch_points(self.cp, w.is_diagonal)

    # roots in y for given x, and in x for given y
    def Y(self, x):
        cp = self.cp
        return quadratic_roots(cp.a(x), cp.b(x), cp.c(x))

    def X(self, y):
        cp = self.cp
        return quadratic_roots(cp.at(y), cp.bt(y), cp.ct(y))

    def Y0(self, x):
        return _scalar(self.Y(x)[0])

    def Y1(self, x):
        return _scalar(self.Y(x)[1])

    def X0(self, y):
        return _scalar(self.X(y)[0])

    def X1(self, y):
        return _scalar(self.X(y)[1])

    def sqrt_d(self, x):
        """a(Y1 - Y0): the square root of d that is analytic off the cuts."""
        y0, y1 = self.Y(x)
        return _scalar(self.cp.a(x) * (y1 - y0))

    def sqrt_dt(self, y):
        x0, x1 = self.X(y)
        return _scalar(self.cp.at(y) * (x1 - x0))

    def Y_on_cut(self, t, side: int):
        """One-sided limit of (Y0, Y1) on the cut at real t; side=+1 from above.

        The values are the exact pair (-b -/+ i sqrt(-d)) / (2a); which one is
        Y0 is decided by continuity from the requested half-plane.
        """
        t = np.asarray(t, dtype=float)
        cp = self.cp
        a, b, d = cp.a(t), cp.b(t), cp.d(t)
        root = np.sqrt(np.maximum(-d, 0.0))
        u = (-b - 1j * root) / (2 * a)
        v = (-b + 1j * root) / (2 * a)
        eps = 1e-7 * (1 + np.abs(t))
        probe = self.Y(t + 1j * side * eps)[0]
        first = np.abs(probe - u) <= np.abs(probe - v)
        return _scalar(np.where(first, u, v)), _scalar(np.where(first, v, u))

    def X_on_cut(self, s, side: int):
        return self.swapped().Y_on_cut(s, side)

    def swapped(self) -> "Curve":
        other = object.__new__(Curve)
        other.walk = self.walk.transposed()
        other.cp = self.cp.swapped()
        other.bx, other.by = self.by, self.bx
        return other

    # branch value at the real branch point itself (double root)
    def Y_at_branch(self, x):
        return -self.cp.b(x) / (2 * self.cp.a(x))

    def X_at_branch(self, y):
        return -self.cp.bt(y) / (2 * self.cp.at(y))


def _scalar(v):
    return v[()] if np.ndim(v) == 0 else v


def Y_branch(curve: Curve, x, branch: int, side: int | None = None):
    """Checked evaluation of Y0 (branch=0) or Y1 (branch=1) at x.

    Raises
    ------
    OnCut
        x lies on a cut and no ``side`` (+1 above / -1 below) was given.
    PoleOfBranch
        a(x) = 0 and branch 1 was requested.
    """
    if side is not None:
        vals = curve.Y_on_cut(np.real(x), side)
        return vals[branch]
    if np.any(curve.bx.on_cut(x)):
        raise OnCut(f"x={x} lies on a cut of Y; pass side=+1 or -1")
    y0, y1 = curve.Y(x)
    if branch == 1 and np.any(~np.isfinite(y1)):
        raise PoleOfBranch(f"a(x)=0 at x={x}")
    return _scalar(y0 if branch == 0 else y1)


def X_branch(curve: Curve, y, branch: int, side: int | None = None):
    return Y_branch(curve.swapped(), y, branch, side)


# --- saddle-point polynomial family ---------------------------------------

def characteristic_polynomial(cp: CurvePolynomials, gamma: float) -> Poly:
    """-(ac + x tan(g) r) d + (x tan(g))^2 (r^2 - r1 r2), a degree-8 polynomial in x."""
    t = np.tan(gamma)
    x = Poly([0.0, 1.0])
    return -(cp.a * cp.c + x * t * cp.r) * cp.d + (x * t) ** 2 * cp.Pl


def axial_factors(w: WalkParams, gamma: float):
    """The two quadratic factors of the characteristic polynomial for walks with
    only axial jumps: it equals p01 p0-1 (tan^2 g - 1) x^2 P14 P23."""
    t2 = np.tan(gamma) ** 2
    p10, pm10, p01, p0m1 = w[(1, 0)], w[(-1, 0)], w[(0, 1)], w[(0, -1)]
    root = np.sqrt(1 - (1 - t2) * (1 - 4 * p0m1 * p01 + 4 * pm10 * p10 * t2))
    P14 = Poly([pm10, -(1 + root) / (1 - t2), p10])
    P23 = Poly([pm10, -(1 - root) / (1 - t2), p10])
    return P14, P23


def circle_dominance_check(curve: Curve, npts: int = 720) -> float:
    """Minimum of |X1(y)| - x3 over the circle |y| = Y(x3), special points excluded.

    Raises CheckFailed when the margin is not positive.
    """
    x3 = curve.bx.x3
    s = float(np.real(curve.Y_at_branch(x3)))
    theta = 2 * np.pi * np.arange(npts) / npts
    keep = np.ones(npts, bool)
    keep[0] = False
    if curve.walk.is_diagonal:
        keep[npts // 2] = False
    y = s * np.exp(1j * theta[keep])
    margin = np.abs(curve.X(y)[1]) - x3
    m = float(margin.min())
    if not m > 0:
        raise CheckFailed(f"|X1(y)| <= x3 on the circle |y|={s}: margin {m}")
    return m
