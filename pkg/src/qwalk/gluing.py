"""The conformal gluing function w of the curve M and its singularities.

M = X0(slit [y1, y2], both edges) is a closed curve symmetric about the real
axis.  With omega(t) the inverse of the uniformization (p_12(omega) = f(t)),

    w(t) = p_13(omega(t) - (omega1 + omega2)/2)

satisfies w(t) = w(conj t) on M, is meromorphic on C \\ [x3, x4] with a simple
pole at x2, and its behaviour at x3 depends on omega2/omega3 (simple pole,
holomorphic, or a square-root branch point).

Inversion.  Write v = omega(t) - omega2/2.  The half-period addition formula
gives p_12(v) = e1 + (e1 - e2)(e1 - e3)/(f(t) - e1), and the inverse of p is
the Carlson integral R_F(g - e1, g - e2, g - e3) followed by a Newton polish.
Reducing v to Re v in [0, omega2/2] picks a single point of the quotient, so
no branch tracking is needed away from the cut [x3, x4].
"""
from __future__ import annotations

from dataclasses import dataclass
from math import floor, isinf, pi, sqrt

import numpy as np
from scipy.special import elliprf

from .constants import NEWTON_MAXIT
from .curve import Curve
from .elliptic import EllipticData, delta_det
from .errors import NotDeltaZero, RegimeMismatch, WrongRegime
from .walk_model import WalkParams

DELTA_ZERO_TOL = 1e-12


@dataclass(frozen=True)
class BranchAtX3:
    """Local data of w at x3.

    kind is "pole" (omega2/omega3 even), "holomorphic" (odd) or "algebraic"
    (omega2/omega3 not an integer: w = w1 + w2 sqrt(x3 - t) near x3).
    """
    kind: str
    residue: float | None = None
    w1: float | None = None
    w2: float | None = None


class Gluing:
    """Evaluators of w, w' and the derived constants for one walk."""

    def __init__(self, ed: EllipticData):
        self.ed = ed
        self.curve = ed.curve
        self.e = ed.e
        self.zero_drift = isinf(ed.omega1.imag)
        self._half1 = 0.0 if self.zero_drift else 0.5 * ed.omega1
        regime = ed.group.regime
        self.regime = regime
        self.res_x2 = None if self.zero_drift else self._res_x2()
        self.at_x3 = self._at_x3()

    # --- inversion of the uniformization
    def _v(self, t):
        """v = omega(t) - omega2/2 reduced to Re v in [0, omega2/2]."""
        e1, e2, e3 = self.e
        ed = self.ed
        t = np.asarray(t, dtype=complex)
        shape = t.shape
        t = t.ravel()
        z = ed.f(t)
        with np.errstate(divide="ignore", invalid="ignore"):
            g = e1 + (e1 - e2) * (e1 - e3) / (z - e1)
        v = elliprf(g - e1, g - e2, g - e3)
        bad = np.isfinite(g) & ~np.isfinite(v)
        if bad.any():
            # real g on the branch cut of R_F: start off-axis, Newton fixes it
            gb = g[bad] + 1e-10j * (1 + np.abs(g[bad]))
            v[bad] = elliprf(gb - e1, gb - e2, gb - e3)
        v = np.where(np.isfinite(g), v, 0.0)
        v = self._newton(v, g)
        return self._reduce(v).reshape(shape)

    def _newton(self, v, g):
        p12 = self.ed.p12
        v = np.array(v, dtype=complex, ndmin=1)
        g = np.broadcast_to(np.asarray(g, dtype=complex), v.shape)
        ok = np.isfinite(g) & (np.abs(v) > 1e-8 * self.ed.omega2)
        for _ in range(min(NEWTON_MAXIT, 4)):
            if not ok.any():
                break
            vv = v[ok]
            dp = p12.dp(vv)
            step = (p12.p(vv) - g[ok]) / dp
            good = np.isfinite(step) & (np.abs(step) < 1e-3 * self.ed.omega2)
            vv = np.where(good, vv - step, vv)
            v[ok] = vv
        return v

    def _reduce(self, v):
        P = self.ed.omega2
        re = v.real - P * np.round(v.real / P)
        im = v.imag
        if not self.zero_drift:
            Q = abs(self.ed.omega1.imag)
            im = im - Q * np.round(im / Q)
        v = re + 1j * im
        return np.where(v.real < 0, -v, v)

    def omega(self, t):
        """omega(t) with Re omega in [omega2/2, omega2]."""
        return _sc(self._v(t) + 0.5 * self.ed.omega2)

    def u(self, t):
        """omega(t) - (omega1 + omega2)/2: the argument of p_13 in w."""
        if self.zero_drift:
            raise WrongRegime("w degenerates for zero-drift walks; use w_hat")
        return _sc(self._v(t) - self._half1)

    # --- the gluing function
    def w(self, t):
        """w(t) on C \\ [x3, x4] (use :meth:`w_on_cut` on the cut)."""
        if self.zero_drift:
            raise WrongRegime("w degenerates for zero-drift walks; use w_hat")
        return _sc(self.ed.p13.p(self._v(t) - self._half1))

    def w_hat(self, t):
        """p_13(omega(t) - omega2/2): a Mobius transform of w (also a gluing
        function of M), which stays finite in the zero-drift limit."""
        return _sc(self.ed.p13.p(self._v(t)))

    def w_prime(self, t):
        """w'(t) = p_13'(u) omega'(t), with omega'(t) = f'(t) / p_12'(omega)."""
        v = self._v(t)
        ed = self.ed
        dom = ed.f.deriv(np.asarray(t, dtype=complex)) / ed.p12.dp(v + 0.5 * ed.omega2)
        return _sc(ed.p13.dp(v - self._half1) * dom)

    def w_on_cut(self, t, side: int):
        """One-sided value of w on [x3, x4]: side=+1 from above, -1 from below."""
        t = np.asarray(t, dtype=float)
        v = self._v(t + 0j)
        ref = self._v(t + 1j * side * 1e-6 * (1 + np.abs(t)))
        # on the cut Re v = omega2/2 and the two sides are v and conj(v)
        v = np.where(np.abs(v - ref) <= np.abs(np.conj(v) - ref), v, np.conj(v))
        return _sc(self.ed.p13.p(v - self._half1))

    # --- singular data
    def _res_x2(self):
        e1, e2, e3 = self.e
        return float((e2 - e1) * (e2 - e3) / self.ed.f.deriv(self.curve.bx.x2))

    def _at_x3(self):
        e1, e2, e3 = self.e
        x3 = self.curve.bx.x3
        if self.zero_drift:
            return BranchAtX3("degenerate")
        fp = float(self.ed.f.deriv(x3))
        if self.regime == "Even2N":
            return BranchAtX3("pole", residue=float((e1 - e3) * (e2 - e3) / fp))
        if self.regime == "Odd2N1":
            return BranchAtX3("holomorphic")
        om2 = self.ed.omega2
        w1 = float(np.real(self.ed.p13.p(0.5 * om2)))
        w2 = -sqrt(-fp / ((e1 - e3) * (e2 - e3))) * float(np.real(self.ed.p13.dp(0.5 * om2)))
        return BranchAtX3("algebraic", w1=w1, w2=w2)

    @property
    def res_x3(self):
        return self.at_x3.residue

    def double_poles(self):
        """Points of ]x2, x3[ where omega(t) - (omega1+omega2)/2 = k omega3.

        Each is a double pole of w.  For omega2/omega3 even the last lattice
        point k omega3 = omega2/2 sits at x3 itself (the simple pole there)
        and is not returned.
        """
        ed = self.ed
        om2, om3 = ed.omega2, ed.omega3
        out = []
        k = 1
        while k * om3 < 0.5 * om2 * (1 - 1e-12):
            z = ed.p12.p(k * om3 + 0.5 * (om2 + ed.omega1))
            out.append(float(np.real(ed.f.inv(z))))
            k += 1
        return out

    def expected_double_poles(self):
        r = self.ed.omega2 / (2 * self.ed.omega3)
        n = floor(r + 1e-9)
        return n - 1 if self.regime == "Even2N" else n

    # --- the curve M
    def curve_M(self, n: int = 512):
        """n points of M: X0 on the upper edge of [y1, y2] then back on the lower."""
        return sample_M(self.curve, n)

    def slit_image(self):
        """The endpoints w(X(y1)), w(X(y2)) of the slit U (not ordered)."""
        by = self.curve.by
        pts = [self.curve.X_at_branch(by.x1), self.curve.X_at_branch(by.x2)]
        return tuple(complex(self.w(p)) for p in pts)

    def gluing_defect(self, n: int = 360):
        """max |w(t) - w(conj t)| over n points of M (relative to max |w|)."""
        t = sample_M(self.curve, n)
        W = self.w_hat if self.zero_drift else self.w
        a, b = W(t), W(np.conj(t))
        return float(np.max(np.abs(a - b)) / max(1.0, float(np.max(np.abs(a)))))

    def check_regime(self):
        """Numerical alarm: the local behaviour at x3 must match the regime."""
        if self.zero_drift:
            return
        x3 = self.curve.bx.x3
        h = 1e-4 * x3
        vals = [abs(self.w(x3 - h)), abs(self.w(x3 - h / 10))]
        growing = vals[1] > 5 * vals[0]
        if (self.at_x3.kind == "pole") != growing:
            raise RegimeMismatch(f"|w| near x3 {vals} does not match regime {self.regime}")

    def as_dict(self):
        a = self.at_x3
        return {"regime": self.regime, "res_x2": self.res_x2, "x3_kind": a.kind,
                "res_x3": a.residue, "w1_x3": a.w1, "w2_x3": a.w2,
                "double_poles": self.double_poles()}


def build_cgf(ed: EllipticData) -> Gluing:
    g = Gluing(ed)
    return g


def sample_M(curve: Curve, n: int = 512):
    """n points of M = X0(slit [y1, y2] traversed along both edges)."""
    by = curve.by
    m = n // 2
    theta = (np.arange(m) + 0.5) / m * pi
    y = 0.5 * (by.x1 + by.x2) - 0.5 * (by.x2 - by.x1) * np.cos(theta)
    up = curve.X_on_cut(y, +1)[0]
    lo = curve.X_on_cut(y[::-1], -1)[0]
    return np.concatenate([up, lo])


# --- involution sigma ----------------------------------------------------

def sigma_map(gd: Gluing, t):
    """The Mobius involution exchanging x2 and x3 with w(sigma(t)) = w(t).

    It is u -> omega2/2 - u read through the uniformization; it exists as a
    symmetry of w only when omega2/omega3 is even.
    """
    if gd.regime != "Even2N":
        raise WrongRegime(f"sigma needs omega2/omega3 even (regime {gd.regime})")
    e1, e2, e3 = gd.e
    f = gd.ed.f
    z = f(np.asarray(t, dtype=complex))
    # p12(u) from f(t), reflect u -> omega2/2 - u, and map back
    g = e2 + (e2 - e1) * (e2 - e3) / (z - e2)
    g2 = e1 + (e1 - e2) * (e1 - e3) / (g - e1)
    z2 = e2 + (e2 - e1) * (e2 - e3) / (g2 - e2)
    return _sc(f.inv(z2))


def sigma_delta_zero(cp_or_curve, *, check: bool = True):
    """(gamma, rho, sigma) for Delta = 0: sigma(t) = gamma + rho^2 / (t - gamma)
    where l1 < 0 < l2 are the roots of b a' - b' a."""
    curve = cp_or_curve
    if check and abs(delta_det(curve.walk)) > DELTA_ZERO_TOL:
        raise NotDeltaZero(f"Delta = {delta_det(curve.walk):.3g}")
    l1, l2 = np.sort(np.real(curve.cp.r1.roots()))
    gamma, rho = 0.5 * (l1 + l2), 0.5 * (l2 - l1)
    return gamma, rho, (lambda t: gamma + rho * rho / (np.asarray(t) - gamma))


# --- Delta = 0 structure: the three quadratics of M ------------------------

def _cofactor_column(m, col):
    """Coefficients (of 1, -2u, u^2+v^2) of the determinant of the 3x3 matrix
    m whose column ``col`` is replaced by (1, -2u, u^2+v^2)."""
    out = []
    for row in range(3):
        minor = np.delete(np.delete(m, row, axis=0), col, axis=1)
        out.append((-1) ** (row + col) * np.linalg.det(minor))
    # q = out0*1 + out1*(-2u) + out2*(u^2+v^2): store as (const, u, s)
    return np.array([out[0], -2 * out[1], out[2]])


def m_quadratics(w: WalkParams):
    """Coefficient vectors (const, u, u^2+v^2) of q, q1, q2 such that
    M = {q^2 - q1 q2 = 0}."""
    p = w.__getitem__
    mq = np.array([[p((1, 1)), 0.0, p((1, -1))],
                   [p((0, 1)), 0.0, p((0, -1))],
                   [p((-1, 1)), 0.0, p((-1, -1))]])
    mq1 = np.array([[0.0, p((1, 0)), p((1, -1))],
                    [0.0, -1.0, p((0, -1))],
                    [0.0, p((-1, 0)), p((-1, -1))]])
    mq2 = np.array([[p((1, 1)), p((1, 0)), 0.0],
                    [p((0, 1)), -1.0, 0.0],
                    [p((-1, 1)), p((-1, 0)), 0.0]])
    return _cofactor_column(mq, 1), _cofactor_column(mq1, 0), _cofactor_column(mq2, 2)


@dataclass(frozen=True)
class DeltaZeroStructure:
    alpha: float
    beta: float
    resid_alpha: float
    resid_beta: float
    l1: float
    l2: float
    center: float
    radius: float


def delta_zero_structure(w: WalkParams, tol: float = DELTA_ZERO_TOL) -> DeltaZeroStructure:
    """q = alpha q1, q2 = beta q1 and the circle M = C(gamma, rho) when Delta = 0."""
    dlt = delta_det(w)
    if abs(dlt) > tol:
        raise NotDeltaZero(f"Delta = {dlt:.3g}")
    q, q1, q2 = m_quadratics(w)
    n1 = float(q1 @ q1)
    alpha = float(q @ q1) / n1
    beta = float(q2 @ q1) / n1
    # q1(x, 0) = c0 + c1 x + c2 x^2
    l1, l2 = np.sort(np.real(np.roots([q1[2], q1[1], q1[0]])))
    return DeltaZeroStructure(alpha, beta, float(np.linalg.norm(q - alpha * q1)),
                              float(np.linalg.norm(q2 - beta * q1)), float(l1), float(l2),
                              0.5 * float(l1 + l2), 0.5 * float(l2 - l1))


def _sc(v):
    return v[()] if np.ndim(v) == 0 else v
