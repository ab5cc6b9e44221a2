"""Generating functions of the absorption probabilities.

h(x) = sum_k h_k x^k collects the probabilities of first hitting the
horizontal axis at (k, 0); ht(y) the vertical axis; h00 the corner.  On the
kernel curve they satisfy

    h(x) + ht(y) + h00 = x^n0 y^m0.

Evaluation of h
---------------
* Inside the gluing curve M, the slit representation

      h(x) = x^n0 Y0(x)^m0 + F(w(x)) - F(w(0)),
      F(W) = (1/pi) int_{x1}^{x2} t^n0 mu(t) w'(t) sqrt(-d(t)) / (w(t) - W) dt

  is used.  In the uniformizing variable, M is the line Re(omega) =
  omega2/2 + omega3/2.
* Beyond M, h is continued by the shift omega -> omega - omega3: the two
  curve points sharing y = Y0(x) give h(x) = h(x') + (x^n0 - x'^n0) y^m0 with
  x' = ct(y) / (at(y) x).
* Taylor coefficients come from an FFT of these values on a circle of radius
  close to x3 (the radius of convergence); inside the disc the power series
  is summed directly, which also covers points on the slit [x1, x2].
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from math import comb, isinf, pi

import numpy as np
from scipy.integrate import quad

from .constants import H00_POINTS, H00_SPREAD_FAIL
from .curve import Curve
from .elliptic import EllipticData, roots_legendre
from .errors import (InconsistentH00, OnSlit, OrbitNotClosed, RadiusTooSmall,
                     WrongRegime)
from .gluing import Gluing, sigma_delta_zero
from .walk_model import WalkParams

SLIT_NODES = 256        # Gauss nodes in theta for the slit integral (checked against 2x)
SLIT_TOL = 1e-9         # N vs 2N disagreement that triggers the adaptive fallback
FFT_MIN = 1024          # samples on the coefficient circle
FFT_NOISE = 1e-15       # relative round-off of the sampled values
SERIES_FRACTION = 0.9   # sum the power series for |x| <= this * r
NEAR_ZERO = 0.05        # slit nodes with |t| below this fraction get w(t) - w(0) by quadrature
NEAR_ZERO_NODES = 20    # Gauss nodes for that quadrature


# --- mu --------------------------------------------------------------------

def mu(cp, t, m0: int):
    """(2a)^-m0 sum_k C(m0, 2k+1) d^k (-b)^(m0-2k-1).

    On the cut [x1, x2] it gives the jump of Y0^m0:
    Y0(t - i0)^m0 - Y0(t + i0)^m0 = -2i sqrt(-d(t)) mu(t).
    """
    t = np.asarray(t)
    a, b, d = cp.a(t), cp.b(t), cp.d(t)
    s = 0
    for k in range((m0 - 1) // 2 + 1):
        s = s + comb(m0, 2 * k + 1) * d ** k * (-b) ** (m0 - 2 * k - 1)
    return s / (2 * a) ** m0


# --- the slit integral ----------------------------------------------------

class _SlitRule:
    """Gauss nodes on [x1, x2] after t = mid + half sin(theta).

    Stores w(t_k) and B_k = A(t_k) / (w(t_k) - w(0)) times the weights, where
    A(t) = t^n0 mu(t) w'(t) sqrt(-d(t)) / pi, so that

        F(W) - F(w(0)) = sum_k B_k (W - w(0)) / (w(t_k) - W).

    The subtracted integrand vanishes at the pole x2 of w and stays finite
    at t = 0 when 0 lies on the slit.
    """

    def __init__(self, gl: Gluing, n0: int, m0: int, n: int, W0: complex):
        c = gl.curve
        x1, x2 = c.bx.x1, c.bx.x2
        th, wt = roots_legendre(n)
        th = th * pi / 2
        wt = wt * pi / 2
        mid, half = 0.5 * (x1 + x2), 0.5 * (x2 - x1)
        t = mid + half * np.sin(th)
        self.t = t
        self.W0 = W0
        self.W = np.real(gl.w(t + 0j))
        A = _density(gl, n0, m0, t) * wt * half * np.cos(th) / pi
        dW = self.W - W0.real
        # near t = 0 the difference w(t) - w(0) cancels; integrate w' instead
        near = np.abs(t) < NEAR_ZERO * (x2 - x1)
        if near.any():
            s, ws = roots_legendre(NEAR_ZERO_NODES)
            tn = t[near][:, None]
            vals = np.real(gl.w_prime((0.5 * tn * (s + 1)).ravel() + 0j)).reshape(tn.shape[0], -1)
            dW[near] = 0.5 * t[near] * (vals @ ws)
        self.B = A / dW

    def G(self, W):
        W = np.asarray(W, dtype=complex).reshape(-1, 1)
        with np.errstate(invalid="ignore"):
            terms = self.B[None, :] * (W - self.W0) / (self.W[None, :] - W)
        out = terms.sum(axis=1)
        inf = ~np.isfinite(W[:, 0])
        out[inf] = -self.B.sum()
        return out


def _density(gl: Gluing, n0, m0, t):
    cp = gl.curve.cp
    sq = np.sqrt(np.maximum(-cp.d(t), 0.0))
    return t ** n0 * mu(cp, t, m0) * np.real(gl.w_prime(t + 0j)) * sq


# --- the generating function ----------------------------------------------

class GenFun:
    """h for one walk and start; ``GenFun(curve.swapped(), ...)`` gives ht."""

    def __init__(self, curve: Curve, ed: EllipticData | None = None, gl: Gluing | None = None,
                 kmax: int = 256):
        self.curve = curve
        self.walk = curve.walk
        self.n0, self.m0 = curve.walk.n0, curve.walk.m0
        self.ed = ed if ed is not None else EllipticData(curve)
        if isinf(self.ed.omega1.imag):
            raise WrongRegime("zero-drift walks have no integral representation here")
        bp, cp = curve.bx, curve.cp
        if bp.x1 == 0.0 and cp.a(0.0) == 0.0 and cp.b(0.0) == 0.0 and 2 * self.n0 < self.m0:
            # Y0 ~ t^(-1/2) at the slit end t = 0, so the slit density behaves like
            # t^(n0 - m0/2) and the subtracted Cauchy integral at w(0) diverges.
            raise WrongRegime("Y0 has a branch pole at the slit end 0 and 2*n0 < m0: "
                              "the slit integral at w(0) diverges for this start")
        self.gl = gl if gl is not None else Gluing(self.ed)
        self.W0 = complex(self._W(np.array([0j]))[0])
        self.rule = _SlitRule(self.gl, self.n0, self.m0, SLIT_NODES, self.W0)
        self.rule2 = _SlitRule(self.gl, self.n0, self.m0, 2 * SLIT_NODES, self.W0)
        self.kmax_hint = kmax

    # -- pieces
    def _W(self, x):
        """w(x) with w = inf at the pole x2."""
        gl = self.gl
        u = gl._v(x) - gl._half1
        out = np.full(u.shape, np.inf + 0j)
        ok = np.abs(u) > 1e-9 * self.ed.omega3
        if ok.any():
            out[ok] = self.ed.p13.p(u[ok])
        return out

    def _G(self, W):
        """F(W) - F(w(0)) by the fixed rule, and a mask of unconverged points."""
        W = np.asarray(W, dtype=complex)
        a = self.rule.G(W)
        b = self.rule2.G(W)
        return b, np.abs(a - b) > SLIT_TOL * (1 + np.abs(b))

    def _G_adaptive(self, W, x):
        gl = self.gl
        bx = self.curve.bx
        mid, half = 0.5 * (bx.x1 + bx.x2), 0.5 * (bx.x2 - bx.x1)
        W0 = self.W0

        def g(th):
            t = mid + half * np.sin(np.atleast_1d(th))
            wt = np.real(gl.w(t + 0j))
            val = (_density(gl, self.n0, self.m0, t) * (W - W0) / ((wt - W) * (wt - W0))
                   * half * np.cos(th) / pi)
            return val[0]
        s = np.clip((np.real(x) - mid) / half, -1, 1)
        kw = dict(limit=400, epsabs=1e-15, epsrel=1e-13, points=[float(np.arcsin(s))])
        re = quad(lambda th: g(th).real, -pi / 2, pi / 2, **kw)[0]
        im = quad(lambda th: g(th).imag, -pi / 2, pi / 2, **kw)[0]
        return re + 1j * im

    # -- h by the integral formula and the shift continuation
    def h_direct(self, x, _depth: int = 0, strict: bool = False):
        """h(x) for x off [x1, x2] and [x3, x4], by the slit formula and shifts."""
        x = np.atleast_1d(np.asarray(x, dtype=complex))
        if np.any(self.curve.bx.on_cut(x)):
            raise OnSlit("h_direct needs x off the cuts; use h() for points of [x1, x2]")
        gl = self.gl
        v = gl._v(x)
        inside = v.real <= 0.5 * self.ed.omega3 * (1 + 1e-12)
        out = np.empty(x.shape, dtype=complex)
        cp = self.curve.cp
        n0, m0 = self.n0, self.m0
        if inside.any():
            xi = x[inside]
            y = self.curve.Y0(xi)
            G, bad = self._G(self._W(xi))
            val = xi ** n0 * y ** m0 + G
            if bad.any():
                val[bad] = np.nan if strict else self._near_slit(xi[bad])
            out[inside] = val
        if (~inside).any():
            if _depth > 64:
                raise RuntimeError("shift continuation did not terminate")
            xo = x[~inside]
            y = self.curve.Y0(xo)
            xp = cp.ct(y) / (cp.at(y) * xo)
            out[~inside] = (self.h_direct(xp, _depth + 1, strict)
                            + (xo ** n0 - xp ** n0) * y ** m0)
        return out

    def _near_slit(self, x):
        """h where the slit integral is nearly singular (x close to [x1, x2]):
        sum the power series inside its circle, else adaptive quadrature."""
        out = np.empty(x.shape, dtype=complex)
        for i, xx in enumerate(x):
            if abs(xx) < self.radius:
                out[i] = np.polynomial.polynomial.polyval(xx, self._taylor)
            else:
                G = self._G_adaptive(self._W(np.array([xx]))[0], xx)
                out[i] = xx ** self.n0 * complex(self.curve.Y0(xx)) ** self.m0 + G
        return out

    # -- Taylor coefficients
    @cached_property
    def _circle(self):
        """(r, h on the upper half of |x| = r) for the largest r <= 0.95 x3
        on which the fixed slit rule converges at every sample."""
        bx = self.curve.bx
        lo = max(abs(bx.x1), bx.x2)
        n = self._fft_size
        th = 2 * pi * np.arange(n // 2 + 1) / n
        r = 0.95 * bx.x3
        while r > lo + 0.05 * (bx.x3 - lo):
            vals = self.h_direct(r * np.exp(1j * th), strict=True)
            if np.all(np.isfinite(vals)):
                return r, vals
            r *= 0.97
        raise RadiusTooSmall("no circle between the slit and x3 avoids the near-singular set")

    @property
    def _fft_size(self):
        return max(FFT_MIN, 1 << int(np.ceil(np.log2(8 * self.kmax_hint))))

    @property
    def radius(self):
        return self._circle[0]

    @cached_property
    def _taylor(self):
        r, vals = self._circle
        n = self._fft_size
        full = np.concatenate([vals, np.conj(vals[1:n // 2][::-1])])
        c = np.real(np.fft.fft(full) / n)[: n // 2]
        # keep r^-k finite
        kmax = n // 2 if r == 1 else min(n // 2, int(600 / abs(np.log(r))))
        return c[:kmax] / r ** np.arange(kmax)

    @cached_property
    def achievable_kmax(self):
        """Largest k whose FFT noise floor stays below 1e-3 of |h_k|."""
        r, vals = self._circle
        c = self._taylor
        noise = FFT_NOISE * np.max(np.abs(vals)) * r ** -np.arange(len(c), dtype=float)
        mag = np.maximum(np.abs(c), np.abs(np.roll(c, -1)))
        ok = noise <= 1e-3 * mag
        bad = np.flatnonzero(~ok[1:])
        return int(bad[0]) if bad.size else len(c) - 2

    def coefficients(self, kmax: int):
        """h_1 .. h_kmax; raises RadiusTooSmall past ``achievable_kmax``."""
        if kmax > self.achievable_kmax:
            raise RadiusTooSmall(f"kmax={kmax} is beyond the FFT accuracy on radius "
                                 f"{self.radius:.6g}; achievable kmax is {self.achievable_kmax}")
        return self._taylor[1:kmax + 1].copy()

    @property
    def h0(self):
        """The constant term of the computed series (should vanish)."""
        return float(self._taylor[0])

    def h(self, x):
        """h on C \\ [x3, x4]: series inside the disc, integral formula outside."""
        x = np.asarray(x, dtype=complex)
        flat = x.ravel()
        out = np.empty(flat.shape, dtype=complex)
        small = np.abs(flat) <= SERIES_FRACTION * self.radius
        if small.any():
            out[small] = np.polynomial.polynomial.polyval(flat[small], self._taylor)
        if (~small).any():
            out[~small] = self.h_direct(flat[~small])
        out = out.reshape(x.shape)
        return out[()] if out.ndim == 0 else out

    def h_prime(self, x, rho: float | None = None, n: int = 32):
        """h'(x) by the Cauchy integral on a small circle around x."""
        x = complex(x)
        bx = self.curve.bx
        if rho is None:
            rho = 0.05 * min(abs(bx.x3 - x), abs(x - bx.x2) if abs(x - bx.x2) > 0 else 1.0)
        th = 2 * pi * (np.arange(n) + 0.5) / n
        z = x + rho * np.exp(1j * th)
        return complex(np.mean(self.h(z) * np.exp(-1j * th)) / rho)


# --- the pair (h, ht) and h00 ---------------------------------------------

@dataclass
class AbsorptionGF:
    """h, ht, h00 and derived totals for one walk and start."""
    walk: WalkParams
    curve: Curve
    ed: EllipticData
    gl: Gluing
    hx: GenFun
    hy: GenFun
    h00: float
    h00_spread: float

    def h(self, x):
        return self.hx.h(x)

    def htilde(self, y):
        return self.hy.h(y)

    @property
    def h1(self):
        return float(np.real(self.hx.h(1.0)))

    @property
    def ht1(self):
        return float(np.real(self.hy.h(1.0)))

    @property
    def total(self):
        return self.h00 + self.h1 + self.ht1

    def coefficients(self, kmax: int):
        return self.hx.coefficients(kmax), self.hy.coefficients(kmax)

    def functional_residual(self, x):
        """h(x) + ht(Y0(x)) + h00 - x^n0 Y0(x)^m0 for x off the cuts."""
        y = self.curve.Y0(np.asarray(x, dtype=complex))
        return (self.h(x) + self.htilde(y) + self.h00
                - np.asarray(x) ** self.walk.n0 * y ** self.walk.m0)


def _curve_point_y(curve: Curve, x):
    """Y0(x), taking the upper-edge value when x lies on [x1, x2]."""
    x = float(x)
    bx = curve.bx
    if bx.x1 <= x <= bx.x2:
        return complex(curve.Y_on_cut(x, +1)[0])
    return complex(curve.Y0(x + 0j))


def h00_constant(hx: GenFun, hy: GenFun, points=H00_POINTS):
    """h00 = x^n0 Y0(x)^m0 - h(x) - ht(Y0(x)) averaged over several x.

    Returns (h00, spread); raises InconsistentH00 when the values disagree.
    """
    curve = hx.curve
    n0, m0 = hx.n0, hx.m0
    vals = []
    for x in points:
        y = _curve_point_y(curve, x)
        vals.append(x ** n0 * y ** m0 - hx.h(x) - hy.h(y))
    vals = np.array(vals)
    spread = float(np.max(np.abs(vals - vals.mean())))
    if spread > H00_SPREAD_FAIL:
        raise InconsistentH00(f"h00 estimates {vals} spread by {spread:.3g}")
    return float(np.real(vals.mean())), spread


def absorption_gf(w: WalkParams, kmax: int = 256) -> AbsorptionGF:
    """Build h, ht and h00 for walk ``w`` (start taken from ``w``)."""
    curve = Curve(w)
    ed = EllipticData(curve)
    gl = Gluing(ed)
    hx = GenFun(curve, ed, gl, kmax=kmax)
    hy = GenFun(curve.swapped(), kmax=kmax)
    h00, spread = h00_constant(hx, hy)
    return AbsorptionGF(w, curve, ed, gl, hx, hy, h00, spread)


H00_CIRCLE_ANGLES = (0.3, 0.9, 1.7, 2.5)


def absorbed_total(w: WalkParams) -> float:
    """h00 + h(1) + ht(1) from the integral representation alone.

    Same quantity as ``absorption_gf(w).total`` without building the Taylor
    series (no FFT circle), for sweeps over many walks.
    """
    curve = Curve(w)
    ed = EllipticData(curve)
    gl = Gluing(ed)
    hx = GenFun(curve, ed, gl)
    hy = GenFun(curve.swapped())
    # the h00 gate on |x| = 1 (off every cut), where h_direct applies
    x = np.exp(1j * np.array(H00_CIRCLE_ANGLES))
    y = curve.Y0(x)
    vals = x ** w.n0 * y ** w.m0 - hx.h_direct(x) - hy.h_direct(y)
    spread = float(np.max(np.abs(vals - vals.mean())))
    if spread > H00_SPREAD_FAIL:
        raise InconsistentH00(f"h00 estimates {vals} spread by {spread:.3g}")
    h00 = float(np.real(vals.mean()))
    h1 = np.ravel(hx.h_direct(1.0))[0]
    ht1 = np.ravel(hy.h_direct(1.0))[0]
    return float(h00 + h1.real + ht1.real)


# --- Delta = 0 closed form -------------------------------------------------

def principal_part_at_infinity(curve: Curve, n0: int, m0: int, R: float | None = None,
                               n: int = 256):
    """Coefficients c_0..c_{n0-1} of the polynomial part at infinity of x^(n0-1) Y0(x)^m0."""
    bx = curve.bx
    if bx.x4_inf or bx.x4 < 0:
        raise WrongRegime("needs a finite positive x4")
    R = 2.0 * bx.x4 if R is None else R
    th = 2 * pi * np.arange(n) / n
    z = R * np.exp(1j * th)
    g = z ** (n0 - 1) * curve.Y0(z) ** m0
    c = np.fft.fft(g) / n  # c[k] ~ a_k R^k for k >= 0
    return np.real(c[:n0]) / R ** np.arange(n0)


class DeltaZeroH:
    """h for Delta = 0, x4 > 0 via the integral over [x3, x4] and sigma."""

    def __init__(self, curve: Curve):
        self.curve = curve
        w = curve.walk
        self.n0, self.m0 = w.n0, w.m0
        bx = curve.bx
        if bx.x4_inf or bx.x4 <= 0:
            raise WrongRegime("the Delta = 0 formula needs 0 < x4 < inf")
        self.gamma, self.rho, self.sigma = sigma_delta_zero(curve)
        self.P = principal_part_at_infinity(curve, self.n0, self.m0)

    def _nodes(self, n):
        bx = self.curve.bx
        cp = self.curve.cp
        th, wt = roots_legendre(n)
        th, wt = th * pi / 2, wt * pi / 2
        mid, half = 0.5 * (bx.x3 + bx.x4), 0.5 * (bx.x4 - bx.x3)
        t = mid + half * np.sin(th)
        dens = ((t ** self.n0 - self.sigma(t) ** self.n0) * mu(cp, t, self.m0)
                * np.sqrt(np.maximum(-cp.d(t), 0.0)) / t * wt * half * np.cos(th) / pi)
        return t, dens

    def h(self, x, n: int = 256):
        x = np.asarray(x, dtype=complex)
        t, dens = self._nodes(n)
        integ = x * (dens[None, :] / (t[None, :] - x.reshape(-1, 1))).sum(axis=1).reshape(x.shape)
        poly = x * np.polynomial.polynomial.polyval(x, self.P)
        out = integ + poly
        return out[()] if out.ndim == 0 else out

    def coefficients(self, kmax: int, n: int = 256):
        t, dens = self._nodes(n)
        k = np.arange(1, kmax + 1)
        out = (dens[None, :] * t[None, :] ** (-k[:, None] - 0.0)).sum(axis=1)
        for j, c in enumerate(self.P):
            if j + 1 <= kmax:
                out[j] += c
        return out


# --- finite groups ---------------------------------------------------------

def group_orbit(curve: Curve, point=(1.0, 1.0), order: int | None = None):
    """The orbit of ``point`` under the group generated by xi and eta, as a list
    of (word length, (x, y)).  Raises OrbitNotClosed when the two chains of
    alternating words do not meet after order/2 steps."""
    cp = curve.cp
    if order is None:
        raise ValueError("order required")
    n = order // 2

    def xi(p):
        x, y = p
        return x, cp.c(x) / (cp.a(x) * y)

    def eta(p):
        x, y = p
        return cp.ct(y) / (cp.at(y) * x), y

    out = [(0, tuple(point))]
    pa, pb = tuple(point), tuple(point)
    for k in range(1, n):
        pa = xi(pa) if k % 2 == 1 else eta(pa)
        pb = eta(pb) if k % 2 == 1 else xi(pb)
        out += [(k, pa), (k, pb)]
    last_a = xi(pa) if n % 2 == 1 else eta(pa)
    last_b = eta(pb) if n % 2 == 1 else xi(pb)
    if abs(last_a[0] - last_b[0]) + abs(last_a[1] - last_b[1]) > 1e-9 * (1 + abs(last_a[0]) + abs(last_a[1])):
        raise OrbitNotClosed(f"words of length {n} disagree: {last_a} vs {last_b}")
    out.append((n, last_a))
    return out


def finite_group_absorbed(w: WalkParams, ed: EllipticData) -> float:
    """1 - sum over the group orbit of (1, 1) of (-1)^length x^n0 y^m0.

    Valid when omega2/omega3 is an integer (the point over (1, 1) then lies in
    the domain where the functional equation holds for every group image).
    """
    g = ed.group
    if g.regime not in ("Even2N", "Odd2N1"):
        raise WrongRegime(f"omega2/omega3 = {g.omega23:.12g} is not an integer")
    orbit = group_orbit(ed.curve, (1.0, 1.0), g.order)
    s = sum((-1) ** k * x ** w.n0 * y ** w.m0 for k, (x, y) in orbit)
    return float(1.0 - s)


def absorbed_bounds(w: WalkParams, form: str = "orbit"):
    """(A/2, min(A, 1)) bracketing the total absorption probability.

    With (x, y) over (1, 1), A = x(xi)^n0 y(xi)^m0 + x(eta)^n0 y(eta)^m0
                              = (c(1)/a(1))^m0 + (ct(1)/at(1))^n0,
    i.e. the vertical down/up ratio carries the exponent m0 and the horizontal
    left/right ratio the exponent n0.  ``form="swapped"`` pairs them the other
    way round (identical when n0 = m0); it is kept for comparison only and is
    violated by many walks with n0 != m0.
    """
    p = w.__getitem__
    down = p((1, -1)) + p((0, -1)) + p((-1, -1))
    up = p((1, 1)) + p((0, 1)) + p((-1, 1))
    left = p((-1, -1)) + p((-1, 0)) + p((-1, 1))
    right = p((1, 1)) + p((1, 0)) + p((1, -1))
    if form == "orbit":
        A = (down / up) ** w.m0 + (left / right) ** w.n0
    elif form == "swapped":
        A = (down / up) ** w.n0 + (left / right) ** w.m0
    else:
        raise ValueError(f"unknown form {form!r}")
    return A / 2, min(A, 1.0)
