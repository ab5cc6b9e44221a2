"""Weierstrass elliptic function for rectangular lattices.

The lattice is generated by a real period ``P`` and an imaginary period
``iQ`` (``Q`` may be ``inf``: the trigonometric limit).  Evaluation uses the
Fourier (q-)series

    p(z) = (pi/P)^2 [ csc^2 v - 1/3 + 8 sum_n n q^2n/(1-q^2n) (1 - cos 2nv) ],

v = pi z / P, q = exp(-pi Q/P), after reducing z to the central cell.  When
Q < P the lattice is rotated by -i first (p(z; L) = -p(-iz; -iL)) so that
always q <= exp(-pi) and ~12 terms reach machine precision.
"""
from __future__ import annotations

from math import exp, inf, isinf, pi

import numpy as np

from .constants import POLE_TOL
from .errors import AtPole


class Weierstrass:
    """p, p' and invariants of the lattice P Z + i Q Z (full periods)."""

    def __init__(self, P: float, Q: float):
        if not (P > 0 and Q > 0):
            raise ValueError("periods must be positive")
        self.P, self.Q = float(P), float(Q)
        self.rotated = (not isinf(Q)) and Q < P
        P0, Q0 = (self.Q, self.P) if self.rotated else (self.P, self.Q)
        self._P0, self._Q0 = P0, Q0
        q = 0.0 if isinf(Q0) else exp(-pi * Q0 / P0)
        n = np.arange(1, 80)
        q2n = q ** (2 * n)
        # on the reduced cell |cos 2nv| <= q^-n, so the terms decay like q^n
        keep = q ** n > 1e-18
        n, q2n = n[keep], q2n[keep]
        self._n = n
        self._lam = q2n / (1 - q2n)  # q^2n / (1 - q^2n)
        k = (pi / P0) ** 2
        self._k = k
        E4 = 1 + 240 * np.sum(n ** 3 * self._lam)
        E6 = 1 - 504 * np.sum(n ** 5 * self._lam)
        g2 = 4.0 / 3.0 * k ** 2 * E4
        g3 = 8.0 / 27.0 * k ** 3 * E6
        self.g2 = g2
        self.g3 = -g3 if self.rotated else g3
        half = [self.P / 2, (self.P + 1j * self.Q) / 2 if not isinf(self.Q) else None,
                1j * self.Q / 2 if not isinf(self.Q) else None]
        e1 = float(np.real(self.p(half[0])))
        if isinf(self.Q):
            e2 = e3 = -e1 / 2
        else:
            e2 = float(np.real(self.p(half[1])))
            e3 = float(np.real(self.p(half[2])))
        self.e = (e1, e2, e3)

    # -- reduction to the central cell of the unrotated lattice
    def _reduce(self, z):
        P0, Q0 = self._P0, self._Q0
        re = z.real - P0 * np.round(z.real / P0)
        im = z.imag if isinf(Q0) else z.imag - Q0 * np.round(z.imag / Q0)
        return re + 1j * im

    def _p0(self, z):
        z = self._reduce(z)
        if np.any(np.abs(z) < POLE_TOL * self._P0):
            raise AtPole("argument on the period lattice")
        v = pi * z / self._P0
        s = np.sin(v)
        series = 8 * np.sum((self._n * self._lam)[:, None]
                            * (1 - np.cos(2 * self._n[:, None] * v.ravel())), axis=0)
        return self._k * (1 / s ** 2 - 1 / 3 + series.reshape(v.shape))

    def _dp0(self, z):
        z = self._reduce(z)
        if np.any(np.abs(z) < POLE_TOL * self._P0):
            raise AtPole("argument on the period lattice")
        v = pi * z / self._P0
        s, c = np.sin(v), np.cos(v)
        series = 16 * np.sum((self._n ** 2 * self._lam)[:, None]
                             * np.sin(2 * self._n[:, None] * v.ravel()), axis=0)
        return self._k ** 1.5 * (-2 * c / s ** 3 + series.reshape(v.shape))

    def p(self, z):
        z = np.asarray(z, dtype=complex)
        out = -self._p0(-1j * z) if self.rotated else self._p0(z)
        return out[()] if out.ndim == 0 else out

    def dp(self, z):
        z = np.asarray(z, dtype=complex)
        out = 1j * self._dp0(-1j * z) if self.rotated else self._dp0(z)
        return out[()] if out.ndim == 0 else out

    def ddp(self, z):
        return 6 * self.p(z) ** 2 - self.g2 / 2

    def ode_residual(self, z):
        """Relative residual of p'^2 = 4p^3 - g2 p - g3."""
        P, dP = self.p(z), self.dp(z)
        lhs = dP ** 2
        rhs = 4 * P ** 3 - self.g2 * P - self.g3
        return np.abs(lhs - rhs) / (np.abs(lhs) + np.abs(rhs) + abs(self.g2 * P) + abs(self.g3))

    def __repr__(self):
        return f"Weierstrass(P={self.P:.12g}, Q={self.Q:.12g})"


def weierstrass_p(periods, z):
    """Value of p at z for the lattice with periods (omega_real, omega_imag)."""
    w, wp = periods
    Q = abs(wp) if not isinf(abs(wp)) else inf
    return Weierstrass(float(w), Q).p(z)
