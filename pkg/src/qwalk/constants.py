"""Numerical tolerances shared across the package.

Everything that decides "is this zero?" or "has this converged?" lives here so
that the whole pipeline can be tightened or loosened in one place.
"""

# probabilities must sum to one within this (no silent renormalisation)
SUM_TOL = 1e-12

# polynomial residuals: eps_res * (1 + |value|)
RES_TOL = 1e-11

# closeness to a cut / lattice point before we refuse to evaluate
CUT_TOL = 1e-12
POLE_TOL = 1e-12

# quadrature: relative change between successive node doublings
QUAD_TOL = 1e-11
QUAD_NODES = 128
QUAD_MAX_NODES = 1 << 14

# rational detection of omega3/omega2
RATIO_TOL = 1e-9
RATIO_MAX_DEN = 64

# diagonal classification
DIAGONAL_TOL = 1e-12

# Newton
NEWTON_TOL = 1e-13
NEWTON_MAXIT = 50

# h00 multi-point gate
H00_POINTS = (0.3, 0.5, 0.7, 1.0 - 1e-3)
H00_SPREAD_FAIL = 1e-6
