"""Independent numerical oracles: truncated linear solves and Monte Carlo.

These do not use the analytic machinery at all; they exist to cross-check it.

* ``dp_absorption`` solves the absorption equations on the box [1, N]^2 with
  zero boundary data beyond the box (paths leaving the box are lost), which
  converges from below as N grows.
* ``dp_green`` solves (I - P) G = 1_start on the same box.
* ``mc_absorption`` simulates the walk with a seeded, chunked generator.  A
  path is retired as escaped once the one-dimensional ruin bound
  (down/up)^y + (left/right)^x on its chance of ever being absorbed drops
  below ``escape_tol``; only paths neither absorbed nor certified by
  ``max_steps`` are censored.
"""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .errors import ExcessCensoring, NotConverged
from .walk_model import JUMPS, WalkParams


SOLVE_TOL = 1e-12
MIN_N = 50


def _interior_matrix(w: WalkParams, N: int):
    """Sparse I - P restricted to the box [1, N]^2 (index (i-1) * N + (j-1))."""
    n = N * N
    idx = np.arange(n)
    I, J = np.divmod(idx, N)
    I, J = I + 1, J + 1
    rows, cols, vals = [idx], [idx], [np.ones(n)]
    for (di, dj) in JUMPS:
        p = w[(di, dj)]
        if p == 0:
            continue
        ii, jj = I + di, J + dj
        ok = (ii >= 1) & (ii <= N) & (jj >= 1) & (jj <= N)
        rows.append(idx[ok])
        cols.append((ii[ok] - 1) * N + (jj[ok] - 1))
        vals.append(np.full(ok.sum(), -p))
    return sp.csc_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                         shape=(n, n))


class _BoxSolver:
    """LU factors of (I - P)^T on the box [1, N]^2, reusable across starts."""

    def __init__(self, w: WalkParams, N: int):
        self.N = N
        self.At = _interior_matrix(w, N).T.tocsc()
        self.lu = splu(self.At, permc_spec="MMD_AT_PLUS_A")

    def green_from(self, start):
        """g(x) = expected visits to x from ``start`` before leaving the box."""
        N = self.N
        e = np.zeros(N * N)
        i0, j0 = start
        if not (1 <= i0 <= N and 1 <= j0 <= N):
            raise ValueError("start outside the box")
        e[(i0 - 1) * N + (j0 - 1)] = 1.0
        # rows of G for a fixed start: solve the transposed system
        g = self.lu.solve(e)
        res = np.max(np.abs(self.At @ g - e))
        if not np.isfinite(res) or res > SOLVE_TOL * max(1.0, np.max(np.abs(g))):
            raise NotConverged(f"linear solve residual {res:.3g} on the box of size {N}")
        return g.reshape(N, N)   # g[i-1, j-1]


def _green_from(w: WalkParams, N: int, start):
    return _BoxSolver(w, N).green_from(start)


@dataclass
class DPAbsorption:
    """Absorption probabilities on the box [1, N]^2 (lower bounds, exact in the limit).

    ``err_h``/``err_ht``/``err_h00`` are |value(N) - value(N/2)| (entries
    beyond N/2 get the value itself as bound); ``escaped`` is the mass not
    absorbed inside the box.
    """
    N: int
    h: np.ndarray      # h[k-1] = P(absorbed at (k, 0)), k = 1..N
    ht: np.ndarray     # ht[k-1] = P(absorbed at (0, k))
    h00: float
    total: float
    err_h: np.ndarray | None = None
    err_ht: np.ndarray | None = None
    err_h00: float | None = None

    @property
    def escaped(self) -> float:
        return 1.0 - self.total

    @property
    def error_bound(self) -> float:
        """Largest N vs N/2 discrepancy over all reported entries."""
        if self.err_h is None:
            return float("nan")
        return float(max(np.max(self.err_h), np.max(self.err_ht), self.err_h00))

    def as_dict(self, kmax: int | None = None):
        k = len(self.h) if kmax is None else kmax
        out = {"N": self.N, "h": self.h[:k].tolist(), "htilde": self.ht[:k].tolist(),
               "h00": self.h00, "total": self.total, "escaped": self.escaped}
        if self.err_h is not None:
            out["error_bound"] = {"h": self.err_h[:k].tolist(), "htilde": self.err_ht[:k].tolist(),
                                  "h00": self.err_h00, "max": self.error_bound}
        return out


def _absorption_on_box(w: WalkParams, N: int, solver: _BoxSolver | None = None) -> DPAbsorption:
    solver = solver if solver is not None else _BoxSolver(w, N)
    g = solver.green_from((w.n0, w.m0))

    def G(i, j):
        out = np.zeros(len(i))
        ok = (i >= 1) & (i <= N) & (j >= 1) & (j <= N)
        out[ok] = g[i[ok] - 1, j[ok] - 1]
        return out
    k = np.arange(1, N + 1)
    one = np.ones(N, dtype=int)
    h = G(k, one) * w[(0, -1)] + G(k - 1, one) * w[(1, -1)] + G(k + 1, one) * w[(-1, -1)]
    ht = G(one, k) * w[(-1, 0)] + G(one, k - 1) * w[(-1, 1)] + G(one, k + 1) * w[(-1, -1)]
    h00 = g[0, 0] * w[(-1, -1)]
    return DPAbsorption(N, h, ht, float(h00), float(h00 + h.sum() + ht.sum()))


def dp_absorption(w: WalkParams, N: int = 400, error_bound: bool = True) -> DPAbsorption:
    """Absorption probabilities from the Green function of the box [1, N]^2.

    h_k = g(k, 1) p(0,-1) + g(k-1, 1) p(1,-1) + g(k+1, 1) p(-1,-1), with g
    the expected number of visits before absorption or leaving the box.

    Parameters
    ----------
    w : WalkParams
        Walk with its start point.
    N : int
        Box size (at least 50 and larger than the start coordinates).
    error_bound : bool
        Also solve on the box of size N/2 and report |value(N) - value(N/2)|.

    Returns
    -------
    DPAbsorption
    """
    return dp_absorption_starts(w, [(w.n0, w.m0)], N, error_bound)[0]


def dp_absorption_starts(w: WalkParams, starts, N: int = 400,
                         error_bound: bool = True) -> list[DPAbsorption]:
    """``dp_absorption`` for several starts of the same walk, sharing one factorization."""
    if N < MIN_N:
        raise ValueError(f"N = {N} is below the minimum {MIN_N}")
    full = _BoxSolver(w, N)
    half = _BoxSolver(w, N // 2) if error_bound else None
    outs = []
    for start in starts:
        ws = w.with_start(*start)
        out = _absorption_on_box(ws, N, full)
        if half is not None:
            coarse = _absorption_on_box(ws, N // 2, half)
            m = N // 2
            out.err_h = out.h.copy()
            out.err_ht = out.ht.copy()
            out.err_h[:m] = np.abs(out.h[:m] - coarse.h)
            out.err_ht[:m] = np.abs(out.ht[:m] - coarse.ht)
            out.err_h00 = abs(out.h00 - coarse.h00)
        outs.append(out)
    return outs


def dp_green(w: WalkParams, N: int = 400, start=None) -> np.ndarray:
    """Green function G(start, (i, j)) on the box; entry [i-1, j-1]."""
    start = (w.n0, w.m0) if start is None else start
    return _green_from(w, N, start)


# --- Monte Carlo ------------------------------------------------------------

def _binom(count: int, n: int):
    p = count / n
    return p, float(np.sqrt(p * (1 - p) / n))


@dataclass
class MCResult:
    """Counts from a Monte Carlo run; estimates are count / n_paths."""
    n_paths: int
    absorbed: int
    escaped: int
    censored: int
    h00: int
    h: dict
    ht: dict
    seed: int

    @property
    def total(self):
        return self.absorbed / self.n_paths

    @property
    def stderr(self):
        return _binom(self.absorbed, self.n_paths)[1]

    @property
    def censored_fraction(self):
        return self.censored / self.n_paths

    def estimate(self, which: str, k: int = 0):
        """(estimate, standard error) for ``"h"``/``"htilde"`` at k, their sums over k
        ``"h_sum"``/``"htilde_sum"`` (the marginals h(1), ht(1)), ``"h00"``, ``"total"``
        or ``"escaped"``."""
        if which == "h":
            return _binom(self.h.get(k, 0), self.n_paths)
        if which == "htilde":
            return _binom(self.ht.get(k, 0), self.n_paths)
        if which == "h_sum":
            return _binom(sum(self.h.values()), self.n_paths)
        if which == "htilde_sum":
            return _binom(sum(self.ht.values()), self.n_paths)
        if which == "h00":
            return _binom(self.h00, self.n_paths)
        if which == "total":
            return _binom(self.absorbed, self.n_paths)
        if which == "escaped":
            return _binom(self.escaped, self.n_paths)
        raise ValueError(which)

    def as_dict(self, kmax: int | None = None):
        km = kmax if kmax is not None else max([0, *self.h, *self.ht])
        row = lambda which: [list(self.estimate(which, k)) for k in range(1, km + 1)]
        return {"n_paths": self.n_paths, "seed": self.seed, "absorbed": self.absorbed,
                "escaped": self.escaped, "censored": self.censored,
                "censored_fraction": self.censored_fraction,
                "total": list(self.estimate("total")), "h00": list(self.estimate("h00")),
                "escaped_fraction": list(self.estimate("escaped")),
                "h": row("h"), "htilde": row("htilde")}


def _threads(threads):
    if threads is not None:
        return int(threads)
    return int(os.environ.get("QWALK_THREADS", "1"))


def _chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    """Independent stream for one chunk: Philox keyed by the pair (seed, chunk).

    Distinct keys give unrelated streams; distinct *counters* under one key
    would only shift a single stream by a block and correlate the chunks.
    """
    key = np.array([seed & 0xFFFF_FFFF_FFFF_FFFF, chunk], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def escape_bound_rates(w: WalkParams):
    """(down/up, left/right): P(ever absorbed from (x, y)) <= rv^y + rh^x.

    Each coordinate is a lazy nearest-neighbour walk, so gambler's ruin gives
    the probability of ever reaching 0 from height y as (down/up)^y.
    """
    up = sum(w[(i, 1)] for i in (-1, 0, 1))
    down = sum(w[(i, -1)] for i in (-1, 0, 1))
    right = sum(w[(1, j)] for j in (-1, 0, 1))
    left = sum(w[(-1, j)] for j in (-1, 0, 1))
    return down / up, left / right


def mc_absorption(w: WalkParams, n_paths: int = 100_000, seed: int = 0, max_steps: int = 20_000,
                  chunk: int = 50_000, max_censored_frac: float = 0.01, escape_tol: float | None = None,
                  threads: int | None = None) -> MCResult:
    """Simulate ``n_paths`` walks from the start of ``w``.

    Parameters
    ----------
    w : WalkParams
    n_paths : int
        Number of paths (at least 10^4 for meaningful standard errors).
    seed : int
        64-bit seed of the counter-based generator; chunk c draws from
        ``Philox`` keyed by (seed, c), so results do not depend on the order
        in which chunks are processed.
    max_steps : int
        Paths neither absorbed nor certified escaped by then are censored.
    max_censored_frac : float
        ``ExcessCensoring`` is raised above this censored fraction.
    escape_tol : float, optional
        Escape certificate threshold on the ruin bound; each retired path
        biases the absorbed estimates down by at most this much.  Defaults to
        1e-3 / sqrt(n_paths), a thousandth of the binomial resolution.

    Returns
    -------
    MCResult
    """
    _threads(threads)  # accepted for interface stability; chunks run serially
    steps = np.array(JUMPS)
    dx, dy = steps[:, 0].copy(), steps[:, 1].copy()
    probs = np.array([w[j] for j in JUMPS])
    cdf = np.cumsum(probs)
    cdf[-1] = 1.0
    rv, rh = escape_bound_rates(w)
    lrv = np.log(rv) if rv > 0 else -np.inf
    lrh = np.log(rh) if rh > 0 else -np.inf
    if escape_tol is None:
        escape_tol = 1e-3 / np.sqrt(n_paths)
    ltol = np.log(escape_tol / 2)
    tot = dict(absorbed=0, escaped=0, censored=0, h00=0)
    h, ht = {}, {}
    for c, start in enumerate(range(0, n_paths, chunk)):
        m = min(chunk, n_paths - start)
        rng = _chunk_rng(seed, c)
        # positions of the live paths, kept in path order so that the stream of
        # uniforms assigned to each path does not depend on the compaction
        x = np.full(m, w.n0, dtype=np.int64)
        y = np.full(m, w.m0, dtype=np.int64)
        for step in range(max_steps):
            if x.size == 0:
                break
            if step % 16 == 0:
                gone = (y * lrv < ltol) & (x * lrh < ltol)
                if gone.any():
                    tot["escaped"] += int(gone.sum())
                    keep = ~gone
                    x, y = x[keep], y[keep]
                    continue
            k = np.searchsorted(cdf, rng.random(x.size), side="right")
            np.minimum(k, 7, out=k)
            x += dx[k]
            y += dy[k]
            hit = (x <= 0) | (y <= 0)
            if hit.any():
                xs, ys = x[hit], y[hit]
                corner = (xs == 0) & (ys == 0)
                tot["h00"] += int(corner.sum())
                for v in xs[(ys == 0) & (xs > 0)]:
                    h[int(v)] = h.get(int(v), 0) + 1
                for v in ys[(xs == 0) & (ys > 0)]:
                    ht[int(v)] = ht.get(int(v), 0) + 1
                tot["absorbed"] += int(hit.sum())
                keep = ~hit
                x, y = x[keep], y[keep]
        tot["censored"] += int(x.size)
    if tot["censored"] > max_censored_frac * n_paths:
        raise ExcessCensoring(f"{tot['censored']} of {n_paths} paths still alive after "
                              f"{max_steps} steps")
    return MCResult(n_paths, tot["absorbed"], tot["escaped"], tot["censored"], tot["h00"],
                    h, ht, seed)
