"""Walk parameters: validation, the kernel polynomial, JSON round-trip.

A walk is given by the nine jump probabilities ``p[(i, j)]`` with
``(i, j)`` in ``{-1, 0, 1}^2`` minus the origin, and a starting point
``(n0, m0)`` strictly inside the quarter plane.  The walk is absorbed the
first time it touches one of the axes.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from decimal import Decimal
from types import MappingProxyType
from typing import Mapping

import numpy as np

from .constants import DIAGONAL_TOL, SUM_TOL
from .errors import BadStart, DegenerateWalk, NonPositiveDrift, NotAProbability

JUMPS = ((1, 1), (1, 0), (1, -1), (0, -1), (-1, -1), (-1, 0), (-1, 1), (0, 1))
"""Jumps in the cyclic (clockwise from north-east) order used by the no-three-consecutive-zeros condition."""


@dataclass(frozen=True)
class WalkParams:
    p: Mapping[tuple[int, int], float]
    n0: int = 1
    m0: int = 1
    drift: tuple[float, float] = field(default=(0.0, 0.0))
    is_diagonal: bool = False

    def __getitem__(self, key):
        return self.p.get(key, 0.0)

    def __eq__(self, other):
        if not isinstance(other, WalkParams):
            return NotImplemented
        return (all(self[k] == other[k] for k in JUMPS)
                and (self.n0, self.m0) == (other.n0, other.m0))

    def __hash__(self):
        return hash((tuple(self[k] for k in JUMPS), self.n0, self.m0))

    def __repr__(self):
        nz = ", ".join(f"p{i}{j}={self[(i, j)]:.6g}" for (i, j) in JUMPS if self[(i, j)])
        return f"WalkParams({nz}; start=({self.n0},{self.m0}))"

    def with_start(self, n0: int, m0: int) -> "WalkParams":
        if n0 < 1 or m0 < 1:
            raise BadStart(f"start ({n0}, {m0}) is not in the open quarter plane")
        return WalkParams(self.p, int(n0), int(m0), self.drift, self.is_diagonal)

    def transposed(self) -> "WalkParams":
        """The mirrored walk p_ij -> p_ji started at (m0, n0)."""
        q = {(j, i): v for (i, j), v in self.p.items()}
        return WalkParams(MappingProxyType(q), self.m0, self.n0,
                          (self.drift[1], self.drift[0]), self.is_diagonal)

    def as_array(self) -> np.ndarray:
        """3x3 array indexed ``[i+1, j+1]``."""
        out = np.zeros((3, 3))
        for (i, j), v in self.p.items():
            out[i + 1, j + 1] = v
        return out


def _h4_ok(p) -> bool:
    z = [p.get(k, 0.0) == 0.0 for k in JUMPS]
    n = len(z)
    return not any(z[i] and z[(i + 1) % n] and z[(i + 2) % n] for i in range(n))


def validate(raw, start=(1, 1), *, skip_drift_check: bool = False) -> WalkParams:
    """Validate a probability table and return an immutable :class:`WalkParams`.

    Parameters
    ----------
    raw : mapping or 3x3 nested list
        Either ``{(i, j): p_ij}`` (missing keys are zero) or the JSON layout
        (rows j = +1, 0, -1; columns i = -1, 0, +1).
    start : pair of int
        Starting point ``(n0, m0)``, both >= 1.
    skip_drift_check : bool
        Admit walks violating the positive-drift hypothesis.  Only meant for
        tests pinning group orders on the classical zero-drift examples.

    Raises
    ------
    NotAProbability, DegenerateWalk, NonPositiveDrift, BadStart
    """
    p = _coerce_table(raw)
    for k, v in p.items():
        if not np.isfinite(v) or v < 0 or v > 1:
            raise NotAProbability(f"p{k} = {v!r} is not a probability")
    s = sum(p.values())
    if abs(s - 1.0) > SUM_TOL:
        raise NotAProbability(f"probabilities sum to {s!r}, not 1")
    if not _h4_ok(p):
        raise DegenerateWalk("three consecutive zero jumps in the cyclic list")
    n0, m0 = (int(start[0]), int(start[1]))
    if n0 < 1 or m0 < 1 or n0 != start[0] or m0 != start[1]:
        raise BadStart(f"start {tuple(start)} is not in the open quarter plane")
    mx = sum(i * v for (i, j), v in p.items())
    my = sum(j * v for (i, j), v in p.items())
    if not skip_drift_check and not (mx > 0 and my > 0):
        raise NonPositiveDrift(f"drift ({mx:.6g}, {my:.6g}) is not in the open first quadrant")
    diag = abs(sum(p.get(k, 0.0) for k in ((1, 1), (-1, -1), (1, -1), (-1, 1))) - 1) < DIAGONAL_TOL
    return WalkParams(MappingProxyType(dict(p)), n0, m0, (mx, my), diag)


def _coerce_table(raw) -> dict:
    if isinstance(raw, WalkParams):
        return {k: raw[k] for k in JUMPS}
    if isinstance(raw, Mapping):
        p = {}
        for k, v in raw.items():
            key = tuple(int(u) for u in k)
            if key not in JUMPS:
                raise NotAProbability(f"jump {key} is not a nearest-neighbour step")
            p[key] = float(v)
        return {k: p.get(k, 0.0) for k in JUMPS}
    arr = np.asarray(raw, dtype=float)
    if arr.shape != (3, 3):
        raise NotAProbability("probability table must be 3x3")
    if arr[1, 1] != 0:
        raise NotAProbability("the centre entry (no move) must be 0")
    return {(i, j): float(arr[1 - j, i + 1]) for (i, j) in JUMPS}


def kernel_Q(w: WalkParams, x, y):
    """Kernel xy(sum p_ij x^i y^j - 1), written without negative powers."""
    x = np.asarray(x, dtype=complex) if np.iscomplexobj(x) else np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=complex) if np.iscomplexobj(y) else np.asarray(y, dtype=float)
    out = -x * y
    for (i, j) in JUMPS:
        v = w[(i, j)]
        if v:
            out = out + v * x ** (i + 1) * y ** (j + 1)
    return out[()] if np.ndim(out) == 0 else out


# --- JSON ---------------------------------------------------------------

def _table_rows(w: WalkParams):
    return [[w[(i, j)] for i in (-1, 0, 1)] for j in (1, 0, -1)]


def to_json_dict(w: WalkParams) -> dict:
    rows = _table_rows(w)
    return {"p": rows, "start": [w.n0, w.m0],
            "p_exact": [[repr(v) for v in r] for r in rows]}


def from_json_dict(d: dict, *, skip_drift_check: bool = False) -> WalkParams:
    if "p_exact" in d:
        table = [[float(Decimal(s)) for s in r] for r in d["p_exact"]]
    else:
        table = d["p"]
    start = d.get("start", [1, 1])
    return validate(table, tuple(start), skip_drift_check=skip_drift_check)


def load_walk(path, *, skip_drift_check: bool = False) -> WalkParams:
    with open(path) as fh:
        return from_json_dict(json.load(fh), skip_drift_check=skip_drift_check)


def dump_walk(w: WalkParams, path) -> None:
    with open(path, "w") as fh:
        json.dump(to_json_dict(w), fh, indent=1)
