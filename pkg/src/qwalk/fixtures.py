"""Named walks used throughout the tests, demos and command line."""
from __future__ import annotations

import numpy as np

from .walk_model import JUMPS, WalkParams, validate


def W1(start=(1, 1)) -> WalkParams:
    """Axial walk, east/north 0.3, west/south 0.2: group of order 4."""
    return validate({(1, 0): 0.3, (0, 1): 0.3, (-1, 0): 0.2, (0, -1): 0.2}, start)


def W2(start=(1, 1)) -> WalkParams:
    """NW, E, S each 1/3 (zero drift): group of order 6."""
    t = 1 / 3
    return validate({(-1, 1): t, (1, 0): t, (0, -1): 1 - 2 * t}, start, skip_drift_check=True)


def W3(start=(1, 1)) -> WalkParams:
    """NE, E 0.3 and SW, W 0.2: group of order 8."""
    return validate({(1, 1): 0.3, (1, 0): 0.3, (-1, -1): 0.2, (-1, 0): 0.2}, start)


def W4(start=(1, 1)) -> WalkParams:
    """SW, E, N each 1/3 (zero drift): omega2/omega3 = 3/2."""
    t = 1 / 3
    return validate({(-1, -1): t, (1, 0): t, (0, 1): 1 - 2 * t}, start, skip_drift_check=True)


def W2_drift(start=(1, 1)) -> WalkParams:
    """Positive-drift member of the order-6 family p(-1,1) + p(1,0) + p(0,-1) = 1."""
    return validate({(-1, 1): 0.3, (1, 0): 0.5, (0, -1): 0.2}, start)


def diagonal_walk(start=(1, 1)) -> WalkParams:
    return validate({(1, 1): 0.4, (-1, -1): 0.2, (1, -1): 0.2, (-1, 1): 0.2}, start)


def x1_zero_walk(start=(1, 1)) -> WalkParams:
    """p(-1,0)^2 = 4 p(-1,1) p(-1,-1), so the smallest branch point is 0."""
    return validate({(-1, 1): 0.1, (-1, -1): 0.1, (-1, 0): 0.2, (1, 0): 0.6}, start,
                    skip_drift_check=True)


FIXTURES = {"W1": W1, "W2": W2, "W3": W3, "W4": W4, "W2_drift": W2_drift,
            "diagonal": diagonal_walk}


def random_walk(rng: np.random.Generator, start=(1, 1), min_drift: float = 0.05,
                max_tries: int = 10_000) -> WalkParams:
    """A walk with all eight jumps positive (flat Dirichlet), conditioned on both
    drift components exceeding ``min_drift``."""
    steps = np.array(JUMPS)
    for _ in range(max_tries):
        p = rng.dirichlet(np.ones(8))
        p = p / p.sum()
        p[-1] = 1.0 - p[:-1].sum()
        drift = p @ steps
        if np.all(drift > min_drift) and p[-1] > 0:
            return validate(dict(zip(JUMPS, p.tolist())), start)
    raise RuntimeError("could not draw a walk with the requested drift")


def random_walks(n: int, seed: int = 0, **kw) -> list[WalkParams]:
    rng = np.random.default_rng(seed)
    return [random_walk(rng, **kw) for _ in range(n)]
