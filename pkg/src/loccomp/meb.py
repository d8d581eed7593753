"""Minimum enclosing ball of a finite point set (Welzl's algorithm).

Works in any dimension; the boundary set never exceeds dim+1 points.  Radii are
handled squared throughout so feasibility checks elsewhere can compare against
epsilon^2 without square-root rounding.
"""

from __future__ import annotations

import numpy as np

_REL = 1e-12
_SHUFFLE_SEED = 0x5EB1  # fixed: ties between optimal centers must be reproducible


def _circumball(boundary: list[np.ndarray]) -> tuple[np.ndarray, float]:
    """Smallest ball with every point of `boundary` on its surface."""
    if not boundary:
        return np.zeros(0), -1.0
    c0 = boundary[0]
    if len(boundary) == 1:
        return c0.copy(), 0.0
    rest = np.vstack(boundary[1:]) - c0
    # center - c0 solves 2*rest @ y = |rest|^2 (equidistance from c0 and each point)
    A = 2.0 * rest
    b = (rest**2).sum(axis=1)
    y, *_ = np.linalg.lstsq(A, b, rcond=None)
    center = c0 + y
    r2 = max(((np.vstack(boundary) - center) ** 2).sum(axis=1).max(), 0.0)
    return center, float(r2)


def _inside(center: np.ndarray, r2: float, p: np.ndarray) -> bool:
    return float(((p - center) ** 2).sum()) <= r2 * (1.0 + _REL) + 1e-24


def _welzl(pts: np.ndarray, idx: list[int], boundary: list[np.ndarray],
           dim: int) -> tuple[np.ndarray, float]:
    if not idx or len(boundary) == dim + 1:
        return _circumball(boundary)
    p = pts[idx[0]]
    center, r2 = _welzl(pts, idx[1:], boundary, dim)
    if center.size and _inside(center, r2, p):
        return center, r2
    return _welzl(pts, idx[1:], boundary + [p], dim)


def min_enclosing_ball(points) -> tuple[np.ndarray, float]:
    """Return (center, squared_radius) of the smallest ball containing `points`.

    Input is an (n, dim) array-like with n >= 1.  Deterministic: the internal
    shuffle uses a fixed seed, so degenerate inputs always yield the same center.
    """
    pts = np.unique(np.atleast_2d(np.asarray(points, dtype=float)), axis=0)
    n, dim = pts.shape
    if n == 0:
        raise ValueError("need at least one point")
    if n == 1:
        return pts[0].copy(), 0.0
    order = list(range(n))
    rng = np.random.default_rng(_SHUFFLE_SEED)
    rng.shuffle(order)
    center, r2 = _welzl(pts, order, [], dim)
    # guard against recursion-tolerance drift: enforce actual containment
    worst = float(((pts - center) ** 2).sum(axis=1).max())
    return center, max(r2, worst)
