"""Minimum mutual information over support-constrained auxiliary channels.

Given a marginal p(x) and a cover collection, the achievable description rate
is min I(X;U) over conditionals p(u|x) that place mass only on groups
containing x.  The objective is jointly convex, and alternating minimization
converges to the global minimum:

    p(u|x)  <-  q(u) / sum_{u' contains x} q(u')      (restricted projection)
    q(u)    <-  sum_x p(x) p(u|x)                      (marginal update)

Rates are in bits (base-2 logs); 0 log 0 = 0.  The returned conditional is a
fixed-point certificate: each row is proportional to the output marginal over
its allowed groups, which is checkable without rerunning the optimizer.

`brute_force_min_mi` is an independent oracle: it evaluates I(X;U) on an
exhaustive grid over the product of row simplices.  It shares no code path with
the iteration and is only meant for small instances (<= 6 free parameters).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

Q_FLOOR = 1e-300
OUT_TRUNC = 1e-15
MAX_FREE_PARAMS = 6


@dataclass(frozen=True)
class RateResult:
    rate: float  # bits per symbol
    argmin: np.ndarray  # p(u|x), shape (n_symbols, n_groups)
    iterations: int
    gap: float  # fixed-point residual at exit
    converged: bool


def _as_groups(graph):
    if hasattr(graph, "groups"):
        return graph.groups
    return tuple(tuple(g) for g in graph)


def _allowed_mask(n: int, groups) -> np.ndarray:
    mask = np.zeros((n, len(groups)), dtype=bool)
    for gi, g in enumerate(groups):
        for i in g:
            mask[i, gi] = True
    return mask


def mutual_information_bits(px: np.ndarray, cond: np.ndarray) -> float:
    """I(X;U) for a marginal and a conditional, in bits."""
    px = np.asarray(px, dtype=float)
    cond = np.asarray(cond, dtype=float)
    q = px @ cond
    joint = px[:, None] * cond
    with np.errstate(divide="ignore", invalid="ignore"):
        logs = np.log2(cond) - np.log2(np.maximum(q, Q_FLOOR))[None, :]
        terms = np.where(joint > 0, joint * logs, 0.0)
    return float(terms.sum())


def min_mutual_information(px, graph, tol: float = 1e-9,
                           max_iter: int = 100_000) -> RateResult:
    """Minimize I(X;U) over conditionals supported on the cover's edges.

    `graph` may be a CharGraph or a plain sequence of index tuples.  Every
    positive-probability symbol must belong to at least one group.
    """
    px = np.asarray(px, dtype=float)
    groups = _as_groups(graph)
    n = px.shape[0]
    if not groups:
        raise ValueError("cover collection is empty")
    mask = _allowed_mask(n, groups)
    active = px > 0
    if not np.all(mask[active].any(axis=1)):
        raise ValueError("cover does not reach every positive-probability symbol")

    nu = len(groups)
    q = np.full(nu, 1.0 / nu)
    i_prev = np.inf
    i_val = np.inf
    cond = None
    iterations = 0
    converged = False
    for iterations in range(1, max_iter + 1):
        z = mask @ q
        cond = np.where(mask, q[None, :], 0.0) / np.maximum(z, Q_FLOOR)[:, None]
        q_next = px @ cond
        i_val = mutual_information_bits(px, cond)
        if abs(i_prev - i_val) < tol and np.max(np.abs(q_next - q)) < 1e-10:
            q = q_next
            converged = True
            break
        q = q_next
        i_prev = i_val

    # clean the certificate: truncate dust, renormalize active rows,
    # and give zero-probability symbols a uniform row over their groups
    cond = np.where(cond < OUT_TRUNC, 0.0, cond)
    row_sums = cond.sum(axis=1)
    for i in range(n):
        if not active[i]:
            allowed = mask[i]
            cond[i] = allowed / max(allowed.sum(), 1)
        elif row_sums[i] > 0:
            cond[i] /= row_sums[i]

    q_fin = px @ cond
    z_fin = mask @ q_fin
    proj = np.where(mask, q_fin[None, :], 0.0) / np.maximum(z_fin, Q_FLOOR)[:, None]
    gap = float(np.max(np.abs(cond[active] - proj[active]))) if active.any() else 0.0

    rate = min(max(mutual_information_bits(px, cond), 0.0), float(np.log2(max(n, 2))))
    return RateResult(rate=rate, argmin=cond, iterations=iterations, gap=gap,
                      converged=converged)


def _row_compositions(total: int, parts: int) -> np.ndarray:
    """All length-`parts` non-negative integer vectors summing to `total`."""
    if parts == 1:
        return np.array([[total]], dtype=np.int64)
    rows = []
    for first in range(total + 1):
        rest = _row_compositions(total - first, parts - 1)
        rows.append(np.column_stack([np.full(len(rest), first, dtype=np.int64), rest]))
    return np.vstack(rows)


def grid_size(groups, px, grid_steps: int) -> int:
    """Number of grid points brute_force_min_mi would evaluate."""
    px = np.asarray(px, dtype=float)
    mask = _allowed_mask(px.shape[0], _as_groups(groups))
    total = 1
    for i in np.nonzero(px > 0)[0]:
        k = int(mask[i].sum())
        total *= len(_row_compositions(grid_steps, k)) if k > 1 else 1
    return total


def brute_force_min_mi(px, graph, grid_steps: int) -> float:
    """Exhaustive grid search over the product of row simplices.

    Each positive-probability row ranges over compositions of `grid_steps`
    across its allowed groups.  Refuses instances with more than
    ``MAX_FREE_PARAMS`` free parameters.
    """
    px = np.asarray(px, dtype=float)
    groups = _as_groups(graph)
    n = px.shape[0]
    mask = _allowed_mask(n, groups)
    active_rows = [i for i in range(n) if px[i] > 0]
    if not all(mask[i].any() for i in active_rows):
        raise ValueError("cover does not reach every positive-probability symbol")

    free = sum(int(mask[i].sum()) - 1 for i in active_rows)
    if free > MAX_FREE_PARAMS:
        raise ValueError(f"{free} free parameters exceed the oracle limit "
                         f"({MAX_FREE_PARAMS})")

    row_allowed = [np.nonzero(mask[i])[0] for i in active_rows]
    row_comps = [_row_compositions(grid_steps, len(a)).astype(float) / grid_steps
                 for a in row_allowed]
    sizes = [len(c) for c in row_comps]
    total = int(np.prod(sizes))

    nu = len(groups)
    pxa = px[active_rows]
    best = np.inf
    chunk = 250_000
    for start in range(0, total, chunk):
        stop = min(start + chunk, total)
        flat = np.arange(start, stop)
        idx = np.array(np.unravel_index(flat, sizes)).T  # (C, n_active)
        C = stop - start
        p = np.zeros((C, len(active_rows), nu))
        for r, (allowed, comps) in enumerate(zip(row_allowed, row_comps)):
            p[:, r, allowed] = comps[idx[:, r]]
        q = np.einsum("x,cxu->cu", pxa, p)
        joint = pxa[None, :, None] * p
        with np.errstate(divide="ignore", invalid="ignore"):
            logs = np.log2(p) - np.log2(np.maximum(q, Q_FLOOR))[:, None, :]
            ivals = np.where(joint > 0, joint * logs, 0.0).sum(axis=(1, 2))
        best = min(best, float(ivals.min()))
    return max(best, 0.0)
