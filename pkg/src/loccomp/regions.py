"""Achievable rates and rate regions assembled from cover graphs.

`rate_si` answers the single-encoder question (decoder observes the other
source); `region_distributed` assembles the two-encoder region as the
convex lower-left frontier of the rate pairs of all maximal cover-graph
pairs, closed upward and to the right.  Every emitted vertex carries a
witness (graph + optimizing conditionals) that can be re-verified without
rerunning the pipeline.

Exactness annotations follow the structural conditions on the pmf: the
distributed region is exact under full support, the side-information rate is
exact when some decoder symbol co-occurs with every encoder symbol; otherwise
the outputs are achievable upper bounds.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import graphs as graphs_mod
from .graphs import (CharGraph, DistributedCharGraph, build_si_graph,
                     enumerate_maximal_distributed_graphs, restrict_to_maximal)
from .optimizer import RateResult, min_mutual_information
from .sources import ComputeTask, JointSource, full_support, s1_regular

DEDUP_TOL = 1e-7
DOM_TOL = 1e-9


@dataclass(frozen=True)
class RatePoint:
    r1: float
    r2: float

    def as_list(self):
        return [self.r1, self.r2]


@dataclass(frozen=True)
class RegionWitness:
    point: RatePoint
    graph: DistributedCharGraph
    cond1: np.ndarray
    cond2: np.ndarray


@dataclass(frozen=True)
class RateRegion:
    """Vertices of the lower-left frontier, sorted by increasing r1.

    The achievable set is every rate pair dominating a convex combination of
    the vertices (the frontier extends upward from the first vertex and
    rightward from the last).
    """

    vertices: tuple[RatePoint, ...]
    epsilon: float = float("nan")
    exact: bool | None = None
    witnesses: tuple[RegionWitness, ...] = ()


@dataclass(frozen=True)
class SiRateResult:
    rate: float
    epsilon: float
    exact: bool
    note: str
    graph: CharGraph  # maximal groups, with centers
    opt: RateResult


@dataclass(frozen=True)
class StepFunction:
    """Regime representation of a sweep: (first epsilon of regime, value)."""

    breakpoints: tuple[tuple[float, object], ...]
    samples: tuple[tuple[float, object], ...]

    def value_at(self, eps: float):
        out = None
        for e, v in self.breakpoints:
            if eps >= e:
                out = v
        return out


def rate_si(source: JointSource, task: ComputeTask, cap: int = graphs_mod.DEFAULT_CAP,
            tol: float = 1e-9) -> SiRateResult:
    """Best description rate when the decoder already holds the other source."""
    graph = restrict_to_maximal(build_si_graph(source, task, cap=cap))
    opt = min_mutual_information(source.marginal1, graph, tol=tol)
    exact = s1_regular(source)
    note = "exact" if exact else "achievable upper bound (no decoder symbol co-occurs with all encoder symbols)"
    return SiRateResult(rate=opt.rate, epsilon=task.epsilon, exact=exact, note=note,
                        graph=graph, opt=opt)


def _strictly_above(a: RatePoint, mid: RatePoint, b: RatePoint) -> bool:
    # mid lies strictly above segment a-b (a.r1 < mid.r1 < b.r1 assumed)
    lhs = (mid.r2 - a.r2) * (b.r1 - a.r1)
    rhs = (b.r2 - a.r2) * (mid.r1 - a.r1)
    scale = max(1.0, abs(lhs), abs(rhs))
    return lhs > rhs + DOM_TOL * scale


def pareto_prune(points) -> RateRegion:
    """Drop dominated points and points strictly above the lower convex frontier.

    Points on the frontier (including collinear ones) are kept.  Duplicates
    within 1e-7 per coordinate collapse to their first representative.
    """
    pts = [p if isinstance(p, RatePoint) else RatePoint(*p) for p in points]
    uniq: list[RatePoint] = []
    for p in pts:
        if not any(abs(p.r1 - q.r1) <= DEDUP_TOL and abs(p.r2 - q.r2) <= DEDUP_TOL
                   for q in uniq):
            uniq.append(p)
    undominated = [
        p for p in uniq
        if not any(q is not p and q.r1 <= p.r1 + DOM_TOL and q.r2 <= p.r2 + DOM_TOL
                   and (q.r1 < p.r1 - DOM_TOL or q.r2 < p.r2 - DOM_TOL)
                   for q in uniq)
    ]
    undominated.sort(key=lambda p: (p.r1, p.r2))
    hull: list[RatePoint] = []
    for p in undominated:
        while len(hull) >= 2 and _strictly_above(hull[-2], hull[-1], p):
            hull.pop()
        hull.append(p)
    return RateRegion(vertices=tuple(hull))


def region_distributed(source: JointSource, task: ComputeTask,
                       cap: int = graphs_mod.DEFAULT_CAP,
                       tol: float = 1e-9) -> RateRegion:
    """Two-encoder rate region at the task's epsilon, with per-vertex witnesses."""
    graph_list = enumerate_maximal_distributed_graphs(source, task, cap=cap)
    rate_cache: dict[tuple, RateResult] = {}

    def side_rate(px, groups) -> RateResult:
        key = (tuple(groups), px.tobytes())
        if key not in rate_cache:
            rate_cache[key] = min_mutual_information(px, groups, tol=tol)
        return rate_cache[key]

    scored = []
    for g in graph_list:
        o1 = side_rate(source.marginal1, g.g1.groups)
        o2 = side_rate(source.marginal2, g.g2.groups)
        scored.append((RatePoint(o1.rate, o2.rate), g, o1, o2))

    frontier = pareto_prune([s[0] for s in scored])
    witnesses = []
    for v in frontier.vertices:
        for point, g, o1, o2 in scored:
            if abs(point.r1 - v.r1) <= DEDUP_TOL and abs(point.r2 - v.r2) <= DEDUP_TOL:
                witnesses.append(RegionWitness(point=v, graph=g, cond1=o1.argmin,
                                               cond2=o2.argmin))
                break
    return RateRegion(vertices=frontier.vertices, epsilon=task.epsilon,
                      exact=full_support(source), witnesses=tuple(witnesses))


def region_contains(region: RateRegion, point, tol: float = 1e-9) -> bool:
    """Is a rate pair inside the region's upward/rightward closure?"""
    p = point if isinstance(point, RatePoint) else RatePoint(*point)
    vs = region.vertices
    if not vs:
        return False
    if p.r1 < vs[0].r1 - tol:
        return False
    if p.r2 >= vs[0].r2 - tol and p.r1 >= vs[0].r1 - tol:
        return True
    # walk the piecewise-linear frontier
    for a, b in zip(vs, vs[1:]):
        if a.r1 - tol <= p.r1 <= b.r1 + tol:
            if b.r1 - a.r1 <= tol:
                bound = min(a.r2, b.r2)
            else:
                t = (p.r1 - a.r1) / (b.r1 - a.r1)
                bound = a.r2 + t * (b.r2 - a.r2)
            if p.r2 >= bound - tol:
                return True
    return p.r1 >= vs[-1].r1 - tol and p.r2 >= vs[-1].r2 - tol


def _region_equal(a: RateRegion, b: RateRegion, tol: float = DEDUP_TOL) -> bool:
    if len(a.vertices) != len(b.vertices):
        return False
    return all(abs(u.r1 - v.r1) <= tol and abs(u.r2 - v.r2) <= tol
               for u, v in zip(a.vertices, b.vertices))


def sweep_epsilon(source: JointSource, task: ComputeTask, eps_list,
                  kind: str = "region", cap: int = graphs_mod.DEFAULT_CAP) -> StepFunction:
    """Evaluate the rate (kind='rate-si') or region (kind='region') over a grid.

    Consecutive epsilons with equal results merge into one regime; the first
    epsilon of each regime becomes a breakpoint.  Values are non-increasing in
    epsilon (regions grow).
    """
    eps_sorted = sorted(float(e) for e in eps_list)
    samples = []
    for e in eps_sorted:
        t = replace(task, epsilon=e)
        if kind == "rate-si":
            samples.append((e, rate_si(source, t, cap=cap)))
        elif kind == "region":
            samples.append((e, region_distributed(source, t, cap=cap)))
        else:
            raise ValueError("kind must be 'rate-si' or 'region'")

    def same(u, v):
        if kind == "rate-si":
            return abs(u.rate - v.rate) <= 1e-9
        return _region_equal(u, v)

    breaks = []
    for e, v in samples:
        if not breaks or not same(breaks[-1][1], v):
            breaks.append((e, v))
    return StepFunction(breakpoints=tuple(breaks), samples=tuple(samples))
