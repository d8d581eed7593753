"""Cover graphs describing which source symbols can share a description.

A group of side-1 symbols can be merged into one auxiliary letter exactly when,
for every conditioning value on the other side, all target values the group can
produce fit inside a single distortion ball of radius epsilon.  The collection
of all such groups (every symbol sits in its own singleton, so it is always a
cover) drives the single-letter rate expressions:

* side-information setting: one cover collection over the encoder alphabet,
  with a ball center recorded per (group, decoder symbol) pair;
* distributed setting: a pair of cover collections, one per encoder, where
  every cross pair of groups must admit one shared ball, with its center
  recorded per pair.

Graphs are ordered by coarseness: G <= G' when every group of G has a superset
in G' and G has at least as many groups, on both sides.  Only maximal graphs
matter for the achievable region, and `enumerate_maximal_distributed_graphs`
returns exactly those.

Feasibility tolerance: distortions are compared as d <= eps with relative slack
1e-9 (squared in the euclidean case), so regime boundaries are inclusive on the
left.  Among equally valid finite ball centers the smallest label wins;
euclidean centers are the minimum-enclosing-ball center.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .meb import min_enclosing_ball
from .sources import ComputeTask, JointSource, Label

_FEAS_REL = 1e-9

DEFAULT_CAP = 16
MAX_GRAPHS = 200_000


class CapacityError(RuntimeError):
    """Enumeration size exceeds the configured cap."""


@dataclass(frozen=True)
class BallCertificate:
    """Outcome of a covering-ball search: a center and whether it fits."""

    center: object  # finite: space-symbol label; euclidean: ndarray; None if infeasible
    radius_ok: bool
    radius: float = float("nan")  # worst distortion from center (euclidean: true radius)


def _label_sort_key(label: Label):
    return (type(label).__name__, label)


def _empty_center(task: ComputeTask):
    # a group never co-occurring with this conditioning symbol: any center works
    if task.space.kind == "finite":
        return min(task.space.symbols, key=_label_sort_key)
    return np.zeros(task.space.dimension)


def ball_feasible(values, space, epsilon: float) -> BallCertificate:
    """Find a reconstruction point within epsilon of every value, if one exists.

    `values`: for finite spaces a non-empty sequence of space-symbol indices
    (or labels); for euclidean spaces an (n, dim) array of target vectors.
    """
    if space.kind == "finite":
        idx = np.array([v if isinstance(v, (int, np.integer)) else space.symbol_index(v)
                        for v in values], dtype=np.int64)
        if idx.size == 0:
            raise ValueError("values must be non-empty")
        worst = space.table[idx, :].max(axis=0)  # per candidate center
        bound = epsilon + _FEAS_REL * max(1.0, epsilon)
        feas = np.nonzero(worst <= bound)[0]
        if feas.size == 0:
            return BallCertificate(None, False, float(worst.min()))
        best = min(feas, key=lambda k: _label_sort_key(space.symbols[k]))
        return BallCertificate(space.symbols[best], True, float(worst[best]))
    pts = np.atleast_2d(np.asarray(values, dtype=float))
    if pts.shape[0] == 0:
        raise ValueError("values must be non-empty")
    center, r2 = min_enclosing_ball(pts)
    ok = r2 <= epsilon * epsilon * (1.0 + _FEAS_REL) + 1e-18
    return BallCertificate(center if ok else None, bool(ok), float(np.sqrt(max(r2, 0.0))))


@dataclass(frozen=True)
class CharGraph:
    """A cover of one side's alphabet by mergeable symbol groups.

    ``groups`` are sorted tuples of symbol indices, listed in lexicographic
    order.  For the side-information graph, ``centers[(g, j)]`` is the
    reconstruction chosen for group g against decoder symbol j.
    """

    side: int
    alphabet: tuple[Label, ...]
    groups: tuple[tuple[int, ...], ...]
    centers: dict = field(default=None, compare=False, hash=False)

    def group_labels(self):
        return tuple(tuple(self.alphabet[i] for i in g) for g in self.groups)

    def to_json_dict(self):
        return {
            "side": self.side,
            "alphabet": list(self.alphabet),
            "groups": [list(g) for g in self.group_labels()],
        }


@dataclass(frozen=True)
class DistributedCharGraph:
    """A compatible pair of covers; ``centers[(i1, i2)]`` is the shared ball center."""

    g1: CharGraph
    g2: CharGraph
    centers: dict = field(compare=False, hash=False)

    def to_json_dict(self):
        return {"side1": self.g1.to_json_dict(), "side2": self.g2.to_json_dict()}


def _masks_to_groups(masks, n: int):
    return tuple(tuple(i for i in range(n) if m >> i & 1) for m in masks)


def _group_sorted(masks, n):
    return tuple(sorted(_masks_to_groups(masks, n)))


def _si_required(source: JointSource, task: ComputeTask, members, j: int):
    vals = [task.values[i, j] for i in members if source.pmf[i, j] > 0]
    return vals


def build_si_graph(source: JointSource, task: ComputeTask,
                   cap: int = DEFAULT_CAP) -> CharGraph:
    """All encoder-symbol groups coverable against every decoder symbol.

    Singletons are always feasible, so the result covers the alphabet.  The
    empty group is excluded.  Raises CapacityError when the alphabet exceeds
    `cap` symbols.
    """
    n1 = len(source.alph1)
    n2 = len(source.alph2)
    if n1 > cap:
        raise CapacityError(f"side-1 alphabet has {n1} symbols, cap is {cap}")
    groups = []
    centers = {}
    for mask in range(1, 1 << n1):
        members = tuple(i for i in range(n1) if mask >> i & 1)
        cents = {}
        ok = True
        for j in range(n2):
            req = _si_required(source, task, members, j)
            if not req:
                cents[j] = _empty_center(task)
                continue
            cert = ball_feasible(req, task.space, task.epsilon)
            if not cert.radius_ok:
                ok = False
                break
            cents[j] = cert.center
        if ok:
            groups.append((members, cents))
    groups.sort(key=lambda item: item[0])
    out_groups = tuple(g for g, _ in groups)
    out_centers = {(gi, j): c for gi, (_, cents) in enumerate(groups)
                   for j, c in cents.items()}
    return CharGraph(side=1, alphabet=source.alph1.labels, groups=out_groups,
                     centers=out_centers)


def maximal_elements(groups):
    """Inclusion-maximal members of a collection of index tuples."""
    sets = [frozenset(g) for g in groups]
    out = []
    for g, s in zip(groups, sets):
        if not any(s < t for t in sets):
            out.append(tuple(sorted(g)))
    return tuple(sorted(set(out)))


def restrict_to_maximal(graph: CharGraph) -> CharGraph:
    """Drop non-maximal groups, keeping their recorded centers."""
    keep = set(maximal_elements(graph.groups))
    idx = [gi for gi, g in enumerate(graph.groups) if g in keep]
    groups = tuple(graph.groups[gi] for gi in idx)
    centers = None
    if graph.centers is not None:
        centers = {}
        for new_gi, gi in enumerate(idx):
            for (g0, j), c in graph.centers.items():
                if g0 == gi:
                    centers[(new_gi, j)] = c
    return CharGraph(side=graph.side, alphabet=graph.alphabet, groups=groups,
                     centers=centers)


def _pair_required(source: JointSource, task: ComputeTask, m1, m2):
    vals = [task.values[i, j] for i in m1 for j in m2 if source.pmf[i, j] > 0]
    return vals


def pair_feasible(u1, u2, source: JointSource, task: ComputeTask) -> BallCertificate:
    """Can groups u1 (side 1) and u2 (side 2) share one reconstruction ball?

    Groups are given as symbol labels or indices.  Only positive-probability
    pairs constrain the ball; a never-co-occurring pair is trivially feasible.
    """
    m1 = [i if isinstance(i, (int, np.integer)) else source.alph1.index(i) for i in u1]
    m2 = [j if isinstance(j, (int, np.integer)) else source.alph2.index(j) for j in u2]
    req = _pair_required(source, task, m1, m2)
    if not req:
        return BallCertificate(_empty_center(task), True, 0.0)
    return ball_feasible(req, task.space, task.epsilon)


def _antichain_covers(cands: list[int], full: int, limit: int):
    """All antichains (under bitmask inclusion) of `cands` whose union is `full`."""
    out = []

    def rec(start, chosen, covered):
        if covered == full:
            out.append(tuple(chosen))
            if len(out) > limit:
                raise CapacityError("cover enumeration exceeded the graph limit")
        for k in range(start, len(cands)):
            m = cands[k]
            if any((m & c) == m or (m & c) == c for c in chosen):
                continue
            chosen.append(m)
            rec(k + 1, chosen, covered | m)
            chosen.pop()

    rec(0, [], 0)
    return out


def _dominates(cover_a, cover_b) -> bool:
    """Every group of cover_b sits inside some group of cover_a, and |b| >= |a|."""
    if len(cover_b) < len(cover_a):
        return False
    return all(any((m & big) == m for big in cover_a) for m in cover_b)


def _graph_below(ga, gb) -> bool:
    """ga <= gb in the coarseness order (gb is at least as coarse on both sides)."""
    return _dominates(gb[0], ga[0]) and _dominates(gb[1], ga[1])


def enumerate_maximal_distributed_graphs(source: JointSource, task: ComputeTask,
                                         cap: int = DEFAULT_CAP,
                                         max_graphs: int = MAX_GRAPHS):
    """All maximal compatible cover pairs, with their shared ball centers.

    Candidates per side are the groups feasible against every opposing
    singleton (any valid cover pair only uses such groups).  Both sides are
    enumerated as covering antichains; cross-pair feasibility is checked for
    every candidate pair of groups; coarseness-dominated graphs are pruned.
    """
    n1, n2 = len(source.alph1), len(source.alph2)
    if n1 > cap or n2 > cap:
        raise CapacityError(f"alphabet sizes ({n1}, {n2}) exceed cap {cap}")
    full1, full2 = (1 << n1) - 1, (1 << n2) - 1

    pair_cache: dict[tuple[int, int], BallCertificate] = {}

    def pair_ok(m1: int, m2: int) -> BallCertificate:
        cert = pair_cache.get((m1, m2))
        if cert is None:
            u1 = [i for i in range(n1) if m1 >> i & 1]
            u2 = [j for j in range(n2) if m2 >> j & 1]
            cert = pair_feasible(u1, u2, source, task)
            pair_cache[(m1, m2)] = cert
        return cert

    lat1 = [m for m in range(1, 1 << n1)
            if all(pair_ok(m, 1 << j).radius_ok for j in range(n2))]
    lat2 = [m for m in range(1, 1 << n2)
            if all(pair_ok(1 << i, m).radius_ok for i in range(n1))]

    graphs = []
    for a1 in _antichain_covers(lat1, full1, max_graphs):
        compat2 = [m2 for m2 in lat2 if all(pair_ok(m1, m2).radius_ok for m1 in a1)]
        for a2 in _antichain_covers(compat2, full2, max_graphs):
            graphs.append((a1, a2))
            if len(graphs) > max_graphs:
                raise CapacityError("distributed graph enumeration exceeded the limit")

    # canonical form: sorted group tuples per side (dedupe across search order)
    canon = {}
    for a1, a2 in graphs:
        key = (tuple(sorted(a1)), tuple(sorted(a2)))
        canon[key] = key
    cands = list(canon.values())

    maximal = []
    for g in cands:
        dominated = any(other != g and _graph_below(g, other) for other in cands)
        if not dominated:
            maximal.append(g)
    maximal.sort()

    out = []
    for a1, a2 in maximal:
        g1 = CharGraph(side=1, alphabet=source.alph1.labels,
                       groups=_group_sorted(a1, n1))
        g2 = CharGraph(side=2, alphabet=source.alph2.labels,
                       groups=_group_sorted(a2, n2))
        centers = {}
        for i1, grp1 in enumerate(g1.groups):
            m1 = sum(1 << i for i in grp1)
            for i2, grp2 in enumerate(g2.groups):
                m2 = sum(1 << j for j in grp2)
                centers[(i1, i2)] = pair_ok(m1, m2).center
        out.append(DistributedCharGraph(g1=g1, g2=g2, centers=centers))
    return out


def verify_si_graph(graph: CharGraph, source: JointSource, task: ComputeTask) -> bool:
    """Re-check every group of a side-information graph from scratch."""
    n2 = len(source.alph2)
    covered = set()
    for g in graph.groups:
        covered.update(g)
        for j in range(n2):
            req = _si_required(source, task, g, j)
            if req and not ball_feasible(req, task.space, task.epsilon).radius_ok:
                return False
    return covered == set(range(len(source.alph1)))


def verify_distributed_graph(graph: DistributedCharGraph, source: JointSource,
                             task: ComputeTask) -> bool:
    """Re-check covers and every cross-pair ball of a distributed graph."""
    if {i for g in graph.g1.groups for i in g} != set(range(len(source.alph1))):
        return False
    if {j for g in graph.g2.groups for j in g} != set(range(len(source.alph2))):
        return False
    for grp1 in graph.g1.groups:
        for grp2 in graph.g2.groups:
            if not pair_feasible(grp1, grp2, source, task).radius_ok:
                return False
    return True
