import dataclasses

import numpy as np
import pytest

from loccomp import (Alphabet, CapacityError, JointSource, ReconstructionSpace,
                     ball_feasible, build_si_graph,
                     enumerate_maximal_distributed_graphs, make_task,
                     maximal_elements, pair_feasible, restrict_to_maximal,
                     verify_distributed_graph, verify_si_graph)
from loccomp.catalog import binary_and_gate, card_game, uniform_grid_pair
from loccomp.graphs import _dominates


def _groups_as_labels(graph):
    return set(graph.group_labels())


def test_ball_feasible_finite():
    space = ReconstructionSpace.hamming((0, 1))
    # both values present: no single center within 0.5, but 1.0 works
    cert = ball_feasible([0, 1], space, 0.5)
    assert not cert.radius_ok
    cert = ball_feasible([0, 1], space, 1.0)
    assert cert.radius_ok and cert.center in (0, 1)
    cert = ball_feasible([1, 1], space, 0.0)
    assert cert.radius_ok and cert.center == 1


def test_ball_feasible_euclidean_golden_radii():
    space = ReconstructionSpace.euclidean(2)
    square = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)]
    assert not ball_feasible(square, space, 0.70).radius_ok
    assert ball_feasible(square, space, 0.7072).radius_ok  # needs sqrt(2)/2

    rect = [(0.0, 0.0), (1.0, 0.0), (0.0, 2.0), (1.0, 2.0)]
    assert not ball_feasible(rect, space, 1.117).radius_ok
    assert ball_feasible(rect, space, 1.119).radius_ok  # needs sqrt(5)/2


def test_si_graph_card_game_maximal_groups():
    source, task = card_game(0.5)
    graph = restrict_to_maximal(build_si_graph(source, task))
    assert _groups_as_labels(graph) == {(1, 2), (2, 3)}
    # centers cover every (group, decoder symbol) pair
    assert set(graph.centers) == {(g, j) for g in range(2) for j in range(3)}
    assert verify_si_graph(graph, source, task)

    wide = restrict_to_maximal(build_si_graph(source,
                                              dataclasses.replace(task, epsilon=1.0)))
    assert _groups_as_labels(wide) == {(1, 2, 3)}


def test_si_graph_contains_all_singletons_before_pruning():
    source, task = card_game(0.5)
    graph = build_si_graph(source, task)
    labels = _groups_as_labels(graph)
    for s in (1, 2, 3):
        assert (s,) in labels


def test_groups_nest_as_epsilon_grows():
    rng = np.random.default_rng(5)
    space = ReconstructionSpace.hamming((0, 1, 2))
    for _ in range(8):
        n1, n2 = rng.integers(2, 4, size=2)
        pmf = rng.uniform(size=(n1, n2)) * (rng.uniform(size=(n1, n2)) > 0.3)
        if pmf.sum() == 0 or (pmf.sum(axis=1) == 0).any() or (pmf.sum(axis=0) == 0).any():
            continue
        pmf /= pmf.sum()
        a1, a2 = Alphabet(tuple(range(n1))), Alphabet(tuple(range(n2)))
        source = JointSource(a1, a2, pmf)
        func = [[int(rng.integers(0, 3)) for _ in range(n2)] for _ in range(n1)]
        task = make_task(a1, a2, func, space, 0.0)
        prev = None
        for eps in (0.0, 0.5, 1.0):
            g = build_si_graph(source, dataclasses.replace(task, epsilon=eps))
            cur = set(g.groups)
            if prev is not None:
                # a feasible group stays feasible at a larger tolerance
                assert prev <= cur
            prev = cur


def test_pair_feasible_and_gate():
    source, task = binary_and_gate(0.1, 0.0)
    assert pair_feasible((0, 1), (0,), source, task).radius_ok  # AND is 0 on column 0
    assert not pair_feasible((0, 1), (1,), source, task).radius_ok
    assert not pair_feasible((0, 1), (0, 1), source, task).radius_ok


def test_pair_feasible_empty_support_is_trivial():
    source, task = card_game(0.5)
    # (1,1) pair has zero probability, so the singleton pair {1},{1} has an
    # empty constraint set and must be feasible with the smallest-symbol center
    cert = pair_feasible((0,), (0,), source, task)
    assert cert.radius_ok


def test_enumerate_distributed_and_gate():
    source, task = binary_and_gate(0.1, 0.0)
    graphs = enumerate_maximal_distributed_graphs(source, task)
    assert len(graphs) == 1
    g = graphs[0]
    assert g.g1.group_labels() == ((0,), (1,))
    assert g.g2.group_labels() == ((0,), (1,))
    assert verify_distributed_graph(g, source, task)

    merged = enumerate_maximal_distributed_graphs(
        source, dataclasses.replace(task, epsilon=1.0))
    assert len(merged) == 1
    assert merged[0].g1.group_labels() == ((0, 1),)
    assert merged[0].g2.group_labels() == ((0, 1),)


def _masks(graph_side):
    return [sum(1 << i for i in g) for g in graph_side.groups]


def test_enumerate_distributed_no_graph_dominates_another():
    for source, task in (card_game(0.5), uniform_grid_pair(3, 1.05)):
        graphs = enumerate_maximal_distributed_graphs(source, task)
        assert graphs, "expected at least one maximal graph"
        for i, ga in enumerate(graphs):
            assert verify_distributed_graph(ga, source, task)
            for j, gb in enumerate(graphs):
                if i == j:
                    continue
                below = (_dominates(_masks(gb.g1), _masks(ga.g1))
                         and _dominates(_masks(gb.g2), _masks(ga.g2)))
                assert not below, f"graph {i} is dominated by graph {j}"


def test_verify_rejects_tampered_graph():
    source, task = card_game(0.5)
    graph = restrict_to_maximal(build_si_graph(source, task))
    bad = dataclasses.replace(graph, groups=graph.groups + ((0, 1, 2),))
    assert not verify_si_graph(bad, source, task)


def test_maximal_elements_keeps_incomparable_duplicID_free():
    groups = [(0,), (1,), (0, 1), (2,), (1, 2)]
    assert set(maximal_elements(groups)) == {(0, 1), (1, 2)}


def _constant_task(n: int):
    a = Alphabet(tuple(range(n)))
    b = Alphabet((0, 1))
    pmf = np.full((n, 2), 1.0 / (2 * n))
    source = JointSource(a, b, pmf)
    space = ReconstructionSpace.hamming((0,))
    task = make_task(a, b, [[0, 0] for _ in range(n)], space, 0.0)
    return source, task


def test_capacity_error_on_large_alphabet():
    source, task = _constant_task(20)
    with pytest.raises(CapacityError):
        build_si_graph(source, task, cap=16)
    with pytest.raises(CapacityError):
        enumerate_maximal_distributed_graphs(source, task, cap=16)


def test_cap_is_adjustable():
    source, task = _constant_task(8)
    with pytest.raises(CapacityError):
        build_si_graph(source, task, cap=7)
    # constant target: the whole alphabet merges into one group
    g = build_si_graph(source, task, cap=8)
    assert maximal_elements(g.groups) == (tuple(range(8)),)
