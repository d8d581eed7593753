import json

import numpy as np
import pytest

from loccomp import (Alphabet, ComputeTask, JointSource, ProblemSpecError,
                     ReconstructionSpace, confusable, full_support, make_task,
                     parse_problem, s1_regular, validate)
from loccomp.catalog import binary_and_gate, card_game, uniform_grid_pair


def test_alphabet_rejects_empty_and_duplicates():
    with pytest.raises(ProblemSpecError):
        Alphabet(())
    with pytest.raises(ProblemSpecError):
        Alphabet((1, 1, 2))
    with pytest.raises(ProblemSpecError):
        Alphabet((1, 2.5))
    a = Alphabet(("x", "y", 3))
    assert a.index("y") == 1
    with pytest.raises(ProblemSpecError):
        a.index("z")


def test_joint_source_shape_check():
    a2 = Alphabet((0, 1))
    a3 = Alphabet((0, 1, 2))
    with pytest.raises(ProblemSpecError):
        JointSource(a2, a3, np.ones((2, 2)) / 4)
    src = JointSource(a2, a3, np.ones((2, 3)) / 6)
    assert np.allclose(src.marginal1, [0.5, 0.5])
    assert np.allclose(src.marginal2, [1 / 3, 1 / 3, 1 / 3])
    # pmf is read-only
    with pytest.raises(ValueError):
        src.pmf[0, 0] = 1.0


def test_validate_reports_all_problems_without_raising():
    a = Alphabet((0, 1))
    bad = JointSource(a, a, np.array([[0.9, -0.1], [0.0, 0.0]]))
    rep = validate(bad)
    assert not rep.ok
    assert rep.negative_entries == ((0, 1),)
    assert (2, 1) in rep.zero_marginals  # side-2 symbol 1 never occurs
    assert any("sums" in m for m in rep.messages)

    good = JointSource(a, a, np.full((2, 2), 0.25))
    rep2 = validate(good)
    assert rep2.ok and rep2.messages == ()


def test_support_predicates_on_catalog_sources():
    card_src, _ = card_game()
    and_src, _ = binary_and_gate(0.1)
    grid_src, _ = uniform_grid_pair(3)

    assert not full_support(card_src)  # diagonal is impossible
    assert full_support(and_src)
    assert full_support(grid_src)

    assert not s1_regular(card_src)  # every column has a zero
    assert s1_regular(and_src)

    # every pair of side-2 symbols co-occurs with some shared side-1 symbol
    assert confusable(card_src, side=1)
    assert confusable(card_src, side=2)
    assert confusable(and_src, side=1)

    # a source where side 1 can always tell the side-2 symbols apart
    a = Alphabet((0, 1))
    diag = JointSource(a, a, np.array([[0.5, 0.0], [0.0, 0.5]]))
    assert not confusable(diag, side=1)
    with pytest.raises(ValueError):
        confusable(diag, side=3)


def test_reconstruction_space_validation():
    with pytest.raises(ProblemSpecError):
        ReconstructionSpace(kind="finite", symbols=(), table=np.zeros((0, 0)))
    with pytest.raises(ProblemSpecError):
        ReconstructionSpace(kind="finite", symbols=(0, 1),
                            table=np.array([[0.0, -1.0], [1.0, 0.0]]))
    with pytest.raises(ProblemSpecError):
        ReconstructionSpace(kind="euclidean", dimension=0)
    with pytest.raises(ProblemSpecError):
        ReconstructionSpace(kind="fuzzy")

    ham = ReconstructionSpace.hamming((0, 1, 2))
    assert ham.distortion(0, 0) == 0.0
    assert ham.distortion(0, 2) == 1.0
    euc = ReconstructionSpace.euclidean(2)
    assert euc.distortion((0.0, 0.0), (3.0, 4.0)) == pytest.approx(5.0)


def test_make_task_checks_zero_self_distortion_on_range():
    a = Alphabet((0, 1))
    # d(1,1) != 0, but 1 is attained by f, so this must be rejected
    bad = ReconstructionSpace(kind="finite", symbols=(0, 1),
                              table=np.array([[0.0, 1.0], [1.0, 0.5]]))
    with pytest.raises(ProblemSpecError):
        make_task(a, a, [[0, 0], [0, 1]], bad, 0.0)
    # same table is fine when f never outputs 1
    task = make_task(a, a, [[0, 0], [0, 0]], bad, 0.0)
    assert task.values.max() == 0


def test_make_task_shapes_and_epsilon():
    a = Alphabet((0, 1))
    ham = ReconstructionSpace.hamming((0, 1))
    with pytest.raises(ProblemSpecError):
        make_task(a, a, [[0, 0]], ham, 0.0)
    with pytest.raises(ProblemSpecError):
        ComputeTask(space=ham, values=np.zeros((2, 2), dtype=int), epsilon=-0.5)
    euc = ReconstructionSpace.euclidean(2)
    with pytest.raises(ProblemSpecError):
        make_task(a, a, [[(0.0,), (0.0,)], [(0.0,), (0.0,)]], euc, 0.0)


def test_parse_problem_round_trip(tmp_path):
    spec = {
        "alphabet1": [0, 1],
        "alphabet2": [0, 1],
        "pmf": [[0.45, 0.05], [0.05, 0.45]],
        "function": [[0, 0], [0, 1]],
        "space": {"kind": "finite", "symbols": [0, 1],
                  "distortion": [[0.0, 1.0], [1.0, 0.0]]},
        "epsilon": 0.25,
    }
    p = tmp_path / "prob.json"
    p.write_text(json.dumps(spec))
    source, task = parse_problem(p)
    assert validate(source).ok
    assert task.epsilon == 0.25
    assert task.space.kind == "finite"
    assert task.values[1, 1] == task.space.symbol_index(1)

    source2, task2 = parse_problem(spec)  # dict form
    assert np.array_equal(source2.pmf, source.pmf)


def test_parse_problem_rejects_unknown_and_missing_keys(tmp_path):
    base = {
        "alphabet1": [0, 1], "alphabet2": [0, 1],
        "pmf": [[0.25, 0.25], [0.25, 0.25]],
        "function": [[0, 0], [0, 1]],
        "space": {"kind": "finite", "symbols": [0, 1],
                  "distortion": [[0.0, 1.0], [1.0, 0.0]]},
    }
    extra = dict(base, typo_key=1)
    with pytest.raises(ProblemSpecError, match="unknown"):
        parse_problem(extra)
    missing = {k: v for k, v in base.items() if k != "pmf"}
    with pytest.raises(ProblemSpecError, match="missing"):
        parse_problem(missing)
    bad_space = dict(base, space={"kind": "euclidean"})
    with pytest.raises(ProblemSpecError):
        parse_problem(bad_space)
    p = tmp_path / "broken.json"
    p.write_text("{not json")
    with pytest.raises(ProblemSpecError, match="JSON"):
        parse_problem(p)
    with pytest.raises(ProblemSpecError, match="read"):
        parse_problem(tmp_path / "absent.json")


def test_parse_problem_euclidean():
    spec = {
        "alphabet1": [0, 1], "alphabet2": [0, 1],
        "pmf": [[0.25, 0.25], [0.25, 0.25]],
        "function": [[[0.0, 0.0], [0.0, 1.0]], [[1.0, 0.0], [1.0, 1.0]]],
        "space": {"kind": "euclidean", "dimension": 2},
    }
    source, task = parse_problem(spec)
    assert task.space.kind == "euclidean"
    assert task.values.shape == (2, 2, 2)
    assert task.epsilon == 0.0
