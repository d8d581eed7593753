"""Built-in example problems used by tests, docs, and the CLI's demo paths."""

from __future__ import annotations

import numpy as np

from .sources import (Alphabet, ComputeTask, JointSource, ReconstructionSpace,
                      make_task)


def card_game(epsilon: float = 0.5) -> tuple[JointSource, ComputeTask]:
    """Two players each hold one of three cards, never the same one.

    The target is the indicator that side 1 holds the higher card, under
    Hamming distortion on {0, 1}.
    """
    alph = Alphabet((1, 2, 3))
    pmf = (np.ones((3, 3)) - np.eye(3)) / 6.0
    source = JointSource(alph, alph, pmf)
    space = ReconstructionSpace.hamming((0, 1))
    func = [[1 if a > b else 0 for b in alph.labels] for a in alph.labels]
    return source, make_task(alph, alph, func, space, epsilon)


def binary_and_gate(crossover: float = 0.1,
                    epsilon: float = 0.5) -> tuple[JointSource, ComputeTask]:
    """Doubly symmetric binary source feeding an AND gate, Hamming distortion.

    Side 2 is side 1 pushed through a binary symmetric channel with the given
    crossover probability; all four joint symbols occur with positive
    probability whenever 0 < crossover < 1.
    """
    if not 0.0 < crossover < 1.0:
        raise ValueError("crossover must lie in (0, 1)")
    alph = Alphabet((0, 1))
    pmf = np.array([[(1 - crossover) / 2, crossover / 2],
                    [crossover / 2, (1 - crossover) / 2]])
    source = JointSource(alph, alph, pmf)
    space = ReconstructionSpace.hamming((0, 1))
    func = [[a & b for b in alph.labels] for a in alph.labels]
    return source, make_task(alph, alph, func, space, epsilon)


def uniform_grid_pair(side: int = 3,
                      epsilon: float = 0.5) -> tuple[JointSource, ComputeTask]:
    """Independent uniform coordinates on a side x side integer grid.

    The target is the identity pair (x1, x2) as a point of the plane, under
    euclidean distortion, so tolerance balls are literal disks around grid
    points.
    """
    if side < 1:
        raise ValueError("side must be positive")
    alph = Alphabet(tuple(range(side)))
    pmf = np.full((side, side), 1.0 / side ** 2)
    source = JointSource(alph, alph, pmf)
    space = ReconstructionSpace.euclidean(2)
    func = [[(float(a), float(b)) for b in alph.labels] for a in alph.labels]
    return source, make_task(alph, alph, func, space, epsilon)


BUILTIN = {
    "card-game": card_game,
    "and-gate": binary_and_gate,
    "grid-pair": uniform_grid_pair,
}
