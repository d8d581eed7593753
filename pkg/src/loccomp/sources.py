"""Finite two-terminal sources, reconstruction spaces, and computation tasks.

A problem instance is a joint pmf p(x1, x2) on a pair of finite alphabets,
a target function f(x1, x2), and a reconstruction space in which approximate
values live.  Two kinds of space are supported:

* finite -- an explicit reconstruction alphabet with a distortion table,
* euclidean -- R^k with the L2 metric, for vector-valued targets.

Everything downstream (cover-graph construction, rate optimization, the codec
simulator) consumes the types defined here.  Structural problems with a pmf are
reported by :func:`validate` rather than raised, so callers can surface all
failures at once; alphabets and tasks raise on construction because a malformed
one cannot be represented at all.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

Label = int | str

PMF_SUM_TOL = 1e-12


class ProblemSpecError(ValueError):
    """Raised for malformed problem descriptions (files or in-memory)."""


@dataclass(frozen=True)
class Alphabet:
    """An ordered finite alphabet of distinct int/str labels."""

    labels: tuple[Label, ...]

    def __post_init__(self):
        if len(self.labels) == 0:
            raise ProblemSpecError("alphabet must be non-empty")
        if len(set(self.labels)) != len(self.labels):
            raise ProblemSpecError("alphabet labels must be distinct")
        for lab in self.labels:
            if not isinstance(lab, (int, str)) or isinstance(lab, bool):
                raise ProblemSpecError(f"alphabet label {lab!r} is not int or str")

    def __len__(self):
        return len(self.labels)

    def index(self, label: Label) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ProblemSpecError(f"label {label!r} not in alphabet") from None


@dataclass(frozen=True)
class JointSource:
    """A joint pmf over alph1 x alph2; rows index alph1, columns alph2."""

    alph1: Alphabet
    alph2: Alphabet
    pmf: np.ndarray

    def __post_init__(self):
        arr = np.array(self.pmf, dtype=float)
        if arr.shape != (len(self.alph1), len(self.alph2)):
            raise ProblemSpecError(
                f"pmf shape {arr.shape} does not match alphabets "
                f"({len(self.alph1)}, {len(self.alph2)})"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "pmf", arr)

    @property
    def marginal1(self) -> np.ndarray:
        return self.pmf.sum(axis=1)

    @property
    def marginal2(self) -> np.ndarray:
        return self.pmf.sum(axis=0)


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    sum_deviation: float
    negative_entries: tuple[tuple[Label, Label], ...]
    zero_marginals: tuple[tuple[int, Label], ...]
    messages: tuple[str, ...]


def validate(source: JointSource) -> ValidationReport:
    """Check pmf structure: sums to 1, non-negative, strictly positive marginals.

    Never raises; all failures are reported together.
    """
    msgs = []
    pmf = source.pmf
    dev = abs(float(pmf.sum()) - 1.0)
    if dev > PMF_SUM_TOL:
        msgs.append(f"pmf sums to {pmf.sum():.12g} (deviation {dev:.3g})")
    neg = []
    for i, j in zip(*np.nonzero(pmf < 0)):
        neg.append((source.alph1.labels[i], source.alph2.labels[j]))
        msgs.append(f"negative entry at ({source.alph1.labels[i]!r}, {source.alph2.labels[j]!r})")
    zeros = []
    for i in np.nonzero(source.marginal1 <= 0)[0]:
        zeros.append((1, source.alph1.labels[i]))
        msgs.append(f"zero marginal for side-1 symbol {source.alph1.labels[i]!r}")
    for j in np.nonzero(source.marginal2 <= 0)[0]:
        zeros.append((2, source.alph2.labels[j]))
        msgs.append(f"zero marginal for side-2 symbol {source.alph2.labels[j]!r}")
    ok = dev <= PMF_SUM_TOL and not neg and not zeros
    return ValidationReport(ok, dev, tuple(neg), tuple(zeros), tuple(msgs))


def full_support(source: JointSource) -> bool:
    """True iff every pair (x1, x2) has positive probability."""
    return bool(np.all(source.pmf > 0))


def s1_regular(source: JointSource) -> bool:
    """True iff some side-2 symbol co-occurs positively with every side-1 symbol."""
    return bool(np.any(np.all(source.pmf > 0, axis=0)))


def confusable(source: JointSource, side: int) -> bool:
    """Column pairs share a positively-supported row (side=1) or vice versa (side=2).

    When true for side k, no two symbols of the *other* alphabet can be told
    apart from side k's observations alone, which is what forces lossless-style
    rates in the zero-distortion identity regime.
    """
    if side == 1:
        mask = source.pmf > 0  # rows x1, cols x2
    elif side == 2:
        mask = source.pmf.T > 0
    else:
        raise ValueError("side must be 1 or 2")
    ncols = mask.shape[1]
    for j in range(ncols):
        for jp in range(j + 1, ncols):
            if not np.any(mask[:, j] & mask[:, jp]):
                return False
    return True


@dataclass(frozen=True)
class ReconstructionSpace:
    """Where approximate values live: finite with a distortion table, or R^k."""

    kind: str  # "finite" | "euclidean"
    symbols: tuple[Label, ...] = ()
    table: np.ndarray | None = None  # |symbols| x |symbols|, table[i, j] = d(sym_i, sym_j)
    dimension: int = 0

    def __post_init__(self):
        if self.kind == "finite":
            if len(self.symbols) == 0:
                raise ProblemSpecError("finite space needs at least one symbol")
            if len(set(self.symbols)) != len(self.symbols):
                raise ProblemSpecError("reconstruction symbols must be distinct")
            arr = np.array(self.table, dtype=float)
            n = len(self.symbols)
            if arr.shape != (n, n):
                raise ProblemSpecError(f"distortion table must be {n}x{n}, got {arr.shape}")
            if np.any(arr < 0):
                raise ProblemSpecError("distortion values must be non-negative")
            arr.setflags(write=False)
            object.__setattr__(self, "table", arr)
        elif self.kind == "euclidean":
            if self.dimension < 1:
                raise ProblemSpecError("euclidean space needs dimension >= 1")
        else:
            raise ProblemSpecError(f"unknown space kind {self.kind!r}")

    def symbol_index(self, label: Label) -> int:
        try:
            return self.symbols.index(label)
        except ValueError:
            raise ProblemSpecError(f"value {label!r} not in reconstruction space") from None

    def distortion(self, z, zhat) -> float:
        if self.kind == "finite":
            return float(self.table[self.symbol_index(z), self.symbol_index(zhat)])
        z = np.asarray(z, float)
        zhat = np.asarray(zhat, float)
        return float(np.sqrt(((z - zhat) ** 2).sum()))

    @staticmethod
    def hamming(symbols) -> "ReconstructionSpace":
        n = len(symbols)
        return ReconstructionSpace(
            kind="finite", symbols=tuple(symbols), table=np.ones((n, n)) - np.eye(n)
        )

    @staticmethod
    def euclidean(dimension: int) -> "ReconstructionSpace":
        return ReconstructionSpace(kind="euclidean", dimension=dimension)


@dataclass(frozen=True)
class ComputeTask:
    """A target function on alph1 x alph2, its reconstruction space, and epsilon.

    ``values`` has shape (|alph1|, |alph2|) holding symbol indices into
    ``space.symbols`` for finite spaces, or shape (|alph1|, |alph2|, dim) of
    floats for euclidean spaces.
    """

    space: ReconstructionSpace
    values: np.ndarray
    epsilon: float
    func_labels: tuple = field(default=(), compare=False)  # original finite labels, row-major

    def __post_init__(self):
        if self.epsilon < 0:
            raise ProblemSpecError("epsilon must be non-negative")
        arr = np.array(self.values)
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def value(self, i1: int, i2: int):
        """Target value at symbol indices (i1, i2): a space-symbol index or a vector."""
        return self.values[i1, i2]


def make_task(alph1: Alphabet, alph2: Alphabet, func, space: ReconstructionSpace,
              epsilon: float) -> ComputeTask:
    """Build a ComputeTask from a row-major nested list of function values.

    Finite spaces expect labels drawn from ``space.symbols``; euclidean spaces
    expect length-``dimension`` vectors.
    """
    n1, n2 = len(alph1), len(alph2)
    if len(func) != n1 or any(len(row) != n2 for row in func):
        raise ProblemSpecError(f"function table must be {n1}x{n2}")
    if space.kind == "finite":
        idx = np.empty((n1, n2), dtype=np.int64)
        labels = []
        for i, row in enumerate(func):
            for j, z in enumerate(row):
                idx[i, j] = space.symbol_index(z)
                labels.append(z)
        # d(z, z) = 0 must hold on the range of f
        for k in np.unique(idx):
            if space.table[k, k] != 0.0:
                raise ProblemSpecError(
                    f"distortion d(z,z) must be 0 for attained value {space.symbols[k]!r}"
                )
        return ComputeTask(space=space, values=idx, epsilon=float(epsilon),
                           func_labels=tuple(labels))
    vals = np.empty((n1, n2, space.dimension), dtype=float)
    for i, row in enumerate(func):
        for j, z in enumerate(row):
            v = np.asarray(z, dtype=float)
            if v.shape != (space.dimension,):
                raise ProblemSpecError(
                    f"function value at ({i},{j}) must be a length-{space.dimension} vector"
                )
            vals[i, j] = v
    return ComputeTask(space=space, values=vals, epsilon=float(epsilon))


_TOP_KEYS = {"alphabet1", "alphabet2", "pmf", "function", "space", "epsilon"}
_FINITE_KEYS = {"kind", "symbols", "distortion"}
_EUCLID_KEYS = {"kind", "dimension"}


def _require_keys(obj: dict, allowed: set, required: set, what: str):
    unknown = set(obj) - allowed
    if unknown:
        raise ProblemSpecError(f"unknown {what} keys: {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise ProblemSpecError(f"missing {what} keys: {sorted(missing)}")


def parse_problem(spec) -> tuple[JointSource, ComputeTask]:
    """Parse a problem description from a JSON file path or an equivalent dict.

    Unknown keys are rejected so that typos fail loudly instead of being
    silently ignored.
    """
    if isinstance(spec, (str, Path)):
        try:
            raw = Path(spec).read_text()
        except OSError as exc:
            raise ProblemSpecError(f"cannot read problem file: {exc}") from exc
        try:
            spec = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ProblemSpecError(f"problem file is not valid JSON: {exc}") from exc
    if not isinstance(spec, dict):
        raise ProblemSpecError("problem spec must be a JSON object")
    _require_keys(spec, _TOP_KEYS, _TOP_KEYS - {"epsilon"}, "problem")

    alph1 = Alphabet(tuple(spec["alphabet1"]))
    alph2 = Alphabet(tuple(spec["alphabet2"]))
    pmf = np.array(spec["pmf"], dtype=float)
    if pmf.ndim != 2 or pmf.shape != (len(alph1), len(alph2)):
        raise ProblemSpecError(
            f"pmf must be a {len(alph1)}x{len(alph2)} matrix, got shape {pmf.shape}"
        )
    source = JointSource(alph1, alph2, pmf)

    sp = spec["space"]
    if not isinstance(sp, dict) or "kind" not in sp:
        raise ProblemSpecError("space must be an object with a 'kind'")
    if sp["kind"] == "finite":
        _require_keys(sp, _FINITE_KEYS, _FINITE_KEYS, "space")
        space = ReconstructionSpace(kind="finite", symbols=tuple(sp["symbols"]),
                                    table=np.array(sp["distortion"], dtype=float))
    elif sp["kind"] == "euclidean":
        _require_keys(sp, _EUCLID_KEYS, _EUCLID_KEYS, "space")
        space = ReconstructionSpace.euclidean(int(sp["dimension"]))
    else:
        raise ProblemSpecError(f"unknown space kind {sp['kind']!r}")

    epsilon = float(spec.get("epsilon", 0.0))
    task = make_task(alph1, alph2, spec["function"], space, epsilon)
    return source, task
