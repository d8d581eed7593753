"""Exact storage of sparse bit vectors with constant-probe recovery.

A random bipartite graph hashes each of the N stored positions to d right
bits; position i is read back as the majority of its d probes.  For vectors
with at most delta*N ones and a right side of size O(delta log(1/delta) N),
random graphs admit an assignment of the right bits realizing every majority,
and the probe count per position depends only on delta, not on N.

Construction knobs (c1 sizes the degree, c2 the right side):

    d = 2*ceil(c1*log2(1/delta)) + 1        (odd, so majorities are strict)
    M = ceil(c2*delta*log2(1/delta)*N)

Encoding finds the right-bit assignment greedily, flipping bits that no
currently satisfied zero-position depends on too heavily, with a bounded
repair pass; if a graph turns out unencodable for a vector, the graph is
rebuilt from a derived seed (the seed travels with the stored bits, so
decoding stays self-contained).  For tiny instances an exhaustive search over
the support's probe union is a complete fallback: ones outside that union
never help, so searching it decides feasibility.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

DELTA_MAX = 0.25
FLIP_CAP_FACTOR = 50
EXHAUSTIVE_UNION_LIMIT = 22


class EncodingError(RuntimeError):
    """No right-bit assignment found within the retry budget."""


class ProbeCounter:
    __slots__ = ("count",)

    def __init__(self):
        self.count = 0

    def add(self, k: int):
        self.count += int(k)


@dataclass(frozen=True)
class BitprobeGraph:
    n_left: int
    n_right: int
    degree: int
    delta: float
    seed: int
    adj: np.ndarray  # (n_left, degree) right indices, each row sorted

    @property
    def rate(self) -> float:
        return self.n_right / self.n_left


@dataclass(frozen=True)
class SparseVector:
    n: int
    support: tuple[int, ...]

    def __post_init__(self):
        sup = tuple(sorted(set(int(i) for i in self.support)))
        if sup and (sup[0] < 0 or sup[-1] >= self.n):
            raise ValueError("support index out of range")
        object.__setattr__(self, "support", sup)

    def budget_ok(self, delta: float) -> bool:
        return len(self.support) <= delta * self.n


@dataclass(frozen=True)
class StoredBits:
    graph: BitprobeGraph
    bits: np.ndarray  # (n_right,) uint8


def graph_params(n: int, delta: float, c1: float = 1.0, c2: float = 16.0):
    if not 0.0 < delta < DELTA_MAX:
        raise ValueError(f"delta must lie in (0, {DELTA_MAX}), got {delta}")
    log_term = math.log2(1.0 / delta)
    d = 2 * math.ceil(c1 * log_term) + 1
    m = math.ceil(c2 * delta * log_term * n)
    return d, max(m, d)


def build_graph(n: int, delta: float, seed: int, c1: float = 1.0,
                c2: float = 16.0) -> BitprobeGraph:
    """Sample probe sets: d distinct right indices per position, seeded."""
    d, m = graph_params(n, delta, c1, c2)
    rng = np.random.default_rng(seed)
    adj = np.sort(rng.integers(0, m, size=(n, d), dtype=np.int64), axis=1)
    while True:  # resample rows with colliding probes (rare)
        dup = (np.diff(adj, axis=1) == 0).any(axis=1)
        if not dup.any():
            break
        adj[dup] = np.sort(rng.integers(0, m, size=(int(dup.sum()), d),
                                        dtype=np.int64), axis=1)
    adj.setflags(write=False)
    return BitprobeGraph(n_left=n, n_right=m, degree=d, delta=float(delta),
                         seed=int(seed), adj=adj)


def decode_bit(graph: BitprobeGraph, bits: np.ndarray, i: int,
               counter: ProbeCounter | None = None) -> int:
    """Majority over position i's probe set; counts exactly `degree` probes."""
    probes = graph.adj[i]
    if counter is not None:
        counter.add(len(probes))
    return int(bits[probes].sum() >= (graph.degree + 1) // 2)


def decode_all(graph: BitprobeGraph, bits: np.ndarray) -> np.ndarray:
    return (bits[graph.adj].sum(axis=1) >= (graph.degree + 1) // 2).astype(np.uint8)


def _reverse_adjacency(graph: BitprobeGraph):
    flat = graph.adj.ravel()
    lefts = np.repeat(np.arange(graph.n_left), graph.degree)
    order = np.argsort(flat, kind="stable")
    sorted_rights = flat[order]
    sorted_lefts = lefts[order]
    starts = np.searchsorted(sorted_rights, np.arange(graph.n_right + 1))
    return sorted_lefts, starts


def _try_solve(graph: BitprobeGraph, x: np.ndarray, rng) -> np.ndarray | None:
    """Greedy placement with conflict repair; None when the flip cap trips."""
    d = graph.degree
    need = (d + 1) // 2  # ones for a majority-1
    cap = (d - 1) // 2   # ones a zero-position tolerates
    rev_lefts, rev_starts = _reverse_adjacency(graph)

    def neighbors(j: int) -> np.ndarray:
        return rev_lefts[rev_starts[j]:rev_starts[j + 1]]

    bits = np.zeros(graph.n_right, dtype=np.uint8)
    ones = np.zeros(graph.n_left, dtype=np.int64)  # per-position probe-one count
    support = np.nonzero(x)[0]
    flips = 0
    flip_cap = FLIP_CAP_FACTOR * graph.n_left

    def slack_after_flip(j: int) -> int:
        worst = d
        for v in neighbors(j):
            if not x[v]:
                worst = min(worst, cap - int(ones[v]) - 1)
        return worst

    def flip_up(j: int):
        nonlocal flips
        bits[j] = 1
        ones[neighbors(j)] += 1
        flips += 1

    def flip_down(j: int):
        nonlocal flips
        bits[j] = 0
        ones[neighbors(j)] -= 1
        flips += 1

    for i in support:
        row = graph.adj[i]
        while ones[i] < need:
            if flips > flip_cap:
                return None
            cands = [j for j in row if not bits[j]]
            if not cands:
                return None  # d < need can't happen; all set yet still short is a bug
            scored = sorted(cands, key=lambda j: -slack_after_flip(j))
            flip_up(scored[0])

    # repair zero-positions pushed past their tolerance
    pending = [v for v in np.nonzero((ones > cap) & (x == 0))[0]]
    while pending:
        if flips > flip_cap:
            return None
        v = pending.pop()
        if ones[v] <= cap or x[v]:
            continue
        row = graph.adj[v]
        set_bits = [j for j in row if bits[j]]
        rng.shuffle(set_bits)
        # prefer down-flips whose support neighbors keep their majorities
        def down_cost(j):
            c = 0
            for u in neighbors(j):
                if x[u] and ones[u] - 1 < need:
                    c += 1
            return c
        set_bits.sort(key=down_cost)
        for j in set_bits:
            if ones[v] <= cap:
                break
            flip_down(j)
            for u in neighbors(j):
                if x[u] and ones[u] < need:
                    # re-satisfy that support position with its safest spare bit
                    spare = [jj for jj in graph.adj[u] if not bits[jj]]
                    if not spare:
                        return None
                    spare.sort(key=lambda jj: -slack_after_flip(jj))
                    flip_up(spare[0])
                    if flips > flip_cap:
                        return None
        pending.extend(np.nonzero((ones > cap) & (x == 0))[0].tolist())
        if len(pending) > 4 * graph.n_left:
            return None
    return bits


def _union_probe_bits(graph: BitprobeGraph, support) -> np.ndarray:
    if len(support) == 0:
        return np.zeros(0, dtype=np.int64)
    return np.unique(graph.adj[np.asarray(support, dtype=np.int64)])


def exhaustive_encode(graph: BitprobeGraph, x: np.ndarray) -> np.ndarray | None:
    """Complete search over assignments of the support's probe union.

    Ones outside the union only hurt zero-positions, so restricting the search
    there loses nothing: if this fails, no assignment exists for this graph.
    Returns the assignment with the smallest union word, for determinism.
    """
    union = _union_probe_bits(graph, np.nonzero(x)[0])
    k = len(union)
    if k > EXHAUSTIVE_UNION_LIMIT:
        raise ValueError(f"probe union has {k} bits, exhaustive limit is "
                         f"{EXHAUSTIVE_UNION_LIMIT}")
    bits = np.zeros(graph.n_right, dtype=np.uint8)
    if k == 0:
        return bits if not x.any() else None
    affected = np.unique(np.nonzero(np.isin(graph.adj, union).any(axis=1))[0])
    # incidence[t, v] = how many of position v's probes hit union bit t
    incidence = np.zeros((k, len(affected)), dtype=np.int64)
    pos = {int(j): t for t, j in enumerate(union)}
    for vi, v in enumerate(affected):
        for j in graph.adj[v]:
            t = pos.get(int(j))
            if t is not None:
                incidence[t, vi] += 1
    need = (graph.degree + 1) // 2
    target = x[affected].astype(bool)
    shifts = np.arange(k, dtype=np.uint64)
    chunk = 1 << 16
    for start in range(0, 1 << k, chunk):
        stop = min(start + chunk, 1 << k)
        words = np.arange(start, stop, dtype=np.uint64)
        assign = ((words[:, None] >> shifts[None, :]) & 1).astype(np.int64)
        counts = assign @ incidence
        match = np.nonzero(((counts >= need) == target[None, :]).all(axis=1))[0]
        if match.size:
            bits[union] = assign[match[0]].astype(np.uint8)
            return bits
    return None


def encode(graph: BitprobeGraph, vec: SparseVector, max_retries: int = 8,
           c1: float = 1.0, c2: float = 16.0) -> StoredBits:
    """Store a sparse vector; the result decodes exactly at every position.

    The sparsity budget (|support| <= delta*N) is the caller's contract; it is
    checked here.  If the given graph admits no assignment, fresh graphs from
    derived seeds are tried, and the effective graph rides along in the result.
    """
    if vec.n != graph.n_left:
        raise ValueError("vector length does not match graph")
    if not vec.budget_ok(graph.delta):
        raise EncodingError(
            f"support {len(vec.support)} exceeds budget {graph.delta * vec.n:.1f}")
    x = np.zeros(vec.n, dtype=np.uint8)
    x[list(vec.support)] = 1

    g = graph
    for attempt in range(max_retries + 1):
        rng = np.random.default_rng(np.random.SeedSequence([g.seed, 0xB17, attempt]))
        bits = _try_solve(g, x, rng)
        if bits is None and len(_union_probe_bits(g, vec.support)) <= EXHAUSTIVE_UNION_LIMIT:
            bits = exhaustive_encode(g, x)
        if bits is not None and np.array_equal(decode_all(g, bits), x):
            out = bits.astype(np.uint8)
            out.setflags(write=False)
            return StoredBits(graph=g, bits=out)
        derived = int(np.random.SeedSequence([graph.seed, 0x5EED, attempt + 1])
                      .generate_state(1)[0])
        g = build_graph(graph.n_left, graph.delta, derived, c1=c1, c2=c2)
    raise EncodingError(f"no assignment found after {max_retries} graph retries")


_MAGIC = b"LBP1"


def stored_to_bytes(stored: StoredBits) -> bytes:
    g = stored.graph
    header = struct.pack("<4sQQQQd", _MAGIC, g.n_left, g.n_right, g.degree,
                         g.seed & 0xFFFFFFFFFFFFFFFF, g.delta)
    return header + np.packbits(stored.bits).tobytes()


def stored_from_bytes(data: bytes, c1: float = 1.0, c2: float = 16.0) -> StoredBits:
    head_len = struct.calcsize("<4sQQQQd")
    magic, n, m, d, seed, delta = struct.unpack("<4sQQQQd", data[:head_len])
    if magic != _MAGIC:
        raise ValueError("not a stored-bits blob")
    graph = build_graph(int(n), float(delta), int(seed), c1=c1, c2=c2)
    if graph.n_right != m or graph.degree != d:
        raise ValueError("graph parameters do not reproduce; constants mismatch")
    bits = np.unpackbits(np.frombuffer(data[head_len:], dtype=np.uint8))[:m].astype(np.uint8)
    return StoredBits(graph=graph, bits=bits)
