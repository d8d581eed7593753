"""Desk-scale simulator of the three-layer locally-decodable coding scheme.

Each encoder splits its length n*b source stream into n blocks of b symbols
and sends three layers:

1. a typicality layer: a random codebook over the auxiliary alphabet; each
   block maps to the first codeword robustly jointly typical with it (index 0
   when none is), at rate I(X;U) + rate_slack bits per symbol;
2. an exact-fallback layer: for blocks whose typicality encoding failed, the
   raw symbols in fixed width, prefixed by an always-one flag bit, so a failed
   block is never the all-zero word; successful blocks contribute all zeros;
3. a bitprobe layer: the concatenated fallback words form a sparse bit vector
   (at most 2*delta*n nonzero blocks in the typical regime), stored in an
   expander bitprobe structure whose probe count per bit is independent of n.

A decoder reconstructs any single symbol position by probing: both fallback
windows for that block (via the expander), plus both typicality indices.  The
reconstruction cases mirror which sides fell back: none (shared ball center
g(u1, u2)), one (partial tables g1/g2 built from any positively-correlated
opposite group), or both (the exact function value).  Whenever both fallback
budgets hold, every reconstructed symbol is within epsilon of the target.

The side-information variant encodes side 1 only; the decoder holds the side-2
sequence and uses the per-(group, symbol) centers directly.

All randomness derives from one master seed: per-layer and per-trial streams
use fixed tags, so reports are reproducible bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .expander import (ProbeCounter, SparseVector, StoredBits, build_graph,
                       decode_all, decode_bit, encode)
from .optimizer import mutual_information_bits
from .regions import RateRegion, SiRateResult
from .sources import ComputeTask, JointSource

DIST_TOL = 1e-9
DELTA_LIMIT = 0.125  # keeps the doubled bitprobe budget below the 1/4 bound


class CodebookError(RuntimeError):
    """Typicality layer misses its failure target; carries the measured value."""

    def __init__(self, message: str, measured: float):
        super().__init__(message)
        self.measured = measured


@dataclass(frozen=True)
class AuxChannel:
    """One side's auxiliary variable: its groups and the conditional p(u|x)."""

    groups: tuple[tuple[int, ...], ...]
    cond: np.ndarray  # (n_symbols, n_groups)

    @property
    def n_symbols(self) -> int:
        return self.cond.shape[0]

    @property
    def n_groups(self) -> int:
        return self.cond.shape[1]


@dataclass(frozen=True)
class CodecWitness:
    """Everything the codec needs from a region/rate computation."""

    mode: str  # "distributed" | "side_info"
    epsilon: float
    aux1: AuxChannel
    aux2: AuxChannel | None
    centers: dict  # distributed: (i1,i2)->center; side-info: (i,j)->center


def distributed_witness(region: RateRegion, index: int) -> CodecWitness:
    try:
        w = region.witnesses[index]
    except IndexError:
        raise ValueError(f"region has {len(region.witnesses)} witnesses, "
                         f"index {index} is out of range") from None
    return CodecWitness(
        mode="distributed", epsilon=region.epsilon,
        aux1=AuxChannel(w.graph.g1.groups, w.cond1),
        aux2=AuxChannel(w.graph.g2.groups, w.cond2),
        centers=dict(w.graph.centers),
    )


def si_witness(result: SiRateResult) -> CodecWitness:
    return CodecWitness(
        mode="side_info", epsilon=result.epsilon,
        aux1=AuxChannel(result.graph.groups, result.opt.argmin),
        aux2=None, centers=dict(result.graph.centers),
    )


@dataclass(frozen=True)
class CodecConfig:
    block_len: int
    delta: float
    typ_slack: float = 0.75
    rate_slack: float = 0.15
    expander_c1: float = 1.0
    expander_c2: float = 16.0
    table_cap: int = 1 << 16
    exact_cap: int = 100_000
    mc_samples: int = 100_000
    max_budget_doublings: int = 3
    # strict: reject configurations whose measured layer-1 failure exceeds
    # delta.  Off, the run proceeds and reports the measured frontier; the
    # fallback layer keeps reconstructions correct either way.
    strict: bool = True

    def __post_init__(self):
        if self.block_len < 1:
            raise ValueError("block_len must be positive")
        if not 0.0 < self.delta < DELTA_LIMIT:
            raise ValueError(f"delta must lie in (0, {DELTA_LIMIT})")
        if self.typ_slack <= 0:
            raise ValueError("typ_slack must be positive")
        if self.rate_slack <= 0:
            raise ValueError("rate_slack must be positive")


class TypicalityCodebook:
    """Random codebook plus the integer count bounds defining joint typicality."""

    def __init__(self, codewords: np.ndarray, lo: np.ndarray, hi: np.ndarray,
                 m1_bits: int, n_symbols: int, seed: int):
        self.codewords = codewords  # (L, b) group indices
        self.lo = lo  # (nx, nu) lower count bounds
        self.hi = hi
        self.m1_bits = m1_bits
        self.n_symbols = n_symbols
        self.seed = seed
        self.b = codewords.shape[1]
        self.measured_failure = float("nan")
        self.estimate_method = ""
        self._table: tuple[np.ndarray, np.ndarray] | None = None  # (idx, found)

    def jointly_typical(self, xseq: np.ndarray, useq: np.ndarray) -> np.ndarray:
        m = xseq.shape[0]
        ok = np.ones(m, dtype=bool)
        nx, nu = self.lo.shape
        for x in range(nx):
            xm = xseq == x
            for u in range(nu):
                cnt = (xm & (useq == u)).sum(axis=1)
                ok &= (cnt >= self.lo[x, u] - 1e-9) & (cnt <= self.hi[x, u] + 1e-9)
        return ok

    def _scan(self, xseq: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """First typical codeword per row: (index, found). Index 0 when none."""
        m = xseq.shape[0]
        idx = np.zeros(m, dtype=np.int64)
        found = np.zeros(m, dtype=bool)
        remaining = np.arange(m)
        for t in range(len(self.codewords)):
            if remaining.size == 0:
                break
            cw = np.broadcast_to(self.codewords[t], (remaining.size, self.b))
            hit = self.jointly_typical(xseq[remaining], cw)
            hits = remaining[hit]
            idx[hits] = t
            found[hits] = True
            remaining = remaining[~hit]
        return idx, found

    def _flat_index(self, xseq: np.ndarray) -> np.ndarray:
        weights = self.n_symbols ** np.arange(self.b - 1, -1, -1, dtype=np.int64)
        return xseq @ weights

    def _all_sequences(self) -> np.ndarray:
        total = self.n_symbols ** self.b
        flat = np.arange(total)
        return np.array(np.unravel_index(flat, (self.n_symbols,) * self.b)).T

    def build_table(self):
        if self._table is None:
            seqs = self._all_sequences()
            self._table = self._scan(seqs)
        return self._table

    def encode_blocks(self, xseq: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        if self._table is not None:
            idx, found = self._table
            flat = self._flat_index(xseq)
            return idx[flat], found[flat]
        return self._scan(xseq)

    def decode_indices(self, idx: np.ndarray) -> np.ndarray:
        return self.codewords[idx]


def build_typicality_codebook(px, aux: AuxChannel, b: int, typ_slack: float,
                              delta: float, rate_slack: float, seed: int,
                              table_cap: int = 1 << 16,
                              exact_cap: int = 100_000,
                              mc_samples: int = 100_000,
                              strict: bool = True) -> TypicalityCodebook:
    """Draw the layer-1 codebook and measure its block failure probability.

    When `strict`, raises CodebookError (carrying the measurement) if the
    failure probability exceeds `delta`; the remedy is a larger block length
    or a looser failure target.  Non-strict callers get the codebook with the
    measured value attached regardless.
    """
    px = np.asarray(px, dtype=float)
    nx, nu = aux.cond.shape
    rate_target = mutual_information_bits(px, aux.cond) + rate_slack
    m1_bits = max(1, math.ceil(b * rate_target - 1e-9))
    q = px @ aux.cond
    q = np.maximum(q, 0)
    q = q / q.sum()
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0xC0DE]))
    codewords = rng.choice(nu, size=(2 ** m1_bits, b), p=q).astype(np.int64)

    bp = b * (px[:, None] * aux.cond)
    lo = bp * (1.0 - typ_slack)
    hi = bp * (1.0 + typ_slack)
    book = TypicalityCodebook(codewords, lo, hi, m1_bits, nx, int(seed))

    total = nx ** b
    if total <= min(table_cap, exact_cap):
        idx, found = book.build_table()
        seq_logp = np.log(np.maximum(px, 1e-300))[book._all_sequences()].sum(axis=1)
        probs = np.exp(seq_logp)
        book.measured_failure = float(probs[~found].sum())
        book.estimate_method = "exact"
    elif total <= exact_cap:
        seqs = book._all_sequences()
        _, found = book._scan(seqs)
        probs = np.exp(np.log(np.maximum(px, 1e-300))[seqs].sum(axis=1))
        book.measured_failure = float(probs[~found].sum())
        book.estimate_method = "exact"
    else:
        mc_rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0x3A3]))
        samples = mc_rng.choice(nx, size=(mc_samples, b), p=px / px.sum())
        _, found = book._scan(samples)
        book.measured_failure = float((~found).mean())
        book.estimate_method = f"monte-carlo({mc_samples})"

    if strict and book.measured_failure > delta:
        raise CodebookError(
            f"layer-1 failure {book.measured_failure:.4f} exceeds target {delta}; "
            f"increase the block length or the failure target",
            measured=book.measured_failure,
        )
    return book


def symbol_width(n_symbols: int) -> int:
    return (n_symbols - 1).bit_length()


def build_fallback_stream(xseq: np.ndarray, fallback_mask: np.ndarray,
                          n_symbols: int) -> np.ndarray:
    """Layer-2 bit stream: per block, flag bit then fixed-width symbols.

    Blocks outside the fallback set are all-zero windows; inside it the flag
    bit is 1, so a fallback word can never be mistaken for a clean block.
    """
    return _stream_with_width(xseq, fallback_mask, symbol_width(n_symbols))


def _stream_with_width(xseq: np.ndarray, fallback_mask: np.ndarray, w: int) -> np.ndarray:
    n, b = xseq.shape
    window = 1 + b * w
    out = np.zeros((n, window), dtype=np.uint8)
    if fallback_mask.any() and w > 0:
        rows = np.nonzero(fallback_mask)[0]
        shifts = np.arange(w - 1, -1, -1)
        payload = ((xseq[rows, :, None] >> shifts[None, None, :]) & 1).astype(np.uint8)
        out[rows, 0] = 1
        out[rows, 1:] = payload.reshape(len(rows), b * w)
    elif fallback_mask.any():
        out[np.nonzero(fallback_mask)[0], 0] = 1
    return out.reshape(n * window)


def parse_fallback_windows(stream_bits: np.ndarray, n: int, b: int, w: int):
    """Split a recovered layer-2 stream into flags and symbol rows."""
    window = 1 + b * w
    mat = stream_bits.reshape(n, window)
    flags = mat[:, 0].astype(bool)
    if w == 0:
        return flags, np.zeros((n, b), dtype=np.int64)
    payload = mat[:, 1:].reshape(n, b, w)
    shifts = np.arange(w - 1, -1, -1)
    vals = (payload.astype(np.int64) << shifts[None, None, :]).sum(axis=2)
    return flags, vals


@dataclass
class EncodedMessage:
    side: int
    n_blocks: int
    indices: np.ndarray  # (n,) layer-1 codeword indices
    m1_bits: int
    width: int  # layer-2 symbol width
    stored: StoredBits
    delta_store: float
    budget_breach: bool
    fallback_mask: np.ndarray = field(repr=False)  # encoder-side bookkeeping

    @property
    def total_bits(self) -> int:
        return self.n_blocks * self.m1_bits + self.stored.graph.n_right


def encode_side(xseq: np.ndarray, book: TypicalityCodebook, delta: float,
                seed: int, side: int, c1: float = 1.0, c2: float = 16.0,
                max_budget_doublings: int = 3) -> EncodedMessage:
    """Run one encoder over its n x b symbol block matrix."""
    n, b = xseq.shape
    idx, _ = book.encode_blocks(xseq)
    useq = book.decode_indices(idx)
    typical = book.jointly_typical(xseq, useq)
    fallback = ~typical
    w = symbol_width(book.n_symbols)
    stream = _stream_with_width(xseq, fallback, w)
    n3 = stream.shape[0]
    support = tuple(np.nonzero(stream)[0].tolist())

    delta_store = 2.0 * delta
    breach = False
    attempt = 0
    while len(support) > delta_store * n3:
        if attempt >= max_budget_doublings:
            raise CodebookError(
                f"fallback stream weight {len(support)} exceeds every budget", 1.0)
        delta_store = min(2.0 * delta_store, 0.2499)
        breach = True
        attempt += 1
    graph_seed = int(np.random.SeedSequence([int(seed), side, attempt]).generate_state(1)[0])
    graph = build_graph(n3, delta_store, graph_seed, c1=c1, c2=c2)
    stored = encode(graph, SparseVector(n3, support), c1=c1, c2=c2)
    return EncodedMessage(side=side, n_blocks=n, indices=idx, m1_bits=book.m1_bits,
                          width=w, stored=stored, delta_store=delta_store,
                          budget_breach=breach, fallback_mask=fallback)


def derive_partial_reconstructions(source: JointSource, task: ComputeTask,
                                   witness: CodecWitness):
    """Tables g1[u1, x2] and g2[x1, u2] for the one-sided-fallback cases.

    Each entry reuses the shared center g(u1, u2') for a deterministically
    chosen opposite group u2' with p(u2'|x2) > 0 (the highest-probability one,
    first index on ties).  The construction is verified against the distortion
    bound for every positive-probability triple before being returned.
    """
    if witness.mode != "distributed":
        raise ValueError("partial reconstructions apply to the distributed mode")
    aux1, aux2 = witness.aux1, witness.aux2
    n1, n2 = aux1.n_symbols, aux2.n_symbols
    g_tab = _center_table(witness, task)

    pick2 = np.argmax(aux2.cond, axis=1)  # x2 -> u2'
    pick1 = np.argmax(aux1.cond, axis=1)
    g1_tab = g_tab[:, pick2]  # (nu1, nx2[, dim])
    g2_tab = g_tab[pick1, :]  # (nx1, nu2[, dim])

    for x1 in range(n1):
        for x2 in range(n2):
            if source.pmf[x1, x2] <= 0:
                continue
            for u1 in range(aux1.n_groups):
                if aux1.cond[x1, u1] > 0:
                    _check_within(task, task.values[x1, x2], g1_tab[u1, x2],
                                  witness.epsilon, "g1")
            for u2 in range(aux2.n_groups):
                if aux2.cond[x2, u2] > 0:
                    _check_within(task, task.values[x1, x2], g2_tab[x1, u2],
                                  witness.epsilon, "g2")
    return g1_tab, g2_tab


def _center_value(task: ComputeTask, center):
    if task.space.kind == "finite":
        return task.space.symbol_index(center)
    return np.asarray(center, dtype=float)


def _center_table(witness: CodecWitness, task: ComputeTask) -> np.ndarray:
    if witness.mode == "distributed":
        nu1, nu2 = witness.aux1.n_groups, witness.aux2.n_groups
        if task.space.kind == "finite":
            tab = np.zeros((nu1, nu2), dtype=np.int64)
        else:
            tab = np.zeros((nu1, nu2, task.space.dimension))
        for (i1, i2), center in witness.centers.items():
            tab[i1, i2] = _center_value(task, center)
        return tab
    nu = witness.aux1.n_groups
    n2 = max(j for _, j in witness.centers) + 1
    if task.space.kind == "finite":
        tab = np.zeros((nu, n2), dtype=np.int64)
    else:
        tab = np.zeros((nu, n2, task.space.dimension))
    for (gi, j), center in witness.centers.items():
        tab[gi, j] = _center_value(task, center)
    return tab


def _check_within(task: ComputeTask, z, zhat, epsilon: float, tag: str):
    if task.space.kind == "finite":
        dist = float(task.space.table[int(z), int(zhat)])
    else:
        dist = float(np.sqrt(((np.asarray(z) - np.asarray(zhat)) ** 2).sum()))
    if dist > epsilon + DIST_TOL * max(1.0, epsilon):
        raise ValueError(f"{tag} breaks the distortion bound: {dist} > {epsilon}")


@dataclass
class DecodeContext:
    mode: str
    b: int
    space_kind: str
    f_table: np.ndarray
    g_table: np.ndarray  # distributed: (nu1, nu2); side_info: (nu1, n2)
    g1_table: np.ndarray | None
    g2_table: np.ndarray | None
    book1: TypicalityCodebook
    book2: TypicalityCodebook | None


def make_decode_context(source: JointSource, task: ComputeTask,
                        witness: CodecWitness, book1: TypicalityCodebook,
                        book2: TypicalityCodebook | None) -> DecodeContext:
    g_tab = _center_table(witness, task)
    g1_tab = g2_tab = None
    if witness.mode == "distributed":
        g1_tab, g2_tab = derive_partial_reconstructions(source, task, witness)
    return DecodeContext(mode=witness.mode, b=book1.b, space_kind=task.space.kind,
                         f_table=task.values, g_table=g_tab, g1_table=g1_tab,
                         g2_table=g2_tab, book1=book1, book2=book2)


def _window_bits(msg: EncodedMessage, i: int, b: int,
                 counter: ProbeCounter | None) -> np.ndarray:
    window = 1 + b * msg.width
    start = i * window
    out = np.empty(window, dtype=np.uint8)
    for t in range(window):
        out[t] = decode_bit(msg.stored.graph, msg.stored.bits, start + t, counter)
    return out


def local_decode(i: int, j: int, msg1: EncodedMessage, msg2: EncodedMessage | None,
                 side2_seq: np.ndarray | None, ctx: DecodeContext,
                 counter: ProbeCounter | None = None):
    """Reconstruct the single symbol at block i, offset j.

    The probe pattern is fixed: both fallback windows through the expander and
    both layer-1 indices are always read, so the count per symbol is a
    constant of the configuration.  Returns a reconstruction-space symbol
    index (finite) or a vector (euclidean).
    """
    b = ctx.b
    win1 = _window_bits(msg1, i, b, counter)
    if counter is not None:
        counter.add(msg1.m1_bits)
    flag1, x1_rec = _parse_window(win1, b, msg1.width)
    u1 = ctx.book1.codewords[msg1.indices[i]]

    if ctx.mode == "side_info":
        x2 = int(side2_seq[i, j])
        if not flag1:
            return ctx.g_table[u1[j], x2]
        return ctx.f_table[x1_rec[j], x2]

    win2 = _window_bits(msg2, i, b, counter)
    if counter is not None:
        counter.add(msg2.m1_bits)
    flag2, x2_rec = _parse_window(win2, b, msg2.width)
    u2 = ctx.book2.codewords[msg2.indices[i]]

    if not flag1 and not flag2:
        return ctx.g_table[u1[j], u2[j]]
    if not flag1:
        return ctx.g1_table[u1[j], x2_rec[j]]
    if not flag2:
        return ctx.g2_table[x1_rec[j], u2[j]]
    return ctx.f_table[x1_rec[j], x2_rec[j]]


def _parse_window(window_bits: np.ndarray, b: int, w: int):
    flag = bool(window_bits[0])
    if w == 0:
        return flag, np.zeros(b, dtype=np.int64)
    payload = window_bits[1:].reshape(b, w).astype(np.int64)
    shifts = np.arange(w - 1, -1, -1)
    return flag, (payload << shifts[None, :]).sum(axis=1)


def probe_cost_per_symbol(msg: EncodedMessage, b: int) -> int:
    window = 1 + b * msg.width
    return msg.m1_bits + window * msg.stored.graph.degree


def decode_message(msg1: EncodedMessage, msg2: EncodedMessage | None,
                   side2_seq: np.ndarray | None, ctx: DecodeContext) -> np.ndarray:
    """Vectorized whole-stream decode; equals local_decode at every position."""
    b = ctx.b
    n = msg1.n_blocks
    stream1 = decode_all(msg1.stored.graph, msg1.stored.bits)
    flags1, x1_rec = parse_fallback_windows(stream1, n, b, msg1.width)
    u1 = ctx.book1.codewords[msg1.indices]  # (n, b)

    if ctx.mode == "side_info":
        fb = flags1[:, None] if ctx.space_kind == "finite" else flags1[:, None, None]
        return np.where(fb, ctx.f_table[x1_rec, side2_seq],
                        ctx.g_table[u1, side2_seq])

    stream2 = decode_all(msg2.stored.graph, msg2.stored.bits)
    flags2, x2_rec = parse_fallback_windows(stream2, n, b, msg2.width)
    u2 = ctx.book2.codewords[msg2.indices]

    case_ff = (~flags1 & ~flags2)[:, None]
    case_ft = (~flags1 & flags2)[:, None]
    case_tf = (flags1 & ~flags2)[:, None]
    if ctx.space_kind == "finite":
        out = np.where(case_ff, ctx.g_table[u1, u2],
                       np.where(case_ft, ctx.g1_table[u1, x2_rec],
                                np.where(case_tf, ctx.g2_table[x1_rec, u2],
                                         ctx.f_table[x1_rec, x2_rec])))
        return out
    sel = (case_ff[..., None], case_ft[..., None], case_tf[..., None])
    out = np.where(sel[0], ctx.g_table[u1, u2],
                   np.where(sel[1], ctx.g1_table[u1, x2_rec],
                            np.where(sel[2], ctx.g2_table[x1_rec, u2],
                                     ctx.f_table[x1_rec, x2_rec])))
    return out


def _distortions(task: ComputeTask, z_true: np.ndarray, z_hat: np.ndarray) -> np.ndarray:
    if task.space.kind == "finite":
        return task.space.table[z_true, z_hat]
    return np.sqrt(((z_true - z_hat) ** 2).sum(axis=-1))


@dataclass
class CodecReport:
    mode: str
    block_len: int
    delta: float
    typ_slack: float
    rate_slack: float
    seed: int
    rate_targets: tuple[float, ...]
    codebook_failures: tuple[float, ...]
    codebook_methods: tuple[str, ...]
    rows: list[dict]

    def to_json_dict(self) -> dict:
        return {
            "mode": self.mode,
            "block_len": self.block_len,
            "delta": self.delta,
            "typ_slack": self.typ_slack,
            "rate_slack": self.rate_slack,
            "seed": self.seed,
            "rate_targets": list(self.rate_targets),
            "codebook_failures": list(self.codebook_failures),
            "codebook_methods": list(self.codebook_methods),
            "rows": self.rows,
        }

    CSV_FIELDS = ["n", "delta", "trials", "max_symbol_err_freq", "mean_symbol_err_freq",
                  "within_eps_when_budgets_hold", "rate1_layer1", "rate1_total",
                  "rate2_layer1", "rate2_total", "probes1_per_symbol",
                  "probes2_per_symbol", "breach_freq1", "breach_freq2",
                  "fallback_mean1", "fallback_mean2", "budget_threshold"]

    def csv_rows(self):
        for row in self.rows:
            yield [row.get(k, "") for k in self.CSV_FIELDS]


def run_experiment(source: JointSource, task: ComputeTask, witness: CodecWitness,
                   config: CodecConfig, n_values, trials: int,
                   seed: int) -> CodecReport:
    """Monte-Carlo the codec over block counts; everything derives from `seed`."""
    b = config.block_len
    si = witness.mode == "side_info"
    px1 = source.marginal1

    book1 = build_typicality_codebook(
        px1, witness.aux1, b, config.typ_slack, config.delta, config.rate_slack,
        int(np.random.SeedSequence([seed, 1, 0xB00C]).generate_state(1)[0]),
        table_cap=config.table_cap, exact_cap=config.exact_cap,
        mc_samples=config.mc_samples, strict=config.strict)
    book2 = None
    targets = [mutual_information_bits(px1, witness.aux1.cond)]
    failures = [book1.measured_failure]
    methods = [book1.estimate_method]
    if not si:
        book2 = build_typicality_codebook(
            source.marginal2, witness.aux2, b, config.typ_slack, config.delta,
            config.rate_slack,
            int(np.random.SeedSequence([seed, 2, 0xB00C]).generate_state(1)[0]),
            table_cap=config.table_cap, exact_cap=config.exact_cap,
            mc_samples=config.mc_samples, strict=config.strict)
        targets.append(mutual_information_bits(source.marginal2, witness.aux2.cond))
        failures.append(book2.measured_failure)
        methods.append(book2.estimate_method)

    ctx = make_decode_context(source, task, witness, book1, book2)
    flat_pmf = source.pmf.ravel()
    flat_pmf = flat_pmf / flat_pmf.sum()
    n2 = len(source.alph2)

    rows = []
    for n in n_values:
        n = int(n)
        err_rows = []
        j_counts = ([], [])
        breach_flags = ([], [])
        within = True
        probes = [None, None]
        total_bits = [None, None]
        for trial in range(trials):
            trng = np.random.default_rng(np.random.SeedSequence([seed, n, trial, 0xDA7A]))
            cells = trng.choice(flat_pmf.size, size=n * b, p=flat_pmf)
            x1 = (cells // n2).reshape(n, b)
            x2 = (cells % n2).reshape(n, b)

            msg1 = encode_side(x1, book1, config.delta,
                               seed=int(np.random.SeedSequence([seed, n, trial, 1]).generate_state(1)[0]),
                               side=1, c1=config.expander_c1, c2=config.expander_c2,
                               max_budget_doublings=config.max_budget_doublings)
            msgs = [msg1]
            if si:
                zhat = decode_message(msg1, None, x2, ctx)
            else:
                msg2 = encode_side(x2, book2, config.delta,
                                   seed=int(np.random.SeedSequence([seed, n, trial, 2]).generate_state(1)[0]),
                                   side=2, c1=config.expander_c1, c2=config.expander_c2,
                                   max_budget_doublings=config.max_budget_doublings)
                msgs.append(msg2)
                zhat = decode_message(msg1, msg2, None, ctx)

            z_true = task.values[x1, x2]
            dist = _distortions(task, z_true, zhat)
            err_rows.append((dist > task.epsilon + DIST_TOL * max(1.0, task.epsilon)).ravel())

            budgets_ok = True
            for k, msg in enumerate(msgs):
                jc = int(msg.fallback_mask.sum())
                j_counts[k].append(jc)
                breach_flags[k].append(msg.budget_breach)
                budgets_ok &= jc <= 2 * n * config.delta
                probes[k] = probe_cost_per_symbol(msg, b)
                total_bits[k] = msg.total_bits
            if budgets_ok and err_rows[-1].any():
                within = False

        err = np.array(err_rows)
        row = {
            "n": n,
            "delta": config.delta,
            "trials": trials,
            "max_symbol_err_freq": float(err.mean(axis=0).max()),
            "mean_symbol_err_freq": float(err.mean()),
            "within_eps_when_budgets_hold": bool(within),
            "budget_threshold": 2 * n * config.delta,
        }
        for k in range(2 if not si else 1):
            jarr = np.array(j_counts[k])
            side = k + 1
            row[f"rate{side}_layer1"] = (book1 if k == 0 else book2).m1_bits / b
            row[f"rate{side}_total"] = total_bits[k] / (n * b)
            row[f"probes{side}_per_symbol"] = probes[k]
            row[f"breach_freq{side}"] = float((jarr > 2 * n * config.delta).mean())
            row[f"fallback_mean{side}"] = float(jarr.mean())
            row[f"fallback_max{side}"] = int(jarr.max())
            row[f"expander_fallback_freq{side}"] = float(np.mean(breach_flags[k]))
        rows.append(row)

    return CodecReport(mode=witness.mode, block_len=b, delta=config.delta,
                       typ_slack=config.typ_slack, rate_slack=config.rate_slack,
                       seed=seed, rate_targets=tuple(targets),
                       codebook_failures=tuple(failures),
                       codebook_methods=tuple(methods), rows=rows)
