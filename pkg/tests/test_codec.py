import json
import math

import numpy as np
import pytest

from loccomp.catalog import binary_and_gate, card_game
from loccomp.codec import (AuxChannel, CodebookError, CodecConfig,
                           build_fallback_stream, build_typicality_codebook,
                           distributed_witness, encode_side, local_decode,
                           make_decode_context, parse_fallback_windows,
                           probe_cost_per_symbol, run_experiment, si_witness,
                           symbol_width, decode_message)
from loccomp.expander import ProbeCounter
from loccomp.regions import rate_si, region_distributed

IDENT2 = AuxChannel(groups=((0,), (1,)), cond=np.eye(2))


def _and_setup(epsilon=0.5):
    source, task = binary_and_gate(0.1, epsilon)
    region = region_distributed(source, task)
    return source, task, distributed_witness(region, 0)


def _oracle_typical(xrow, urow, px, cond, b, slack):
    # per-pair count bounds restated from scratch: zero-probability pairs
    # must not appear at all
    nx, nu = cond.shape
    for x in range(nx):
        for u in range(nu):
            cnt = int(np.sum((xrow == x) & (urow == u)))
            expect = b * px[x] * cond[x, u]
            if cnt < expect * (1 - slack) - 1e-9:
                return False
            if cnt > expect * (1 + slack) + 1e-9:
                return False
    return True


def test_joint_typicality_matches_reference_counting():
    source, _ = binary_and_gate(0.1, 0.5)
    book = build_typicality_codebook(source.marginal1, IDENT2, 8, 0.75, 0.05,
                                     0.15, seed=42)
    rng = np.random.default_rng(5)
    xseq = rng.integers(0, 2, size=(200, 8))
    useq = rng.integers(0, 2, size=(200, 8))
    got = book.jointly_typical(xseq, useq)
    want = [_oracle_typical(x, u, source.marginal1, IDENT2.cond, 8, 0.75)
            for x, u in zip(xseq, useq)]
    assert got.tolist() == want
    assert any(want) and not all(want)


def test_table_and_scan_encoders_agree():
    source, _ = binary_and_gate(0.1, 0.5)
    book = build_typicality_codebook(source.marginal1, IDENT2, 8, 0.75, 0.05,
                                     0.15, seed=42)
    rng = np.random.default_rng(7)
    xseq = rng.integers(0, 2, size=(500, 8))
    scan_idx, scan_found = book._scan(xseq)
    book.build_table()
    tab_idx, tab_found = book.encode_blocks(xseq)
    assert np.array_equal(scan_idx, tab_idx)
    assert np.array_equal(scan_found, tab_found)


def test_codebook_failure_exact_vs_monte_carlo():
    source, _ = binary_and_gate(0.1, 0.5)
    exact = build_typicality_codebook(source.marginal1, IDENT2, 8, 0.75, 0.05,
                                      0.15, seed=42)
    mc = build_typicality_codebook(source.marginal1, IDENT2, 8, 0.75, 0.05,
                                   0.15, seed=42, table_cap=10, exact_cap=10,
                                   mc_samples=100_000)
    assert exact.estimate_method == "exact"
    assert mc.estimate_method.startswith("monte-carlo")
    p = exact.measured_failure
    sigma = math.sqrt(p * (1 - p) / 100_000)
    assert abs(mc.measured_failure - p) <= 3 * sigma


def test_underprovisioned_codebook_is_rejected_with_measurement():
    source, _ = binary_and_gate(0.1, 0.5)
    with pytest.raises(CodebookError) as exc:
        build_typicality_codebook(source.marginal1, IDENT2, 8, 0.75, 0.05,
                                  rate_slack=-0.5, seed=42)
    assert exc.value.measured > 0.05
    relaxed = build_typicality_codebook(source.marginal1, IDENT2, 8, 0.75,
                                        0.05, rate_slack=-0.5, seed=42,
                                        strict=False)
    assert relaxed.measured_failure == pytest.approx(exc.value.measured)


def test_config_validation():
    with pytest.raises(ValueError):
        CodecConfig(block_len=0, delta=0.05)
    with pytest.raises(ValueError):
        CodecConfig(block_len=8, delta=0.2)
    with pytest.raises(ValueError):
        CodecConfig(block_len=8, delta=0.05, typ_slack=0.0)
    with pytest.raises(ValueError):
        CodecConfig(block_len=8, delta=0.05, rate_slack=0.0)


def test_symbol_width_goldens():
    assert [symbol_width(n) for n in (1, 2, 3, 4, 5, 8, 9)] == [0, 1, 2, 2, 3, 3, 4]


def test_fallback_stream_round_trip():
    rng = np.random.default_rng(11)
    xseq = rng.integers(0, 5, size=(20, 6))
    mask = rng.random(20) < 0.3
    stream = build_fallback_stream(xseq, mask, 5)
    assert stream.shape == (20 * (1 + 6 * 3),)
    flags, vals = parse_fallback_windows(stream, 20, 6, 3)
    assert np.array_equal(flags, mask)
    assert np.array_equal(vals[mask], xseq[mask])
    assert not vals[~mask].any()


def _crafted_block_matrix(book, zero_block_positions, n):
    """n blocks equal to a mixed-composition codeword, all-zero where flagged."""
    mixed = next(row for row in book.codewords if 0 < row.sum() < book.b)
    x = np.tile(mixed, (n, 1)).astype(np.int64)
    for i in zero_block_positions:
        x[i] = 0
    return x


def test_distributed_decode_hits_all_four_cases():
    source, task, witness = _and_setup()
    book1 = build_typicality_codebook(source.marginal1, witness.aux1, 6, 0.75,
                                      0.05, 0.15, seed=1, strict=False)
    book2 = build_typicality_codebook(source.marginal2, witness.aux2, 6, 0.75,
                                      0.05, 0.15, seed=2, strict=False)
    # all-zero blocks violate the count bounds (6 > 6*0.5*1.75), so they
    # fall back; codeword-equal blocks stay in layer 1
    x1 = _crafted_block_matrix(book1, [2, 3], 4)
    x2 = _crafted_block_matrix(book2, [1, 3], 4)
    msg1 = encode_side(x1, book1, 0.05, seed=100, side=1)
    msg2 = encode_side(x2, book2, 0.05, seed=100, side=2)
    assert msg1.fallback_mask.tolist() == [False, False, True, True]
    assert msg2.fallback_mask.tolist() == [False, True, False, True]

    ctx = make_decode_context(source, task, witness, book1, book2)
    zhat = decode_message(msg1, msg2, None, ctx)
    assert np.array_equal(zhat, task.values[x1, x2])

    counter = ProbeCounter()
    per = probe_cost_per_symbol(msg1, 6) + probe_cost_per_symbol(msg2, 6)
    for i in range(4):
        for j in range(6):
            before = counter.count
            assert local_decode(i, j, msg1, msg2, None, ctx, counter) == zhat[i, j]
            assert counter.count - before == per


def test_side_info_decode_cases_and_probes():
    source, task = card_game(0.5)
    witness = si_witness(rate_si(source, task))
    book = build_typicality_codebook(source.marginal1, witness.aux1, 6, 1.0,
                                     0.05, 0.25, seed=9, strict=False)
    rng = np.random.default_rng(3)
    n = 8
    x1 = np.zeros((n, 6), dtype=np.int64)
    x2 = np.zeros_like(x1)
    flat = source.pmf.ravel() / source.pmf.sum()
    cells = rng.choice(9, size=n * 6, p=flat)
    x1[:], x2[:] = cells.reshape(n, 6) // 3, cells.reshape(n, 6) % 3
    msg = encode_side(x1, book, 0.05, seed=5, side=1)
    ctx = make_decode_context(source, task, witness, book, None)
    zhat = decode_message(msg, None, x2, ctx)
    z_true = task.values[x1, x2]
    assert (task.space.table[z_true, zhat] <= 0.5).all()

    counter = ProbeCounter()
    per = probe_cost_per_symbol(msg, 6)
    for i in range(n):
        for j in range(6):
            before = counter.count
            assert local_decode(i, j, msg, None, x2, ctx, counter) == zhat[i, j]
            assert counter.count - before == per


def test_tampered_center_is_caught():
    source, task, witness = _and_setup()
    book1 = build_typicality_codebook(source.marginal1, witness.aux1, 8, 0.75,
                                      0.05, 0.15, seed=1)
    book2 = build_typicality_codebook(source.marginal2, witness.aux2, 8, 0.75,
                                      0.05, 0.15, seed=2)
    bad = dict(witness.centers)
    key = next(iter(bad))
    bad[key] = 1 - task.space.symbol_index(bad[key])
    import dataclasses
    tampered = dataclasses.replace(witness, centers=bad)
    with pytest.raises(ValueError, match="distortion"):
        make_decode_context(source, task, tampered, book1, book2)


def test_rate_accounting_is_exact():
    source, task, witness = _and_setup()
    book = build_typicality_codebook(source.marginal1, witness.aux1, 6, 0.75,
                                     0.05, 0.15, seed=1, strict=False)
    x1 = _crafted_block_matrix(book, [0], 16)
    msg = encode_side(x1, book, 0.05, seed=0, side=1)
    assert msg.total_bits == 16 * book.m1_bits + msg.stored.graph.n_right
    assert msg.m1_bits == book.m1_bits == math.ceil(6 * (1.0 + 0.15))


def test_run_experiment_and_gate_goldens():
    source, task, witness = _and_setup()
    cfg = CodecConfig(block_len=8, delta=0.05)
    rep = run_experiment(source, task, witness, cfg, [16, 64], trials=5, seed=0)
    assert rep.codebook_failures == pytest.approx((0.01171875, 0.02734375), abs=1e-12)
    assert rep.codebook_methods == ("exact", "exact")
    assert rep.rate_targets == pytest.approx((1.0, 1.0))
    for row in rep.rows:
        assert row["rate1_layer1"] == pytest.approx(1.25)
        assert row["probes1_per_symbol"] == 91
        assert row["probes2_per_symbol"] == 91
        assert row["max_symbol_err_freq"] == 0.0
        assert row["within_eps_when_budgets_hold"] is True
        assert row["rate1_total"] > row["rate1_layer1"]
        assert row["budget_threshold"] == pytest.approx(2 * row["n"] * 0.05)


def test_run_experiment_is_deterministic():
    source, task, witness = _and_setup()
    cfg = CodecConfig(block_len=8, delta=0.05)
    a = run_experiment(source, task, witness, cfg, [16], trials=3, seed=7)
    b = run_experiment(source, task, witness, cfg, [16], trials=3, seed=7)
    assert json.dumps(a.to_json_dict(), sort_keys=True) == \
        json.dumps(b.to_json_dict(), sort_keys=True)
    c = run_experiment(source, task, witness, cfg, [16], trials=3, seed=8)
    assert json.dumps(a.to_json_dict(), sort_keys=True) != \
        json.dumps(c.to_json_dict(), sort_keys=True)


def test_tight_budget_falls_back_to_wider_storage_without_errors():
    # delta far below the measured layer-1 failure: storage budgets breach
    # sometimes, the encoder doubles the stored sparsity, decoding stays clean
    source, task, witness = _and_setup()
    cfg = CodecConfig(block_len=8, delta=0.01, strict=False)
    rep = run_experiment(source, task, witness, cfg, [64], trials=10, seed=3)
    row = rep.rows[0]
    assert row["expander_fallback_freq1"] > 0
    assert row["max_symbol_err_freq"] == 0.0
    assert row["within_eps_when_budgets_hold"] is True
    assert row["breach_freq1"] > 0


def test_card_game_side_info_report():
    source, task = card_game(0.5)
    witness = si_witness(rate_si(source, task))
    cfg = CodecConfig(block_len=12, delta=0.05, typ_slack=1.0, rate_slack=0.25,
                      strict=False, mc_samples=20_000)
    rep = run_experiment(source, task, witness, cfg, [32], trials=5, seed=0)
    assert rep.mode == "side_info"
    assert 0.0 < rep.codebook_failures[0] <= 0.1
    row = rep.rows[0]
    assert row["rate1_layer1"] <= 2 / 3 + 0.25 + 1e-9
    assert row["max_symbol_err_freq"] == 0.0
    assert row["within_eps_when_budgets_hold"] is True
    assert "rate2_layer1" not in row
    assert row["probes1_per_symbol"] == 236


def test_witness_selection_errors():
    source, task, _ = _and_setup()
    region = region_distributed(source, task)
    with pytest.raises(ValueError, match="out of range"):
        distributed_witness(region, 5)
    w = distributed_witness(region, 0)
    assert w.mode == "distributed"
    si = si_witness(rate_si(source, task))
    assert si.mode == "side_info"
