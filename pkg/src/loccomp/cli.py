"""Command-line front end: rate regions, single-encoder rates, simulations.

Subcommands:

* ``region``        two-encoder achievable rate region per tolerance
* ``rate-si``       single-encoder rate with decoder side information
* ``simulate``      Monte-Carlo run of the layered locally-decodable codec
* ``expander-test`` store/recover sweep of the sparse bitprobe structure

Every run writes JSON (structured results) and CSV (plot data) artifacts into
the output directory, plus a rendered PNG figure of the same data.  Each
artifact embeds a run manifest: the normalized command line, input file
hashes, the seed, the tool version, and a content hash over the payload.  The
wall-time field is informational and excluded from the content hash, so
repeated runs differ in nothing else.

Exit codes: 0 on success, 1 for input errors (bad flags, malformed problem
files, out-of-range parameters), 2 when a declared capability limit is hit
(enumeration caps, infeasible codec configurations).
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .codec import (CodebookError, CodecConfig, CodecReport, distributed_witness,
                    run_experiment, si_witness)
from .expander import (EncodingError, ProbeCounter, SparseVector, build_graph,
                       decode_all, decode_bit, encode, graph_params)
from .graphs import DEFAULT_CAP, CapacityError
from .plots import plot_codec_report, plot_rate_step, plot_region
from .regions import RateRegion, rate_si, region_distributed
from .sources import ProblemSpecError, parse_problem, validate

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_CAP = 2


class _Parser(argparse.ArgumentParser):
    """Argument errors exit with the input-error code, not argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_INPUT)


def _fail(code: int, message: str) -> int:
    sys.stderr.write(message.rstrip() + "\n")
    return code


def _round6(x: float) -> float:
    return round(float(x), 6)


def _sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def _canonical(payload) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def build_manifest(command: str, args_repr: list[str], input_paths, seed,
                   payload, wall_time_s: float) -> dict:
    inputs = {}
    for p in input_paths:
        inputs[str(p)] = hashlib.sha256(Path(p).read_bytes()).hexdigest()
    return {
        "command": " ".join(["loccomp", command] + [str(a) for a in args_repr]),
        "inputs": inputs,
        "seed": seed,
        "tool_version": __version__,
        "content_hash": _sha256_text(_canonical(payload)),
        "wall_time_s": round(float(wall_time_s), 6),
    }


def write_json_artifact(path: Path, payload: dict, manifest: dict):
    obj = dict(payload)
    obj["manifest"] = manifest
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def write_csv_artifact(path: Path, header, rows, manifest: dict):
    lines = ["# manifest " + _canonical(manifest), ",".join(header)]
    for row in rows:
        lines.append(",".join("" if v is None else str(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def read_artifact(path: Path):
    """Round-trip helper: parse a JSON artifact or a manifest-headed CSV."""
    text = Path(path).read_text()
    if str(path).endswith(".json"):
        return json.loads(text)
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# manifest "):
        raise ValueError(f"{path} lacks a manifest header")
    manifest = json.loads(lines[0][len("# manifest "):])
    header = lines[1].split(",")
    rows = [line.split(",") for line in lines[2:] if line]
    return {"manifest": manifest, "header": header, "rows": rows}


def _resolve_cap(value) -> int:
    if value is not None:
        return int(value)
    env = os.environ.get("LOCCOMP_CAP")
    return int(env) if env else DEFAULT_CAP


def _load_problem(path: str):
    source, task = parse_problem(path)
    report = validate(source)
    if not report.ok:
        raise ProblemSpecError("; ".join(report.messages))
    return source, task


def _eps_list(args, task) -> list[float]:
    if args.epsilon:
        return [float(e) for e in args.epsilon]
    return [task.epsilon]


def _region_payload(eps: float, region: RateRegion) -> dict:
    witnesses = []
    for w in region.witnesses:
        witnesses.append({
            "point": [_round6(w.point.r1), _round6(w.point.r2)],
            "groups1": [list(g) for g in w.graph.g1.group_labels()],
            "groups2": [list(g) for g in w.graph.g2.group_labels()],
            "cond1": [[round(float(v), 10) for v in row] for row in w.cond1],
            "cond2": [[round(float(v), 10) for v in row] for row in w.cond2],
        })
    return {
        "epsilon": eps,
        "exact": region.exact,
        "vertices": [[_round6(v.r1), _round6(v.r2)] for v in region.vertices],
        "witnesses": witnesses,
    }


def cmd_region(args) -> int:
    t0 = time.perf_counter()
    args.seed = 0 if args.seed is None else int(args.seed)
    cap = _resolve_cap(args.cap)
    try:
        source, task = _load_problem(args.spec)
    except ProblemSpecError as exc:
        return _fail(EXIT_INPUT, f"invalid problem spec: {exc}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    payloads = []
    try:
        for eps in _eps_list(args, task):
            t_eps = dataclasses.replace(task, epsilon=float(eps))
            region = region_distributed(source, t_eps, cap=cap)
            payloads.append((eps, region, _region_payload(eps, region)))
    except CapacityError as exc:
        return _fail(EXIT_CAP, f"enumeration cap hit: {exc}")

    wall = time.perf_counter() - t0
    csv_header = ["epsilon", "vertex", "rate1", "rate2"]
    all_rows = []
    for eps, region, payload in payloads:
        manifest = build_manifest("region", _manifest_args(args), [args.spec],
                                  args.seed, payload, wall)
        stem = f"region_eps{eps:g}"
        write_json_artifact(out / f"{stem}.json", payload, manifest)
        rows = [[eps, i, _round6(v.r1), _round6(v.r2)]
                for i, v in enumerate(region.vertices)]
        write_csv_artifact(out / f"{stem}.csv", csv_header, rows, manifest)
        all_rows.extend(rows)
    plot_region([(eps, region) for eps, region, _ in payloads],
                str(out / "region_frontiers.png"))

    combined = {"regions": [p for _, _, p in payloads]}
    _emit(args.format, combined, csv_header, all_rows)
    return EXIT_OK


def cmd_rate_si(args) -> int:
    t0 = time.perf_counter()
    args.seed = 0 if args.seed is None else int(args.seed)
    cap = _resolve_cap(args.cap)
    try:
        source, task = _load_problem(args.spec)
    except ProblemSpecError as exc:
        return _fail(EXIT_INPUT, f"invalid problem spec: {exc}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    results = []
    try:
        for eps in _eps_list(args, task):
            t_eps = dataclasses.replace(task, epsilon=float(eps))
            res = rate_si(source, t_eps, cap=cap)
            results.append({
                "epsilon": eps,
                "rate": _round6(res.rate),
                "exact": res.exact,
                "note": res.note,
                "groups": [list(g) for g in res.graph.group_labels()],
            })
    except CapacityError as exc:
        return _fail(EXIT_CAP, f"enumeration cap hit: {exc}")

    wall = time.perf_counter() - t0
    payload = {"results": results}
    manifest = build_manifest("rate-si", _manifest_args(args), [args.spec],
                              args.seed, payload, wall)
    write_json_artifact(out / "rate_si.json", payload, manifest)
    header = ["epsilon", "rate", "exact"]
    rows = [[r["epsilon"], r["rate"], r["exact"]] for r in results]
    write_csv_artifact(out / "rate_si.csv", header, rows, manifest)
    plot_rate_step([r["epsilon"] for r in results], [r["rate"] for r in results],
                   str(out / "rate_si.png"))
    _emit(args.format, payload, header, rows)
    return EXIT_OK


_SIM_KEYS = {"problem", "mode", "witness", "epsilon", "block_len", "delta",
             "n_values", "trials", "typ_slack", "rate_slack", "seed", "cap"}
_SIM_REQUIRED = {"problem", "block_len", "delta", "n_values", "trials"}


def cmd_simulate(args) -> int:
    t0 = time.perf_counter()
    try:
        cfg_raw = json.loads(Path(args.spec).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        return _fail(EXIT_INPUT, f"cannot read experiment config: {exc}")
    if not isinstance(cfg_raw, dict):
        return _fail(EXIT_INPUT, "experiment config must be a JSON object")
    unknown = set(cfg_raw) - _SIM_KEYS
    if unknown:
        return _fail(EXIT_INPUT, f"unknown experiment config keys: {sorted(unknown)}")
    missing = _SIM_REQUIRED - set(cfg_raw)
    if missing:
        return _fail(EXIT_INPUT, f"missing experiment config keys: {sorted(missing)}")

    problem_path = Path(args.spec).parent / cfg_raw["problem"]
    try:
        source, task = _load_problem(problem_path)
    except ProblemSpecError as exc:
        return _fail(EXIT_INPUT, f"invalid problem spec: {exc}")
    if "epsilon" in cfg_raw:
        task = dataclasses.replace(task, epsilon=float(cfg_raw["epsilon"]))

    mode = cfg_raw.get("mode", "distributed")
    cap = _resolve_cap(args.cap if args.cap is not None else cfg_raw.get("cap"))
    seed = int(args.seed if args.seed is not None else cfg_raw.get("seed", 0))
    args.seed = seed

    try:
        if mode == "distributed":
            region = region_distributed(source, task, cap=cap)
            if not region.witnesses:
                return _fail(EXIT_CAP, "no achievable point at this tolerance")
            witness = distributed_witness(region, int(cfg_raw.get("witness", 0)))
        elif mode == "side_info":
            witness = si_witness(rate_si(source, task, cap=cap))
        else:
            return _fail(EXIT_INPUT, f"unknown mode {mode!r}")
    except CapacityError as exc:
        return _fail(EXIT_CAP, f"enumeration cap hit: {exc}")
    except ValueError as exc:
        return _fail(EXIT_INPUT, str(exc))

    try:
        cc = CodecConfig(block_len=int(cfg_raw["block_len"]),
                         delta=float(cfg_raw["delta"]),
                         typ_slack=float(cfg_raw.get("typ_slack", 0.75)),
                         rate_slack=float(cfg_raw.get("rate_slack", 0.15)))
    except ValueError as exc:
        return _fail(EXIT_INPUT, f"invalid codec config: {exc}")
    try:
        report = run_experiment(source, task, witness, cc,
                                cfg_raw["n_values"], int(cfg_raw["trials"]), seed)
    except (CodebookError, EncodingError) as exc:
        return _fail(EXIT_CAP, f"codec configuration infeasible: {exc}")

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    wall = time.perf_counter() - t0
    payload = report.to_json_dict()
    manifest = build_manifest("simulate", _manifest_args(args),
                              [args.spec, problem_path], seed, payload, wall)
    write_json_artifact(out / "codec_report.json", payload, manifest)
    rows = list(report.csv_rows())
    write_csv_artifact(out / "codec_report.csv", CodecReport.CSV_FIELDS, rows, manifest)
    plot_codec_report(report, str(out / "codec_trends.png"))
    _emit(args.format, payload, CodecReport.CSV_FIELDS, rows)
    return EXIT_OK


def cmd_expander_test(args) -> int:
    t0 = time.perf_counter()
    args.seed = 0 if args.seed is None else int(args.seed)
    n = int(args.n)
    delta = float(args.delta)
    trials = int(args.trials)
    seed = args.seed
    try:
        degree, m = graph_params(n, delta)
    except ValueError as exc:
        return _fail(EXIT_INPUT, str(exc))

    graph = build_graph(n, delta, seed)
    budget = int(delta * n)
    per_trial = []
    total_errors = 0
    for trial in range(trials):
        rng = np.random.default_rng(np.random.SeedSequence([seed, trial, 0xE7]))
        size = int(rng.integers(0, budget + 1))
        support = tuple(rng.choice(n, size=size, replace=False).tolist())
        try:
            stored = encode(graph, SparseVector(n, support))
        except EncodingError as exc:
            return _fail(EXIT_CAP, f"encoding failed on trial {trial}: {exc}")
        x = np.zeros(n, dtype=np.uint8)
        x[list(support)] = 1
        errors = int((decode_all(stored.graph, stored.bits) != x).sum())
        counter = ProbeCounter()
        decode_bit(stored.graph, stored.bits, 0, counter)
        per_trial.append({"trial": trial, "support_size": size, "errors": errors,
                          "probes_per_bit": counter.count,
                          "rebuilt": stored.graph.seed != graph.seed})
        total_errors += errors

    wall = time.perf_counter() - t0
    payload = {
        "n": n, "delta": delta, "trials": trials, "degree": degree,
        "stored_bits": m, "rate": m / n, "budget": budget,
        "total_bit_errors": total_errors, "per_trial": per_trial,
    }
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    manifest = build_manifest("expander-test", _manifest_args(args), [], seed,
                              payload, wall)
    write_json_artifact(out / "expander_test.json", payload, manifest)
    header = ["trial", "support_size", "errors", "probes_per_bit", "rebuilt"]
    rows = [[r["trial"], r["support_size"], r["errors"], r["probes_per_bit"],
             r["rebuilt"]] for r in per_trial]
    write_csv_artifact(out / "expander_test.csv", header, rows, manifest)
    _plot_expander(per_trial, budget, str(out / "expander_test.png"))
    _emit(args.format, payload, header, rows)
    return EXIT_OK


def _plot_expander(per_trial, budget, path):
    import matplotlib.pyplot as plt
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    ax.plot([r["trial"] for r in per_trial], [r["support_size"] for r in per_trial],
            "o", markersize=3, label="support size")
    ax.axhline(budget, color="gray", linestyle=":", label="sparsity budget")
    bad = [r for r in per_trial if r["errors"]]
    if bad:
        ax.plot([r["trial"] for r in bad], [r["support_size"] for r in bad],
                "rx", label="recovery errors")
    ax.set_xlabel("trial")
    ax.set_ylabel("support size")
    ax.set_title("bitprobe store/recover sweep")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def _manifest_args(args) -> list[str]:
    skip = {"func", "format", "command"}
    parts = []
    for key, val in sorted(vars(args).items()):
        if key in skip or val is None:
            continue
        if isinstance(val, list):
            for v in val:
                parts.append(f"--{key.replace('_', '-')}={v}")
        else:
            parts.append(f"--{key.replace('_', '-')}={val}")
    return parts


def _emit(fmt: str, payload: dict, header, rows):
    if fmt == "csv":
        sys.stdout.write(",".join(header) + "\n")
        for row in rows:
            sys.stdout.write(",".join("" if v is None else str(v) for v in row) + "\n")
    else:
        sys.stdout.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="loccomp",
                     description="rate regions and locally decodable codec "
                                 "simulation for approximate function computation")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, needs_spec=True):
        if needs_spec:
            p.add_argument("--spec", required=True, help="problem/config JSON file")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=None,
                       help="master seed (default 0; simulate falls back to "
                            "its config file)")
        p.add_argument("--cap", type=int, default=None,
                       help=f"alphabet/enumeration cap (default {DEFAULT_CAP}, "
                            f"env LOCCOMP_CAP)")
        p.add_argument("--format", choices=("json", "csv"), default="json",
                       help="stdout format (files are always written)")

    p_region = sub.add_parser("region", help="two-encoder achievable rate region")
    common(p_region)
    p_region.add_argument("--epsilon", action="append", type=float,
                          help="tolerance; repeatable")
    p_region.set_defaults(func=cmd_region)

    p_si = sub.add_parser("rate-si", help="single-encoder rate with side information")
    common(p_si)
    p_si.add_argument("--epsilon", action="append", type=float,
                      help="tolerance; repeatable")
    p_si.set_defaults(func=cmd_rate_si)

    p_sim = sub.add_parser("simulate", help="run the layered codec simulator")
    common(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_exp = sub.add_parser("expander-test", help="bitprobe store/recover sweep")
    common(p_exp, needs_spec=False)
    p_exp.add_argument("--n", type=int, required=True, help="stored vector length")
    p_exp.add_argument("--delta", type=float, required=True, help="sparsity fraction")
    p_exp.add_argument("--trials", type=int, default=100, help="random supports")
    p_exp.set_defaults(func=cmd_expander_test)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
