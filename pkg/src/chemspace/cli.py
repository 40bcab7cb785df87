"""Command-line front end.

Subcommands: measure, compare, axiom-check, corr-fixed, corr-growing,
sweep-t, gen-synthetic, novelty. Reports go to --out (or stdout) as JSON or
CSV carrying the same values. Every run takes a seed (default 0); identical
config + seed reproduces identical output apart from the volatile timing
fields (``timestamp``, ``wall_time_s``).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .axioms import quadrant_table
from .circles import resolve_exact_cap
from .distances import TanimotoOracle
from .errors import ChemSpaceError
from .fingerprints import Fingerprint, load_dataset, write_dataset
from .measures import MeasureSpec, evaluate_measure, parse_measure_spec
from .novelty import NOVELTY_KINDS, NoveltyContext
from .protocols import (
    DEFAULT_PROTOCOL_MEASURES,
    protocol_fixed,
    protocol_growing,
    threshold_sweep,
)
from .reference import load_universe
from .synthetic import SyntheticConfig, generate_synthetic

VOLATILE_KEYS = ("timestamp", "wall_time_s")


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, frozenset):
        return sorted(obj)
    raise TypeError(f"not JSON serializable: {type(obj)!r}")


def render_json(doc: dict[str, Any]) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, default=_json_default) + "\n"


def strip_volatile(doc: Any) -> Any:
    """Drop timing fields so reruns can be compared byte for byte."""
    if isinstance(doc, dict):
        return {k: strip_volatile(v) for k, v in doc.items() if k not in VOLATILE_KEYS}
    if isinstance(doc, list):
        return [strip_volatile(v) for v in doc]
    return doc


def _flatten(value: Any) -> str:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return ";".join(_flatten(v) for v in value)
    if isinstance(value, dict):
        return json.dumps(value, sort_keys=True, default=_json_default)
    return "" if value is None else str(value)


def render_csv(rows: list[dict[str, Any]]) -> str:
    if not rows:
        return "\n"
    columns: list[str] = []
    for row in rows:
        for key in row:
            if key not in columns:
                columns.append(key)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_flatten(row.get(col)) for col in columns])
    return buf.getvalue()


def emit(doc: dict[str, Any], rows: list[dict[str, Any]], args) -> None:
    text = render_csv(rows) if args.format == "csv" else render_json(doc)
    if getattr(args, "out", None):
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _base_doc(command: str, config: dict[str, Any]) -> dict[str, Any]:
    return {
        "command": command,
        "version": __version__,
        "config": config,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }


def _parse_measures(text: str) -> list[MeasureSpec]:
    specs = []
    for item in text.split(","):
        # Commas also separate params inside one spec; re-join chunks that
        # lack a measure name (contain '=' before any ':').
        if specs and "=" in item and ":" not in item:
            prev = specs.pop()
            specs.append(f"{prev},{item}")
        else:
            specs.append(item)
    out = []
    for raw in specs:
        spec = parse_measure_spec(raw)
        if spec.kind == "coverage" and isinstance(spec.param("universe"), str):
            universe = load_universe(spec.param("universe"))
            params = dict(spec.params)
            params["universe"] = universe
            spec = MeasureSpec("coverage", params)
        out.append(spec)
    return out


# ---------------------------------------------------------------------------
# Subcommands.

def cmd_measure(args) -> int:
    dataset = load_dataset(args.input)
    specs = _parse_measures(args.measures)
    exact_cap = resolve_exact_cap(None)
    rows = []
    if len(dataset) == 0:
        print(f"warning: {args.input} holds no records; all measures are 0", file=sys.stderr)
        for spec in specs:
            rows.append(
                {
                    "measure": spec.key(),
                    "value": 0.0,
                    "set_size": 0,
                    "metadata": {"empty": True},
                    "wall_time_s": 0.0,
                }
            )
    else:
        oracle = TanimotoOracle(dataset)
        subset = np.arange(len(dataset))
        for spec in specs:
            if spec.kind == "circles" and "seed" not in spec.params:
                spec = MeasureSpec("circles", {**spec.params, "seed": args.seed})
            start = time.perf_counter()
            result = evaluate_measure(spec, subset, dataset=dataset, oracle=oracle, exact_cap=exact_cap)
            rows.append(
                {
                    "measure": result.spec.key(),
                    "value": result.value,
                    "set_size": result.set_size,
                    "metadata": result.metadata,
                    "wall_time_s": round(time.perf_counter() - start, 6),
                }
            )
    config = {"input": str(args.input), "measures": args.measures, "seed": args.seed}
    doc = _base_doc("measure", config)
    doc["results"] = rows
    emit(doc, rows, args)
    return 0


def cmd_compare(args) -> int:
    specs = _parse_measures(args.measures)
    exact_cap = resolve_exact_cap(None)
    rows = []
    for ds_path in args.inputs:
        dataset = load_dataset(ds_path)
        oracle = TanimotoOracle(dataset) if len(dataset) else None
        subset = np.arange(len(dataset))
        for spec in specs:
            stochastic = spec.kind == "circles" and (
                spec.param("mode", "auto") == "greedy"
                or (spec.param("mode", "auto") == "auto" and len(dataset) > exact_cap)
            )
            seeds = range(args.repeats) if stochastic else [0]
            values = []
            for rep in seeds:
                rep_spec = spec
                if spec.kind == "circles":
                    rep_spec = MeasureSpec("circles", {**spec.params, "seed": args.seed + rep})
                result = evaluate_measure(
                    rep_spec, subset, dataset=dataset, oracle=oracle, exact_cap=exact_cap
                )
                values.append(result.value)
            mean = float(np.mean(values))
            rel_dev = 0.0
            if stochastic and mean != 0.0 and len(values) > 1:
                rel_dev = float(np.std(values, ddof=1) / abs(mean) * 100.0)
            rows.append(
                {
                    "dataset": str(ds_path),
                    "measure": spec.key(),
                    "mean": mean,
                    "rel_dev_pct": rel_dev,
                    "values": values,
                    "stochastic": stochastic,
                }
            )
    config = {
        "inputs": [str(p) for p in args.inputs],
        "measures": args.measures,
        "seed": args.seed,
        "repeats": args.repeats,
    }
    doc = _base_doc("compare", config)
    doc["results"] = rows
    emit(doc, rows, args)
    return 0


def cmd_axiom_check(args) -> int:
    table = quadrant_table(trials=args.trials, seed=args.seed)
    rows = [
        {
            "measure": r["measure"],
            "subadditive": r["subadditive"],
            "dissimilar": r["dissimilar"],
            "expected_subadditive": r.get("expected_subadditive"),
            "expected_dissimilar": r.get("expected_dissimilar"),
            "subadditivity_note": r["subadditivity_check"].get("note", ""),
            "dissimilarity_note": r["dissimilarity_check"].get("note", ""),
        }
        for r in table["reports"]
    ]
    doc = _base_doc("axiom-check", {"trials": args.trials, "seed": args.seed})
    doc["results"] = table["reports"]
    doc["matches_expected"] = table["matches_expected"]
    emit(doc, rows, args)
    if not table["matches_expected"]:
        print("axiom-check: classification deviates from the expected table", file=sys.stderr)
        return 1
    return 0


def cmd_corr_fixed(args) -> int:
    dataset = load_dataset(args.input)
    result = protocol_fixed(
        dataset,
        n=args.n,
        measures=_parse_measures(args.measures),
        seed=args.seed,
        repeats=args.repeats,
        runs=args.runs,
        jobs=args.jobs,
    )
    rows = [s.to_dict() for s in result.stats]
    doc = _base_doc("corr-fixed", {**result.config, "input": str(args.input)})
    doc["results"] = rows
    emit(doc, rows, args)
    return 0


def cmd_corr_growing(args) -> int:
    dataset = load_dataset(args.input)
    result = protocol_growing(
        dataset,
        n=args.n,
        measures=_parse_measures(args.measures),
        bias=args.bias,
        seed=args.seed,
        runs=args.runs,
        normalize_dtw=args.normalize_dtw,
        jobs=args.jobs,
    )
    rows = [s.to_dict() for s in result.stats]
    doc = _base_doc("corr-growing", {**result.config, "input": str(args.input)})
    doc["results"] = rows
    emit(doc, rows, args)
    return 0


def cmd_sweep_t(args) -> int:
    dataset = load_dataset(args.input)
    t_grid = [float(v) for v in args.t_grid.split(",") if v.strip() != ""]
    sweep = threshold_sweep(
        dataset,
        protocol=args.protocol,
        t_grid=t_grid,
        seed=args.seed,
        n=args.n,
        repeats=args.repeats,
        runs=args.runs,
        bias=args.bias,
        jobs=args.jobs,
    )
    doc = _base_doc("sweep-t", {**sweep.config, "input": str(args.input)})
    doc["results"] = sweep.rows
    doc["best_t"] = sweep.best_t
    emit(doc, sweep.rows, args)
    return 0


def cmd_gen_synthetic(args) -> int:
    config = SyntheticConfig(
        classes=args.classes,
        per_class=args.per_class,
        width=args.width,
        core_bits=args.core_bits,
        flip_prob=args.flip_prob,
    )
    dataset = generate_synthetic(config, seed=args.seed)
    write_dataset(dataset, args.out)
    doc = _base_doc(
        "gen-synthetic",
        {
            "classes": args.classes,
            "per_class": args.per_class,
            "width": args.width,
            "core_bits": args.core_bits,
            "flip_prob": args.flip_prob,
            "seed": args.seed,
            "out": str(args.out),
        },
    )
    doc["records"] = len(dataset)
    sys.stdout.write(render_json(doc))
    return 0


def cmd_novelty(args) -> int:
    dataset = load_dataset(args.input)
    ctx = NoveltyContext.from_dataset(
        dataset,
        t=args.t,
        against_centers=args.against_centers,
        restarts=args.restarts,
        seed=args.seed,
    )
    score = NOVELTY_KINDS[args.kind]
    for line in sys.stdin:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        value = score(Fingerprint.parse(line), ctx)
        sys.stdout.write(f"{float(value):.12g}\n")
    return 0


# ---------------------------------------------------------------------------
# Parser wiring.

def _add_common(parser, out=True):
    parser.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    if out:
        parser.add_argument("--out", type=str, default=None, help="output path (default stdout)")
        parser.add_argument("--format", choices=("json", "csv"), default="json")
    parser.add_argument("--jobs", type=int, default=1, help="worker threads for independent work")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chemspace",
        description="Coverage measures of chemical space over binary molecular fingerprints",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("measure", help="evaluate measures on one dataset")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--measures", required=True, help="e.g. richness,circles:t=0.75")
    _add_common(p)
    p.set_defaults(fn=cmd_measure)

    p = sub.add_parser("compare", help="measure grid over several datasets")
    p.add_argument("--in", dest="inputs", required=True, nargs="+")
    p.add_argument("--measures", required=True)
    p.add_argument("--repeats", type=int, default=5, help="seeds per stochastic measure")
    _add_common(p)
    p.set_defaults(fn=cmd_compare)

    p = sub.add_parser("axiom-check", help="classify measures by the two validity axioms")
    p.add_argument("--trials", type=int, default=1000)
    _add_common(p)
    p.set_defaults(fn=cmd_axiom_check)

    p = sub.add_parser("corr-fixed", help="fixed-size correlation against the gold standard")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--repeats", type=int, default=200)
    p.add_argument("--runs", type=int, default=10)
    p.add_argument("--measures", default=",".join(DEFAULT_PROTOCOL_MEASURES))
    _add_common(p)
    p.set_defaults(fn=cmd_corr_fixed)

    p = sub.add_parser("corr-growing", help="growing-size DTW against the gold standard")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--runs", type=int, default=10)
    p.add_argument("--bias", choices=("uniform", "similar", "most-similar"), default="similar")
    p.add_argument("--normalize-dtw", action="store_true")
    p.add_argument("--measures", default=",".join(DEFAULT_PROTOCOL_MEASURES))
    _add_common(p)
    p.set_defaults(fn=cmd_corr_growing)

    p = sub.add_parser("sweep-t", help="packing threshold sweep")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--protocol", choices=("fixed", "growing"), default="fixed")
    p.add_argument("--t-grid", default="0.0,0.25,0.5,0.75")
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--repeats", type=int, default=100)
    p.add_argument("--runs", type=int, default=10)
    p.add_argument("--bias", choices=("uniform", "similar", "most-similar"), default="similar")
    _add_common(p)
    p.set_defaults(fn=cmd_sweep_t)

    p = sub.add_parser("gen-synthetic", help="generate a labeled synthetic dataset TSV")
    p.add_argument("--classes", type=int, default=50)
    p.add_argument("--per-class", type=int, default=40)
    p.add_argument("--width", type=int, default=256)
    p.add_argument("--core-bits", type=int, default=32)
    p.add_argument("--flip-prob", type=float, default=0.05)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_gen_synthetic)

    p = sub.add_parser(
        "novelty", help="score candidate fingerprints from stdin against a dataset"
    )
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--kind", choices=tuple(NOVELTY_KINDS), required=True)
    p.add_argument("--t", type=float, default=None, help="threshold for the circles indicator")
    p.add_argument("--against-centers", action="store_true")
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_novelty)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ChemSpaceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
