"""Batch front door: run pipeline stages to files, generate fixtures, serve.

Every subcommand returns exit code 0 on success, 1 on a validation problem
(bad inputs, infeasible requests), and 2 on an internal error. Stage outputs
are the same canonical JSON artifacts the service stores, so piecewise
reruns and service sessions are interchangeable.
"""

from __future__ import annotations

import argparse
import json
import sys
import traceback
from pathlib import Path

from .artifacts import canonical_json_bytes
from .config import AnalysisConfig
from .criteria import criteria_from_csv, criteria_to_csv
from .errors import CommlatError, ValidationError
from .pipeline import Analysis, load_paired_trace
from .regions import CommGraph, RegionModel
from .synth import ScenarioSpec, generate
from .traces import events_to_csv, node_map_to_csv


def _load_config(args: argparse.Namespace) -> AnalysisConfig:
    base: dict = {}
    if getattr(args, "config", None):
        try:
            base = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read config {args.config}: {exc}") from exc
    overrides = {
        "bucket_width": getattr(args, "bucket_width", None),
        "max_samples_per_bucket": getattr(args, "max_samples", None),
        "cluster_threshold": getattr(args, "threshold", None),
        "beta": getattr(args, "beta", None),
        "max_depth": getattr(args, "max_depth", None),
        "series_bucket_us": getattr(args, "bucket", None),
        "window": getattr(args, "window", None),
        "slope_min": getattr(args, "slope_min", None),
        "cv_max": getattr(args, "cv_max", None),
        "steady_margin": getattr(args, "steady_margin", None),
    }
    for key, value in overrides.items():
        if value is not None:
            base[key] = value
    try:
        return AnalysisConfig.from_dict(base)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"bad config: {exc}") from exc


def _analysis(args: argparse.Namespace) -> Analysis:
    config = _load_config(args)
    trace = load_paired_trace(
        args.trace, args.node_map,
        fmt=getattr(args, "format", None),
        lenient=getattr(args, "lenient", False),
    )
    criteria = None
    criteria_in = getattr(args, "criteria_in", None)
    if criteria_in:
        criteria = criteria_from_csv(
            Path(criteria_in).read_text(encoding="utf-8"), config.bucket_width
        )
    analysis = Analysis(trace, config, criteria=criteria)
    regions_in = getattr(args, "regions_in", None)
    if regions_in:
        # reuse a prior stage's clustering verbatim instead of recomputing
        payload = json.loads(Path(regions_in).read_text(encoding="utf-8"))
        regions = {int(r["id"]): list(r["members"]) for r in payload["regions"]}
        model = RegionModel(regions=regions, dendrogram=[], threshold=payload["threshold"])
        analysis._regions = (model, CommGraph.from_trace(trace))
    return analysis


def _write_out(args: argparse.Namespace, payload: dict) -> None:
    data = canonical_json_bytes(payload)
    if getattr(args, "out", None):
        Path(args.out).write_bytes(data)
    else:
        sys.stdout.write(data.decode("utf-8"))


def _cmd_ingest(args: argparse.Namespace) -> int:
    analysis = _analysis(args)
    if args.normalized_out:
        Path(args.normalized_out).write_text(events_to_csv(analysis.trace.events), encoding="utf-8")
    _write_out(args, analysis.ingest_artifact())
    return 0


def _cmd_criteria(args: argparse.Namespace) -> int:
    analysis = _analysis(args)
    csv_text = criteria_to_csv(analysis.criteria)
    if args.criteria_out:
        Path(args.criteria_out).write_text(csv_text, encoding="utf-8")
    else:
        sys.stdout.write(csv_text)
    return 0


def _cmd_cluster(args: argparse.Namespace) -> int:
    analysis = _analysis(args)
    _write_out(args, analysis.regions_artifact())
    return 0


def _cmd_evolve(args: argparse.Namespace) -> int:
    analysis = _analysis(args)
    _write_out(args, analysis.evolution_artifact(args.region_id))
    return 0


def _cmd_dag(args: argparse.Namespace) -> int:
    analysis = _analysis(args)
    _write_out(args, analysis.dag_artifact(args.region_id, args.start, args.end))
    return 0


def _cmd_attribute(args: argparse.Namespace) -> int:
    analysis = _analysis(args)
    _write_out(args, analysis.attribution_artifact(args.region_id, args.start, args.end))
    return 0


def _cmd_remap(args: argparse.Namespace) -> int:
    analysis = _analysis(args)
    _write_out(args, analysis.remap_artifact(args.cores_per_node))
    return 0


def _cmd_gen(args: argparse.Namespace) -> int:
    spec = ScenarioSpec.from_file(args.scenario)
    trace, node_map, truth = generate(spec)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "trace.csv").write_text(events_to_csv(trace.events), encoding="utf-8")
    (out_dir / "node_map.csv").write_text(node_map_to_csv(node_map), encoding="utf-8")
    (out_dir / "ground_truth.json").write_bytes(canonical_json_bytes(truth.to_dict()))
    print(f"wrote {len(trace.events)} events to {out_dir}")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import os

    import uvicorn

    from .service import create_app

    if args.workers != 1:
        # sessions live in process memory; a worker pool would shard them
        print("note: sessions are in-memory, running a single worker", file=sys.stderr)
    host = args.host or os.environ.get("COMMLAT_HOST", "127.0.0.1")
    port = args.port if args.port is not None else int(os.environ.get("COMMLAT_PORT", "8787"))
    app = create_app(data_dir=args.data_dir)
    uvicorn.run(app, host=host, port=port)
    return 0


def _add_trace_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("trace", help="trace file (CSV or JSONL)")
    p.add_argument("node_map", help="rank,node CSV sidecar")
    p.add_argument("--format", choices=["csv", "jsonl"], default=None)
    p.add_argument("--lenient", action="store_true", help="skip malformed lines")
    p.add_argument("--config", help="JSON file with AnalysisConfig fields")
    p.add_argument("--out", help="output path (default: stdout)")


def _add_window_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--region-id", type=int, required=True)
    p.add_argument("--start", type=int, required=True, help="window start (us, inclusive)")
    p.add_argument("--end", type=int, required=True, help="window end (us, exclusive)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="commlat",
        description="Locate, track, and attribute communication latency in MPI traces",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate, normalize, and pair a trace")
    _add_trace_args(p)
    p.add_argument("--normalized-out", help="write the normalized trace CSV here")
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("criteria", help="build latency criteria from a trace")
    _add_trace_args(p)
    p.add_argument("--bucket-width", type=int)
    p.add_argument("--max-samples", type=int)
    p.add_argument("--criteria-out", help="criteria CSV output (default: stdout)")
    p.set_defaults(func=_cmd_criteria)

    p = sub.add_parser("cluster", help="cluster processes into communication regions")
    _add_trace_args(p)
    p.add_argument("--criteria-in", help="reuse a saved criteria CSV")
    p.add_argument("--threshold", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--max-depth", type=int)
    p.set_defaults(func=_cmd_cluster)

    p = sub.add_parser("evolve", help="temporal latency abstraction for a region")
    _add_trace_args(p)
    p.add_argument("--criteria-in")
    p.add_argument("--regions-in", help="reuse a saved regions JSON")
    p.add_argument("--region-id", type=int, required=True)
    p.add_argument("--threshold", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--bucket", type=int, help="series bucket width in microseconds")
    p.add_argument("--window", type=int)
    p.add_argument("--slope-min", type=float)
    p.add_argument("--cv-max", type=float)
    p.add_argument("--steady-margin", type=float)
    p.set_defaults(func=_cmd_evolve)

    p = sub.add_parser("dag", help="communication-dependency DAG for a window")
    _add_trace_args(p)
    p.add_argument("--criteria-in")
    p.add_argument("--regions-in")
    p.add_argument("--threshold", type=float)
    p.add_argument("--beta", type=float)
    _add_window_args(p)
    p.set_defaults(func=_cmd_dag)

    p = sub.add_parser("attribute", help="latency cause attribution for a window")
    _add_trace_args(p)
    p.add_argument("--criteria-in")
    p.add_argument("--regions-in")
    p.add_argument("--threshold", type=float)
    p.add_argument("--beta", type=float)
    _add_window_args(p)
    p.set_defaults(func=_cmd_attribute)

    p = sub.add_parser("remap", help="recommend a process-to-node remapping")
    _add_trace_args(p)
    p.add_argument("--cores-per-node", type=int, required=True)
    p.set_defaults(func=_cmd_remap)

    p = sub.add_parser("gen", help="generate a synthetic fixture set")
    p.add_argument("scenario", help="scenario spec JSON")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("serve", help="start the HTTP analysis service")
    p.add_argument("--host", default=None, help="default: $COMMLAT_HOST or 127.0.0.1")
    p.add_argument("--port", type=int, default=None, help="default: $COMMLAT_PORT or 8787")
    p.add_argument("--data-dir", default=None, help="artifact store (default: $COMMLAT_DATA)")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except CommlatError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 2
    except Exception:
        traceback.print_exc()
        return 2


if __name__ == "__main__":
    sys.exit(main())
