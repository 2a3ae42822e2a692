"""Canonical JSON payloads for every analysis artifact.

The CLI and the HTTP service both build artifacts here and serialize them
with canonical_json_bytes, so the same (trace, config) pair produces
byte-identical files and response bodies on either path.
"""

from __future__ import annotations

import json

from .attribution import (
    AttributionVerdict,
    Duration,
    MappingSignal,
    PatternSignal,
    RemapResult,
    TrafficSignal,
)
from .criteria import RegionLatency
from .dag import CommDag
from .regions import CommGraph, RegionModel
from .temporal import TemporalAbstraction
from .traces import Trace


def canonical_json_bytes(payload: dict) -> bytes:
    return (json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def ingest_payload(trace: Trace) -> dict:
    assert trace.pairing is not None
    first, last = trace.span
    return {
        "events": len(trace.events),
        "ranks": sorted(trace.ranks),
        "span": {"start": first, "end": last},
        "pairing": trace.pairing.to_dict(),
        "parse_errors": [{"line": n, "error": msg} for n, msg in trace.parse_errors],
    }


def regions_payload(
    model: RegionModel,
    graph: CommGraph,
    latencies: dict[int, RegionLatency | None],
    beta: float,
    max_depth: int,
) -> dict:
    regions = []
    for rid in sorted(model.regions):
        rl = latencies.get(rid)
        regions.append({
            "id": rid,
            "members": model.regions[rid],
            "rl": None if rl is None else rl.rl,
            "messages": 0 if rl is None else rl.n,
        })
    region_edges: dict[tuple[int, int], int] = {}
    for (a, b), w in graph.weights.items():
        ra, rb = model.region_of[a], model.region_of[b]
        if ra == rb:
            continue
        key = (min(ra, rb), max(ra, rb))
        region_edges[key] = region_edges.get(key, 0) + w
    return {
        "threshold": model.threshold,
        "beta": beta,
        "max_depth": max_depth,
        "regions": regions,
        "region_edges": [
            {"a": a, "b": b, "weight": w} for (a, b), w in sorted(region_edges.items())
        ],
        "processes": [
            {"pid": p, "region": model.region_of[p]} for p in sorted(model.region_of)
        ],
        "process_edges": [
            {"a": a, "b": b, "weight": w} for (a, b), w in sorted(graph.weights.items())
        ],
        "dendrogram": [
            {"a": m.a, "b": m.b, "linkage": m.linkage} for m in model.dendrogram
        ],
    }


def evolution_payload(abstraction: TemporalAbstraction, bucket_us: int) -> dict:
    return {
        "region": abstraction.region_id,
        "ave_region": abstraction.ave_region,
        "bucket_us": bucket_us,
        "periods": [
            {
                "tag": p.tag.value,
                "start": p.start,
                "mid": p.mid,
                "end": p.end,
                "mean_l": p.mean_l,
                "delayed": p.delayed,
                "messages": p.messages,
            }
            for p in abstraction.periods
        ],
    }


def dag_payload(dag: CommDag, region_id: int, start: int, end: int) -> dict:
    events = dag.window.events
    sent_of: dict[int, list[dict]] = {n.node_id: [] for n in dag.nodes}
    recv_of: dict[int, list[dict]] = {n.node_id: [] for n in dag.nodes}
    for e in dag.edges:
        item = {
            "size": e.message.size,
            "t": e.message.transmission_time,
            "l": e.l,
            "ts": e.message.send_ts,
        }
        sent_of[e.src].append(item)
        recv_of[e.dst].append({**item, "ts": e.message.recv_ts})

    nodes = []
    for n in dag.nodes:
        nodes.append({
            "id": n.node_id,
            "pid": n.pid,
            "layer": n.layer,
            "lb": n.lb,
            "node_latency": n.node_latency,
            "events": [
                {
                    "kind": events[i].kind.value,
                    "ts": events[i].timestamp,
                    "src": events[i].source,
                    "dst": events[i].destination,
                    "size": events[i].size,
                }
                for i in n.event_indices
            ],
            "sent": sorted(sent_of[n.node_id], key=lambda x: x["ts"]),
            "recv": sorted(recv_of[n.node_id], key=lambda x: x["ts"]),
        })
    return {
        "region": region_id,
        "window": {"start": start, "end": end},
        "load": {
            "mc_avg": dag.load.mc_avg,
            "ad": dag.load.ad,
            "mc": {str(p): c for p, c in sorted(dag.load.mc.items())},
        },
        "nodes": nodes,
        "edges": [
            {
                "from": e.src,
                "to": e.dst,
                "size": e.message.size,
                "t": e.message.transmission_time,
                "l": e.l,
            }
            for e in dag.edges
        ],
    }


def _durations_payload(durations: list[Duration]) -> list[dict]:
    return [{"start": d.start, "end": d.end} for d in durations]


def attribution_payload(
    mapping: MappingSignal,
    pattern: PatternSignal,
    traffic: TrafficSignal,
    verdict: AttributionVerdict,
    region_id: int,
    remap: RemapResult | None = None,
) -> dict:
    payload = {
        "region": region_id,
        "period": {"start": verdict.period.start, "end": verdict.period.end},
        "durations": _durations_payload(mapping.durations),
        "signals": {
            "mapping": {
                "series": [
                    {
                        "start": d.start,
                        "end": d.end,
                        "intra": mapping.intra[i],
                        "inter": mapping.inter[i],
                    }
                    for i, d in enumerate(mapping.durations)
                ],
                "totals": {
                    "intra": mapping.total_intra,
                    "inter": mapping.total_inter,
                    "inter_ratio": mapping.inter_ratio,
                },
            },
            "pattern": {
                "series": [
                    {
                        "start": d.start,
                        "end": d.end,
                        "mean_lb": pattern.mean_lb[i],
                        "imbalance": pattern.imbalance[i],
                        "active": pattern.active[i],
                    }
                    for i, d in enumerate(pattern.durations)
                ],
                "peaks": pattern.peaks,
            },
            "traffic": {
                "series_by_bucket": [
                    {
                        "bucket_start": b,
                        "means": traffic.means[b],
                        "normalized": traffic.normalized[b],
                    }
                    for b in traffic.buckets
                ],
                "cv_by_bucket": {str(b): cv for b, cv in sorted(traffic.cv.items())},
                "max_cv": traffic.max_cv,
                "least_fluctuating_bucket": traffic.least_fluctuating_bucket,
            },
        },
        "scores": verdict.scores,
        "verdict": verdict.dominant,
        "recommendation": verdict.recommendation,
        "poor_mapping_flag": verdict.poor_mapping_flag,
    }
    if remap is not None:
        payload["remap"] = remap_payload(remap)
    return payload


def remap_payload(result: RemapResult) -> dict:
    return {
        "node_map": {str(r): n for r, n in sorted(result.node_map.mapping.items())},
        "before": result.before,
        "after": result.after,
        "changed": result.changed,
    }
