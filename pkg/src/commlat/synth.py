"""Deterministic synthetic traces with planted structure for tests and demos.

A scenario is a sequence of periods, each split into equal sub-durations and
tagged with the latency cause it plants:

  none      processes exchange with region mates; fixed gateway pairs carry a
            steady cross-region trickle.
  mapping   most messages are redirected to peers on a different physical
            node, inflating the inter-node share.
  pattern   each region's traffic converges on its first member (many-to-one
            hotspot), creating load imbalance.
  traffic   baseline shape, but inter-node transmission times are multiplied
            in alternating sub-durations, so same-size transfers fluctuate.

Transmission time is linear in message size, scaled by an inter-node factor
and multiplicative noise. All randomness flows from one seeded generator
(numpy PCG64, recorded in the ground truth), so the same spec always yields
byte-identical outputs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .traces import CommEvent, EventKind, NodeMap, Trace

RNG_ALGORITHM = "numpy.random.PCG64"

CAUSES = ("none", "mapping", "pattern", "traffic")


@dataclass(frozen=True)
class PeriodSpec:
    cause: str = "none"
    durations: int = 4
    duration_us: int = 50_000


@dataclass
class ScenarioSpec:
    seed: int = 1
    regions: list[int] = field(default_factory=lambda: [4, 4])
    cores_per_node: int = 4
    nodes: int | None = None                # default: ceil(processes / cores)
    placement: str = "good"                 # good | bad | random
    periods: list[PeriodSpec] = field(default_factory=lambda: [PeriodSpec()])
    intra_rate: int = 4                     # msgs per process per sub-duration
    gateway_rate: int = 2                   # msgs per gateway pair per sub-duration
    gateways_per_pair: int = 1
    mapping_share: float = 0.8
    hot_share: float = 0.8
    traffic_multiplier: float = 3.0
    size_min: int = 64
    size_max: int = 1024
    # gateway transfers reuse fixed sizes (halo-exchange style) so the same
    # size bucket recurs in every duration and traffic fluctuation is visible
    gateway_sizes: tuple[int, ...] = (256, 768)
    base_us: float = 20.0
    us_per_byte: float = 0.05
    inter_factor: float = 4.0
    noise: float = 0.05

    @property
    def process_count(self) -> int:
        return sum(self.regions)

    def node_count(self) -> int:
        if self.nodes is not None:
            return self.nodes
        return math.ceil(self.process_count / self.cores_per_node)

    def validate(self) -> None:
        if not self.regions or any(s < 2 for s in self.regions):
            raise ValidationError("every region needs at least 2 processes")
        if self.placement not in ("good", "bad", "random"):
            raise ValidationError(f"unknown placement {self.placement!r}")
        for p in self.periods:
            if p.cause not in CAUSES:
                raise ValidationError(f"unknown period cause {p.cause!r}")
            if p.durations < 1 or p.duration_us < 1:
                raise ValidationError("period needs positive durations")
        if self.node_count() * self.cores_per_node < self.process_count:
            raise ValidationError("node layout cannot hold all processes")
        if self.traffic_multiplier <= 0:
            raise ValidationError("traffic multiplier must be positive")
        if not (0 < self.size_min <= self.size_max):
            raise ValidationError("bad size range")

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioSpec":
        data = dict(data)
        periods = [PeriodSpec(**p) for p in data.pop("periods", [{}])]
        spec = cls(periods=periods, **data)
        spec.validate()
        return spec

    @classmethod
    def from_file(cls, path: str | Path) -> "ScenarioSpec":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read scenario {path}: {exc}") from exc
        return cls.from_dict(data)


@dataclass
class GroundTruth:
    seed: int
    regions: list[list[int]]
    node_map: dict[int, int]
    placement: str
    periods: list[dict]
    rng: str = RNG_ALGORITHM

    def to_dict(self) -> dict:
        return {
            "rng": self.rng,
            "seed": self.seed,
            "placement": self.placement,
            "regions": self.regions,
            "node_map": {str(k): v for k, v in sorted(self.node_map.items())},
            "periods": self.periods,
        }


def _build_node_map(spec: ScenarioSpec, rng: np.random.Generator) -> NodeMap:
    n = spec.process_count
    k = spec.node_count()
    ranks = list(range(n))
    if spec.placement == "good":
        # fill nodes contiguously, so regions stay together
        mapping = {r: min(r // spec.cores_per_node, k - 1) for r in ranks}
    elif spec.placement == "bad":
        # stripe ranks round-robin across nodes, splitting every region
        mapping = {r: r % k for r in ranks}
    else:
        order = list(ranks)
        rng.shuffle(order)
        mapping = {r: min(i // spec.cores_per_node, k - 1) for i, r in enumerate(order)}
    return NodeMap(mapping)


def _gateways(regions: list[list[int]], per_pair: int) -> list[tuple[int, int]]:
    pairs = []
    for a, b in zip(regions, regions[1:]):
        for g in range(per_pair):
            pairs.append((a[-1 - (g % len(a))], b[g % len(b)]))
    return sorted(set(pairs))


def generate(spec: ScenarioSpec) -> tuple[Trace, NodeMap, GroundTruth]:
    """Produce (unpaired trace, node map, ground truth) for a scenario."""
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    node_map = _build_node_map(spec, rng)

    regions: list[list[int]] = []
    start = 0
    for size in spec.regions:
        regions.append(list(range(start, start + size)))
        start += size
    region_of = {p: i for i, mem in enumerate(regions) for p in mem}
    gateways = _gateways(regions, spec.gateways_per_pair)
    all_ranks = list(range(spec.process_count))
    other_node: dict[int, list[int]] = {
        p: [q for q in all_ranks if node_map.mapping[q] != node_map.mapping[p]]
        for p in all_ranks
    }

    events: list[CommEvent] = []
    gt_periods: list[dict] = []
    clock = 0

    def emit(src: int, dst: int, send_ts: int, multiplier: float, size: int | None = None) -> None:
        if size is None:
            size = int(rng.integers(spec.size_min, spec.size_max + 1))
        t = spec.base_us + spec.us_per_byte * size
        if node_map.mapping[src] != node_map.mapping[dst]:
            t *= spec.inter_factor * multiplier
        if spec.noise > 0:
            t *= 1.0 + (2.0 * float(rng.random()) - 1.0) * spec.noise
        t_us = max(1, round(t))
        events.append(CommEvent(src, EventKind.SEND, send_ts, src, dst, size))
        events.append(CommEvent(dst, EventKind.RECV, send_ts + t_us, src, dst, size))

    for period in spec.periods:
        p_start = clock
        sub_bounds = []
        spiked: list[bool] = []
        for sub in range(period.durations):
            d_start = clock
            d_end = clock + period.duration_us
            sub_bounds.append({"start": d_start, "end": d_end})
            is_spiked = period.cause == "traffic" and sub % 2 == 1
            spiked.append(is_spiked)
            multiplier = spec.traffic_multiplier if is_spiked else 1.0

            for p in all_ranks:
                mates = [q for q in regions[region_of[p]] if q != p]
                for _ in range(spec.intra_rate):
                    roll = float(rng.random())
                    if period.cause == "mapping" and roll < spec.mapping_share and other_node[p]:
                        dst = other_node[p][int(rng.integers(0, len(other_node[p])))]
                    elif period.cause == "pattern" and roll < spec.hot_share:
                        hot = regions[region_of[p]][0]
                        dst = hot if hot != p else mates[0]
                    else:
                        dst = mates[int(rng.integers(0, len(mates)))]
                    ts = d_start + int(rng.integers(0, period.duration_us))
                    emit(p, dst, ts, multiplier)
            for gi, (a, b) in enumerate(gateways):
                for _ in range(spec.gateway_rate):
                    ts = d_start + int(rng.integers(0, period.duration_us))
                    emit(a, b, ts, multiplier,
                         size=spec.gateway_sizes[gi % len(spec.gateway_sizes)])
            clock = d_end
        gt_periods.append({
            "cause": period.cause,
            "start": p_start,
            "end": clock,
            "durations": sub_bounds,
            "spiked": spiked,
        })

    events.sort(key=CommEvent.sort_key)
    trace = Trace(events=events, ranks={e.rank for e in events})
    truth = GroundTruth(
        seed=spec.seed,
        regions=regions,
        node_map=dict(node_map.mapping),
        placement=spec.placement,
        periods=gt_periods,
    )
    return trace, node_map, truth
