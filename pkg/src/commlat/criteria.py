"""Statistical latency criteria and message latency scoring.

The criterion C for a (locality class, message-size bucket) is the median
transmission time of the calibration samples collected for that bucket.
A message's latency ratio is L = t / C; it is delayed when L > 1 (strict).
Region latency RL is the arithmetic mean of member L values.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import CalibrationError, EmptyRegionError, ValidationError
from .traces import Locality, Message, Trace

CRITERIA_HEADER = "locality,bucket_start,criterion_us,samples"

# Criteria are strictly positive; a zero median (sub-microsecond transfer)
# is floored at the 1 us tick so L stays finite.
MIN_CRITERION_US = 1.0


@dataclass
class LatencyCriteria:
    bucket_width: int
    # locality -> {bucket index -> criterion in us}; covers the contiguous
    # bucket range seen during calibration, gap buckets interpolated.
    tables: dict[Locality, dict[int, float]]
    sample_counts: dict[Locality, dict[int, int]] = field(default_factory=dict)

    def bucket_of(self, size: int) -> int:
        return size // self.bucket_width

    def criterion(self, size: int, locality: Locality) -> float:
        """Criterion for a message size, clamping/extrapolating outside the table.

        Below the first calibrated bucket the first criterion is used. Beyond
        the last one, the slope of the last two buckets extrapolates, floored
        at the last criterion.
        """
        table = self.tables.get(locality)
        if not table:
            raise CalibrationError(f"no criteria for locality {locality.value!r}")
        b = self.bucket_of(size)
        if b in table:
            return table[b]
        lo, hi = min(table), max(table)
        if b <= lo:
            return table[lo]
        if hi - 1 in table:
            slope = table[hi] - table[hi - 1]
        else:
            slope = 0.0
        return max(table[hi], table[hi] + slope * (b - hi))


@dataclass(frozen=True)
class MessageLatency:
    message: Message
    l: float
    delayed: bool


@dataclass(frozen=True)
class RegionLatency:
    region_id: int
    rl: float
    n: int


def _median_sorted(samples: list[float]) -> float:
    # samples already ascending; mean of the two middle elements when even
    n = len(samples)
    mid = n // 2
    if n % 2 == 1:
        return float(samples[mid])
    return (samples[mid - 1] + samples[mid]) / 2.0


def _reservoir(samples: list[int], cap: int, rng: np.random.Generator) -> list[int]:
    if len(samples) <= cap:
        return list(samples)
    kept = list(samples[:cap])
    for i in range(cap, len(samples)):
        j = int(rng.integers(0, i + 1))
        if j < cap:
            kept[j] = samples[i]
    return kept


def _interpolate_gaps(table: dict[int, float]) -> dict[int, float]:
    """Fill empty buckets between calibrated neighbours by linear interpolation."""
    buckets = sorted(table)
    out = dict(table)
    for left, right in zip(buckets, buckets[1:]):
        if right - left == 1:
            continue
        c0, c1 = table[left], table[right]
        for b in range(left + 1, right):
            frac = (b - left) / (right - left)
            out[b] = c0 + (c1 - c0) * frac
    return out


def build_criteria(
    trace: Trace,
    bucket_width: int = 50,
    max_samples_per_bucket: int = 10_000,
    seed: int = 9,
) -> LatencyCriteria:
    """Build per-(locality, size bucket) median criteria from a paired trace.

    Both locality classes must have at least one usable sample; skew-flagged
    messages never contribute. Oversubscribed buckets are reservoir-sampled
    with a seeded generator so results are reproducible.
    """
    if bucket_width <= 0:
        raise ValidationError("bucket_width must be positive")
    if not trace.messages:
        raise CalibrationError("trace has no paired messages")
    if trace.node_map is None:
        raise CalibrationError("trace has no node map; locality unknown")

    raw: dict[Locality, dict[int, list[int]]] = {
        Locality.INTRA_NODE: {},
        Locality.INTER_NODE: {},
    }
    for msg in trace.messages:
        if msg.skew:
            continue
        assert msg.locality is not None
        raw[msg.locality].setdefault(msg.size // bucket_width, []).append(msg.transmission_time)

    rng = np.random.default_rng(seed)
    tables: dict[Locality, dict[int, float]] = {}
    counts: dict[Locality, dict[int, int]] = {}
    for locality, by_bucket in raw.items():
        if not by_bucket:
            raise CalibrationError(f"no {locality.value}-node messages to calibrate from")
        table: dict[int, float] = {}
        cnt: dict[int, int] = {}
        for b in sorted(by_bucket):
            samples = _reservoir(by_bucket[b], max_samples_per_bucket, rng)
            samples.sort()
            table[b] = max(_median_sorted(samples), MIN_CRITERION_US)
            cnt[b] = len(samples)
        tables[locality] = _interpolate_gaps(table)
        counts[locality] = {b: cnt.get(b, 0) for b in tables[locality]}
    return LatencyCriteria(bucket_width=bucket_width, tables=tables, sample_counts=counts)


def score_message(msg: Message, criteria: LatencyCriteria) -> MessageLatency:
    if msg.locality is None:
        raise ValidationError("message has no locality; attach a node map first")
    c = criteria.criterion(msg.size, msg.locality)
    l = msg.transmission_time / c
    return MessageLatency(message=msg, l=l, delayed=l > 1.0)


def score_messages(messages: Iterable[Message], criteria: LatencyCriteria) -> list[MessageLatency]:
    """Score every non-skew message; skew-flagged ones stay out of statistics."""
    return [score_message(m, criteria) for m in messages if not m.skew]


def region_latency(scored: list[MessageLatency], region_id: int = 0) -> RegionLatency:
    if not scored:
        raise EmptyRegionError("region has no messages")
    total = statistics.fsum(s.l for s in scored)
    return RegionLatency(region_id=region_id, rl=total / len(scored), n=len(scored))


def criteria_to_csv(criteria: LatencyCriteria) -> str:
    lines = [CRITERIA_HEADER]
    for locality in (Locality.INTRA_NODE, Locality.INTER_NODE):
        table = criteria.tables.get(locality, {})
        counts = criteria.sample_counts.get(locality, {})
        for b in sorted(table):
            start = b * criteria.bucket_width
            lines.append(f"{locality.value},{start},{table[b]!r},{counts.get(b, 0)}")
    return "\n".join(lines) + "\n"


def criteria_from_csv(text: str, bucket_width: int = 50) -> LatencyCriteria:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != CRITERIA_HEADER:
        raise ValidationError(f"bad criteria header, expected {CRITERIA_HEADER!r}")
    tables: dict[Locality, dict[int, float]] = {}
    counts: dict[Locality, dict[int, int]] = {}
    for ln in lines[1:]:
        loc_s, start_s, crit_s, n_s = ln.split(",")
        locality = Locality(loc_s)
        b = int(start_s) // bucket_width
        tables.setdefault(locality, {})[b] = float(crit_s)
        counts.setdefault(locality, {})[b] = int(n_s)
    if not tables:
        raise ValidationError("criteria file has no rows")
    return LatencyCriteria(bucket_width=bucket_width, tables=tables, sample_counts=counts)
