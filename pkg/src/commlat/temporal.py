"""Temporal latency abstraction: bucketized series and trend periods.

A region's scored messages are grouped into fixed-width time buckets; a
sliding window over the bucket means then labels stretches as growth trend
(sustained positive slope), steady trend (held above the region average
with low variation), or compressed (everything else, kept only as start,
mid, and end timestamps plus aggregate stats).
"""

from __future__ import annotations

import enum
import math
import statistics
from dataclasses import dataclass

from .criteria import MessageLatency
from .errors import EmptyRegionError, ValidationError

DEFAULT_WINDOW = 5
DEFAULT_CV_MAX = 0.15
DEFAULT_STEADY_MARGIN = 0.05
SLOPE_MIN_FRACTION = 0.05   # default slope_min = fraction * Ave_region per bucket
MIN_BUCKET_US = 1_000       # auto bucket width floor: 1 ms
AUTO_BUCKET_DIVISOR = 200   # auto bucket width: span / 200
AUTO_MIN_PER_BUCKET = 8     # auto width widens until buckets average this many


class PeriodTag(enum.Enum):
    GROWTH = "growth"
    STEADY = "steady"
    COMPRESSED = "compressed"


@dataclass(frozen=True)
class SeriesBucket:
    start_ts: int
    end_ts: int
    mean_l: float       # 0.0 for empty buckets
    delayed: int
    messages: int


@dataclass
class LatencySeries:
    region_id: int
    bucket_us: int
    buckets: list[SeriesBucket]
    ave_region: float   # message-weighted mean L over the whole series


@dataclass(frozen=True)
class Period:
    tag: PeriodTag
    start: int
    mid: int
    end: int
    mean_l: float
    delayed: int
    messages: int


@dataclass
class TemporalAbstraction:
    region_id: int
    ave_region: float
    periods: list[Period]


def bucketize(
    scored: list[MessageLatency],
    region_id: int = 0,
    bucket_us: int | None = None,
) -> LatencySeries:
    """Group scored messages into contiguous time buckets keyed by send_ts."""
    if not scored:
        raise EmptyRegionError("no messages to bucketize")
    if bucket_us is not None and bucket_us <= 0:
        raise ValidationError("bucket_us must be positive")

    t0 = min(s.message.send_ts for s in scored)
    t1 = max(s.message.send_ts for s in scored)
    span = t1 - t0 + 1
    if bucket_us is None:
        # sparse traces get wider buckets so bucket means stay stable
        density_floor = math.ceil(span * AUTO_MIN_PER_BUCKET / len(scored))
        bucket_us = max(MIN_BUCKET_US, math.ceil(span / AUTO_BUCKET_DIVISOR), density_floor)
    n = (span + bucket_us - 1) // bucket_us

    sums = [0.0] * n
    counts = [0] * n
    delayed = [0] * n
    for s in scored:
        b = (s.message.send_ts - t0) // bucket_us
        sums[b] += s.l
        counts[b] += 1
        if s.delayed:
            delayed[b] += 1

    buckets = [
        SeriesBucket(
            start_ts=t0 + i * bucket_us,
            end_ts=t0 + (i + 1) * bucket_us,
            mean_l=sums[i] / counts[i] if counts[i] else 0.0,
            delayed=delayed[i],
            messages=counts[i],
        )
        for i in range(n)
    ]
    total = sum(counts)
    ave = statistics.fsum(s.l for s in scored) / total
    return LatencySeries(region_id=region_id, bucket_us=bucket_us, buckets=buckets, ave_region=ave)


def _ls_slope(values: list[float]) -> float:
    # least-squares slope against bucket index 0..k-1
    k = len(values)
    xbar = (k - 1) / 2.0
    ybar = sum(values) / k
    num = sum((i - xbar) * (v - ybar) for i, v in enumerate(values))
    den = sum((i - xbar) ** 2 for i in range(k))
    return num / den


def _make_period(tag: PeriodTag, buckets: list[SeriesBucket]) -> Period:
    start = buckets[0].start_ts
    end = buckets[-1].end_ts
    total = sum(b.messages for b in buckets)
    mean_l = (
        sum(b.mean_l * b.messages for b in buckets) / total if total else 0.0
    )
    return Period(
        tag=tag,
        start=start,
        mid=(start + end) // 2,
        end=end,
        mean_l=mean_l,
        delayed=sum(b.delayed for b in buckets),
        messages=total,
    )


def detect_periods(
    series: LatencySeries,
    window: int = DEFAULT_WINDOW,
    slope_min: float | None = None,
    cv_max: float = DEFAULT_CV_MAX,
    steady_margin: float = DEFAULT_STEADY_MARGIN,
) -> TemporalAbstraction:
    """Label the series with growth, steady, and compressed periods.

    A window qualifies as growth when its least-squares slope reaches
    slope_min (default: 5% of the region average per bucket), and as steady
    when its mean sits above the region average by steady_margin with a
    coefficient of variation at most cv_max. Buckets covered by qualifying
    windows inherit the label, growth winning overlaps; leftover stretches
    are compressed. A series shorter than the window is one compressed
    period.
    """
    if window < 3:
        raise ValidationError("window must be at least 3 buckets")
    buckets = series.buckets
    ave = series.ave_region
    if slope_min is None:
        slope_min = SLOPE_MIN_FRACTION * ave

    n = len(buckets)
    if n < window:
        return TemporalAbstraction(
            region_id=series.region_id,
            ave_region=ave,
            periods=[_make_period(PeriodTag.COMPRESSED, buckets)],
        )

    means = [b.mean_l for b in buckets]
    labels = [PeriodTag.COMPRESSED] * n
    steady_level = (1.0 + steady_margin) * ave
    for i in range(n - window + 1):
        vals = means[i:i + window]
        m = sum(vals) / window
        if m > 0:
            cv = statistics.pstdev(vals) / m
            if m >= steady_level and cv <= cv_max:
                labels[i:i + window] = [PeriodTag.STEADY] * window
    for i in range(n - window + 1):
        if _ls_slope(means[i:i + window]) >= slope_min:
            labels[i:i + window] = [PeriodTag.GROWTH] * window

    periods: list[Period] = []
    run_start = 0
    for i in range(1, n + 1):
        if i == n or labels[i] != labels[run_start]:
            periods.append(_make_period(labels[run_start], buckets[run_start:i]))
            run_start = i
    return TemporalAbstraction(region_id=series.region_id, ave_region=ave, periods=periods)
