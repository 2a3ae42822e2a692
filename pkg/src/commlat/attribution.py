"""Latency cause attribution: mapping quality, pattern balance, traffic noise.

Three signals are computed over the durations of a period:

  mapping   intra- vs inter-node message counts per duration plus overall
            totals; a high inter-node share points at a poor
            process-to-processor mapping.
  pattern   per-duration load-balance statistics over the active processes.
            The mean of the normalized LB scores is 1 by construction
            whenever the counts deviate at all, so the actionable series is
            the relative imbalance AD / mc_avg (0 = perfectly balanced).
  traffic   per-(duration, size-bucket) mean transmission time of inter-node
            messages; high variation across durations for the same size
            means background traffic.

The verdict picks the dominant normalized score with deterministic
tie-breaking mapping > pattern > traffic, and maps the winner to a
recommendation: remap, revise the communication algorithm, or rerun later.
"""

from __future__ import annotations

import itertools
import statistics
from dataclasses import dataclass, field

import numpy as np

from .config import AnalysisConfig
from .criteria import LatencyCriteria
from .errors import InfeasibleMappingError, ValidationError
from .regions import CommGraph
from .traces import CommEvent, Locality, Message, NodeMap

CAUSE_MAPPING = "PoorMapping"
CAUSE_PATTERN = "PoorPattern"
CAUSE_TRAFFIC = "BackgroundTraffic"

RECOMMENDATIONS = {
    CAUSE_MAPPING: "remap processes so heavy communicators share a physical node",
    CAUSE_PATTERN: "revise the communication algorithm to even out per-process load",
    CAUSE_TRAFFIC: "rerun when the shared interconnect is calmer",
}


@dataclass(frozen=True)
class Duration:
    start: int
    end: int    # half-open [start, end)

    def contains(self, ts: int) -> bool:
        return self.start <= ts < self.end


def equal_durations(start: int, end: int, count: int) -> list[Duration]:
    if end <= start or count < 1:
        raise ValidationError("bad duration split")
    edges = [start + (end - start) * i // count for i in range(count)] + [end]
    return [Duration(a, b) for a, b in zip(edges, edges[1:]) if b > a]


@dataclass
class MappingSignal:
    durations: list[Duration]
    intra: list[int]
    inter: list[int]
    total_intra: int = 0
    total_inter: int = 0

    def __post_init__(self) -> None:
        self.total_intra = sum(self.intra)
        self.total_inter = sum(self.inter)

    @property
    def inter_ratio(self) -> float:
        total = self.total_intra + self.total_inter
        return self.total_inter / total if total else 0.0


@dataclass
class PatternSignal:
    durations: list[Duration]
    mean_lb: list[float]        # mean AD-normalized score over actives (1 or 0)
    imbalance: list[float]      # AD / mc_avg per duration, 0 = balanced
    active: list[int]
    lb_by_process: list[dict[int, float]]
    peaks: list[int] = field(default_factory=list)
    peak_threshold: float = 0.5

    def __post_init__(self) -> None:
        if not self.peaks:
            self.peaks = [i for i, v in enumerate(self.imbalance) if v > self.peak_threshold]


@dataclass
class TrafficSignal:
    durations: list[Duration]
    buckets: list[int]                      # bucket start sizes in bytes
    means: dict[int, list[float | None]]    # bucket -> per-duration mean time
    normalized: dict[int, list[float | None]]
    cv: dict[int, float]                    # bucket -> fluctuation across durations

    @property
    def max_cv(self) -> float:
        return max(self.cv.values(), default=0.0)

    @property
    def least_fluctuating_bucket(self) -> int | None:
        if not self.cv:
            return None
        return min(self.cv, key=lambda b: (self.cv[b], b))


@dataclass(frozen=True)
class AttributionVerdict:
    period: Duration
    scores: dict[str, float]
    dominant: str
    recommendation: str
    poor_mapping_flag: bool


def mapping_signal(
    messages: list[Message],
    node_map: NodeMap,
    durations: list[Duration],
) -> MappingSignal:
    intra = [0] * len(durations)
    inter = [0] * len(durations)
    for msg in messages:
        for i, d in enumerate(durations):
            if d.contains(msg.send_ts):
                if node_map.locality(msg.source, msg.destination) is Locality.INTRA_NODE:
                    intra[i] += 1
                else:
                    inter[i] += 1
                break
    return MappingSignal(durations=durations, intra=intra, inter=inter)


def pattern_signal(
    events: list[CommEvent],
    durations: list[Duration],
    peak_threshold: float = 0.5,
) -> PatternSignal:
    mean_lb: list[float] = []
    imbalance: list[float] = []
    active_counts: list[int] = []
    lb_maps: list[dict[int, float]] = []
    for d in durations:
        counts: dict[int, int] = {}
        for ev in events:
            if d.contains(ev.timestamp):
                counts[ev.rank] = counts.get(ev.rank, 0) + 1
        active_counts.append(len(counts))
        if not counts:
            mean_lb.append(0.0)
            imbalance.append(0.0)
            lb_maps.append({})
            continue
        n = len(counts)
        avg = sum(counts.values()) / n
        ad = sum(abs(c - avg) for c in counts.values()) / n
        if ad == 0:
            lb = {p: 0.0 for p in counts}
        else:
            lb = {p: abs(c - avg) / ad for p, c in counts.items()}
        mean_lb.append(sum(lb.values()) / n)
        imbalance.append(ad / avg if avg > 0 else 0.0)
        lb_maps.append(lb)
    return PatternSignal(
        durations=durations,
        mean_lb=mean_lb,
        imbalance=imbalance,
        active=active_counts,
        lb_by_process=lb_maps,
        peak_threshold=peak_threshold,
    )


def traffic_signal(
    messages: list[Message],
    criteria: LatencyCriteria,
    durations: list[Duration],
) -> TrafficSignal:
    width = criteria.bucket_width
    sums: dict[int, list[float]] = {}
    counts: dict[int, list[int]] = {}
    for msg in messages:
        if msg.locality is not Locality.INTER_NODE or msg.skew:
            continue
        b = msg.size // width
        for i, d in enumerate(durations):
            if d.contains(msg.send_ts):
                if b not in sums:
                    sums[b] = [0.0] * len(durations)
                    counts[b] = [0] * len(durations)
                sums[b][i] += msg.transmission_time
                counts[b][i] += 1
                break

    means: dict[int, list[float | None]] = {}
    normalized: dict[int, list[float | None]] = {}
    cv: dict[int, float] = {}
    for b in sorted(sums):
        row = [
            sums[b][i] / counts[b][i] if counts[b][i] else None
            for i in range(len(durations))
        ]
        means[b * width] = row
        present = [v for v in row if v is not None]
        peak = max(present)
        normalized[b * width] = [None if v is None else (v / peak if peak else 0.0) for v in row]
        if len(present) >= 2:
            mean = sum(present) / len(present)
            cv[b * width] = statistics.pstdev(present) / mean if mean > 0 else 0.0
    return TrafficSignal(
        durations=durations,
        buckets=sorted(means),
        means=means,
        normalized=normalized,
        cv=cv,
    )


def attribute(
    mapping: MappingSignal,
    pattern: PatternSignal,
    traffic: TrafficSignal,
    config: AnalysisConfig | None = None,
    period: Duration | None = None,
) -> AttributionVerdict:
    """Score the three causes in [0, 1] and pick the dominant one."""
    cfg = config or AnalysisConfig()
    if period is None:
        period = Duration(mapping.durations[0].start, mapping.durations[-1].end)

    score_map = mapping.inter_ratio
    mean_imb = (
        sum(pattern.imbalance) / len(pattern.imbalance) if pattern.imbalance else 0.0
    )
    score_pat = min(1.0, mean_imb / cfg.pattern_ceiling)
    score_tra = min(1.0, traffic.max_cv / cfg.traffic_cv_ceiling)

    scores = {
        CAUSE_MAPPING: score_map,
        CAUSE_PATTERN: score_pat,
        CAUSE_TRAFFIC: score_tra,
    }
    # argmax with fixed precedence on exact ties
    dominant = max(
        (CAUSE_MAPPING, CAUSE_PATTERN, CAUSE_TRAFFIC),
        key=lambda c: (scores[c], -list(scores).index(c)),
    )
    return AttributionVerdict(
        period=period,
        scores=scores,
        dominant=dominant,
        recommendation=RECOMMENDATIONS[dominant],
        poor_mapping_flag=mapping.inter_ratio > cfg.inter_ratio_flag,
    )


@dataclass
class RemapResult:
    node_map: NodeMap
    before: int
    after: int
    changed: bool


def _cut_weight(graph: CommGraph, assign: dict[int, int]) -> int:
    return sum(
        w for (a, b), w in graph.weights.items() if assign[a] != assign[b]
    )


def recommend_remap(
    graph: CommGraph,
    node_map: NodeMap,
    cores_per_node: int,
    restarts: int = 6,
    seed: int = 17,
) -> RemapResult:
    """Balanced graph partition minimizing inter-node message count.

    Greedy growth from several deterministic seed orders plus pairwise-swap
    refinement until no swap improves; the input mapping (also refined) is
    one of the candidates, and the input is returned unchanged unless a
    strictly better cut was found.
    """
    pids = list(graph.vertices)
    n = len(pids)
    if cores_per_node < 1:
        raise InfeasibleMappingError("cores_per_node must be at least 1")
    node_ids = node_map.nodes()
    k = len(node_ids)
    if k * cores_per_node < n:
        raise InfeasibleMappingError(
            f"{k} nodes x {cores_per_node} cores cannot hold {n} processes"
        )

    degree = {p: 0 for p in pids}
    adj_w: dict[int, dict[int, int]] = {p: {} for p in pids}
    for (a, b), w in graph.weights.items():
        degree[a] += w
        degree[b] += w
        adj_w[a][b] = adj_w[a].get(b, 0) + w
        adj_w[b][a] = adj_w[b].get(a, 0) + w

    def greedy(order: list[int]) -> dict[int, int]:
        sizes = [0] * k
        cap = [cores_per_node] * k
        assign: dict[int, int] = {}
        target = [n // k + (1 if i < n % k else 0) for i in range(k)]
        unassigned = list(order)
        for part in range(k):
            if not unassigned:
                break
            seed_pid = unassigned.pop(0)
            assign[seed_pid] = part
            sizes[part] += 1
            while sizes[part] < target[part] and unassigned:
                best_i, best_gain = 0, -1
                for i, p in enumerate(unassigned):
                    gain = sum(
                        w for q, w in adj_w[p].items() if assign.get(q) == part
                    )
                    if gain > best_gain:
                        best_i, best_gain = i, gain
                assign[unassigned.pop(best_i)] = part
                sizes[part] += 1
        for p in unassigned:
            part = min(range(k), key=lambda i: (sizes[i], i))
            if sizes[part] >= cap[part]:
                raise InfeasibleMappingError("capacity exhausted during greedy growth")
            assign[p] = part
            sizes[part] += 1
        return assign

    def refine(assign: dict[int, int]) -> dict[int, int]:
        assign = dict(assign)
        sizes = [0] * k
        for part in assign.values():
            sizes[part] += 1
        improved = True
        while improved:
            improved = False
            # single moves into spare capacity
            for p in pids:
                cur = assign[p]
                w_cur = sum(w for q, w in adj_w[p].items() if assign[q] == cur)
                for part in range(k):
                    if part == cur or sizes[part] >= cores_per_node:
                        continue
                    w_new = sum(w for q, w in adj_w[p].items() if assign[q] == part)
                    if w_new > w_cur:
                        assign[p] = part
                        sizes[cur] -= 1
                        sizes[part] += 1
                        cur = part
                        w_cur = w_new
                        improved = True
            # pairwise swaps
            for a, b in itertools.combinations(pids, 2):
                pa, pb = assign[a], assign[b]
                if pa == pb:
                    continue
                before = (
                    sum(w for q, w in adj_w[a].items() if assign[q] != pa)
                    + sum(w for q, w in adj_w[b].items() if assign[q] != pb)
                )
                assign[a], assign[b] = pb, pa
                after = (
                    sum(w for q, w in adj_w[a].items() if assign[q] != pb)
                    + sum(w for q, w in adj_w[b].items() if assign[q] != pa)
                )
                if after < before:
                    improved = True
                else:
                    assign[a], assign[b] = pa, pb
        return assign

    rng = np.random.default_rng(seed)

    def perturbed_descent(start: dict[int, int], kicks: int = 4) -> dict[int, int]:
        # iterated local search: kick a refined optimum with one forced swap
        best = refine(start)
        best_cut = _cut_weight(graph, best)
        for _ in range(kicks):
            kicked = dict(best)
            a, b = (pids[int(i)] for i in rng.integers(0, n, size=2))
            if kicked[a] == kicked[b]:
                continue
            kicked[a], kicked[b] = kicked[b], kicked[a]
            cand = refine(kicked)
            cut = _cut_weight(graph, cand)
            if cut < best_cut:
                best, best_cut = cand, cut
        return best

    input_assign = {p: node_ids.index(node_map.node_of(p)) for p in pids}
    before = _cut_weight(graph, input_assign)

    candidates = []
    input_sizes = [0] * k
    for part in input_assign.values():
        input_sizes[part] += 1
    if all(s <= cores_per_node for s in input_sizes):
        # refining an over-capacity input could propagate the violation
        candidates.append(perturbed_descent(input_assign))
    by_degree = sorted(pids, key=lambda p: (-degree[p], p))
    candidates.append(perturbed_descent(greedy(by_degree)))
    for _ in range(max(0, restarts - 2)):
        order = list(pids)
        rng.shuffle(order)
        candidates.append(perturbed_descent(greedy(order)))

    best = min(candidates, key=lambda a: _cut_weight(graph, a))
    after = _cut_weight(graph, best)
    if after >= before:
        return RemapResult(node_map=node_map, before=before, after=before, changed=False)
    mapping = {p: node_ids[part] for p, part in best.items()}
    # ranks outside the graph keep their original placement
    for rank, node in node_map.mapping.items():
        mapping.setdefault(rank, node)
    return RemapResult(node_map=NodeMap(mapping), before=before, after=after, changed=True)
