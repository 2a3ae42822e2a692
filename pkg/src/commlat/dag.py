"""Causality analysis: vector clocks, happened-before, and the dependency DAG.

Clocks follow the classic per-process counter rules: a send increments the
sender's own component and ships a copy with the message; a receive
increments the receiver's own component and then takes the component-wise
maximum with the shipped clock. Component-wise dominance defines
happened-before; crossing components mean concurrency.

The DAG groups each process's events into nodes: a send joins the newest
node of its process, a receive joins the newest node of its process that
holds no send yet, and every matched message adds a sender-node to
receiver-node edge. Nodes carry load-balance scores and the per-message
payload the communication-state glyphs render.
"""

from __future__ import annotations

import enum
import heapq
from dataclasses import dataclass, field

from .criteria import LatencyCriteria, score_message
from .errors import InternalConsistencyError, ValidationError
from .traces import CommEvent, EventKind, Message, Trace


class Relation(enum.Enum):
    BEFORE = "before"
    AFTER = "after"
    CONCURRENT = "concurrent"
    EQUAL = "equal"


@dataclass
class WindowEvents:
    """A [start, end) slice of a trace restricted to the given processes.

    pair_of maps a local event index to its counterpart's local index for
    messages fully inside the window. Receives whose send lies outside the
    window (or was skew-flagged) appear in entry_receives and carry no
    dependency.
    """

    events: list[CommEvent]
    ranks: list[int]
    pair_of: dict[int, int]
    messages: dict[tuple[int, int], Message]    # (send idx, recv idx) -> message
    entry_receives: set[int]


def window_events(
    trace: Trace,
    start: int | None = None,
    end: int | None = None,
    processes: set[int] | None = None,
) -> WindowEvents:
    if start is not None and end is not None and start >= end:
        raise ValidationError(f"invalid window [{start}, {end})")

    def inside(ev: CommEvent) -> bool:
        if processes is not None and ev.rank not in processes:
            return False
        if start is not None and ev.timestamp < start:
            return False
        if end is not None and ev.timestamp >= end:
            return False
        return True

    local_of: dict[int, int] = {}
    events: list[CommEvent] = []
    for idx, ev in enumerate(trace.events):
        if inside(ev):
            local_of[idx] = len(events)
            events.append(ev)
    if not events:
        raise ValidationError("window contains no events")

    pair_of: dict[int, int] = {}
    messages: dict[tuple[int, int], Message] = {}
    paired_recvs: set[int] = set()
    for msg in trace.messages:
        si = local_of.get(msg.send_index)
        ri = local_of.get(msg.recv_index)
        if ri is not None:
            paired_recvs.add(ri)
        if si is None or ri is None or msg.skew:
            # a skewed pair cannot be a dependency; treat its recv as entry
            continue
        pair_of[si] = ri
        pair_of[ri] = si
        messages[(si, ri)] = msg

    entry = {
        i for i, ev in enumerate(events)
        if ev.kind is EventKind.RECV and i not in pair_of
    }
    ranks = sorted({e.rank for e in events})
    return WindowEvents(events=events, ranks=ranks, pair_of=pair_of,
                        messages=messages, entry_receives=entry)


def vector_clocks(window: WindowEvents) -> list[tuple[int, ...]]:
    """Clock per window event, components ordered by sorted rank."""
    pos = {r: i for i, r in enumerate(window.ranks)}
    width = len(window.ranks)
    current: dict[int, list[int]] = {r: [0] * width for r in window.ranks}
    clocks: list[tuple[int, ...]] = [()] * len(window.events)

    for i, ev in enumerate(window.events):
        vec = current[ev.rank]
        vec[pos[ev.rank]] += 1
        if ev.kind is EventKind.RECV and i in window.pair_of:
            shipped = clocks[window.pair_of[i]]
            for k in range(width):
                if shipped[k] > vec[k]:
                    vec[k] = shipped[k]
        clocks[i] = tuple(vec)
    return clocks


def happened_before(a: tuple[int, ...], b: tuple[int, ...]) -> Relation:
    if len(a) != len(b):
        raise ValidationError(f"clock length mismatch: {len(a)} vs {len(b)}")
    a_le_b = all(x <= y for x, y in zip(a, b))
    b_le_a = all(y <= x for x, y in zip(a, b))
    if a_le_b and b_le_a:
        return Relation.EQUAL
    if a_le_b:
        return Relation.BEFORE
    if b_le_a:
        return Relation.AFTER
    return Relation.CONCURRENT


def logical_order(window: WindowEvents) -> list[int]:
    """Ascending logical order: topological sort of program + message order,
    breaking ties by (timestamp, rank, kind)."""
    n = len(window.events)
    succs: list[list[int]] = [[] for _ in range(n)]
    indeg = [0] * n

    last_at: dict[int, int] = {}
    for i, ev in enumerate(window.events):
        if ev.rank in last_at:
            succs[last_at[ev.rank]].append(i)
            indeg[i] += 1
        last_at[ev.rank] = i
    for (si, ri) in window.messages:
        succs[si].append(ri)
        indeg[ri] += 1

    def key(i: int) -> tuple[int, int, int, int]:
        ev = window.events[i]
        return (ev.timestamp, ev.rank, 0 if ev.kind is EventKind.SEND else 1, i)

    ready = [key(i) for i in range(n) if indeg[i] == 0]
    heapq.heapify(ready)
    order: list[int] = []
    while ready:
        i = heapq.heappop(ready)[-1]
        order.append(i)
        for j in succs[i]:
            indeg[j] -= 1
            if indeg[j] == 0:
                heapq.heappush(ready, key(j))
    if len(order) != n:
        raise InternalConsistencyError("event dependencies contain a cycle")
    return order


@dataclass
class DagNode:
    node_id: int
    pid: int
    event_indices: list[int] = field(default_factory=list)
    layer: int = 0
    lb: float = 0.0
    node_latency: float | None = None


@dataclass
class DagEdge:
    src: int            # sender node id
    dst: int            # receiver node id
    message: Message
    l: float | None = None


@dataclass
class CommDag:
    nodes: list[DagNode]
    edges: list[DagEdge]
    window: WindowEvents
    clocks: list[tuple[int, ...]]
    load: "LoadBalance"


@dataclass
class LoadBalance:
    mc: dict[int, int]
    mc_avg: float
    ad: float
    lb: dict[int, float]


def load_balance(events: list[CommEvent], processes: list[int]) -> LoadBalance:
    """Load balance per process: LB_p = |mc_p - mc_avg| / AD, all zero when AD = 0."""
    if not processes:
        raise ValidationError("load balance needs at least one process")
    mc = {p: 0 for p in processes}
    for ev in events:
        if ev.rank in mc:
            mc[ev.rank] += 1
    n = len(processes)
    avg = sum(mc.values()) / n
    ad = sum(abs(c - avg) for c in mc.values()) / n
    if ad == 0:
        lb = {p: 0.0 for p in processes}
    else:
        lb = {p: abs(c - avg) / ad for p, c in mc.items()}
    return LoadBalance(mc=mc, mc_avg=avg, ad=ad, lb=lb)


def build_dag(window: WindowEvents, criteria: LatencyCriteria | None = None) -> CommDag:
    """Construct the communication-dependency DAG over a window.

    Events are consumed in ascending logical order. The result is checked
    acyclic; a cycle means the ordering contract was violated upstream.
    """
    clocks = vector_clocks(window)
    order = logical_order(window)

    nodes: list[DagNode] = []
    edges: list[DagEdge] = []
    node_of_event: dict[int, int] = {}
    by_pid: dict[int, list[int]] = {}          # pid -> node ids, oldest first
    has_send: dict[int, bool] = {}

    def new_node(pid: int) -> int:
        nid = len(nodes)
        nodes.append(DagNode(node_id=nid, pid=pid))
        by_pid.setdefault(pid, []).append(nid)
        has_send[nid] = False
        return nid

    for i in order:
        ev = window.events[i]
        if ev.kind is EventKind.SEND:
            candidates = by_pid.get(ev.rank)
            nid = candidates[-1] if candidates else new_node(ev.rank)
            has_send[nid] = True
        else:
            nid = None
            for cand in reversed(by_pid.get(ev.rank, [])):
                if not has_send[cand]:
                    nid = cand
                    break
            if nid is None:
                nid = new_node(ev.rank)
            si = window.pair_of.get(i)
            if si is not None and window.events[si].kind is EventKind.SEND:
                msg = window.messages[(si, i)]
                edges.append(DagEdge(src=node_of_event[si], dst=nid, message=msg))
        nodes[nid].event_indices.append(i)
        node_of_event[i] = nid

    _check_acyclic_and_layer(nodes, edges)
    _annotate(nodes, edges, window, criteria)
    lb = load_balance(window.events, window.ranks)
    for node in nodes:
        node.lb = lb.lb[node.pid]
    return CommDag(nodes=nodes, edges=edges, window=window, clocks=clocks, load=lb)


def _check_acyclic_and_layer(nodes: list[DagNode], edges: list[DagEdge]) -> None:
    n = len(nodes)
    succs: list[list[int]] = [[] for _ in range(n)]
    indeg = [0] * n
    for e in edges:
        succs[e.src].append(e.dst)
        indeg[e.dst] += 1
    ready = [i for i in range(n) if indeg[i] == 0]
    layer = [0] * n
    seen = 0
    while ready:
        nxt: list[int] = []
        for i in ready:
            seen += 1
            for j in succs[i]:
                layer[j] = max(layer[j], layer[i] + 1)
                indeg[j] -= 1
                if indeg[j] == 0:
                    nxt.append(j)
        ready = nxt
    if seen != n:
        raise InternalConsistencyError("communication DAG contains a cycle")
    for node in nodes:
        node.layer = layer[node.node_id]


def _annotate(
    nodes: list[DagNode],
    edges: list[DagEdge],
    window: WindowEvents,
    criteria: LatencyCriteria | None,
) -> None:
    if criteria is not None:
        for e in edges:
            e.l = score_message(e.message, criteria).l
    incident: dict[int, list[float]] = {}
    for e in edges:
        if e.l is None:
            continue
        incident.setdefault(e.src, []).append(e.l)
        incident.setdefault(e.dst, []).append(e.l)
    for node in nodes:
        ls = incident.get(node.node_id)
        node.node_latency = sum(ls) / len(ls) if ls else None
