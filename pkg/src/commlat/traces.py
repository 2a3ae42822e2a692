"""Trace ingest: parse communication event logs, pair sends with receives.

Wire formats (External Interfaces):
  trace CSV   header ``rank,kind,timestamp,src,dst,size``, kind in {send,recv}
  trace JSONL one object per line with the same six keys
  node map    CSV header ``rank,node``

Pairing follows MPI non-overtaking order: on each (source, destination)
channel the k-th send matches the k-th receive, both in timestamp order.
A matched pair with recv before send (clock skew) is kept for topology but
flagged and excluded from latency statistics.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .errors import TraceFormatError, UnknownRankError, ValidationError

TRACE_HEADER = "rank,kind,timestamp,src,dst,size"
NODE_MAP_HEADER = "rank,node"


class EventKind(enum.Enum):
    SEND = "send"
    RECV = "recv"


class Locality(enum.Enum):
    INTRA_NODE = "intra"
    INTER_NODE = "inter"


@dataclass(frozen=True, slots=True)
class CommEvent:
    rank: int
    kind: EventKind
    timestamp: int          # wall-clock microseconds
    source: int
    destination: int
    size: int               # bytes

    def sort_key(self) -> tuple[int, int, int]:
        # Send before Receive on timestamp+rank ties.
        return (self.timestamp, self.rank, 0 if self.kind is EventKind.SEND else 1)


@dataclass(slots=True)
class Message:
    source: int
    destination: int
    size: int               # size declared by the send event
    send_ts: int
    recv_ts: int
    send_index: int         # indices into Trace.events
    recv_index: int
    locality: Locality | None = None
    skew: bool = False      # recv_ts < send_ts; excluded from statistics

    @property
    def transmission_time(self) -> int:
        return self.recv_ts - self.send_ts


@dataclass(frozen=True)
class NodeMap:
    mapping: dict[int, int]

    def node_of(self, rank: int) -> int:
        try:
            return self.mapping[rank]
        except KeyError:
            raise UnknownRankError(rank) from None

    def locality(self, source: int, destination: int) -> Locality:
        if self.node_of(source) == self.node_of(destination):
            return Locality.INTRA_NODE
        return Locality.INTER_NODE

    def nodes(self) -> list[int]:
        return sorted(set(self.mapping.values()))


@dataclass
class PairingReport:
    matched: int = 0
    unmatched_sends: int = 0
    unmatched_receives: int = 0
    skew_flagged: int = 0

    def to_dict(self) -> dict:
        return {
            "matched": self.matched,
            "unmatched_sends": self.unmatched_sends,
            "unmatched_receives": self.unmatched_receives,
            "skew_flagged": self.skew_flagged,
        }


@dataclass
class Trace:
    events: list[CommEvent]
    ranks: set[int]
    node_map: NodeMap | None = None
    messages: list[Message] = field(default_factory=list)
    pairing: PairingReport | None = None
    parse_errors: list[tuple[int, str]] = field(default_factory=list)

    @property
    def span(self) -> tuple[int, int]:
        return (self.events[0].timestamp, self.events[-1].timestamp)


def _parse_csv_line(line: str) -> CommEvent:
    parts = line.split(",")
    if len(parts) != 6:
        raise ValueError(f"expected 6 fields, got {len(parts)}")
    rank, kind_s, ts, src, dst, size = (p.strip() for p in parts)
    return _make_event(rank, kind_s, ts, src, dst, size)


def _parse_jsonl_line(line: str) -> CommEvent:
    obj = json.loads(line)
    if not isinstance(obj, dict):
        raise ValueError("line is not a JSON object")
    missing = {"rank", "kind", "timestamp", "src", "dst", "size"} - set(obj)
    if missing:
        raise ValueError(f"missing keys: {sorted(missing)}")
    return _make_event(obj["rank"], obj["kind"], obj["timestamp"], obj["src"], obj["dst"], obj["size"])


def _make_event(rank, kind_s, ts, src, dst, size) -> CommEvent:
    try:
        kind = EventKind(str(kind_s).lower())
    except ValueError:
        raise ValueError(f"kind must be send or recv, got {kind_s!r}") from None
    rank, ts, src, dst, size = (int(rank), int(ts), int(src), int(dst), int(size))
    if rank < 0 or src < 0 or dst < 0:
        raise ValueError("process ids must be non-negative")
    if ts < 0:
        raise ValueError("timestamp must be non-negative")
    if size < 0:
        raise ValueError("size must be non-negative")
    if src == dst:
        raise ValueError("self-message (src == dst) rejected")
    if kind is EventKind.SEND and rank != src:
        raise ValueError(f"send event rank {rank} != src {src}")
    if kind is EventKind.RECV and rank != dst:
        raise ValueError(f"recv event rank {rank} != dst {dst}")
    return CommEvent(rank, kind, ts, src, dst, size)


def parse_events(lines: Iterable[str], fmt: str = "csv", lenient: bool = False) -> Trace:
    """Parse raw trace lines into a sorted, validated Trace (messages unpaired).

    In strict mode (default) any malformed line fails the parse; the raised
    TraceFormatError carries the full per-line report. With lenient=True the
    offending lines are reported on the Trace and skipped.
    """
    if fmt not in ("csv", "jsonl"):
        raise ValidationError(f"unknown trace format {fmt!r}")
    parse_line = _parse_csv_line if fmt == "csv" else _parse_jsonl_line

    events: list[CommEvent] = []
    errors: list[tuple[int, str]] = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        if fmt == "csv" and lineno == 1:
            if line != TRACE_HEADER:
                raise TraceFormatError(f"bad CSV header {line!r}, expected {TRACE_HEADER!r}")
            continue
        try:
            events.append(parse_line(line))
        except (ValueError, json.JSONDecodeError) as exc:
            errors.append((lineno, str(exc)))

    if errors and not lenient:
        head = "; ".join(f"line {n}: {msg}" for n, msg in errors[:5])
        raise TraceFormatError(f"{len(errors)} malformed line(s): {head}", errors)
    if not events:
        raise TraceFormatError("trace contains no events")

    events.sort(key=CommEvent.sort_key)
    ranks = {e.rank for e in events}
    return Trace(events=events, ranks=ranks, parse_errors=errors)


def parse_trace(path: str | Path, fmt: str | None = None, lenient: bool = False) -> Trace:
    path = Path(path)
    if fmt is None:
        fmt = "jsonl" if path.suffix in (".jsonl", ".ndjson", ".json") else "csv"
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read trace {path}: {exc}") from exc
    return parse_events(text.splitlines(), fmt=fmt, lenient=lenient)


def pair_messages(trace: Trace) -> Trace:
    """Populate trace.messages by FIFO matching per (source, destination) channel.

    The k-th send on a channel pairs with the k-th receive; surplus events on
    either side are counted as unmatched. Matching looks only at per-channel
    timestamp order, so it is stable under any event permutation preserving it.
    """
    channels: dict[tuple[int, int], tuple[list[int], list[int]]] = {}
    for idx, ev in enumerate(trace.events):
        sends, recvs = channels.setdefault((ev.source, ev.destination), ([], []))
        (sends if ev.kind is EventKind.SEND else recvs).append(idx)

    messages: list[Message] = []
    report = PairingReport()
    for (src, dst), (sends, recvs) in channels.items():
        n = min(len(sends), len(recvs))
        report.matched += n
        report.unmatched_sends += len(sends) - n
        report.unmatched_receives += len(recvs) - n
        for si, ri in zip(sends[:n], recvs[:n]):
            send_ev, recv_ev = trace.events[si], trace.events[ri]
            msg = Message(
                source=src,
                destination=dst,
                size=send_ev.size,
                send_ts=send_ev.timestamp,
                recv_ts=recv_ev.timestamp,
                send_index=si,
                recv_index=ri,
                skew=recv_ev.timestamp < send_ev.timestamp,
            )
            if msg.skew:
                report.skew_flagged += 1
            messages.append(msg)

    messages.sort(key=lambda m: (m.send_ts, m.source, m.destination, m.recv_ts))
    trace.messages = messages
    trace.pairing = report
    if trace.node_map is not None:
        annotate_locality(trace)
    return trace


def annotate_locality(trace: Trace) -> None:
    node_map = trace.node_map
    if node_map is None:
        raise ValidationError("trace has no node map")
    for msg in trace.messages:
        msg.locality = node_map.locality(msg.source, msg.destination)


def locality_of(msg: Message, node_map: NodeMap) -> Locality:
    return node_map.locality(msg.source, msg.destination)


def attach_node_map(trace: Trace, node_map: NodeMap) -> Trace:
    """Attach the rank-to-node sidecar; every trace rank must be covered."""
    for rank in sorted(trace.ranks):
        node_map.node_of(rank)  # raises UnknownRankError
    trace.node_map = node_map
    if trace.messages:
        annotate_locality(trace)
    return trace


def parse_node_map(lines: Iterable[str]) -> NodeMap:
    mapping: dict[int, int] = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        if lineno == 1:
            if line != NODE_MAP_HEADER:
                raise TraceFormatError(f"bad node map header {line!r}, expected {NODE_MAP_HEADER!r}")
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise TraceFormatError(f"node map line {lineno}: expected 2 fields")
        try:
            rank, node = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise TraceFormatError(f"node map line {lineno}: {exc}") from exc
        if rank in mapping:
            raise TraceFormatError(f"node map line {lineno}: duplicate rank {rank}")
        mapping[rank] = node
    if not mapping:
        raise TraceFormatError("node map is empty")
    return NodeMap(mapping)


def load_node_map(path: str | Path) -> NodeMap:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read node map {path}: {exc}") from exc
    return parse_node_map(text.splitlines())


def events_to_csv(events: Iterable[CommEvent]) -> str:
    lines = [TRACE_HEADER]
    for e in events:
        lines.append(f"{e.rank},{e.kind.value},{e.timestamp},{e.source},{e.destination},{e.size}")
    return "\n".join(lines) + "\n"


def events_to_jsonl(events: Iterable[CommEvent]) -> str:
    lines = []
    for e in events:
        lines.append(json.dumps(
            {"rank": e.rank, "kind": e.kind.value, "timestamp": e.timestamp,
             "src": e.source, "dst": e.destination, "size": e.size},
            sort_keys=True))
    return "\n".join(lines) + "\n"


def node_map_to_csv(node_map: NodeMap) -> str:
    lines = [NODE_MAP_HEADER]
    for rank in sorted(node_map.mapping):
        lines.append(f"{rank},{node_map.mapping[rank]}")
    return "\n".join(lines) + "\n"
