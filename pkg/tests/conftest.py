from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from commlat.traces import (
    CommEvent,
    EventKind,
    NodeMap,
    Trace,
    attach_node_map,
    pair_messages,
)

# The published 8x8 symmetric free-energy distance example.
TABLE1 = np.array([
    [0.00, 1.18, 1.44, 1.33, 2.72, 3.40, 2.82, 3.22],
    [1.18, 0.00, 1.30, 2.58, 3.39, 3.26, 2.69, 3.08],
    [1.44, 1.30, 0.00, 1.45, 2.84, 2.71, 1.56, 2.53],
    [1.33, 2.58, 1.45, 0.00, 1.35, 2.61, 2.84, 3.24],
    [2.72, 3.39, 2.84, 1.35, 0.00, 1.22, 1.45, 2.43],
    [3.40, 3.26, 2.71, 2.61, 1.22, 0.00, 1.32, 2.30],
    [2.82, 2.69, 1.56, 2.84, 1.45, 1.32, 0.00, 1.15],
    [3.22, 3.08, 2.53, 3.24, 2.43, 2.30, 1.15, 0.00],
])


@pytest.fixture
def table1() -> np.ndarray:
    return TABLE1.copy()


def send(rank: int, dst: int, ts: int, size: int = 100) -> CommEvent:
    return CommEvent(rank, EventKind.SEND, ts, rank, dst, size)


def recv(rank: int, src: int, ts: int, size: int = 100) -> CommEvent:
    return CommEvent(rank, EventKind.RECV, ts, src, rank, size)


def make_trace(events: list[CommEvent], node_map: dict[int, int] | None = None) -> Trace:
    events = sorted(events, key=CommEvent.sort_key)
    trace = Trace(events=events, ranks={e.rank for e in events})
    if node_map is not None:
        attach_node_map(trace, NodeMap(node_map))
    return pair_messages(trace)


@pytest.fixture
def three_process_trace() -> Trace:
    """Three processes, four messages; reproduces the worked clock comparisons:
    the first send gets (0,0,1), its receive (0,1,1), and the later pair of
    events compares as (0,3,2) vs (0,4,1), i.e. concurrent."""
    events = [
        send(3, 2, 10),    # a: msg1 send
        recv(2, 3, 20),    # b: msg1 receive
        send(2, 1, 30),    # msg3 send
        send(2, 3, 40),    # msg2 send
        recv(3, 2, 50),    # c: msg2 receive
        send(2, 1, 60),    # d: msg4 send
        recv(1, 2, 70),    # msg3 receive
        recv(1, 2, 80),    # msg4 receive
    ]
    return make_trace(events, {1: 0, 2: 0, 3: 1})


def random_trace(
    rng: np.random.Generator,
    n_processes: int = 5,
    n_messages: int = 20,
    span: int = 10_000,
    node_count: int = 2,
) -> Trace:
    """Random well-formed trace: every message has send < recv, FIFO per channel."""
    events: list[CommEvent] = []
    channel_clock: dict[tuple[int, int], int] = {}
    for _ in range(n_messages):
        src = int(rng.integers(0, n_processes))
        dst = int(rng.integers(0, n_processes - 1))
        if dst >= src:
            dst += 1
        base = channel_clock.get((src, dst), 0)
        send_ts = base + int(rng.integers(1, span // n_messages + 2))
        recv_ts = send_ts + int(rng.integers(1, 200))
        channel_clock[(src, dst)] = recv_ts   # keeps per-channel FIFO consistent
        size = int(rng.integers(50, 2000))
        events.append(CommEvent(src, EventKind.SEND, send_ts, src, dst, size))
        events.append(CommEvent(dst, EventKind.RECV, recv_ts, src, dst, size))
    node_map = {p: p % node_count for p in range(n_processes)}
    return make_trace(events, node_map)


def random_comm_graph(rng: np.random.Generator, n: int, edge_prob: float = 0.3):
    """Random undirected communication graph as an adjacency dict + weights."""
    from commlat.regions import CommGraph

    weights: dict[tuple[int, int], int] = {}
    for a in range(n):
        for b in range(a + 1, n):
            if rng.random() < edge_prob:
                weights[(a, b)] = int(rng.integers(1, 30))
    # keep at least a spanning path so most samples are connected
    for a in range(n - 1):
        if (a, a + 1) not in weights and rng.random() < 0.9:
            weights[(a, a + 1)] = int(rng.integers(1, 30))
    return CommGraph(vertices=list(range(n)), weights=weights)
