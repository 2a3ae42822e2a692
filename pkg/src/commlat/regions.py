"""Communication regions: correlation trees, free-energy distance, clustering.

The pipeline runs in four stages:

  1. raw correlation R(p, q): sum of 1/depth^2 over appearances of q in the
     correlation tree rooted at p. Because a node's pid may not repeat among
     its ancestors, tree nodes at depth d are exactly the simple paths of
     length d from the root, so R is computed by a depth-capped simple-path
     walk without materializing trees.
  2. transition probabilities w: row-normalized R.
  3. first-arrival partition function Z under the killed walk with step
     weight w^(1+beta). The literal row-stochastic walk gives Z = 1 for every
     reachable pair, so the tempered (substochastic) step weight is required
     for the distance to be informative. Z for a target q is obtained exactly
     by making q absorbing and solving (I - W) h = w_q over the states that
     can reach q.
  4. distance D = -log Z, symmetrized; agglomerative average-linkage
     clustering with a stop threshold and deterministic tie-breaking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InternalConsistencyError, ValidationError
from .traces import Trace


@dataclass
class CommGraph:
    """Undirected aggregate of message counts between processes."""

    vertices: list[int]                     # sorted process ids
    weights: dict[tuple[int, int], int]     # (min pid, max pid) -> message count

    @classmethod
    def from_trace(cls, trace: Trace) -> "CommGraph":
        weights: dict[tuple[int, int], int] = {}
        for msg in trace.messages:
            key = (min(msg.source, msg.destination), max(msg.source, msg.destination))
            weights[key] = weights.get(key, 0) + 1
        return cls(vertices=sorted(trace.ranks), weights=weights)

    def neighbors(self, pid: int) -> set[int]:
        out = set()
        for (a, b) in self.weights:
            if a == pid:
                out.add(b)
            elif b == pid:
                out.add(a)
        return out

    def adjacency(self) -> dict[int, set[int]]:
        adj: dict[int, set[int]] = {p: set() for p in self.vertices}
        for (a, b) in self.weights:
            adj[a].add(b)
            adj[b].add(a)
        return adj

    def weight_between(self, members_a: set[int], members_b: set[int]) -> int:
        total = 0
        for (a, b), w in self.weights.items():
            if (a in members_a and b in members_b) or (a in members_b and b in members_a):
                total += w
        return total


@dataclass
class TreeNode:
    pid: int
    depth: int
    children: list["TreeNode"] = field(default_factory=list)


@dataclass
class CorrelationTree:
    root: TreeNode

    def nodes(self) -> list[TreeNode]:
        out, stack = [], [self.root]
        while stack:
            node = stack.pop()
            out.append(node)
            stack.extend(node.children)
        return out


def build_tree(graph: CommGraph, root: int, max_depth: int = 4) -> CorrelationTree:
    """Materialize the correlation tree rooted at a process.

    Children of a node are its graph neighbors, except pids already on the
    path to the root; expansion stops at max_depth. An isolated root yields
    a single-node tree.
    """
    if root not in graph.vertices:
        raise ValidationError(f"root {root} not in graph")
    adj = graph.adjacency()
    root_node = TreeNode(pid=root, depth=0)

    def expand(node: TreeNode, ancestors: set[int]) -> None:
        if node.depth == max_depth:
            return
        for q in sorted(adj[node.pid]):
            if q in ancestors:
                continue
            child = TreeNode(pid=q, depth=node.depth + 1)
            node.children.append(child)
            ancestors.add(q)
            expand(child, ancestors)
            ancestors.remove(q)

    expand(root_node, {root})
    return CorrelationTree(root=root_node)


def raw_correlation(tree: CorrelationTree, q: int) -> float:
    """R(p, q) = sum of 1/depth^2 over tree nodes carrying pid q."""
    total = 0.0
    for node in tree.nodes():
        if node.pid == q and node.depth > 0:
            total += 1.0 / (node.depth * node.depth)
    return total


def correlation_matrix(graph: CommGraph, max_depth: int = 4) -> tuple[np.ndarray, list[int]]:
    """All-pairs raw correlation via depth-capped simple-path enumeration.

    Equivalent to build_tree + raw_correlation for every (root, q) pair but
    without materializing trees. Returns (R, pids) with R indexed by pid
    position in the sorted pid list.
    """
    pids = list(graph.vertices)
    index = {p: i for i, p in enumerate(pids)}
    adj = {p: sorted(graph.adjacency()[p]) for p in pids}
    inv_sq = [0.0] + [1.0 / (d * d) for d in range(1, max_depth + 1)]
    n = len(pids)
    R = np.zeros((n, n))

    for root in pids:
        ri = index[root]
        row = R[ri]
        on_path = {root}

        def walk(v: int, depth: int) -> None:
            nxt = depth + 1
            contrib = inv_sq[nxt]
            for u in adj[v]:
                if u in on_path:
                    continue
                row[index[u]] += contrib
                if nxt < max_depth:
                    on_path.add(u)
                    walk(u, nxt)
                    on_path.remove(u)

        walk(root, 0)
    return R, pids


def transition_probabilities(R: np.ndarray) -> np.ndarray:
    """Row-normalize raw correlations; every row must have positive mass."""
    sums = R.sum(axis=1)
    if np.any(sums <= 0):
        bad = [int(i) for i in np.flatnonzero(sums <= 0)]
        raise ValidationError(f"zero correlation rows (isolated processes) at {bad}")
    return R / sums[:, None]


def _reaches(wt: np.ndarray, q: int) -> np.ndarray:
    """Boolean mask of states with a positive-weight path to q."""
    n = wt.shape[0]
    can = np.zeros(n, dtype=bool)
    can[q] = True
    frontier = [q]
    preds = [np.flatnonzero(wt[:, j] > 0) for j in range(n)]
    while frontier:
        j = frontier.pop()
        for i in preds[j]:
            if not can[i]:
                can[i] = True
                frontier.append(int(i))
    return can


def partition_function(w: np.ndarray, beta: float, p: int, q: int) -> float:
    """First-arrival partition function Z_pq for a single pair."""
    return float(partition_matrix(w, beta)[p, q])


def partition_matrix(w: np.ndarray, beta: float = 1.0) -> np.ndarray:
    """Z for all ordered pairs under step weights w^(1+beta).

    Z_pq sums, over walks from p that hit q only at their final step, the
    product of step weights. Diagonal is 1 (empty path); unreachable pairs
    get 0. Each target column comes from one absorbing linear solve
    restricted to the states that can reach the target.
    """
    if beta <= 0:
        raise ValidationError("beta must be positive")
    n = w.shape[0]
    wt = w ** (1.0 + beta)
    Z = np.zeros((n, n))
    for q in range(n):
        can = _reaches(wt, q)
        solve_idx = np.flatnonzero(can & (np.arange(n) != q))
        if solve_idx.size:
            A = np.eye(solve_idx.size) - wt[np.ix_(solve_idx, solve_idx)]
            h = np.linalg.solve(A, wt[solve_idx, q])
            Z[solve_idx, q] = np.clip(h, 0.0, 1.0)
        Z[q, q] = 1.0
    if np.any(Z > 1.0 + 1e-9) or np.any(Z < 0.0):
        raise InternalConsistencyError("partition function left (0, 1]")
    return Z


def free_energy_distance(Z: np.ndarray) -> np.ndarray:
    """D_sym = (-log Z_pq - log Z_qp) / 2, with +inf for unreachable pairs."""
    with np.errstate(divide="ignore"):
        D = -np.log(Z)
    D[Z <= 0.0] = math.inf
    Ds = (D + D.T) / 2.0
    np.fill_diagonal(Ds, 0.0)
    return Ds


def distance_matrix(graph: CommGraph, beta: float = 1.0, max_depth: int = 4) -> tuple[np.ndarray, list[int]]:
    """Full pipeline graph -> symmetric free-energy distance matrix.

    Isolated vertices get +inf distance to everything (their own regions)
    rather than tripping the zero-row check in the transition step.
    """
    R, pids = correlation_matrix(graph, max_depth=max_depth)
    n = len(pids)
    active = np.flatnonzero(R.sum(axis=1) > 0)
    Ds = np.full((n, n), math.inf)
    np.fill_diagonal(Ds, 0.0)
    if active.size:
        w = transition_probabilities(R[np.ix_(active, active)])
        Z = partition_matrix(w, beta=beta)
        Ds[np.ix_(active, active)] = free_energy_distance(Z)
    return Ds, pids


@dataclass(frozen=True)
class Merge:
    a: int              # label: smallest pid of the first cluster
    b: int              # label: smallest pid of the second cluster
    linkage: float
    members: tuple[int, ...]


@dataclass
class RegionModel:
    regions: dict[int, list[int]]           # region id -> sorted member pids
    dendrogram: list[Merge]
    threshold: float
    region_of: dict[int, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.region_of:
            self.region_of = {p: rid for rid, mem in self.regions.items() for p in mem}


def cluster(
    dist: np.ndarray,
    pids: list[int] | None = None,
    threshold: float = 2.0,
    graph: CommGraph | None = None,
) -> RegionModel:
    """Average-linkage agglomeration over a symmetric distance matrix.

    Repeatedly merges the closest cluster pair until the minimum linkage
    reaches the threshold. When a CommGraph is supplied, a candidate pair
    exchanging at most one message may not fuse; the next-closest candidate
    is tried instead, and clustering stops once no mergeable pair remains
    under the threshold. Ties break on the smallest member pids so results
    are reproducible. Region ids are assigned in order of each region's
    smallest pid. Linkages update via the average-linkage recurrence, so
    the whole run is O(n^2) per merge.
    """
    n = dist.shape[0]
    if n == 0:
        raise ValidationError("empty distance matrix")
    if pids is None:
        pids = list(range(n))

    D = np.array(dist, dtype=float, copy=True)
    np.fill_diagonal(D, math.inf)           # self pairs are never candidates
    sizes = np.ones(n)
    alive = np.ones(n, dtype=bool)
    members: list[list[int] | None] = [[i] for i in range(n)]
    W = None
    if graph is not None:
        W = np.zeros((n, n))
        index = {p: i for i, p in enumerate(pids)}
        for (a, b), w in graph.weights.items():
            if a in index and b in index:
                W[index[a], index[b]] += w
                W[index[b], index[a]] += w
    dendrogram: list[Merge] = []

    def min_pid(i: int) -> int:
        return min(pids[x] for x in members[i])

    while alive.sum() > 1:
        masked = np.where(alive[:, None] & alive[None, :], D, math.inf)
        pick: tuple[int, int] | None = None
        linkage_val = math.inf
        while pick is None:
            linkage_val = float(masked.min())
            if not math.isfinite(linkage_val) or linkage_val >= threshold:
                break
            ii, jj = np.nonzero(masked == linkage_val)
            ties = sorted(
                {(min(a, b), max(a, b)) for a, b in zip(ii.tolist(), jj.tolist())},
                key=lambda ab: tuple(sorted((min_pid(ab[0]), min_pid(ab[1])))),
            )
            for (i, j) in ties:
                if W is None or W[i, j] > 1:
                    pick = (i, j)
                    break
                masked[i, j] = masked[j, i] = math.inf   # blocked: try next level
        if pick is None:
            break
        i, j = pick
        merged_members = sorted(members[i] + members[j])
        dendrogram.append(Merge(
            a=min_pid(i) if min_pid(i) <= min_pid(j) else min_pid(j),
            b=max(min_pid(i), min_pid(j)),
            linkage=linkage_val,
            members=tuple(sorted(pids[x] for x in merged_members)),
        ))
        # average-linkage recurrence: d(i+j, k) = (|i| d_ik + |j| d_jk) / (|i|+|j|)
        total = sizes[i] + sizes[j]
        D[i, :] = (sizes[i] * D[i, :] + sizes[j] * D[j, :]) / total
        D[:, i] = D[i, :]
        D[i, i] = math.inf
        if W is not None:
            W[i, :] += W[j, :]
            W[:, i] = W[i, :]
            W[i, i] = 0.0
        sizes[i] = total
        alive[j] = False
        members[i] = merged_members
        members[j] = None

    ordered = sorted(
        (members[i] for i in range(n) if alive[i]),
        key=lambda c: pids[min(c)],
    )
    regions = {rid: sorted(pids[i] for i in mem) for rid, mem in enumerate(ordered)}
    return RegionModel(regions=regions, dendrogram=dendrogram, threshold=threshold)


def build_regions(
    trace: Trace,
    threshold: float = 2.0,
    beta: float = 1.0,
    max_depth: int = 4,
) -> tuple[RegionModel, CommGraph]:
    graph = CommGraph.from_trace(trace)
    if not graph.vertices:
        raise ValidationError("trace has no processes")
    dist, pids = distance_matrix(graph, beta=beta, max_depth=max_depth)
    model = cluster(dist, pids=pids, threshold=threshold, graph=graph)
    return model, graph
