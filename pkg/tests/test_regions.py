from __future__ import annotations

import itertools
import math

import numpy as np
import pytest

from commlat.errors import ValidationError
from commlat.regions import (
    CommGraph,
    build_regions,
    build_tree,
    cluster,
    correlation_matrix,
    distance_matrix,
    free_energy_distance,
    partition_function,
    partition_matrix,
    raw_correlation,
    transition_probabilities,
)
from conftest import make_trace, random_comm_graph, recv, send
from oracles import (
    average_linkage_replay,
    first_arrival_z_dp,
    first_arrival_z_paths,
    simple_path_correlation,
)


def graph_from_edges(edges, weights=None):
    vertices = sorted({v for e in edges for v in e})
    wmap = {}
    for i, (a, b) in enumerate(edges):
        key = (min(a, b), max(a, b))
        wmap[key] = (weights or {}).get((a, b), 1)
    return CommGraph(vertices=vertices, weights=wmap)


def two_region_fixture() -> CommGraph:
    """Two four-cliques bridged at (3,4) and (2,6); heavy inside, light across."""
    edges = list(itertools.combinations(range(4), 2))
    edges += list(itertools.combinations(range(4, 8), 2))
    weights = {e: 20 for e in edges}
    bridges = [(3, 4), (2, 6)]
    for b in bridges:
        weights[b] = 2
    return graph_from_edges(edges + bridges, weights)


# ---- correlation trees -------------------------------------------------------

def test_tree_path_graph_no_readd():
    g = graph_from_edges([(1, 2), (2, 3)])
    tree = build_tree(g, root=1)
    assert tree.root.pid == 1
    assert [c.pid for c in tree.root.children] == [2]
    node2 = tree.root.children[0]
    assert [c.pid for c in node2.children] == [3]      # 1 not re-added under 2
    assert node2.children[0].children == []


def test_tree_star_graph_depths():
    g = graph_from_edges([(0, 2), (1, 2)])   # leaves 0, 1 around center 2
    tree = build_tree(g, root=0)
    center = tree.root.children[0]
    assert center.pid == 2 and center.depth == 1
    assert [c.pid for c in center.children] == [1]
    assert center.children[0].depth == 2


def test_tree_isolated_root_single_node():
    g = CommGraph(vertices=[0, 1], weights={(0, 1): 0})
    g.weights = {}
    tree = build_tree(g, root=0)
    assert tree.root.children == []


def test_tree_respects_max_depth():
    g = graph_from_edges([(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)])
    tree = build_tree(g, root=0, max_depth=2)
    assert max(n.depth for n in tree.nodes()) == 2


def test_raw_correlation_single_and_repeat_depths():
    g = graph_from_edges([(0, 1)])
    tree = build_tree(g, root=0)
    assert raw_correlation(tree, 1) == 1.0

    # q at depth 1 and again at depth 2 on another branch: 1 + 1/4
    g2 = graph_from_edges([(0, 1), (0, 2), (2, 1)])
    tree2 = build_tree(g2, root=0)
    assert raw_correlation(tree2, 1) == pytest.approx(1.25)
    assert raw_correlation(tree2, 99) == 0.0


def test_correlation_matrix_matches_tree_enumeration():
    rng = np.random.default_rng(41)
    for _ in range(15):
        n = int(rng.integers(3, 9))
        g = random_comm_graph(rng, n, edge_prob=0.4)
        R, pids = correlation_matrix(g, max_depth=4)
        for root in pids:
            tree = build_tree(g, root, max_depth=4)
            for q in pids:
                if q == root:
                    continue
                assert R[pids.index(root), pids.index(q)] == pytest.approx(
                    raw_correlation(tree, q), abs=1e-12
                )


def test_correlation_matrix_matches_simple_path_oracle():
    rng = np.random.default_rng(43)
    for _ in range(10):
        n = int(rng.integers(3, 8))
        g = random_comm_graph(rng, n, edge_prob=0.45)
        adj = g.adjacency()
        R, pids = correlation_matrix(g, max_depth=3)
        for a in pids:
            for b in pids:
                if a == b:
                    continue
                expected = simple_path_correlation(adj, a, b, max_depth=3)
                assert R[pids.index(a), pids.index(b)] == pytest.approx(expected, abs=1e-12)


def test_fixture_within_region_correlation_dominates():
    g = two_region_fixture()
    R, pids = correlation_matrix(g)
    idx = {p: i for i, p in enumerate(pids)}
    within = [R[idx[a], idx[b]] for a, b in itertools.combinations(range(4), 2)]
    within += [R[idx[a], idx[b]] for a, b in itertools.combinations(range(4, 8), 2)]
    cross = [R[idx[a], idx[b]] for a in range(4) for b in range(4, 8)]
    assert min(within) > max(cross)


# ---- transition probabilities -------------------------------------------------

def test_transition_rows():
    R = np.array([[0.0, 3.0, 1.0], [3.0, 0.0, 1.0], [1.0, 1.0, 0.0]])
    w = transition_probabilities(R)
    assert w[0, 1] == pytest.approx(0.75)
    assert w[0, 2] == pytest.approx(0.25)
    np.testing.assert_allclose(w.sum(axis=1), 1.0, atol=1e-12)


def test_transition_uniform_row():
    R = np.zeros((5, 5))
    R[0, 1:] = 2.0
    R[1:, 0] = 1.0
    for i in range(1, 5):
        R[i, (i % 4) + 1 if (i % 4) + 1 != i else 1] += 1.0
    w = transition_probabilities(R)
    np.testing.assert_allclose(w[0, 1:], 0.25)


def test_transition_zero_row_rejected():
    R = np.array([[0.0, 1.0], [0.0, 0.0]])
    with pytest.raises(ValidationError):
        transition_probabilities(R)


def test_transition_random_rows_sum_to_one():
    rng = np.random.default_rng(47)
    R = rng.uniform(0.1, 5.0, size=(12, 12))
    np.fill_diagonal(R, 0.0)
    w = transition_probabilities(R)
    assert np.max(np.abs(w.sum(axis=1) - 1.0)) < 1e-12


# ---- partition function ---------------------------------------------------------

def test_partition_two_state_direct():
    # one directed step of tempered weight 0.5
    w = np.array([[0.0, math.sqrt(0.5)], [math.sqrt(0.5), 0.0]])
    assert partition_function(w, beta=1.0, p=0, q=1) == pytest.approx(0.5)


def test_partition_diagonal_is_one():
    rng = np.random.default_rng(53)
    R = rng.uniform(0.1, 2.0, size=(6, 6))
    np.fill_diagonal(R, 0.0)
    w = transition_probabilities(R)
    Z = partition_matrix(w, beta=1.0)
    np.testing.assert_allclose(np.diag(Z), 1.0)


def test_partition_unreachable_is_zero():
    # two components: {0,1} and {2,3}
    w = np.zeros((4, 4))
    w[0, 1] = w[1, 0] = 1.0
    w[2, 3] = w[3, 2] = 1.0
    Z = partition_matrix(w, beta=1.0)
    assert Z[0, 2] == 0.0 and Z[2, 0] == 0.0
    assert Z[0, 1] == pytest.approx(1.0)   # unit row stays unit after tempering


def test_partition_matches_path_enumeration_small():
    # weights bounded away from dominance so the length-120 truncation of the
    # enumeration oracle is converged far below the comparison tolerance
    rng = np.random.default_rng(59)
    for _ in range(25):
        n = int(rng.integers(2, 7))
        R = rng.uniform(0.5, 2.5, size=(n, n)) * (rng.random((n, n)) < 0.7)
        np.fill_diagonal(R, 0.0)
        R[R.sum(axis=1) == 0, :] += 0.5
        np.fill_diagonal(R, 0.0)
        if np.any(R.sum(axis=1) == 0):
            continue
        w = transition_probabilities(R)
        wt = w ** 2.0
        Z = partition_matrix(w, beta=1.0)
        for q in range(n):
            dp = first_arrival_z_dp(wt, q, max_len=120)
            np.testing.assert_allclose(Z[:, q], dp, atol=1e-8)


def test_dp_oracle_agrees_with_literal_paths():
    rng = np.random.default_rng(61)
    R = rng.uniform(0.2, 2.0, size=(4, 4))
    np.fill_diagonal(R, 0.0)
    w = transition_probabilities(R)
    wt = w ** 2.0
    for p in range(4):
        for q in range(4):
            if p == q:
                continue
            lit = first_arrival_z_paths(wt, p, q, max_len=9)
            dp = first_arrival_z_dp(wt, q, max_len=9)[p]
            assert dp == pytest.approx(lit, abs=1e-9)


def test_partition_multiplicative_inequality():
    rng = np.random.default_rng(67)
    for _ in range(10):
        n = int(rng.integers(3, 7))
        R = rng.uniform(0.1, 3.0, size=(n, n))
        np.fill_diagonal(R, 0.0)
        w = transition_probabilities(R)
        Z = partition_matrix(w, beta=1.0)
        for i, k, j in itertools.permutations(range(n), 3):
            assert Z[i, j] >= Z[i, k] * Z[k, j] - 1e-12


def test_beta_must_be_positive():
    w = np.array([[0.0, 1.0], [1.0, 0.0]])
    with pytest.raises(ValidationError):
        partition_matrix(w, beta=0.0)


# ---- free-energy distance --------------------------------------------------------

def test_distance_identities():
    Z = np.array([[1.0, 1.0], [1.0, 1.0]])
    D = free_energy_distance(Z)
    assert D[0, 1] == 0.0 and D[1, 0] == 0.0


def test_distance_log_arithmetic():
    Z = np.array([[1.0, math.exp(-2.0)], [math.exp(-4.0), 1.0]])
    D = free_energy_distance(Z)
    assert D[0, 1] == pytest.approx(3.0)
    assert D[1, 0] == pytest.approx(3.0)


def test_distance_infinite_for_unreachable():
    Z = np.array([[1.0, 0.0], [0.0, 1.0]])
    D = free_energy_distance(Z)
    assert math.isinf(D[0, 1])


def metric_axioms_ok(D: np.ndarray, tol: float = 1e-9) -> bool:
    if not np.array_equal(D, D.T):
        return False
    if np.any(np.diag(D) != 0.0):
        return False
    if np.any(D < 0.0):
        return False
    n = D.shape[0]
    for k in range(n):
        if np.any(D > D[:, [k]] + D[[k], :] + tol):
            return False
    return True


def test_metric_axioms_on_random_graphs():
    rng = np.random.default_rng(71)
    for _ in range(30):
        n = int(rng.integers(3, 15))
        g = random_comm_graph(rng, n, edge_prob=float(rng.uniform(0.15, 0.5)))
        D, _ = distance_matrix(g)
        assert metric_axioms_ok(D)


def test_distance_handles_disconnected_graph():
    g = graph_from_edges([(0, 1), (2, 3)])
    D, pids = distance_matrix(g)
    assert math.isinf(D[0, 2])
    assert metric_axioms_ok(D)


def test_isolated_vertex_gets_infinite_distance():
    g = CommGraph(vertices=[0, 1, 2], weights={(0, 1): 5})
    D, pids = distance_matrix(g)
    assert math.isinf(D[0, 2]) and math.isinf(D[1, 2])
    assert D[2, 2] == 0.0


# ---- clustering ---------------------------------------------------------------------

def test_cluster_table1_two_regions(table1):
    model = cluster(table1, threshold=2.0)
    assert list(model.regions.values()) == [[0, 1, 2, 3], [4, 5, 6, 7]]


def test_cluster_table1_merge_sequence(table1):
    model = cluster(table1, threshold=2.0)
    got = [(m.a, m.b, round(m.linkage, 4)) for m in model.dendrogram]
    assert got == [
        (6, 7, 1.15),
        (0, 1, 1.18),
        (4, 5, 1.22),
        (0, 2, 1.37),
        (0, 3, round(5.36 / 3, 4)),
        (4, 6, 1.875),
    ]


def test_cluster_matches_replay_oracle(table1):
    rng = np.random.default_rng(73)
    for _ in range(10):
        n = int(rng.integers(3, 10))
        sym = rng.uniform(0.5, 4.0, size=(n, n))
        D = (sym + sym.T) / 2
        np.fill_diagonal(D, 0.0)
        threshold = float(rng.uniform(1.0, 3.0))
        model = cluster(D, threshold=threshold)
        expected_clusters, expected_merges = average_linkage_replay(D, threshold)
        assert list(model.regions.values()) == expected_clusters
        assert [(m.a, m.b) for m in model.dendrogram] == [(a, b) for a, b, _ in expected_merges]
        for mine, (_, _, d) in zip(model.dendrogram, expected_merges):
            assert mine.linkage == pytest.approx(d)


def test_cluster_all_far_apart_singletons():
    D = np.full((5, 5), 10.0)
    np.fill_diagonal(D, 0.0)
    model = cluster(D, threshold=2.0)
    assert all(len(m) == 1 for m in model.regions.values())


def test_cluster_threshold_zero_singletons():
    D = np.array([[0.0, 0.1], [0.1, 0.0]])
    model = cluster(D, threshold=0.0)
    assert len(model.regions) == 2


def test_cluster_single_message_stop_rule():
    # two pairs, one message between them: linkage would merge, stop rule blocks
    g = graph_from_edges([(0, 1), (2, 3), (1, 2)], weights={(0, 1): 10, (2, 3): 10, (1, 2): 1})
    D = np.array([
        [0.0, 0.5, 1.0, 1.2],
        [0.5, 0.0, 0.9, 1.0],
        [1.0, 0.9, 0.0, 0.5],
        [1.2, 1.0, 0.5, 0.0],
    ])
    unlimited = cluster(D, threshold=10.0)
    assert len(unlimited.regions) == 1
    limited = cluster(D, threshold=10.0, graph=g)
    assert list(limited.regions.values()) == [[0, 1], [2, 3]]


def test_cluster_relabeling_invariance():
    rng = np.random.default_rng(79)
    n = 7
    sym = rng.uniform(0.5, 4.0, size=(n, n))
    D = (sym + sym.T) / 2
    np.fill_diagonal(D, 0.0)
    base = cluster(D, pids=list(range(n)), threshold=2.2)

    perm = list(rng.permutation(n))
    P = np.zeros((n, n))
    for i, j in enumerate(perm):
        P[i, j] = 1.0
    D2 = P @ D @ P.T            # D2[i, j] = D[perm[i], perm[j]]
    relabeled = cluster(D2, pids=perm, threshold=2.2)
    assert sorted(map(tuple, base.regions.values())) == sorted(map(tuple, relabeled.regions.values()))


def test_cluster_empty_matrix_rejected():
    with pytest.raises(ValidationError):
        cluster(np.zeros((0, 0)))


def test_regions_partition_and_no_empty():
    rng = np.random.default_rng(83)
    for _ in range(10):
        n = int(rng.integers(2, 12))
        g = random_comm_graph(rng, n, edge_prob=0.3)
        D, pids = distance_matrix(g)
        model = cluster(D, pids=pids, threshold=float(rng.uniform(0.5, 4.0)))
        seen = sorted(p for mem in model.regions.values() for p in mem)
        assert seen == sorted(pids)
        assert all(mem for mem in model.regions.values())


def test_build_regions_from_trace_fixture():
    events = []
    ts = 0
    # two tight pairs, one weak bridge: regions {0,1} and {2,3}
    for _ in range(12):
        for a, b in [(0, 1), (2, 3)]:
            ts += 10
            events.append(send(a, b, ts))
            events.append(recv(b, a, ts + 5))
    ts += 10
    events.append(send(1, 2, ts))
    events.append(recv(2, 1, ts + 5))
    ts += 10
    events.append(send(1, 2, ts))
    events.append(recv(2, 1, ts + 5))
    trace = make_trace(events, {0: 0, 1: 0, 2: 1, 3: 1})
    model, graph = build_regions(trace, threshold=1.5)
    assert list(model.regions.values()) == [[0, 1], [2, 3]]
