"""Shared builders and independent oracles for the test suite."""

from __future__ import annotations

import itertools

import numpy as np

from mlpart import Graph, random_gnm


def random_graph(seed: int, n: int | None = None, weighted: bool = False,
                 node_weights: bool = False, max_n: int = 24) -> Graph:
    """Seeded random connected-ish test graph with optional integer weights."""
    rng = np.random.default_rng(seed)
    if n is None:
        n = int(rng.integers(4, max_n + 1))
    max_m = n * (n - 1) // 2
    m = int(rng.integers(n - 1, max(n, min(3 * n, max_m)) + 1))
    g = random_gnm(n, min(m, max_m), seed=int(rng.integers(2 ** 31)), weighted=weighted)
    if node_weights:
        c = rng.integers(1, 4, size=n).astype(float)
        return Graph(g.n, g.edge_u, g.edge_v, g.edge_weight, c)
    return g


def brute_force_cut(g: Graph, assignment) -> float:
    """Double loop over every edge, independent of the vectorized path."""
    total = 0.0
    for e in range(g.m):
        if assignment[g.edge_u[e]] != assignment[g.edge_v[e]]:
            total += float(g.edge_weight[e])
    return total


def brute_force_best_bisection(g: Graph, L_max: float) -> float | None:
    """Optimal balanced 2-cut by enumeration; None if nothing is feasible."""
    best = None
    for bits in range(2 ** (g.n - 1)):  # node 0 pinned to block 0
        assignment = [(bits >> i) & 1 for i in range(g.n - 1)]
        assignment = [0] + assignment
        w0 = sum(g.node_weight[v] for v in range(g.n) if assignment[v] == 0)
        w1 = g.total_node_weight() - w0
        if w0 > L_max or w1 > L_max:
            continue
        if w0 == 0 or w1 == 0:
            continue
        value = brute_force_cut(g, assignment)
        if best is None or value < best:
            best = value
    return best


def brute_force_max_matching_weight(edges: list[tuple[int, int]],
                                    weights: list[float]) -> float:
    """Max-weight matching over an explicit edge list by subset enumeration."""
    best = 0.0
    m = len(edges)
    for mask in range(1, 2 ** m):
        used: set[int] = set()
        ok = True
        total = 0.0
        for i in range(m):
            if mask >> i & 1:
                u, v = edges[i]
                if u in used or v in used:
                    ok = False
                    break
                used.add(u)
                used.add(v)
                total += weights[i]
        if ok and total > best:
            best = total
    return best


def enumerate_matchings(g: Graph):
    """Yield every matching (as a tuple of edge ids), including the empty one."""
    edges = [(int(g.edge_u[e]), int(g.edge_v[e])) for e in range(g.m)]

    def rec(idx: int, used: frozenset, chosen: tuple):
        if idx == len(edges):
            yield chosen
            return
        yield from rec(idx + 1, used, chosen)
        u, v = edges[idx]
        if u not in used and v not in used:
            yield from rec(idx + 1, used | {u, v}, chosen + (idx,))

    yield from rec(0, frozenset(), ())


def assert_valid_matching(g: Graph, matching) -> None:
    seen: set[int] = set()
    for e in matching:
        u, v = int(g.edge_u[e]), int(g.edge_v[e])
        assert u not in seen and v not in seen, "matching shares endpoints"
        seen.add(u)
        seen.add(v)


def two_cliques_bridge(size: int = 3) -> Graph:
    """Two equal cliques joined by one unit edge; optimal bisection cut is 1."""
    eu, ev = [], []
    for off in (0, size):
        for a, b in itertools.combinations(range(off, off + size), 2):
            eu.append(a)
            ev.append(b)
    eu.append(0)
    ev.append(size)
    return Graph(2 * size, eu, ev, np.ones(len(eu)), None)


def path_graph(n: int, weights=None) -> Graph:
    eu = list(range(n - 1))
    ev = list(range(1, n))
    w = np.ones(n - 1) if weights is None else np.asarray(weights, float)
    return Graph(n, eu, ev, w, None)


def cycle_graph(n: int, weights=None) -> Graph:
    eu = list(range(n))
    ev = [(i + 1) % n for i in range(n)]
    w = np.ones(n) if weights is None else np.asarray(weights, float)
    return Graph(n, eu, ev, w, None)
