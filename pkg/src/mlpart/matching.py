"""Edge ratings and matching construction for contraction-based coarsening.

The global-paths matcher scans edges by decreasing rating and grows a set of
vertex-disjoint paths and even cycles; an edge is applicable if it joins two
endpoints of different paths or closes an odd-length path into an even cycle.
Each grown path/cycle is then solved exactly for its maximum-rating matching
by dynamic programming, so the result is optimal per component.
"""

from __future__ import annotations

import math

import numpy as np

from .algdist import RHO_FLOOR
from .graph import Graph

__all__ = [
    "RATING_EXPANSION2",
    "RATING_EX_ALG",
    "RATING_INNER_OUTER",
    "edge_ratings",
    "gpa_matching",
    "matching_schedule",
    "random_matching",
    "random_phase_levels",
    "rate_edge",
    "weighted_degrees",
]

RATING_EXPANSION2 = "expansion2"    # w(e)^2 / (c(u) c(v))
RATING_INNER_OUTER = "inner_outer"  # w(e) / (Out(u) + Out(v) - 2 w(e))
RATING_EX_ALG = "ex_alg"            # expansion2 / coupling


def weighted_degrees(g: Graph) -> np.ndarray:
    """Sum of incident edge weights per node."""
    out = np.zeros(g.n, dtype=np.float64)
    np.add.at(out, g.edge_u, g.edge_weight)
    np.add.at(out, g.edge_v, g.edge_weight)
    return out


def edge_ratings(g: Graph, kind: str, rho: np.ndarray | None = None) -> np.ndarray:
    """Rating per edge; higher means more profitable to contract.

    An inner/outer denominator of zero (the edge is both endpoints' only
    incidence) rates +inf: contracting it can never hurt.
    """
    w = g.edge_weight
    if kind == RATING_EXPANSION2:
        return w * w / (g.node_weight[g.edge_u] * g.node_weight[g.edge_v])
    if kind == RATING_INNER_OUTER:
        out = weighted_degrees(g)
        denom = out[g.edge_u] + out[g.edge_v] - 2.0 * w
        rating = np.full(g.m, np.inf)
        ok = denom > 0
        rating[ok] = w[ok] / denom[ok]
        return rating
    if kind == RATING_EX_ALG:
        if rho is None:
            raise ValueError("ex_alg rating needs edge couplings")
        exp2 = w * w / (g.node_weight[g.edge_u] * g.node_weight[g.edge_v])
        return exp2 / np.maximum(rho, RHO_FLOOR)
    raise ValueError(f"unknown edge rating {kind!r}")


def rate_edge(g: Graph, e: int, kind: str, rho: np.ndarray | None = None) -> float:
    return float(edge_ratings(g, kind, rho)[e])


def random_phase_levels(k: int) -> int:
    """Levels matched randomly before switching to global paths: max(2, 7 - log2 k)."""
    if k < 2:
        raise ValueError("block count must be >= 2")
    return max(2, 7 - int(math.log2(k)))


def matching_schedule(family: str, level: int, k: int) -> tuple[str, str | None]:
    """Which matcher and rating a coarsening family uses at a level.

    Families: ``randomgpa`` starts with random matching and switches to
    global paths with the expansion rating; ``gpa_alg`` runs global paths
    with the coupling-aware rating at every level; ``strong`` runs global
    paths with inner/outer at level 0 (the expansion rating is constant on
    unweighted unit-volume graphs) and with expansion afterwards.
    """
    if family == "randomgpa":
        if level < random_phase_levels(k):
            return "random", None
        return "gpa", RATING_EXPANSION2
    if family == "gpa_alg":
        return "gpa", RATING_EX_ALG
    if family == "strong":
        return "gpa", RATING_INNER_OUTER if level == 0 else RATING_EXPANSION2
    raise ValueError(f"unknown matching family {family!r}")


def random_matching(g: Graph, seed: int, allowed: np.ndarray | None = None) -> np.ndarray:
    """Visit nodes in random order; match each with a random unmatched neighbor.

    Maximal with respect to the traversal: a node is only left single if it
    had no unmatched (allowed) neighbor at visit time.  Returns edge ids.
    """
    rng = np.random.default_rng(seed)
    matched = np.zeros(g.n, dtype=bool)
    chosen: list[int] = []
    for u in rng.permutation(g.n):
        if matched[u]:
            continue
        nbrs, _, eids = g.neighbors(u)
        cand = ~matched[nbrs]
        if allowed is not None:
            cand &= allowed[eids]
        idx = np.flatnonzero(cand)
        if idx.size == 0:
            continue
        pick = idx[rng.integers(idx.size)]
        matched[u] = True
        matched[nbrs[pick]] = True
        chosen.append(int(eids[pick]))
    return np.array(sorted(chosen), dtype=np.int64)


class _PathForest:
    """Union-find over grown paths, tracking endpoint degrees and edge parity."""

    def __init__(self, n: int):
        self.parent = np.arange(n)
        self.length = np.zeros(n, dtype=np.int64)   # edges in component, at root
        self.cycle = np.zeros(n, dtype=bool)         # closed components, at root
        self.deg = np.zeros(n, dtype=np.int64)
        self.inc: list[list[int]] = [[] for _ in range(n)]  # <= 2 set-edges per node

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def applicable(self, u: int, v: int) -> bool:
        if self.deg[u] >= 2 or self.deg[v] >= 2:
            return False
        ru, rv = self.find(u), self.find(v)
        if ru != rv:
            return True
        # same path: only the two endpoints of an odd-length path may close it
        return not self.cycle[ru] and self.length[ru] % 2 == 1

    def add(self, e: int, u: int, v: int) -> None:
        ru, rv = self.find(u), self.find(v)
        if ru == rv:
            self.length[ru] += 1
            self.cycle[ru] = True
        else:
            self.parent[rv] = ru
            self.length[ru] += self.length[rv] + 1
        self.deg[u] += 1
        self.deg[v] += 1
        self.inc[u].append(e)
        self.inc[v].append(e)


def _ordered_component(g: Graph, forest: _PathForest, nodes: list[int]) -> tuple[list[int], bool]:
    """Walk one grown component, returning its edges in path/cycle order."""
    is_cycle = bool(forest.cycle[forest.find(nodes[0])])
    if is_cycle:
        start = min(nodes)
    else:
        start = min(v for v in nodes if forest.deg[v] == 1)
    edges: list[int] = []
    prev_edge = -1
    v = start
    while True:
        nxt = [e for e in forest.inc[v] if e != prev_edge]
        if not nxt:
            break
        e = nxt[0]
        edges.append(e)
        v = int(g.edge_v[e]) if int(g.edge_u[e]) == v else int(g.edge_u[e])
        prev_edge = e
        if v == start:
            break
    return edges, is_cycle


def _max_matching_path(weights: list[float]) -> tuple[float, list[bool]]:
    """Exact max-weight matching on a path of consecutive edges."""
    L = len(weights)
    dp = [0.0] * (L + 1)
    take = [False] * (L + 1)
    for i in range(1, L + 1):
        skip = dp[i - 1]
        grab = (dp[i - 2] if i >= 2 else 0.0) + weights[i - 1]
        if grab >= skip:
            dp[i], take[i] = grab, True
        else:
            dp[i] = skip
    chosen = [False] * L
    i = L
    while i > 0:
        if take[i]:
            chosen[i - 1] = True
            i -= 2
        else:
            i -= 1
    return dp[L], chosen


def _max_matching_cycle(weights: list[float]) -> tuple[float, list[bool]]:
    """Exact max-weight matching on an even cycle via two path subproblems."""
    L = len(weights)
    best_wo, chosen_wo = _max_matching_path(weights[:-1])
    best_with, chosen_mid = _max_matching_path(weights[1:L - 2])
    best_with += weights[-1]
    if best_with > best_wo:
        chosen = [False] * L
        chosen[-1] = True
        for i, c in enumerate(chosen_mid):
            chosen[i + 1] = c
        return best_with, chosen
    return best_wo, chosen_wo + [False]


def gpa_matching(g: Graph, ratings: np.ndarray, allowed: np.ndarray | None = None) -> np.ndarray:
    """Global-paths matching; ties scan by (rating desc, edge id asc)."""
    ratings = np.asarray(ratings, dtype=np.float64)
    if ratings.shape != (g.m,):
        raise ValueError("ratings length does not match edge count")
    order = np.lexsort((np.arange(g.m), -ratings))
    forest = _PathForest(g.n)
    for e in order:
        if allowed is not None and not allowed[e]:
            continue
        u, v = int(g.edge_u[e]), int(g.edge_v[e])
        if forest.applicable(u, v):
            forest.add(int(e), u, v)

    comp_nodes: dict[int, list[int]] = {}
    for v in range(g.n):
        if forest.deg[v] > 0:
            comp_nodes.setdefault(forest.find(v), []).append(v)

    chosen: list[int] = []
    for root in sorted(comp_nodes):
        edges, is_cycle = _ordered_component(g, forest, comp_nodes[root])
        weights = [float(ratings[e]) for e in edges]
        if is_cycle:
            _, pick = _max_matching_cycle(weights)
        else:
            _, pick = _max_matching_path(weights)
        chosen.extend(e for e, c in zip(edges, pick) if c)
    return np.array(sorted(chosen), dtype=np.int64)
