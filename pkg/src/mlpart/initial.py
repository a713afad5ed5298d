"""Coarsest-level partitioning and integer-weight export helpers.

The internal solver is seeded greedy graph growing followed by one local
search round, best of several attempts.  The export path rescales edge
weights by the smallest weight and removes fractions by randomized rounding
so external integer-only partitioners can consume the coarsest graph.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .graph import Graph, Partition, make_partition
from .refine import fm_refine

__all__ = [
    "CoarsestPolicy",
    "coarsest_size_limit",
    "initial_partition",
    "normalize_and_round",
]


@dataclass(frozen=True)
class CoarsestPolicy:
    """When contraction stops and how many seeded solve attempts run."""

    stop_threshold: int = 30
    attempts: int = 8

    def __post_init__(self):
        if self.stop_threshold < 1:
            raise ValueError("stop threshold must be >= 1")
        if self.attempts < 1:
            raise ValueError("need at least one attempt")


def coarsest_size_limit(stop_threshold: int, k: int) -> int:
    """Contraction stops once n falls to max(stop_threshold * k, 60)."""
    return max(stop_threshold * k, 60)


_INT_SNAP = 1e-9  # weights this close to an integer are treated as integral


def normalize_and_round(g: Graph, seed: int) -> Graph:
    """Rescale edge weights by the smallest one, then round randomly.

    Each fractional weight w becomes ceil(w) with probability w - floor(w)
    and floor(w) otherwise, so the expectation equals the normalized weight
    and every output weight is an integer >= 1.
    """
    if g.m == 0:
        return g.with_edge_weights(g.edge_weight.copy())
    scaled = g.edge_weight / g.edge_weight.min()
    rng = np.random.default_rng(seed)
    rounded = np.empty_like(scaled)
    for i, w in enumerate(scaled):
        lo = np.floor(w)
        frac = w - lo
        if frac < _INT_SNAP or frac > 1.0 - _INT_SNAP:
            rounded[i] = np.rint(w)
        else:
            rounded[i] = lo + 1.0 if rng.random() < frac else lo
    return g.with_edge_weights(np.maximum(rounded, 1.0))


def _peripheral_node(g: Graph, assignment: np.ndarray, start: int) -> int:
    """Farthest still-unassigned node from ``start``; growing a block from the
    rim instead of the interior avoids wrap-around boundaries."""
    dist = np.full(g.n, -1, dtype=np.int64)
    dist[start] = 0
    queue = [start]
    far = start
    while queue:
        nxt: list[int] = []
        for v in queue:
            nbrs, _, _ = g.neighbors(v)
            for u in nbrs:
                u = int(u)
                if dist[u] == -1 and assignment[u] == -1:
                    dist[u] = dist[v] + 1
                    far = u
                    nxt.append(u)
        queue = nxt
    return far


def _grow_blocks(g: Graph, k: int, L_max: float, rng: np.random.Generator,
                 jitter: float = 0.1) -> np.ndarray:
    """Greedy graph growing: fill blocks one at a time by connection gain."""
    assignment = np.full(g.n, -1, dtype=np.int64)
    unassigned = g.n
    total_left = g.total_node_weight()
    for b in range(k - 1):
        target = total_left / (k - b)
        weight = 0.0
        heap: list[tuple[float, int, int]] = []
        seq = 0
        fresh_block = True
        while weight < target and unassigned > 0:
            v = -1
            while heap:
                _, _, cand = heapq.heappop(heap)
                if assignment[cand] == -1 and weight + g.node_weight[cand] <= L_max:
                    v = cand
                    break
            if v == -1:
                free = np.flatnonzero(assignment == -1)
                fits = free[g.node_weight[free] + weight <= L_max]
                if fits.size == 0:
                    break  # nothing fits under the cap; leave the block short
                v = int(fits[rng.integers(fits.size)])
                if fresh_block:
                    v = _peripheral_node(g, assignment, v)
                    fresh_block = False
            cv = float(g.node_weight[v])
            assignment[v] = b
            weight += cv
            unassigned -= 1
            nbrs, ws, _ = g.neighbors(v)
            for u, w in zip(nbrs, ws):
                if assignment[u] == -1:
                    # gain: pulled-in weight minus what the move would expose;
                    # the jitter keeps the seeded trials from collapsing onto
                    # one growth front
                    inside = 0.0
                    total = 0.0
                    un, uw, _ = g.neighbors(int(u))
                    for x, xw in zip(un, uw):
                        total += float(xw)
                        if assignment[x] == b:
                            inside += float(xw)
                    gain = (2.0 * inside - total) * (1.0 + jitter * float(rng.uniform(-1.0, 1.0)))
                    heapq.heappush(heap, (-gain, seq, int(u)))
                    seq += 1
        total_left -= weight
    assignment[assignment == -1] = k - 1

    # blocks must be nonempty: steal single nodes from the most populous block
    counts = np.bincount(assignment, minlength=k)
    for b in range(k):
        if counts[b] > 0:
            continue
        donor = int(np.argmax(np.where(counts > 1, counts, -1)))
        victim = int(np.flatnonzero(assignment == donor)[0])
        assignment[victim] = b
        counts[donor] -= 1
        counts[b] += 1
    return assignment


def initial_partition(g: Graph, k: int, L_max: float, attempts: int = 8,
                      seed: int = 0, epsilon: float = 0.0) -> Partition:
    """Best of several seeded greedy-growing + one-local-search-round trials.

    Feasible results are preferred over infeasible ones, then lower cut,
    then the earlier attempt; an infeasible best is returned as-is for the
    caller's refinement to repair.
    """
    if k < 1:
        raise ValueError("block count must be >= 1")
    if k == 1:
        return make_partition(g, np.zeros(g.n, dtype=np.int64), 1, epsilon, L_max)
    if g.n <= k:
        assignment = np.arange(g.n, dtype=np.int64)
        return make_partition(g, assignment, k, epsilon, L_max)

    best: Partition | None = None
    best_key = None
    for a in range(attempts):
        rng = np.random.default_rng(seed + a)
        # each trial grows a gain-greedy partition (graded jitter keeps the
        # trials from collapsing onto one growth front) and also refines a
        # scattered start, which catches optima the growth heuristic cannot
        # shape; the better of the two survives
        grown = _grow_blocks(g, k, L_max, rng, jitter=0.1 * (1 + a))
        scattered = rng.integers(0, k, size=g.n)
        for assignment, rounds in ((grown, 1), (scattered, None)):
            p = make_partition(g, assignment, k, epsilon, L_max)
            p = fm_refine(g, p, L_max, seed=seed + a, max_rounds=rounds)
            p = _fill_empty_blocks(g, p)
            key = (p.max_overload() > 1e-9, p.cut, a)
            if best_key is None or key < best_key:
                best, best_key = p, key
    return best


def _fill_empty_blocks(g: Graph, p: Partition) -> Partition:
    """Local search may drain a block; reseed each empty one with the least
    internally attached node of the most populous block."""
    counts = np.bincount(p.assignment, minlength=p.k)
    if np.all(counts >= 1):
        return p
    assignment = p.assignment.copy()
    for b in range(p.k):
        if counts[b] > 0:
            continue
        donor = int(np.argmax(np.where(counts > 1, counts, -1)))
        members = np.flatnonzero(assignment == donor)
        victim, loosest = int(members[0]), None
        for v in members:
            nbrs, ws, _ = g.neighbors(int(v))
            internal = float(ws[assignment[nbrs] == donor].sum())
            if loosest is None or internal < loosest:
                victim, loosest = int(v), internal
        assignment[victim] = b
        counts[donor] -= 1
        counts[b] += 1
    return make_partition(g, assignment, p.k, p.epsilon, p.L_max)
