"""Aggregation coarsening: seed selection, order-limited interpolation, and
the projected coarse graph.

Seeds are picked by traversing nodes in future-volume order and keeping a
node fine only while enough of its connection strength already points at the
seed set.  Every fine node is then split across at most two seed aggregates,
subject to a per-aggregate volume cap; nodes that cannot be placed without
overloading an aggregate are promoted to seeds on the spot.  Coarse edge
weights and aggregate volumes come from the weighted projection of the fine
graph through the interpolation rows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .algdist import RHO_FLOOR, coupling_strength
from .graph import Graph

__all__ = [
    "AmgParams",
    "InterpolationOperator",
    "aggregate_level",
    "build_interpolation",
    "future_volume_order",
    "galerkin_coarsen",
    "select_seeds",
]


@dataclass(frozen=True)
class AmgParams:
    """Aggregation knobs.

    ``theta`` is the coupling-strength fraction a node needs toward the seed
    set to stay fine; ``kappa`` caps how many strongest seed connections are
    considered per node; ``max_aggregate_volume`` is the hard per-aggregate
    volume cap (callers normally pass the block-weight bound of the current
    partitioning instance).
    """

    theta: float = 0.5
    kappa: int = 10
    max_aggregate_volume: float = math.inf

    def __post_init__(self):
        if not 0.0 < self.theta <= 1.0:
            raise ValueError("theta must be in (0, 1]")
        if self.kappa < 1:
            raise ValueError("kappa must be >= 1")
        if self.max_aggregate_volume <= 0:
            raise ValueError("aggregate volume cap must be positive")


@dataclass
class InterpolationOperator:
    """Sparse fine-to-coarse mapping with per-row order at most 2.

    ``rows[i]`` lists (aggregate id, weight) for fine node i; seed rows are
    exactly [(own aggregate, 1.0)] and fine rows have one or two positive
    entries summing to 1.  ``volumes[p]`` is the weighted fine volume
    absorbed by aggregate p.
    """

    num_aggregates: int
    rows: list
    volumes: np.ndarray

    def order(self, i: int) -> int:
        return len(self.rows[i])

    def row_sums(self) -> np.ndarray:
        return np.array([sum(w for _, w in row) for row in self.rows])


def future_volume_order(g: Graph, rho: np.ndarray) -> np.ndarray:
    """Nodes by descending future volume, ties by ascending id.

    A node's future volume is its own volume plus the volume of each
    neighbor weighted by the fraction of that neighbor's total connection
    strength pointing back at the node.
    """
    s = coupling_strength(np.asarray(rho, dtype=np.float64))
    total = np.zeros(g.n, dtype=np.float64)
    np.add.at(total, g.edge_u, s)
    np.add.at(total, g.edge_v, s)
    safe_total = np.where(total > 0, total, 1.0)
    nu = g.node_weight.astype(np.float64, copy=True)
    cu, cv = g.edge_u, g.edge_v
    np.add.at(nu, cu, g.node_weight[cv] * s / safe_total[cv])
    np.add.at(nu, cv, g.node_weight[cu] * s / safe_total[cu])
    return np.lexsort((np.arange(g.n), -nu))


def select_seeds(g: Graph, rho: np.ndarray, order: np.ndarray, theta: float) -> np.ndarray:
    """Boolean seed mask from one sweep in the given order.

    A visited node stays fine iff the strength it already sees in the seed
    set reaches ``theta`` times its total strength; empty sums fail, so the
    first node visited and every isolated node become seeds.
    """
    s = coupling_strength(np.asarray(rho, dtype=np.float64))
    seed = np.zeros(g.n, dtype=bool)
    for i in order:
        nbrs, _, eids = g.neighbors(int(i))
        if nbrs.size == 0:
            seed[i] = True
            continue
        strengths = s[eids]
        to_seeds = float(strengths[seed[nbrs]].sum())
        if to_seeds < theta * float(strengths.sum()):
            seed[i] = True
    return seed


def build_interpolation(g: Graph, rho: np.ndarray, seed_mask: np.ndarray,
                        params: AmgParams, order: np.ndarray | None = None,
                        block_of: np.ndarray | None = None) -> InterpolationOperator:
    """Assign every fine node to one or two seed aggregates.

    Fine nodes are processed in the same future-volume order used for seed
    selection.  For each, the strongest admissible pair of seed connections
    (smallest coupling sum) splits the node proportionally to inverse
    coupling; if no pair fits under the volume cap the strongest single seed
    takes it whole, and if nothing fits the node is promoted to a new
    singleton aggregate.  ``block_of`` restricts admissible seeds to the
    node's own block so a carried partition survives coarsening exactly.
    """
    rho = np.asarray(rho, dtype=np.float64)
    if order is None:
        order = future_volume_order(g, rho)
    maxvol = params.max_aggregate_volume

    agg_of = np.full(g.n, -1, dtype=np.int64)
    rows: list[tuple] = [() for _ in range(g.n)]
    volumes: list[float] = []
    for i in np.flatnonzero(seed_mask):
        agg_of[i] = len(volumes)
        rows[i] = ((len(volumes), 1.0),)
        volumes.append(float(g.node_weight[i]))

    for i in order:
        i = int(i)
        if agg_of[i] >= 0:
            continue
        ci = float(g.node_weight[i])
        nbrs, _, eids = g.neighbors(i)
        cand = [(float(max(rho[e], RHO_FLOOR)), int(v), int(agg_of[v]))
                for v, e in zip(nbrs, eids)
                if agg_of[v] >= 0 and (block_of is None or block_of[v] == block_of[i])]
        cand.sort()
        cand = cand[:params.kappa]

        best_pair = None
        for a in range(len(cand)):
            for b in range(a + 1, len(cand)):
                r1, _, g1 = cand[a]
                r2, _, g2 = cand[b]
                if best_pair is not None and r1 + r2 >= best_pair[0]:
                    continue
                s1, s2 = 1.0 / r1, 1.0 / r2
                w1 = s1 / (s1 + s2)
                w2 = s2 / (s1 + s2)
                if volumes[g1] + ci * w1 <= maxvol and volumes[g2] + ci * w2 <= maxvol:
                    best_pair = (r1 + r2, g1, w1, g2, w2)

        if best_pair is not None:
            _, g1, w1, g2, w2 = best_pair
            entries = sorted(((g1, w1), (g2, w2)))
            rows[i] = tuple(entries)
            volumes[g1] += ci * w1
            volumes[g2] += ci * w2
            continue

        single = next((c for c in cand if volumes[c[2]] + ci <= maxvol), None)
        if single is not None:
            rows[i] = ((single[2], 1.0),)
            volumes[single[2]] += ci
        else:
            # nothing admissible: promote to a fresh singleton aggregate
            agg_of[i] = len(volumes)
            rows[i] = ((len(volumes), 1.0),)
            volumes.append(ci)

    return InterpolationOperator(len(volumes), rows, np.array(volumes, dtype=np.float64))


# coarse edges below this weight are dropped to bound fill-in
_COARSE_WEIGHT_FLOOR = 1e-12


def galerkin_coarsen(g: Graph, P: InterpolationOperator) -> Graph:
    """Project the fine graph through P: weighted coarse edges and volumes.

    A fine edge {u, v} contributes w * P[u, p] * P[v, q] to every coarse
    pair p != q reachable through the two rows; contributions landing on a
    single aggregate (coarse self-loops) are discarded.
    """
    acc: dict[tuple[int, int], float] = {}
    rows = P.rows
    for e in range(g.m):
        u, v = int(g.edge_u[e]), int(g.edge_v[e])
        w = float(g.edge_weight[e])
        for p, wu in rows[u]:
            for q, wv in rows[v]:
                if p == q:
                    continue
                key = (p, q) if p < q else (q, p)
                acc[key] = acc.get(key, 0.0) + w * wu * wv

    volumes = np.zeros(P.num_aggregates, dtype=np.float64)
    for i in range(g.n):
        for p, w in rows[i]:
            volumes[p] += g.node_weight[i] * w

    keys = sorted(k for k, w in acc.items() if w >= _COARSE_WEIGHT_FLOOR)
    eu = np.array([a for a, _ in keys], dtype=np.int64)
    ev = np.array([b for _, b in keys], dtype=np.int64)
    ew = np.array([acc[k] for k in keys], dtype=np.float64)
    return Graph(P.num_aggregates, eu, ev, ew, volumes)


def aggregate_level(g: Graph, rho: np.ndarray, params: AmgParams,
                    block_of: np.ndarray | None = None) -> tuple[Graph, InterpolationOperator]:
    """One full aggregation step: order, seeds, interpolation, projection."""
    order = future_volume_order(g, rho)
    seeds = select_seeds(g, rho, order, params.theta)
    P = build_interpolation(g, rho, seeds, params, order, block_of)
    return galerkin_coarsen(g, P), P
