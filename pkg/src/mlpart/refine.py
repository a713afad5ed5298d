"""Local-search refinement and coarse-to-fine projection.

The move engine is round-based: a priority queue keyed by gain (best cut
decrease over any adjacent block) is seeded, nodes are popped and moved at
most once per round, each move re-queues its unmoved neighbors, and when the
round stalls everything after the best state reached within the balance
constraint is undone.  Rounds repeat until one yields no improvement.
"""

from __future__ import annotations

import heapq

import numpy as np

from .amg import InterpolationOperator
from .graph import Graph, MatchingMap, Partition, boundary_nodes, edge_cut, make_partition

__all__ = [
    "fm_refine",
    "multi_try_fm",
    "project_amg",
    "project_matching",
]

PENALTY_OVERLOAD = "overload"  # penalize only prospective overload (default)
PENALTY_PRINTED = "printed"    # penalize every assignment by scale

_EXP_CAP = 60.0  # cap on the penalty exponent before 2**x

# gains below this relative scale are float noise, not improvement; without
# the cutoff, fractional-weight graphs admit endless 1-ulp "improving" rounds
_IMPROVE_EPS = 1e-9


class _MoveEngine:
    """Shared k-way gain bookkeeping for one refinement call.

    Hot state (adjacency, block weights, overload) is kept in plain Python
    containers; per-move work must stay scalar since refinement does tens of
    thousands of single-node moves.
    """

    def __init__(self, g: Graph, p: Partition, L_max: float, audit_every: int | None = None):
        self.g = g
        self.k = p.k
        self.L_max = float(L_max)
        self.assignment = p.assignment.copy()
        self.block_weight = [0.0] * p.k
        for v in range(g.n):
            self.block_weight[int(self.assignment[v])] += float(g.node_weight[v])
        self.node_weight = [float(c) for c in g.node_weight]
        self.adjacency: list[list[tuple[int, float]]] = [[] for _ in range(g.n)]
        for e in range(g.m):
            u, v = int(g.edge_u[e]), int(g.edge_v[e])
            w = float(g.edge_weight[e])
            self.adjacency[u].append((v, w))
            self.adjacency[v].append((u, w))
        self.cut = edge_cut(g, self.assignment)
        self.overload = sum(max(0.0, w - self.L_max) for w in self.block_weight)
        self.audit_every = audit_every
        self.moves_done = 0
        # conn[v][B] = weight of v's edges into block B (own block included)
        self.conn: list[dict[int, float]] = [dict() for _ in range(g.n)]
        for v in range(g.n):
            cv = self.conn[v]
            for u, w in self.adjacency[v]:
                b = int(self.assignment[u])
                cv[b] = cv.get(b, 0.0) + w

    def best_move(self, v: int) -> tuple[float, int] | None:
        """Highest-gain feasible target block for v, ties to the lower id."""
        conn = self.conn[v]
        own = int(self.assignment[v])
        internal = conn.get(own, 0.0)
        cv = self.node_weight[v]
        cap = self.L_max - cv
        best = None
        for b in sorted(conn):
            if b == own or self.block_weight[b] > cap:
                continue
            gain = conn[b] - internal
            if best is None or gain > best[0]:
                best = (gain, b)
        return best

    def apply(self, v: int, target: int) -> float:
        """Move v to target, updating weights, cut, and neighbor connectivity."""
        own = int(self.assignment[v])
        gain = self.conn[v].get(target, 0.0) - self.conn[v].get(own, 0.0)
        cv = self.node_weight[v]
        L = self.L_max
        self.assignment[v] = target
        w_own, w_tgt = self.block_weight[own], self.block_weight[target]
        self.overload += (max(0.0, w_own - cv - L) - max(0.0, w_own - L)
                          + max(0.0, w_tgt + cv - L) - max(0.0, w_tgt - L))
        self.block_weight[own] = w_own - cv
        self.block_weight[target] = w_tgt + cv
        self.cut -= gain
        for u, w in self.adjacency[v]:
            cu = self.conn[u]
            left = cu.get(own, 0.0) - w
            if -1e-12 <= left <= 1e-12:
                cu.pop(own, None)
            else:
                cu[own] = left
            cu[target] = cu.get(target, 0.0) + w
        self.moves_done += 1
        if self.audit_every and self.moves_done % self.audit_every == 0:
            self.audit()
        return gain

    def undo(self, v: int, source: int) -> None:
        self.apply(v, source)
        self.moves_done -= 2  # undo does not count toward audits

    def audit(self) -> None:
        """Assert incremental bookkeeping against a from-scratch recompute."""
        assert np.isclose(self.cut, edge_cut(self.g, self.assignment),
                          rtol=1e-9, atol=1e-9), "cut bookkeeping diverged"
        fresh = np.bincount(self.assignment, weights=self.g.node_weight, minlength=self.k)
        assert np.allclose(self.block_weight, fresh, rtol=1e-9, atol=1e-9), \
            "block weights diverged"
        for v in range(self.g.n):
            want: dict[int, float] = {}
            for u, w in self.adjacency[v]:
                b = int(self.assignment[u])
                want[b] = want.get(b, 0.0) + w
            have = {b: w for b, w in self.conn[v].items() if abs(w) > 1e-9}
            assert set(have) == set(want) and all(
                abs(have[b] - want[b]) <= 1e-9 * max(1.0, abs(want[b])) for b in want), \
                f"connectivity diverged at node {v}"

    def run_round(self, seeds: np.ndarray, max_stall: int) -> bool:
        """One round from the seeded queue; returns True if it improved."""
        cut0, ov0 = self.cut, self.overload
        heap: list[tuple[float, int, int]] = []
        seq = 0
        for v in seeds:
            move = self.best_move(int(v))
            gain = move[0] if move else float("-inf")
            heap.append((-gain, -seq, int(v)))
            seq += 1
        heapq.heapify(heap)

        moved = np.zeros(self.g.n, dtype=bool)
        log: list[tuple[int, int]] = []  # (node, source block)
        best_idx = -1
        best_key = (ov0, cut0)
        stall = 0
        while heap and stall < max_stall:
            neg_gain, _, v = heapq.heappop(heap)
            if moved[v]:
                continue
            move = self.best_move(v)
            if move is None:
                continue
            gain, target = move
            if gain != -neg_gain:
                heapq.heappush(heap, (-gain, -seq, v))
                seq += 1
                continue
            source = int(self.assignment[v])
            self.apply(v, target)
            moved[v] = True
            log.append((v, source))
            for u, _ in self.adjacency[v]:
                if not moved[u]:
                    nxt = self.best_move(u)
                    g_u = nxt[0] if nxt else float("-inf")
                    heapq.heappush(heap, (-g_u, -seq, u))
                    seq += 1
            key = (self.overload, self.cut)
            if self.cut <= cut0 and key < best_key:
                best_key = key
                best_idx = len(log) - 1
                stall = 0
            else:
                stall += 1

        for v, source in reversed(log[best_idx + 1:]):
            self.undo(v, source)
        tol_ov = _IMPROVE_EPS * max(1.0, ov0)
        tol_cut = _IMPROVE_EPS * max(1.0, abs(cut0))
        if ov0 - best_key[0] > tol_ov:
            return True
        return best_key[0] <= ov0 + tol_ov and cut0 - best_key[1] > tol_cut

    def to_partition(self, template: Partition) -> Partition:
        return Partition(self.k, self.assignment, np.array(self.block_weight),
                         self.cut, self.L_max, template.epsilon)


def fm_refine(g: Graph, p: Partition, L_max: float, max_stall: int = 300,
              seed: int = 0, max_rounds: int | None = None,
              audit_every: int | None = None) -> Partition:
    """Round-based k-way local search; never worsens cut or balance.

    Each round seeds the queue with all boundary nodes in a random order and
    repeats until a round brings no improvement (or ``max_rounds`` is hit).
    """
    engine = _MoveEngine(g, p, L_max, audit_every)
    rng = np.random.default_rng(seed)
    rounds = 0
    while max_rounds is None or rounds < max_rounds:
        boundary = boundary_nodes(g, engine.to_partition(p))
        if boundary.size == 0:
            break
        seeds = rng.permutation(boundary)
        if not engine.run_round(seeds, max_stall):
            break
        rounds += 1
    return engine.to_partition(p)


def multi_try_fm(g: Graph, p: Partition, L_max: float, rounds: int,
                 seed: int = 0, max_stall: int = 300,
                 audit_every: int | None = None) -> Partition:
    """Localized searches, each grown from a single random boundary node."""
    engine = _MoveEngine(g, p, L_max, audit_every)
    rng = np.random.default_rng(seed)
    for _ in range(rounds):
        boundary = boundary_nodes(g, engine.to_partition(p))
        if boundary.size == 0:
            break
        start = boundary[int(rng.integers(boundary.size))]
        engine.run_round(np.array([start]), max_stall)
    return engine.to_partition(p)


def project_matching(coarse_p: Partition, mapping: MatchingMap) -> Partition:
    """Fine nodes take their coarse node's block; cut and weights carry over."""
    assignment = coarse_p.assignment[mapping.fine_to_coarse]
    return Partition(coarse_p.k, assignment, coarse_p.block_weight.copy(),
                     coarse_p.cut, coarse_p.L_max, coarse_p.epsilon)


def _penalty(block_weight: float, cv: float, L_max: float, form: str) -> float:
    load = 100.0 * (block_weight + cv) / L_max
    if form == PENALTY_OVERLOAD:
        exponent = max(0.0, load - 100.0)
    elif form == PENALTY_PRINTED:
        exponent = max(0.0, load)
    else:
        raise ValueError(f"unknown penalty form {form!r}")
    return 2.0 ** min(exponent, _EXP_CAP)


def project_amg(fine_g: Graph, coarse_p: Partition, P: InterpolationOperator,
                L_max: float, penalty_form: str = PENALTY_OVERLOAD) -> Partition:
    """Assign fine nodes from an aggregated partition.

    Nodes interpolating from a single aggregate inherit its block.  Split
    nodes are placed, in order of descending volume, into the candidate
    block minimizing (resulting cut) * (overload penalty); candidates are
    the blocks of the node's aggregates and of already-assigned neighbors.
    """
    n = fine_g.n
    agg_block = coarse_p.assignment
    assignment = np.full(n, -1, dtype=np.int64)
    block_weight = np.zeros(coarse_p.k, dtype=np.float64)

    split: list[int] = []
    for i in range(n):
        row = P.rows[i]
        if len(row) == 1:
            b = int(agg_block[row[0][0]])
            assignment[i] = b
            block_weight[b] += fine_g.node_weight[i]
        else:
            split.append(i)

    assigned = assignment >= 0
    both = assigned[fine_g.edge_u] & assigned[fine_g.edge_v]
    crossing = both & (assignment[fine_g.edge_u] != assignment[fine_g.edge_v])
    cut = float(fine_g.edge_weight[crossing].sum())

    order = sorted(split, key=lambda i: (-fine_g.node_weight[i], i))
    for i in order:
        cv = float(fine_g.node_weight[i])
        candidates = {int(agg_block[a]) for a, _ in P.rows[i]}
        nbrs, ws, _ = fine_g.neighbors(i)
        conn: dict[int, float] = {}
        total_w = 0.0
        for u, w in zip(nbrs, ws):
            if assignment[u] >= 0:
                b = int(assignment[u])
                conn[b] = conn.get(b, 0.0) + float(w)
                total_w += float(w)
                candidates.add(b)
        best_b = -1
        best_score = None
        for b in sorted(candidates):
            new_cut = cut + (total_w - conn.get(b, 0.0))
            score = new_cut * _penalty(float(block_weight[b]), cv, L_max, penalty_form)
            if best_score is None or score < best_score:
                best_score = score
                best_b = b
        assignment[i] = best_b
        block_weight[best_b] += cv
        cut += total_w - conn.get(best_b, 0.0)

    return make_partition(fine_g, assignment, coarse_p.k, coarse_p.epsilon, coarse_p.L_max)
