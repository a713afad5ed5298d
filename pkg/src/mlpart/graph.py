"""Weighted undirected graphs: construction, adjacency-format I/O, contraction.

Graphs are stored in compressed sparse rows with the neighbor list of every
node sorted by id.  Undirected edges are numbered 0..m-1 in lexicographic
(u, v) order with u < v, and every adjacency slot carries the id of its edge
so that per-edge arrays (ratings, couplings, matchings) can be gathered in
either direction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Graph",
    "GraphParseError",
    "InvalidMatchingError",
    "MatchingMap",
    "Partition",
    "boundary_nodes",
    "compute_lmax",
    "contract_matching",
    "edge_cut",
    "make_partition",
    "parse_graph",
    "write_graph",
]


class GraphParseError(ValueError):
    """A graph file violates the adjacency format; the message names the line."""


class InvalidMatchingError(ValueError):
    """Edges passed as a matching share an endpoint."""


class Graph:
    """Immutable undirected graph with positive edge weights and node volumes.

    Attributes
    ----------
    n : int
        Node count; nodes are 0-based internally (files are 1-based).
    indptr, adj : int arrays
        CSR adjacency; neighbors of ``v`` are ``adj[indptr[v]:indptr[v+1]]``.
    adj_weight, adj_edge : arrays aligned with ``adj``
        Weight of each incident edge and its undirected edge id.
    edge_u, edge_v, edge_weight : arrays of length m
        Canonical edge list with ``edge_u < edge_v``.
    node_weight : float array
        Non-negative node volumes.
    """

    __slots__ = ("n", "indptr", "adj", "adj_weight", "adj_edge",
                 "edge_u", "edge_v", "edge_weight", "node_weight")

    def __init__(self, n, edge_u, edge_v, edge_weight, node_weight):
        edge_u = np.asarray(edge_u, dtype=np.int64)
        edge_v = np.asarray(edge_v, dtype=np.int64)
        edge_weight = np.asarray(edge_weight, dtype=np.float64)
        if node_weight is None:
            node_weight = np.ones(n, dtype=np.float64)
        else:
            node_weight = np.asarray(node_weight, dtype=np.float64)

        if node_weight.shape != (n,):
            raise ValueError("node_weight length does not match n")
        if np.any(node_weight < 0):
            raise ValueError("node weights must be non-negative")
        if edge_u.shape != edge_v.shape or edge_u.shape != edge_weight.shape:
            raise ValueError("edge arrays must have equal length")
        if edge_u.size:
            if edge_u.min(initial=0) < 0 or max(edge_u.max(initial=-1), edge_v.max(initial=-1)) >= n:
                raise ValueError("edge endpoint out of range")
            if np.any(edge_u == edge_v):
                raise ValueError("self-loops are not allowed")
            if np.any(edge_weight <= 0):
                raise ValueError("edge weights must be positive")

        # canonicalize: u < v, sorted lexicographically, duplicates rejected
        lo = np.minimum(edge_u, edge_v)
        hi = np.maximum(edge_u, edge_v)
        order = np.lexsort((hi, lo))
        lo, hi, ew = lo[order], hi[order], edge_weight[order]
        if lo.size > 1 and np.any((lo[1:] == lo[:-1]) & (hi[1:] == hi[:-1])):
            raise ValueError("parallel edges are not allowed")

        m = lo.size
        self.n = int(n)
        self.edge_u = lo
        self.edge_v = hi
        self.edge_weight = ew
        self.node_weight = node_weight

        # CSR over both directions of every edge
        heads = np.concatenate([lo, hi])
        tails = np.concatenate([hi, lo])
        eids = np.concatenate([np.arange(m), np.arange(m)])
        order = np.lexsort((tails, heads))
        heads, tails, eids = heads[order], tails[order], eids[order]
        self.indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(self.indptr, heads + 1, 1)
        np.cumsum(self.indptr, out=self.indptr)
        self.adj = tails
        self.adj_edge = eids
        self.adj_weight = ew[eids]

        for arr in (self.indptr, self.adj, self.adj_weight, self.adj_edge,
                    self.edge_u, self.edge_v, self.edge_weight, self.node_weight):
            arr.setflags(write=False)

    @property
    def m(self) -> int:
        return self.edge_u.size

    def degree(self, v: int) -> int:
        return int(self.indptr[v + 1] - self.indptr[v])

    def neighbors(self, v: int):
        """Return (neighbor ids, edge weights, edge ids) views for node v."""
        a, b = self.indptr[v], self.indptr[v + 1]
        return self.adj[a:b], self.adj_weight[a:b], self.adj_edge[a:b]

    def total_node_weight(self) -> float:
        return float(self.node_weight.sum())

    def max_node_weight(self) -> float:
        return float(self.node_weight.max()) if self.n else 0.0

    def with_edge_weights(self, new_weights) -> "Graph":
        """Copy of the graph with edge weights replaced (same topology)."""
        return Graph(self.n, self.edge_u, self.edge_v, new_weights, self.node_weight.copy())

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"


def compute_lmax(total_weight: float, k: int, epsilon: float, max_node_weight: float) -> float:
    """Per-block weight cap: (1+epsilon) * total/k + heaviest node."""
    if k < 1:
        raise ValueError(f"block count must be >= 1, got {k}")
    if epsilon < 0:
        raise ValueError(f"imbalance parameter must be >= 0, got {epsilon}")
    if total_weight <= 0:
        raise ValueError("total node weight must be positive")
    return (1.0 + epsilon) * total_weight / k + max_node_weight


@dataclass
class Partition:
    """Block assignment with bookkept block weights and cut value."""

    k: int
    assignment: np.ndarray
    block_weight: np.ndarray
    cut: float
    L_max: float
    epsilon: float = 0.0

    def copy(self) -> "Partition":
        return Partition(self.k, self.assignment.copy(), self.block_weight.copy(),
                         self.cut, self.L_max, self.epsilon)

    def max_overload(self) -> float:
        over = self.block_weight - self.L_max
        return float(max(over.max(initial=0.0), 0.0))

    def total_overload(self) -> float:
        over = self.block_weight - self.L_max
        return float(over[over > 0].sum()) if np.any(over > 0) else 0.0

    def is_balanced(self, tol: float = 1e-9) -> bool:
        return self.max_overload() <= tol


def edge_cut(g: Graph, assignment: np.ndarray) -> float:
    """Total weight of edges whose endpoints lie in different blocks."""
    crossing = assignment[g.edge_u] != assignment[g.edge_v]
    return float(g.edge_weight[crossing].sum())


def make_partition(g: Graph, assignment, k: int, epsilon: float = 0.0,
                   L_max: float | None = None) -> Partition:
    """Build a Partition from scratch, recomputing block weights and cut."""
    assignment = np.asarray(assignment, dtype=np.int64)
    if assignment.shape != (g.n,):
        raise ValueError("assignment length does not match graph")
    if assignment.size and (assignment.min() < 0 or assignment.max() >= k):
        raise ValueError("block id out of range")
    if L_max is None:
        L_max = compute_lmax(g.total_node_weight(), k, epsilon, g.max_node_weight())
    block_weight = np.bincount(assignment, weights=g.node_weight, minlength=k)
    return Partition(k, assignment, block_weight, edge_cut(g, assignment), float(L_max), epsilon)


def boundary_nodes(g: Graph, p: Partition) -> np.ndarray:
    """Nodes with at least one neighbor in another block, ascending ids."""
    crossing = p.assignment[g.edge_u] != p.assignment[g.edge_v]
    return np.unique(np.concatenate([g.edge_u[crossing], g.edge_v[crossing]]))


@dataclass
class MatchingMap:
    """Fine-to-coarse node mapping produced by contracting a matching."""

    fine_to_coarse: np.ndarray
    groups: list = field(default_factory=list)  # coarse id -> tuple of fine ids

    @property
    def num_coarse(self) -> int:
        return len(self.groups)


def contract_matching(g: Graph, matching) -> tuple[Graph, MatchingMap]:
    """Contract the matched edges; merged parallel edges add their weights.

    ``matching`` is an iterable of edge ids into ``g``.  Matched pairs become
    one coarse node with the summed volume; self-loops created by the
    contraction are dropped.  Coarse ids are assigned by ascending smallest
    constituent fine id, which keeps the result independent of matching order.
    """
    matching = np.asarray(sorted(int(e) for e in matching), dtype=np.int64)
    partner = np.full(g.n, -1, dtype=np.int64)
    for e in matching:
        u, v = int(g.edge_u[e]), int(g.edge_v[e])
        if partner[u] != -1 or partner[v] != -1:
            raise InvalidMatchingError(f"edge {e} shares an endpoint with another matched edge")
        partner[u] = v
        partner[v] = u

    fine_to_coarse = np.full(g.n, -1, dtype=np.int64)
    groups: list[tuple[int, ...]] = []
    for u in range(g.n):
        if fine_to_coarse[u] != -1:
            continue
        cid = len(groups)
        v = partner[u]
        if v == -1:
            groups.append((u,))
            fine_to_coarse[u] = cid
        else:
            groups.append((u, int(v)))
            fine_to_coarse[u] = cid
            fine_to_coarse[v] = cid

    nc = len(groups)
    coarse_c = np.zeros(nc, dtype=np.float64)
    np.add.at(coarse_c, fine_to_coarse, g.node_weight)

    cu = fine_to_coarse[g.edge_u]
    cv = fine_to_coarse[g.edge_v]
    keep = cu != cv
    lo = np.minimum(cu[keep], cv[keep])
    hi = np.maximum(cu[keep], cv[keep])
    w = g.edge_weight[keep]
    # merge parallel coarse edges by weight addition
    key = lo * nc + hi
    order = np.argsort(key, kind="stable")
    key, lo, hi, w = key[order], lo[order], hi[order], w[order]
    if key.size:
        uniq, start = np.unique(key, return_index=True)
        merged_w = np.add.reduceat(w, start)
        coarse = Graph(nc, lo[start], hi[start], merged_w, coarse_c)
    else:
        coarse = Graph(nc, [], [], [], coarse_c)
    return coarse, MatchingMap(fine_to_coarse, groups)


# ---------------------------------------------------------------------------
# Adjacency file format (Chaco/Metis style)
#
#   header: "n m fmt" with fmt in {0, 1, 10, 11}
#   line i+1 lists the 1-indexed neighbors of node i
#   fmt & 1  -> an edge weight follows each neighbor id
#   fmt >= 10 -> a node weight opens the line
#   lines starting with '%' are comments and do not count
# ---------------------------------------------------------------------------

_VALID_FMTS = (0, 1, 10, 11)


def parse_graph(text: str) -> Graph:
    """Parse an adjacency-format graph, validating symmetry and weights."""
    header = None
    header_line = 0
    body: list[tuple[int, str]] = []
    for ln, raw in enumerate(text.splitlines(), 1):
        if raw.lstrip().startswith("%"):
            continue
        if header is None:
            header = raw
            header_line = ln
        else:
            body.append((ln, raw))

    if header is None:
        raise GraphParseError("line 1: missing header")
    parts = header.split()
    if len(parts) not in (2, 3):
        raise GraphParseError(f"line {header_line}: header must be 'n m fmt'")
    try:
        n, m_decl = int(parts[0]), int(parts[1])
        fmt = int(parts[2]) if len(parts) == 3 else 0
    except ValueError:
        raise GraphParseError(f"line {header_line}: header fields must be integers") from None
    if fmt not in _VALID_FMTS:
        raise GraphParseError(f"line {header_line}: unsupported fmt {fmt}")
    if n < 0 or m_decl < 0:
        raise GraphParseError(f"line {header_line}: negative n or m")
    has_node_w = fmt >= 10
    has_edge_w = fmt % 10 == 1

    while len(body) > n and not body[-1][1].strip():
        body.pop()
    if len(body) != n:
        raise GraphParseError(
            f"line {header_line}: header declares {n} nodes but file has {len(body)} adjacency lines")

    node_w = np.ones(n, dtype=np.float64)
    # edge key -> (weight, line seen from lower endpoint or -1, line from higher)
    seen: dict[tuple[int, int], list] = {}
    for i, (ln, raw) in enumerate(body):
        tokens = raw.split()
        pos = 0
        if has_node_w:
            if not tokens:
                raise GraphParseError(f"line {ln}: missing node weight")
            try:
                node_w[i] = float(tokens[0])
            except ValueError:
                raise GraphParseError(f"line {ln}: bad node weight {tokens[0]!r}") from None
            if node_w[i] < 0:
                raise GraphParseError(f"line {ln}: negative node weight")
            pos = 1
        rest = tokens[pos:]
        if has_edge_w and len(rest) % 2:
            raise GraphParseError(f"line {ln}: dangling neighbor without edge weight")
        step = 2 if has_edge_w else 1
        row_seen: set[int] = set()
        for t in range(0, len(rest), step):
            try:
                j = int(rest[t])
            except ValueError:
                raise GraphParseError(f"line {ln}: bad neighbor id {rest[t]!r}") from None
            if j < 1 or j > n:
                raise GraphParseError(f"line {ln}: neighbor index {j} out of range")
            j -= 1
            if j == i:
                raise GraphParseError(f"line {ln}: self-loop on node {i + 1}")
            if j in row_seen:
                raise GraphParseError(f"line {ln}: duplicate neighbor {j + 1}")
            row_seen.add(j)
            if has_edge_w:
                try:
                    w = float(rest[t + 1])
                except ValueError:
                    raise GraphParseError(f"line {ln}: bad edge weight {rest[t + 1]!r}") from None
            else:
                w = 1.0
            if w <= 0:
                raise GraphParseError(f"line {ln}: non-positive edge weight on edge "
                                      f"{{{i + 1},{j + 1}}}")
            key = (i, j) if i < j else (j, i)
            entry = seen.setdefault(key, [w, -1, -1])
            if entry[0] != w:
                raise GraphParseError(f"line {ln}: edge {{{key[0] + 1},{key[1] + 1}}} weight "
                                      f"{w:g} conflicts with {entry[0]:g}")
            entry[1 if i == key[0] else 2] = ln

    for (a, b), (w, fwd, bwd) in seen.items():
        if fwd == -1 or bwd == -1:
            present = max(fwd, bwd)
            raise GraphParseError(f"line {present}: edge {{{a + 1},{b + 1}}} is not symmetric")
    if len(seen) != m_decl:
        raise GraphParseError(
            f"line {header_line}: header declares m={m_decl} but file has {len(seen)} edges")

    if seen:
        keys = sorted(seen)
        eu = np.array([a for a, _ in keys], dtype=np.int64)
        ev = np.array([b for _, b in keys], dtype=np.int64)
        ew = np.array([seen[kk][0] for kk in keys], dtype=np.float64)
    else:
        eu = ev = np.empty(0, dtype=np.int64)
        ew = np.empty(0, dtype=np.float64)
    return Graph(n, eu, ev, ew, node_w)


def _fmt_num(x: float) -> str:
    return str(int(x)) if float(x).is_integer() and abs(x) < 2 ** 53 else repr(float(x))


def write_graph(g: Graph, fmt: int | None = None) -> str:
    """Serialize to the adjacency format; fmt is inferred when omitted."""
    if fmt is None:
        has_node_w = bool(np.any(g.node_weight != 1.0))
        has_edge_w = bool(np.any(g.edge_weight != 1.0))
        fmt = (10 if has_node_w else 0) + (1 if has_edge_w else 0)
    if fmt not in _VALID_FMTS:
        raise ValueError(f"unsupported fmt {fmt}")
    has_node_w = fmt >= 10
    has_edge_w = fmt % 10 == 1
    lines = [f"{g.n} {g.m} {fmt}"]
    for v in range(g.n):
        toks: list[str] = []
        if has_node_w:
            toks.append(_fmt_num(g.node_weight[v]))
        nbrs, ws, _ = g.neighbors(v)
        for j, w in zip(nbrs, ws):
            toks.append(str(j + 1))
            if has_edge_w:
                toks.append(_fmt_num(w))
        lines.append(" ".join(toks))
    return "\n".join(lines) + "\n"
