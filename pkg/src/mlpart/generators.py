"""Small graph generators for benchmarks and experiments."""

from __future__ import annotations

import numpy as np

from .graph import Graph

__all__ = ["grid_graph", "preferential_attachment", "random_gnm"]


def grid_graph(rows: int, cols: int) -> Graph:
    """Unweighted 2D grid with 4-neighbor connectivity."""
    if rows < 1 or cols < 1:
        raise ValueError("grid dimensions must be positive")
    eu, ev = [], []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                eu.append(v)
                ev.append(v + 1)
            if r + 1 < rows:
                eu.append(v)
                ev.append(v + cols)
    return Graph(rows * cols, eu, ev, np.ones(len(eu)), None)


def preferential_attachment(n: int, attach: int, seed: int = 0) -> Graph:
    """Scale-free graph: each new node links to ``attach`` degree-biased targets.

    Targets are drawn from the repeated-endpoints list, so selection is
    proportional to current degree; duplicate picks are rejected to keep the
    graph simple.
    """
    if n < attach + 1:
        raise ValueError("need more nodes than attachments")
    if attach < 1:
        raise ValueError("attach must be >= 1")
    rng = np.random.default_rng(seed)
    edges: set[tuple[int, int]] = set()
    pool: list[int] = []
    # start from a small clique so early nodes have degree
    for u in range(attach + 1):
        for v in range(u + 1, attach + 1):
            edges.add((u, v))
            pool.extend((u, v))
    for v in range(attach + 1, n):
        picked: set[int] = set()
        while len(picked) < attach:
            t = pool[int(rng.integers(len(pool)))]
            if t != v:
                picked.add(int(t))
        for t in sorted(picked):
            edges.add((min(v, t), max(v, t)))
            pool.extend((v, t))
    eu = [a for a, _ in sorted(edges)]
    ev = [b for _, b in sorted(edges)]
    return Graph(n, eu, ev, np.ones(len(eu)), None)


def random_gnm(n: int, m: int, seed: int = 0, weighted: bool = False,
               max_weight: int = 5) -> Graph:
    """Uniform simple graph with n nodes and m edges (integer weights optional)."""
    limit = n * (n - 1) // 2
    if m > limit:
        raise ValueError(f"at most {limit} edges possible on {n} nodes")
    rng = np.random.default_rng(seed)
    chosen: set[tuple[int, int]] = set()
    while len(chosen) < m:
        u = int(rng.integers(n))
        v = int(rng.integers(n))
        if u != v:
            chosen.add((min(u, v), max(u, v)))
    pairs = sorted(chosen)
    eu = [a for a, _ in pairs]
    ev = [b for _, b in pairs]
    if weighted:
        ew = rng.integers(1, max_weight + 1, size=m).astype(np.float64)
    else:
        ew = np.ones(m)
    return Graph(n, eu, ev, ew, None)
