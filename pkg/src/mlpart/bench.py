"""Hard-instance generation and the seeded experiment runner.

Hard instances are star-like mixtures: satellite graphs get weakly tied to a
center graph by a few random edges (at least two per attachment node, total
strictly below a small fraction of the satellite's edge count), which makes
structure-blind coarsening merge regions that a good cut keeps apart.

The runner executes every (graph, preset, k, seed) combination with a shared
seed list and reports per-run rows plus ratio-of-averages tables.
"""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .driver import DriverConfig, RunStats, partition_graph
from .graph import Graph

__all__ = [
    "ExperimentReport",
    "MixtureGenerationError",
    "MixtureSpec",
    "RunRow",
    "generate_hard_mixture",
    "run_experiment",
]


class MixtureGenerationError(RuntimeError):
    pass


@dataclass
class MixtureSpec:
    """Star-mixture recipe; ``parts[0]`` is the center graph.

    Per satellite, the number of added edges stays strictly below
    ``budget_fraction`` times its own edge count.  ``boundary_nodes`` caps
    how many satellite nodes receive edges; by default as many as the budget
    admits.
    """

    parts: list[Graph]
    edges_per_boundary_node: int = 2
    budget_fraction: float = 0.03
    boundary_nodes: int | None = None
    seed: int = 0

    def __post_init__(self):
        if len(self.parts) < 1:
            raise ValueError("need at least the center graph")
        if self.edges_per_boundary_node < 2:
            raise ValueError("each attachment node needs at least two edges")
        if not 0.0 < self.budget_fraction <= 0.03:
            raise ValueError("budget fraction must be in (0, 0.03]")


def _component_budget(fraction: float, m_i: int) -> int:
    """Largest edge count strictly below fraction * m_i."""
    limit = fraction * m_i
    budget = math.floor(limit)
    if budget == limit:
        budget -= 1
    return budget


def _connected(n: int, eu: np.ndarray, ev: np.ndarray) -> bool:
    if n <= 1:
        return True
    adj: list[list[int]] = [[] for _ in range(n)]
    for a, b in zip(eu, ev):
        adj[a].append(int(b))
        adj[b].append(int(a))
    seen = np.zeros(n, dtype=bool)
    stack = [0]
    seen[0] = True
    while stack:
        v = stack.pop()
        for u in adj[v]:
            if not seen[u]:
                seen[u] = True
                stack.append(u)
    return bool(seen.all())


def generate_hard_mixture(spec: MixtureSpec, max_retries: int = 32) -> Graph:
    """Disjoint union of the parts plus random satellite-to-center edges.

    Every sampled satellite node gets ``edges_per_boundary_node`` distinct
    random center endpoints; the per-satellite total is checked against the
    strict budget before returning.  Retries the random attachment until the
    union is connected.
    """
    center = spec.parts[0]
    if len(spec.parts) == 1:
        return center
    if center.n < spec.edges_per_boundary_node:
        raise MixtureGenerationError(
            f"center has {center.n} nodes; cannot place "
            f"{spec.edges_per_boundary_node} distinct edges per attachment node")

    offsets = np.cumsum([0] + [p.n for p in spec.parts])
    n = int(offsets[-1])
    base_u, base_v, base_w, node_w = [], [], [], []
    for off, part in zip(offsets, spec.parts):
        base_u.append(part.edge_u + off)
        base_v.append(part.edge_v + off)
        base_w.append(part.edge_weight)
        node_w.append(part.node_weight)
    base_u = np.concatenate(base_u)
    base_v = np.concatenate(base_v)
    base_w = np.concatenate(base_w)
    node_w = np.concatenate(node_w)

    epn = spec.edges_per_boundary_node
    rng = np.random.default_rng(spec.seed)
    for _ in range(max_retries):
        inter_u, inter_v = [], []
        counts = []
        for idx in range(1, len(spec.parts)):
            part = spec.parts[idx]
            budget = _component_budget(spec.budget_fraction, part.m)
            max_nodes = budget // epn
            if max_nodes < 1:
                raise MixtureGenerationError(
                    f"component {idx}: budget of {budget} inter-edges cannot "
                    f"attach a node needing {epn} edges")
            num_nodes = min(max_nodes, part.n,
                            spec.boundary_nodes if spec.boundary_nodes else max_nodes)
            picked = rng.choice(part.n, size=num_nodes, replace=False)
            added = 0
            for v in picked:
                targets = rng.choice(center.n, size=min(epn, center.n), replace=False)
                for t in targets:
                    inter_u.append(int(offsets[idx] + v))
                    inter_v.append(int(t))
                    added += 1
            counts.append((idx, added, budget, part.m))

        for idx, added, budget, m_i in counts:
            if not added < spec.budget_fraction * m_i:
                raise MixtureGenerationError(
                    f"component {idx}: {added} inter-edges is not under the budget")
        eu = np.concatenate([base_u, np.array(inter_u, dtype=np.int64)])
        ev = np.concatenate([base_v, np.array(inter_v, dtype=np.int64)])
        if _connected(n, eu, ev):
            ew = np.concatenate([base_w, np.ones(len(inter_u))])
            return Graph(n, eu, ev, ew, node_w)

    raise MixtureGenerationError(
        "could not connect the mixture within the retry budget; "
        "a satellite component may be internally disconnected")


@dataclass
class RunRow:
    graph: str
    preset: str
    k: int
    seed: int
    cut: float | None
    cut_pre_final: float | None
    t_uncoarsen_ms: float
    t_total_ms: float
    status: str = "ok"


_CSV_COLUMNS = ["graph", "preset", "k", "seed", "cut", "cut_pre_final",
                "t_uncoarsen_ms", "t_total_ms", "status"]


def _fmt_cut(x: float | None) -> str:
    if x is None:
        return ""
    return str(int(x)) if float(x).is_integer() else repr(float(x))


@dataclass
class ExperimentReport:
    rows: list[RunRow] = field(default_factory=list)
    seeds: list[int] = field(default_factory=list)

    def ok_cuts(self, graph: str, preset: str, k: int) -> list[float]:
        return [r.cut for r in self.rows
                if r.graph == graph and r.preset == preset and r.k == k
                and r.status == "ok"]

    def average_cut(self, graph: str, preset: str, k: int) -> float:
        cuts = self.ok_cuts(graph, preset, k)
        if not cuts:
            raise ValueError(f"no successful runs for {(graph, preset, k)}")
        return sum(cuts) / len(cuts)

    def ratio(self, preset_a: str, preset_b: str, graph: str, k: int) -> float:
        """Average cut of A divided by average cut of B over the shared seeds."""
        return self.average_cut(graph, preset_a, k) / self.average_cut(graph, preset_b, k)

    def combos(self) -> list[tuple[str, int]]:
        seen: list[tuple[str, int]] = []
        for r in self.rows:
            if (r.graph, r.k) not in seen:
                seen.append((r.graph, r.k))
        return seen

    def presets(self) -> list[str]:
        seen: list[str] = []
        for r in self.rows:
            if r.preset not in seen:
                seen.append(r.preset)
        return seen

    def ratio_rows(self) -> list[dict]:
        out = []
        for graph, k in self.combos():
            for a in self.presets():
                for b in self.presets():
                    if a == b:
                        continue
                    try:
                        value = self.ratio(a, b, graph, k)
                    except ValueError:
                        continue
                    out.append({"graph": graph, "k": k, "numerator": a,
                                "denominator": b, "ratio": value})
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(_CSV_COLUMNS)
        for r in self.rows:
            writer.writerow([r.graph, r.preset, r.k, r.seed, _fmt_cut(r.cut),
                             _fmt_cut(r.cut_pre_final),
                             f"{r.t_uncoarsen_ms:.3f}", f"{r.t_total_ms:.3f}",
                             r.status])
        return buf.getvalue()

    def ratios_to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["graph", "k", "numerator", "denominator", "ratio"])
        for row in self.ratio_rows():
            writer.writerow([row["graph"], row["k"], row["numerator"],
                             row["denominator"], f"{row['ratio']:.6f}"])
        return buf.getvalue()

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv())

    def write_ratios_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.ratios_to_csv())


def run_experiment(graphs: list[tuple[str, Graph]], presets: list[str],
                   ks: list[int], seeds: list[int], epsilon: float = 0.03,
                   iterations: int = 1,
                   cfg: DriverConfig | None = None) -> ExperimentReport:
    """Run every combination with the shared seed list.

    Failed runs are recorded with an error status and excluded from the
    averages.  Rows come out in deterministic (graph, preset, k, seed) order.
    """
    if not graphs or not presets or not ks or not seeds:
        raise ValueError("need at least one graph, preset, k, and seed")
    report = ExperimentReport(seeds=list(seeds))
    for name, g in graphs:
        for preset in presets:
            for k in ks:
                for seed in seeds:
                    stats = RunStats()
                    t0 = time.perf_counter()
                    try:
                        p = partition_graph(g, k, epsilon, preset, seed,
                                            iterations, cfg, stats)
                        total = time.perf_counter() - t0
                        report.rows.append(RunRow(
                            name, preset, k, seed, p.cut, stats.cut_pre_final,
                            stats.uncoarsen_seconds * 1e3, total * 1e3))
                    except Exception as exc:  # recorded, excluded from averages
                        total = time.perf_counter() - t0
                        report.rows.append(RunRow(
                            name, preset, k, seed, None, None, 0.0,
                            total * 1e3, status=f"error: {exc}"))
    return report
