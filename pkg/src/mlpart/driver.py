"""Multilevel orchestration: coarsen, solve the coarsest level, project back.

Six named configurations pair a coarsening family (matching contraction or
aggregation) with a refinement strength and a cycle shape.  Iterated cycles
carry the previous partition through a block-respecting coarsening so the
result can only improve; the deeper cycle additionally reruns a carried
cycle at every level on the way up.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .algdist import RelaxationParams, algebraic_distances
from .amg import AmgParams, InterpolationOperator, aggregate_level
from .graph import (Graph, MatchingMap, Partition, compute_lmax,
                    contract_matching, edge_cut, make_partition)
from .initial import coarsest_size_limit, initial_partition
from .matching import (RATING_EXPANSION2, RATING_EX_ALG, edge_ratings,
                       gpa_matching, matching_schedule, random_matching)
from .refine import fm_refine, multi_try_fm, project_amg, project_matching

__all__ = [
    "PRESETS",
    "DriverConfig",
    "Hierarchy",
    "Preset",
    "RunStats",
    "coarsen",
    "f_cycle",
    "iterated_v_cycles",
    "partition_graph",
    "v_cycle",
]

_SEED_MASK = (1 << 63) - 1

# purposes for derived random streams
_S_COARSEN, _S_INIT, _S_REFINE, _S_MULTI, _S_SUB = 1, 2, 3, 4, 5


def _derive(seed: int, *tags: int) -> int:
    ss = np.random.SeedSequence([int(seed) & _SEED_MASK, *[int(t) & _SEED_MASK for t in tags]])
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class Preset:
    """One named configuration row."""

    name: str
    family: str                 # 'matching' | 'amg'
    matching_family: str | None  # schedule for the matching family
    refinement: str             # 'basic' (fm) | 'strong' (fm + multi-try)
    cycle: str                  # 'v' | 'f'


PRESETS: dict[str, Preset] = {
    "eco": Preset("eco", "matching", "randomgpa", "basic", "v"),
    "eco-alg": Preset("eco-alg", "matching", "gpa_alg", "basic", "v"),
    "f-cycle": Preset("f-cycle", "matching", "strong", "strong", "f"),
    "strong": Preset("strong", "matching", "strong", "strong", "v"),
    "amg-eco": Preset("amg-eco", "amg", None, "basic", "v"),
    "amg": Preset("amg", "amg", None, "strong", "v"),
}


@dataclass
class DriverConfig:
    """Tunable knobs shared by every cycle; defaults match the presets."""

    stop_threshold: int = 30
    coarsest_attempts: int = 8
    theta: float = 0.5
    kappa: int = 10
    max_agg_volume: float | None = None   # None: use the instance block cap
    alpha: float = 0.5
    test_vectors: int = 5
    relax_sweeps: int = 20
    max_stall: int = 300
    multi_try_rounds: int = 20
    penalty_form: str = "overload"
    f_sub_depth: int = 1
    min_shrink: float = 0.05
    # contracted nodes heavier than factor * total / coarsest-size-limit lose
    # mobility under the balance cap, so such pairs are not matched
    contraction_weight_factor: float = 1.5
    matching_override: str | None = None  # 'random' | 'gpa' | 'randomgpa'
    rating_override: str | None = None


@dataclass
class RunStats:
    """Filled in by the cycle drivers for reporting."""

    cut_pre_final: float | None = None
    uncoarsen_seconds: float = 0.0
    sub_cycles: int = 0
    levels: int = 0


@dataclass
class Hierarchy:
    """Coarsening levels; ``maps[i]`` projects a level-(i+1) partition to level i."""

    graphs: list[Graph] = field(default_factory=list)
    maps: list[MatchingMap | InterpolationOperator] = field(default_factory=list)
    family: str = "matching"

    @property
    def num_levels(self) -> int:
        return len(self.graphs)


def _resolve_preset(preset) -> Preset:
    if isinstance(preset, Preset):
        return preset
    try:
        return PRESETS[str(preset).lower()]
    except KeyError:
        raise ValueError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}") from None


def _relax_params(cfg: DriverConfig, seed: int) -> RelaxationParams:
    return RelaxationParams(alpha=cfg.alpha, num_vectors=cfg.test_vectors,
                            num_sweeps=cfg.relax_sweeps, seed=seed)


def _level_schedule(preset: Preset, cfg: DriverConfig, level: int, k: int):
    """Matcher and rating for one matching-family level, with CLI overrides."""
    if cfg.matching_override == "random":
        return "random", None
    family = cfg.matching_override if cfg.matching_override == "randomgpa" else None
    family = family or preset.matching_family or "strong"
    if cfg.matching_override == "gpa":
        base = matching_schedule(family, level, k)
        return "gpa", cfg.rating_override or (base[1] or RATING_EXPANSION2)
    algo, rating = matching_schedule(family, level, k)
    if algo == "gpa" and cfg.rating_override:
        rating = cfg.rating_override
    return algo, rating


def coarsen(g: Graph, preset, k: int, epsilon: float, seed: int,
            cfg: DriverConfig | None = None,
            constraint: np.ndarray | None = None) -> Hierarchy:
    """Build the level hierarchy for one cycle.

    Stops at the coarsest-size limit or when a level shrinks by less than
    the stall guard.  ``constraint`` restricts contraction/aggregation to
    stay inside the blocks of a carried partition; the constrained coarse
    assignment of each level replaces it for the next.
    """
    preset = _resolve_preset(preset)
    cfg = cfg or DriverConfig()
    L_max = compute_lmax(g.total_node_weight(), max(k, 1), epsilon, g.max_node_weight())
    limit = coarsest_size_limit(cfg.stop_threshold, max(k, 1))
    if cfg.max_agg_volume is not None:
        maxvol = cfg.max_agg_volume
    else:
        # the block-weight bound keeps the coarsest instance feasible, but
        # aggregates that heavy are immovable under it; cap them like
        # contracted pairs so refinement keeps its mobility
        maxvol = min(L_max, max(cfg.contraction_weight_factor
                                * g.total_node_weight() / limit,
                                2.0 * g.max_node_weight()))

    # never below one contraction of the heaviest input nodes, or small
    # graphs could not coarsen at all
    weight_cap = max(cfg.contraction_weight_factor * g.total_node_weight() / limit,
                     2.0 * g.max_node_weight())
    hier = Hierarchy(graphs=[g], family=preset.family)
    level = 0
    while hier.graphs[-1].n > limit:
        cur = hier.graphs[-1]
        if preset.family == "matching":
            algo, rating = _level_schedule(preset, cfg, level, k)
            allowed = cur.node_weight[cur.edge_u] + cur.node_weight[cur.edge_v] <= weight_cap
            if constraint is not None:
                allowed &= constraint[cur.edge_u] == constraint[cur.edge_v]
            if algo == "random":
                chosen = random_matching(cur, _derive(seed, _S_COARSEN, level), allowed)
            else:
                rho = None
                if rating == RATING_EX_ALG:
                    rho = algebraic_distances(
                        cur, _relax_params(cfg, _derive(seed, _S_COARSEN, level)))
                ratings = edge_ratings(cur, rating, rho)
                chosen = gpa_matching(cur, ratings, allowed)
            if chosen.size == 0:
                break
            coarse, proj = contract_matching(cur, chosen)
        else:
            rho = algebraic_distances(
                cur, _relax_params(cfg, _derive(seed, _S_COARSEN, level)))
            params = AmgParams(theta=cfg.theta, kappa=cfg.kappa, max_aggregate_volume=maxvol)
            coarse, proj = aggregate_level(cur, rho, params, constraint)
        if coarse.n > (1.0 - cfg.min_shrink) * cur.n:
            break  # stalled: not enough contractible structure left
        hier.graphs.append(coarse)
        hier.maps.append(proj)
        if constraint is not None:
            constraint = _project_constraint(constraint, proj, coarse.n)
        level += 1
    return hier


def _project_constraint(constraint: np.ndarray, proj, nc: int) -> np.ndarray:
    out = np.full(nc, -1, dtype=np.int64)
    if isinstance(proj, MatchingMap):
        out[proj.fine_to_coarse] = constraint
    else:
        for i, row in enumerate(proj.rows):
            for p, _ in row:
                out[p] = constraint[i]
    return out


def _refine_level(g: Graph, p: Partition, preset: Preset, cfg: DriverConfig,
                  seed: int, level: int) -> Partition:
    p = fm_refine(g, p, p.L_max, cfg.max_stall, _derive(seed, _S_REFINE, level))
    if preset.refinement == "strong":
        # enough localized searches to sweep the boundary of larger levels
        rounds = max(cfg.multi_try_rounds, g.n // 16)
        p = multi_try_fm(g, p, p.L_max, rounds,
                         _derive(seed, _S_MULTI, level), cfg.max_stall)
    return p


def _project(fine_g: Graph, p: Partition, proj, cfg: DriverConfig) -> Partition:
    if isinstance(proj, MatchingMap):
        return project_matching(p, proj)
    return project_amg(fine_g, p, proj, p.L_max, cfg.penalty_form)


def _check(g: Graph, p: Partition, where: str, validate: bool) -> None:
    if not validate:
        return
    assert np.isclose(p.cut, edge_cut(g, p.assignment), rtol=1e-9, atol=1e-9), \
        f"cut bookkeeping mismatch after {where}"
    fresh = np.bincount(p.assignment, weights=g.node_weight, minlength=p.k)
    assert np.allclose(p.block_weight, fresh, rtol=1e-9, atol=1e-9), \
        f"block weights mismatch after {where}"


def _unwind(hier: Hierarchy, p: Partition, preset: Preset, cfg: DriverConfig,
            seed: int, k: int, epsilon: float, stats: RunStats | None,
            sub_depth: int, validate: bool) -> tuple[Partition, float]:
    """Project + refine from the coarsest level to the finest.

    With ``sub_depth`` > 0, a carried sub-cycle runs at every level before
    ascending, which is the deeper cycle shape.  Returns the finest
    partition and its cut before the last refinement pass.
    """
    top = hier.num_levels - 1
    pre_final = p.cut if top == 0 else None
    p = _refine_level(hier.graphs[top], p, preset, cfg, seed, top)
    _check(hier.graphs[top], p, f"refine level {top}", validate)
    if sub_depth > 0 and top >= 1:
        p = _sub_cycle(hier.graphs[top], p, preset, cfg, seed, k, epsilon,
                       top, stats, sub_depth, validate)
    for lvl in range(top - 1, -1, -1):
        p = _project(hier.graphs[lvl], p, hier.maps[lvl], cfg)
        _check(hier.graphs[lvl], p, f"projection to level {lvl}", validate)
        if lvl == 0:
            pre_final = p.cut
        p = _refine_level(hier.graphs[lvl], p, preset, cfg, seed, lvl)
        _check(hier.graphs[lvl], p, f"refine level {lvl}", validate)
        if sub_depth > 0 and lvl >= 1:
            p = _sub_cycle(hier.graphs[lvl], p, preset, cfg, seed, k, epsilon,
                           lvl, stats, sub_depth, validate)
    return p, float(pre_final)


def _sub_cycle(g: Graph, p: Partition, preset: Preset, cfg: DriverConfig,
               seed: int, k: int, epsilon: float, level: int,
               stats: RunStats | None, depth: int, validate: bool) -> Partition:
    if stats is not None:
        stats.sub_cycles += 1
    sub_seed = _derive(seed, _S_SUB, level, depth)
    if depth > 1:
        out = f_cycle(g, k, epsilon, preset, sub_seed, cfg, initial=p,
                      validate=validate, _depth=depth - 1)
    else:
        out = v_cycle(g, k, epsilon, preset, sub_seed, cfg, initial=p,
                      validate=validate)
    return out


def _solve_coarsest(hier: Hierarchy, k: int, epsilon: float, L_max: float,
                    seed: int, cfg: DriverConfig,
                    constraint: np.ndarray | None) -> Partition:
    coarsest = hier.graphs[-1]
    if constraint is not None:
        return make_partition(coarsest, constraint, k, epsilon, L_max)
    return initial_partition(coarsest, k, L_max, cfg.coarsest_attempts,
                             _derive(seed, _S_INIT), epsilon)


def v_cycle(g: Graph, k: int, epsilon: float, preset, seed: int,
            cfg: DriverConfig | None = None, initial: Partition | None = None,
            stats: RunStats | None = None, validate: bool = False) -> Partition:
    """One coarsen / solve / project+refine pass; deterministic per seed.

    With ``initial`` given, coarsening respects its blocks and the carried
    partition replaces the coarsest solve, so the result never worsens it.
    """
    preset = _resolve_preset(preset)
    cfg = cfg or DriverConfig()
    if k <= 1:
        return make_partition(g, np.zeros(g.n, dtype=np.int64), 1, epsilon)
    L_max = compute_lmax(g.total_node_weight(), k, epsilon, g.max_node_weight())
    constraint = initial.assignment if initial is not None else None

    hier = coarsen(g, preset, k, epsilon, seed, cfg, constraint)
    if stats is not None:
        stats.levels = max(stats.levels, hier.num_levels)
    coarse_constraint = constraint
    if constraint is not None:
        for proj, cg in zip(hier.maps, hier.graphs[1:]):
            coarse_constraint = _project_constraint(coarse_constraint, proj, cg.n)
    p = _solve_coarsest(hier, k, epsilon, L_max, seed, cfg, coarse_constraint)

    t0 = time.perf_counter()
    out, pre_final = _unwind(hier, p, preset, cfg, seed, k, epsilon, stats,
                             sub_depth=0, validate=validate)
    if stats is not None:
        stats.uncoarsen_seconds += time.perf_counter() - t0
        stats.cut_pre_final = pre_final
    if initial is not None and edge_cut(g, out.assignment) > edge_cut(g, initial.assignment):
        return initial.copy()  # numerical guard; carried solutions never regress
    return out


def f_cycle(g: Graph, k: int, epsilon: float, preset, seed: int,
            cfg: DriverConfig | None = None, initial: Partition | None = None,
            stats: RunStats | None = None, validate: bool = False,
            _depth: int | None = None) -> Partition:
    """Deeper cycle: carried sub-cycles run at every level during ascent.

    The plain pass with the same seed is evaluated alongside and the better
    final partition wins, so this never loses to :func:`v_cycle` at equal
    seed.
    """
    preset = _resolve_preset(preset)
    cfg = cfg or DriverConfig()
    if k <= 1:
        return make_partition(g, np.zeros(g.n, dtype=np.int64), 1, epsilon)
    depth = cfg.f_sub_depth if _depth is None else _depth
    L_max = compute_lmax(g.total_node_weight(), k, epsilon, g.max_node_weight())
    constraint = initial.assignment if initial is not None else None

    hier = coarsen(g, preset, k, epsilon, seed, cfg, constraint)
    if stats is not None:
        stats.levels = max(stats.levels, hier.num_levels)
    coarse_constraint = constraint
    if constraint is not None:
        for proj, cg in zip(hier.maps, hier.graphs[1:]):
            coarse_constraint = _project_constraint(coarse_constraint, proj, cg.n)
    base = _solve_coarsest(hier, k, epsilon, L_max, seed, cfg, coarse_constraint)

    t0 = time.perf_counter()
    plain, plain_pre = _unwind(hier, base.copy(), preset, cfg, seed, k, epsilon,
                               None, sub_depth=0, validate=validate)
    deep, deep_pre = _unwind(hier, base.copy(), preset, cfg, seed, k, epsilon,
                             stats, sub_depth=depth, validate=validate)
    uncoarsen = time.perf_counter() - t0

    if edge_cut(g, deep.assignment) <= edge_cut(g, plain.assignment):
        out, pre = deep, deep_pre
    else:
        out, pre = plain, plain_pre
    if stats is not None:
        stats.uncoarsen_seconds += uncoarsen
        stats.cut_pre_final = pre
    if initial is not None and edge_cut(g, out.assignment) > edge_cut(g, initial.assignment):
        return initial.copy()
    return out


def iterated_v_cycles(g: Graph, k: int, epsilon: float, preset,
                      iterations: int, seed: int,
                      cfg: DriverConfig | None = None,
                      stats: RunStats | None = None,
                      validate: bool = False) -> Partition:
    """Repeat the cycle with seeds seed, seed+1, ... carrying the partition.

    Refinement never worsens a carried solution, so the cut sequence is
    non-increasing across iterations.
    """
    if iterations < 1:
        raise ValueError("need at least one iteration")
    preset = _resolve_preset(preset)
    cycle = f_cycle if preset.cycle == "f" else v_cycle
    p = cycle(g, k, epsilon, preset, seed, cfg, None, stats, validate)
    for t in range(1, iterations):
        nxt = cycle(g, k, epsilon, preset, seed + t, cfg, p, stats, validate)
        if nxt.cut <= p.cut:
            p = nxt
    return p


def partition_graph(g: Graph, k: int, epsilon: float, preset, seed: int,
                    iterations: int = 1, cfg: DriverConfig | None = None,
                    stats: RunStats | None = None,
                    validate: bool = False) -> Partition:
    """Main entry point: dispatch on the preset's cycle shape."""
    preset = _resolve_preset(preset)
    if iterations > 1:
        return iterated_v_cycles(g, k, epsilon, preset, iterations, seed, cfg,
                                 stats, validate)
    cycle = f_cycle if preset.cycle == "f" else v_cycle
    return cycle(g, k, epsilon, preset, seed, cfg, None, stats, validate)
