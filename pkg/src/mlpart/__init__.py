"""Multilevel k-way graph partitioning.

Two coarsening families (matching contraction with rated global-paths
matchings, and volume-capped aggregation guided by relaxation-based edge
couplings), local-search refinement, carried multilevel cycles, and a seeded
benchmark harness with a hard-instance generator.
"""

from .algdist import (DegenerateVolumeError, RelaxationParams,
                      algebraic_distances, coupling_strength, jor_sweep,
                      volume_normalized_weights)
from .amg import (AmgParams, InterpolationOperator, aggregate_level,
                  build_interpolation, future_volume_order, galerkin_coarsen,
                  select_seeds)
from .bench import (ExperimentReport, MixtureGenerationError, MixtureSpec,
                    RunRow, generate_hard_mixture, run_experiment)
from .driver import (PRESETS, DriverConfig, Hierarchy, Preset, RunStats,
                     coarsen, f_cycle, iterated_v_cycles, partition_graph,
                     v_cycle)
from .generators import grid_graph, preferential_attachment, random_gnm
from .graph import (Graph, GraphParseError, InvalidMatchingError, MatchingMap,
                    Partition, boundary_nodes, compute_lmax, contract_matching,
                    edge_cut, make_partition, parse_graph, write_graph)
from .initial import (CoarsestPolicy, coarsest_size_limit, initial_partition,
                      normalize_and_round)
from .matching import (RATING_EXPANSION2, RATING_EX_ALG, RATING_INNER_OUTER,
                       edge_ratings, gpa_matching, matching_schedule,
                       random_matching, random_phase_levels, rate_edge)
from .refine import fm_refine, multi_try_fm, project_amg, project_matching

__version__ = "0.1.0"
