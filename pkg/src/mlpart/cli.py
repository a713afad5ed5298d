"""Command-line interface.

Subcommands: ``partition`` (run one instance), ``bench`` (seeded experiment
matrix with CSV and optional figures), ``gen-hard`` (star-mixture instance
generator), ``export-coarsest`` (integer-weight coarsest graph for external
partitioners), and ``algdist`` (per-edge coupling dump).
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .algdist import RelaxationParams, algebraic_distances
from .bench import MixtureSpec, generate_hard_mixture, run_experiment
from .driver import PRESETS, DriverConfig, coarsen, partition_graph
from .graph import Graph, parse_graph, write_graph
from .initial import normalize_and_round

_RATING_NAMES = {"exp2": "expansion2", "innerouter": "inner_outer", "exalg": "ex_alg"}


def _load_graph(path: str) -> Graph:
    with open(path) as fh:
        return parse_graph(fh.read())


def _config_from_args(args) -> DriverConfig:
    cfg = DriverConfig()
    for name in ("stop_threshold", "coarsest_attempts", "theta", "kappa",
                 "max_stall", "penalty_form", "alpha"):
        value = getattr(args, name, None)
        if value is not None:
            setattr(cfg, name, value)
    if getattr(args, "max_agg_volume", None) is not None:
        cfg.max_agg_volume = args.max_agg_volume
    if getattr(args, "vectors", None) is not None:
        cfg.test_vectors = args.vectors
    if getattr(args, "sweeps", None) is not None:
        cfg.relax_sweeps = args.sweeps
    if getattr(args, "matching", None) is not None:
        cfg.matching_override = args.matching
    if getattr(args, "rating", None) is not None:
        cfg.rating_override = _RATING_NAMES[args.rating]
    return cfg


def _add_knob_flags(sub) -> None:
    sub.add_argument("--matching", choices=["random", "gpa", "randomgpa"],
                     help="override the preset's matching algorithm")
    sub.add_argument("--rating", choices=sorted(_RATING_NAMES),
                     help="override the edge rating used by gpa")
    sub.add_argument("--theta", type=float, help="aggregation coupling fraction")
    sub.add_argument("--kappa", type=int, help="strongest-connection list size")
    sub.add_argument("--max-agg-volume", type=float, dest="max_agg_volume",
                     help="aggregate volume cap (default: the block weight bound)")
    sub.add_argument("--coarsest-attempts", type=int, dest="coarsest_attempts",
                     help="seeded trials at the coarsest level")
    sub.add_argument("--stop-threshold", type=int, dest="stop_threshold",
                     help="coarsening stops at max(threshold*k, 60) nodes")
    sub.add_argument("--max-stall", type=int, dest="max_stall",
                     help="non-improving moves tolerated per search round")
    sub.add_argument("--penalty-form", choices=["overload", "printed"],
                     dest="penalty_form", help="projection penalty variant")
    sub.add_argument("--alpha", type=float, help="relaxation damping factor")
    sub.add_argument("--vectors", type=int, help="number of relaxation test vectors")
    sub.add_argument("--sweeps", type=int, help="relaxation sweeps per vector")


def _parse_int_list(text: str) -> list[int]:
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(tok) for tok in text.split(",") if tok]


def _cmd_partition(args) -> int:
    g = _load_graph(args.graph)
    cfg = _config_from_args(args)
    p = partition_graph(g, args.k, args.epsilon, args.preset, args.seed,
                        args.iterations, cfg)
    lines = "\n".join(str(int(b)) for b in p.assignment) + "\n"
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(lines)
    else:
        sys.stdout.write(lines)
    print(f"cut {p.cut:g}  max block {p.block_weight.max():g}  "
          f"cap {p.L_max:g}  balanced {p.is_balanced()}", file=sys.stderr)
    return 0 if p.is_balanced() else 2


def _cmd_bench(args) -> int:
    graphs = []
    for path in args.graphs:
        name = os.path.splitext(os.path.basename(path))[0]
        graphs.append((name, _load_graph(path)))
    presets = [p.strip().lower() for p in args.presets.split(",") if p.strip()]
    for p in presets:
        if p not in PRESETS:
            raise ValueError(f"unknown preset {p!r}")
    report = run_experiment(graphs, presets, _parse_int_list(args.ks),
                            _parse_int_list(args.seeds), args.epsilon,
                            args.iterations, _config_from_args(args))
    report.write_csv(args.out)
    ratios_path = os.path.splitext(args.out)[0] + "_ratios.csv"
    report.write_ratios_csv(ratios_path)
    written = [args.out, ratios_path]
    if args.plots:
        from .plots import render_report_figures
        written += render_report_figures(report, args.plots)
    print("\n".join(written), file=sys.stderr)
    return 0


def _parse_kv_file(path: str) -> dict:
    """Tiny key = value reader (strings, numbers, and string lists)."""
    out: dict = {}
    with open(path) as fh:
        for ln, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{ln}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            if value.startswith("["):
                items = value.strip("[]").split(",")
                out[key] = [i.strip().strip("\"'") for i in items if i.strip()]
            elif value.startswith(("\"", "'")):
                out[key] = value.strip("\"'")
            else:
                try:
                    out[key] = int(value)
                except ValueError:
                    out[key] = float(value)
    return out


def _cmd_gen_hard(args) -> int:
    raw = _parse_kv_file(args.spec)
    if "parts" not in raw:
        raise ValueError(f"{args.spec}: missing 'parts' list (center first)")
    base = os.path.dirname(os.path.abspath(args.spec))
    parts = [_load_graph(p if os.path.isabs(p) else os.path.join(base, p))
             for p in raw["parts"]]
    spec = MixtureSpec(
        parts=parts,
        edges_per_boundary_node=int(raw.get("edges_per_node", 2)),
        budget_fraction=float(raw.get("fraction", 0.03)),
        boundary_nodes=int(raw["boundary_nodes"]) if "boundary_nodes" in raw else None,
        seed=int(raw.get("seed", 0)),
    )
    g = generate_hard_mixture(spec)
    with open(args.out, "w") as fh:
        fh.write(write_graph(g))
    print(f"wrote {args.out}: n={g.n} m={g.m}", file=sys.stderr)
    return 0


def _cmd_export_coarsest(args) -> int:
    g = _load_graph(args.graph)
    cfg = _config_from_args(args)
    hier = coarsen(g, args.preset, args.k, args.epsilon, args.seed, cfg)
    coarsest = normalize_and_round(hier.graphs[-1], args.seed)
    # external consumers need integer node weights as well
    node_w = np.maximum(np.rint(coarsest.node_weight), 1.0)
    out_graph = Graph(coarsest.n, coarsest.edge_u, coarsest.edge_v,
                      coarsest.edge_weight, node_w)
    with open(args.out, "w") as fh:
        fh.write(write_graph(out_graph, fmt=11))
    print(f"wrote {args.out}: n={out_graph.n} m={out_graph.m} "
          f"(levels {hier.num_levels})", file=sys.stderr)
    return 0


def _cmd_algdist(args) -> int:
    g = _load_graph(args.graph)
    params = RelaxationParams(alpha=args.alpha, num_vectors=args.vectors,
                              num_sweeps=args.sweeps, seed=args.seed)
    rho = algebraic_distances(g, params)
    lines = [f"{int(u) + 1} {int(v) + 1} {float(r)!r}"
             for u, v, r in zip(g.edge_u, g.edge_v, rho)]
    text = "\n".join(lines) + ("\n" if lines else "")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mlpart", description="multilevel k-way graph partitioning")
    subs = parser.add_subparsers(dest="command", required=True)

    sp = subs.add_parser("partition", help="partition one graph")
    sp.add_argument("graph")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--epsilon", type=float, default=0.03)
    sp.add_argument("--preset", choices=sorted(PRESETS), default="eco")
    sp.add_argument("--seed", type=int, default=1)
    sp.add_argument("--iterations", type=int, default=1)
    sp.add_argument("--output", help="partition file: one block id per node line")
    _add_knob_flags(sp)
    sp.set_defaults(func=_cmd_partition)

    sb = subs.add_parser("bench", help="run the experiment matrix")
    sb.add_argument("--graphs", nargs="+", required=True)
    sb.add_argument("--presets", default="eco,eco-alg,amg-eco")
    sb.add_argument("--ks", default="2")
    sb.add_argument("--seeds", default="1..10")
    sb.add_argument("--epsilon", type=float, default=0.03)
    sb.add_argument("--iterations", type=int, default=1)
    sb.add_argument("--out", required=True, help="report CSV path")
    sb.add_argument("--plots", help="also render figures into this directory")
    _add_knob_flags(sb)
    sb.set_defaults(func=_cmd_bench)

    sg = subs.add_parser("gen-hard", help="generate a star-mixture instance")
    sg.add_argument("--spec", required=True,
                    help="key=value file: parts list (center first), fraction, "
                         "edges_per_node, boundary_nodes, seed")
    sg.add_argument("--out", required=True)
    sg.set_defaults(func=_cmd_gen_hard)

    se = subs.add_parser("export-coarsest",
                         help="write the integerized coarsest graph")
    se.add_argument("graph")
    se.add_argument("--k", type=int, required=True)
    se.add_argument("--epsilon", type=float, default=0.03)
    se.add_argument("--preset", choices=sorted(PRESETS), default="eco")
    se.add_argument("--seed", type=int, default=1)
    se.add_argument("--out", required=True)
    _add_knob_flags(se)
    se.set_defaults(func=_cmd_export_coarsest)

    sa = subs.add_parser("algdist", help="dump per-edge couplings as 'u v rho'")
    sa.add_argument("graph")
    sa.add_argument("--alpha", type=float, default=0.5)
    sa.add_argument("--vectors", type=int, default=5)
    sa.add_argument("--sweeps", type=int, default=20)
    sa.add_argument("--seed", type=int, default=1)
    sa.add_argument("--out")
    sa.set_defaults(func=_cmd_algdist)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
