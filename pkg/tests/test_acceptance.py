"""Acceptance gate: every release criterion with its stated tolerance.

Each test prints one "[criterion N] PASS/FAIL" line (run with ``pytest -s``
to see them all) and asserts the bound it states.
"""

import csv
import io
import time
from contextlib import redirect_stderr, redirect_stdout

import numpy as np
import pytest

from helpers import (assert_valid_matching, brute_force_best_bisection,
                     brute_force_max_matching_weight, cycle_graph, path_graph,
                     random_graph, two_cliques_bridge)
from mlpart import (Graph, MatchingMap, MixtureSpec, RelaxationParams,
                    algebraic_distances, compute_lmax, coarsen, edge_cut,
                    f_cycle, fm_refine, galerkin_coarsen, gpa_matching,
                    generate_hard_mixture, grid_graph, iterated_v_cycles,
                    make_partition, multi_try_fm, normalize_and_round,
                    partition_graph, preferential_attachment, random_matching,
                    v_cycle, write_graph)
from mlpart.cli import main as cli_main
from mlpart.driver import PRESETS
from test_amg import dense_galerkin, random_interpolation


def report(num: int, description: str, ok: bool, detail: str = "") -> None:
    line = f"[criterion {num:2d}] {'PASS' if ok else 'FAIL'} - {description}"
    if detail:
        line += f" ({detail})"
    print(line)
    assert ok, line


def test_criterion_1_galerkin_dense_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(4242)
    worst = 0.0
    for _ in range(100):
        g = random_graph(int(rng.integers(2 ** 31)), n=int(rng.integers(3, 11)),
                         weighted=True, node_weights=True)
        P = random_interpolation(g, rng)
        coarse = galerkin_coarsen(g, P)
        want = dense_galerkin(g, P)
        got = {(int(coarse.edge_u[e]), int(coarse.edge_v[e])): coarse.edge_weight[e]
               for e in range(coarse.m)}
        assert set(got) == set(want)
        for key, value in want.items():
            worst = max(worst, abs(got[key] - value) / max(abs(value), 1e-300))
    elapsed = time.perf_counter() - t0
    report(1, "sparse projection matches the dense matrix oracle",
           worst <= 1e-12 and elapsed < 5.0,
           f"worst rel err {worst:.2e}, {elapsed:.2f}s")


def test_criterion_2_gpa_dp_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(777)
    for _ in range(500):
        length = int(rng.integers(1, 13))
        is_cycle = length >= 4 and length % 2 == 0 and rng.random() < 0.5
        g = cycle_graph(length) if is_cycle else path_graph(length + 1)
        ratings = rng.uniform(0.1, 10.0, size=g.m)
        chosen = gpa_matching(g, ratings)
        assert_valid_matching(g, chosen)
        got = float(ratings[chosen].sum())
        want = brute_force_max_matching_weight(
            [(int(g.edge_u[e]), int(g.edge_v[e])) for e in range(g.m)],
            list(ratings))
        assert got == pytest.approx(want), (length, is_cycle)
    elapsed = time.perf_counter() - t0
    report(2, "path/cycle matching equals brute-force max weight on 500 instances",
           elapsed < 10.0, f"{elapsed:.2f}s")


def test_criterion_3_small_partition_optimality():
    graphs = [two_cliques_bridge(3)]
    rng = np.random.default_rng(33)
    for _ in range(20):
        n = int(rng.integers(5, 13))
        graphs.append(random_graph(int(rng.integers(2 ** 31)), n=n, max_n=12))
    worst_rate = 10
    balance_ok = True
    for g in graphs:
        L = compute_lmax(g.total_node_weight(), 2, 0.03, g.max_node_weight())
        best = brute_force_best_bisection(g, L)
        outs = [v_cycle(g, 2, 0.03, "strong", seed) for seed in range(1, 11)]
        hits = sum(p.cut == best for p in outs)
        worst_rate = min(worst_rate, hits)
        if best is not None:
            balance_ok &= all(p.is_balanced() for p in outs)
    report(3, "brute-force optimum found >= 8/10 seeds on 21 small graphs",
           worst_rate >= 8 and balance_ok,
           f"worst rate {worst_rate}/10, balance ok {balance_ok}")


def _check_hierarchy(g, preset, seed):
    hier = coarsen(g, preset, 2, 0.03, seed)
    total = g.total_node_weight()
    sizes = [h.n for h in hier.graphs]
    assert all(a > b for a, b in zip(sizes, sizes[1:]))
    for h in hier.graphs:
        assert h.total_node_weight() == pytest.approx(total)
    for proj in hier.maps:
        if isinstance(proj, MatchingMap):
            seen = set()
            for group in proj.groups:
                assert 1 <= len(group) <= 2
                assert not seen & set(group)
                seen.update(group)
        else:
            assert np.allclose(proj.row_sums(), 1.0, atol=1e-12)
            assert max(len(r) for r in proj.rows) <= 2


def test_criterion_4_invariant_suite():
    instances = 0
    # hierarchy, interpolation, matching validity + per-projection cut audit
    for i in range(70):
        g = random_graph(1000 + i, n=40 + (i % 20), max_n=60)
        preset = ["eco", "eco-alg", "amg-eco", "strong"][i % 4]
        _check_hierarchy(g, preset, i)
        p = v_cycle(g, 2, 0.03, preset, i, validate=True)
        assert p.cut == pytest.approx(edge_cut(g, p.assignment))
        m = random_matching(g, i)
        assert_valid_matching(g, m)
        assert_valid_matching(g, gpa_matching(g, np.random.default_rng(i).uniform(
            0.1, 1.0, g.m)))
        instances += 1
    # refinement never worsens
    for i in range(60):
        g = random_graph(2000 + i, max_n=48)
        rng = np.random.default_rng(i)
        L = compute_lmax(g.total_node_weight(), 2, 0.5, g.max_node_weight())
        p = make_partition(g, rng.integers(0, 2, g.n), 2, 0.5, L)
        out = fm_refine(g, p, L, seed=i)
        assert out.cut <= p.cut
        out2 = multi_try_fm(g, out, L, 6, i)
        assert out2.cut <= out.cut
        instances += 1
    # iterated cycles are monotone
    for i in range(40):
        g = random_graph(3000 + i, n=50, max_n=50)
        prev = None
        p = None
        for t in range(3):
            p = (v_cycle(g, 2, 0.03, "eco", 4000 + i) if p is None else
                 v_cycle(g, 2, 0.03, "eco", 4000 + i + t, initial=p))
            if prev is not None:
                assert p.cut <= prev + 1e-9
            prev = p.cut
        instances += 1
    # the deeper cycle never loses to the plain one at equal seed
    for i in range(50):
        g = random_graph(5000 + i, n=46, max_n=46)
        f = f_cycle(g, 2, 0.03, "f-cycle", seed=i)
        v = v_cycle(g, 2, 0.03, "f-cycle", seed=i)
        assert f.cut <= v.cut
        instances += 1
    report(4, "invariant suite over randomized instances", instances >= 200,
           f"{instances} instances")


def test_criterion_5_coupling_discrimination():
    g, bridge = None, None
    size = 8
    eu, ev = [], []
    for off in (0, size):
        for a in range(off, off + size):
            for b in range(a + 1, off + size):
                eu.append(a)
                ev.append(b)
    eu.append(0)
    ev.append(size)
    g = Graph(2 * size, eu, ev, np.ones(len(eu)), None)
    for e in range(g.m):
        if g.edge_u[e] == 0 and g.edge_v[e] == size:
            bridge = e
    hits = 0
    for seed in range(20):
        rho = algebraic_distances(g, RelaxationParams(seed=seed))
        if rho[bridge] > np.median(np.delete(rho, bridge)):
            hits += 1
    report(5, "bridge coupling exceeds intra-clique median", hits >= 19,
           f"{hits}/20 seeds")


def test_criterion_6_rounding_unbiased():
    g = Graph(3, [0, 1], [1, 2], [2.0, 5.0], None)  # normalizes to 1 and 2.5
    total = 0.0
    ok = True
    for seed in range(10000):
        out = normalize_and_round(g, seed)
        ok &= bool(np.all(out.edge_weight >= 1.0))
        ok &= bool(np.all(out.edge_weight == np.rint(out.edge_weight)))
        half = out.edge_weight[int(np.flatnonzero(out.edge_u == 1)[0])]
        total += float(half)
    mean = total / 10000
    report(6, "randomized rounding of weight 2.5 is unbiased",
           ok and 2.45 <= mean <= 2.55, f"mean {mean:.4f}")


def test_criterion_7_grid_quality_all_presets():
    g = grid_graph(32, 32)
    t0 = time.perf_counter()
    detail = []
    ok = True
    for preset in PRESETS:
        cuts = []
        for seed in range(1, 11):
            p = partition_graph(g, 2, 0.03, preset, seed)
            ok &= p.is_balanced()
            cuts.append(p.cut)
        ok &= max(cuts) <= 48 and float(np.median(cuts)) <= 40
        detail.append(f"{preset}: max {max(cuts):.0f} med {np.median(cuts):.0f}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 30.0
    report(7, "32x32 grid: every preset within 1.5x of optimum", ok,
           "; ".join(detail) + f"; {elapsed:.1f}s")


def _criterion8_mixture():
    grid = grid_graph(33, 33)                        # 2112 edges
    pa = preferential_attachment(1000, 2, seed=7)    # 1997 edges
    spec = MixtureSpec(parts=[grid, pa], seed=11)
    return generate_hard_mixture(spec), grid, pa


def test_criterion_8_hard_mixture_direction():
    mix, _, _ = _criterion8_mixture()
    avgs = {}
    for preset in ("eco", "eco-alg", "amg-eco"):
        cuts = [partition_graph(mix, 2, 0.03, preset, seed).cut
                for seed in range(1, 11)]
        avgs[preset] = sum(cuts) / len(cuts)
    r_eco = avgs["eco"] / avgs["eco-alg"]
    r_alg = avgs["eco-alg"] / avgs["amg-eco"]
    ok = avgs["eco-alg"] <= avgs["eco"] and avgs["amg-eco"] <= 1.05 * avgs["eco-alg"]
    report(8, "mixture: coupling-aware coarsening is directionally better", ok,
           f"avg cuts eco {avgs['eco']:.1f}, eco-alg {avgs['eco-alg']:.1f}, "
           f"amg-eco {avgs['amg-eco']:.1f}; ratios eco/eco-alg {r_eco:.3f}, "
           f"eco-alg/amg-eco {r_alg:.3f}")


def test_criterion_9_generator_budget():
    mix, grid, pa = _criterion8_mixture()
    inter = 0
    for e in range(mix.m):
        u, v = int(mix.edge_u[e]), int(mix.edge_v[e])
        if min(u, v) < grid.n <= max(u, v):
            inter += 1
    ok = inter < 0.03 * pa.m
    # and a second instance with several satellites
    parts = [grid_graph(12, 12)] + [preferential_attachment(80, 2, seed=s)
                                    for s in range(3)]
    mix2 = generate_hard_mixture(MixtureSpec(parts=parts, seed=3))
    offsets = np.cumsum([0] + [p.n for p in parts])
    for i, sat in enumerate(parts[1:], 1):
        cnt = 0
        for e in range(mix2.m):
            u, v = int(mix2.edge_u[e]), int(mix2.edge_v[e])
            if min(u, v) < parts[0].n and offsets[i] <= max(u, v) < offsets[i + 1]:
                cnt += 1
        ok &= cnt < 0.03 * sat.m
    report(9, "generated mixtures satisfy the strict inter-edge budget", ok,
           f"primary instance: {inter} < {0.03 * pa.m:.2f}")


def test_criterion_10_determinism(tmp_path):
    mix, _, _ = _criterion8_mixture()
    gpath = tmp_path / "mix.graph"
    gpath.write_text(write_graph(mix))

    out_a, out_b = tmp_path / "a.part", tmp_path / "b.part"
    sink = io.StringIO()
    for out in (out_a, out_b):
        with redirect_stdout(sink), redirect_stderr(sink):
            rc = cli_main(["partition", str(gpath), "--k", "2", "--preset",
                           "eco-alg", "--seed", "5", "--output", str(out)])
        assert rc == 0
    parts_equal = out_a.read_bytes() == out_b.read_bytes()

    rows = []
    for name in ("r1.csv", "r2.csv"):
        out = tmp_path / name
        with redirect_stdout(sink), redirect_stderr(sink):
            rc = cli_main(["bench", "--graphs", str(gpath), "--presets",
                           "eco,amg-eco", "--ks", "2", "--seeds", "1..3",
                           "--out", str(out)])
        assert rc == 0
        with open(out) as fh:
            rows.append([{k: v for k, v in r.items() if not k.startswith("t_")}
                         for r in csv.DictReader(fh)])
    csv_equal = rows[0] == rows[1]
    report(10, "identical seeds give identical partitions and report rows",
           parts_equal and csv_equal,
           f"partition bytes {parts_equal}, csv rows {csv_equal}")
