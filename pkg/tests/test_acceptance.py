"""Acceptance gate: one test per criterion, each recording a pass/fail line."""
import itertools
import math
import time
from fractions import Fraction

import networkx as nx
import numpy as np
import pytest

from oracles import bfs_all_pairs, cycle_gap, folner_line_good_count, sampled_cnd_max
from soficlab.actions import build_labeled_graph, finite_core, good_set
from soficlab.amenability import ProbField, amenable_mass_estimate, functional_check, hyperfinite_partition, propA_to_folner
from soficlab.cli import TASKS, main
from soficlab.coarse import neighborhood_growth_check, verify_qi
from soficlab.generators import (
    folner_approximation,
    high_girth_cubic,
    mixed_family,
    quotient_approximation,
    random_permutation_approximation,
    random_permutation_family,
)
from soficlab.graph import LabeledGraph, cycle_graph, from_simple_edges
from soficlab.groups import FreeAbelian, FreeGroup, ball_elements
from soficlab.local_stats import bs_defect_profile
from soficlab.spectral import cheeger_sweep, cnd_violation, laplacian, spectral_gap


def random_connected_graph(rng, n, kind):
    seed = int(rng.integers(2**31))
    if kind == "gnm":
        m = int(rng.integers(n - 1, min(n * (n - 1) // 2, 3 * n) + 1))
        G = nx.gnm_random_graph(n, m, seed=seed)
        for comp_a, comp_b in zip(list(nx.connected_components(G)), list(nx.connected_components(G))[1:]):
            G.add_edge(min(comp_a), min(comp_b))
    elif kind == "regular":
        G = nx.random_regular_graph(3, n + (n % 2), seed=seed)
        while not nx.is_connected(G):
            seed += 1
            G = nx.random_regular_graph(3, n + (n % 2), seed=seed)
    elif kind == "ws":
        G = nx.connected_watts_strogatz_graph(n, 4, 0.3, seed=seed)
    elif kind == "tree":
        G = nx.random_labeled_tree(n, seed=seed)
    elif kind == "grid":
        w = max(2, int(math.sqrt(n)))
        G = nx.convert_node_labels_to_integers(nx.grid_2d_graph(w, max(2, n // w)))
    elif kind == "cycle":
        G = nx.cycle_graph(n)
    else:
        G = nx.complete_graph(min(n, 40))
    return from_simple_edges(G.number_of_nodes(), G.edges())


KINDS = ("gnm", "regular", "ws", "tree", "grid", "cycle", "complete")


def test_criterion_01_exact_quotients(criterion):
    t0 = time.perf_counter()
    failures = []
    checked = 0
    for d, moduli in ((1, list(range(5, 65))), (2, list(range(5, 65)))):
        model = FreeAbelian(d)
        fam = quotient_approximation(model, moduli)
        F = ball_elements(model, 2)
        for n, act in zip(moduli, fam.stages):
            if good_set(act, F).defect != 0:
                failures.append(("good_set", d, n))
            r_max = (n - 2) // 2
            prof = bs_defect_profile(build_labeled_graph(act), model, r_max)
            if any(prof):
                failures.append(("bs_defect", d, n, [r for r, v in enumerate(prof) if v]))
            checked += 1
    elapsed = time.perf_counter() - t0
    ok = not failures and elapsed < 10
    criterion(1, ok, f"{checked} quotient stages (d<=2, n<=64), failures={failures[:3]}, {elapsed:.2f}s (<10s)")
    assert ok


def test_criterion_02_folner_oracle(criterion):
    sizes = list(range(10, 101))
    model = FreeAbelian(1)
    fam = folner_approximation(model, sizes)
    F = ball_elements(model, 2)
    offsets = [g[0] for g in F]
    mismatches, defects = [], []
    for n, act in zip(sizes, fam.stages):
        rep = good_set(act, F)
        if rep.size != folner_line_good_count(n, offsets):
            mismatches.append(n)
        defects.append(rep.defect)
    monotone = all(b <= a + Fraction(1, n) for a, b, n in zip(defects, defects[1:], sizes))
    vanishing = all(d <= Fraction(2 * 2, n) for d, n in zip(defects, sizes))
    ok = not mismatches and monotone and vanishing
    criterion(2, ok, f"n=10..100 oracle mismatches={mismatches}, monotone within 1/n={monotone}, "
                     f"defect<=4/n={vanishing}, max defect={max(defects)}")
    assert ok


def test_criterion_03_mixed_mass(criterion):
    sizes = [250, 500, 1000, 2000]
    results = {}
    girth_ok = True
    for a, b in ((1, 2), (2, 3)):
        fam = mixed_family(a, b, sizes, girth_target=8, seed=2024)
        for g, meta in zip(fam.graphs, fam.meta):
            size = meta["component_size"]
            cubic = g.induced_subgraph(range(a * size, b * size))
            G = nx.Graph([(u, v) for u, v, _ in cubic.edges()])
            girth_ok &= meta["girth"] >= 8 and nx.girth(G) >= 8
        results[(a, b)] = amenable_mass_estimate(fam, 3)
    ok = (girth_ok and results[(1, 2)] == [Fraction(1, 2)] * len(sizes)
          and results[(2, 3)] == [Fraction(2, 3)] * len(sizes))
    criterion(3, ok, f"girth>=8 on all cubic parts={girth_ok}; mass(1,2)={sorted(set(map(str, results[(1, 2)])))}, "
                     f"mass(2,3)={sorted(set(map(str, results[(2, 3)])))}")
    assert ok


def test_criterion_04_spectral_gaps(criterion):
    t0 = time.perf_counter()
    ns = list(range(3, 65)) + [100, 128, 257, 512, 513, 1000, 1024, 2048, 3000, 4096]
    worst_cycle = 0.0
    for n in ns:
        lam = spectral_gap(laplacian(cycle_graph(n)))
        worst_cycle = max(worst_cycle, abs(lam - cycle_gap(n)) / cycle_gap(n))
    rng = np.random.default_rng(4)
    worst_iter = 0.0
    for i in range(50):
        n = int(rng.integers(20, 513))
        g = random_connected_graph(rng, n, KINDS[i % 6])
        L = laplacian(g, 1 + i % 2)
        dense = spectral_gap(L, method="dense")
        it = spectral_gap(L, method="iterative")
        worst_iter = max(worst_iter, abs(dense - it) / dense)
    elapsed = time.perf_counter() - t0
    ok = worst_cycle <= 1e-6 and worst_iter <= 1e-6 and elapsed < 60
    criterion(4, ok, f"cycles n<=4096 max rel err={worst_cycle:.2e}; iterative vs dense on 50 graphs "
                     f"max rel diff={worst_iter:.2e}; {elapsed:.1f}s (<60s)")
    assert ok


def test_criterion_05_cheeger_sandwich(criterion):
    rng = np.random.default_rng(5)
    violations = []
    for i in range(100):
        n = int(rng.integers(6, 200))
        g = random_connected_graph(rng, n, KINDS[i % len(KINDS)])
        L = laplacian(g, 1 + (i % 3 == 0))
        res = cheeger_sweep(L)
        h, lam = float(res.h), res.lambda2
        # relative slack for float round-off only: equality is attained e.g. on complete graphs
        slack = 1e-9 * max(1.0, lam)
        if not (lam / 2 <= h + slack and h <= math.sqrt(2 * L.d_max * lam) + slack):
            violations.append((i, g.n, h, lam, L.d_max))
    ok = not violations
    criterion(5, ok, f"100 graphs, violations={len(violations)} {violations[:2]}")
    assert ok


def random_field(rng, g, R, D):
    """A probability field and an eps for which it satisfies the (R, eps/N_R) variation hypothesis."""
    n = g.n
    mode = int(rng.integers(5))
    S = int(rng.integers(0, max(1, int(D.max())) + 1))
    if mode == 0:  # uniform on balls
        eta = ((D >= 0) & (D <= S)).astype(float)
    elif mode == 1:  # random weights times a decaying profile
        w = rng.random(n) + 0.05
        eta = np.where((D >= 0) & (D <= S), w[None, :] * (S + 1 - np.clip(D, 0, S)), 0.0)
    elif mode == 2:  # constant field
        eta = np.tile(rng.random(n) + 1e-3, (n, 1))
        S = int(D.max())
    elif mode == 3:  # point masses
        eta = np.eye(n)
        S = 0
    else:  # random noise blended into a common vector
        t = rng.random() * 0.2
        eta = (1 - t) * np.tile(rng.random(n) + 0.1, (n, 1)) + t * rng.random((n, n))
        S = int(D.max())
    eta /= eta.sum(axis=1, keepdims=True)
    xs, ys = np.nonzero((D > 0) & (D <= R))
    var = float(np.abs(eta[xs] - eta[ys]).sum(axis=1).max()) if xs.size else 0.0
    N_R = int(((D >= 0) & (D <= R)).sum(axis=1).max())
    factor = 1.0 if rng.random() < 0.3 else 1.0 + rng.random()
    eps = max(var * N_R * factor * (1 + 1e-12), 1e-6)
    return ProbField(eta, S), eps


def test_criterion_06_averaging(criterion):
    rng = np.random.default_rng(6)
    failures = []
    worst = 0.0
    for trial in range(500):
        n = int(rng.integers(4, 257))
        g = random_connected_graph(rng, n, KINDS[trial % len(KINDS)])
        D = g.all_pairs_distances()
        R = int(rng.integers(1, 4))
        field_, eps = random_field(rng, g, R, D)
        res = propA_to_folner(g, field_, R, eps)
        value = functional_check(g, res.phi, R)
        worst = max(worst, value / eps)
        if value > eps * (1 + 1e-12) + 1e-12:
            failures.append((trial, value, eps))
    ok = not failures
    criterion(6, ok, f"500 fields, n<=256: failures={len(failures)}, max value/eps={worst:.6f}")
    assert ok


def min_arc_cut(n, K):
    """Exhaustive: fewest cut edges splitting C_n into arcs of length <= K."""
    if K >= n:
        return 0
    for c in range(1, n + 1):
        for cuts in itertools.combinations(range(n), c):
            gaps = [(cuts[(i + 1) % c] - cuts[i]) % n or n for i in range(c)]
            if max(gaps) <= K:
                return c
    return n


def test_criterion_07_hyperfinite(criterion):
    bad_cycles = []
    checked = 0
    for n in range(2, 121):
        for K in range(1, n + 1):
            if n % K:
                continue
            p = hyperfinite_partition(cycle_graph(n), K)
            expected = n // K if K < n else 0
            if n <= 14 and expected != min_arc_cut(n, K):
                bad_cycles.append(("oracle", n, K))
            if p.cut != expected or max(len(x) for x in p.parts) > K:
                bad_cycles.append((n, K, p.cut))
            checked += 1
    rng = np.random.default_rng(7)
    oversize = []
    for i in range(60):
        g = random_connected_graph(rng, int(rng.integers(5, 200)), KINDS[i % len(KINDS)])
        for K in (1, 2, 5, 16):
            p = hyperfinite_partition(g, K)
            if max(len(x) for x in p.parts) > K:
                oversize.append((i, K))
    ok = not bad_cycles and not oversize
    criterion(7, ok, f"{checked} (n,K) cycle cases cut==n/K failures={bad_cycles[:3]}; "
                     f"240 corpus partitions oversize parts={len(oversize)}")
    assert ok


def test_criterion_08_core_bound(criterion):
    families = [
        quotient_approximation(FreeAbelian(1), [5, 9, 20]),
        quotient_approximation(FreeAbelian(2), [5, 8, 12]),
        folner_approximation(FreeAbelian(1), [6, 15, 40]),
        folner_approximation(FreeAbelian(2), [4, 7, 11]),
        random_permutation_family(1, [10, 40, 160], seed=8),
        random_permutation_family(2, [10, 40, 160], seed=8),
        random_permutation_family(3, [20, 80, 320], seed=8),
    ]
    raw = [random_permutation_approximation(k, n, s) for k in (1, 2, 3) for n in (8, 30, 100) for s in range(3)]
    stages = [act for fam in families for act in fam.stages] + raw
    violations = []
    for act in stages:
        for r in (1, 2):
            F = ball_elements(act.model, r)
            rep = good_set(act, F)
            core = int(finite_core(act, F).sum())
            if Fraction(core) < (1 - len(F) * rep.defect) * act.n:
                violations.append((act, r))
    ok = not violations
    criterion(8, ok, f"{len(stages)} stages x F in (B_1, B_2): violations={len(violations)}")
    assert ok


def cnd_corpus(rng):
    kernels = []
    for i in range(10):  # tree metrics
        n = int(rng.integers(3, 40))
        kernels.append(("tree", nx.floyd_warshall_numpy(nx.random_labeled_tree(n, seed=i))))
    for n in range(3, 13):  # cycle metrics
        kernels.append(("cycle", nx.floyd_warshall_numpy(nx.cycle_graph(n))))
    for i in range(15):  # perturbed negative type
        n = int(rng.integers(3, 8))
        X = rng.standard_normal((n, 3))
        K = ((X[:, None] - X[None]) ** 2).sum(-1)
        E = rng.standard_normal((n, n))
        E = E + E.T
        np.fill_diagonal(E, 0)
        scale = (1e-13, 0.3, 2.0)[i % 3]
        kernels.append(("perturbed", K + scale * E))
    for i in range(15):  # adversarial non-CND
        n = int(rng.integers(3, 9))
        K = np.ones((n, n)) - np.eye(n)
        a, b = rng.choice(n, 2, replace=False)
        K[a, b] = K[b, a] = (0.0, -1.0, 5.0)[i % 3]
        if i % 3 == 0:
            K = -K
        kernels.append(("adversarial", K))
    return kernels


def test_criterion_09_cnd_oracle(criterion):
    rng = np.random.default_rng(9)
    tol = 1e-9
    kernels = cnd_corpus(rng)
    disagreements = []
    tally = {}
    for j, (kind, K) in enumerate(kernels):
        eigen = cnd_violation(K) <= tol
        sampled = sampled_cnd_max(K, draws=10_000, seed=j) <= tol
        tally.setdefault(kind, [0, 0])[0 if eigen else 1] += 1
        if eigen != sampled:
            disagreements.append((j, kind, cnd_violation(K)))
    ok = len(kernels) == 50 and not disagreements
    criterion(9, ok, f"{len(kernels)} kernels, (CND, non-CND) per kind={tally}, disagreements={disagreements}")
    assert ok


def test_criterion_10_qi(criterion):
    graphs = [cycle_graph(n) for n in (3, 10, 31)] + [
        random_connected_graph(np.random.default_rng(i), 40, k) for i, k in enumerate(KINDS)
    ]
    ident_ok = all(verify_qi(g, g, list(range(g.n))).constants() == (1, 0, 0) for g in graphs)
    cover_bad = []
    for n in range(3, 65):
        X, Y = cycle_graph(2 * n), cycle_graph(n)
        f = [x % n for x in range(2 * n)]
        DX, DY = bfs_all_pairs(2 * n, X.edges()), bfs_all_pairs(n, Y.edges())
        pairs = [(x, y) for x in range(2 * n) for y in range(x + 1, 2 * n)]
        L = max(Fraction(DY[f[x]][f[y]], DX[x][y]) for x, y in pairs)
        A = max([Fraction(0)] + [Fraction(DX[x][y]) / L - DY[f[x]][f[y]] for x, y in pairs])
        cod = max(min(DY[v][w] for w in set(f)) for v in range(n))
        if verify_qi(X, Y, f).constants() != (L, A, cod):
            cover_bad.append(n)
    rng = np.random.default_rng(10)
    growth_bad = 0
    instances = 0
    for i in range(60):
        if i % 2:
            edges, _ = high_girth_cubic(2 * int(rng.integers(4, 60)), 5, rng)
            Y = from_simple_edges(max(max(e) for e in edges) + 1, edges)
        else:
            Y = random_connected_graph(rng, int(rng.integers(5, 120)), KINDS[i % len(KINDS)])
        A = rng.choice(Y.n, size=int(rng.integers(1, min(6, Y.n) + 1)), replace=False).tolist()
        rep = neighborhood_growth_check(Y, A, 8)
        growth_bad += not rep.recursion_ok
        instances += 1
    ok = ident_ok and not cover_bad and growth_bad == 0
    criterion(10, ok, f"identity -> (1,0,0) on {len(graphs)} graphs={ident_ok}; covering C_2n->C_n n<=64 "
                      f"mismatches={cover_bad}; recursion violations={growth_bad}/{instances}")
    assert ok


def test_criterion_11_determinism(tmp_path, criterion):
    specs = [
        ["--construction", "quotient", "--group", "FreeAbelian:2", "--sizes", "4,6"],
        ["--construction", "folner", "--sizes", "8,12"],
        ["--construction", "random", "--k", "2", "--sizes", "30,60", "--seed", "17"],
        ["--construction", "mixed", "--a", "1", "--b", "2", "--sizes", "30,60", "--girth-target", "6", "--seed", "3"],
    ]

    def tree(root):
        return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}

    gen_same, ana_same, codes = True, True, []
    for i, spec in enumerate(specs):
        outs = []
        for run in ("a", "b"):
            g = tmp_path / run / f"fam{i}"
            codes.append(main(["generate", *spec, "--out-dir", str(g)]))
            codes.append(main(["analyze", str(g / "manifest.json"), "--tasks", ",".join(TASKS),
                               "--radius", "2", "--out-dir", str(tmp_path / run / f"ana{i}")]))
            outs.append(run)
        gen_same &= tree(tmp_path / "a" / f"fam{i}") == tree(tmp_path / "b" / f"fam{i}")
        ana_same &= tree(tmp_path / "a" / f"ana{i}") == tree(tmp_path / "b" / f"ana{i}")
    ok = gen_same and ana_same and set(codes) == {0}
    criterion(11, ok, f"generate byte-identical={gen_same}; analyze CSVs byte-identical={ana_same}; exit codes={sorted(set(codes))}")
    assert ok
