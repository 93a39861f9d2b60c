"""Rooted balls, exact canonical codes and Benjamini–Schramm statistics."""
from __future__ import annotations

import hashlib
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import ResourceLimitError
from .graph import LabeledGraph, RootedBall
from .groups import GroupModel, cayley_ball

DEFAULT_CODE_CAP = 512
TABLE_ENTRIES = 1 << 24


def extract_ball(graph: LabeledGraph, v: int, r: int) -> RootedBall:
    """Induced labelled subgraph on B_r(v), root renumbered to 0."""
    if not 0 <= v < graph.n:
        raise ValueError(f"vertex {v} not in graph")
    verts = graph.ball(v, r)
    sub = graph.induced_subgraph(verts)
    return RootedBall(sub, root=0, radius=r)


# canonical codes


def _incidence(graph: LabeledGraph) -> list[list[tuple[int, tuple]]]:
    inc: list[list[tuple[int, tuple]]] = [[] for _ in range(graph.n)]
    for u, v, s in graph.edges():
        if graph.directed:
            inc[u].append((v, (s, 0)))
            inc[v].append((u, (s, 1)))
        else:
            inc[u].append((v, (s, 0)))
            inc[v].append((u, (s, 0)))
    return inc


def _refine(cells: list[list[int]], inc) -> list[list[int]]:
    """Equitable refinement of an ordered partition; sub-cells ordered by signature."""
    while True:
        cell_of = {}
        for i, c in enumerate(cells):
            for v in c:
                cell_of[v] = i
        out = []
        for c in cells:
            if len(c) == 1:
                out.append(c)
                continue
            groups: dict[tuple, list[int]] = {}
            for v in c:
                sig = tuple(sorted((key, cell_of[w]) for w, key in inc[v]))
                groups.setdefault(sig, []).append(v)
            for sig in sorted(groups):
                out.append(groups[sig])
        if len(out) == len(cells):
            return out
        cells = out


class _Orbits:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def _canonical_order(graph: LabeledGraph, root: int) -> tuple[tuple, list[int]]:
    n = graph.n
    inc = _incidence(graph)
    edges = graph.edges()
    directed = graph.directed

    def certificate(order):
        pos = {v: i for i, v in enumerate(order)}
        out = []
        for u, v, s in edges:
            a, b = pos[u], pos[v]
            if not directed and a > b:
                a, b = b, a
            out.append((a, b, s))
        return tuple(sorted(out))

    best: list = [None, None]
    seen: dict[tuple, list[int]] = {}
    autos: list[list[int]] = []

    def search(cells, prefix):
        cells = _refine(cells, inc)
        if all(len(c) == 1 for c in cells):
            order = [c[0] for c in cells]
            cert = certificate(order)
            if cert in seen:
                first = seen[cert]
                gamma = [0] * n
                for a, b in zip(first, order):
                    gamma[a] = b
                autos.append(gamma)
            else:
                seen[cert] = order
            if best[0] is None or cert < best[0]:
                best[0], best[1] = cert, order
            return
        ti = next(i for i, c in enumerate(cells) if len(c) > 1)
        target = sorted(cells[ti])
        explored: list[int] = []
        for v in target:
            if explored:
                orbits = _Orbits(n)
                for g in autos:
                    if all(g[p] == p for p in prefix):
                        for x in range(n):
                            orbits.union(x, g[x])
                rv = orbits.find(v)
                if any(orbits.find(w) == rv for w in explored):
                    continue
            explored.append(v)
            rest = [w for w in cells[ti] if w != v]
            search(cells[:ti] + [[v], rest] + cells[ti + 1:], prefix + [v])

    others = [v for v in range(n) if v != root]
    search([[root], others] if others else [[root]], [root])
    return best[0], best[1]


def canonical_code(ball: RootedBall, cap: int = DEFAULT_CODE_CAP) -> str:
    """String equal for two balls iff a root- and label-preserving isomorphism exists."""
    g = ball.graph
    if g.n > cap:
        raise ResourceLimitError(f"ball has {g.n} vertices, canonical-code cap is {cap}", cap=cap)
    cert, _ = _canonical_order(g, ball.root)
    head = ("D" if g.directed else "U") + str(g.n)
    return head + "|" + ";".join(f"{a},{b},{s}" for a, b, s in cert)


def decode_code(code: str) -> RootedBall:
    head, _, body = code.partition("|")
    directed = head[0] == "D"
    n = int(head[1:])
    edges = []
    if body:
        for item in body.split(";"):
            a, b, s = item.split(",")
            edges.append((int(a), int(b), s))
    graph = LabeledGraph(n, edges, labels=sorted({s for *_, s in edges}), directed=directed)
    dist = graph.bfs(0)
    if (dist < 0).any():
        raise ValueError("code does not describe a rooted connected ball")
    return RootedBall(graph, root=0, radius=int(dist.max()) if n else 0)


def code_hash(code: str) -> str:
    return hashlib.sha1(code.encode()).hexdigest()[:16]


# distributions


@dataclass
class BallDistribution:
    radius: int
    counts: dict[str, int]
    n: int

    @property
    def frequencies(self) -> dict[str, Fraction]:
        return {c: Fraction(k, self.n) for c, k in self.counts.items()}

    def mass(self, code: str) -> Fraction:
        return Fraction(self.counts.get(code, 0), self.n)

    def ranked(self) -> list[tuple[str, Fraction]]:
        """Codes by decreasing mass, ties by code string."""
        return sorted(self.frequencies.items(), key=lambda kv: (-kv[1], kv[0]))


def ball_codes(graph: LabeledGraph, r: int, cap: int = DEFAULT_CODE_CAP) -> list[str]:
    return [canonical_code(extract_ball(graph, v, r), cap=cap) for v in range(graph.n)]


def ball_distribution(graph: LabeledGraph, r: int, cap: int = DEFAULT_CODE_CAP) -> BallDistribution:
    if graph.n == 0:
        raise ValueError("empty graph has no ball distribution")
    counts = Counter(ball_codes(graph, r, cap=cap))
    return BallDistribution(radius=r, counts=dict(sorted(counts.items())), n=graph.n)


def compare_distributions(d1: BallDistribution, d2: BallDistribution) -> Fraction:
    """Total variation distance between two ball distributions of equal radius."""
    if d1.radius != d2.radius:
        raise ValueError(f"radius mismatch: {d1.radius} vs {d2.radius}")
    f1, f2 = d1.frequencies, d2.frequencies
    return sum((abs(f1.get(c, 0) - f2.get(c, 0)) for c in set(f1) | set(f2)), Fraction(0)) / 2


# Benjamini–Schramm defect


def _matches_model(graph: LabeledGraph, model: GroupModel) -> dict[str, np.ndarray] | None:
    if set(graph.labels) != set(model.symbols):
        return None
    return graph.permutations()


def injectivity_radii(graph: LabeledGraph, model: GroupModel, r_max: int) -> np.ndarray:
    """Largest ``r <= r_max`` with B_r(x) isomorphic to the Cayley r-ball, per vertex.

    Only for orbit graphs of generator permutations.  The map
    ``g -> σ(g)x`` from the Cayley ball is the only candidate isomorphism; it
    works at radius r iff no two distinct elements g, h with
    ``|g| <= r`` and ``|h| <= r + 1`` land on the same point.  A value of -1
    means even the 0-ball differs (a loop at x).
    """
    perms = _matches_model(graph, model)
    if perms is None:
        raise ValueError("graph is not the orbit graph of the model's generator permutations")
    inv = {s: np.argsort(p).astype(np.int32) for s, p in perms.items()}
    perms = {s: p.astype(np.int32) for s, p in perms.items()}
    ball = cayley_ball(model, r_max + 1)
    m, n = ball.n, graph.n
    depth = ball.depth
    parent = [None] * m
    for i, j, s in ball.graph.edges():
        if depth[j] == depth[i] + 1 and parent[j] is None:
            parent[j] = (i, perms[s])
        elif depth[i] == depth[j] + 1 and parent[i] is None:
            parent[i] = (j, inv[s])
    order = np.argsort(depth, kind="stable")
    rad = np.full(n, r_max, dtype=np.int64)
    # vertices in blocks keep the first-seen table at about 2**24 entries
    block = max(1, min(n, TABLE_ENTRIES // max(n, 1)))
    for x0 in range(0, n, block):
        cols = np.arange(x0, min(n, x0 + block), dtype=np.int32)
        base = np.arange(cols.size, dtype=np.int32) * np.int32(n)
        seen = np.full(cols.size * n, -1, dtype=np.int32)
        phi = np.empty((m, cols.size), dtype=np.int32)
        for j in order.tolist():
            if j == order[0]:
                phi[j] = cols
            else:
                i, p = parent[j]
                phi[j] = p[phi[i]]
            keys = base + phi[j]
            prev = seen[keys]
            hit = prev >= 0
            if hit.any():
                # the earlier element has depth prev <= depth[j]
                at = cols[hit]
                thresh = np.maximum(prev[hit], depth[j] - 1)
                rad[at] = np.minimum(rad[at], thresh - 1)
                seen[keys[~hit]] = depth[j]
            else:
                seen[keys] = depth[j]
    return rad


def bs_defect(
    graph: LabeledGraph,
    r: int,
    model: GroupModel,
    method: str = "auto",
    cap: int = DEFAULT_CODE_CAP,
) -> Fraction:
    """Fraction of vertices whose r-ball is not the Cayley r-ball of ``model``.

    ``method="codes"`` compares canonical codes; ``"orbit"`` uses
    :func:`injectivity_radii` and needs an orbit graph; ``"auto"`` picks the
    orbit route when it applies.
    """
    if graph.n == 0:
        raise ValueError("empty graph")
    if method == "auto":
        method = "orbit" if _matches_model(graph, model) is not None else "codes"
    if method == "orbit":
        rad = injectivity_radii(graph, model, r)
        return Fraction(int((rad < r).sum()), graph.n)
    if method != "codes":
        raise ValueError(f"unknown method {method!r}")
    target = canonical_code(cayley_ball(model, r), cap=cap)
    bad = sum(code != target for code in ball_codes(graph, r, cap=cap))
    return Fraction(bad, graph.n)


def bs_defect_profile(graph: LabeledGraph, model: GroupModel, r_max: int) -> list[Fraction]:
    """bs_defect for r = 0..r_max from a single injectivity-radius pass."""
    rad = injectivity_radii(graph, model, r_max)
    return [Fraction(int((rad < r).sum()), graph.n) for r in range(r_max + 1)]


@dataclass
class DominantBall:
    code: str
    masses: list[Fraction]
    ranking: list[tuple[str, Fraction]]


def dominant_limit_ball(graphs: Sequence[LabeledGraph], r: int, cap: int = DEFAULT_CODE_CAP) -> DominantBall:
    """Most frequent r-ball type at the last stage and its mass at every stage."""
    graphs = list(getattr(graphs, "graphs", graphs))
    if len(graphs) < 2:
        raise ValueError("need at least two stages")
    dists = [ball_distribution(g, r, cap=cap) for g in graphs]
    ranking = dists[-1].ranked()
    code = ranking[0][0]
    return DominantBall(code, [d.mass(code) for d in dists], ranking)
