"""Følner sets, functional amenability, property-A averaging and hyperfinite partitions."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .graph import LabeledGraph
from .spectral import fiedler, laplacian

PROB_TOL = 1e-12


@dataclass
class FolnerWitness:
    vertices: np.ndarray
    R: int
    boundary: int

    @property
    def size(self) -> int:
        return int(self.vertices.size)

    @property
    def ratio(self) -> Fraction:
        return Fraction(self.boundary, self.size)


def r_boundary(graph: LabeledGraph, F, R: int) -> np.ndarray:
    """∂_R F: vertices outside F within distance R of F."""
    F = np.asarray(F, dtype=np.int64)
    dist = graph.bfs(F.tolist(), cutoff=R)
    mask = dist > 0
    return np.flatnonzero(mask)


def _sweep_orders(graph: LabeledGraph, strategy: str, centers: int, rng) -> list[np.ndarray]:
    orders = []
    if strategy in ("balls", "both"):
        picks = np.arange(graph.n) if centers >= graph.n else np.sort(rng.choice(graph.n, centers, replace=False))
        for c in picks:
            orders.append(np.asarray(graph.ball(int(c), graph.n), dtype=np.int64))
    if strategy in ("sweep", "both") and graph.n >= 2:
        k, comp = graph.components()
        if k == 1:
            _, vec = fiedler(laplacian(graph, 1), 1)
            o = np.argsort(vec, kind="stable")
            orders += [o, o[::-1]]
    if strategy not in ("balls", "sweep", "both"):
        raise ValueError(f"unknown strategy {strategy!r}")
    return orders


def folner_search(
    graph: LabeledGraph,
    R: int,
    eps: float,
    strategy: str = "both",
    centers: int = 16,
    seed: int = 0,
) -> FolnerWitness | None:
    """Search for F with |F| <= n/2 and |∂_R F| / |F| < eps.

    Candidates are prefixes of vertex orders (BFS orders from sampled centres
    and both ends of the Fiedler order).  The best qualifying prefix is
    returned; None means only that nothing was found.
    """
    if eps <= 0 or R < 1:
        raise ValueError("need eps > 0 and R >= 1")
    n = graph.n
    target = Fraction(eps)
    rng = np.random.default_rng(seed)
    balls = [np.asarray(graph.ball(v, R), dtype=np.int64) for v in range(n)]
    best = None
    for order in _sweep_orders(graph, strategy, centers, rng):
        cover = np.zeros(n, dtype=np.int64)
        covered = 0
        for k, v in enumerate(order[: n // 2], start=1):
            b = balls[v]
            covered += int((cover[b] == 0).sum())
            cover[b] += 1
            ratio = Fraction(covered - k, k)
            if ratio < target and (best is None or (ratio, k) < (best[0], best[1])):
                best = (ratio, k, order[:k].copy())
    if best is None:
        return None
    verts = np.sort(best[2])
    return FolnerWitness(verts, R, int(r_boundary(graph, verts, R).size))


def _check_probability(phi: np.ndarray, n: int):
    if phi.shape != (n,):
        raise ValueError(f"expected a vector of length {n}")
    if (phi < 0).any() or abs(phi.sum() - 1) > PROB_TOL:
        raise ValueError("phi must be a nonnegative vector summing to 1")


def functional_check(graph: LabeledGraph, phi, R: int) -> float:
    """Σ |φ(x) - φ(y)| over ordered pairs with 0 < d(x, y) <= R."""
    phi = np.asarray(phi, dtype=np.float64)
    _check_probability(phi, graph.n)
    xs, ys = graph.pairs_within(R)
    return float(np.abs(phi[xs] - phi[ys]).sum())


def max_ball_size(graph: LabeledGraph, R: int) -> int:
    return max((len(graph.ball(v, R)) for v in range(graph.n)), default=0)


@dataclass
class ProbField:
    """Row x is the probability vector η_x."""

    eta: np.ndarray = field(repr=False)
    support_radius: int

    def check(self, graph: LabeledGraph):
        eta = self.eta
        n = graph.n
        if eta.shape != (n, n):
            raise ValueError(f"field must be {n}x{n}")
        if (eta < 0).any() or np.abs(eta.sum(axis=1) - 1).max() > PROB_TOL:
            raise ValueError("each η_x must be a probability vector")
        for x in range(n):
            far = graph.bfs(x, cutoff=self.support_radius) < 0
            if (eta[x, far] > 0).any():
                raise ValueError(f"η_{x} has support beyond radius {self.support_radius}")


@dataclass
class AveragingResult:
    phi: np.ndarray
    z: int
    ratio: float
    value: float


def propA_to_folner(graph: LabeledGraph, field_: ProbField, R: int, eps: float) -> AveragingResult:
    """Turn a low-variation probability field into one almost-invariant vector.

    Requires ``||η_x - η_y||_1 <= eps / N_R`` for all pairs within R, where
    ``N_R`` is the largest closed R-ball.  For each z let
    ``num(z) = Σ_{E_R} |η_x(z) - η_y(z)|`` and ``den(z) = Σ_x η_x(z)``; the z
    minimising num/den gives ``φ = η_.(z) / den(z)`` with variation <= eps.
    """
    field_.check(graph)
    eta = field_.eta
    N_R = max_ball_size(graph, R)
    xs, ys = graph.pairs_within(R)
    bound = eps / N_R
    var = np.abs(eta[xs] - eta[ys]).sum(axis=1)
    if var.size and var.max() > bound:
        k = int(np.argmax(var))
        raise ValueError(
            f"field variation {var[k]:.6g} on pair ({xs[k]}, {ys[k]}) exceeds eps/N_R = {bound:.6g}"
        )
    num = np.abs(eta[xs] - eta[ys]).sum(axis=0)
    den = eta.sum(axis=0)
    live = np.flatnonzero(den > 0)
    ratios = num[live] / den[live]
    z = int(live[int(np.argmin(ratios))])  # argmin returns the first, i.e. smallest index
    phi = eta[:, z] / den[z]
    value = float(np.abs(phi[xs] - phi[ys]).sum())
    return AveragingResult(phi, z, float(num[z] / den[z]), value)


# hyperfinite partitions


@dataclass
class HyperfinitePartition:
    parts: list[np.ndarray]
    K: int
    cut: int

    def labels(self, n: int) -> np.ndarray:
        out = np.full(n, -1, dtype=np.int64)
        for i, p in enumerate(self.parts):
            out[p] = i
        return out


def cut_edges(graph: LabeledGraph, labels: np.ndarray) -> int:
    """Labelled edges (with multiplicity) joining different parts."""
    return int((labels[graph.src] != labels[graph.dst]).sum())


def _edge_weights(graph: LabeledGraph) -> list[dict[int, int]]:
    w: list[dict[int, int]] = [dict() for _ in range(graph.n)]
    for u, v in zip(graph.src.tolist(), graph.dst.tolist()):
        if u != v:
            w[u][v] = w[u].get(v, 0) + 1
            w[v][u] = w[v].get(u, 0) + 1
    return w


def hyperfinite_partition(graph: LabeledGraph, K: int, max_passes: int = 20) -> HyperfinitePartition:
    """Carve parts of size <= K, then apply cut-reducing vertex moves.

    Carving grows each part from the smallest unassigned vertex, always adding
    the frontier vertex with the most edges into the part (ties by BFS
    order).  Afterwards a vertex moves to a neighbouring part with room when
    that strictly lowers the cut; passes repeat until nothing moves.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    n = graph.n
    w = _edge_weights(graph)
    label = np.full(n, -1, dtype=np.int64)
    sizes: list[int] = []
    for start in range(n):
        if label[start] >= 0:
            continue
        pid = len(sizes)
        label[start] = pid
        size = 1
        gain: dict[int, int] = {}
        seq: dict[int, int] = {}
        for v, c in w[start].items():
            if label[v] < 0:
                gain[v] = c
                seq.setdefault(v, len(seq))
        while size < K and gain:
            v = min(gain, key=lambda x: (-gain[x], seq[x]))
            del gain[v]
            label[v] = pid
            size += 1
            for u, c in w[v].items():
                if label[u] < 0:
                    gain[u] = gain.get(u, 0) + c
                    seq.setdefault(u, len(seq))
        sizes.append(size)

    for _ in range(max_passes):
        moved = False
        for v in range(n):
            own = label[v]
            links: dict[int, int] = {}
            for u, c in w[v].items():
                links[label[u]] = links.get(label[u], 0) + c
            stay = links.get(own, 0)
            best = None
            for p, c in sorted(links.items()):
                if p != own and sizes[p] < K and c > stay and (best is None or c > best[1]):
                    best = (p, c)
            if best is not None:
                label[v] = best[0]
                sizes[own] -= 1
                sizes[best[0]] += 1
                moved = True
        if not moved:
            break

    # drop emptied parts, renumber by first vertex
    parts = {}
    for v in range(n):
        parts.setdefault(int(label[v]), []).append(v)
    ordered = [np.asarray(p, dtype=np.int64) for p in sorted(parts.values(), key=lambda p: p[0])]
    labels = np.empty(n, dtype=np.int64)
    for i, p in enumerate(ordered):
        labels[p] = i
    return HyperfinitePartition(ordered, K, cut_edges(graph, labels))


def amenable_mass_estimate(graphs: Sequence[LabeledGraph], r: int) -> list[Fraction]:
    """Per stage, the fraction of vertices whose r-ball has only degrees <= 2.

    Such balls look like pieces of a line, the amenable limit; in graphs of
    degree <= 3 the rest see a vertex of degree 3 within distance r.
    """
    graphs = list(getattr(graphs, "graphs", graphs))
    out = []
    for i, g in enumerate(graphs):
        deg = g.degrees()
        if deg.size and deg.max() > 3:
            raise ValueError(f"stage {i} has a vertex of degree {int(deg.max())} > 3")
        branch = np.flatnonzero(deg >= 3)
        if branch.size == 0:
            out.append(Fraction(1))
            continue
        near = g.bfs(branch.tolist(), cutoff=r) >= 0
        out.append(Fraction(int((~near).sum()), g.n))
    return out
