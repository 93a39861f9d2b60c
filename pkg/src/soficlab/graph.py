"""Edge-labelled finite graphs and breadth-first utilities.

A :class:`LabeledGraph` stores a multiset of labelled edges ``(u, v, s)``.
Directed graphs come from almost actions (``v = σ(s)u``); undirected graphs
are plain graph families where the label carries no orientation.  Loops and
parallel edges are kept in the edge multiset, while the path metric always
uses the simple underlying graph.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components


class LabeledGraph:
    def __init__(
        self,
        n: int,
        edges: Iterable[tuple[int, int, str]],
        labels: Sequence[str] | None = None,
        directed: bool = True,
    ):
        edges = list(edges)
        if n < 0:
            raise ValueError("vertex count must be nonnegative")
        if labels is None:
            labels = sorted({s for _, _, s in edges})
        self.labels = tuple(labels)
        label_index = {s: i for i, s in enumerate(self.labels)}
        m = len(edges)
        self.n = int(n)
        self.directed = bool(directed)
        self.src = np.empty(m, dtype=np.int64)
        self.dst = np.empty(m, dtype=np.int64)
        self.lab = np.empty(m, dtype=np.int64)
        for k, (u, v, s) in enumerate(edges):
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) has an endpoint outside 0..{n - 1}")
            if s not in label_index:
                raise ValueError(f"edge label {s!r} not declared in {self.labels}")
            self.src[k], self.dst[k], self.lab[k] = u, v, label_index[s]
        self._adj = None
        self._nbrs = None

    @classmethod
    def from_arrays(cls, n, src, dst, lab, labels, directed=True) -> "LabeledGraph":
        g = cls.__new__(cls)
        g.n = int(n)
        g.labels = tuple(labels)
        g.directed = bool(directed)
        g.src = np.asarray(src, dtype=np.int64)
        g.dst = np.asarray(dst, dtype=np.int64)
        g.lab = np.asarray(lab, dtype=np.int64)
        g._adj = None
        g._nbrs = None
        return g

    @property
    def num_edges(self) -> int:
        return int(self.src.size)

    def edges(self) -> list[tuple[int, int, str]]:
        return [(int(u), int(v), self.labels[s]) for u, v, s in zip(self.src, self.dst, self.lab)]

    def canonical_edges(self) -> list[tuple[int, int, str]]:
        """Sorted edge multiset; undirected edges are stored with ``u <= v``."""
        out = []
        for u, v, s in self.edges():
            if not self.directed and u > v:
                u, v = v, u
            out.append((u, v, s))
        return sorted(out)

    def __eq__(self, other):
        if not isinstance(other, LabeledGraph):
            return NotImplemented
        return (
            self.n == other.n
            and self.directed == other.directed
            and set(self.labels) == set(other.labels)
            and self.canonical_edges() == other.canonical_edges()
        )

    __hash__ = None

    def __repr__(self):
        kind = "directed" if self.directed else "undirected"
        return f"LabeledGraph(n={self.n}, edges={self.num_edges}, labels={self.labels}, {kind})"

    # simple underlying graph

    def adjacency(self) -> sp.csr_matrix:
        """0/1 symmetric adjacency of the simple underlying graph (no loops)."""
        if self._adj is None:
            keep = self.src != self.dst
            u, v = self.src[keep], self.dst[keep]
            rows = np.concatenate([u, v])
            cols = np.concatenate([v, u])
            a = sp.csr_matrix((np.ones(rows.size, dtype=np.int64), (rows, cols)), shape=(self.n, self.n))
            a.sum_duplicates()
            a.data[:] = 1
            self._adj = a
        return self._adj

    def neighbor_lists(self) -> list[np.ndarray]:
        if self._nbrs is None:
            a = self.adjacency()
            self._nbrs = [a.indices[a.indptr[i]:a.indptr[i + 1]] for i in range(self.n)]
        return self._nbrs

    def degrees(self) -> np.ndarray:
        return np.diff(self.adjacency().indptr)

    def components(self) -> tuple[int, np.ndarray]:
        if self.n == 0:
            return 0, np.zeros(0, dtype=np.int64)
        k, labels = connected_components(self.adjacency(), directed=False)
        return int(k), labels

    def is_connected(self) -> bool:
        return self.components()[0] <= 1

    def bfs(self, sources, cutoff: int | None = None) -> np.ndarray:
        """Distance to the nearest source, ``-1`` where unreachable or beyond ``cutoff``."""
        nbrs = self.neighbor_lists()
        dist = np.full(self.n, -1, dtype=np.int64)
        if np.isscalar(sources):
            sources = [sources]
        queue = deque()
        for s in sources:
            if dist[s] < 0:
                dist[s] = 0
                queue.append(s)
        while queue:
            u = queue.popleft()
            du = dist[u]
            if cutoff is not None and du >= cutoff:
                continue
            for w in nbrs[u]:
                if dist[w] < 0:
                    dist[w] = du + 1
                    queue.append(w)
        return dist

    def ball(self, v: int, r: int) -> list[int]:
        """Vertices of B_r(v) in BFS discovery order."""
        nbrs = self.neighbor_lists()
        seen = {v}
        order = [v]
        frontier = [v]
        for _ in range(r):
            nxt = []
            for u in frontier:
                for w in nbrs[u]:
                    w = int(w)
                    if w not in seen:
                        seen.add(w)
                        order.append(w)
                        nxt.append(w)
            if not nxt:
                break
            frontier = nxt
        return order

    def all_pairs_distances(self) -> np.ndarray:
        """Dense hop-distance matrix; unreachable pairs are ``-1``."""
        from scipy.sparse.csgraph import shortest_path

        d = shortest_path(self.adjacency(), method="D", directed=False, unweighted=True)
        out = np.where(np.isinf(d), -1, d).astype(np.int64)
        return out

    def pairs_within(self, R: int) -> tuple[np.ndarray, np.ndarray]:
        """Ordered pairs ``(x, y)`` with ``0 < d(x, y) <= R``."""
        xs, ys = [], []
        for x in range(self.n):
            ball = self.ball(x, R)
            if len(ball) > 1:
                xs.append(np.full(len(ball) - 1, x, dtype=np.int64))
                ys.append(np.asarray(ball[1:], dtype=np.int64))
        if not xs:
            return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
        return np.concatenate(xs), np.concatenate(ys)

    # labelled structure

    def permutations(self) -> dict[str, np.ndarray] | None:
        """Per-label out-maps if this is the orbit graph of ``|labels|`` permutations."""
        if not self.directed:
            return None
        out = {}
        for i, s in enumerate(self.labels):
            mask = self.lab == i
            if int(mask.sum()) != self.n:
                return None
            perm = np.full(self.n, -1, dtype=np.int64)
            perm[self.src[mask]] = self.dst[mask]
            if (perm < 0).any() or np.unique(perm).size != self.n:
                return None
            out[s] = perm
        return out

    def induced_subgraph(self, vertices: Sequence[int]) -> "LabeledGraph":
        """Subgraph induced on ``vertices``; vertex ``vertices[i]`` becomes ``i``."""
        pos = np.full(self.n, -1, dtype=np.int64)
        vertices = np.asarray(vertices, dtype=np.int64)
        pos[vertices] = np.arange(vertices.size)
        keep = (pos[self.src] >= 0) & (pos[self.dst] >= 0)
        return LabeledGraph.from_arrays(
            vertices.size, pos[self.src[keep]], pos[self.dst[keep]], self.lab[keep], self.labels, self.directed
        )


def disjoint_union(graphs: Sequence[LabeledGraph]) -> LabeledGraph:
    if not graphs:
        return LabeledGraph(0, [], labels=(), directed=True)
    directed = graphs[0].directed
    labels: list[str] = []
    for g in graphs:
        if g.directed != directed:
            raise ValueError("cannot mix directed and undirected graphs")
        labels.extend(s for s in g.labels if s not in labels)
    index = {s: i for i, s in enumerate(labels)}
    src, dst, lab = [], [], []
    offset = 0
    for g in graphs:
        remap = np.array([index[s] for s in g.labels], dtype=np.int64)
        src.append(g.src + offset)
        dst.append(g.dst + offset)
        lab.append(remap[g.lab] if g.lab.size else g.lab)
        offset += g.n
    return LabeledGraph.from_arrays(
        offset, np.concatenate(src), np.concatenate(dst), np.concatenate(lab), labels, directed
    )


def cycle_graph(n: int, label: str = "a", directed: bool = True) -> LabeledGraph:
    return LabeledGraph(n, [(i, (i + 1) % n, label) for i in range(n)], labels=(label,), directed=directed)


def path_graph(n: int, label: str = "a", directed: bool = True) -> LabeledGraph:
    return LabeledGraph(n, [(i, i + 1, label) for i in range(n - 1)], labels=(label,), directed=directed)


def complete_graph(n: int, label: str = "e") -> LabeledGraph:
    return LabeledGraph(n, [(i, j, label) for i in range(n) for j in range(i + 1, n)], labels=(label,), directed=False)


def from_simple_edges(n: int, edges: Iterable[tuple[int, int]], label: str = "e") -> LabeledGraph:
    return LabeledGraph(n, [(int(u), int(v), label) for u, v in edges], labels=(label,), directed=False)


@dataclass
class RootedBall:
    """A rooted labelled graph; every vertex lies within ``radius`` of ``root``."""

    graph: LabeledGraph
    root: int
    radius: int
    elements: list | None = None
    depth: np.ndarray | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.graph.n

    def restrict(self, r: int) -> "RootedBall":
        """The sub-ball of radius ``r <= radius`` about the same root."""
        if r > self.radius:
            raise ValueError("cannot grow a ball by restriction")
        verts = self.graph.ball(self.root, r)
        sub = self.graph.induced_subgraph(verts)
        elements = [self.elements[v] for v in verts] if self.elements is not None else None
        dist = self.graph.bfs(self.root)
        return RootedBall(sub, root=0, radius=r, elements=elements, depth=dist[verts])
