"""Constructors of approximation families.

Randomness: a family built from a master seed gives stage ``i`` the
generator ``numpy.random.default_rng(SeedSequence(seed).spawn(k)[i])``.
Nothing else draws random numbers, so every family is a deterministic
function of its parameters and seed.
"""
from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .actions import AlmostAction, build_labeled_graph, complete_partial, repair_connected
from .graph import LabeledGraph, cycle_graph, disjoint_union, from_simple_edges
from .groups import FreeAbelian, FreeGroup, GroupModel, ball_elements

logger = logging.getLogger(__name__)

GRAPH_LABEL = "e"


@dataclass
class ApproximationFamily:
    """Ordered finite stages, either almost actions or bare graphs."""

    model: GroupModel | None
    stages: list
    meta: list[dict] = field(default_factory=list)
    construction: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.meta:
            self.meta = [{} for _ in self.stages]
        for m, st in zip(self.meta, self.stages):
            m.setdefault("size", st.n)

    @property
    def graph_only(self) -> bool:
        return bool(self.stages) and isinstance(self.stages[0], LabeledGraph)

    @property
    def graphs(self) -> list[LabeledGraph]:
        if self.graph_only:
            return list(self.stages)
        return [build_labeled_graph(a) for a in self.stages]

    @property
    def sizes(self) -> list[int]:
        return [st.n for st in self.stages]

    def __len__(self):
        return len(self.stages)


def stage_rngs(seed: int, count: int) -> list[np.random.Generator]:
    """The documented seed-splitting rule: one spawned child per stage."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(count)]


def _check_increasing(sizes: Sequence[int], what: str):
    if not sizes:
        raise ValueError(f"at least one {what} is required")
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ValueError(f"{what}s must be strictly increasing, got {list(sizes)}")


def _translation(n: int, d: int, axis: int, wrap: bool) -> np.ndarray:
    coords = np.indices((n,) * d).reshape(d, -1)
    shifted = coords.copy()
    shifted[axis] += 1
    if wrap:
        shifted[axis] %= n
        return np.ravel_multi_index(shifted, (n,) * d)
    inside = shifted[axis] < n
    partial = np.full(coords.shape[1], -1, dtype=np.int64)
    partial[inside] = np.ravel_multi_index(shifted[:, inside], (n,) * d)
    return complete_partial(partial)


def quotient_approximation(model: GroupModel, moduli: Sequence[int]) -> ApproximationFamily:
    """Stage k: (Z/n_k)^d with each generator translating one coordinate."""
    if not isinstance(model, FreeAbelian):
        raise ValueError("quotient_approximation supports FreeAbelian models")
    _check_increasing(moduli, "modulus")
    if min(moduli) < 3:
        raise ValueError("moduli must be >= 3")
    stages = []
    for n in moduli:
        perms = {s: _translation(n, model.d, i, wrap=True) for i, s in enumerate(model.symbols)}
        stages.append(AlmostAction(model, perms))
    meta = [{"size": n ** model.d, "modulus": n, "kind": "quotient"} for n in moduli]
    return ApproximationFamily(model, stages, meta, {"kind": "quotient", "params": {"moduli": list(moduli)}})


def folner_approximation(model: GroupModel, box_sizes: Sequence[int]) -> ApproximationFamily:
    """Stage k: box [0, n_k)^d with partial translations completed in ascending index order."""
    if not isinstance(model, FreeAbelian):
        raise ValueError("folner_approximation supports FreeAbelian models")
    _check_increasing(box_sizes, "box size")
    if min(box_sizes) < 3:
        raise ValueError("box sides must be >= 3")
    stages = []
    for n in box_sizes:
        perms = {s: _translation(n, model.d, i, wrap=False) for i, s in enumerate(model.symbols)}
        stages.append(AlmostAction(model, perms))
    meta = [{"size": n ** model.d, "box": n, "kind": "folner"} for n in box_sizes]
    return ApproximationFamily(model, stages, meta, {"kind": "folner", "params": {"box_sizes": list(box_sizes)}})


def random_permutation_approximation(k: int, n: int, seed=None) -> AlmostAction:
    """``k`` independent uniform permutations of ``n`` points for FreeGroup(k)."""
    if n < 2 or k < 1:
        raise ValueError("need n >= 2 and k >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    model = FreeGroup(k)
    return AlmostAction(model, {s: rng.permutation(n) for s in model.symbols})


def random_permutation_family(k: int, sizes: Sequence[int], seed: int = 0, repair: bool = True) -> ApproximationFamily:
    """Random actions per stage, each passed to its best connected component."""
    _check_increasing(sizes, "size")
    model = FreeGroup(k)
    F = ball_elements(model, 1)
    stages, meta = [], []
    for n, rng in zip(sizes, stage_rngs(seed, len(sizes))):
        action = random_permutation_approximation(k, n, rng)
        info = {"drawn_size": n, "kind": "random_permutation"}
        if repair and not build_labeled_graph(action).is_connected():
            res = repair_connected(action, F, eps=1.0)
            action = res.action
            info["repaired"] = True
        info["size"] = action.n
        stages.append(action)
        meta.append(info)
    return ApproximationFamily(
        model, stages, meta, {"kind": "random", "params": {"k": k, "sizes": list(sizes)}, "seed": seed}
    )


# cubic graphs of large girth


def girth(graph: LabeledGraph) -> float:
    """Length of the shortest cycle of the simple underlying graph, ``inf`` for forests."""
    return _girth_adj([set(map(int, nb)) for nb in graph.neighbor_lists()])


def _girth_adj(adj: list[set]) -> float:
    best = float("inf")
    n = len(adj)
    for root in range(n):
        dist = {root: 0}
        parent = {root: -1}
        queue = deque([root])
        while queue:
            u = queue.popleft()
            if 2 * dist[u] + 1 >= best:
                break
            for w in adj[u]:
                if w not in dist:
                    dist[w] = dist[u] + 1
                    parent[w] = u
                    queue.append(w)
                elif w != parent[u]:
                    best = min(best, dist[u] + dist[w] + 1)
    return best


def _random_cubic(n: int, rng: np.random.Generator, max_tries: int = 1000) -> list[set]:
    """Pairing model for 3-regular simple graphs, rejecting loops and multi-edges."""
    for _ in range(max_tries):
        stubs = rng.permutation(np.repeat(np.arange(n), 3))
        adj = [set() for _ in range(n)]
        ok = True
        for u, v in stubs.reshape(-1, 2):
            u, v = int(u), int(v)
            if u == v or v in adj[u]:
                ok = False
                break
            adj[u].add(v)
            adj[v].add(u)
        if ok:
            return adj
    raise RuntimeError(f"pairing model failed {max_tries} times for n={n}")


def _short_cycle_edge(adj: list[set], target: int) -> tuple[int, int] | None:
    """An edge lying on some cycle shorter than ``target``, or None."""
    for root in range(len(adj)):
        dist = {root: 0}
        parent = {root: -1}
        queue = deque([root])
        while queue:
            u = queue.popleft()
            if 2 * dist[u] + 1 >= target:
                break
            for w in adj[u]:
                if w not in dist:
                    dist[w] = dist[u] + 1
                    parent[w] = u
                    queue.append(w)
                elif w != parent[u] and dist[u] + dist[w] + 1 < target:
                    return u, w
    return None


def _within(adj: list[set], a: int, b: int, limit: int) -> bool:
    """True iff d(a, b) <= limit."""
    if a == b:
        return True
    seen = {a}
    frontier = [a]
    for _ in range(limit):
        nxt = []
        for u in frontier:
            for w in adj[u]:
                if w == b:
                    return True
                if w not in seen:
                    seen.add(w)
                    nxt.append(w)
        frontier = nxt
    return False


def _raise_girth(adj: list[set], target: int, rng: np.random.Generator, max_attempts: int) -> None:
    """Double-edge switches that remove a short cycle without creating new ones."""
    attempts = 0
    while attempts < max_attempts:
        e = _short_cycle_edge(adj, target)
        if e is None:
            return
        u, w = e
        edges = [(a, b) for a in range(len(adj)) for b in adj[a] if a < b]
        while attempts < max_attempts:
            attempts += 1
            x, y = edges[int(rng.integers(len(edges)))]
            if rng.random() < 0.5:
                x, y = y, x
            if len({u, w, x, y}) < 4:
                continue
            adj[u].discard(w); adj[w].discard(u)
            adj[x].discard(y); adj[y].discard(x)
            if not _within(adj, u, x, target - 2):
                adj[u].add(x); adj[x].add(u)
                if not _within(adj, w, y, target - 2):
                    adj[w].add(y); adj[y].add(w)
                    break
                adj[u].discard(x); adj[x].discard(u)
            adj[u].add(w); adj[w].add(u)
            adj[x].add(y); adj[y].add(x)


def high_girth_cubic(
    n: int,
    girth_target: int,
    rng: np.random.Generator,
    retries: int = 5,
    max_switch_attempts: int = 2000,
) -> tuple[list[tuple[int, int]], float]:
    """Random 3-regular graph on ``n`` vertices pushed toward ``girth_target``.

    Each retry draws a fresh pairing-model graph and applies girth-raising
    switches, one girth level at a time; the first graph reaching the target
    is returned, otherwise the best one seen.  Returns the sorted edge list and the achieved girth.
    """
    if n < 4 or n % 2:
        raise ValueError("3-regular graphs need an even number of vertices >= 4")
    best_edges, best_girth = None, -1.0
    for _ in range(retries):
        adj = _random_cubic(n, rng)
        g = _girth_adj(adj)
        # one level at a time, so an unreachable target still ends at a locally best girth
        while g < girth_target:
            _raise_girth(adj, int(g) + 1, rng, max_switch_attempts)
            g_new = _girth_adj(adj)
            if g_new <= g:
                break
            g = g_new
        if g > best_girth:
            best_girth = g
            best_edges = sorted((a, b) for a in range(n) for b in adj[a] if a < b)
        if g >= girth_target:
            break
    return best_edges, best_girth


def mixed_family(
    a: int,
    b: int,
    sizes: Sequence[int],
    girth_target: int = 8,
    seed: int = 0,
    retries: int = 5,
    max_switch_attempts: int = 2000,
) -> ApproximationFamily:
    """Stage i: ``a`` cycles and ``b - a`` cubic high-girth graphs, all on ``sizes[i]`` vertices."""
    if not 1 <= a <= b:
        raise ValueError("need 1 <= a <= b")
    _check_increasing(sizes, "size")
    if min(sizes) < 3:
        raise ValueError("component sizes must be >= 3")
    if b > a and any(s % 2 or s < 4 for s in sizes):
        raise ValueError("cubic components need even sizes >= 4")
    stages, meta = [], []
    for size, rng in zip(sizes, stage_rngs(seed, len(sizes))):
        parts = [cycle_graph(size, GRAPH_LABEL, directed=False) for _ in range(a)]
        achieved = []
        for _ in range(b - a):
            edges, g = high_girth_cubic(size, girth_target, rng, retries, max_switch_attempts)
            parts.append(from_simple_edges(size, edges, GRAPH_LABEL))
            achieved.append(g)
        info = {"size": size * b, "component_size": size, "kind": "mixed"}
        if achieved:
            info["girth"] = min(achieved)
            if info["girth"] < girth_target:
                logger.warning(
                    "girth target %d not reached for component size %d; achieved %s",
                    girth_target, size, info["girth"],
                )
        stages.append(disjoint_union(parts))
        meta.append(info)
    return ApproximationFamily(
        None,
        stages,
        meta,
        {"kind": "mixed", "params": {"a": a, "b": b, "sizes": list(sizes), "girth_target": girth_target}, "seed": seed},
    )
