"""Finite stages of sofic approximations.

An :class:`AlmostAction` stores one permutation per generator.  Words act
letter by letter from the left end: ``sigma_of(w)`` applies the first letter
first, so ``sigma_of(w * v) == sigma_of(v) o sigma_of(w)``.

For a group element ``g`` with normal form ``s1 ... sk`` we set
``σ(g) = σ(s1) o ... o σ(sk)``, i.e. the rightmost letter acts first.  With
this convention an exact action (for example the regular action of a finite
group) satisfies ``σ(g)σ(h) = σ(gh)`` for non-abelian groups too.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .graph import LabeledGraph
from .groups import GroupModel, Word, regular_action_permutations

DEFAULT_F_CAP = 200


def identity_permutation(n: int) -> np.ndarray:
    return np.arange(n, dtype=np.int64)


def is_permutation(p: np.ndarray) -> bool:
    p = np.asarray(p)
    n = p.size
    if p.ndim != 1 or (n and (p.min() < 0 or p.max() >= n)):
        return False
    return np.unique(p).size == n


def invert_permutation(p: np.ndarray) -> np.ndarray:
    inv = np.empty_like(p)
    inv[p] = np.arange(p.size, dtype=p.dtype)
    return inv


def complete_partial(partial: np.ndarray) -> np.ndarray:
    """Extend a partial injection to a permutation.

    ``partial[x] = -1`` marks an uncovered source.  Uncovered sources are
    matched to uncovered targets, both taken in ascending index order.
    """
    partial = np.asarray(partial, dtype=np.int64)
    n = partial.size
    defined = partial >= 0
    targets = partial[defined]
    if np.unique(targets).size != targets.size:
        raise ValueError("partial map is not injective")
    hit = np.zeros(n, dtype=bool)
    hit[targets] = True
    out = partial.copy()
    out[~defined] = np.flatnonzero(~hit)
    return out


class AlmostAction:
    """Permutations ``σ(s)`` of ``{0..n-1}`` for each generator ``s`` of ``model``."""

    def __init__(self, model: GroupModel, perms: Mapping[str, Sequence[int]]):
        self.model = model
        missing = set(model.symbols) - set(perms)
        extra = set(perms) - set(model.symbols)
        if missing or extra:
            raise ValueError(f"permutations must be given for exactly {model.symbols}")
        self.perms = {s: np.asarray(perms[s], dtype=np.int64) for s in model.symbols}
        sizes = {p.size for p in self.perms.values()}
        if len(sizes) != 1:
            raise ValueError("all generator permutations must act on the same set")
        self.n = sizes.pop()
        for s, p in self.perms.items():
            if not is_permutation(p):
                raise ValueError(f"σ({s}) is not a permutation of 0..{self.n - 1}")
        self._inv = {s: invert_permutation(p) for s, p in self.perms.items()}
        self._elem_cache: dict = {}

    # the normal-form rule is fixed by the model; record it for reports
    normal_form_rule = "shortlex geodesic of the group model, rightmost letter acts first"

    def letter(self, symbol: str, sign: int) -> np.ndarray:
        if symbol not in self.perms:
            raise ValueError(f"unknown generator symbol {symbol!r}")
        return self.perms[symbol] if sign > 0 else self._inv[symbol]

    def __eq__(self, other):
        if not isinstance(other, AlmostAction):
            return NotImplemented
        return self.model == other.model and all(
            np.array_equal(self.perms[s], other.perms[s]) for s in self.model.symbols
        )

    __hash__ = None

    def __repr__(self):
        return f"AlmostAction({self.model!r}, n={self.n})"


def sigma_of(action: AlmostAction, w: Word | str) -> np.ndarray:
    """Permutation of the word ``w``; the first letter is applied first."""
    if isinstance(w, str):
        w = Word.parse(w)
    p = identity_permutation(action.n)
    for sym, e in w:
        p = action.letter(sym, e)[p]
    return p


def sigma_elem(action: AlmostAction, g) -> np.ndarray:
    """σ(g) through the model's normal form of ``g``."""
    key = g
    cached = action._elem_cache.get(key)
    if cached is not None:
        return cached
    w = action.model.normal_form(g)
    p = sigma_of(action, w.reversed())
    action._elem_cache[key] = p
    return p


@dataclass
class GoodSetReport:
    mask: np.ndarray = field(repr=False)
    F: list
    n: int

    @property
    def Y(self) -> np.ndarray:
        return np.flatnonzero(self.mask)

    @property
    def size(self) -> int:
        return int(self.mask.sum())

    @property
    def defect(self) -> Fraction:
        return Fraction(self.n - self.size, self.n) if self.n else Fraction(0)


def _check_F(action: AlmostAction, F, cap: int) -> list:
    F = list(dict.fromkeys(F))
    if not F:
        raise ValueError("F must be nonempty")
    if len(F) > cap:
        raise ValueError(f"|F| = {len(F)} exceeds the cap of {cap} elements")
    return F


def good_set(action: AlmostAction, F, cap: int = DEFAULT_F_CAP) -> GoodSetReport:
    """Points where σ is multiplicative on ``F x F`` and free on ``F \\ {e}``."""
    F = _check_F(action, F, cap)
    model = action.model
    e = model.identity
    mask = np.ones(action.n, dtype=bool)
    sig = {g: sigma_elem(action, g) for g in F}
    for g in F:
        if g != e:
            mask &= sig[g] != np.arange(action.n)
    for g in F:
        for h in F:
            gh = sigma_elem(action, model.multiply(g, h))
            mask &= sig[g][sig[h]] == gh
    return GoodSetReport(mask=mask, F=F, n=action.n)


def build_labeled_graph(action: AlmostAction) -> LabeledGraph:
    """Edge ``(x, σ(s)x, s)`` for every generator ``s`` and point ``x``."""
    syms = action.model.symbols
    n = action.n
    src = np.tile(np.arange(n, dtype=np.int64), len(syms))
    dst = np.concatenate([action.perms[s] for s in syms]) if syms else np.zeros(0, dtype=np.int64)
    lab = np.repeat(np.arange(len(syms), dtype=np.int64), n)
    return LabeledGraph.from_arrays(n, src, dst, lab, syms, directed=True)


@dataclass
class RepairResult:
    action: AlmostAction
    vertices: np.ndarray  # original indices of the kept component, ascending
    good_before: int
    component_size: int


def restrict_action(action: AlmostAction, vertices: Sequence[int]) -> AlmostAction:
    """Restrict to ``vertices`` (reindexed ascending), completing partial bijections."""
    vertices = np.sort(np.asarray(vertices, dtype=np.int64))
    pos = np.full(action.n, -1, dtype=np.int64)
    pos[vertices] = np.arange(vertices.size)
    perms = {}
    for s, p in action.perms.items():
        partial = pos[p[vertices]]
        perms[s] = complete_partial(partial)
    return AlmostAction(action.model, perms)


def repair_connected(action: AlmostAction, F, eps: float, cap: int = DEFAULT_F_CAP) -> RepairResult:
    """Pass to one connected component that keeps good-set density ``>= 1 - eps``.

    Among qualifying components the one with the most good points wins (ties:
    smallest first vertex).  Components are invariant under the generators, so
    the restricted generator permutations agree with the originals.
    """
    report = good_set(action, F, cap=cap)
    graph = build_labeled_graph(action)
    k, comp = graph.components()
    best = None
    for c in range(k):
        verts = np.flatnonzero(comp == c)
        good = int(report.mask[verts].sum())
        if Fraction(good) >= (1 - Fraction(eps)) * verts.size:
            key = (-good, int(verts[0]))
            if best is None or key < best[0]:
                best = (key, verts, good)
    if best is None:
        raise RuntimeError(
            f"no connected component has good-set density >= 1 - {eps}; "
            f"input defect is {float(report.defect):.6g}"
        )
    _, verts, good = best
    return RepairResult(restrict_action(action, verts), verts, good, int(verts.size))


def finite_core(action: AlmostAction, F, cap: int = DEFAULT_F_CAP) -> np.ndarray:
    """Z_F = intersection over g in F of σ(g)(Y_F), as a boolean mask."""
    report = good_set(action, F, cap=cap)
    core = np.ones(action.n, dtype=bool)
    for g in report.F:
        image = np.zeros(action.n, dtype=bool)
        image[sigma_elem(action, g)[report.mask]] = True
        core &= image
    return core


def regular_action(model: GroupModel) -> AlmostAction:
    """The exact left-regular action of a bundled finite model on itself."""
    _, perms = regular_action_permutations(model)
    return AlmostAction(model, perms)
