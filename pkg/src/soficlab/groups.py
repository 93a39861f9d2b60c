"""Concrete finitely generated groups with a solvable word problem.

Every model exposes the same small surface: ``identity``, ``multiply``,
``inverse``, ``generator`` and ``normal_form``.  Elements are hashable tuples
in a canonical form, so equality of elements is plain ``==``.

Words act on the left: the Cayley graph built here has an edge ``g -> s*g``
labelled ``s``, which is the orbit graph of the left-regular action.
"""
from __future__ import annotations

import itertools
import re
from collections import deque
from dataclasses import dataclass
from typing import Hashable, Iterable, Sequence

import numpy as np

from .errors import ResourceLimitError
from .graph import LabeledGraph, RootedBall

DEFAULT_BALL_CAP = 10**6

_SYMBOL_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
_TOKEN_RE = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)(?:\^(-?\d+))?$")

Letter = tuple[str, int]


@dataclass(frozen=True)
class GeneratingSet:
    """One-sided list of generator names; inverses are formal."""

    symbols: tuple[str, ...]

    def __post_init__(self):
        if not self.symbols:
            raise ValueError("generating set must be nonempty")
        if len(set(self.symbols)) != len(self.symbols):
            raise ValueError(f"duplicate generator symbols: {self.symbols}")
        for s in self.symbols:
            if not _SYMBOL_RE.match(s):
                raise ValueError(f"invalid generator symbol {s!r}")

    @property
    def letters(self) -> tuple[Letter, ...]:
        """Symmetric closure in shortlex order: a < a^-1 < b < b^-1 < ..."""
        return tuple((s, e) for s in self.symbols for e in (1, -1))

    def __contains__(self, symbol: str) -> bool:
        return symbol in self.symbols

    def __len__(self) -> int:
        return len(self.symbols)


@dataclass(frozen=True)
class Word:
    """A word in the free group on the generators, letters are ``(symbol, +-1)``."""

    letters: tuple[Letter, ...] = ()

    @classmethod
    def parse(cls, text: str) -> "Word":
        """Parse ``"a b a^-1 b^-1"`` or ``"a^7"``; the empty string is the empty word."""
        letters: list[Letter] = []
        for token in text.split():
            m = _TOKEN_RE.match(token)
            if m is None:
                raise ValueError(f"cannot parse word token {token!r}")
            sym, exp = m.group(1), int(m.group(2) or 1)
            sign = 1 if exp > 0 else -1
            letters.extend([(sym, sign)] * abs(exp))
        return cls(tuple(letters))

    @classmethod
    def of(cls, letters: Iterable[Letter]) -> "Word":
        return cls(tuple((s, int(e)) for s, e in letters))

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __mul__(self, other: "Word") -> "Word":
        return Word(self.letters + other.letters)

    def inverse(self) -> "Word":
        return Word(tuple((s, -e) for s, e in reversed(self.letters)))

    def reversed(self) -> "Word":
        return Word(tuple(reversed(self.letters)))

    def reduced(self) -> "Word":
        out: list[Letter] = []
        for s, e in self.letters:
            if out and out[-1] == (s, -e):
                out.pop()
            else:
                out.append((s, e))
        return Word(tuple(out))

    def __str__(self) -> str:
        return " ".join(s if e == 1 else f"{s}^-1" for s, e in self.letters)


def _default_symbols(k: int) -> tuple[str, ...]:
    alphabet = "abcdefghijklmnopqrstuvwxyz"
    if k <= len(alphabet):
        return tuple(alphabet[:k])
    return tuple(f"x{i}" for i in range(k))


class GroupModel:
    """Base class for the bundled group models."""

    kind: str = "abstract"

    def __init__(self, symbols: Sequence[str]):
        self.generating_set = GeneratingSet(tuple(symbols))

    # subclasses provide these
    @property
    def identity(self) -> Hashable:
        raise NotImplementedError

    def multiply(self, x, y):
        raise NotImplementedError

    def inverse(self, x):
        raise NotImplementedError

    def generator(self, symbol: str):
        raise NotImplementedError

    def normal_form(self, g) -> Word:
        """Fixed geodesic word for ``g``, used to turn elements into permutations."""
        raise NotImplementedError

    def params(self) -> dict:
        raise NotImplementedError

    @property
    def symbols(self) -> tuple[str, ...]:
        return self.generating_set.symbols

    def letter(self, symbol: str, sign: int):
        if symbol not in self.generating_set:
            raise ValueError(f"unknown generator symbol {symbol!r} for {self!r}")
        g = self.generator(symbol)
        return g if sign > 0 else self.inverse(g)

    def __eq__(self, other):
        return type(self) is type(other) and self.spec() == other.spec()

    def __hash__(self):
        return hash(repr(self.spec()))

    def spec(self) -> dict:
        return {"kind": self.kind, "params": self.params(), "generators": list(self.symbols)}

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.params().items())
        return f"{self.kind}({args})"


class FreeAbelian(GroupModel):
    """Z^d with the standard basis; elements are integer tuples."""

    kind = "FreeAbelian"

    def __init__(self, d: int, symbols: Sequence[str] | None = None):
        if d < 1:
            raise ValueError("FreeAbelian needs d >= 1")
        self.d = d
        super().__init__(symbols or _default_symbols(d))
        if len(self.symbols) != d:
            raise ValueError("need exactly d symbols")

    @property
    def identity(self):
        return (0,) * self.d

    def multiply(self, x, y):
        return tuple(a + b for a, b in zip(x, y))

    def inverse(self, x):
        return tuple(-a for a in x)

    def generator(self, symbol):
        i = self.symbols.index(symbol)
        return tuple(1 if j == i else 0 for j in range(self.d))

    def normal_form(self, g):
        letters: list[Letter] = []
        for sym, c in zip(self.symbols, g):
            letters.extend([(sym, 1 if c > 0 else -1)] * abs(c))
        return Word(tuple(letters))

    def params(self):
        return {"d": self.d}


class FiniteCyclicPower(GroupModel):
    """(Z/n)^d; elements are residue tuples in [0, n)."""

    kind = "FiniteCyclicPower"

    def __init__(self, n: int, d: int = 1, symbols: Sequence[str] | None = None):
        if n < 1 or d < 1:
            raise ValueError("FiniteCyclicPower needs n >= 1 and d >= 1")
        self.n, self.d = n, d
        super().__init__(symbols or _default_symbols(d))
        if len(self.symbols) != d:
            raise ValueError("need exactly d symbols")

    @property
    def identity(self):
        return (0,) * self.d

    def multiply(self, x, y):
        return tuple((a + b) % self.n for a, b in zip(x, y))

    def inverse(self, x):
        return tuple((-a) % self.n for a in x)

    def generator(self, symbol):
        i = self.symbols.index(symbol)
        return tuple((1 % self.n) if j == i else 0 for j in range(self.d))

    def normal_form(self, g):
        letters: list[Letter] = []
        for sym, c in zip(self.symbols, g):
            c %= self.n
            # a^c and a^-(n-c) are both geodesic at a tie; a sorts first
            if c <= self.n - c:
                letters.extend([(sym, 1)] * c)
            else:
                letters.extend([(sym, -1)] * (self.n - c))
        return Word(tuple(letters))

    def params(self):
        return {"n": self.n, "d": self.d}


class FreeGroup(GroupModel):
    """Free group of rank k; elements are freely reduced tuples of signed ints.

    Generator ``i`` is encoded as ``i + 1`` and its inverse as ``-(i + 1)``.
    """

    kind = "FreeGroup"

    def __init__(self, k: int, symbols: Sequence[str] | None = None):
        if k < 1:
            raise ValueError("FreeGroup needs k >= 1")
        self.k = k
        super().__init__(symbols or _default_symbols(k))
        if len(self.symbols) != k:
            raise ValueError("need exactly k symbols")

    @property
    def identity(self):
        return ()

    def multiply(self, x, y):
        out = list(x)
        for c in y:
            if out and out[-1] == -c:
                out.pop()
            else:
                out.append(c)
        return tuple(out)

    def inverse(self, x):
        return tuple(-c for c in reversed(x))

    def generator(self, symbol):
        return (self.symbols.index(symbol) + 1,)

    def normal_form(self, g):
        return Word(tuple((self.symbols[abs(c) - 1], 1 if c > 0 else -1) for c in g))

    def params(self):
        return {"k": self.k}


class _FiniteBFSMixin:
    """Shortlex normal forms for finite groups by a one-off BFS of the Cayley graph."""

    _nf_table: dict | None = None

    def _build_nf_table(self):
        table = {self.identity: Word()}
        queue = deque([self.identity])
        letters = self.generating_set.letters
        while queue:
            g = queue.popleft()
            w = table[g]
            for sym, e in letters:
                # right-extending the word multiplies on the right
                h = self.multiply(g, self.letter(sym, e))
                if h not in table:
                    table[h] = Word(w.letters + ((sym, e),))
                    queue.append(h)
        self._nf_table = table

    def normal_form(self, g):
        if self._nf_table is None:
            self._build_nf_table()
        try:
            return self._nf_table[g]
        except KeyError:
            raise ValueError(f"{g!r} is not an element of {self!r}") from None

    def elements(self) -> list:
        if self._nf_table is None:
            self._build_nf_table()
        return list(self._nf_table)


class SymmetricGroup(_FiniteBFSMixin, GroupModel):
    """Sym(m) generated by the transposition (0 1) and the m-cycle i -> i+1.

    Elements are image tuples; ``multiply(x, y)`` is ``x o y`` (apply y first).
    """

    kind = "SymmetricGroup"

    def __init__(self, m: int, symbols: Sequence[str] | None = None):
        if m < 2:
            raise ValueError("SymmetricGroup needs m >= 2")
        self.m = m
        super().__init__(symbols or _default_symbols(2))
        if len(self.symbols) != 2:
            raise ValueError("need exactly 2 symbols")

    @property
    def identity(self):
        return tuple(range(self.m))

    def multiply(self, x, y):
        return tuple(x[i] for i in y)

    def inverse(self, x):
        out = [0] * self.m
        for i, xi in enumerate(x):
            out[xi] = i
        return tuple(out)

    def generator(self, symbol):
        if symbol == self.symbols[0]:
            t = list(range(self.m))
            t[0], t[1] = 1, 0
            return tuple(t)
        if symbol == self.symbols[1]:
            return tuple((i + 1) % self.m for i in range(self.m))
        raise ValueError(f"unknown generator symbol {symbol!r}")

    def params(self):
        return {"m": self.m}


class DirectProduct(GroupModel):
    """Direct product of bundled models; factor symbols get a ``_<i>`` suffix.

    Normal forms concatenate the factor normal forms; these are geodesic
    because letters from different factors commute.
    """

    kind = "DirectProduct"

    def __init__(self, factors: Sequence[GroupModel]):
        if not factors:
            raise ValueError("DirectProduct needs at least one factor")
        self.factors = tuple(factors)
        self._owner: dict[str, tuple[int, str]] = {}
        symbols = []
        for i, f in enumerate(self.factors):
            for s in f.symbols:
                name = f"{s}_{i}"
                self._owner[name] = (i, s)
                symbols.append(name)
        super().__init__(symbols)

    @property
    def identity(self):
        return tuple(f.identity for f in self.factors)

    def multiply(self, x, y):
        return tuple(f.multiply(a, b) for f, a, b in zip(self.factors, x, y))

    def inverse(self, x):
        return tuple(f.inverse(a) for f, a in zip(self.factors, x))

    def generator(self, symbol):
        i, s = self._owner[symbol]
        return tuple(f.generator(s) if j == i else f.identity for j, f in enumerate(self.factors))

    def normal_form(self, g):
        letters: list[Letter] = []
        for i, (f, a) in enumerate(zip(self.factors, g)):
            letters.extend((f"{s}_{i}", e) for s, e in f.normal_form(a))
        return Word(tuple(letters))

    def params(self):
        return {"factors": [f.spec() for f in self.factors]}


_KINDS = {
    "FreeAbelian": FreeAbelian,
    "FreeGroup": FreeGroup,
    "FiniteCyclicPower": FiniteCyclicPower,
    "SymmetricGroup": SymmetricGroup,
}


def model_from_spec(spec: dict) -> GroupModel:
    """Inverse of ``GroupModel.spec``."""
    kind = spec.get("kind")
    params = dict(spec.get("params", {}))
    if kind == "DirectProduct":
        return DirectProduct([model_from_spec(f) for f in params["factors"]])
    if kind not in _KINDS:
        raise ValueError(f"unknown group kind {kind!r}")
    gens = spec.get("generators")
    try:
        return _KINDS[kind](**params, symbols=gens)
    except TypeError as exc:
        raise ValueError(f"bad parameters for {kind}: {params}") from exc


def parse_model(text: str) -> GroupModel:
    """Parse compact CLI notation such as ``FreeAbelian:2`` or ``FiniteCyclicPower:5,2``."""
    kind, _, rest = text.partition(":")
    args = [int(a) for a in rest.split(",") if a.strip()]
    if kind == "DirectProduct":
        raise ValueError("DirectProduct must be given as a JSON spec")
    if kind not in _KINDS:
        raise ValueError(f"unknown group kind {kind!r}")
    try:
        return _KINDS[kind](*args)
    except TypeError as exc:
        raise ValueError(f"bad parameters for {kind}: {args}") from exc


def _check_word(model: GroupModel, w: Word) -> None:
    for sym, e in w:
        if sym not in model.generating_set:
            raise ValueError(f"unknown generator symbol {sym!r} for {model!r}")
        if e not in (1, -1):
            raise ValueError(f"letter exponent must be +-1, got {e}")


def evaluate_word(model: GroupModel, w: Word | str):
    """Product of the letters of ``w`` from left to right."""
    if isinstance(w, str):
        w = Word.parse(w)
    _check_word(model, w)
    g = model.identity
    for sym, e in w:
        g = model.multiply(g, model.letter(sym, e))
    return g


def is_identity(model: GroupModel, w: Word | str) -> bool:
    return evaluate_word(model, w) == model.identity


def word_length(model: GroupModel, g) -> int:
    return len(model.normal_form(g))


def cayley_ball(model: GroupModel, r: int, cap: int = DEFAULT_BALL_CAP) -> RootedBall:
    """Ball of radius ``r`` about the identity in Cay(model, S).

    Vertices are numbered in BFS order (root 0); ``ball.elements[i]`` is the
    group element of vertex ``i``.  Edges ``g -> s*g`` labelled ``s`` are kept
    whenever both ends lie in the ball.
    """
    if r < 0:
        raise ValueError("radius must be >= 0")
    index = {model.identity: 0}
    elements = [model.identity]
    depth = [0]
    gens = [(s, model.generator(s), model.inverse(model.generator(s))) for s in model.symbols]
    frontier = [model.identity]
    for t in range(1, r + 1):
        nxt = []
        for g in frontier:
            for _, a, a_inv in gens:
                for h in (model.multiply(a, g), model.multiply(a_inv, g)):
                    if h not in index:
                        if len(elements) >= cap:
                            raise ResourceLimitError(
                                f"Cayley ball of radius {r} exceeds the cap of {cap} vertices", cap=cap
                            )
                        index[h] = len(elements)
                        elements.append(h)
                        depth.append(t)
                        nxt.append(h)
        frontier = nxt
    edges = []
    for i, g in enumerate(elements):
        for s, a, _ in gens:
            j = index.get(model.multiply(a, g))
            if j is not None:
                edges.append((i, j, s))
    graph = LabeledGraph(len(elements), edges, labels=model.symbols, directed=True)
    return RootedBall(graph, root=0, radius=r, elements=elements, depth=np.asarray(depth, dtype=np.int64))


def ball_elements(model: GroupModel, r: int, cap: int = DEFAULT_BALL_CAP) -> list:
    """The elements of B_r(e) in BFS order."""
    return cayley_ball(model, r, cap=cap).elements


def regular_action_permutations(model: GroupModel) -> tuple[list, dict[str, np.ndarray]]:
    """Left-regular action of a finite model: σ(s)(x) = s·x on its element list."""
    if not isinstance(model, _FiniteBFSMixin) and not isinstance(model, FiniteCyclicPower):
        raise ValueError(f"{model!r} is not a bundled finite model")
    if isinstance(model, FiniteCyclicPower):
        elements = list(itertools.product(range(model.n), repeat=model.d))
    else:
        elements = model.elements()
    index = {g: i for i, g in enumerate(elements)}
    perms = {
        s: np.array([index[model.multiply(model.generator(s), g)] for g in elements], dtype=np.int64)
        for s in model.symbols
    }
    return elements, perms
