"""Quasi-isometry witnesses between graph families and QI-sensitive profiles."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.sparse.csgraph import shortest_path

from .generators import girth
from .graph import LabeledGraph
from .spectral import laplacian, spectral_gap

EXACT_LIMIT = 2000
INF = math.inf


@dataclass
class QIWitness:
    """Measured constants of a vertex map: d/L - A <= d' <= L d + A, codensity."""

    L: Fraction | float
    A: Fraction | float
    codensity: int
    L_pair: tuple[int, int] | None = None
    A_pair: tuple[int, int] | None = None
    pairs_checked: int = 0
    exact: bool = True

    def constants(self) -> tuple:
        return (self.L, self.A, self.codensity)


def _pair_sample(n: int, samples: int, rng) -> tuple[np.ndarray, np.ndarray]:
    xs = rng.integers(n, size=samples)
    ys = rng.integers(n, size=samples)
    keep = xs != ys
    return xs[keep], ys[keep]


def _sampled_distances(G: LabeledGraph, us: np.ndarray, vs: np.ndarray, chunk: int = 256) -> np.ndarray:
    """d(us[k], vs[k]), one batched BFS per block of distinct sources."""
    out = np.empty(us.size, dtype=np.int64)
    sources, inverse = np.unique(us, return_inverse=True)
    adj = G.adjacency()
    for lo in range(0, sources.size, chunk):
        block = sources[lo:lo + chunk]
        D = shortest_path(adj, directed=False, unweighted=True, indices=block)
        sel = (inverse >= lo) & (inverse < lo + block.size)
        out[sel] = D[inverse[sel] - lo, vs[sel]].astype(np.int64)
    return out


def verify_qi(
    X: LabeledGraph,
    Y: LabeledGraph,
    f: Sequence[int],
    samples: int = 200_000,
    seed: int = 0,
) -> QIWitness:
    """Constants of ``f: V(X) -> V(Y)``.

    L is the largest ratio d'/d over pairs (``inf`` when f collapses
    everything, with the collapsed pair reported); A is the smallest additive
    constant making the lower bound hold with that L.  Both are attained by
    the reported pairs.  Exact for up to 2000 vertices, seeded pair sampling
    above.
    """
    f = np.asarray(f, dtype=np.int64)
    if f.shape != (X.n,) or (f < 0).any() or (f >= Y.n).any():
        raise ValueError("f must map every vertex of X to a vertex of Y")
    if not X.is_connected() or not Y.is_connected():
        raise ValueError("verify_qi needs connected graphs")

    exact = X.n <= EXACT_LIMIT and Y.n <= EXACT_LIMIT
    if exact:
        DX = X.all_pairs_distances()
        DY = Y.all_pairs_distances()
        xs, ys = np.triu_indices(X.n, k=1)
        d = DX[xs, ys]
        dp = DY[f[xs], f[ys]]
    else:
        rng = np.random.default_rng(seed)
        xs, ys = _pair_sample(X.n, samples, rng)
        d = _sampled_distances(X, xs, ys)
        dp = _sampled_distances(Y, f[xs], f[ys])

    codensity = int(Y.bfs(np.unique(f).tolist()).max())
    if xs.size == 0:
        return QIWitness(Fraction(1), Fraction(0), codensity, pairs_checked=0, exact=exact)

    # ratios of integers below 2^26 are separated far beyond float resolution
    k = int(np.argmax(dp / d))
    if dp[k] == 0:
        return QIWitness(INF, INF, codensity, L_pair=(int(xs[0]), int(ys[0])), A_pair=None,
                         pairs_checked=int(xs.size), exact=exact)
    L = Fraction(int(dp[k]), int(d[k]))
    # A = max(0, max d/L - d') = max(0, max (d*den - d'*num) / num)
    slack = d * L.denominator - dp * L.numerator
    j = int(np.argmax(slack))
    A = max(Fraction(0), Fraction(int(slack[j]), L.numerator))
    return QIWitness(L, A, codensity, (int(xs[k]), int(ys[k])), (int(xs[j]), int(ys[j])), int(xs.size), exact)


@dataclass
class GrowthReport:
    sizes: list[int]
    recursion_ok: bool
    bound_ok: bool
    violations: list[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.recursion_ok and self.bound_ok


def neighborhood_growth_check(Y: LabeledGraph, A: Sequence[int], n: int) -> GrowthReport:
    """Check N_m(A) = N_1(N_{m-1}(A)) and |N_m(A)| <= (1 + deg_max)^m |A| for m <= n."""
    A = sorted(set(int(a) for a in A))
    if not A:
        raise ValueError("A must be nonempty")
    dist = Y.bfs(A)
    deg_max = int(Y.degrees().max()) if Y.n else 0
    current = np.zeros(Y.n, dtype=bool)
    current[A] = True
    sizes = [len(A)]
    report = GrowthReport(sizes, True, True)
    for m in range(1, n + 1):
        step = Y.bfs(np.flatnonzero(current).tolist(), cutoff=1) >= 0
        direct = (dist >= 0) & (dist <= m)
        if not np.array_equal(step, direct):
            report.recursion_ok = False
            report.violations.append({"m": m, "kind": "recursion",
                                      "witness": int(np.flatnonzero(step != direct)[0])})
        size = int(direct.sum())
        if size > (1 + deg_max) ** m * len(A):
            report.bound_ok = False
            report.violations.append({"m": m, "kind": "growth", "size": size})
        sizes.append(size)
        current = step
    return report


@dataclass
class InvariantProfile:
    degree_histogram: dict[int, int]
    girth: float
    diameter: float
    diameter_exact: bool
    lambda2: float
    growth: list[Fraction]

    def growth_rates(self) -> dict[str, float]:
        """Polynomial degree and exponential rate read off the ball-growth sequence."""
        g = [float(x) for x in self.growth]
        r = len(g) - 1
        if r < 2:
            return {"polynomial_degree": float("nan"), "exponential_rate": float("nan")}
        half = max(1, r // 2)
        poly = math.log(g[r] / g[half]) / math.log(r / half) if r > half else float("nan")
        expo = (g[r] / g[1]) ** (1.0 / (r - 1)) if r > 1 else float("nan")
        return {"polynomial_degree": poly, "exponential_rate": expo}


def _diameter(graph: LabeledGraph) -> tuple[float, bool]:
    if graph.n == 0:
        return 0.0, True
    if not graph.is_connected():
        return INF, True
    if graph.n <= EXACT_LIMIT:
        return float(graph.all_pairs_distances().max()), True
    d0 = graph.bfs(0)
    far = int(np.argmax(d0))
    return float(graph.bfs(far).max()), False


def invariant_profile(graph: LabeledGraph, r: int) -> InvariantProfile:
    deg = graph.degrees()
    values, counts = np.unique(deg, return_counts=True)
    diam, exact = _diameter(graph)
    k = graph.components()[0]
    lam = spectral_gap(laplacian(graph, 1), k) if graph.n > k else float("nan")
    growth = []
    for t in range(r + 1):
        total = sum(len(graph.ball(v, t)) for v in range(graph.n))
        growth.append(Fraction(total, graph.n))
    return InvariantProfile(
        {int(v): int(c) for v, c in zip(values, counts)}, girth(graph), diam, exact, lam, growth
    )


@dataclass
class Verdict:
    status: str  # VERIFIED | REFUTED-BY-WITNESS-FAILURE | INCONCLUSIVE
    constants: tuple | None = None
    stage: int | None = None
    pair: tuple | None = None
    per_stage: list[dict] = field(default_factory=list)
    deltas: dict = field(default_factory=dict)

    def to_text(self) -> str:
        if self.status == "VERIFIED":
            L, A, c = self.constants
            head = f"VERIFIED(L={_fmt(L)}, A={_fmt(A)}, codensity={c})"
        elif self.status == "REFUTED-BY-WITNESS-FAILURE":
            head = f"REFUTED-BY-WITNESS-FAILURE(stage={self.stage}, pair={self.pair})"
        else:
            head = "INCONCLUSIVE"
        lines = [head]
        for rec in self.per_stage:
            lines.append("  " + " ".join(f"{k}={_fmt(v)}" for k, v in rec.items()))
        for k, v in self.deltas.items():
            lines.append(f"  delta {k}: {_fmt(v)}")
        if self.status == "INCONCLUSIVE":
            lines.append("  profile differences are refutation evidence only, not a proof")
        return "\n".join(lines)


def _fmt(v):
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else str(v.numerator)
    if isinstance(v, float):
        return "inf" if math.isinf(v) else f"{v:.10g}"
    return str(v)


def compare_families(
    famX,
    famY,
    witnesses: Sequence[Sequence[int]] | None = None,
    bound: tuple | None = None,
    profile_radius: int = 4,
) -> Verdict:
    """Verify per-stage witnesses, or compare invariant profiles when none are given.

    With witnesses, every stage's (L, A, codensity) must stay within
    ``bound``; when no bound is declared the first stage's constants serve as
    the claimed uniform bound.
    """
    gx = list(getattr(famX, "graphs", famX))
    gy = list(getattr(famY, "graphs", famY))
    if witnesses is not None:
        if not (len(gx) == len(gy) == len(witnesses)):
            raise ValueError("stage counts of families and witnesses differ")
        per_stage = []
        worst = [Fraction(0), Fraction(0), 0]
        for i, (X, Y, f) in enumerate(zip(gx, gy, witnesses)):
            w = verify_qi(X, Y, f)
            per_stage.append({"stage": i, "L": w.L, "A": w.A, "codensity": w.codensity})
            if w.L == INF:
                return Verdict("REFUTED-BY-WITNESS-FAILURE", stage=i, pair=w.L_pair, per_stage=per_stage)
            if bound is None:
                bound = w.constants()
            if w.L > bound[0]:
                return Verdict("REFUTED-BY-WITNESS-FAILURE", stage=i, pair=w.L_pair, per_stage=per_stage)
            if w.A > bound[1]:
                return Verdict("REFUTED-BY-WITNESS-FAILURE", stage=i, pair=w.A_pair, per_stage=per_stage)
            if w.codensity > bound[2]:
                return Verdict("REFUTED-BY-WITNESS-FAILURE", stage=i, pair=None, per_stage=per_stage)
            worst = [max(worst[0], w.L), max(worst[1], w.A), max(worst[2], w.codensity)]
        return Verdict("VERIFIED", constants=tuple(worst), per_stage=per_stage)

    per_stage = []
    deltas = {}
    for i, (X, Y) in enumerate(zip(gx, gy)):
        px, py = invariant_profile(X, profile_radius), invariant_profile(Y, profile_radius)
        rx, ry = px.growth_rates(), py.growth_rates()
        per_stage.append({
            "stage": i,
            "lambda2_X": px.lambda2, "lambda2_Y": py.lambda2,
            "girth_X": px.girth, "girth_Y": py.girth,
            "poly_X": rx["polynomial_degree"], "poly_Y": ry["polynomial_degree"],
            "exp_X": rx["exponential_rate"], "exp_Y": ry["exponential_rate"],
        })
    if per_stage:
        last = per_stage[-1]
        deltas = {
            "lambda2": last["lambda2_Y"] - last["lambda2_X"],
            "growth_exponential_rate": last["exp_Y"] - last["exp_X"],
            "growth_polynomial_degree": last["poly_Y"] - last["poly_X"],
        }
    return Verdict("INCONCLUSIVE", per_stage=per_stage, deltas=deltas)
