"""E_R-Laplacians, spectral gaps, sweep cuts and CND kernel checks."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh, splu

from .errors import ConvergenceError
from .graph import LabeledGraph

DENSE_LIMIT = 512
PSD_FLOOR = -1e-9


@dataclass
class SparseLaplacian:
    matrix: sp.csr_matrix = field(repr=False)
    R: int
    d_max: int

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def components(self) -> tuple[int, np.ndarray]:
        pattern = self.matrix.copy()
        pattern.setdiag(0)
        pattern.eliminate_zeros()
        if self.n == 0:
            return 0, np.zeros(0, dtype=np.int64)
        k, labels = connected_components(pattern, directed=False)
        return int(k), labels


def entourage_adjacency(graph: LabeledGraph, R: int) -> sp.csr_matrix:
    """0/1 matrix of pairs with ``0 < d(x, y) <= R``; each unordered pair counted once."""
    n = graph.n
    if R <= 0 or n == 0:
        return sp.csr_matrix((n, n), dtype=np.int64)
    step = graph.adjacency() + sp.identity(n, dtype=np.int64, format="csr")
    reach = sp.identity(n, dtype=np.int64, format="csr")
    for _ in range(R):
        reach = reach @ step
        reach.data[:] = 1
    reach = reach.tolil()
    reach.setdiag(0)
    reach = reach.tocsr()
    reach.eliminate_zeros()
    return reach


def laplacian(graph: LabeledGraph, R: int = 1) -> SparseLaplacian:
    """Δ^{E_R}: -1 for each pair at distance 1..R, diagonal = number of such partners."""
    if R < 0:
        raise ValueError("R must be >= 0")
    a = entourage_adjacency(graph, R).astype(np.float64)
    deg = np.asarray(a.sum(axis=1)).ravel()
    L = (sp.diags(deg) - a).tocsr()
    return SparseLaplacian(L, R, int(deg.max()) if deg.size else 0)


def _dense_spectrum(L: SparseLaplacian) -> tuple[np.ndarray, np.ndarray]:
    return np.linalg.eigh(L.toarray())


def _kernel_basis(L: SparseLaplacian) -> np.ndarray:
    k, labels = L.components()
    Q = np.zeros((L.n, k))
    for c in range(k):
        mask = labels == c
        Q[mask, c] = 1.0 / np.sqrt(mask.sum())
    return Q


def fiedler(
    L: SparseLaplacian,
    components: int | None = None,
    method: str = "auto",
    tol: float = 1e-8,
) -> tuple[float, np.ndarray]:
    """Smallest eigenvalue above the kernel together with an eigenvector.

    The kernel is spanned by component indicators.  The iterative route runs
    Lanczos on ``P (L + δI)^-1 P`` where ``P`` projects the kernel away; its
    top eigenvalue is ``1 / (λ₂ + δ)``.
    """
    n = L.n
    k_true = L.components()[0]
    if components is None:
        components = k_true
    if components >= n:
        raise ValueError(f"no eigenvalue above a kernel of dimension {components} for n={n}")
    if method == "auto":
        method = "dense" if n <= DENSE_LIMIT else "iterative"
    if method == "dense":
        vals, vecs = _dense_spectrum(L)
        return float(vals[components]), vecs[:, components]
    if method != "iterative":
        raise ValueError(f"unknown method {method!r}")
    if components != k_true:
        raise ValueError(f"iterative solver needs the true component count {k_true}, got {components}")

    Q = _kernel_basis(L)
    delta = 1e-3
    lu = splu((L.matrix + delta * sp.identity(n, format="csr")).tocsc())

    def project(x):
        return x - Q @ (Q.T @ x)

    op = LinearOperator((n, n), matvec=lambda x: project(lu.solve(project(np.ravel(x)))), dtype=np.float64)
    # fixed start vector keeps runs reproducible
    v0 = project(np.cos(np.arange(n) * 1.6180339887) + 0.1)
    try:
        mu, vec = eigsh(op, k=1, which="LA", v0=v0, tol=tol * 1e-4, maxiter=10 * n)
    except ArpackNoConvergence as exc:
        bound = None
        if exc.eigenvectors is not None and exc.eigenvectors.size:
            vs = project(exc.eigenvectors)
            rq = [float(v @ (L.matrix @ v) / (v @ v)) for v in vs.T if v @ v > 0]
            bound = min(rq) if rq else None
        raise ConvergenceError(f"eigensolver did not converge within {10 * n} iterations", bound=bound) from exc
    lam = 1.0 / float(mu[0]) - delta
    return lam, vec[:, 0]


def spectral_gap(L: SparseLaplacian, components: int | None = None, method: str = "auto", tol: float = 1e-8) -> float:
    return fiedler(L, components, method, tol)[0]


def spectrum(L: SparseLaplacian) -> np.ndarray:
    return np.linalg.eigvalsh(L.toarray())


@dataclass
class CheegerResult:
    cut_set: np.ndarray
    h: Fraction
    lambda2: float
    boundary: int


def cheeger_sweep(L: SparseLaplacian, graph: LabeledGraph | None = None, method: str = "auto") -> CheegerResult:
    """Best ratio cut among level sets of the Fiedler vector.

    ``h`` is min over prefixes of ``|∂A| / min(|A|, n - |A|)``; the returned
    set is the side with at most n/2 vertices.  Edges are the pairs of the
    Laplacian's entourage.
    """
    n = L.n
    if n < 2:
        raise ValueError("need at least two vertices")
    if L.components()[0] != 1:
        raise ValueError("cheeger_sweep needs a connected graph")
    lam, vec = fiedler(L, 1, method)
    adj = L.matrix.copy()
    adj.setdiag(0)
    adj.eliminate_zeros()
    adj.data[:] = 1
    deg = np.diff(adj.indptr)
    order = np.argsort(vec, kind="stable")
    in_a = np.zeros(n, dtype=bool)
    cut = 0
    best = None
    for k, v in enumerate(order[:-1], start=1):
        nb = adj.indices[adj.indptr[v]:adj.indptr[v + 1]]
        cut += int(deg[v]) - 2 * int(in_a[nb].sum())
        in_a[v] = True
        ratio = Fraction(cut, min(k, n - k))
        if best is None or ratio < best[0]:
            best = (ratio, k, cut)
    ratio, k, cut = best
    side = order[:k] if k <= n - k else order[k:]
    return CheegerResult(np.sort(side), ratio, lam, cut)


@dataclass
class ExpanderReport:
    c: float
    R: int
    stages: list[dict]

    @property
    def passed(self) -> bool:
        return all(s["pass"] for s in self.stages)

    def to_text(self) -> str:
        lines = [f"expander indicator: c={self.c:g} R={self.R} -> {'PASS' if self.passed else 'FAIL'}"]
        for s in self.stages:
            lines.append(f"  stage {s['stage']}: n={s['n']} lambda2={s['lambda2']:.10g} {'pass' if s['pass'] else 'fail'}")
        return "\n".join(lines)


def expander_certificate(graphs: Sequence[LabeledGraph], c: float, R: int = 1) -> ExpanderReport:
    """Finite-stage gap indicator: pass iff every stage has λ₂(Δ^{E_R}) >= c."""
    graphs = list(getattr(graphs, "graphs", graphs))
    stages = []
    for i, g in enumerate(graphs):
        lam = spectral_gap(laplacian(g, R))
        stages.append({"stage": i, "n": g.n, "lambda2": lam, "pass": bool(lam >= c)})
    return ExpanderReport(c, R, stages)


# conditionally negative definite kernels


@dataclass
class KernelTable:
    values: np.ndarray
    points: list | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2 or self.values.shape[0] != self.values.shape[1]:
            raise ValueError("kernel must be a square matrix")


def _check_kernel(K: np.ndarray, atol: float = 1e-12):
    scale = max(1.0, float(np.abs(K).max())) if K.size else 1.0
    if not np.allclose(K, K.T, rtol=0, atol=atol * scale):
        raise ValueError("kernel is not symmetric")
    if not np.allclose(np.diag(K), 0, rtol=0, atol=atol * scale):
        raise ValueError("kernel diagonal must be zero")


def cnd_violation(K) -> float:
    """Largest eigenvalue of the kernel compressed to mean-zero vectors."""
    K = K.values if isinstance(K, KernelTable) else np.asarray(K, dtype=np.float64)
    _check_kernel(K)
    n = K.shape[0]
    if n < 2:
        return 0.0
    P = np.eye(n) - 1.0 / n
    return float(np.linalg.eigvalsh(P @ K @ P).max())


def verify_cnd(K, tol: float = 1e-9) -> bool:
    """True iff Σ λ_i λ_j K(x_i, x_j) <= tol for all unit λ with Σ λ_i = 0."""
    return cnd_violation(K) <= tol


def _diameter_bounded_subset(D: np.ndarray, R: float, rng: np.random.Generator, max_points: int) -> np.ndarray:
    n = D.shape[0]
    x = int(rng.integers(n))
    cand = np.flatnonzero((D[x] >= 0) & (D[x] <= R))
    cand = cand[rng.permutation(cand.size)]
    chosen = [x]
    for y in cand:
        if y == x:
            continue
        if all(0 <= D[y, z] <= R for z in chosen):
            chosen.append(int(y))
            if len(chosen) >= max_points:
                break
    return np.array(sorted(chosen))


@dataclass
class EmbeddingReport:
    stages: list[dict]

    @property
    def passed(self) -> bool:
        return all(s["pass"] for s in self.stages)


def verify_asymptotic_embedding(
    graphs: Sequence[LabeledGraph],
    kernels: Sequence,
    rho1: Callable,
    rho2: Callable,
    radii: Sequence[float],
    samples: int = 20,
    seed: int = 0,
    tol: float = 1e-9,
    max_points: int = 64,
) -> EmbeddingReport:
    """Per stage: sandwich bounds on every pair x != y, CND on sampled subsets of diameter <= R_i."""
    graphs = list(getattr(graphs, "graphs", graphs))
    if not (len(graphs) == len(kernels) == len(radii)):
        raise ValueError("need one kernel and one radius per stage")
    rng = np.random.default_rng(seed)
    out = []
    for i, (g, K, R) in enumerate(zip(graphs, kernels, radii)):
        K = K.values if isinstance(K, KernelTable) else np.asarray(K, dtype=np.float64)
        D = g.all_pairs_distances()
        if (D < 0).any():
            raise ValueError(f"stage {i} is disconnected")
        lo = np.vectorize(rho1, otypes=[float])(D)
        hi = np.vectorize(rho2, otypes=[float])(D)
        # distinct pairs only; the diagonal of a kernel is zero by definition
        bad = ((K < lo - tol) | (K > hi + tol)) & ~np.eye(g.n, dtype=bool)
        rec = {"stage": i, "n": g.n, "R": R, "sandwich": True, "cnd": True, "counterexample": None}
        if bad.any():
            x, y = map(int, np.argwhere(bad)[0])
            rec["sandwich"] = False
            rec["counterexample"] = {"pair": (x, y), "distance": int(D[x, y]), "K": float(K[x, y])}
        else:
            for _ in range(samples):
                subset = _diameter_bounded_subset(D, R, rng, max_points)
                if not verify_cnd(K[np.ix_(subset, subset)], tol):
                    rec["cnd"] = False
                    rec["counterexample"] = {"subset": subset.tolist()}
                    break
        rec["pass"] = rec["sandwich"] and rec["cnd"]
        out.append(rec)
    return EmbeddingReport(out)
