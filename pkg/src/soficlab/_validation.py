"""Argument checks shared by the estimator wrappers."""
from __future__ import annotations

import numbers

import numpy as np

from .graph import LabeledGraph


def check_radius(r, name: str = "radius", minimum: int = 0) -> int:
    if isinstance(r, bool) or not isinstance(r, numbers.Integral) or r < minimum:
        raise ValueError(f"{name} must be an integer >= {minimum}, got {r!r}")
    return int(r)


def check_graph(g) -> LabeledGraph:
    if not isinstance(g, LabeledGraph):
        raise TypeError(f"expected a LabeledGraph, got {type(g).__name__}")
    return g


def check_graphs(X) -> list[LabeledGraph]:
    """Accept a graph, a sequence of graphs, or anything with a ``graphs`` attribute."""
    if isinstance(X, LabeledGraph):
        return [X]
    graphs = list(getattr(X, "graphs", X))
    if not graphs:
        raise ValueError("no graphs given")
    return [check_graph(g) for g in graphs]


def check_probability_vector(p, n: int | None = None, tol: float = 1e-12) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1 or (n is not None and p.size != n):
        raise ValueError(f"expected a vector of length {n}")
    if (p < 0).any() or abs(p.sum() - 1) > tol:
        raise ValueError("not a probability vector")
    return p
