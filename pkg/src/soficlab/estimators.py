"""scikit-learn style wrappers over the functional API.

Inputs ``X`` are sequences of :class:`LabeledGraph` (or a family); outputs
are numpy arrays, so the wrappers compose with ``Pipeline``.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_graph, check_graphs, check_radius
from .amenability import hyperfinite_partition
from .local_stats import ball_distribution
from .spectral import laplacian, spectral_gap


class BallStatistics(TransformerMixin, BaseEstimator):
    """Frequencies of rooted r-ball isomorphism types.

    ``fit`` learns the vocabulary of canonical codes seen in the training
    graphs; ``transform`` gives one row of frequencies per graph, with mass on
    unseen types collected in the last column.
    """

    def __init__(self, radius: int = 1, cap: int = 512):
        self.radius = radius
        self.cap = cap

    def fit(self, X, y=None):
        r = check_radius(self.radius)
        vocab = set()
        for g in check_graphs(X):
            vocab.update(ball_distribution(g, r, cap=self.cap).counts)
        self.codes_ = sorted(vocab)
        self._index = {c: i for i, c in enumerate(self.codes_)}
        return self

    def transform(self, X):
        check_is_fitted(self, "codes_")
        graphs = check_graphs(X)
        out = np.zeros((len(graphs), len(self.codes_) + 1))
        for row, g in enumerate(graphs):
            dist = ball_distribution(g, self.radius, cap=self.cap)
            for code, c in dist.counts.items():
                out[row, self._index.get(code, len(self.codes_))] += c / dist.n
        return out


class SpectralProfile(TransformerMixin, BaseEstimator):
    """λ₂ of Δ^{E_R} for each R in ``radii``, one row per graph. Stateless."""

    def __init__(self, radii=(1,), method: str = "auto"):
        self.radii = radii
        self.method = method

    def fit(self, X, y=None):
        for R in self.radii:
            check_radius(R, "R", minimum=1)
        self.n_features_out_ = len(self.radii)
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_out_")
        graphs = check_graphs(X)
        out = np.empty((len(graphs), len(self.radii)))
        for i, g in enumerate(graphs):
            for j, R in enumerate(self.radii):
                out[i, j] = spectral_gap(laplacian(g, R), method=self.method) if g.n > 1 else np.nan
        return out


class HyperfinitePartitioner(ClusterMixin, BaseEstimator):
    """Partition one graph into parts of at most ``K`` vertices with few cut edges."""

    def __init__(self, K: int = 8, max_passes: int = 20):
        self.K = K
        self.max_passes = max_passes

    def fit(self, X, y=None):
        g = check_graph(X)
        K = check_radius(self.K, "K", minimum=1)
        part = hyperfinite_partition(g, K, self.max_passes)
        self.labels_ = part.labels(g.n)
        self.cut_ = part.cut
        self.n_parts_ = len(part.parts)
        return self
