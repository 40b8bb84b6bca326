"""Order, rank and relative rank transforms.

Ties are broken by position: among equal values the one with the smaller
index receives the smaller rank. The rank transform is therefore always a
permutation of ``1..n``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ._validation import check_bivariate

__all__ = [
    "Sample",
    "RelativeRankMatrix",
    "order_transform",
    "rank_transform",
    "relative_ranks",
    "RankTransformer",
]


def order_transform(x):
    """Coordinates of ``x`` in increasing order (the k-th entry is the k-th order statistic)."""
    return np.sort(np.asarray(x, dtype=float), kind="stable")


def rank_transform(x):
    """Ranks ``1..n`` of the entries of ``x`` with minimal-index tie breaking."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("rank_transform expects a non-empty 1-d vector")
    if np.any(np.isnan(x)):
        raise ValueError("cannot rank NaN values")
    order = np.argsort(x, kind="stable")
    ranks = np.empty(x.size, dtype=np.int64)
    ranks[order] = np.arange(1, x.size + 1)
    return ranks


@dataclass(frozen=True)
class Sample:
    """Bivariate sample stored as a ``2 x n`` matrix (row i is coordinate i)."""

    rows: np.ndarray

    def __post_init__(self):
        rows = np.array(self.rows, dtype=float)
        if rows.ndim != 2 or rows.shape[0] != 2:
            raise ValueError(f"sample rows must have shape (2, n), got {rows.shape}")
        if rows.shape[1] < 2:
            raise ValueError("a sample needs at least two observations")
        if not np.all(np.isfinite(rows)):
            raise ValueError("sample contains non-finite values")
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)

    @classmethod
    def from_columns(cls, X):
        """Build from an ``(n_samples, 2)`` array in the usual data layout."""
        return cls(check_bivariate(X).T)

    @property
    def n(self):
        return self.rows.shape[1]


@dataclass(frozen=True)
class RelativeRankMatrix:
    """Relative ranks ``R / (n + 1)`` kept as integer ranks plus the denominator."""

    ranks: np.ndarray

    def __post_init__(self):
        ranks = np.array(self.ranks, dtype=np.int64)
        if ranks.ndim != 2 or ranks.shape[0] != 2 or ranks.shape[1] < 1:
            raise ValueError(f"rank matrix must have shape (2, n), got {ranks.shape}")
        expected = np.arange(1, ranks.shape[1] + 1)
        for row in ranks:
            if not np.array_equal(np.sort(row), expected):
                raise ValueError("each row must be a permutation of 1..n")
        ranks.setflags(write=False)
        object.__setattr__(self, "ranks", ranks)

    @property
    def n(self):
        return self.ranks.shape[1]

    @property
    def denominator(self):
        return self.n + 1

    @property
    def values(self):
        """Floating point relative ranks, shape ``(2, n)``."""
        return self.ranks / self.denominator

    def fractions(self):
        """List of the ``n`` points ``(U_1k, U_2k)`` as ``Fraction`` pairs."""
        d = self.denominator
        return [(Fraction(int(a), d), Fraction(int(b), d)) for a, b in self.ranks.T]

    def row_sums(self):
        d = self.denominator
        return tuple(Fraction(int(row.sum()), d) for row in self.ranks)

    def swap_rows(self):
        return RelativeRankMatrix(self.ranks[::-1])

    def reflect_first(self):
        """Replace the first row ranks ``R`` by ``n + 1 - R``."""
        return RelativeRankMatrix(np.stack([self.denominator - self.ranks[0], self.ranks[1]]))


def relative_ranks(sample):
    """Row-wise relative rank transform of a ``Sample`` (or a ``2 x n`` array)."""
    if not isinstance(sample, Sample):
        sample = Sample(sample)
    return RelativeRankMatrix(np.stack([rank_transform(row) for row in sample.rows]))


class RankTransformer(TransformerMixin, BaseEstimator):
    """Map each column to its relative ranks ``R / (n + 1)``.

    The transform is computed within the batch passed to ``transform``; ``fit``
    only records the number of features.
    """

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64, ensure_all_finite=True)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        X = check_array(X, dtype=np.float64, ensure_all_finite=True)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        n = X.shape[0]
        return np.column_stack([rank_transform(col) for col in X.T]) / (n + 1)
