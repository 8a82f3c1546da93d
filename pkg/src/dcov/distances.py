"""Pairwise Euclidean distance matrices with cached row/grand sums.

The O(n^2) estimator and the permutation tests consume distances only
through these matrices, so they are computed once and shared.  Distances
are always taken from coordinate differences (never the Gram-matrix
expansion), which makes them exactly translation invariant in floating
point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .errors import DataError

# Incremented on every pairwise_distances call; lets tests assert that a
# permutation test builds each distance matrix exactly once.
_pairwise_calls = 0


def pairwise_call_count() -> int:
    return _pairwise_calls


def reset_pairwise_call_count() -> None:
    global _pairwise_calls
    _pairwise_calls = 0


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric nonnegative n x n distance matrix plus cached aggregates.

    Attributes
    ----------
    entries : (n, n) ndarray with zero diagonal
    row_sums : (n,) ndarray, row_sums[i] = sum_j entries[i, j]
    grand_sum : float, sum of all entries
    source_dim : dimension of the points the matrix was built from
    """

    entries: np.ndarray
    row_sums: np.ndarray
    grand_sum: float
    source_dim: int

    @property
    def n(self) -> int:
        return self.entries.shape[0]


def _as_block(block) -> np.ndarray:
    a = np.asarray(block, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise DataError(f"expected an n x p block of coordinates, got shape {a.shape}")
    finite_rows = np.isfinite(a).all(axis=1)
    if not finite_rows.all():
        bad = int(np.flatnonzero(~finite_rows)[0])
        raise DataError(f"non-finite coordinate in row {bad}")
    return a


def pairwise_distances(block) -> DistanceMatrix:
    """Full Euclidean distance matrix of the rows of ``block``.

    Accepts an (n, p) array or a length-n vector (treated as n points in
    one dimension).  Rejects non-finite input, naming the offending row.
    """
    global _pairwise_calls
    a = _as_block(block)
    _pairwise_calls += 1
    entries = cdist(a, a)
    row_sums = entries.sum(axis=1)
    return DistanceMatrix(
        entries=entries,
        row_sums=row_sums,
        grand_sum=float(row_sums.sum()),
        source_dim=a.shape[1],
    )
