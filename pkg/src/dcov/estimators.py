"""Unbiased distance-covariance estimators and the classical-covariance statistic.

Two routes to the same quantity are implemented: the O(n^4) average of the
24-term symmetric kernel over all 4-subsets, and the O(n^2) row-sum form.
They agree to floating-point accuracy on every sample, which the test
suite exploits as a cross-check in both directions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .distances import DistanceMatrix, pairwise_distances
from .errors import DataError, DomainError, SampleSizeError

# Splittings of {0,1,2,3} into two unordered pairs, as (i, j, k, l) with the
# first pair (i, j) and complementary pair (k, l); used for the cross term of
# the collapsed kernel.
_PAIR_SPLITS = (
    (0, 1, 2, 3),
    (0, 2, 1, 3),
    (0, 3, 1, 2),
    (1, 2, 0, 3),
    (1, 3, 0, 2),
    (2, 3, 0, 1),
)

_NAIVE_CHUNK = 200_000  # 4-subsets per vectorized batch


@dataclass(frozen=True)
class PairedSample:
    """n aligned observations of (X, Y) with X in R^p and Y in R^q."""

    x_block: np.ndarray
    y_block: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x_block, dtype=float)
        y = np.asarray(self.y_block, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        if y.ndim == 1:
            y = y[:, None]
        if x.ndim != 2 or y.ndim != 2:
            raise DataError("x_block and y_block must be 2-d (or 1-d vectors)")
        if x.shape[0] != y.shape[0]:
            raise DataError(
                f"row count mismatch: x has {x.shape[0]} rows, y has {y.shape[0]}"
            )
        if x.shape[0] < 1:
            raise DataError("empty sample")
        for name, block in (("x_block", x), ("y_block", y)):
            finite = np.isfinite(block).all(axis=1)
            if not finite.all():
                bad = int(np.flatnonzero(~finite)[0])
                raise DataError(f"non-finite value in {name} row {bad}")
        object.__setattr__(self, "x_block", x)
        object.__setattr__(self, "y_block", y)

    @property
    def n(self) -> int:
        return self.x_block.shape[0]

    @property
    def p(self) -> int:
        return self.x_block.shape[1]

    @property
    def q(self) -> int:
        return self.y_block.shape[1]


@dataclass(frozen=True)
class DCovEstimate:
    """A squared-distance-covariance estimate tagged with its provenance.

    ``standard_error`` is populated only by the Monte Carlo
    characteristic-function estimator; the distance-based estimators are
    deterministic.
    """

    value: float
    kind: str  # "naive-U" | "fast-U" | "cf-mc"
    n: int
    p: int
    q: int
    standard_error: float | None = None


def _point(pt, dim_name: str) -> np.ndarray:
    a = np.atleast_1d(np.asarray(pt, dtype=float))
    if a.ndim != 1:
        raise DataError(f"{dim_name}-part of a point must be a vector")
    return a


def kernel_batch(dx_sub: np.ndarray, dy_sub: np.ndarray) -> np.ndarray:
    """Symmetric 4-point kernel from (..., 4, 4) distance submatrices.

    Collapsing the 24-term sum over ordered distinct (i, j, k, l) by slot
    multiplicity gives (4 S - R + 2 T) / 12 with

        S = sum_{i<j} dx_ij dy_ij
        R = sum_i (row sums of dx) (row sums of dy)
        T = sum over pair splittings of dx_ij dy_kl.
    """
    s = 0.5 * (dx_sub * dy_sub).sum(axis=(-2, -1))
    r = (dx_sub.sum(axis=-1) * dy_sub.sum(axis=-1)).sum(axis=-1)
    t = sum(dx_sub[..., i, j] * dy_sub[..., k, l] for i, j, k, l in _PAIR_SPLITS)
    return (4.0 * s - r + 2.0 * t) / 12.0


def kernel_h(z1, z2, z3, z4) -> float:
    """Symmetric kernel of four observation pairs (x_i, y_i).

    Each argument is an (x, y) pair of vectors (scalars are promoted).
    The value is invariant under any permutation of the four arguments.
    """
    xs = [_point(z[0], "x") for z in (z1, z2, z3, z4)]
    ys = [_point(z[1], "y") for z in (z1, z2, z3, z4)]
    if len({x.shape[0] for x in xs}) != 1 or len({y.shape[0] for y in ys}) != 1:
        raise DataError("all x-parts (and all y-parts) must share one dimension")
    dx = cdist(np.vstack(xs), np.vstack(xs))
    dy = cdist(np.vstack(ys), np.vstack(ys))
    return float(kernel_batch(dx, dy))


def _iter_combo_chunks(n: int, chunk: int):
    it = itertools.combinations(range(n), 4)
    while True:
        block = list(itertools.islice(it, chunk))
        if not block:
            return
        yield np.asarray(block, dtype=np.intp)


def naive_from_matrices(dx: np.ndarray, dy: np.ndarray) -> float:
    """O(n^4) unbiased estimator evaluated from full distance matrices."""
    n = dx.shape[0]
    total = 0.0
    count = 0
    for combos in _iter_combo_chunks(n, _NAIVE_CHUNK):
        dxs = dx[combos[:, :, None], combos[:, None, :]]
        dys = dy[combos[:, :, None], combos[:, None, :]]
        vals = kernel_batch(dxs, dys)
        total += float(vals.sum())
        count += vals.shape[0]
    return total / count


def dcov_usq_naive(sample: PairedSample) -> DCovEstimate:
    """Unbiased squared distance covariance: kernel averaged over all 4-subsets.

    O(n^4) work; intended for modest n and as the oracle for the O(n^2)
    form.  The value may be negative (an unbiased estimator of a
    nonnegative quantity can undershoot).
    """
    if sample.n < 4:
        raise SampleSizeError(f"need n >= 4 observations, got n={sample.n}")
    dx = cdist(sample.x_block, sample.x_block)
    dy = cdist(sample.y_block, sample.y_block)
    value = naive_from_matrices(dx, dy)
    return DCovEstimate(value=value, kind="naive-U", n=sample.n, p=sample.p, q=sample.q)


def fast_from_aggregates(
    prod_sum: float,
    row_dot: float,
    grand_x: float,
    grand_y: float,
    n: int,
) -> float:
    """O(n^2) unbiased estimator from the three distance aggregates.

    prod_sum = sum_{i,j} dx_ij dy_ij, row_dot = sum_i rx_i ry_i, and
    grand_x/grand_y are the grand sums.  The triple sum over
    dx_ij dy_ik collapses to the row-sum dot product.
    """
    return (
        prod_sum
        + grand_x * grand_y / ((n - 1) * (n - 2))
        - 2.0 / (n - 2) * row_dot
    ) / (n * (n - 3))


def dcov_usq_fast(dx: DistanceMatrix, dy: DistanceMatrix) -> DCovEstimate:
    """Unbiased squared distance covariance in O(n^2) from distance matrices."""
    if dx.n != dy.n:
        raise DomainError(f"size mismatch: {dx.n} vs {dy.n}")
    n = dx.n
    if n < 4:
        raise SampleSizeError(f"need n >= 4 observations, got n={n}")
    prod_sum = float((dx.entries * dy.entries).sum())
    row_dot = float(dx.row_sums @ dy.row_sums)
    value = fast_from_aggregates(prod_sum, row_dot, dx.grand_sum, dy.grand_sum, n)
    return DCovEstimate(
        value=value, kind="fast-U", n=n, p=dx.source_dim, q=dy.source_dim
    )


def dcov_usq_fast_blocked(sample: PairedSample, block_rows: int = 512) -> DCovEstimate:
    """Same value as dcov_usq_fast but never materializes full n x n matrices.

    Streams row blocks of both distance matrices; memory is
    O(block_rows * n).  Useful for reference runs with n in the tens of
    thousands.
    """
    if sample.n < 4:
        raise SampleSizeError(f"need n >= 4 observations, got n={sample.n}")
    x, y = sample.x_block, sample.y_block
    n = sample.n
    rx = np.empty(n)
    ry = np.empty(n)
    prod_sum = 0.0
    for lo in range(0, n, block_rows):
        hi = min(lo + block_rows, n)
        dxb = cdist(x[lo:hi], x)
        dyb = cdist(y[lo:hi], y)
        rx[lo:hi] = dxb.sum(axis=1)
        ry[lo:hi] = dyb.sum(axis=1)
        prod_sum += float((dxb * dyb).sum())
    value = fast_from_aggregates(
        prod_sum, float(rx @ ry), float(rx.sum()), float(ry.sum()), n
    )
    return DCovEstimate(value=value, kind="fast-U", n=n, p=sample.p, q=sample.q)


def dvar_usq(dx: DistanceMatrix) -> float:
    """Unbiased squared distance variance; may be slightly negative for
    degenerate samples and is reported as-is."""
    return dcov_usq_fast(dx, dx).value


def dcor_sq(sample: PairedSample) -> float:
    """Squared distance correlation from the O(n^2) unbiased estimators.

    Returns 0 when either marginal distance variance is <= 0 (a constant
    marginal cannot exhibit dependence).  The plug-in ratio can be
    negative; the result is clamped to [-1, 1] but never truncated at 0.
    """
    if sample.n < 4:
        raise SampleSizeError(f"need n >= 4 observations, got n={sample.n}")
    dx = pairwise_distances(sample.x_block)
    dy = pairwise_distances(sample.y_block)
    vxy = dcov_usq_fast(dx, dy).value
    vxx = dvar_usq(dx)
    vyy = dvar_usq(dy)
    if vxx <= 0.0 or vyy <= 0.0:
        return 0.0
    r = vxy / np.sqrt(vxx * vyy)
    return float(min(1.0, max(-1.0, r)))


def classical_cov_stat(sample: PairedSample) -> float:
    """Squared Frobenius norm of the p x q sample cross-covariance matrix.

    For scalar X and Y this is the squared sample covariance.  Serves as
    the linear-dependence baseline in the permutation-test comparisons.
    """
    if sample.n < 2:
        raise SampleSizeError(f"need n >= 2 observations, got n={sample.n}")
    xc = sample.x_block - sample.x_block.mean(axis=0)
    yc = sample.y_block - sample.y_block.mean(axis=0)
    c = xc.T @ yc / (sample.n - 1)
    return float((c * c).sum())
