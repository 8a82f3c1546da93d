"""Permutation and asymptotic independence tests.

The permutation test computes the X distance matrix once; relabeling Y
only permutes rows and columns of the Y distance matrix (row sums just
permute, the grand sum is invariant), so each replicate costs one O(n^2)
gather-and-dot, run in a compiled kernel.  Replicate b draws its
permutation from a stream derived from (seed, b), making reports
bit-identical for any thread count.
"""

from __future__ import annotations

import time
from contextlib import contextmanager
from dataclasses import dataclass

import numba
import numpy as np
from numba import njit, prange

from .distances import pairwise_distances
from .errors import DomainError, SampleSizeError
from .estimators import (
    PairedSample,
    classical_cov_stat,
    dcov_usq_fast,
    naive_from_matrices,
)
from .rng import derived_rng, subseed
from .ustat_theory import h2_spectrum, sample_degenerate_limit

STATISTICS = ("dcov-fast", "dcov-naive", "classical-cov")

_CLASSICAL_CHUNK = 2048


@dataclass(frozen=True)
class TestReport:
    """Outcome of one independence test."""

    __test__ = False  # despite the name, not a pytest class

    statistic_name: str
    observed: float
    replicates: int
    p_value: float
    seed: int
    method: str  # "permutation" | "asymptotic"
    runtime_ms: int
    n: int
    p: int
    q: int


@contextmanager
def thread_limit(threads: int | None):
    """Temporarily cap the compiled kernels' thread count (None/0 = auto)."""
    if not threads or threads <= 0:
        yield
        return
    old = numba.get_num_threads()
    numba.set_num_threads(min(threads, numba.config.NUMBA_NUM_THREADS))
    try:
        yield
    finally:
        numba.set_num_threads(old)


@njit(cache=True, parallel=True)
def _dcov_perm_stats(dx, dy, rx, ry, c_grand, perms, n, out):  # pragma: no cover
    for b in prange(perms.shape[0]):
        perm = perms[b]
        prod = 0.0
        row_dot = 0.0
        for i in range(n):
            pi = perm[i]
            dyrow = dy[pi]
            dxrow = dx[i]
            acc = 0.0
            for j in range(i + 1, n):
                acc += dxrow[j] * dyrow[perm[j]]
            prod += acc
            row_dot += rx[i] * ry[pi]
        out[b] = (2.0 * prod + c_grand - 2.0 / (n - 2) * row_dot) / (n * (n - 3))


def _permutation_array(n: int, count: int, seed: int) -> np.ndarray:
    perms = np.empty((count, n), dtype=np.int64)
    for b in range(count):
        perms[b] = derived_rng(seed, b).permutation(n)
    return perms


def _classical_perm_stats(xc, yc, perms) -> np.ndarray:
    n = xc.shape[0]
    out = np.empty(perms.shape[0])
    for lo in range(0, perms.shape[0], _CLASSICAL_CHUNK):
        hi = min(lo + _CLASSICAL_CHUNK, perms.shape[0])
        ycp = yc[perms[lo:hi]]
        c = np.einsum("ip,biq->bpq", xc, ycp) / (n - 1)
        out[lo:hi] = (c * c).sum(axis=(1, 2))
    return out


def _p_value(observed: float, perm_stats: np.ndarray) -> float:
    """(1 + #{replicate >= observed}) / (B + 1); ties count as exceedances."""
    return (1 + int(np.count_nonzero(perm_stats >= observed))) / (
        perm_stats.shape[0] + 1
    )


def permutation_test(
    sample: PairedSample,
    statistic: str = "dcov-fast",
    B: int = 10_000,
    seed: int = 42,
    threads: int | None = None,
) -> TestReport:
    """Permutation independence test for the chosen statistic.

    Recomputes the statistic under B uniformly random relabelings of the
    Y block (seeded Fisher-Yates, identity not excluded) and reports
    p = (1 + exceedances) / (B + 1), which can never be 0.
    """
    if statistic not in STATISTICS:
        raise DomainError(f"unknown statistic {statistic!r}; choose from {STATISTICS}")
    if B < 1:
        raise DomainError(f"need at least one permutation, got B={B}")
    min_n = 2 if statistic == "classical-cov" else 4
    if sample.n < min_n:
        raise SampleSizeError(
            f"statistic {statistic!r} needs n >= {min_n}, got n={sample.n}"
        )
    start = time.perf_counter()
    n = sample.n
    perms = _permutation_array(n, B, seed)
    if statistic == "classical-cov":
        observed = classical_cov_stat(sample)
        xc = sample.x_block - sample.x_block.mean(axis=0)
        yc = sample.y_block - sample.y_block.mean(axis=0)
        stats = _classical_perm_stats(xc, yc, perms)
    else:
        dxm = pairwise_distances(sample.x_block)
        dym = pairwise_distances(sample.y_block)
        if statistic == "dcov-fast":
            observed = dcov_usq_fast(dxm, dym).value
            stats = np.empty(B)
            c_grand = dxm.grand_sum * dym.grand_sum / ((n - 1) * (n - 2))
            with thread_limit(threads):
                _dcov_perm_stats(
                    dxm.entries,
                    dym.entries,
                    dxm.row_sums,
                    dym.row_sums,
                    c_grand,
                    perms,
                    n,
                    stats,
                )
        else:
            observed = naive_from_matrices(dxm.entries, dym.entries)
            stats = np.empty(B)
            for b in range(B):
                sub = np.ix_(perms[b], perms[b])
                stats[b] = naive_from_matrices(dxm.entries, dym.entries[sub])
    runtime_ms = int(1000 * (time.perf_counter() - start))
    return TestReport(
        statistic_name=statistic,
        observed=float(observed),
        replicates=B,
        p_value=_p_value(observed, stats),
        seed=seed,
        method="permutation",
        runtime_ms=runtime_ms,
        n=n,
        p=sample.p,
        q=sample.q,
    )


def asymptotic_test(
    sample: PairedSample,
    basis_size: int = 100,
    mixture_reps: int = 10_000,
    seed: int = 42,
) -> TestReport:
    """Independence test against the sampled chi-square-mixture limit law.

    The observed statistic is n times the O(n^2) unbiased estimator.  The
    null spectrum is estimated from the sample with Y labels permuted
    once (imposing the null coupling: under dependence the raw sample's
    pair projection does not follow the null operator), and the reference
    distribution is sampled from the resulting eigenvalue mixture.
    """
    if sample.n < max(20, basis_size):
        raise SampleSizeError(
            f"need n >= max(20, basis_size)={max(20, basis_size)}, got n={sample.n}"
        )
    start = time.perf_counter()
    dxm = pairwise_distances(sample.x_block)
    dym = pairwise_distances(sample.y_block)
    observed = sample.n * dcov_usq_fast(dxm, dym).value
    perm = derived_rng(seed, 0).permutation(sample.n)
    null_sample = PairedSample(sample.x_block, sample.y_block[perm])
    spectrum = h2_spectrum(null_sample, basis_size, seed=subseed(seed, 1))
    draws = sample_degenerate_limit(spectrum, mixture_reps, seed=subseed(seed, 2))
    runtime_ms = int(1000 * (time.perf_counter() - start))
    return TestReport(
        statistic_name="dcov-fast",
        observed=float(observed),
        replicates=mixture_reps,
        p_value=_p_value(observed, draws),
        seed=seed,
        method="asymptotic",
        runtime_ms=runtime_ms,
        n=sample.n,
        p=sample.p,
        q=sample.q,
    )
