"""Empirical projections of the 4-point kernel and both limit-law samplers.

h1 (one argument fixed) drives the normal limit of the estimator under
dependence; under independence it vanishes identically and the rescaled
estimator converges to a centered chi-square mixture whose weights are
eigenvalues of the h2 integral operator.  This module estimates both
projections from data, extracts the empirical spectrum, and samples the
two reference laws.

Although the exhaustive projections are defined as averages over all
triples / pairs, collapsing the 24-term kernel by slot multiplicity
reduces every aggregate to row-sum algebra, so exhaustive values are
computed exactly in O(n^2) (or O(n) per evaluation once the sample
aggregates exist).  The test suite checks them against literal
brute-force loops.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .errors import DomainError, SampleSizeError
from .estimators import PairedSample, kernel_batch
from .rng import derived_rng

_TRIPLE_CHUNK = 100_000


@dataclass(frozen=True)
class LimitSpectrum:
    """Nonincreasing eigenvalue sequence of the empirical h2 operator."""

    eigenvalues: np.ndarray
    n_basis: int


@dataclass(frozen=True)
class _Aggregates:
    """Distance matrices of a sample plus every sum the projections need."""

    dx: np.ndarray
    dy: np.ndarray
    dxrow: np.ndarray
    dyrow: np.ndarray
    gx: float
    gy: float
    prod_sum: float  # sum_{a,b} dx_ab dy_ab
    rowdot: np.ndarray  # per a: sum_b dx_ab dy_ab


def _aggregates(sample: PairedSample) -> _Aggregates:
    dx = cdist(sample.x_block, sample.x_block)
    dy = cdist(sample.y_block, sample.y_block)
    dxrow = dx.sum(axis=1)
    dyrow = dy.sum(axis=1)
    rowdot = (dx * dy).sum(axis=1)
    return _Aggregates(
        dx=dx,
        dy=dy,
        dxrow=dxrow,
        dyrow=dyrow,
        gx=float(dxrow.sum()),
        gy=float(dyrow.sum()),
        prod_sum=float(rowdot.sum()),
        rowdot=rowdot,
    )


def _point_pair(point, sample: PairedSample) -> tuple[np.ndarray, np.ndarray]:
    x = np.atleast_1d(np.asarray(point[0], dtype=float))
    y = np.atleast_1d(np.asarray(point[1], dtype=float))
    if x.shape[0] != sample.p or y.shape[0] != sample.q:
        raise DomainError(
            f"point dimensions ({x.shape[0]}, {y.shape[0]}) do not match "
            f"sample dimensions ({sample.p}, {sample.q})"
        )
    return x, y


def _h1_exhaustive(u, m, agg: _Aggregates, n: int) -> float:
    """Average of the kernel over all unordered sample triples.

    u and m are the distances from the evaluation point to the sample in
    x and y; everything else comes from the sample aggregates.
    """
    rho = float(u @ m)
    su, sm = float(u.sum()), float(m.sum())
    hu = float(u @ agg.dyrow)
    km = float(m @ agg.dxrow)
    rs = float(agg.dxrow @ agg.dyrow)
    pairs2 = (n - 1) * (n - 2) / 2.0  # triples containing a fixed sample point
    s_sum = pairs2 * rho + (n - 2) * agg.prod_sum / 2.0
    r_sum = (
        2.0 * pairs2 * rho
        + (n - 2) * (su * sm - rho)
        + (n - 2) * (hu + km)
        + (n - 3) * agg.prod_sum
        + rs
    )
    t_sum = su * agg.gy / 2.0 - hu + sm * agg.gx / 2.0 - km
    n_triples = n * (n - 1) * (n - 2) / 6.0
    return (4.0 * s_sum - r_sum + 2.0 * t_sum) / (12.0 * n_triples)


def _sample_distinct_triples(n: int, budget: int, rng) -> np.ndarray:
    """Uniform random triples of distinct indices, vectorized rejection."""
    out = rng.integers(0, n, size=(budget, 3))
    bad = (
        (out[:, 0] == out[:, 1]) | (out[:, 0] == out[:, 2]) | (out[:, 1] == out[:, 2])
    )
    while bad.any():
        out[bad] = rng.integers(0, n, size=(int(bad.sum()), 3))
        bad = (
            (out[:, 0] == out[:, 1])
            | (out[:, 0] == out[:, 2])
            | (out[:, 1] == out[:, 2])
        )
    return out


def _h1_triple_values(u, m, agg: _Aggregates, triples: np.ndarray) -> np.ndarray:
    """Kernel values of (point, z_a, z_b, z_c) for an array of triples."""
    b = triples.shape[0]
    dxs = np.zeros((b, 4, 4))
    dys = np.zeros((b, 4, 4))
    dxs[:, 0, 1:] = u[triples]
    dxs[:, 1:, 0] = u[triples]
    dys[:, 0, 1:] = m[triples]
    dys[:, 1:, 0] = m[triples]
    dxs[:, 1:, 1:] = agg.dx[triples[:, :, None], triples[:, None, :]]
    dys[:, 1:, 1:] = agg.dy[triples[:, :, None], triples[:, None, :]]
    return kernel_batch(dxs, dys)


def h1_budgeted(
    point, sample: PairedSample, triple_budget: int, seed: int
) -> tuple[float, float]:
    """Monte Carlo h1 estimate over random triples, with its standard error."""
    if sample.n < 3:
        raise SampleSizeError(f"need n >= 3 observations, got n={sample.n}")
    if triple_budget < 2:
        raise DomainError(f"triple budget must be >= 2, got {triple_budget}")
    x, y = _point_pair(point, sample)
    agg = _aggregates(sample)
    u = cdist(x[None, :], sample.x_block)[0]
    m = cdist(y[None, :], sample.y_block)[0]
    rng = derived_rng(seed)
    total = 0.0
    total_sq = 0.0
    remaining = triple_budget
    while remaining > 0:
        batch = min(_TRIPLE_CHUNK, remaining)
        vals = _h1_triple_values(u, m, agg, _sample_distinct_triples(sample.n, batch, rng))
        total += float(vals.sum())
        total_sq += float((vals * vals).sum())
        remaining -= batch
    mean = total / triple_budget
    var = max(total_sq / triple_budget - mean * mean, 0.0) / triple_budget
    return mean, float(np.sqrt(var))


def h1_hat(point, sample: PairedSample, triple_budget: int | None = None, seed: int = 0) -> float:
    """Empirical one-argument projection of the kernel at ``point``.

    Exhaustive by default: the exact average of the kernel over all
    unordered sample triples.  With ``triple_budget`` set, a seeded
    random subsample of triples is averaged instead (see h1_budgeted for
    the standard error).
    """
    if sample.n < 3:
        raise SampleSizeError(f"need n >= 3 observations, got n={sample.n}")
    if triple_budget is not None:
        return h1_budgeted(point, sample, triple_budget, seed)[0]
    x, y = _point_pair(point, sample)
    agg = _aggregates(sample)
    u = cdist(x[None, :], sample.x_block)[0]
    m = cdist(y[None, :], sample.y_block)[0]
    return _h1_exhaustive(u, m, agg, sample.n)


def _h2_terms(alpha, beta, rho_i, rho_j, g_ij, g_ji, rx_i, ry_i, rx_j, ry_j,
              h_i, h_j, k_i, k_j, agg: _Aggregates, n: int):
    """Shared closed form for the pair-projection; works on scalars or arrays."""
    npair = n * (n - 1) / 2.0
    ab = alpha * beta
    s_sum = npair * ab + (n - 1) * (rho_i + rho_j) + agg.prod_sum / 2.0
    t_sum = (
        alpha * agg.gy / 2.0
        + beta * agg.gx / 2.0
        + rx_i * ry_j
        + rx_j * ry_i
        - g_ij
        - g_ji
    )
    r_sum = (
        2.0 * npair * ab
        + (n - 1) * (alpha * (ry_i + ry_j) + beta * (rx_i + rx_j))
        + (2 * n - 3) * (rho_i + rho_j)
        + rx_i * ry_i
        + rx_j * ry_j
        + (n - 1) * (g_ij + g_ji)
        + h_i
        + h_j
        + k_i
        + k_j
        + agg.prod_sum
    )
    return (4.0 * s_sum - r_sum + 2.0 * t_sum) / (12.0 * npair)


def h2_hat(point1, point2, sample: PairedSample) -> float:
    """Empirical two-argument projection: kernel averaged over all sample pairs.

    Symmetric in its two points by construction.
    """
    if sample.n < 2:
        raise SampleSizeError(f"need n >= 2 observations, got n={sample.n}")
    x1, y1 = _point_pair(point1, sample)
    x2, y2 = _point_pair(point2, sample)
    agg = _aggregates(sample)
    u = cdist(x1[None, :], sample.x_block)[0]
    v = cdist(x2[None, :], sample.x_block)[0]
    m = cdist(y1[None, :], sample.y_block)[0]
    w = cdist(y2[None, :], sample.y_block)[0]
    alpha = float(np.linalg.norm(x1 - x2))
    beta = float(np.linalg.norm(y1 - y2))
    return float(
        _h2_terms(
            alpha,
            beta,
            float(u @ m),
            float(v @ w),
            float(u @ w),
            float(v @ m),
            float(u.sum()),
            float(m.sum()),
            float(v.sum()),
            float(w.sum()),
            float(u @ agg.dyrow),
            float(v @ agg.dyrow),
            float(m @ agg.dxrow),
            float(w @ agg.dxrow),
            agg,
            sample.n,
        )
    )


def _h2_matrix(agg: _Aggregates, idx: np.ndarray, n: int) -> np.ndarray:
    """h2_hat evaluated at all pairs of the selected sample points."""
    du = agg.dx[idx, :]
    dm = agg.dy[idx, :]
    alpha = agg.dx[np.ix_(idx, idx)]
    beta = agg.dy[np.ix_(idx, idx)]
    rho = agg.rowdot[idx]
    g = du @ dm.T
    rx = agg.dxrow[idx]
    ry = agg.dyrow[idx]
    h = du @ agg.dyrow
    k = dm @ agg.dxrow
    col = np.newaxis
    return _h2_terms(
        alpha,
        beta,
        rho[:, col],
        rho[col, :],
        g,
        g.T,
        rx[:, col],
        ry[:, col],
        rx[col, :],
        ry[col, :],
        h[:, col],
        h[col, :],
        k[:, col],
        k[col, :],
        agg,
        n,
    )


def loo_h1_all(sample: PairedSample) -> np.ndarray:
    """h1_hat(z_i, sample without z_i) for every i, vectorized.

    Each leave-one-out aggregate is an O(n) correction of the full-sample
    one, so the whole vector costs O(n^2).  Averaging it reproduces the
    unbiased estimator exactly.
    """
    if sample.n < 5:
        raise SampleSizeError(f"need n >= 5 observations, got n={sample.n}")
    agg = _aggregates(sample)
    n = sample.n
    nn = n - 1
    rho = agg.rowdot  # per i: dx_i . dy_i
    su = agg.dxrow
    sm = agg.dyrow
    hu = agg.dx @ agg.dyrow - rho  # sum over the reduced sample of u_a dyrow~_a
    km = agg.dy @ agg.dxrow - rho
    prod_red = agg.prod_sum - 2.0 * rho
    gx_red = agg.gx - 2.0 * agg.dxrow
    gy_red = agg.gy - 2.0 * agg.dyrow
    rs_full = float(agg.dxrow @ agg.dyrow)
    rs = (
        rs_full
        - agg.dy @ agg.dxrow
        - agg.dx @ agg.dyrow
        + rho
        - agg.dxrow * agg.dyrow
    )
    pairs2 = (nn - 1) * (nn - 2) / 2.0
    s_sum = pairs2 * rho + (nn - 2) * prod_red / 2.0
    r_sum = (
        2.0 * pairs2 * rho
        + (nn - 2) * (su * sm - rho)
        + (nn - 2) * (hu + km)
        + (nn - 3) * prod_red
        + rs
    )
    t_sum = su * gy_red / 2.0 - hu + sm * gx_red / 2.0 - km
    n_triples = nn * (nn - 1) * (nn - 2) / 6.0
    return (4.0 * s_sum - r_sum + 2.0 * t_sum) / (12.0 * n_triples)


def var_h1_hat(sample: PairedSample, eval_budget: int, seed: int = 0) -> float:
    """Sample variance of leave-one-out h1 values at seeded evaluation points.

    Leaving the evaluation point out of the triple average avoids the
    bias of reusing it inside the kernel.
    """
    if sample.n < 10:
        raise SampleSizeError(f"need n >= 10 observations, got n={sample.n}")
    if eval_budget < 2:
        raise DomainError(f"eval budget must be >= 2, got {eval_budget}")
    vals = loo_h1_all(sample)
    if eval_budget < sample.n:
        rng = derived_rng(seed)
        vals = vals[rng.choice(sample.n, size=eval_budget, replace=False)]
    return float(vals.var(ddof=1))


def h2_spectrum(sample: PairedSample, basis_size: int, seed: int = 0) -> LimitSpectrum:
    """Eigenvalues of the empirical h2 operator on seeded basis points.

    Builds the basis x basis matrix of pair-projection values,
    symmetrizes it against floating-point asymmetry, and rescales the
    eigenvalues by the basis size (the empirical analogue of the
    integral operator).  Returned sorted nonincreasing.
    """
    if not 2 <= basis_size <= sample.n:
        raise DomainError(
            f"basis size must be in [2, {sample.n}], got {basis_size}"
        )
    rng = derived_rng(seed)
    idx = rng.choice(sample.n, size=basis_size, replace=False)
    agg = _aggregates(sample)
    mat = _h2_matrix(agg, idx, sample.n)
    mat = 0.5 * (mat + mat.T)
    eigs = np.linalg.eigvalsh(mat) / basis_size
    return LimitSpectrum(eigenvalues=eigs[::-1].copy(), n_basis=basis_size)


def _u_centered(d: np.ndarray) -> np.ndarray:
    n = d.shape[0]
    rs = d.sum(axis=1)
    a = d - rs[:, None] / (n - 2) - rs[None, :] / (n - 2) + d.sum() / ((n - 1) * (n - 2))
    np.fill_diagonal(a, 0.0)
    return a


def null_spectrum_product(sample: PairedSample, basis_size: int) -> LimitSpectrum:
    """Null-operator eigenvalues via the product structure of the pair projection.

    Under independence the two-argument projection factorizes into a
    product of centered marginal distance deviations (the same structure
    that makes its variance a product of the marginal distance
    variances over 36), so the operator's eigenvalues are the pairwise
    products of the marginal operators' eigenvalues divided by 6.
    Estimating each marginal spectrum from its U-centered distance
    matrix is far less noisy than assembling the empirical pair-kernel
    matrix, at the cost of being valid only under the null.  Returns the
    basis_size largest products, sorted nonincreasing; deterministic.
    """
    if not 2 <= basis_size <= sample.n:
        raise DomainError(f"basis size must be in [2, {sample.n}], got {basis_size}")
    if sample.n < 4:
        raise SampleSizeError(f"need n >= 4 observations, got n={sample.n}")
    margins = []
    for block in (sample.x_block, sample.y_block):
        d = cdist(block, block)
        eigs = np.linalg.eigvalsh(_u_centered(d)) / sample.n
        # the centered distance operator is negative semidefinite, so the
        # most negative eigenvalues carry the signal; keep basis_size of them
        margins.append(np.sort(eigs)[:basis_size])
    lam = np.sort(np.outer(margins[0], margins[1]).ravel() / 6.0)[::-1][:basis_size]
    return LimitSpectrum(eigenvalues=lam, n_basis=basis_size)


def sample_degenerate_limit(
    spectrum: LimitSpectrum, reps: int, seed: int = 0
) -> np.ndarray:
    """Draws of 6 * sum_i lambda_i (Z_i^2 - 1), truncated at the spectrum length."""
    lam = np.asarray(spectrum.eigenvalues, dtype=float)
    if lam.size == 0:
        raise DomainError("empty spectrum")
    if reps < 1:
        raise DomainError(f"reps must be positive, got {reps}")
    rng = derived_rng(seed)
    out = np.empty(reps)
    chunk = max(1, 4_000_000 // lam.size)
    for lo in range(0, reps, chunk):
        hi = min(lo + chunk, reps)
        z = rng.standard_normal((hi - lo, lam.size))
        out[lo:hi] = 6.0 * ((z * z - 1.0) @ lam)
    return out


def sample_normal_limit(variance_h1: float, reps: int, seed: int = 0) -> np.ndarray:
    """Draws from the centered normal with variance 16 * variance_h1."""
    if variance_h1 < 0:
        raise DomainError(f"variance must be nonnegative, got {variance_h1}")
    if reps < 1:
        raise DomainError(f"reps must be positive, got {reps}")
    rng = derived_rng(seed)
    return rng.normal(0.0, np.sqrt(16.0 * variance_h1), size=reps)
