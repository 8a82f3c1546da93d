import itertools

import numpy as np
import pytest

from dcov import (
    DataError,
    PairedSample,
    SampleSizeError,
    classical_cov_stat,
    dcor_sq,
    dcov_usq_fast,
    dcov_usq_fast_blocked,
    dcov_usq_naive,
    dvar_usq,
    kernel_h,
    pairwise_distances,
)

from oracles import dcov_usq_naive_brute, kernel_h_brute


def _sample(seed, n, p=1, q=1, dependent=False):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, p))
    y = x[:, :q] + 0.3 * rng.normal(size=(n, q)) if dependent else rng.normal(size=(n, q))
    return PairedSample(x, y)


def _fast(sample):
    dx = pairwise_distances(sample.x_block)
    dy = pairwise_distances(sample.y_block)
    return dcov_usq_fast(dx, dy)


# ---------------------------------------------------------------- kernel

def test_kernel_identical_pairs_is_zero():
    z = (np.array([1.0, 2.0]), np.array([3.0]))
    assert kernel_h(z, z, z, z) == 0.0


def test_kernel_constant_y_is_zero():
    rng = np.random.default_rng(0)
    zs = [(rng.normal(size=2), np.array([5.0])) for _ in range(4)]
    assert kernel_h(*zs) == 0.0


def test_kernel_diagonal_example_matches_brute():
    """1-d pairs (0,0),(1,1),(2,2),(3,3): oracle gives 2/3."""
    pts = [(float(i), float(i)) for i in range(4)]
    oracle = kernel_h_brute(*pts)
    assert oracle == pytest.approx(2.0 / 3.0, abs=1e-15)
    assert kernel_h(*pts) == pytest.approx(oracle, rel=1e-13)


@pytest.mark.parametrize("seed", range(8))
def test_kernel_matches_brute_random(seed):
    rng = np.random.default_rng(seed)
    zs = [(rng.normal(size=3), rng.normal(size=2)) for _ in range(4)]
    assert kernel_h(*zs) == pytest.approx(kernel_h_brute(*zs), rel=1e-12, abs=1e-14)


def test_kernel_invariant_under_all_permutations():
    rng = np.random.default_rng(7)
    zs = [(rng.normal(size=2), rng.normal(size=1)) for _ in range(4)]
    base = kernel_h(*zs)
    for perm in itertools.permutations(zs):
        assert kernel_h(*perm) == pytest.approx(base, rel=1e-13, abs=1e-15)


def test_kernel_dimension_mismatch():
    with pytest.raises(DataError):
        kernel_h((np.zeros(2), 0.0), (np.zeros(3), 0.0), (np.zeros(2), 0.0),
                 (np.zeros(2), 0.0))


# ------------------------------------------------------------ naive O(n^4)

def test_naive_n4_equals_kernel():
    s = _sample(1, 4, dependent=True)
    est = dcov_usq_naive(s)
    zs = [(s.x_block[i], s.y_block[i]) for i in range(4)]
    assert est.value == pytest.approx(kernel_h(*zs), rel=1e-13)
    assert est.kind == "naive-U"


def test_naive_constant_y_is_exactly_zero():
    rng = np.random.default_rng(2)
    s = PairedSample(rng.normal(size=10), np.full(10, 3.25))
    assert dcov_usq_naive(s).value == 0.0


def test_naive_matches_bruteforce():
    s = _sample(3, 6, p=2, dependent=True)
    assert dcov_usq_naive(s).value == pytest.approx(
        dcov_usq_naive_brute(s.x_block, s.y_block), rel=1e-11, abs=1e-13
    )


def test_naive_rejects_small_sample():
    with pytest.raises(SampleSizeError):
        dcov_usq_naive(_sample(0, 3))


# ------------------------------------------------------- fast O(n^2) form

def test_fast_equals_naive_fixed_seed():
    s = _sample(12, 12, dependent=True)
    assert abs(dcov_usq_naive(s).value - _fast(s).value) < 1e-12


@pytest.mark.parametrize("seed", range(10))
def test_fast_equals_naive_sweep(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 41))
    s = _sample(seed + 100, n, p=int(rng.integers(1, 4)), dependent=bool(seed % 2))
    naive = dcov_usq_naive(s).value
    fast = _fast(s).value
    assert abs(naive - fast) <= 1e-9 * max(1.0, abs(naive))


def test_fast_constant_y_zero():
    rng = np.random.default_rng(4)
    s = PairedSample(rng.normal(size=8), np.zeros(8))
    assert _fast(s).value == 0.0


def test_fast_permutation_invariance():
    s = _sample(5, 25, dependent=True)
    dx = pairwise_distances(s.x_block)
    dy = pairwise_distances(s.y_block)
    base = dcov_usq_fast(dx, dy).value
    perm = np.random.default_rng(6).permutation(25)
    sp = PairedSample(s.x_block[perm], s.y_block[perm])
    assert _fast(sp).value == pytest.approx(base, rel=1e-12)


def test_fast_size_mismatch_and_small_n():
    dx = pairwise_distances(np.arange(5.0))
    dy = pairwise_distances(np.arange(4.0))
    with pytest.raises(Exception):
        dcov_usq_fast(dx, dy)
    dy3 = pairwise_distances(np.arange(3.0))
    dx3 = pairwise_distances(np.arange(3.0))
    with pytest.raises(SampleSizeError):
        dcov_usq_fast(dx3, dy3)


def test_blocked_matches_dense():
    s = _sample(7, 57, p=3, q=2, dependent=True)
    assert dcov_usq_fast_blocked(s, block_rows=10).value == pytest.approx(
        _fast(s).value, rel=1e-12
    )


# -------------------------------------------------------- distance variance

def test_dvar_constant_block_zero():
    dm = pairwise_distances(np.full(6, 1.0))
    assert dvar_usq(dm) == 0.0


def test_dvar_two_values_matches_naive():
    block = np.array([0.0, 0.0, 1.0, 1.0])
    s = PairedSample(block, block)
    assert dvar_usq(pairwise_distances(block)) == pytest.approx(
        dcov_usq_naive(s).value, rel=1e-12
    )


def test_dvar_scaling_quadratic():
    rng = np.random.default_rng(8)
    block = rng.normal(size=12)
    v1 = dvar_usq(pairwise_distances(block))
    v2 = dvar_usq(pairwise_distances(2.5 * block))
    assert v2 == pytest.approx(2.5**2 * v1, rel=1e-14)


# ------------------------------------------------------- distance correlation

def test_dcor_perfect_dependence():
    rng = np.random.default_rng(9)
    x = rng.normal(size=50)
    r = dcor_sq(PairedSample(x, x))
    assert 0.9 < r <= 1.0


def test_dcor_degenerate_marginal_returns_zero():
    rng = np.random.default_rng(10)
    assert dcor_sq(PairedSample(rng.normal(size=10), np.full(10, 2.0))) == 0.0


def test_dcor_in_range_independent():
    s = _sample(11, 20)
    assert -1.0 <= dcor_sq(s) <= 1.0


# ------------------------------------------------------ classical covariance

def test_classical_cov_y_equals_x():
    rng = np.random.default_rng(12)
    x = rng.normal(size=30)
    s2 = x.var(ddof=1)
    assert classical_cov_stat(PairedSample(x, x)) == pytest.approx(s2**2, rel=1e-12)


def test_classical_cov_constant_y():
    rng = np.random.default_rng(13)
    assert classical_cov_stat(PairedSample(rng.normal(size=5), np.ones(5))) == 0.0


def test_classical_cov_blind_to_symmetric_dependence():
    s = PairedSample(np.array([-1.0, 0.0, 1.0]), np.array([1.0, 0.0, 1.0]))
    assert classical_cov_stat(s) == 0.0


def test_classical_cov_small_n_error():
    with pytest.raises(SampleSizeError):
        classical_cov_stat(PairedSample(np.array([1.0]), np.array([2.0])))


# ------------------------------------------------------------- properties

def test_equivariance_under_affine_maps():
    s = _sample(14, 15, dependent=True)
    a, b = -2.5, 0.75
    s2 = PairedSample(a * s.x_block + 3.0, b * s.y_block - 1.0)
    assert _fast(s2).value == pytest.approx(abs(a) * abs(b) * _fast(s).value, rel=1e-12)


def test_orthogonal_invariance():
    rng = np.random.default_rng(15)
    s = _sample(15, 20, p=3, q=2, dependent=True)
    qx, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    qy, _ = np.linalg.qr(rng.normal(size=(2, 2)))
    s2 = PairedSample(s.x_block @ qx.T, s.y_block @ qy.T)
    assert _fast(s2).value == pytest.approx(_fast(s).value, rel=1e-10)


def test_symmetry_in_x_and_y():
    s = _sample(16, 18, dependent=True)
    assert _fast(s).value == _fast(PairedSample(s.y_block, s.x_block)).value


def test_crude_bound_on_bounded_inputs():
    rng = np.random.default_rng(17)
    x = rng.uniform(-2.0, 2.0, size=25)
    y = rng.uniform(-3.0, 3.0, size=25)
    mx = float(np.abs(x).max())
    my = float(np.abs(y).max())
    value = dcov_usq_naive(PairedSample(x, y)).value
    assert abs(value) <= 4.0 * (2.0 * mx) * (2.0 * my)


def test_sample_validation():
    with pytest.raises(DataError):
        PairedSample(np.zeros((3, 1)), np.zeros((4, 1)))
    bad = np.zeros(5)
    bad[2] = np.nan
    with pytest.raises(DataError, match="row 2"):
        PairedSample(bad, np.zeros(5))
