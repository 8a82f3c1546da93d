"""Distance covariance and distance correlation.

Unbiased U-statistic estimators (O(n^4) and O(n^2)), the closed-form
constants of the underlying singular cosine integral with numerical
verification, empirical kernel projections with both limit laws, and
permutation / asymptotic independence tests on synthetic or CSV data.
"""

from .datagen import SHAPES, ShapeSpec, generate
from .distances import DistanceMatrix, pairwise_distances
from .errors import DataError, DcovError, DomainError, SampleSizeError
from .estimators import (
    DCovEstimate,
    PairedSample,
    classical_cov_stat,
    dcor_sq,
    dcov_usq_fast,
    dcov_usq_fast_blocked,
    dcov_usq_naive,
    dvar_usq,
    kernel_h,
)
from .fundamental import (
    GeneralizedConstant,
    IntegralCheck,
    dcov_sq_cf_mc,
    fundamental_constant,
    generalized_constant,
    truncated_cos,
    verify_fundamental_integral,
)
from .inference import STATISTICS, TestReport, asymptotic_test, permutation_test
from .io import ColumnSpec, read_csv, write_sample_csv
from .ustat_theory import (
    LimitSpectrum,
    h1_budgeted,
    h1_hat,
    h2_hat,
    h2_spectrum,
    loo_h1_all,
    null_spectrum_product,
    sample_degenerate_limit,
    sample_normal_limit,
    var_h1_hat,
)

__version__ = "0.1.0"

__all__ = [
    "ColumnSpec",
    "DCovEstimate",
    "DataError",
    "DcovError",
    "DistanceMatrix",
    "DomainError",
    "GeneralizedConstant",
    "IntegralCheck",
    "LimitSpectrum",
    "PairedSample",
    "SHAPES",
    "STATISTICS",
    "SampleSizeError",
    "ShapeSpec",
    "TestReport",
    "asymptotic_test",
    "classical_cov_stat",
    "dcor_sq",
    "dcov_sq_cf_mc",
    "dcov_usq_fast",
    "dcov_usq_fast_blocked",
    "dcov_usq_naive",
    "dvar_usq",
    "fundamental_constant",
    "generalized_constant",
    "generate",
    "h1_budgeted",
    "h1_hat",
    "h2_hat",
    "h2_spectrum",
    "kernel_h",
    "loo_h1_all",
    "null_spectrum_product",
    "pairwise_distances",
    "permutation_test",
    "read_csv",
    "sample_degenerate_limit",
    "sample_normal_limit",
    "truncated_cos",
    "var_h1_hat",
    "verify_fundamental_integral",
    "write_sample_csv",
]
