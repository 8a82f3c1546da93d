"""Command-line entry point: estimation, testing, simulation, verification, data generation.

Every run records its (possibly defaulted) seed in the JSON output, and
identical argv produce byte-identical JSON apart from the runtime_ms and
timestamp fields.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from datetime import datetime, timezone

import numpy as np
from scipy.stats import ks_2samp

from .datagen import SHAPES, ShapeSpec, generate
from .distances import pairwise_distances
from .errors import DataError, DomainError, SampleSizeError
from .estimators import (
    PairedSample,
    dcor_sq,
    dcov_usq_fast,
    dcov_usq_fast_blocked,
    dcov_usq_naive,
)
from .fundamental import verify_fundamental_integral
from .inference import STATISTICS, asymptotic_test, permutation_test
from .io import ColumnSpec, estimate_dict, read_csv, report_dict, write_sample_csv
from .rng import derived_rng, subseed
from .ustat_theory import (
    h2_spectrum,
    null_spectrum_product,
    sample_degenerate_limit,
    sample_normal_limit,
    var_h1_hat,
)

NAIVE_N_CAP = 200
_QUANTILE_PROBS = (0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _fast_usq(sample: PairedSample) -> float:
    return dcov_usq_fast(
        pairwise_distances(sample.x_block), pairwise_distances(sample.y_block)
    ).value


def simulate_degenerate_limits(
    n: int = 200,
    reps: int = 2000,
    spectrum_n: int = 500,
    basis_size: int = 200,
    mixture_reps: int = 100_000,
    seed: int = 42,
    spectrum_method: str = "product",
) -> dict:
    """Empirical n * estimate under independence vs the sampled mixture limit.

    Replicates independent standard-normal scalar pairs, rescales the
    unbiased estimator by n, samples the chi-square-mixture reference
    from a spectrum estimated on a fresh sample, and summarizes the match
    (two-sample KS distance plus a quantile table).  The spectrum comes
    from the factorized null estimator by default ("product"); pass
    "kernel-matrix" for the empirical pair-kernel route, which is
    noticeably noisier at moderate spectrum_n.
    """
    stats = np.empty(reps)
    for r in range(reps):
        rng = derived_rng(seed, 1, r)
        sample = PairedSample(rng.standard_normal(n), rng.standard_normal(n))
        stats[r] = n * _fast_usq(sample)
    rng = derived_rng(seed, 2)
    spec_sample = PairedSample(
        rng.standard_normal(spectrum_n), rng.standard_normal(spectrum_n)
    )
    if spectrum_method == "product":
        spectrum = null_spectrum_product(spec_sample, basis_size)
    elif spectrum_method == "kernel-matrix":
        spectrum = h2_spectrum(spec_sample, basis_size, seed=subseed(seed, 3))
    else:
        raise DomainError(f"unknown spectrum method {spectrum_method!r}")
    draws = sample_degenerate_limit(spectrum, mixture_reps, seed=subseed(seed, 4))
    lam = spectrum.eigenvalues
    return {
        "mode": "degenerate",
        "n": n,
        "reps": reps,
        "spectrum_n": spectrum_n,
        "basis_size": basis_size,
        "spectrum_method": spectrum_method,
        "mixture_reps": mixture_reps,
        "ks_distance": float(ks_2samp(stats, draws).statistic),
        "mixture_variance": float(72.0 * (lam @ lam)),
        "quantiles": _quantile_table(stats, draws),
        "seed": seed,
    }


def simulate_normal_limits(
    n: int = 400,
    reps: int = 1000,
    ref_n: int = 20_000,
    var_n: int = 2000,
    eval_budget: int = 200,
    noise_scale: float = 0.5,
    mixture_reps: int = 100_000,
    seed: int = 42,
) -> dict:
    """sqrt(n) fluctuation of the estimator under dependence vs its normal limit.

    Dependence is Y = X + noise_scale * eps with standard normal X and
    eps.  The reference value comes from one large run (ref_n), the limit
    variance from leave-one-out projection values on a var_n sample.
    """

    def rep_sample(rng, m):
        x = rng.standard_normal(m)
        return PairedSample(x, x + noise_scale * rng.standard_normal(m))

    ref = dcov_usq_fast_blocked(rep_sample(derived_rng(seed, 2), ref_n)).value
    stats = np.empty(reps)
    for r in range(reps):
        stats[r] = np.sqrt(n) * (_fast_usq(rep_sample(derived_rng(seed, 1, r), n)) - ref)
    var_h1 = var_h1_hat(rep_sample(derived_rng(seed, 3), var_n), eval_budget,
                        seed=subseed(seed, 4))
    draws = sample_normal_limit(var_h1, mixture_reps, seed=subseed(seed, 5))
    return {
        "mode": "normal",
        "n": n,
        "reps": reps,
        "ref_n": ref_n,
        "ref_value": float(ref),
        "var_n": var_n,
        "eval_budget": eval_budget,
        "noise_scale": noise_scale,
        "mixture_reps": mixture_reps,
        "var_h1": float(var_h1),
        "ks_distance": float(ks_2samp(stats, draws).statistic),
        "quantiles": _quantile_table(stats, draws),
        "seed": seed,
    }


def _quantile_table(empirical: np.ndarray, theoretical: np.ndarray) -> dict:
    return {
        "probs": list(_QUANTILE_PROBS),
        "empirical": [float(v) for v in np.quantile(empirical, _QUANTILE_PROBS)],
        "theoretical": [float(v) for v in np.quantile(theoretical, _QUANTILE_PROBS)],
    }


def _columns(raw: str) -> list[str]:
    cols = [c.strip() for c in raw.split(",") if c.strip()]
    if not cols:
        raise _UsageError(f"empty column selection {raw!r}")
    return cols


def _load_sample(args) -> PairedSample:
    spec = ColumnSpec(_columns(args.x), _columns(args.y))
    return read_csv(args.input, spec, header=args.header, lenient=args.lenient)


def _emit(payload: dict, out_path, start: float) -> None:
    payload["runtime_ms"] = int(1000 * (time.perf_counter() - start))
    payload["timestamp"] = datetime.now(timezone.utc).isoformat()
    text = json.dumps(payload) + "\n"
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _add_csv_args(sub):
    sub.add_argument("--in", dest="input", required=True, help="input CSV path")
    sub.add_argument("--x", required=True, help="comma-separated X columns (indices or names)")
    sub.add_argument("--y", required=True, help="comma-separated Y columns")
    sub.add_argument("--header", action="store_true", help="first row is a header")
    sub.add_argument("--lenient", action="store_true",
                     help="drop unparseable rows instead of failing")


def _build_parser() -> _Parser:
    parser = _Parser(prog="dcov", description=__doc__)
    subs = parser.add_subparsers(dest="command", required=True)

    est = subs.add_parser("estimate", help="squared distance covariance of CSV columns")
    _add_csv_args(est)
    est.add_argument("--naive", action="store_true", help="use the O(n^4) estimator")
    est.add_argument("--force", action="store_true",
                     help=f"allow --naive beyond n={NAIVE_N_CAP}")
    est.add_argument("--dcor", action="store_true", help="also report squared distance correlation")
    est.add_argument("--seed", type=int, default=42)
    est.add_argument("--out", default=None)

    test = subs.add_parser("test", help="permutation independence test")
    _add_csv_args(test)
    test.add_argument("--stat", default="dcov-fast", choices=STATISTICS)
    test.add_argument("--B", type=int, default=10_000, help="permutation count")
    test.add_argument("--seed", type=int, default=42)
    test.add_argument("--threads", type=int, default=0, help="0 = auto")
    test.add_argument("--out", default=None)

    asym = subs.add_parser("asymptest", help="asymptotic (mixture-limit) independence test")
    _add_csv_args(asym)
    asym.add_argument("--basis", type=int, default=100, help="spectrum basis size")
    asym.add_argument("--mixture-reps", type=int, default=10_000)
    asym.add_argument("--seed", type=int, default=42)
    asym.add_argument("--out", default=None)

    sim = subs.add_parser("simulate-limits",
                          help="empirical vs theoretical limit-law summary")
    sim.add_argument("--mode", required=True, choices=("degenerate", "normal"))
    sim.add_argument("--spectrum-method", default="product",
                     choices=("product", "kernel-matrix"))
    sim.add_argument("--n", type=int, default=None)
    sim.add_argument("--reps", type=int, default=None)
    sim.add_argument("--spectrum-n", type=int, default=500)
    sim.add_argument("--basis", type=int, default=200)
    sim.add_argument("--mixture-reps", type=int, default=100_000)
    sim.add_argument("--ref-n", type=int, default=20_000)
    sim.add_argument("--var-n", type=int, default=2000)
    sim.add_argument("--eval-budget", type=int, default=200)
    sim.add_argument("--noise-scale", type=float, default=0.5)
    sim.add_argument("--seed", type=int, default=42)
    sim.add_argument("--out", default=None)

    ver = subs.add_parser("verify-integral", help="check the closed-form constant numerically")
    ver.add_argument("--p", type=int, required=True, help="dimension")
    ver.add_argument("--x", required=True, help="comma-separated argument vector")
    ver.add_argument("--tol", type=float, default=1e-6, help="quadrature tolerance (p = 1)")
    ver.add_argument("--samples", type=int, default=10**6, help="Monte Carlo draws (p >= 2)")
    ver.add_argument("--seed", type=int, default=42)
    ver.add_argument("--out", default=None)

    gen = subs.add_parser("gen", help="generate a synthetic sample as CSV")
    gen.add_argument("--shape", required=True, choices=SHAPES)
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--noise-sd", type=float, default=0.0)
    gen.add_argument("--rho", type=float, default=0.5, help="linear-shape correlation")
    gen.add_argument("--x-dim", type=int, default=1)
    gen.add_argument("--y-dim", type=int, default=1)
    gen.add_argument("--seed", type=int, default=42)
    gen.add_argument("--header", action="store_true",
                     help="write a header row (x0..,y0..)")
    gen.add_argument("--out", default=None, help="CSV path (stdout when omitted)")
    return parser


def _cmd_estimate(args, start: float) -> None:
    sample = _load_sample(args)
    if args.naive:
        if sample.n > NAIVE_N_CAP and not args.force:
            raise DomainError(
                f"n={sample.n} exceeds the O(n^4) cap of {NAIVE_N_CAP}; pass --force"
            )
        est = dcov_usq_naive(sample)
    else:
        est = dcov_usq_fast(
            pairwise_distances(sample.x_block), pairwise_distances(sample.y_block)
        )
    payload = estimate_dict(est, args.seed)
    if args.dcor:
        payload["dcor_sq"] = dcor_sq(sample)
    _emit(payload, args.out, start)


def _cmd_test(args, start: float) -> None:
    sample = _load_sample(args)
    report = permutation_test(sample, args.stat, B=args.B, seed=args.seed,
                              threads=args.threads)
    _emit(report_dict(report), args.out, start)


def _cmd_asymptest(args, start: float) -> None:
    sample = _load_sample(args)
    report = asymptotic_test(sample, basis_size=args.basis,
                             mixture_reps=args.mixture_reps, seed=args.seed)
    _emit(report_dict(report), args.out, start)


def _cmd_simulate(args, start: float) -> None:
    if args.mode == "degenerate":
        payload = simulate_degenerate_limits(
            n=args.n if args.n is not None else 200,
            reps=args.reps if args.reps is not None else 2000,
            spectrum_n=args.spectrum_n,
            basis_size=args.basis,
            mixture_reps=args.mixture_reps,
            seed=args.seed,
            spectrum_method=args.spectrum_method,
        )
    else:
        payload = simulate_normal_limits(
            n=args.n if args.n is not None else 400,
            reps=args.reps if args.reps is not None else 1000,
            ref_n=args.ref_n,
            var_n=args.var_n,
            eval_budget=args.eval_budget,
            noise_scale=args.noise_scale,
            mixture_reps=args.mixture_reps,
            seed=args.seed,
        )
    payload = {"method": "simulate-limits", **payload}
    _emit(payload, args.out, start)


def _cmd_verify(args, start: float) -> None:
    x = [float(v) for v in _columns(args.x)]
    budget = args.tol if args.p == 1 else args.samples
    check = verify_fundamental_integral(args.p, x, budget, seed=args.seed)
    payload = {
        "method": "verify-integral",
        "dimension": check.dimension,
        "x": [float(v) for v in check.argument],
        "estimate": check.numeric_estimate,
        "closed_form": check.closed_form,
        "abs_error": abs(check.numeric_estimate - check.closed_form),
        "standard_error": check.standard_error,
        "sample_count": check.sample_count,
        "tolerance": args.tol if args.p == 1 else None,
        "seed": args.seed,
    }
    _emit(payload, args.out, start)


def _cmd_gen(args, start: float) -> None:
    spec = ShapeSpec(
        shape=args.shape,
        n=args.n,
        noise_sd=args.noise_sd,
        seed=args.seed,
        rho=args.rho,
        x_dim=args.x_dim,
        y_dim=args.y_dim,
    )
    sample = generate(spec)
    if args.out:
        write_sample_csv(sample, args.out, header=args.header)
        _emit(
            {"method": "gen", "shape": args.shape, "n": sample.n,
             "p": sample.p, "q": sample.q, "noise_sd": args.noise_sd,
             "seed": args.seed, "out": args.out},
            None,
            start,
        )
    else:
        write_sample_csv(sample, sys.stdout, header=args.header)


_COMMANDS = {
    "estimate": _cmd_estimate,
    "test": _cmd_test,
    "asymptest": _cmd_asymptest,
    "simulate-limits": _cmd_simulate,
    "verify-integral": _cmd_verify,
    "gen": _cmd_gen,
}


def run(argv=None) -> int:
    """Parse argv and execute; returns the process exit code."""
    parser = _build_parser()
    start = time.perf_counter()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        _COMMANDS[args.command](args, start)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (DataError, SampleSizeError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
