"""CSV ingestion into paired samples and JSON serialization of reports.

CSV dialect: comma separator, optional header, UTF-8, '.' decimal point,
no quoting of numeric fields.  Values are written with 17 significant
digits so a write/read round trip reproduces doubles exactly.  JSON
reports keep a stable field order.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .estimators import DCovEstimate, PairedSample
from .inference import TestReport

logger = logging.getLogger(__name__)

KIND_TAGS = {"naive-U": "dcov-naive", "fast-U": "dcov-fast", "cf-mc": "dcov-cf-mc"}


@dataclass(frozen=True)
class ColumnSpec:
    """Which CSV columns form the X block and which form the Y block.

    Entries are 0-based indices or (with a header row) column names.
    """

    x_columns: list
    y_columns: list

    def __post_init__(self):
        if not self.x_columns or not self.y_columns:
            raise DataError("x and y column selections must be nonempty")
        overlap = {str(c) for c in self.x_columns} & {str(c) for c in self.y_columns}
        if overlap:
            raise DataError(f"x and y column selections overlap: {sorted(overlap)}")


def _resolve(columns, names: list[str] | None, width: int, path) -> list[int]:
    out = []
    for c in columns:
        if isinstance(c, (int, np.integer)):
            idx = int(c)
        elif isinstance(c, str) and c.lstrip("-").isdigit():
            idx = int(c)
        else:
            if names is None:
                raise DataError(
                    f"{path}: column {c!r} is a name but the file was read without a header"
                )
            try:
                idx = names.index(c)
            except ValueError:
                raise DataError(f"{path}: unknown column {c!r}") from None
        if not 0 <= idx < width:
            raise DataError(f"{path}: column index {idx} out of range (width {width})")
        out.append(idx)
    return out


def read_csv(path, spec: ColumnSpec, header: bool = False, lenient: bool = False) -> PairedSample:
    """Read selected columns of a CSV file into a PairedSample.

    In strict mode (default) a row with any non-numeric or missing value
    in a selected column raises, naming the row and column; in lenient
    mode such rows are dropped and the count is logged.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        names = None
        first_line = 1
        if header:
            try:
                names = [c.strip() for c in next(reader)]
            except StopIteration:
                raise DataError(f"{path}: empty file") from None
            first_line = 2
        rows = list(reader)
    if not rows:
        raise DataError(f"{path}: no data rows")
    width = len(rows[0])
    if names is not None and len(names) != width:
        raise DataError(f"{path}: header has {len(names)} fields, row {first_line} has {width}")
    x_idx = _resolve(spec.x_columns, names, width, path)
    y_idx = _resolve(spec.y_columns, names, width, path)
    if set(x_idx) & set(y_idx):
        raise DataError(f"{path}: x and y selections resolve to overlapping columns")

    def label(j: int) -> str:
        return f"{names[j]!r}" if names is not None else str(j)

    x_rows, y_rows = [], []
    dropped = 0
    for r, row in enumerate(rows):
        line = first_line + r
        if len(row) != width:
            raise DataError(
                f"{path}: row {line} has {len(row)} fields, expected {width}"
            )
        try:
            xv = [float(row[j]) for j in x_idx]
            yv = [float(row[j]) for j in y_idx]
        except ValueError:
            bad = next(
                j for j in (*x_idx, *y_idx)
                if not row[j].strip() or not _is_number(row[j])
            )
            if lenient:
                dropped += 1
                continue
            raise DataError(
                f"{path}: row {line}, column {label(bad)}: "
                f"could not parse {row[bad]!r} as a number"
            ) from None
        x_rows.append(xv)
        y_rows.append(yv)
    if dropped:
        logger.warning("%s: dropped %d unparseable rows (lenient mode)", path, dropped)
    if not x_rows:
        raise DataError(f"{path}: no usable rows after filtering")
    return PairedSample(np.asarray(x_rows), np.asarray(y_rows))


def _is_number(cell: str) -> bool:
    try:
        float(cell)
        return True
    except ValueError:
        return False


def write_sample_csv(sample: PairedSample, path_or_file, header: bool = True) -> None:
    """Write a sample as CSV with x columns first, 17 significant digits."""
    if hasattr(path_or_file, "write"):
        _write_rows(sample, path_or_file, header)
    else:
        with open(path_or_file, "w", newline="", encoding="utf-8") as fh:
            _write_rows(sample, fh, header)


def _write_rows(sample: PairedSample, fh, header: bool) -> None:
    writer = csv.writer(fh)
    if header:
        writer.writerow(
            [f"x{j}" for j in range(sample.p)] + [f"y{j}" for j in range(sample.q)]
        )
    for xr, yr in zip(sample.x_block, sample.y_block):
        writer.writerow([format(v, ".17g") for v in (*xr, *yr)])


def report_dict(report: TestReport) -> dict:
    """TestReport as an ordered dict matching the published schema."""
    return {
        "method": report.method,
        "statistic": report.statistic_name,
        "observed": report.observed,
        "replicates": report.replicates,
        "p_value": report.p_value,
        "seed": report.seed,
        "n": report.n,
        "p": report.p,
        "q": report.q,
        "runtime_ms": report.runtime_ms,
    }


def estimate_dict(est: DCovEstimate, seed: int) -> dict:
    out = {
        "method": "estimate",
        "statistic": KIND_TAGS[est.kind],
        "value": est.value,
        "n": est.n,
        "p": est.p,
        "q": est.q,
        "seed": seed,
    }
    if est.standard_error is not None:
        out["standard_error"] = est.standard_error
    return out
