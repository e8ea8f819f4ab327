"""CSV ingestion, imputation, and report/plot-data writers."""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import DecompositionModel, PreconditionError, RegbreaksError, TimeSeries

INDEX_COLUMNS = ("t", "time", "index", "date")
DEFAULT_NA = ("", "NA")
REPORT_SCHEMA_VERSION = 1


class FormatError(RegbreaksError):
    pass


@dataclass(frozen=True)
class Dataset:
    series: tuple[TimeSeries, ...]
    source_path: str = ""
    imputation_log: tuple[tuple[str, int, float], ...] = field(default=())

    def names(self) -> list[str]:
        return [s.label or f"series{k}" for k, s in enumerate(self.series)]


def load_csv(
    path,
    columns: Sequence[str] | None = None,
    delimiter: str = ",",
    na_values: Sequence[str] = DEFAULT_NA,
    index_col: str | None = None,
    average: bool = False,
) -> Dataset:
    """Parse selected columns of a headed CSV into series; row order gives ``t``.

    Cells matching ``na_values`` (after stripping) are missing. Without an
    explicit ``index_col``, a first column named ``t``, ``time``, ``index``
    or ``date`` is treated as the index and not loaded. ``average=True``
    collapses the selected columns into one series of row means over the
    non-missing cells.
    """
    path = Path(path)
    na = {v.strip() for v in na_values}
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh, delimiter=delimiter))
    if not rows:
        raise FormatError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    body = rows[1:]
    for lineno, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise FormatError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
    if index_col is None and header and header[0].lower() in INDEX_COLUMNS:
        index_col = header[0]
    if columns is None:
        columns = [h for h in header if h != index_col]
    missing_cols = [c for c in columns if c not in header]
    if missing_cols:
        raise FormatError(f"{path}: columns not found: {missing_cols}")
    if not columns:
        raise FormatError(f"{path}: no data columns")
    if not body:
        raise FormatError(f"{path}: no data rows")

    series = []
    for name in columns:
        col = header.index(name)
        values = np.empty(len(body))
        mask = np.zeros(len(body), dtype=bool)
        for r, row in enumerate(body):
            cell = row[col].strip()
            if cell in na:
                mask[r] = True
                values[r] = np.nan
                continue
            try:
                values[r] = float(cell)
            except ValueError:
                raise FormatError(f"{path}:{r + 2}: column {name!r}: cannot parse {cell!r}") from None
            if not math.isfinite(values[r]):
                raise FormatError(f"{path}:{r + 2}: column {name!r}: non-finite value {cell!r}")
        series.append((name, values, mask))

    if average:
        stacked = np.vstack([v for _, v, _ in series])
        observed = ~np.vstack([m for _, _, m in series])
        counts = observed.sum(axis=0)
        sums = np.where(observed, stacked, 0.0).sum(axis=0)
        mean = np.divide(sums, counts, out=np.full(len(body), np.nan), where=counts > 0)
        out = (TimeSeries(mean, counts == 0, label="mean"),)
    else:
        out = tuple(TimeSeries(v, m, label=name) for name, v, m in series)
    return Dataset(out, str(path))


def write_csv(path, dataset_or_series, delimiter: str = ",", index_name: str = "t") -> None:
    """Write series as columns with an index column; missing cells stay empty.

    Floats use ``repr`` so values round-trip exactly.
    """
    series = (
        dataset_or_series.series
        if isinstance(dataset_or_series, Dataset)
        else tuple(dataset_or_series)
    )
    T = series[0].T
    if any(s.T != T for s in series):
        raise ValueError("all series must have the same length")
    names = [s.label or f"series{k}" for k, s in enumerate(series)]
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
        writer.writerow([index_name, *names])
        for r in range(T):
            row = [str(r + 1)]
            for s in series:
                missing = s.mask is not None and s.mask[r]
                row.append("" if missing else repr(float(s.values[r])))
            writer.writerow(row)


def impute_temporal_average(ds: Dataset) -> Dataset:
    """Replace each missing cell by the mean of that series' observed values."""
    log = list(ds.imputation_log)
    filled = []
    for name, s in zip(ds.names(), ds.series):
        if s.mask is None:
            filled.append(s)
            continue
        observed = s.values[~s.mask]
        if observed.size == 0:
            raise PreconditionError(f"series {name!r} has no observed values to average")
        fill = float(observed.mean())
        values = s.values.copy()
        values[s.mask] = fill
        log.extend((name, int(i) + 1, fill) for i in np.flatnonzero(s.mask))
        filled.append(TimeSeries(values, label=s.label))
    return replace(ds, series=tuple(filled), imputation_log=tuple(log))


def average_series(ds: Dataset, label: str = "mean") -> Dataset:
    """Row-wise unweighted mean of complete, equal-length series."""
    for s in ds.series:
        s.require_complete()
    values = np.mean(np.vstack([s.values for s in ds.series]), axis=0)
    return replace(ds, series=(TimeSeries(values, label=label),))


def file_sha256(path) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def model_to_dict(model: DecompositionModel) -> dict:
    r = model.residuals
    return {
        "T": model.T,
        "breaks": list(model.breaks),
        "trend": [
            {"start": seg.start, "end": seg.end, "a": seg.a, "b": seg.b}
            for seg in model.trend
        ],
        "seasonal": [
            {"start": blk.start, "end": blk.end, "d": blk.d, "s": list(blk.s)}
            for blk in model.seasonal
        ],
        "objective": model.objective,
        "lambda": model.lam,
        "param_count": model.param_count,
        "residuals": {
            "norm": float(np.linalg.norm(r)),
            "ssr": float(r @ r),
            "mean": float(r.mean()),
            "std": float(r.std()),
            "max_abs": float(np.max(np.abs(r))),
        },
    }


PLOT_COLUMNS = ("t", "observed", "trend", "seasonal", "residual", "adjusted")


def write_plot_tsv(path, observed: np.ndarray, model: DecompositionModel) -> None:
    """Tab-separated columns t, observed, trend, seasonal, residual, adjusted.

    ``adjusted`` is the seasonally adjusted series ``observed - seasonal``.
    """
    trend = model.trend_values()
    seasonal = model.seasonal_values()
    with Path(path).open("w", newline="") as fh:
        fh.write("\t".join(PLOT_COLUMNS) + "\n")
        for k in range(model.T):
            row = (observed[k], trend[k], seasonal[k], model.residuals[k], observed[k] - seasonal[k])
            fh.write(str(k + 1) + "\t" + "\t".join(repr(float(v)) for v in row) + "\n")


def read_plot_tsv(path) -> dict[str, np.ndarray]:
    with Path(path).open() as fh:
        header = fh.readline().rstrip("\n").split("\t")
        data = np.array([[float(x) for x in line.rstrip("\n").split("\t")] for line in fh if line.strip()])
    return {name: data[:, k] for k, name in enumerate(header)}


def dump_report(report: dict) -> str:
    """Deterministic JSON text: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n"
