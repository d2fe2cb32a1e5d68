"""All-pairs dependence scan over a table with missing values.

Each unordered column pair is reduced to its complete cases; pairs with
fewer than ``min_n`` common rows are skipped. Pairs are canonicalised by
column name, so the output does not depend on the column order of the
input file or on the number of workers.
"""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

import numpy as np

from .copula_core import Sample
from .errors import InvalidInputError
from .measures import check_kinds, compute_measures

DEFAULT_MISSING = ("", "NA")
DEFAULT_MIN_N = 50
CONSTANT_FLAG = "constant"


@dataclass(frozen=True)
class Table:
    """Named numeric columns of equal length; NaN marks a missing cell."""

    names: tuple[str, ...]
    columns: tuple[np.ndarray, ...]

    def __post_init__(self):
        names = tuple(str(n) for n in self.names)
        cols = tuple(np.asarray(c, dtype=float) for c in self.columns)
        if len(names) < 2:
            raise InvalidInputError("a table needs at least 2 columns")
        if len(names) != len(cols):
            raise InvalidInputError("one name per column required")
        dupes = sorted({n for n in names if names.count(n) > 1})
        if dupes:
            raise InvalidInputError(f"duplicate column names: {', '.join(dupes)}")
        if len({c.size for c in cols}) > 1:
            raise InvalidInputError("columns must have equal length")
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "columns", cols)

    @property
    def n_rows(self) -> int:
        return int(self.columns[0].size)

    def column(self, name: str) -> np.ndarray:
        return self.columns[self.names.index(name)]


@dataclass(frozen=True)
class ScanRow:
    var_a: str
    var_b: str
    n_common: int
    measures: dict
    ccor_minus_abs_rho: float
    flags: tuple[str, ...] = ()


@dataclass(frozen=True)
class ScanSummary:
    rows: list
    kinds: tuple[str, ...]
    n_pairs: int
    skipped: int
    constant: int = 0
    warnings: tuple[str, ...] = field(default_factory=tuple)


def load_table(
    path,
    missing_markers: Sequence[str] = DEFAULT_MISSING,
    delimiter: str = ",",
) -> Table:
    """Read a delimited text file with a header row into a :class:`Table`.

    Cells equal to one of ``missing_markers`` (after stripping whitespace)
    become NaN. Any other cell that does not parse as a number raises
    :class:`InvalidInputError` naming the line and column.
    """
    markers = {m.strip() for m in missing_markers}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise InvalidInputError(f"{path}: empty file") from None
        rows = []
        for line_no, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip() and len(header) > 1):
                continue
            if len(row) != len(header):
                raise InvalidInputError(
                    f"{path}: line {line_no} has {len(row)} fields, expected {len(header)}"
                )
            values = []
            for name, cell in zip(header, row):
                cell = cell.strip()
                if cell in markers:
                    values.append(math.nan)
                    continue
                try:
                    value = float(cell)
                except ValueError:
                    raise InvalidInputError(
                        f"{path}: line {line_no}, column {name!r}: cannot parse {cell!r} as a number"
                    ) from None
                if math.isnan(value):
                    raise InvalidInputError(
                        f"{path}: line {line_no}, column {name!r}: NaN is not a missing marker"
                    )
                values.append(value)
            rows.append(values)
    data = np.array(rows, dtype=float).reshape(len(rows), len(header))
    return Table(tuple(header), tuple(data[:, j].copy() for j in range(len(header))))


def _canonical_pairs(names: Sequence[str]) -> list[tuple[str, str]]:
    ordered = sorted(names)
    return [(a, b) for i, a in enumerate(ordered) for b in ordered[i + 1 :]]


def _scan_kinds(kinds: Iterable[str]) -> tuple[str, ...]:
    kinds = check_kinds(kinds)
    for required in ("ccor", "pearson"):
        if required not in kinds:
            kinds.append(required)
    return tuple(kinds)


def _scan_pair(a: str, b: str, xa: np.ndarray, xb: np.ndarray, kinds, min_n: int, params):
    keep = ~(np.isnan(xa) | np.isnan(xb))
    n = int(np.count_nonzero(keep))
    if n < min_n:
        return None
    x, y = xa[keep], xb[keep]
    if np.ptp(x) == 0.0 or np.ptp(y) == 0.0:
        measures = {k: 0.0 for k in kinds}
        return ScanRow(a, b, n, measures, 0.0, (CONSTANT_FLAG,))
    measures = compute_measures(Sample(x, y), kinds, **params)
    return ScanRow(a, b, n, measures, measures["ccor"] - abs(measures["pearson"]))


_WORKER_TABLE: dict = {}


def _init_worker(names, columns):
    _WORKER_TABLE.clear()
    _WORKER_TABLE.update(zip(names, columns))


def _scan_chunk(pairs, kinds, min_n, params):
    return [
        _scan_pair(a, b, _WORKER_TABLE[a], _WORKER_TABLE[b], kinds, min_n, params)
        for a, b in pairs
    ]


def scan(
    table: Table,
    kinds: Iterable[str] = ("ccor", "pearson"),
    min_n: int = DEFAULT_MIN_N,
    workers: int | None = 1,
    **params,
) -> ScanSummary:
    """Scan every column pair and report retained rows plus skip counts.

    ``ccor`` and ``pearson`` are always computed because the nonlinearity
    score needs both. Extra ``params`` go to
    :func:`~equidep.measures.compute_measures`.
    """
    if int(min_n) != min_n or min_n < 2:
        raise InvalidInputError(f"min_n must be an integer >= 2, got {min_n}")
    kinds = _scan_kinds(kinds)
    pairs = _canonical_pairs(table.names)
    workers = (os.cpu_count() or 1) if workers is None else int(workers)
    if workers <= 1 or len(pairs) < 2:
        cols = dict(zip(table.names, table.columns))
        results = [_scan_pair(a, b, cols[a], cols[b], kinds, min_n, params) for a, b in pairs]
    else:
        size = max(1, math.ceil(len(pairs) / (4 * workers)))
        chunks = [pairs[i : i + size] for i in range(0, len(pairs), size)]
        with ProcessPoolExecutor(
            max_workers=workers, initializer=_init_worker, initargs=(table.names, table.columns)
        ) as pool:
            futures = [pool.submit(_scan_chunk, c, kinds, min_n, params) for c in chunks]
            results = [r for f in futures for r in f.result()]
    rows = [r for r in results if r is not None]
    constant = sum(1 for r in rows if CONSTANT_FLAG in r.flags)
    warnings = tuple(
        f"{r.var_a}/{r.var_b}: constant column, measures set to 0" for r in rows if r.flags
    )
    return ScanSummary(rows, kinds, len(pairs), len(pairs) - len(rows), constant, warnings)


def pairwise_scan(
    table: Table,
    kinds: Iterable[str] = ("ccor", "pearson"),
    min_n: int = DEFAULT_MIN_N,
    workers: int | None = 1,
    **params,
) -> list[ScanRow]:
    """Rows for every column pair with at least ``min_n`` complete cases.

    Rows come back sorted by ``(var_a, var_b)`` with ``var_a < var_b``.
    """
    return scan(table, kinds, min_n, workers, **params).rows


def rank_nonlinear(rows: Sequence[ScanRow], top_k: int | None = None) -> list[ScanRow]:
    """Sort by ``Ccor - |rho|`` descending (ties by pair name) and keep ``top_k``."""
    ordered = sorted(rows, key=lambda r: (-r.ccor_minus_abs_rho, r.var_a, r.var_b))
    return ordered if top_k is None else ordered[: max(int(top_k), 0)]


def fmt(value: float) -> str:
    """Six significant digits; integral values keep a trailing ``.0``."""
    text = f"{float(value):.6g}"
    if text.lstrip("-").isdigit():
        text += ".0"
    return text


def write_scan_csv(rows: Sequence[ScanRow], kinds: Sequence[str], out: TextIO) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["var_a", "var_b", "n_common", *kinds, "ccor_minus_abs_rho", "flags"])
    for r in rows:
        writer.writerow(
            [r.var_a, r.var_b, r.n_common, *(fmt(r.measures[k]) for k in kinds),
             fmt(r.ccor_minus_abs_rho), ";".join(r.flags)]
        )


def scan_csv_text(rows: Sequence[ScanRow], kinds: Sequence[str]) -> str:
    buf = io.StringIO()
    write_scan_csv(rows, kinds, buf)
    return buf.getvalue()
