"""Ingestion, validation, and truncation of citation-count datasets.

Counts are per-article citation tallies: positive integers, unordered
beyond their file order. Zero counts (uncited articles) are dropped at
load time but tallied, so reports can state how many were excluded.
Datasets are immutable after construction and safe to share.
"""

from __future__ import annotations

import csv
import io
import os
from collections import Counter
from dataclasses import dataclass, field

from .errors import EmptyDatasetError, EmptyTailError, ParseError, UsageError

PLAIN = "plain"
CSV = "csv"
CSV_COLUMN = "citations"


@dataclass(frozen=True)
class CountDataset:
    """A multiset of positive citation counts with provenance metadata."""

    counts: tuple[int, ...]
    source_label: str = ""
    zeros_dropped: int = 0

    def __post_init__(self):
        if len(self.counts) == 0:
            raise EmptyDatasetError("dataset has no counts")
        if any(c < 1 for c in self.counts):
            raise UsageError("counts must be positive integers")

    @property
    def n(self) -> int:
        return len(self.counts)


@dataclass(frozen=True)
class TruncatedView:
    """The sub-multiset of a dataset at or above a truncation point."""

    base: CountDataset
    x_min: int
    retained: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        if self.x_min < 1:
            raise UsageError(f"x_min must be >= 1, got {self.x_min}")
        kept = tuple(c for c in self.base.counts if c >= self.x_min)
        if not kept:
            raise EmptyTailError(
                f"no counts >= {self.x_min} (max observed {max(self.base.counts)})"
            )
        object.__setattr__(self, "retained", kept)

    @property
    def n_tail(self) -> int:
        return len(self.retained)


def load_counts(path, fmt: str = PLAIN, source_label: str | None = None) -> CountDataset:
    """Load a count dataset from a file.

    Parameters
    ----------
    path : str or path-like
        File to read.
    fmt : {"plain", "csv"}
        ``plain``: one nonnegative base-10 integer per line, optional
        trailing newline. ``csv``: RFC-4180 with a header row and a
        column named ``citations``.
    source_label : str, optional
        Provenance label; defaults to the file's base name.

    Returns
    -------
    CountDataset
        Zeros removed (and counted in ``zeros_dropped``), order preserved.

    Raises
    ------
    ParseError
        Non-integer or negative entry, naming the offending line.
    EmptyDatasetError
        File contains no positive counts.
    """
    label = source_label if source_label is not None else os.path.basename(str(path))
    with open(path, "r", encoding="utf-8", newline="") as fh:
        text = fh.read()
    if fmt == PLAIN:
        raw = _parse_plain(text)
    elif fmt == CSV:
        raw = _parse_csv(text)
    else:
        raise UsageError(f"unknown format {fmt!r}")
    counts = tuple(c for c in raw if c > 0)
    zeros = len(raw) - len(counts)
    if not counts:
        raise EmptyDatasetError(f"{label}: no positive counts after dropping {zeros} zero(s)")
    return CountDataset(counts=counts, source_label=label, zeros_dropped=zeros)


def _parse_plain(text: str) -> list[int]:
    values = []
    for lineno, line in enumerate(text.split("\n"), start=1):
        if line.strip() == "":
            continue  # blank lines (incl. trailing newline) carry no value
        values.append(_parse_count(line, lineno))
    if not values:
        raise EmptyDatasetError("file contains no values")
    return values


def _parse_csv(text: str) -> list[int]:
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None or CSV_COLUMN not in reader.fieldnames:
        raise ParseError(f"missing required column {CSV_COLUMN!r}", line_number=1)
    values = []
    for lineno, row in enumerate(reader, start=2):
        values.append(_parse_count(row[CSV_COLUMN] or "", lineno))
    if not values:
        raise EmptyDatasetError("file contains no data rows")
    return values


def _parse_count(token: str, lineno: int) -> int:
    try:
        value = int(token.strip())
    except ValueError:
        raise ParseError(f"not an integer: {token.strip()!r}", line_number=lineno) from None
    if value < 0:
        raise ParseError(f"negative count: {value}", line_number=lineno)
    return value


def truncate(data: CountDataset, x_min: int) -> TruncatedView:
    """Keep only counts >= ``x_min``; raises EmptyTailError if none survive."""
    return TruncatedView(base=data, x_min=x_min)


def tail_ccdf(view: TruncatedView) -> list[tuple[int, float]]:
    """Empirical complementary CDF of the retained counts.

    Returns (value, P(X >= value)) pairs over the distinct retained values
    in ascending order; the first pair has probability 1 and the
    probabilities are non-increasing.
    """
    n = view.n_tail
    multiplicity = Counter(view.retained)
    pairs = []
    at_or_above = n
    for v in sorted(multiplicity):
        pairs.append((v, at_or_above / n))
        at_or_above -= multiplicity[v]
    return pairs
