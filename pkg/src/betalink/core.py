"""Datafiles and bipartite-matching representations.

A matching between file 1 (n1 records) and file 2 (n2 records) is stored as
a labeling of file 2: entry j holds the file-1 index it links to, or the
sentinel n1 + j when record j has no link.  The equivalent 0/1 matrix view
exists for set-style consumers.  All record indices are 1-based in file
order so that labels round-trip through exported text unchanged.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

import numpy as np

FIELD_KINDS = ("string", "categorical", "integer", "date-part")


class LabelingError(ValueError):
    """A labeling or matching matrix violates the one-to-one constraints."""


class DataFileError(ValueError):
    """A datafile does not conform to its schema."""


@dataclass(frozen=True)
class FieldSchema:
    """One field of a datafile.

    Attributes
    ----------
    name : str
        Column name, unique within a schema.
    kind : str
        One of ``string``, ``categorical``, ``integer``, ``date-part``.
    missing_token : str
        Raw value treated as missing on ingest (default: empty string).
    """

    name: str
    kind: str = "string"
    missing_token: str = ""

    def __post_init__(self) -> None:
        if self.kind not in FIELD_KINDS:
            raise DataFileError(f"unknown field kind {self.kind!r} for {self.name!r}")


@dataclass(frozen=True)
class DataFile:
    """An ordered, duplicate-free file of records.

    Records are identified by their 1-based position.  ``rows`` holds one
    tuple per record with ``None`` marking missing values; ``ids`` keeps an
    optional external identifier per record for reporting only.
    """

    schema: tuple[FieldSchema, ...]
    rows: tuple[tuple[str | None, ...], ...]
    ids: tuple[str, ...] | None = None
    name: str = ""

    def __post_init__(self) -> None:
        names = [f.name for f in self.schema]
        if len(set(names)) != len(names):
            raise DataFileError("duplicate field names in schema")
        width = len(self.schema)
        for k, row in enumerate(self.rows):
            if len(row) != width:
                raise DataFileError(f"row {k + 1} has {len(row)} values, schema has {width}")
        if self.ids is not None:
            if len(self.ids) != len(self.rows):
                raise DataFileError("ids length differs from record count")
            if len(set(self.ids)) != len(self.ids):
                raise DataFileError("record ids are not unique")

    @property
    def n(self) -> int:
        return len(self.rows)

    @property
    def field_names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.schema)

    def field_index(self, name: str) -> int:
        try:
            return self.field_names.index(name)
        except ValueError:
            raise DataFileError(f"no field named {name!r}") from None

    def column(self, name: str) -> list[str | None]:
        k = self.field_index(name)
        return [row[k] for row in self.rows]


@dataclass(frozen=True)
class FilePair:
    """Two datafiles oriented so that ``file1`` is the one with more records.

    ``swapped`` records whether the constructor arguments arrived in the
    opposite order; exports use it to report results in the original
    orientation.
    """

    file1: DataFile
    file2: DataFile
    swapped: bool = False

    def __post_init__(self) -> None:
        if self.file1.n < self.file2.n:
            raise DataFileError("file1 must hold at least as many records as file2")
        if self.file1.field_names != self.file2.field_names:
            raise DataFileError("files must share the same schema fields")

    @classmethod
    def orient(cls, a: DataFile, b: DataFile) -> "FilePair":
        """Order two files so the larger is file1, remembering the swap."""
        if a.n >= b.n:
            return cls(a, b, swapped=False)
        return cls(b, a, swapped=True)

    @property
    def n1(self) -> int:
        return self.file1.n

    @property
    def n2(self) -> int:
        return self.file2.n


@dataclass(frozen=True)
class MatchingLabeling:
    """Labels of file-2 records: ``labels[j-1] = i`` links j to file-1 record
    i (1 <= i <= n1); ``labels[j-1] = n1 + j`` leaves j unmatched."""

    n1: int
    labels: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.n1 < 0:
            raise LabelingError("n1 must be non-negative")
        seen: set[int] = set()
        for j, z in enumerate(self.labels, start=1):
            if not (1 <= z <= self.n1 or z == self.n1 + j):
                raise LabelingError(
                    f"label {z} at position {j} is neither a file-1 index nor {self.n1}+{j}"
                )
            if z <= self.n1:
                if z in seen:
                    raise LabelingError(f"file-1 record {z} is linked twice")
                seen.add(z)

    @property
    def n2(self) -> int:
        return len(self.labels)

    def is_linked(self, j: int) -> bool:
        return self.labels[j - 1] <= self.n1

    def matched_pairs(self) -> list[tuple[int, int]]:
        """Linked (i, j) pairs in j order."""
        return [(z, j) for j, z in enumerate(self.labels, start=1) if z <= self.n1]

    def to_array(self) -> np.ndarray:
        return np.asarray(self.labels, dtype=np.int64)

    @classmethod
    def from_array(cls, n1: int, labels: np.ndarray | list[int]) -> "MatchingLabeling":
        return cls(n1, tuple(int(z) for z in labels))

    @classmethod
    def empty(cls, n1: int, n2: int) -> "MatchingLabeling":
        """The matching with every file-2 record unmatched."""
        return cls(n1, tuple(n1 + j for j in range(1, n2 + 1)))


@dataclass(frozen=True)
class MatchingMatrix:
    """Set-of-pairs view of a matching: (i, j) present means i links to j."""

    n1: int
    n2: int
    pairs: frozenset[tuple[int, int]]

    def __post_init__(self) -> None:
        rows: set[int] = set()
        cols: set[int] = set()
        for i, j in self.pairs:
            if not (1 <= i <= self.n1 and 1 <= j <= self.n2):
                raise LabelingError(f"pair ({i}, {j}) out of range")
            if i in rows:
                raise LabelingError(f"file-1 record {i} appears in two pairs")
            if j in cols:
                raise LabelingError(f"file-2 record {j} appears in two pairs")
            rows.add(i)
            cols.add(j)


def labeling_to_matrix(z: MatchingLabeling) -> MatchingMatrix:
    return MatchingMatrix(z.n1, z.n2, frozenset(z.matched_pairs()))


def matrix_to_labeling(m: MatchingMatrix) -> MatchingLabeling:
    by_j = {j: i for i, j in m.pairs}
    labels = tuple(by_j.get(j, m.n1 + j) for j in range(1, m.n2 + 1))
    return MatchingLabeling(m.n1, labels)


def overlap_size(z: MatchingLabeling) -> int:
    """Number of linked pairs in the matching."""
    return sum(1 for lab in z.labels if lab <= z.n1)


def enumerate_labelings(n1: int, n2: int) -> Iterator[tuple[int, ...]]:
    """Yield every valid labeling for files of sizes n1, n2.

    The count grows as sum_k C(n2,k) n1!/(n1-k)!; callers guard size.
    """

    def rec(j: int, prefix: list[int], used: set[int]) -> Iterator[tuple[int, ...]]:
        if j > n2:
            yield tuple(prefix)
            return
        for i in range(1, n1 + 1):
            if i not in used:
                prefix.append(i)
                used.add(i)
                yield from rec(j + 1, prefix, used)
                used.remove(i)
                prefix.pop()
        prefix.append(n1 + j)
        yield from rec(j + 1, prefix, used)
        prefix.pop()

    yield from rec(1, [], set())


def count_labelings(n1: int, n2: int) -> int:
    """Number of bipartite matchings between files of sizes n1 and n2."""
    total = 0
    term = 1  # n1!/(n1-k)! * C(n2, k) built incrementally
    for k in range(0, min(n1, n2) + 1):
        if k > 0:
            term = term * (n1 - k + 1) * (n2 - k + 1) // k
        total += term
    return total


def load_datafile(
    path: str | Path,
    schema: tuple[FieldSchema, ...] | list[FieldSchema],
    *,
    missing_token: str | None = None,
    id_field: str | None = None,
    name: str | None = None,
) -> DataFile:
    """Read a delimiter-separated text file with a header row into a DataFile.

    Columns are matched to the schema by header name; extra columns are
    ignored.  ``missing_token``, when given, overrides every field's own
    missing token for this file.  Values of integer and date-part fields
    must parse as integers unless missing.
    """
    schema = tuple(schema)
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFileError(f"{path}: empty file") from None
        positions = {h: k for k, h in enumerate(header)}
        for f in schema:
            if f.name not in positions:
                raise DataFileError(f"{path}: missing column {f.name!r}")
        if id_field is not None and id_field not in positions:
            raise DataFileError(f"{path}: missing id column {id_field!r}")
        rows: list[tuple[str | None, ...]] = []
        ids: list[str] = []
        for lineno, rec in enumerate(reader, start=2):
            vals: list[str | None] = []
            for f in schema:
                tok = f.missing_token if missing_token is None else missing_token
                raw = rec[positions[f.name]] if positions[f.name] < len(rec) else tok
                if raw == tok:
                    vals.append(None)
                    continue
                if f.kind in ("integer", "date-part"):
                    try:
                        int(raw)
                    except ValueError:
                        raise DataFileError(
                            f"{path}:{lineno}: field {f.name!r} value {raw!r} is not an integer"
                        ) from None
                vals.append(raw)
            rows.append(tuple(vals))
            if id_field is not None:
                ids.append(rec[positions[id_field]])
    return DataFile(
        schema=schema,
        rows=tuple(rows),
        ids=tuple(ids) if id_field is not None else None,
        name=name if name is not None else path.name,
    )


def write_datafile(df: DataFile, path: str | Path, *, id_field: str | None = None) -> None:
    """Write a DataFile as CSV with a header row, inverse of load_datafile.

    Missing values are written as each field's missing token.  When the
    file carries record ids, they go in a leading column named by
    ``id_field`` (default ``"id"``).
    """
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        header = [f.name for f in df.schema]
        if df.ids is not None:
            header = [(id_field or "id"), *header]
        w.writerow(header)
        for r, row in enumerate(df.rows):
            vals = [
                f.missing_token if v is None else v
                for f, v in zip(df.schema, row)
            ]
            if df.ids is not None:
                vals = [df.ids[r], *vals]
            w.writerow(vals)
