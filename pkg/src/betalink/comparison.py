"""Pairwise record comparisons reduced to ordinal disagreement levels.

Each compared field turns a record pair into a level gamma in {0, .., L_f}:
0 is exact agreement and higher levels are stronger disagreement.  Levels
come from binning a similarity value into consecutive intervals
I_0 = [0, t_0], I_l = (t_{l-1}, t_l], with the last interval extending to
the comparator's maximum, so level = #{thresholds < similarity} with the
right endpoint closed.  A comparison against a missing value is unobserved
and carries no level.
"""

from __future__ import annotations

import csv
import functools
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .core import DataFile

# Level value marking an unobserved comparison inside packed arrays.
MISSING_LEVEL = 255

COMPARATOR_KINDS = (
    "normalized-levenshtein",
    "modified-levenshtein",
    "absolute-difference",
    "binary-agreement",
    "adjacency",
)

# Unit-interval comparators get the standard four string bins; date parts
# get the year/month/day bins; binary fields agree or disagree.
DEFAULT_THRESHOLDS = {
    "normalized-levenshtein": (0.0, 0.25, 0.5),
    "modified-levenshtein": (0.0, 0.25, 0.5),
    "binary-agreement": (0.0,),
    "year": (0.0, 1.0, 2.0),
    "month": (0.0, 1.0, 3.0),
    "day": (0.0, 2.0, 7.0),
}

_UNIT_KINDS = ("normalized-levenshtein", "modified-levenshtein")


class ComparisonError(ValueError):
    """Comparison construction failed."""


class ComparisonConfigError(ComparisonError):
    """A comparator specification is invalid or references unknown fields."""


class ComparisonFormatError(ComparisonError):
    """An exported comparison file does not round-trip."""


def levenshtein(a: str, b: str) -> int:
    """Edit distance (insert, delete, substitute each cost 1)."""
    return _levenshtein_cached(a, b) if a <= b else _levenshtein_cached(b, a)


@functools.lru_cache(maxsize=1 << 20)
def _levenshtein_cached(a: str, b: str) -> int:
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    if len(a) > len(b):
        a, b = b, a
    prev = list(range(len(a) + 1))
    cur = [0] * (len(a) + 1)
    for jj, cb in enumerate(b, start=1):
        cur[0] = jj
        for ii, ca in enumerate(a, start=1):
            cur[ii] = min(
                prev[ii] + 1,
                cur[ii - 1] + 1,
                prev[ii - 1] + (ca != cb),
            )
        prev, cur = cur, prev
    return prev[len(a)]


def normalized_levenshtein(a: str, b: str) -> float:
    """Edit distance divided by the longer length; 0 means identical."""
    if a == b:
        return 0.0
    longest = max(len(a), len(b))
    return levenshtein(a, b) / longest


def modified_levenshtein(a: str, b: str) -> float:
    """Token-tolerant name disagreement in [0, 1].

    The names are split on whitespace and the tokens of the shorter list
    are aligned one-to-one with tokens of the longer list so that the sum
    of per-token normalized edit distances is minimal; the value is the
    mean over aligned token pairs.  Tokens of the longer name left without
    a partner are ignored, so dropping a middle name keeps agreement at 0.
    """
    ta, tb = a.split(), b.split()
    if not ta and not tb:
        return 0.0
    if not ta or not tb:
        return 1.0
    if len(ta) > len(tb):
        ta, tb = tb, ta
    if len(ta) == 1 and len(tb) == 1:
        return normalized_levenshtein(ta[0], tb[0])
    cost = np.array([[normalized_levenshtein(x, y) for y in tb] for x in ta])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].mean())


@dataclass(frozen=True)
class ComparatorSpec:
    """How one field is compared and binned.

    ``thresholds`` are the strictly increasing interval cut points; the
    number of levels is ``len(thresholds) + 1``.  Adjacency comparators
    carry a symmetric relation of value pairs counting as level 1.
    """

    field: str
    kind: str
    thresholds: tuple[float, ...] = ()
    adjacency: frozenset[tuple[str, str]] | None = None

    def __post_init__(self) -> None:
        if self.kind not in COMPARATOR_KINDS:
            raise ComparisonConfigError(f"unknown comparator kind {self.kind!r}")
        if not self.thresholds:
            object.__setattr__(self, "thresholds", self._default_thresholds())
        ts = self.thresholds
        if len(ts) < 1:
            raise ComparisonConfigError(f"{self.field}: at least one threshold required")
        if any(t2 <= t1 for t1, t2 in zip(ts, ts[1:])):
            raise ComparisonConfigError(f"{self.field}: thresholds must strictly increase")
        if ts[0] < 0:
            raise ComparisonConfigError(f"{self.field}: thresholds must be non-negative")
        if self.kind in _UNIT_KINDS and ts[-1] >= 1:
            raise ComparisonConfigError(
                f"{self.field}: unit-interval comparator thresholds must stay below 1"
            )
        if self.kind == "binary-agreement" and ts != (0.0,):
            raise ComparisonConfigError(f"{self.field}: binary-agreement uses thresholds (0,)")
        if self.kind == "adjacency":
            if ts != (0.0, 1.0):
                raise ComparisonConfigError(f"{self.field}: adjacency uses thresholds (0, 1)")
            if self.adjacency is None:
                raise ComparisonConfigError(f"{self.field}: adjacency relation required")
            sym = set()
            for x, y in self.adjacency:
                if x == y:
                    raise ComparisonConfigError(f"{self.field}: adjacency pair ({x!r}, {x!r})")
                sym.add((x, y))
                sym.add((y, x))
            object.__setattr__(self, "adjacency", frozenset(sym))

    def _default_thresholds(self) -> tuple[float, ...]:
        if self.kind == "adjacency":
            return (0.0, 1.0)
        if self.kind in DEFAULT_THRESHOLDS:
            return tuple(DEFAULT_THRESHOLDS[self.kind])
        raise ComparisonConfigError(f"{self.field}: thresholds required for {self.kind}")

    @property
    def levels(self) -> int:
        return len(self.thresholds) + 1

    @classmethod
    def from_config(cls, doc: dict) -> "ComparatorSpec":
        """Build a spec from one entry of a comparison configuration document."""
        kind = doc.get("comparator")
        if kind is None:
            raise ComparisonConfigError(f"{doc.get('name')}: missing comparator kind")
        thresholds = doc.get("thresholds")
        if thresholds is None and doc.get("date_part") is not None:
            part = doc["date_part"]
            if part not in ("year", "month", "day"):
                raise ComparisonConfigError(f"unknown date part {part!r}")
            thresholds = DEFAULT_THRESHOLDS[part]
        adjacency = doc.get("adjacency")
        return cls(
            field=doc["name"],
            kind=kind,
            thresholds=tuple(float(t) for t in thresholds) if thresholds else (),
            adjacency=frozenset(tuple(p) for p in adjacency) if adjacency else None,
        )


@dataclass(frozen=True)
class BlockingSpec:
    """Exact-agreement blocking keys: only record pairs agreeing on every
    key field are compared.  Records missing any key value fall into a
    residual block and are compared against nothing."""

    fields: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.fields:
            raise ComparisonConfigError("blocking requires at least one field")


def similarity(spec: ComparatorSpec, a: str, b: str) -> float:
    """Raw similarity for interval comparators (0 = perfect agreement)."""
    if spec.kind == "normalized-levenshtein":
        return normalized_levenshtein(a, b)
    if spec.kind == "modified-levenshtein":
        return modified_levenshtein(a, b)
    if spec.kind == "binary-agreement":
        return 0.0 if a == b else 1.0
    if spec.kind == "absolute-difference":
        return abs(float(int(a)) - float(int(b)))
    raise ComparisonConfigError(f"{spec.kind} has no scalar similarity")


def bin_level(spec: ComparatorSpec, s: float) -> int:
    """Interval index of a similarity value: #{thresholds < s}."""
    if s < 0:
        raise ComparisonError(f"{spec.field}: similarity {s} below 0")
    if spec.kind in _UNIT_KINDS and s > 1:
        raise ComparisonError(f"{spec.field}: similarity {s} above 1")
    return int(np.searchsorted(np.asarray(spec.thresholds), s, side="left"))


def compare_field(
    spec: ComparatorSpec, a: str | None, b: str | None
) -> tuple[int | None, bool]:
    """Level and observed flag for one value pair; missing values are
    unobserved and produce no level."""
    if a is None or b is None:
        return None, False
    if spec.kind == "adjacency":
        if a == b:
            return 0, True
        assert spec.adjacency is not None
        return (1, True) if (a, b) in spec.adjacency else (2, True)
    return bin_level(spec, similarity(spec, a, b)), True


def candidate_pair_count(
    a: DataFile | int,
    b: DataFile | int,
    blocking: BlockingSpec | None = None,
) -> int:
    """Number of record pairs the comparison step will produce."""
    if blocking is None:
        na = a if isinstance(a, int) else a.n
        nb = b if isinstance(b, int) else b.n
        return na * nb
    if isinstance(a, int) or isinstance(b, int):
        raise ComparisonConfigError("blocking counts need the actual datafiles")
    ka = _block_keys(a, blocking)
    kb = _block_keys(b, blocking)
    return sum(len(ids) * len(kb[key]) for key, ids in ka.items() if key in kb)


def _block_keys(f: DataFile, blocking: BlockingSpec) -> dict[tuple, list[int]]:
    cols = []
    for name in blocking.fields:
        try:
            cols.append(f.column(name))
        except Exception:
            raise ComparisonConfigError(f"blocking references unknown field {name!r}") from None
    out: dict[tuple, list[int]] = {}
    for idx in range(f.n):
        key = tuple(col[idx] for col in cols)
        if any(v is None for v in key):
            continue  # residual block: compared against nothing
        out.setdefault(key, []).append(idx + 1)
    return out


@dataclass(eq=False)
class ComparisonData:
    """Ordinal comparison vectors for every candidate record pair.

    ``levels[p, f]`` holds the level of pair p on field f, or MISSING_LEVEL
    when the comparison is unobserved.  Pairs are sorted i-major, j-minor;
    ``complete`` marks the no-blocking case where all n1*n2 pairs appear.
    """

    n1: int
    n2: int
    field_names: tuple[str, ...]
    level_counts: tuple[int, ...]
    pair_i: np.ndarray
    pair_j: np.ndarray
    levels: np.ndarray
    complete: bool

    def __post_init__(self) -> None:
        self.pair_i = np.asarray(self.pair_i, dtype=np.int32)
        self.pair_j = np.asarray(self.pair_j, dtype=np.int32)
        self.levels = np.asarray(self.levels, dtype=np.uint8)
        if self.levels.shape != (len(self.pair_i), len(self.field_names)):
            raise ComparisonError("levels shape does not match pairs and fields")
        if len(self.level_counts) != len(self.field_names):
            raise ComparisonError("level_counts does not match fields")
        self._packed: PackedConfigs | None = None

    @property
    def n_pairs(self) -> int:
        return len(self.pair_i)

    @property
    def n_fields(self) -> int:
        return len(self.field_names)

    def observed(self) -> np.ndarray:
        return self.levels != MISSING_LEVEL

    def validate(self) -> None:
        """Check ordering, ranges, and completeness; raises on violation."""
        if np.any(self.pair_i < 1) or np.any(self.pair_i > self.n1):
            raise ComparisonError("pair_i out of range")
        if np.any(self.pair_j < 1) or np.any(self.pair_j > self.n2):
            raise ComparisonError("pair_j out of range")
        order = np.lexsort((self.pair_j, self.pair_i))
        if not np.array_equal(order, np.arange(self.n_pairs)):
            raise ComparisonError("pairs are not sorted i-major")
        key = self.pair_i.astype(np.int64) * (self.n2 + 1) + self.pair_j
        if len(np.unique(key)) != self.n_pairs:
            raise ComparisonError("duplicate pairs")
        if self.complete and self.n_pairs != self.n1 * self.n2:
            raise ComparisonError("complete comparison must cover all pairs")
        for f, count in enumerate(self.level_counts):
            col = self.levels[:, f]
            bad = (col != MISSING_LEVEL) & (col >= count)
            if np.any(bad):
                raise ComparisonError(f"levels out of range on field {self.field_names[f]}")

    def pack(self) -> "PackedConfigs":
        """Group pairs by identical comparison vector (missingness included)."""
        if self._packed is None:
            cfg_levels, pair_index, counts = np.unique(
                self.levels, axis=0, return_inverse=True, return_counts=True
            )
            self._packed = PackedConfigs(
                levels=cfg_levels.astype(np.uint8),
                pair_index=pair_index.astype(np.int32).ravel(),
                counts=counts.astype(np.int64),
            )
        return self._packed

    def config_matrix(self) -> np.ndarray:
        """Dense (n2, n1) matrix of packed-configuration ids, -1 where the
        pair is not a candidate."""
        pk = self.pack()
        if self.complete:
            return np.ascontiguousarray(
                pk.pair_index.reshape(self.n1, self.n2).T.astype(np.int32)
            )
        ids = np.full((self.n2, self.n1), -1, dtype=np.int32)
        ids[self.pair_j - 1, self.pair_i - 1] = pk.pair_index
        return ids

    def pair_level_rows(self, pairs: Iterable[tuple[int, int]]) -> np.ndarray:
        """Level rows for specific (i, j) pairs; pairs outside the candidate
        set come back fully unobserved."""
        pairs = list(pairs)
        if self.complete:
            idx = [(i - 1) * self.n2 + (j - 1) for i, j in pairs]
            return (
                self.levels[idx]
                if pairs
                else np.zeros((0, self.n_fields), np.uint8)
            )
        lookup = {
            (int(i), int(j)): p for p, (i, j) in enumerate(zip(self.pair_i, self.pair_j))
        }
        rows = np.full((len(pairs), self.n_fields), MISSING_LEVEL, dtype=np.uint8)
        for k, (i, j) in enumerate(pairs):
            p = lookup.get((i, j))
            if p is not None:
                rows[k] = self.levels[p]
        return rows

    def pair_rows_for_j(self, j: int) -> tuple[np.ndarray, np.ndarray]:
        """Level rows of all pairs (1..n1, j) plus a candidate mask."""
        if not 1 <= j <= self.n2:
            raise ComparisonError(f"record {j} out of range")
        if self.complete:
            rows = self.levels[j - 1 :: self.n2]
            return rows, np.ones(self.n1, dtype=bool)
        rows = np.full((self.n1, self.n_fields), MISSING_LEVEL, dtype=np.uint8)
        cand = np.zeros(self.n1, dtype=bool)
        sel = self.pair_j == j
        rows[self.pair_i[sel] - 1] = self.levels[sel]
        cand[self.pair_i[sel] - 1] = True
        return rows, cand

    def level_totals(self) -> list[np.ndarray]:
        """Observed level counts per field over all candidate pairs."""
        pk = self.pack()
        out = []
        for f, count in enumerate(self.level_counts):
            col = pk.levels[:, f]
            obs = col != MISSING_LEVEL
            out.append(
                np.bincount(col[obs], weights=pk.counts[obs], minlength=count).astype(np.int64)
            )
        return out

    def to_csv(self, path: str | Path) -> None:
        """Write pairs as i, j, one level column per field; NA = unobserved."""
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["i", "j", *self.field_names])
            for p in range(self.n_pairs):
                row: list = [int(self.pair_i[p]), int(self.pair_j[p])]
                for f in range(self.n_fields):
                    v = self.levels[p, f]
                    row.append("NA" if v == MISSING_LEVEL else int(v))
                w.writerow(row)

    @classmethod
    def from_csv(
        cls,
        path: str | Path,
        *,
        n1: int,
        n2: int,
        level_counts: Sequence[int],
        complete: bool,
    ) -> "ComparisonData":
        with Path(path).open(newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if header[:2] != ["i", "j"]:
                raise ComparisonFormatError(f"{path}: expected i,j columns first")
            fields = tuple(header[2:])
            pi, pj, lv = [], [], []
            for rec in reader:
                pi.append(int(rec[0]))
                pj.append(int(rec[1]))
                lv.append(
                    [MISSING_LEVEL if v == "NA" else int(v) for v in rec[2 : 2 + len(fields)]]
                )
        return cls(
            n1=n1,
            n2=n2,
            field_names=fields,
            level_counts=tuple(int(c) for c in level_counts),
            pair_i=np.asarray(pi, dtype=np.int32),
            pair_j=np.asarray(pj, dtype=np.int32),
            levels=np.asarray(lv, dtype=np.uint8) if lv else np.zeros((0, len(fields)), np.uint8),
            complete=complete,
        )


@dataclass(frozen=True)
class PackedConfigs:
    """Distinct comparison vectors with multiplicities.

    ``pair_index[p]`` is the row of ``levels`` holding pair p's vector;
    ``counts`` are the number of pairs per distinct vector.
    """

    levels: np.ndarray
    pair_index: np.ndarray
    counts: np.ndarray

    @property
    def n_configs(self) -> int:
        return len(self.counts)


def _string_level_column(
    spec: ComparatorSpec,
    col1: list[str | None],
    col2: list[str | None],
    pair_i: np.ndarray,
    pair_j: np.ndarray,
) -> np.ndarray:
    """Levels for a string comparator over explicit pairs, computed once per
    distinct value pair."""
    u1: dict[str, int] = {}
    u2: dict[str, int] = {}
    idx1 = np.array([-1 if v is None else u1.setdefault(v, len(u1)) for v in col1], np.int32)
    idx2 = np.array([-1 if v is None else u2.setdefault(v, len(u2)) for v in col2], np.int32)
    vals1 = list(u1)
    vals2 = list(u2)
    sim = np.empty((max(len(vals1), 1), max(len(vals2), 1)), dtype=np.float64)
    fn = normalized_levenshtein if spec.kind == "normalized-levenshtein" else modified_levenshtein
    for a_ix, a in enumerate(vals1):
        row = sim[a_ix]
        for b_ix, b in enumerate(vals2):
            row[b_ix] = fn(a, b)
    table = np.searchsorted(np.asarray(spec.thresholds), sim, side="left").astype(np.uint8)
    ii = idx1[pair_i - 1]
    jj = idx2[pair_j - 1]
    out = table[np.maximum(ii, 0), np.maximum(jj, 0)]
    out[(ii < 0) | (jj < 0)] = MISSING_LEVEL
    return out


def _code_level_column(
    spec: ComparatorSpec,
    col1: list[str | None],
    col2: list[str | None],
    pair_i: np.ndarray,
    pair_j: np.ndarray,
) -> np.ndarray:
    """Levels for binary-agreement and adjacency comparators via a shared
    value vocabulary."""
    vocab: dict[str, int] = {}
    idx1 = np.array([-1 if v is None else vocab.setdefault(v, len(vocab)) for v in col1], np.int32)
    idx2 = np.array([-1 if v is None else vocab.setdefault(v, len(vocab)) for v in col2], np.int32)
    ii = idx1[pair_i - 1]
    jj = idx2[pair_j - 1]
    if spec.kind == "binary-agreement":
        out = np.where(ii == jj, 0, 1).astype(np.uint8)
    else:
        vals = list(vocab)
        n = len(vals)
        table = np.full((n, n), 2, dtype=np.uint8)
        np.fill_diagonal(table, 0)
        assert spec.adjacency is not None
        for a, b in spec.adjacency:
            if a in vocab and b in vocab:
                table[vocab[a], vocab[b]] = 1
        out = table[np.maximum(ii, 0), np.maximum(jj, 0)].astype(np.uint8)
    out[(ii < 0) | (jj < 0)] = MISSING_LEVEL
    return out


def _numeric_level_column(
    spec: ComparatorSpec,
    col1: list[str | None],
    col2: list[str | None],
    pair_i: np.ndarray,
    pair_j: np.ndarray,
) -> np.ndarray:
    a1 = np.array([np.nan if v is None else float(int(v)) for v in col1])
    a2 = np.array([np.nan if v is None else float(int(v)) for v in col2])
    diff = np.abs(a1[pair_i - 1] - a2[pair_j - 1])
    ok = ~np.isnan(diff)
    out = np.full(len(diff), MISSING_LEVEL, dtype=np.uint8)
    out[ok] = np.searchsorted(np.asarray(spec.thresholds), diff[ok], side="left")
    return out


def build_comparison_data(
    file1: DataFile,
    file2: DataFile,
    specs: Sequence[ComparatorSpec],
    blocking: BlockingSpec | None = None,
) -> ComparisonData:
    """Compare every candidate pair of two oriented files.

    Candidates are all n1*n2 pairs, or the union of within-block cross
    products under exact blocking.  Raises if a spec references a field the
    files do not share or if no candidate pair remains.
    """
    if not specs:
        raise ComparisonConfigError("at least one comparator required")
    names = set(file1.field_names)
    for spec in specs:
        if spec.field not in names or spec.field not in set(file2.field_names):
            raise ComparisonConfigError(f"comparator references unknown field {spec.field!r}")
    n1, n2 = file1.n, file2.n
    if blocking is None:
        pair_i = np.repeat(np.arange(1, n1 + 1, dtype=np.int32), n2)
        pair_j = np.tile(np.arange(1, n2 + 1, dtype=np.int32), n1)
    else:
        k1 = _block_keys(file1, blocking)
        k2 = _block_keys(file2, blocking)
        pi: list[int] = []
        pj: list[int] = []
        for key, ids1 in k1.items():
            ids2 = k2.get(key)
            if not ids2:
                continue
            for i in ids1:
                pi.extend([i] * len(ids2))
                pj.extend(ids2)
        if not pi:
            raise ComparisonError("no candidate pairs survive blocking")
        order = np.lexsort((np.asarray(pj), np.asarray(pi)))
        pair_i = np.asarray(pi, dtype=np.int32)[order]
        pair_j = np.asarray(pj, dtype=np.int32)[order]
    cols = []
    for spec in specs:
        c1 = file1.column(spec.field)
        c2 = file2.column(spec.field)
        if spec.kind in _UNIT_KINDS:
            cols.append(_string_level_column(spec, c1, c2, pair_i, pair_j))
        elif spec.kind in ("binary-agreement", "adjacency"):
            cols.append(_code_level_column(spec, c1, c2, pair_i, pair_j))
        else:
            cols.append(_numeric_level_column(spec, c1, c2, pair_i, pair_j))
    data = ComparisonData(
        n1=n1,
        n2=n2,
        field_names=tuple(s.field for s in specs),
        level_counts=tuple(s.levels for s in specs),
        pair_i=pair_i,
        pair_j=pair_j,
        levels=np.column_stack(cols),
        complete=blocking is None,
    )
    return data
