"""Synthetic datafile-pair generator with controlled overlap and corruption.

Generates two duplicate-free files over four fields (given name, family
name, age bracket, occupation).  A configurable fraction of file-2 records
are true matches of file-1 records; each of those is distorted in a fixed
number of fields, with error types appropriate to the field (typos and
sound-alike rewrites for names, typos and missingness for the categorical
fields).  Everything is deterministic given the seed: each record draws its
corruption randomness from its own substream of the master seed, so records
could be distorted in parallel without changing the output.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from ._pools import (
    AGE_BRACKETS,
    AGE_OCCUPATION_WEIGHTS,
    FAMILY_NAMES,
    GIVEN_NAMES,
    KEYBOARD_NEIGHBORS,
    OCR_CONFUSIONS,
    OCCUPATIONS,
    PHONETIC_RULES,
)
from .core import DataFile, FieldSchema, MatchingLabeling

__all__ = [
    "CorruptionError",
    "CorruptionKind",
    "FIELD_ERROR_KINDS",
    "GeneratorConfig",
    "corrupt_value",
    "generate_pair",
]

_ALPHABET = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"


class CorruptionError(ValueError):
    """Raised for corruption requests that do not apply to the value or field."""


class CorruptionKind(str, enum.Enum):
    """One family of recording errors."""

    MISSING = "missing"
    EDIT = "edit"
    OCR = "ocr"
    KEYBOARD = "keyboard"
    PHONETIC = "phonetic"


# Which error families can hit which kind of field: free-text name fields
# never go missing here, and categorical codes only suffer typing errors.
FIELD_ERROR_KINDS = {
    "name": (
        CorruptionKind.EDIT,
        CorruptionKind.OCR,
        CorruptionKind.KEYBOARD,
        CorruptionKind.PHONETIC,
    ),
    "category": (CorruptionKind.MISSING, CorruptionKind.KEYBOARD),
}


def _substitute(value: str, rng: np.random.Generator) -> str:
    pos = int(rng.integers(len(value)))
    choices = [c for c in _ALPHABET if c != value[pos]]
    ch = choices[int(rng.integers(len(choices)))]
    return value[:pos] + ch + value[pos + 1 :]


def _edit(value: str, rng: np.random.Generator) -> str:
    op = int(rng.integers(3))
    if op == 0 and len(value) > 1:  # deletion; never empty the value
        pos = int(rng.integers(len(value)))
        return value[:pos] + value[pos + 1 :]
    if op == 1:  # insertion
        pos = int(rng.integers(len(value) + 1))
        ch = _ALPHABET[int(rng.integers(len(_ALPHABET)))]
        return value[:pos] + ch + value[pos:]
    return _substitute(value, rng)


def _ocr(value: str, rng: np.random.Generator) -> str:
    sites = []
    for src, dst in OCR_CONFUSIONS:
        start = value.find(src)
        while start >= 0:
            sites.append((start, src, dst))
            start = value.find(src, start + 1)
    if not sites:
        return _substitute(value, rng)
    start, src, dst = sites[int(rng.integers(len(sites)))]
    return value[: start] + dst + value[start + len(src) :]


def _keyboard(value: str, rng: np.random.Generator) -> str:
    sites = [pos for pos, ch in enumerate(value) if ch.lower() in KEYBOARD_NEIGHBORS]
    if not sites:
        return _substitute(value, rng)
    pos = sites[int(rng.integers(len(sites)))]
    neighbors = KEYBOARD_NEIGHBORS[value[pos].lower()]
    ch = neighbors[int(rng.integers(len(neighbors)))]
    if value[pos].isupper():
        ch = ch.upper()
    return value[:pos] + ch + value[pos + 1 :]


def _phonetic(value: str, rng: np.random.Generator) -> str:
    rules = [(src, dst) for src, dst in PHONETIC_RULES if src in value]
    if not rules:
        return _substitute(value, rng)
    src, dst = rules[int(rng.integers(len(rules)))]
    starts = []
    start = value.find(src)
    while start >= 0:
        starts.append(start)
        start = value.find(src, start + 1)
    start = starts[int(rng.integers(len(starts)))]
    return value[: start] + dst + value[start + len(src) :]


def corrupt_value(
    kind: CorruptionKind,
    value: str,
    rng: np.random.Generator,
    field_role: str | None = None,
) -> str | None:
    """Apply one corruption operation to a field value.

    ``edit`` performs a random insertion, deletion, or substitution;
    ``keyboard`` replaces a character with a key-adjacent one; ``ocr``
    rewrites one visually confusable pattern; ``phonetic`` applies one
    sound-alike rule; ``missing`` returns ``None``.  When an ocr, keyboard,
    or phonetic request finds nothing applicable in the value, a single
    random substitution is applied instead so the call still corrupts.

    Parameters
    ----------
    kind : CorruptionKind
        Error family to apply.
    value : str
        Current field value; must not be missing.
    rng : numpy.random.Generator
        Source of randomness.
    field_role : str, optional
        ``"name"`` or ``"category"``.  When given, the kind is checked
        against the field's allowed error families and a mismatch raises
        :class:`CorruptionError`.

    Returns
    -------
    str or None
        The corrupted value, or ``None`` for a missing-value error.
    """
    kind = CorruptionKind(kind)
    if field_role is not None:
        if field_role not in FIELD_ERROR_KINDS:
            raise CorruptionError(f"unknown field role {field_role!r}")
        if kind not in FIELD_ERROR_KINDS[field_role]:
            raise CorruptionError(
                f"corruption kind {kind.value!r} does not apply to {field_role!r} fields"
            )
    if value is None:
        raise CorruptionError("cannot corrupt a missing value")
    if not isinstance(value, str) or not value:
        raise CorruptionError(f"expected a non-empty string, got {value!r}")
    if kind is CorruptionKind.MISSING:
        return None
    if kind is CorruptionKind.EDIT:
        return _edit(value, rng)
    if kind is CorruptionKind.OCR:
        return _ocr(value, rng)
    if kind is CorruptionKind.KEYBOARD:
        return _keyboard(value, rng)
    return _phonetic(value, rng)


_FIELD_NAMES = ("given_name", "family_name", "age_bracket", "occupation")
_FIELD_KINDS = ("string", "string", "categorical", "categorical")
_FIELD_ROLES = ("name", "name", "category", "category")


@dataclass(frozen=True)
class GeneratorConfig:
    """Settings for one synthetic file pair.

    ``overlap`` is the fraction of file-2 records that truly match a file-1
    record; ``errors_per_record`` is the number of distinct fields distorted
    in every matched file-2 record, each receiving between one and
    ``max_errors_per_field`` corruption operations.
    """

    records_per_file: int = 500
    overlap: float = 1.0
    errors_per_record: int = 1
    max_errors_per_field: int = 3
    seed: int | None = None
    given_names: tuple[str, ...] = GIVEN_NAMES
    family_names: tuple[str, ...] = FAMILY_NAMES
    age_brackets: tuple[str, ...] = AGE_BRACKETS
    occupations: tuple[str, ...] = OCCUPATIONS

    def __post_init__(self) -> None:
        if self.records_per_file < 1:
            raise ValueError("records_per_file must be at least 1")
        if not 0.0 <= self.overlap <= 1.0:
            raise ValueError("overlap must lie in [0, 1]")
        if not 1 <= self.errors_per_record <= len(_FIELD_NAMES):
            raise ValueError(
                f"errors_per_record must lie in 1..{len(_FIELD_NAMES)}"
            )
        if not 1 <= self.max_errors_per_field <= 3:
            raise ValueError("max_errors_per_field must lie in 1..3")
        for pool_name in ("given_names", "family_names", "age_brackets", "occupations"):
            if not getattr(self, pool_name):
                raise ValueError(f"{pool_name} pool must be non-empty")

    @property
    def n_matches(self) -> int:
        return int(round(self.overlap * self.records_per_file))


def _rank_weights(k: int) -> np.ndarray:
    # Zipf-like weights so popular values collide between unrelated records
    w = 1.0 / (np.arange(k, dtype=np.float64) + 10.0)
    return w / w.sum()


def _sample_names(
    rng: np.random.Generator, pool: tuple[str, ...], count: int, second_rate: float
) -> list[str]:
    # some records carry a two-token name, which makes full-name collisions
    # between distinct people much rarer; second tokens are drawn flat so
    # two compounds rarely share one
    w = _rank_weights(len(pool))
    first = rng.choice(len(pool), size=count, p=w)
    second = rng.integers(len(pool), size=count)
    compound = rng.random(count) < second_rate
    out = []
    for k in range(count):
        if compound[k] and second[k] != first[k]:
            out.append(f"{pool[first[k]]} {pool[second[k]]}")
        else:
            out.append(pool[first[k]])
    return out


def _sample_entities(rng: np.random.Generator, cfg: GeneratorConfig, count: int) -> list[tuple]:
    given = _sample_names(rng, cfg.given_names, count, second_rate=0.35)
    family = _sample_names(rng, cfg.family_names, count, second_rate=0.25)
    joint = AGE_OCCUPATION_WEIGHTS[: len(cfg.age_brackets), : len(cfg.occupations)]
    flat = (joint / joint.sum()).ravel()
    cell = rng.choice(flat.size, size=count, p=flat)
    ai, oi = np.divmod(cell, len(cfg.occupations))
    return [
        (given[k], family[k], cfg.age_brackets[a], cfg.occupations[o])
        for k, (a, o) in enumerate(zip(ai, oi))
    ]


def _distort_record(row: tuple, rng: np.random.Generator, cfg: GeneratorConfig) -> tuple:
    out = list(row)
    fields = np.sort(rng.choice(len(out), size=cfg.errors_per_record, replace=False))
    for f in fields:
        role = _FIELD_ROLES[f]
        kinds = FIELD_ERROR_KINDS[role]
        # wrong categorical codes are usually left blank; typos in them are rarer
        kind_p = np.array([0.75, 0.25]) if role == "category" else None
        # Retry until the field actually differs; a short op chain can in
        # principle undo itself, and an erroneous field must stay erroneous.
        for _ in range(16):
            value: str | None = out[f]
            # most erroneous fields carry a single error; never more than max
            n_ops = min(int(rng.geometric(0.9)), cfg.max_errors_per_field)
            for _ in range(n_ops):
                kind = kinds[int(rng.choice(len(kinds), p=kind_p))]
                value = corrupt_value(kind, value, rng, field_role=role)
                if value is None:
                    break
            if value != out[f]:
                break
        else:
            value = _substitute(out[f], rng)
        out[f] = value
    return tuple(out)


def generate_pair(cfg: GeneratorConfig) -> tuple[DataFile, DataFile, MatchingLabeling]:
    """Generate two datafiles and the ground-truth matching between them.

    File 1 holds clean records.  File 2 holds distorted copies of
    ``cfg.n_matches`` randomly chosen file-1 records plus fresh clean
    records, in shuffled order.  The returned labeling maps each file-2
    record to its file-1 source, or marks it unmatched.
    """
    n = cfg.records_per_file
    n12 = cfg.n_matches
    ss = np.random.SeedSequence(cfg.seed)
    pop_ss, match_ss, shuffle_ss, corrupt_ss = ss.spawn(4)

    entities = _sample_entities(np.random.default_rng(pop_ss), cfg, 2 * n - n12)
    rows1 = entities[:n]
    extras = entities[n:]

    matched_src = np.sort(
        np.random.default_rng(match_ss).choice(n, size=n12, replace=False)
    )
    record_streams = corrupt_ss.spawn(n12)
    rows2 = [
        _distort_record(entities[i], np.random.default_rng(stream), cfg)
        for i, stream in zip(matched_src, record_streams)
    ]
    rows2.extend(extras)
    source = np.concatenate(
        [matched_src + 1, np.zeros(n - n12, dtype=np.int64)]
    )

    perm = np.random.default_rng(shuffle_ss).permutation(n)
    rows2 = [rows2[t] for t in perm]
    source = source[perm]
    positions = np.arange(1, n + 1)
    labels = np.where(source > 0, source, n + positions)

    schema = tuple(
        FieldSchema(name=f, kind=k) for f, k in zip(_FIELD_NAMES, _FIELD_KINDS)
    )
    file1 = DataFile(
        schema=schema,
        rows=tuple(rows1),
        ids=tuple(f"a{i}" for i in positions),
        name="file1",
    )
    file2 = DataFile(
        schema=schema,
        rows=tuple(rows2),
        ids=tuple(f"b{j}" for j in positions),
        name="file2",
    )
    truth = MatchingLabeling(n1=n, labels=tuple(int(z) for z in labels))
    return file1, file2, truth
