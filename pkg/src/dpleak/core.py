"""Records, datasets and conditioned linear queries.

Everything here is immutable and noise-free: the mechanism adds noise on top
of :func:`eval_query`, and the attacker uses the same function to evaluate its
background knowledge locally.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping


class DataFormatError(ValueError):
    """A dataset file could not be parsed."""


@dataclass(frozen=True)
class Record:
    id: str
    value: float = 0.0


class LinearQuery(enum.Enum):
    """Linear queries: q(A | B) = q(A) + q(B) for disjoint A, B."""

    COUNT = "count"
    SUM = "sum"


@dataclass(frozen=True)
class Condition:
    """Explicit id set selecting the records a query runs over.

    A condition may name ids that are absent from the dataset; those simply
    do not contribute.
    """

    member_ids: frozenset[str]

    def __init__(self, member_ids: Iterable[str] = ()):
        object.__setattr__(self, "member_ids", frozenset(member_ids))


class Dataset:
    """Set of records keyed by id, with an optional bound on ``|value|``.

    Adding a record whose id is already present is a no-op, both at
    construction and in :meth:`with_records`.
    """

    __slots__ = ("_records", "_value_bound")

    def __init__(self, records: Iterable[Record] = (), value_bound: float | None = None):
        if value_bound is not None and not value_bound > 0:
            raise ValueError(f"value_bound must be positive, got {value_bound}")
        table: dict[str, Record] = {}
        for rec in records:
            if rec.id in table:
                continue
            if value_bound is not None and abs(rec.value) > value_bound:
                raise ValueError(
                    f"record {rec.id!r} has |value| {abs(rec.value)} above bound {value_bound}"
                )
            table[rec.id] = rec
        self._records: Mapping[str, Record] = MappingProxyType(table)
        self._value_bound = value_bound

    @classmethod
    def from_ids(cls, ids: Iterable[str]) -> Dataset:
        return cls(Record(i) for i in ids)

    @property
    def value_bound(self) -> float | None:
        return self._value_bound

    @property
    def ids(self) -> frozenset[str]:
        return frozenset(self._records)

    def get(self, record_id: str) -> Record | None:
        return self._records.get(record_id)

    def with_records(self, records: Iterable[Record]) -> Dataset:
        return Dataset([*self._records.values(), *records], self._value_bound)

    def subset(self, ids: Iterable[str]) -> Dataset:
        return Dataset(
            (self._records[i] for i in ids if i in self._records), self._value_bound
        )

    def without(self, ids: Iterable[str]) -> Dataset:
        drop = set(ids)
        return Dataset(
            (r for i, r in self._records.items() if i not in drop), self._value_bound
        )

    def __contains__(self, record_id: object) -> bool:
        return record_id in self._records

    def __iter__(self) -> Iterator[Record]:
        return iter(self._records.values())

    def __len__(self) -> int:
        return len(self._records)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            dict(self._records) == dict(other._records)
            and self._value_bound == other._value_bound
        )

    def __repr__(self) -> str:
        return f"Dataset(n={len(self)}, value_bound={self._value_bound})"


def eval_query(q: LinearQuery, records: Iterable[Record]) -> float:
    """Exact answer of ``q`` over ``records``. Count ignores values."""
    if q is LinearQuery.COUNT:
        return sum(1 for _ in records)
    if q is LinearQuery.SUM:
        return math.fsum(r.value for r in records)
    raise TypeError(f"unsupported query {q!r}")


def apply_condition(s: Condition, D: Dataset) -> frozenset[Record]:
    """Effective record set of ``s`` over ``D``, i.e. ``D_s`` intersected with ``D``."""
    out = []
    for i in s.member_ids:
        rec = D.get(i)
        if rec is not None:
            out.append(rec)
    return frozenset(out)


def sensitivity(q: LinearQuery, D: Dataset) -> float:
    """Global sensitivity: 1 for Count, the declared value bound for Sum."""
    if q is LinearQuery.COUNT:
        return 1.0
    if q is LinearQuery.SUM:
        if D.value_bound is None or not D.value_bound > 0:
            raise ValueError("Sum sensitivity needs a positive declared value_bound")
        return float(D.value_bound)
    raise TypeError(f"unsupported query {q!r}")


def load_jsonl(path: str | Path, value_bound: float | None = None) -> Dataset:
    """Load a dataset from JSON lines of the form ``{"id": str, "value": number}``.

    ``value`` may be omitted (Count ignores it). Blank lines are skipped.
    """
    path = Path(path)
    records = []
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise DataFormatError(f"{path}: {exc}") from exc
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from exc
        if not isinstance(obj, dict) or not isinstance(obj.get("id"), str):
            raise DataFormatError(f"{path}:{lineno}: expected an object with a string 'id'")
        value = obj.get("value", 0.0)
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise DataFormatError(f"{path}:{lineno}: 'value' must be a number")
        records.append(Record(obj["id"], float(value)))
    try:
        return Dataset(records, value_bound)
    except ValueError as exc:
        raise DataFormatError(f"{path}: {exc}") from exc
