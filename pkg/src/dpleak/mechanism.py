"""Stateful Laplace-mechanism black box with per-record budget accounting.

The black box behaves as follows:

* an identical query (kind, condition, epsilon) always gets the memoized
  answer and costs nothing more;
* every new query is answered;
* once the consumed budget exceeds the threshold, the box aborts for good.

Budget is charged per record: each answered query adds its epsilon to every
record in its effective set, and the consumed total is the maximum over
records. Queries over disjoint effective sets therefore compose in parallel,
and queries sharing a record compose sequentially on that record.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Union

import numpy as np

from dpleak.core import Condition, Dataset, LinearQuery, apply_condition, eval_query, sensitivity
from dpleak.stats import draw_uniform, laplace_from_uniform

_SEED_LIMIT = 2**64


@dataclass(frozen=True)
class QueryKey:
    kind: LinearQuery
    member_ids: frozenset[str]
    epsilon: float

    @classmethod
    def of(cls, q: LinearQuery, s: Condition, epsilon: float) -> QueryKey:
        return cls(q, s.member_ids, float(epsilon))


@dataclass(frozen=True)
class Answer:
    value: float
    charged: float


@dataclass(frozen=True)
class Aborted:
    """The black box refused to answer because the budget threshold was crossed."""


ABORTED = Aborted()
IssueOutcome = Union[Answer, Aborted]


class BudgetAccountant:
    """Cumulative epsilon per record id.

    Spends are kept as exact binary fractions so that, for example, ten
    charges of 0.1 total exactly ``float(10 * Fraction(0.1)) == 1.0``.
    """

    def __init__(self) -> None:
        self._spend: dict[str, Fraction] = {}
        self._max = Fraction(0)

    def charge(self, record_ids: Iterable[str], epsilon: float) -> None:
        eps = Fraction(epsilon)
        for rid in record_ids:
            new = self._spend.get(rid, Fraction(0)) + eps
            self._spend[rid] = new
            if new > self._max:
                self._max = new

    def spend(self, record_id: str) -> float:
        return float(self._spend.get(record_id, 0))

    def per_record(self) -> dict[str, float]:
        return {rid: float(v) for rid, v in self._spend.items()}

    def exceeds(self, threshold: float) -> bool:
        # compare the correctly rounded total, the same number callers see;
        # the exact sum of ten 0.1 doubles is a hair above 1
        return float(self._max) > threshold

    @property
    def total_consumed(self) -> float:
        return float(self._max)


class Mechanism:
    """Laplace black box over a fixed dataset.

    Noise for the k-th fresh query is the k-th draw of a PCG64 stream seeded
    with ``seed``, so any run is replayable from (seed, issue order).
    Instances are single-writer; use one per thread.
    """

    def __init__(self, dataset: Dataset, threshold: float = math.inf, seed: int = 0):
        if not threshold > 0:
            raise ValueError(f"abort threshold must be positive, got {threshold}")
        if isinstance(seed, bool) or not 0 <= int(seed) < _SEED_LIMIT:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.dataset = dataset
        self.threshold = float(threshold)
        self.seed = int(seed)
        self.accountant = BudgetAccountant()
        self._memo: dict[QueryKey, float] = {}
        self._rng = np.random.Generator(np.random.PCG64(self.seed))
        self._aborted = False

    @property
    def aborted(self) -> bool:
        return self._aborted

    @property
    def memo_size(self) -> int:
        return len(self._memo)

    def issue(self, q: LinearQuery, s: Condition, epsilon: float) -> IssueOutcome:
        """Answer ``q`` restricted to ``s`` with ``epsilon``-DP Laplace noise.

        Returns :data:`ABORTED` if the box has aborted, or if this very query
        pushes the consumed budget past the threshold (its answer is then
        withheld).
        """
        if not epsilon > 0 or math.isinf(epsilon):
            raise ValueError(f"epsilon must be positive and finite, got {epsilon}")
        if self._aborted:
            return ABORTED
        key = QueryKey.of(q, s, epsilon)
        cached = self._memo.get(key)
        if cached is not None:
            return Answer(cached, 0.0)

        effective = apply_condition(s, self.dataset)
        scale = sensitivity(q, self.dataset) / epsilon
        value = eval_query(q, effective) + laplace_from_uniform(draw_uniform(self._rng), scale)
        self._memo[key] = value
        self.accountant.charge((r.id for r in effective), epsilon)
        if self.accountant.exceeds(self.threshold):
            self._aborted = True
            return ABORTED
        return Answer(value, float(epsilon))

    def total_consumed(self) -> float:
        """Budget consumed as the mechanism sees it: max over records."""
        return self.accountant.total_consumed


def new_mechanism(dataset: Dataset, threshold: float = math.inf, seed: int = 0) -> Mechanism:
    return Mechanism(dataset, threshold, seed)


def attacker_view_consumed(trace: Iterable[float]) -> float:
    """Budget consumed as the querier sees it: the sequential sum of charges."""
    return math.fsum(trace)
