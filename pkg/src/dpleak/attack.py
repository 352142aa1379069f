"""Membership inference by linear query division.

The attacker knows a set of records ``D_know`` in the protected dataset and
wants to know whether a target record ``x`` is present. It splits ``D_know``
into ``m`` disjoint parts ``D_i``; for each it asks the mechanism for the
count over ``D_i | {x}`` and adds the locally known count of
``D_know - D_i``. Each sum is an independent noisy answer of the count over
``D_know | {x}``, and a t-test against ``q(D_know)`` decides membership.

With disjoint parts the mechanism charges the m queries in parallel when
``x`` is absent, so its consumed budget stays at one query's epsilon while
the attacker has spent ``m`` times that.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

from dpleak.core import Condition, Dataset, LinearQuery, eval_query
from dpleak.mechanism import Aborted, Mechanism, attacker_view_consumed
from dpleak.stats import DegenerateSample, SDivisor, TTestResult, one_sample_t_test


class ConfigError(ValueError):
    """Attack parameters violate their invariants."""


class InsufficientKnowledge(ConfigError):
    """Fewer known records than requested samples."""


class AbortDetected(Exception):
    """The mechanism aborted during harvesting."""

    def __init__(self, samples: list[float], charges: list[float]):
        super().__init__(f"mechanism aborted after {len(samples)} answered queries")
        self.samples = samples
        self.charges = charges


class Decision(enum.Enum):
    IN = "in"
    OUT = "out"
    IN_VIA_ABORT = "in-via-abort"

    @property
    def asserts_member(self) -> bool:
        return self is not Decision.OUT


@dataclass(frozen=True)
class AttackConfig:
    m: int
    eps_total: float
    target_id: str
    known_ids: tuple[str, ...]
    alpha: float = 0.05
    s_divisor: SDivisor = "m"

    def __post_init__(self) -> None:
        object.__setattr__(self, "known_ids", tuple(self.known_ids))
        if isinstance(self.m, bool) or int(self.m) != self.m or self.m < 2:
            raise ConfigError(f"m must be an integer >= 2, got {self.m}")
        if not (self.eps_total > 0 and math.isfinite(self.eps_total)):
            raise ConfigError(f"eps_total must be positive and finite, got {self.eps_total}")
        if not 0 < self.alpha < 1:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.s_divisor not in ("m", "m-1"):
            raise ConfigError(f"s_divisor must be 'm' or 'm-1', got {self.s_divisor!r}")
        if len(set(self.known_ids)) != len(self.known_ids):
            raise ConfigError("known_ids contains duplicates")
        if self.target_id in self.known_ids:
            raise ConfigError(f"target {self.target_id!r} is among the known ids")
        if len(self.known_ids) < self.m:
            raise InsufficientKnowledge(
                f"{len(self.known_ids)} known records cannot yield {self.m} disjoint subsets"
            )

    @property
    def epsilon(self) -> float:
        return self.eps_total / self.m


@dataclass(frozen=True)
class Verdict:
    decision: Decision
    samples: tuple[float, ...]
    attacker_budget: float
    mechanism_budget: float
    t_test: TTestResult | None = None
    degenerate: bool = False
    charges: tuple[float, ...] = field(default=(), repr=False)


def partition_known(known_ids: Sequence[str], m: int) -> list[list[str]]:
    """Split ``known_ids`` into ``m`` disjoint nonempty parts.

    The first ``m`` ids become singletons in list order; the remainder is
    dealt round-robin onto those parts.
    """
    if len(known_ids) < m:
        raise InsufficientKnowledge(f"{len(known_ids)} known records < m={m}")
    parts = [[rid] for rid in known_ids[:m]]
    for j, rid in enumerate(known_ids[m:]):
        parts[j % m].append(rid)
    return parts


def harvest_samples(
    mech: Mechanism, q: LinearQuery, cfg: AttackConfig, known: Dataset
) -> list[float]:
    """Collect ``cfg.m`` i.i.d. noisy answers of ``q`` over ``D_know | {x}``.

    ``known`` holds the attacker's copies of the records in ``cfg.known_ids``.
    Raises :class:`AbortDetected` as soon as the mechanism refuses a query.
    """
    return _harvest(mech, q, cfg, known)[0]


def _harvest(mech, q, cfg, known):
    if known.ids != frozenset(cfg.known_ids):
        raise ConfigError("known dataset must contain exactly the records in known_ids")
    eps = cfg.epsilon
    samples: list[float] = []
    charges: list[float] = []
    for part in partition_known(cfg.known_ids, cfg.m):
        outcome = mech.issue(q, Condition([*part, cfg.target_id]), eps)
        if isinstance(outcome, Aborted):
            raise AbortDetected(samples, charges)
        charges.append(outcome.charged)
        local = eval_query(q, known.without(part))
        samples.append(outcome.value + local)
    return samples, charges


def attack(mech: Mechanism, q: LinearQuery, cfg: AttackConfig, known: Dataset) -> Verdict:
    """Run the full membership inference against ``mech``.

    An abort means the target is present: with disjoint parts only the
    target can accumulate budget across queries.
    """
    try:
        samples, charges = _harvest(mech, q, cfg, known)
    except AbortDetected as abort:
        return Verdict(
            decision=Decision.IN_VIA_ABORT,
            samples=tuple(abort.samples),
            attacker_budget=attacker_view_consumed(abort.charges),
            mechanism_budget=mech.total_consumed(),
            charges=tuple(abort.charges),
        )

    charges = tuple(charges)
    mu0 = eval_query(q, known)
    try:
        result = one_sample_t_test(samples, mu0, cfg.alpha, cfg.s_divisor)
    except DegenerateSample:
        return Verdict(
            decision=Decision.OUT,
            samples=tuple(samples),
            attacker_budget=attacker_view_consumed(charges),
            mechanism_budget=mech.total_consumed(),
            degenerate=True,
            charges=charges,
        )
    return Verdict(
        decision=Decision.IN if result.reject_null else Decision.OUT,
        samples=tuple(samples),
        attacker_budget=attacker_view_consumed(charges),
        mechanism_budget=mech.total_consumed(),
        t_test=result,
        charges=charges,
    )


def classify_case(enough_background: bool, x_in_dataset: bool) -> int:
    """Label the attacker's situation 1-4.

    Cases 3 and 4 have enough known records to force either an abort
    (target present) or an absurd attacker-side budget (target absent).
    """
    return 1 + 2 * bool(enough_background) + bool(x_in_dataset)
