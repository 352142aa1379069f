"""Success rate of the attack: closed form versus Monte Carlo.

The closed form approximates the t statistic under the alternative by a
central t shifted by ``T1 = (mu0 - mu1) * sqrt(m) / S``, so that

    R = (1.95 - delta) / 2,   delta = integral of f over [-T* + T1, T* + T1]

with ``f`` the t density and ``T*`` its 0.975 quantile, both with ``m - 1``
degrees of freedom. For the counting query ``mu0 - mu1 = -1`` and ``S`` is
replaced by the noise standard deviation ``sqrt(2) / epsilon``.

Monte Carlo trials alternate target-present and target-absent datasets. Trial
``k`` draws its noise from a PCG64 stream seeded by the k-th splitmix64 output
of the master seed, so results do not depend on batching or worker count.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Literal, Sequence

import numpy as np

from dpleak._backend import kernels
from dpleak.core import Dataset, LinearQuery
from dpleak.stats import (
    SDivisor,
    _lbeta_half,
    draw_uniforms,
    integrate,
    t_pdf,
    t_quantile,
)

ALPHA = 0.05
CONFIDENCE = 0.975  # 1 - ALPHA / 2
QUAD_TOL = 1e-9

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

Engine = Literal["kernel", "object"]
RateMode = Literal["exact", "per-query", "total"]


# seeds ---------------------------------------------------------------------

def splitmix64(state: int) -> tuple[int, int]:
    """One splitmix64 step: returns ``(next_state, output)``."""
    state = (state + _GOLDEN) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return state, z ^ (z >> 31)


def derive_seed(master: int, index: int) -> int:
    """The ``index``-th (0-based) splitmix64 output for ``master``."""
    state = (master + index * _GOLDEN) & _MASK64
    return splitmix64(state)[1]


def trial_seeds(master: int, n: int) -> list[int]:
    out = []
    state = master & _MASK64
    for _ in range(n):
        state, z = splitmix64(state)
        out.append(z)
    return out


# closed form -------------------------------------------------------------------

def _check_m(m: int) -> None:
    if isinstance(m, bool) or int(m) != m or m < 2:
        raise ValueError(f"m must be an integer >= 2, got {m}")


def power_terms(m: int, mu0: float, mu1: float, s: float) -> tuple[float, float]:
    """Type-I and type-II error of the test under the shifted-t approximation.

    The type-I error is 0.05 by construction of ``T*``; the type-II error is
    the mass of the t density on ``[-T* + T1, T* + T1]``.
    """
    _check_m(m)
    if not s > 0:
        raise ValueError(f"S must be positive, got {s}")
    nu = m - 1
    t_star = t_quantile(CONFIDENCE, nu)
    t1 = (mu0 - mu1) * math.sqrt(m) / s
    delta = integrate(lambda t: t_pdf(t, nu), -t_star + t1, t_star + t1, QUAD_TOL)
    return ALPHA, delta


def success_rate_exact(m: int, mu0: float, mu1: float, s: float) -> float:
    """Success rate for null mean ``mu0``, true mean ``mu1`` and spread ``s``."""
    alpha, delta = power_terms(m, mu0, mu1, s)
    return 0.5 * (2.0 - alpha - delta)


def success_rate_per_query(m: int, epsilon: float) -> float:
    """Success rate of a counting-query attack spending ``epsilon`` per sample."""
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    return success_rate_exact(m, 0.0, 1.0, math.sqrt(2.0) / epsilon)


def success_rate_total(m: int, eps_total: float) -> float:
    """Success rate when ``eps_total`` is split evenly over ``m`` samples."""
    if not eps_total > 0:
        raise ValueError(f"eps_total must be positive, got {eps_total}")
    return success_rate_per_query(m, eps_total / m)


@dataclass(frozen=True)
class RateSpec:
    m: int
    mode: RateMode
    mu0: float | None = None
    mu1: float | None = None
    s: float | None = None
    epsilon: float | None = None
    eps_total: float | None = None
    s_divisor: SDivisor = "m"

    def __post_init__(self) -> None:
        _check_m(self.m)
        if self.s_divisor not in ("m", "m-1"):
            raise ValueError(f"s_divisor must be 'm' or 'm-1', got {self.s_divisor!r}")
        if self.mode == "exact":
            if self.mu0 is None or self.mu1 is None or self.s is None:
                raise ValueError("exact mode needs mu0, mu1 and s")
            if not self.s > 0:
                raise ValueError("exact mode needs s > 0")
        elif self.mode == "per-query":
            if self.epsilon is None or not self.epsilon > 0:
                raise ValueError("per-query mode needs epsilon > 0")
        elif self.mode == "total":
            if self.eps_total is None or not self.eps_total > 0:
                raise ValueError("total mode needs eps_total > 0")
        else:
            raise ValueError(f"unknown mode {self.mode!r}")


def success_rate(spec: RateSpec) -> float:
    if spec.mode == "exact":
        return success_rate_exact(spec.m, spec.mu0, spec.mu1, spec.s)
    if spec.mode == "per-query":
        return success_rate_per_query(spec.m, spec.epsilon)
    return success_rate_total(spec.m, spec.eps_total)


# Monte Carlo -------------------------------------------------------------------

def simulate_rejections(
    m: int,
    eps_total: float,
    present: Sequence[bool],
    seeds: Sequence[int],
    alpha: float = ALPHA,
    s_divisor: SDivisor = "m",
    engine: Engine = "kernel",
) -> np.ndarray:
    """Whether the attack asserts membership in each trial.

    Trial ``k`` attacks a dataset of ``m`` known singletons, plus the target
    when ``present[k]``, through a fresh unbounded mechanism seeded with
    ``seeds[k]``, spending ``eps_total / m`` per query. Aborts cannot occur
    (no threshold), so the verdict is the t-test's; degenerate samples count
    as not asserting.
    """
    _check_m(m)
    if not (eps_total > 0 and math.isfinite(eps_total)):
        raise ValueError(f"eps_total must be positive and finite, got {eps_total}")
    if len(present) != len(seeds):
        raise ValueError("present and seeds must have equal length")
    if engine == "kernel":
        return _simulate_kernel(m, eps_total, present, seeds, alpha, s_divisor)
    if engine == "object":
        return _simulate_objects(m, eps_total, present, seeds, alpha, s_divisor)
    raise ValueError(f"unknown engine {engine!r}")


def _simulate_kernel(m, eps_total, present, seeds, alpha, s_divisor):
    n = len(seeds)
    u = np.empty((n, m))
    for k, seed in enumerate(seeds):
        u[k] = draw_uniforms(np.random.Generator(np.random.PCG64(seed)), m)
    present = np.asarray(present, dtype=bool)
    # true count of each issued condition {known_i, x} over the dataset
    eff = np.where(present, 2.0, 1.0)
    # same arithmetic as Mechanism.issue: sensitivity / (eps_total / m)
    scale = 1.0 / (eps_total / m)
    divisor = float(m) if s_divisor == "m" else float(m - 1)
    p = np.empty(n)
    kernels.singleton_harvest_pvalues(
        u, eff, float(m - 1), float(m), scale, divisor, _lbeta_half(m - 1), p
    )
    with np.errstate(invalid="ignore"):
        return p < alpha


def _simulate_objects(m, eps_total, present, seeds, alpha, s_divisor):
    from dpleak.attack import AttackConfig, attack
    from dpleak.mechanism import Mechanism

    known_ids = [f"k{i}" for i in range(m)]
    known = Dataset.from_ids(known_ids)
    with_target = Dataset.from_ids([*known_ids, "x"])
    cfg = AttackConfig(
        m=m,
        eps_total=eps_total,
        target_id="x",
        known_ids=tuple(known_ids),
        alpha=alpha,
        s_divisor=s_divisor,
    )
    out = np.empty(len(seeds), dtype=bool)
    for k, (is_present, seed) in enumerate(zip(present, seeds)):
        mech = Mechanism(with_target if is_present else known, math.inf, seed)
        out[k] = attack(mech, LinearQuery.COUNT, cfg, known).decision.asserts_member
    return out


def _balanced_trials(trials: int) -> np.ndarray:
    if isinstance(trials, bool) or int(trials) != trials or trials < 100 or trials % 2:
        raise ValueError(f"trials must be an even integer >= 100, got {trials}")
    return np.arange(trials) % 2 == 0


def empirical_success_rate(
    m: int,
    eps_total: float,
    trials: int,
    seed: int,
    alpha: float = ALPHA,
    s_divisor: SDivisor = "m",
    engine: Engine = "kernel",
) -> tuple[float, float]:
    """Monte Carlo success rate when ``eps_total`` is split over ``m`` samples.

    Returns the fraction of correct verdicts over a balanced present/absent
    mix and its binomial standard error.
    """
    present = _balanced_trials(trials)
    asserted = simulate_rejections(
        m, eps_total, present, trial_seeds(seed, trials), alpha, s_divisor, engine
    )
    r = float(np.count_nonzero(asserted == present)) / trials
    return r, math.sqrt(r * (1.0 - r) / trials)


# experiment grids --------------------------------------------------------------

GridMode = Literal["total", "per-query"]


@dataclass(frozen=True)
class ExperimentRow:
    mode: GridMode
    m: int
    budget: float
    r_theory: float
    r_empirical: float
    stderr: float
    trials: int
    seed: int


def _run_cell(args) -> ExperimentRow:
    mode, m, budget, trials, seed, s_divisor, engine = args
    if mode == "total":
        theory = success_rate_total(m, budget)
        emp, se = empirical_success_rate(m, budget, trials, seed, s_divisor=s_divisor, engine=engine)
    else:
        theory = success_rate_per_query(m, budget)
        emp, se = empirical_success_rate(
            m, m * budget, trials, seed, s_divisor=s_divisor, engine=engine
        )
    return ExperimentRow(mode, m, budget, theory, emp, se, trials, seed)


def experiment_grid(
    mode: GridMode,
    budgets: Iterable[float],
    ms: Iterable[int],
    trials: int,
    seed: int,
    s_divisor: SDivisor = "m",
    workers: int = 1,
    engine: Engine = "kernel",
) -> list[ExperimentRow]:
    """Theory and Monte Carlo success rate on every (budget, m) cell.

    ``mode="total"`` reads budgets as totals split over ``m`` samples,
    ``"per-query"`` as the epsilon of each sample. Cells are ordered budget
    first, then m; cell ``i`` uses ``derive_seed(seed, i)``.
    """
    if mode not in ("total", "per-query"):
        raise ValueError(f"unknown grid mode {mode!r}")
    budgets = [float(b) for b in budgets]
    ms = [int(m) for m in ms]
    if not budgets or not ms:
        raise ValueError("grid needs at least one budget and one m")
    if any(not b > 0 for b in budgets):
        raise ValueError("budgets must be positive")
    cells = [
        (mode, m, b, trials, derive_seed(seed, i), s_divisor, engine)
        for i, (b, m) in enumerate((b, m) for b in budgets for m in ms)
    ]
    _balanced_trials(trials)
    for m in ms:
        _check_m(m)
    if workers <= 1:
        return [_run_cell(c) for c in cells]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_cell, cells, chunksize=max(1, len(cells) // (4 * workers))))
