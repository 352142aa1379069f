import math

import numpy as np
import pytest

from dpleak.attack import (
    AbortDetected,
    AttackConfig,
    ConfigError,
    Decision,
    InsufficientKnowledge,
    attack,
    classify_case,
    harvest_samples,
    partition_known,
)
from dpleak.core import Dataset, LinearQuery, Record
from dpleak.mechanism import Mechanism

COUNT = LinearQuery.COUNT


def setup(m, n_known=None, present=True, eps_total=1.0, threshold=math.inf, seed=0, **kw):
    n_known = n_known or m
    known_ids = tuple(f"k{i}" for i in range(n_known))
    others = [f"o{i}" for i in range(5)]
    D = Dataset.from_ids([*known_ids, *others, *(["x"] if present else [])])
    cfg = AttackConfig(m=m, eps_total=eps_total, target_id="x", known_ids=known_ids, **kw)
    return Mechanism(D, threshold, seed), cfg, D.subset(known_ids)


def replay_laplace(seed, n, scale):
    # independent re-derivation of the mechanism's noise stream
    rng = np.random.Generator(np.random.PCG64(seed))
    out = []
    while len(out) < n:
        r = rng.random()
        if r == 0.0:
            continue
        u = r - 0.5
        out.append(-scale * np.sign(u) * np.log(1 - 2 * abs(u)))
    return out


def test_partition_singletons_then_round_robin():
    assert partition_known(["a", "b", "c"], 3) == [["a"], ["b"], ["c"]]
    assert partition_known(list("abcdefg"), 3) == [["a", "d", "g"], ["b", "e"], ["c", "f"]]
    with pytest.raises(InsufficientKnowledge):
        partition_known(["a"], 2)


def test_partition_is_disjoint_cover():
    ids = [f"r{i}" for i in range(23)]
    parts = partition_known(ids, 5)
    flat = [r for p in parts for r in p]
    assert sorted(flat) == sorted(ids)
    assert all(parts)


@pytest.mark.parametrize("present", [True, False])
@pytest.mark.parametrize("n_known", [6, 13])
def test_harvest_equals_direct_noisy_query(present, n_known):
    m, eps_total, seed = 6, 3.0, 1234
    mech, cfg, known = setup(m, n_known, present, eps_total, seed=seed)
    samples = harvest_samples(mech, COUNT, cfg, known)
    truth = n_known + present
    noise = replay_laplace(seed, m, 1.0 / cfg.epsilon)
    for a, z in zip(samples, noise):
        assert a == pytest.approx(truth + z, abs=1e-12)


def test_sum_query_harvest():
    known = [Record(f"k{i}", float(i)) for i in range(4)]
    D = Dataset([*known, Record("x", 2.5)], value_bound=5.0)
    cfg = AttackConfig(m=4, eps_total=2.0, target_id="x", known_ids=[r.id for r in known])
    samples = harvest_samples(Mechanism(D, seed=3), LinearQuery.SUM, cfg, D.subset(cfg.known_ids))
    noise = replay_laplace(3, 4, 5.0 / 0.5)
    for a, z in zip(samples, noise):
        assert a == pytest.approx(6.0 + 2.5 + z, abs=1e-12)


def test_sample_means_separate_with_signal():
    m = 400
    mech_in, cfg, known = setup(m, present=True, eps_total=4.0 * m, seed=1)
    mech_out, _, _ = setup(m, present=False, eps_total=4.0 * m, seed=1)
    assert np.mean(harvest_samples(mech_in, COUNT, cfg, known)) == pytest.approx(m + 1, abs=0.1)
    assert np.mean(harvest_samples(mech_out, COUNT, cfg, known)) == pytest.approx(m, abs=0.1)


def test_budgets_reported_by_verdict():
    mech, cfg, known = setup(10, present=False, eps_total=1.0)
    v = attack(mech, COUNT, cfg, known)
    assert v.mechanism_budget == 0.1
    assert v.attacker_budget == 1.0
    mech, cfg, known = setup(10, present=True, eps_total=1.0)
    v = attack(mech, COUNT, cfg, known)
    assert v.mechanism_budget == 1.0
    assert v.attacker_budget == 1.0


def test_repeated_attack_costs_attacker_nothing_more():
    mech, cfg, known = setup(5, present=True, eps_total=1.0)
    first = attack(mech, COUNT, cfg, known)
    second = attack(mech, COUNT, cfg, known)
    assert second.samples == first.samples
    assert second.attacker_budget == 0.0
    assert second.mechanism_budget == first.mechanism_budget


def test_strong_signal_decides_correctly():
    mech, cfg, known = setup(20, present=True, eps_total=200.0, seed=4)
    v = attack(mech, COUNT, cfg, known)
    assert v.decision is Decision.IN
    assert v.t_test.df == 19 and v.t_test.p_value < 0.05
    hits_in = hits_out = 0
    for seed in range(100):
        mech, cfg, known = setup(20, present=True, eps_total=200.0, seed=seed)
        hits_in += attack(mech, COUNT, cfg, known).decision is Decision.IN
        mech, cfg, known = setup(20, present=False, eps_total=200.0, seed=seed)
        hits_out += attack(mech, COUNT, cfg, known).decision is Decision.IN
    assert hits_in == 100
    # false positives only at the test's level
    assert hits_out <= 12


def test_abort_means_present():
    mech, cfg, known = setup(10, present=True, eps_total=2.0, threshold=1.0)
    v = attack(mech, COUNT, cfg, known)
    assert v.decision is Decision.IN_VIA_ABORT
    assert v.decision.asserts_member
    # five answers at 0.2 reach the threshold; the sixth is withheld
    assert len(v.samples) == 5
    assert v.attacker_budget == 1.0
    assert v.t_test is None


def test_harvest_raises_on_abort():
    mech, cfg, known = setup(4, present=True, eps_total=2.0, threshold=1.0)
    with pytest.raises(AbortDetected) as info:
        harvest_samples(mech, COUNT, cfg, known)
    assert len(info.value.samples) == 2


def test_absent_target_does_not_abort():
    mech, cfg, known = setup(10, present=False, eps_total=2.0, threshold=1.0)
    assert attack(mech, COUNT, cfg, known).decision is not Decision.IN_VIA_ABORT
    assert not mech.aborted


def test_degenerate_sample_is_out():
    class Constant(Mechanism):
        def issue(self, q, s, epsilon):
            from dpleak.mechanism import Answer
            return Answer(1.0, epsilon)

    mech, cfg, known = setup(4)
    v = attack(Constant(mech.dataset), COUNT, cfg, known)
    assert v.decision is Decision.OUT
    assert v.degenerate


@pytest.mark.parametrize(
    "kw, exc",
    [
        ({"m": 5, "known_ids": ("a", "b")}, InsufficientKnowledge),
        ({"m": 1}, ConfigError),
        ({"eps_total": 0.0}, ConfigError),
        ({"eps_total": math.inf}, ConfigError),
        ({"alpha": 1.0}, ConfigError),
        ({"s_divisor": "n"}, ConfigError),
        ({"known_ids": ("a", "a", "b")}, ConfigError),
        ({"known_ids": ("a", "x")}, ConfigError),
    ],
)
def test_config_validation(kw, exc):
    base = dict(m=2, eps_total=1.0, target_id="x", known_ids=("a", "b"))
    base.update(kw)
    with pytest.raises(exc):
        AttackConfig(**base)


def test_known_dataset_must_match_ids():
    mech, cfg, known = setup(3)
    with pytest.raises(ConfigError):
        harvest_samples(mech, COUNT, cfg, known.without(["k0"]))


def test_classify_case():
    assert [classify_case(e, x) for e in (False, True) for x in (False, True)] == [1, 2, 3, 4]
