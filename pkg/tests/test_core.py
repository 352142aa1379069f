import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dpleak.core import (
    Condition,
    DataFormatError,
    Dataset,
    LinearQuery,
    Record,
    apply_condition,
    eval_query,
    load_jsonl,
    sensitivity,
)

COUNT, SUM = LinearQuery.COUNT, LinearQuery.SUM


def ids(records):
    return {r.id for r in records}


def test_count_division_example():
    b = [Record("b1"), Record("b2"), Record("b3")]
    assert eval_query(COUNT, b) == 3
    assert eval_query(COUNT, b[:2]) + eval_query(COUNT, b[2:]) == 3


def test_count_empty():
    assert eval_query(COUNT, []) == 0
    assert eval_query(SUM, []) == 0


def test_sum_hand_added():
    D = Dataset([Record("a", 1.5), Record("b", -0.5)], value_bound=2)
    assert eval_query(SUM, D) == 1.0


def test_count_ignores_values():
    assert eval_query(COUNT, [Record("a", 100.0), Record("b", -7.0)]) == 2


@pytest.mark.parametrize(
    "members, dataset, expected",
    [
        ({"x", "b1"}, {"b1", "b2"}, {"b1"}),
        ({"b1", "b2"}, {"b1", "b2", "b3"}, {"b1", "b2"}),
        (set(), {"b1", "b2"}, set()),
    ],
)
def test_apply_condition(members, dataset, expected):
    D = Dataset.from_ids(dataset)
    assert ids(apply_condition(Condition(members), D)) == expected


def test_sensitivity():
    D = Dataset.from_ids(["a"])
    assert sensitivity(COUNT, D) == 1
    assert sensitivity(SUM, Dataset([Record("a", 3.0)], value_bound=10)) == 10
    with pytest.raises(ValueError):
        sensitivity(SUM, D)
    with pytest.raises(ValueError):
        Dataset([], value_bound=0)


def test_dataset_set_semantics():
    D = Dataset([Record("a", 1.0), Record("a", 2.0), Record("b")])
    assert len(D) == 2
    assert D.get("a").value == 1.0
    assert D.with_records([Record("a", 5.0)]) == D
    assert len(D.with_records([Record("c")])) == 3
    assert len(D) == 2


def test_dataset_rejects_values_over_bound():
    with pytest.raises(ValueError):
        Dataset([Record("a", 2.5)], value_bound=2)


record_lists = st.lists(
    st.tuples(st.integers(0, 10_000), st.floats(-100, 100, allow_nan=False)),
    max_size=40,
    unique_by=lambda t: t[0],
)


@given(record_lists, st.data())
def test_linearity_over_disjoint_union(pairs, data):
    recs = [Record(str(i), v) for i, v in pairs]
    mask = data.draw(st.lists(st.booleans(), min_size=len(recs), max_size=len(recs)))
    A = [r for r, side in zip(recs, mask) if side]
    B = [r for r, side in zip(recs, mask) if not side]
    assert eval_query(COUNT, A + B) == eval_query(COUNT, A) + eval_query(COUNT, B)
    whole = eval_query(SUM, A + B)
    parts = eval_query(SUM, A) + eval_query(SUM, B)
    assert parts == pytest.approx(whole, rel=1e-12, abs=1e-12)


@given(record_lists, st.integers(1, 8), st.randoms(use_true_random=False))
def test_division_completeness(pairs, k, rnd):
    recs = [Record(str(i), v) for i, v in pairs]
    parts = [[] for _ in range(k)]
    for r in recs:
        parts[rnd.randrange(k)].append(r)
    assert sum(eval_query(COUNT, p) for p in parts) == len(recs)
    total = sum(eval_query(SUM, p) for p in parts)
    assert total == pytest.approx(eval_query(SUM, recs), rel=1e-12, abs=1e-12)


@given(st.sets(st.integers(0, 50)), st.sets(st.integers(0, 50)))
def test_condition_idempotent(members, present):
    D = Dataset.from_ids(map(str, present))
    s = Condition(map(str, members))
    once = apply_condition(s, D)
    assert apply_condition(s, Dataset(once)) == once
    assert ids(once) <= D.ids


def test_load_jsonl(tmp_path):
    path = tmp_path / "d.jsonl"
    path.write_text(
        "\n".join(json.dumps(o) for o in [{"id": "a", "value": 1}, {"id": "b", "value": 2.5}, {"id": "c"}])
        + "\n\n"
    )
    D = load_jsonl(path)
    assert D.ids == {"a", "b", "c"}
    assert eval_query(SUM, D) == 3.5


@pytest.mark.parametrize(
    "text",
    ['{"id": "a"\n', '{"value": 1}\n', '{"id": 3}\n', '{"id": "a", "value": "x"}\n', "[1, 2]\n"],
)
def test_load_jsonl_rejects_malformed(tmp_path, text):
    path = tmp_path / "bad.jsonl"
    path.write_text(text)
    with pytest.raises(DataFormatError):
        load_jsonl(path)


def test_load_jsonl_missing_file(tmp_path):
    with pytest.raises(DataFormatError):
        load_jsonl(tmp_path / "nope.jsonl")
