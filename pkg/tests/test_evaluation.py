"""Precision@K semantics, checked against a double-loop counting oracle."""

import random

import pytest

from coexpand.corpus_io import GoldLabels
from coexpand.evaluation import precision_at_k

from oracles import naive_precision_table


def test_all_correct_is_one():
    gold = GoldLabels({"a1": "A", "a2": "A", "b1": "B", "b2": "B"})
    report = precision_at_k([("A", ["a1", "a2"]), ("B", ["b1", "b2"])], gold, [2])
    assert report.per_type["A"]["P@2"] == 1.0
    assert report.per_type["B"]["P@2"] == 1.0
    assert report.macro["P@2"] == 1.0
    assert report.unknown_entities == 0


def test_two_types_three_of_four_correct():
    gold = GoldLabels({"a1": "A", "a2": "A", "b1": "B", "b2": "A"})
    report = precision_at_k([("A", ["a1", "a2"]), ("B", ["b1", "b2"])], gold, [2])
    assert report.per_type["A"]["P@2"] == 1.0
    assert report.per_type["B"]["P@2"] == 0.5
    assert report.macro["P@2"] == 0.75


def test_unknown_entities_count_as_incorrect():
    gold = GoldLabels({"a1": "A"})
    report = precision_at_k([("A", ["a1", "mystery"]), ("B", ["mystery", "ghost"])], gold, [2])
    assert report.per_type["A"]["P@2"] == 0.5
    assert report.per_type["B"]["P@2"] == 0.0
    # distinct unknowns across all examined prefixes
    assert report.unknown_entities == 2


def test_truncation_shrinks_the_denominator_and_is_flagged():
    gold = GoldLabels({"a1": "A", "b1": "B"})
    report = precision_at_k([("A", ["a1"]), ("B", ["b1"])], gold, [1, 3])
    assert report.per_type["A"]["P@3"] == 1.0
    assert report.truncated == {"A": ["P@3"], "B": ["P@3"]}
    assert report.per_type["A"]["P@1"] == 1.0


def test_empty_set_scores_zero():
    gold = GoldLabels({"a1": "A"})
    report = precision_at_k([("A", []), ("B", ["a1"])], gold, [1])
    assert report.per_type["A"]["P@1"] == 0.0
    assert report.per_type["B"]["P@1"] == 0.0  # wrong type
    assert report.macro["P@1"] == 0.0


def test_validation_errors():
    gold = GoldLabels({})
    with pytest.raises(ValueError):
        precision_at_k([], gold, [1])
    with pytest.raises(ValueError):
        precision_at_k([("A", ["x"])], gold, [])
    with pytest.raises(ValueError):
        precision_at_k([("A", ["x"])], gold, [0])


def test_relabeling_one_entity_moves_macro_by_exactly_one_over_mk():
    rng = random.Random(808)
    type_names = ["t0", "t1", "t2", "t3"]
    k = 5
    for _ in range(20):
        ranked = [(name, [f"{name}_e{i}" for i in range(k)]) for name in type_names]
        gold_map = {e: rng.choice(type_names) for _, picks in ranked for e in picks}
        # force at least one incorrect entry inside the top K
        gold_map[ranked[0][1][rng.randrange(k)]] = "t1" if ranked[0][0] == "t0" else "t0"
        wrong = next(e for name, picks in ranked for e in picks
                     if gold_map.get(e) != name)
        wrong_type = next(name for name, picks in ranked if wrong in picks)

        before = precision_at_k(ranked, GoldLabels(gold_map), [k]).macro[f"P@{k}"]
        gold_map[wrong] = wrong_type
        after = precision_at_k(ranked, GoldLabels(gold_map), [k]).macro[f"P@{k}"]
        assert after - before == pytest.approx(1.0 / (len(type_names) * k), abs=1e-12)


def test_matches_double_loop_oracle_on_random_labelings():
    rng = random.Random(555)
    type_names = ["t0", "t1", "t2"]
    for _ in range(40):
        universe = [f"e{i}" for i in range(rng.randrange(5, 25))]
        gold_map = {e: rng.choice(type_names) for e in universe if rng.random() < 0.8}
        ranked = []
        for name in type_names:
            picks = rng.sample(universe, rng.randrange(0, len(universe)))
            ranked.append((name, picks))
        ks = sorted(rng.sample(range(1, 12), rng.randrange(1, 4)))

        report = precision_at_k(ranked, GoldLabels(gold_map), ks)
        per_type, macro, unknown = naive_precision_table(ranked, gold_map, ks)
        assert report.unknown_entities == unknown
        for name, _ in ranked:
            for k in ks:
                assert report.per_type[name][f"P@{k}"] == pytest.approx(per_type[name][f"P@{k}"], abs=1e-12)
        for k in ks:
            assert report.macro[f"P@{k}"] == pytest.approx(macro[f"P@{k}"], abs=1e-12)
