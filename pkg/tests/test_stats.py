import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from textdifficulty.corpus import CountDistribution, Dataset, DataItem, normalize_text
from textdifficulty.errors import EmptyDatasetError
from textdifficulty.stats import (
    BY_NAME,
    CSV_HEADER,
    INDEX,
    NAMES,
    NGRAM_SIZES,
    STATISTICS,
    Group,
    StatisticVector,
    class_imbalance,
    class_interference_hellinger,
    compute_all,
    distinct_total_ratio,
    flesch_reading_ease,
    hellinger_similarity,
    ids_in_group,
    inverse_flesch_reading_ease,
    read_stat_csv,
    resolve_name,
    shannon_diversity,
    shannon_equitability,
    stat_csv_string,
    stat_name,
    syllable_count,
    top_k_ngrams,
    top_ngram_interference,
    top_ngram_mutual_information,
)
from textdifficulty.stopwords import StopwordList, english

CD = CountDistribution


def dataset(rows, name="t"):
    return Dataset(name, tuple(DataItem(" ".join(t), tuple(t), lab) for t, lab in rows))


def text_dataset(rows, name="t"):
    return Dataset(name, tuple(DataItem(x, tuple(normalize_text(x)), lab) for x, lab in rows))


# -- registry ------------------------------------------------------------

def test_registry_has_48_unique_names():
    assert len(STATISTICS) == 48 == len(set(NAMES))
    assert CSV_HEADER[0] == "dataset" and len(CSV_HEADER) == 49
    assert sum(len(ids_in_group(g)) for g in Group) == 48
    assert resolve_name("class imbalance") == "Class Imbalance"
    with pytest.raises(KeyError):
        resolve_name("not a statistic")
    assert all(BY_NAME[n].name == n and INDEX[n] == i for i, n in enumerate(NAMES))


# -- formula examples ----------------------------------------------------

def test_shannon_examples():
    assert shannon_diversity(CD({f"k{i}": 1 for i in range(1000)})) == pytest.approx(6.9078, abs=5e-5)
    assert shannon_diversity(CD({"a": 5})) == 0
    assert shannon_diversity(CD({"a": 1, "b": 1})) == pytest.approx(math.log(2))
    assert shannon_equitability(CD({f"k{i}": 3 for i in range(7)})) == pytest.approx(1.0)
    assert shannon_equitability(CD({"a": 3, "b": 1})) == pytest.approx(0.8113, abs=5e-5)
    assert shannon_equitability(CD({"a": 3})) == 0


def test_imbalance_examples():
    assert class_imbalance(CD({"a": 4, "b": 4, "c": 4})) == 0
    assert class_imbalance(CD({"a": 10}), num_classes=4) == pytest.approx(1.5, abs=1e-15)
    assert class_imbalance(CD({"a": 3, "b": 1})) == pytest.approx(0.5, abs=1e-15)
    with pytest.raises(ValueError):
        class_imbalance(CD({"a": 1, "b": 1}), num_classes=1)


def test_hellinger_examples():
    p = CD({"a": 1, "b": 2})
    assert hellinger_similarity(p, p) == 1.0
    assert hellinger_similarity(CD({"a": 1}), CD({"b": 1})) == 0.0
    expected = 1 - math.sqrt((1 - math.sqrt(0.5)) ** 2 + 0.5) / math.sqrt(2)
    got = hellinger_similarity(CD({"a": 1}), CD({"a": 1, "b": 1}))
    assert got == pytest.approx(expected, abs=1e-15)
    assert got == pytest.approx(0.4588, abs=5e-5)


def test_class_interference_hellinger():
    same = {"x": CD({"a": 2, "b": 1}), "y": CD({"a": 2, "b": 1}), "z": CD({"a": 4, "b": 2})}
    assert class_interference_hellinger(same, "average") == pytest.approx(1.0, abs=1e-15)
    assert class_interference_hellinger(same, "maximum") == pytest.approx(1.0, abs=1e-15)
    two = {"x": CD({"a": 1}), "y": CD({"a": 1, "b": 3})}
    assert class_interference_hellinger(two, "average") == class_interference_hellinger(two, "maximum")
    three = {"x": CD({"a": 1}), "y": CD({"a": 1}), "z": CD({"q": 1})}
    assert class_interference_hellinger(three, "maximum") == 1.0
    assert class_interference_hellinger(three, "average") == pytest.approx(1 / 3)
    assert class_interference_hellinger({"x": CD({"a": 1})}) == 0.0
    with pytest.raises(ValueError):
        class_interference_hellinger(three, "median")


def test_top_k_examples():
    stop = StopwordList(frozenset({"the"}))
    assert top_k_ngrams(CD({"the": 9, "cat": 5, "sat": 3}), 2, stop) == ["cat", "sat"]
    assert top_k_ngrams(CD({"b": 2, "a": 2, "c": 5}), 3) == ["c", "a", "b"]
    assert len(top_k_ngrams(CD({"a": 1, "b": 1, "c": 1, "d": 1}), 10)) == 4
    assert top_k_ngrams(CD({"the cat": 2, "of the": 9}), 10, english()) == ["the cat"]


def test_top_interference_examples():
    none = StopwordList(frozenset())
    same = {"x": CD({"a": 3, "b": 1}), "y": CD({"a": 1, "b": 5})}
    assert top_ngram_interference(same, none) == 1.0
    assert top_ngram_interference({"x": CD({"a": 1}), "y": CD({"b": 1})}, none) == 0.0
    abc = {"x": CD({"a": 1, "b": 1, "c": 1}), "y": CD({"b": 1, "c": 1, "d": 1})}
    assert top_ngram_interference(abc, none) == 0.5


def test_top_mi_examples():
    none = StopwordList(frozenset())
    assert top_ngram_mutual_information({"x": CD({"a": 4}), "y": CD({"a": 4})}, none) == 0.0
    assert top_ngram_mutual_information({"x": CD({"a": 4}), "y": CD({"b": 4})}, none) == 0.0
    got = top_ngram_mutual_information({"x": CD({"a": 2, "b": 2}), "y": CD({"a": 1, "c": 3})}, none)
    assert got == pytest.approx((3 / 8) * math.log(3), abs=1e-15)
    assert got == pytest.approx(0.4120, abs=5e-5)


def test_distinct_ratio_examples():
    assert distinct_total_ratio(CD({"a": 1, "b": 1, "c": 1})) == 1.0
    assert distinct_total_ratio(CD({"a": 4})) == 0.25
    assert distinct_total_ratio(CD({"a": 2, "b": 2})) == 0.5


def test_syllables():
    assert [syllable_count(w) for w in ("the", "cat", "sat")] == [1, 1, 1]
    assert syllable_count("table") == 2
    assert syllable_count("free") == 1
    assert syllable_count("make") == 1
    assert syllable_count("rhythm") == 1
    assert syllable_count("beautiful") == 3


def test_flesch_examples():
    ds = text_dataset([("the cat sat", "a")])
    assert flesch_reading_ease([it.tokens for it in ds.train]) == pytest.approx(119.19, abs=1e-9)
    assert inverse_flesch_reading_ease(ds) == pytest.approx(1 / 119.19, abs=1e-12)
    assert inverse_flesch_reading_ease(ds) == pytest.approx(0.008390, abs=5e-7)
    hard = text_dataset([(" ".join(["incomprehensibility"] * 100), "a")])
    assert inverse_flesch_reading_ease(hard) == pytest.approx(1e6)
    with pytest.raises(EmptyDatasetError):
        flesch_reading_ease([()])


# -- compute_all ---------------------------------------------------------

def test_compute_all_schema_and_symmetry():
    ds = text_dataset([("the same words here", "a"), ("the same words here", "b")])
    vec = compute_all(ds)
    assert len(vec.values) == 48 and set(vec.as_dict()) == set(NAMES)
    assert vec["Maximum Unigram Hellinger Similarity"] == 1.0
    assert vec["Class Imbalance"] == 0.0
    assert vec["Shannon Class Diversity"] == pytest.approx(math.log(2))


def test_single_class_is_degenerate():
    vec = compute_all(text_dataset([("one two three", "a"), ("four five", "a")]))
    assert vec["Shannon Class Diversity"] == 0
    assert "Maximum Unigram Hellinger Similarity" in vec.degenerate
    assert "Mean Top n-gram Interference" in vec.degenerate


def test_fake_dataset_diversity():
    rows = [(f"string{c}", f"class{c}") for c in range(1000) for _ in range(3)]
    vec = compute_all(text_dataset(rows))
    assert vec["Shannon Class Diversity"] == pytest.approx(math.log(1000), abs=1e-12)
    assert vec["Class Imbalance"] == pytest.approx(0.0, abs=1e-12)


def test_declared_classes_count_for_imbalance():
    base = text_dataset([("x", "a"), ("y", "b")])
    wider = Dataset("w", base.train, classes=("a", "b", "c", "d"))
    assert compute_all(wider)["Class Imbalance"] == pytest.approx(1.0)


def _oracle_check(rows, tol=1e-12):
    ds = dataset(rows)
    vec = compute_all(ds)
    stop = english().words
    labels = [lab for _, lab in rows]
    cls = {}
    for lab in labels:
        cls[lab] = cls.get(lab, 0) + 1
    assert vec["Shannon Class Diversity"] == pytest.approx(oracles.entropy(cls), abs=tol)
    assert vec["Shannon Class Equitability"] == pytest.approx(oracles.equitability(cls), abs=tol)
    assert vec["Class Imbalance"] == pytest.approx(oracles.imbalance(cls, len(cls)), abs=tol)
    for n in NGRAM_SIZES:
        per = {lab: oracles.counts_of([t for t, l in rows if l == lab], n) for lab in cls}
        mx, avg, jac, mi = oracles.interference(per, stop)
        assert vec[stat_name("max_hellinger", n)] == pytest.approx(mx, abs=tol)
        assert vec[stat_name("avg_hellinger", n)] == pytest.approx(avg, abs=tol)
        assert vec[stat_name("top_interference", n)] == pytest.approx(jac, abs=tol)
        assert vec[stat_name("top_mutual_info", n)] == pytest.approx(mi, abs=tol)
        allc = oracles.counts_of([t for t, _ in rows], n)
        if allc:
            assert vec[stat_name("ngram_diversity", n)] == pytest.approx(oracles.entropy(allc), abs=tol)
            assert vec[stat_name("ngram_equitability", n)] == pytest.approx(oracles.equitability(allc), abs=tol)
            assert vec[stat_name("distinct_total", n)] == pytest.approx(len(allc) / sum(allc.values()), abs=tol)


def test_brute_force_oracle_micro_corpora():
    rng = random.Random(2024)
    for _ in range(200):
        _oracle_check(oracles.random_micro_corpus(rng))


@given(st.dictionaries(st.sampled_from("abcdefgh"), st.integers(1, 50), min_size=1),
       st.dictionaries(st.sampled_from("abcdefgh"), st.integers(1, 50), min_size=1))
def test_hellinger_matches_oracle(p, q):
    got = hellinger_similarity(CD(p), CD(q))
    assert got == pytest.approx(oracles.hellinger(p, q), abs=1e-12)
    assert 0.0 <= got <= 1.0
    assert got == hellinger_similarity(CD(q), CD(p))


# -- invariants ----------------------------------------------------------

@given(st.lists(st.integers(0, 30), min_size=1, max_size=12).filter(lambda v: sum(v) > 0))
def test_imbalance_bounds(counts):
    c = len(counts)
    dist = CD({f"k{i}": v for i, v in enumerate(counts)})
    val = class_imbalance(dist, c)
    assert -1e-12 <= val <= 2 * (1 - 1 / c) + 1e-12


def test_invariants_permutation_swap_duplication():
    rng = random.Random(5)
    for _ in range(30):
        rows = oracles.random_micro_corpus(rng, max_tokens=30)
        base = compute_all(dataset(rows))
        shuffled = rows[:]
        rng.shuffle(shuffled)
        assert compute_all(dataset(shuffled)).values == pytest.approx(base.values, abs=1e-12)
        swap = {"c0": "c1", "c1": "c0"}
        swapped = [(t, swap.get(l, l)) for t, l in rows]
        assert compute_all(dataset(swapped)).values == pytest.approx(base.values, abs=1e-12)
        doubled = compute_all(dataset(rows + rows))
        for name in ("Shannon Class Diversity", "Class Imbalance", "Maximum Unigram Hellinger Similarity",
                     "Top Unigram Interference", "Unigram Shannon Diversity"):
            assert doubled[name] == pytest.approx(base[name], abs=1e-12)


def test_statistics_are_bounded():
    rng = random.Random(9)
    names_unit = [n for n in NAMES if "Equitability" in n or "Similarity" in n or "Interference" in n
                  or "Total" in n]
    for _ in range(50):
        vec = compute_all(dataset(oracles.random_micro_corpus(rng, max_tokens=40)))
        for n in names_unit:
            assert 0.0 <= vec[n] <= 1.0 + 1e-12, n


# -- serialization -------------------------------------------------------

def test_vector_roundtrips(tmp_path):
    vec = compute_all(text_dataset([("alpha beta gamma", "a"), ("beta delta", "b")], name="rt"))
    again = StatisticVector.from_json_obj(vec.to_json_obj())
    assert again == vec
    p = tmp_path / "s.csv"
    p.write_text(stat_csv_string([vec]))
    (loaded,) = read_stat_csv(p)
    assert loaded.values == vec.values and loaded.dataset_name == "rt"


def test_vector_validation():
    with pytest.raises(ValueError):
        StatisticVector("x", (0.0,) * 47)
    with pytest.raises(ValueError):
        StatisticVector("x", (float("nan"),) + (0.0,) * 47)
    vec = StatisticVector("x", tuple(np.linspace(0, 1, 48)))
    assert vec.replace(**{"Class Imbalance": 0.25})["Class Imbalance"] == 0.25
