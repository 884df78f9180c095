import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from textdifficulty.errors import ConfigError, ParseError
from textdifficulty.measure import (
    D1,
    D2,
    Band,
    BaselineTable,
    MeasureGenome,
    band,
    evaluate,
    load_baseline,
    load_genome,
    reference_context,
    report,
    resolve_measure,
)
from textdifficulty.stats import INDEX, NAMES, StatisticVector

D2_NAMES = {
    "Distinct Unigrams (Vocab) : Total Unigrams",
    "Class Imbalance",
    "Shannon Class Diversity",
    "Maximum Unigram Hellinger Similarity",
    "Top Unigram Mutual Information",
}

vectors = st.lists(st.floats(0, 1e3, allow_nan=False, allow_infinity=False), min_size=48, max_size=48).map(
    lambda v: StatisticVector("h", tuple(v)))


def vector(**named):
    vals = [0.0] * 48
    for k, v in named.items():
        vals[INDEX[k]] = v
    return StatisticVector("v", tuple(vals))


def test_presets():
    assert set(D2.names) == D2_NAMES
    assert set(D1.names) == D2_NAMES | {"Top 5-gram Interference"}
    assert (D1 - D2).names == ["Top 5-gram Interference"]
    assert resolve_measure("D1") == D1 and resolve_measure("d2") == D2
    with pytest.raises(ConfigError):
        resolve_measure("nonsense")


def test_genome_operations():
    g = MeasureGenome.from_names(["Class Imbalance", "Shannon Class Diversity"])
    assert len(g.bits) == 48 and sum(g.bits) == 2
    assert MeasureGenome.from_array(g.to_array()) == g
    assert (g | D2) == D2 and (g & D2) == g
    with pytest.raises(KeyError):
        MeasureGenome.from_names(["bogus"])


def test_evaluate_examples():
    assert evaluate(MeasureGenome.from_names(["Class Imbalance"]), vector()) == 0
    with pytest.raises(ValueError):
        evaluate(MeasureGenome((False,) * 48), vector())


@given(vectors)
def test_d1_d2_composition_exact(vec):
    assert evaluate(D1, vec, exact=True) - evaluate(D2, vec, exact=True) == Fraction(vec["Top 5-gram Interference"])
    assert evaluate(D2, vec, exact=True) == sum(Fraction(vec[n]) for n in D2_NAMES)
    assert evaluate(D2, vec) == float(evaluate(D2, vec, exact=True))
    assert evaluate(D2, vec) == math.fsum(vec[n] for n in D2_NAMES)


def test_band():
    assert band(4.51) is Band.HARD
    assert band(3.29) is Band.STANDARD
    assert band(4.0) is Band.STANDARD
    assert band(4.0, threshold=3.0) is Band.HARD


def test_baseline():
    base = load_baseline()
    assert base.get("Class Imbalance") == (0.503, 0.365)
    assert base.get("Top Unigram Mutual Information") == (1.23, 0.430)
    assert set(base.entries) == D2_NAMES
    obj = base.to_json_obj()
    assert BaselineTable.from_json_obj(obj).entries == base.entries


def test_report_z_scores():
    base = load_baseline()
    at_mean = vector(**{n: base.get(n)[0] for n in D2_NAMES})
    rep = report(at_mean, D2, base)
    assert all(r.z == 0 and not r.notable for r in rep.rows)
    mi = vector(**{**{n: base.get(n)[0] for n in D2_NAMES}, "Top Unigram Mutual Information": 1.67})
    row = next(r for r in report(mi, D2, base).rows if r.statistic == "Top Unigram Mutual Information")
    assert row.z == pytest.approx(1.0233, abs=1e-4) and row.notable


def test_report_missing_baseline_row():
    rep = report(vector(**{"Top 5-gram Interference": 0.3}), D1, load_baseline())
    row = next(r for r in rep.rows if r.statistic == "Top 5-gram Interference")
    assert not row.has_baseline and row.z is None
    assert any("no baseline" in w for w in rep.warnings)


def test_report_difficulty_is_row_sum(fixtures):
    vec = StatisticVector.from_json_obj(json.loads((fixtures / "report_vector.json").read_text()))
    rep = report(vec, D2)
    assert rep.difficulty == math.fsum(r.value for r in rep.rows) == evaluate(D2, vec)
    assert [r.statistic for r in rep.notable] == ["Maximum Unigram Hellinger Similarity"]


def test_domination_warning():
    balanced = dict.fromkeys(NAMES, 0.0)
    balanced["Shannon Class Diversity"] = math.log(30)
    balanced["Shannon Class Equitability"] = 1.0
    vec = StatisticVector("b", tuple(balanced.values()))
    assert vec.class_count() == 30
    assert report(vec, D2).diversity_domination
    small = StatisticVector("s", tuple(balanced.values()), num_classes=24)
    assert not report(small, D2).diversity_domination
    edge = StatisticVector("e", tuple(balanced.values()), num_classes=25)
    assert report(edge, D2).diversity_domination


def test_report_renderings():
    vec = vector(**{"Class Imbalance": 0.2, "Shannon Class Diversity": 0.7})
    rep = report(vec, D2, context=True)
    md = rep.to_markdown()
    assert "Class Imbalance" in md and "difficulty" in md.lower()
    obj = json.loads(rep.to_json())
    assert obj["difficulty"] == rep.difficulty and len(obj["constituents"]) == 5
    assert rep.context["discovered_measures_total"] == len(reference_context()["discovered_measures"])


def test_reference_data_shape():
    ref = reference_context()
    assert len(ref["statistic_correlations"]) == 48
    assert len(ref["discovered_measures"]) > 0
    for m in ref["discovered_measures"]:
        assert all(n in INDEX for n in m["statistics"])


def test_load_genome_forms(tmp_path):
    names = ["Class Imbalance", "Top Unigram Mutual Information"]
    for obj in (names, {"name": "mine", "statistics": names}, {"best_genome": names}):
        p = tmp_path / "g.json"
        p.write_text(json.dumps(obj))
        assert set(load_genome(p).names) == set(names)
    bad = tmp_path / "bad.json"
    bad.write_text('["not a stat"]')
    with pytest.raises(ParseError):
        load_genome(bad)
