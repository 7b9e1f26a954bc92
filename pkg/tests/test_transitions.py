import io
import json
import warnings
from fractions import Fraction

import numpy as np
import pytest

from signphon.corpus import SignToken, filter_tokens
from signphon.transitions import (SmoothingConfig, StatsError, TransitionTable,
                                  UndefinedRowWarning, cond_matrix, cond_prob, dumps_stats, fit,
                                  joint_prior, load_stats, report, save_stats)

from oracles import smoothed


def tok(s, e, **kw):
    return SignToken("T", "dominant", 0, 1, (s, e), **kw)


def test_empty_fit(inv):
    table = fit([], inv)
    assert table.counts == {} and table.total == 0 and table.inventory_size == 40


def test_single_token(inv):
    table = fit([tok("1", "X")], inv)
    assert table.count("1", "X") == 1 and table.start_totals == {"1": 1}


def test_skipped_tokens_tallied(inv):
    toks = [tok("1", "X"), SignToken("T", "dominant", 0, 1), SignToken("T", "dominant", 0, 1, (None, "1"))]
    table = fit(toks, inv)
    assert table.total == 1 and table.skipped == 2


def test_nondominant_fit(inv):
    t = SignToken("GO", "both", 0, 1, ("1", "1"), ("1", "bent-1"))
    assert fit([t], inv, hand="ndh").count("1", "bent-1") == 1


def test_chart_corpus_reproduces_shipped_stats(inv, chart, chart_corpus):
    table = fit(filter_tokens(chart_corpus), inv)
    assert table == chart
    assert table.start_totals == {"B-L": 1089, "1": 992, "5": 777}
    assert (table.count("B-L", "B-L"), table.count("1", "X"), table.count("5", "flat-O")) == (917, 71, 58)
    assert table.skipped == 25


def test_fit_permutation_invariant(inv, chart_corpus):
    toks = filter_tokens(chart_corpus)
    rng = np.random.default_rng(3)
    shuffled = [toks[i] for i in rng.permutation(len(toks))]
    assert fit(shuffled, inv) == fit(toks, inv)


def test_row_sums(chart):
    for s, total in chart.start_totals.items():
        assert sum(chart.row(s).values()) == total
    assert chart.start_totals == {"B-L": 1089, "1": 992, "5": 777}


def test_merge(inv, chart):
    merged = chart.merge(chart)
    assert merged.count("B-L", "B-L") == 2 * 917
    for s, total in merged.start_totals.items():
        assert sum(merged.row(s).values()) == total
    with pytest.raises(StatsError):
        chart.merge(TransitionTable({}, 10))


def test_cond_prob_exact(chart):
    p = cond_prob(chart, "B-L", "B-L", SmoothingConfig(0), exact=True)
    assert p == Fraction(917, 1089)
    assert abs(cond_prob(chart, "B-L", "B-L", SmoothingConfig(0)) - 0.842057) < 1e-6
    assert cond_prob(chart, "B-L", "W", SmoothingConfig(0)) == 0.0


def test_cond_prob_laplace(chart):
    assert cond_prob(chart, "1", "V", SmoothingConfig(1.0), exact=True) == Fraction(10, 1032)
    assert cond_prob(chart, "1", "V", SmoothingConfig(0.1), exact=True) == smoothed(9, 992, 40, Fraction(0.1))


def test_undefined_row_warns(chart):
    with pytest.warns(UndefinedRowWarning):
        assert cond_prob(chart, "W", "W", SmoothingConfig(0)) == 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert cond_prob(chart, "W", "W", SmoothingConfig(0.5)) == pytest.approx(1 / 40)


@pytest.mark.parametrize("alpha", [0.0, 0.1, 1.0])
def test_conditionals_sum_to_one(chart, alpha):
    m = cond_matrix(chart, SmoothingConfig(alpha))
    labels = chart.labels
    for i, s in enumerate(labels):
        if chart.start_totals.get(s, 0) or alpha > 0:
            assert abs(m[i].sum() - 1) < 1e-12


def test_joint_prior(chart):
    p0 = joint_prior(chart, SmoothingConfig(0))
    assert p0.prob("B-L", "B-L") == pytest.approx(917 / 2858, abs=1e-15)
    for a in (0.0, 0.1, 2.0):
        assert abs(joint_prior(chart, SmoothingConfig(a)).matrix.sum() - 1) < 1e-12
    big = joint_prior(chart, SmoothingConfig(1e9)).matrix
    assert big.max() / big.min() < 1 + 1e-5
    with pytest.raises(StatsError):
        joint_prior(TransitionTable({}, 40, chart.labels), SmoothingConfig(0))


def test_report_chart(chart):
    rep = report(chart)
    assert [r.start for r in rep.rows] == ["B-L", "1", "5"]
    bl = rep.rows[0]
    assert bl.n_other_above_1pct == 4
    above = [(e, round(100 * p, 2)) for e, c, p in bl.ends if e != "B-L" and p > 0.01]
    assert above == [("bent-B-L", 8.17), ("flat-O", 2.57), ("10", 2.48), ("crvd-B", 1.10)]
    assert all(r.argmax_end == r.start for r in rep.rows)
    text = rep.render()
    assert text.splitlines()[2].startswith("B-L 1089 | B-L 917  bent-B-L 89")


def test_report_ties_are_lexicographic(inv):
    table = fit([tok("S", "S"), tok("A", "A"), tok("S", "A")], inv)
    rep = report(table)
    assert [r.start for r in rep.rows] == ["S", "A"]
    assert [e for e, _, _ in rep.rows[0].ends] == ["A", "S"]


def test_stats_round_trip(inv, chart):
    text = dumps_stats(chart)
    again = load_stats(io.StringIO(text), inv)
    assert again == chart and dumps_stats(again) == text
    buf = io.StringIO()
    save_stats(chart, buf)
    assert buf.getvalue() == text


def test_row_sum_error(inv, chart):
    obj = json.loads(dumps_stats(chart))
    obj["rows"][0]["ends"][0]["count"] -= 1   # 1088 under a stated 1089
    with pytest.raises(StatsError, match="1088"):
        load_stats(io.StringIO(json.dumps(obj)), inv)


@pytest.mark.parametrize("mutate,match", [
    (lambda o: o["rows"][0]["ends"].append({"end": "B-L", "count": 0}), "duplicate"),
    (lambda o: o["rows"][0]["ends"][-1].update(end="Q"), "unknown"),
    (lambda o: o.update(inventory_size=41), "inventory_size"),
    (lambda o: o.pop("rows"), "malformed"),
])
def test_bad_stats_files(inv, chart, mutate, match):
    obj = json.loads(dumps_stats(chart))
    mutate(obj)
    with pytest.raises(StatsError, match=match):
        load_stats(io.StringIO(json.dumps(obj)), inv)
