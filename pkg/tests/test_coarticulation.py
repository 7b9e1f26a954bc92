from dataclasses import replace

import pytest
from hypothesis import given, settings, strategies as st

from signphon.coarticulation import (CoarticRecord, DetectorThresholds, ScanTally, build_report,
                                     detect, direction_breakdown, scan, scan_utterance)
from signphon.corpus import SignToken, Utterance
from signphon.inventory import load_default_inventory
from signphon.lexicon import LexiconError


def dom(gloss, s, e, start=0, tags=("lexical",)):
    return SignToken(gloss, "dominant", start, start + 5, (s, e), class_tags=frozenset(tags))


def test_index_assimilates_to_following_sign(inv, lex):
    ix = dom("IX-1p", "1", "B-L", tags=("index",))
    know = dom("KNOW", "B-L", "B-L", 10)
    rec = detect(ix, None, know, lex, inv)
    assert rec.direction == "anticipatory" and rec.severity == "major"
    assert rec.trigger_next == "B-L" and rec.trigger_prev is None


def test_house_before_index(inv, lex):
    house = SignToken("HOUSE", "both", 0, 8, ("B-L", "1"), ("B-L", "B-L"))
    ix = SignToken("IX-loc", "dominant", 10, 14, ("1", "1"), class_tags=frozenset({"index"}))
    rec = detect(house, None, ix, lex, inv)
    assert (rec.direction, rec.hands, rec.split) == ("anticipatory", "dom", "two_handed_dom_only")


def test_no_deviation(inv, lex):
    assert detect(dom("KNOW", "B-L", "B-L"), dom("WHO", "L", "X"), dom("THINK", "1", "1"),
                  lex, inv) is None


def test_deviation_away_from_neighbors(inv, lex):
    # brute force: an observed start farther from the neighbor than the citation form is
    canon, trig = "B-L", "1"
    away = [h for h in inv.labels if h != canon
            and inv.distance(h, trig) >= inv.distance(canon, trig)]
    assert away
    for obs in away:
        tok = dom("KNOW", obs, "B-L", 10)
        assert detect(tok, dom("THINK", "1", trig), None, lex, inv) is None


def test_perseverative_and_both(inv, lex):
    prev = dom("CL:X", "X", "X", tags=("classifier",))
    nxt = dom("KNOW", "B-L", "B-L", 20)
    rec = detect(dom("THINK", "X", "1", 10), prev, nxt, lex, inv)
    assert rec.direction == "perseverative" and rec.trigger_prev == "X"
    rec = detect(dom("THINK", "X", "bent-B-L", 10), prev, nxt, lex, inv)
    assert rec.direction == "both" and rec.severity == "major"


def test_unobserved_neighbor_uses_citation_form(inv, lex):
    nxt = SignToken("KNOW", "dominant", 20, 25)
    rec = detect(dom("THINK", "1", "B", 10), None, nxt, lex, inv)
    assert rec is not None and rec.trigger_next == "B-L"


def test_missing_observation_skips_endpoint(inv, lex):
    tok = SignToken("THINK", "dominant", 10, 15, (None, "1"))
    assert detect(tok, dom("CL:X", "X", "X", tags=("classifier",)), None, lex, inv) is None


def test_unknown_gloss(inv, lex):
    with pytest.raises(LexiconError):
        detect(dom("NOSUCH", "1", "1"), None, None, lex, inv)


def test_spread_to_both_hands(inv, lex):
    # fingerspelling ends in Y; the next sign has 5 on both hands and both shift toward Y
    y_ward = [h for h in inv.labels if inv.distance(h, "Y") < inv.distance("5", "Y")]
    obs = min(y_ward, key=lambda h: (inv.distance(h, "5"), h))
    fs = SignToken("fs-MARY", "dominant", 0, 9, ("I", "Y"),
                   class_tags=frozenset({"fingerspelled"}))
    finish = SignToken("FINISH", "both", 10, 18, (obs, "5"), (obs, "5"))
    rec = detect(finish, fs, None, lex, inv)
    assert rec.spread_to_both_hands and rec.hands == "both"
    assert rec.split == "two_handed_ndh_affected"
    assert any(d.via_spread for d in rec.deviations)
    # a two-handed trigger does not count as spreading
    cl = SignToken("CL:Y", "both", 0, 9, ("Y", "Y"), ("5", "5"), frozenset({"classifier"}))
    assert not detect(finish, cl, None, lex, inv, ndh_neighbors=(cl, None)).spread_to_both_hands


def test_require_movement_toward_off(inv, lex):
    thr = DetectorThresholds(require_movement_toward=False)
    prev = dom("CL:X", "X", "X", tags=("classifier",))
    assert detect(dom("THINK", "X", "1", 10), prev, None, lex, inv, thr) is not None
    # X-over-thumb moves toward X without matching it
    assert detect(dom("THINK", "X-over-thumb", "1", 10), prev, None, lex, inv, thr) is None
    assert detect(dom("THINK", "X-over-thumb", "1", 10), prev, None, lex, inv) is not None


def test_severity_bands():
    thr = DetectorThresholds()
    assert [thr.severity(d) for d in (0.25, 0.5, 0.75, 1.0, 1.25)] == [
        "subtle", "subtle", "moderate", "moderate", "major"]
    two_way = DetectorThresholds(tau_major=None)
    assert [two_way.severity(d) for d in (0.5, 0.75)] == ["subtle", "major"]
    with pytest.raises(ValueError):
        DetectorThresholds(tau_subtle=-1)


def test_empty_corpus(inv, lex):
    rep = scan([], lex, inv)
    assert rep.total_examined == 0 and rep.overall_rate == 0.0


def test_all_anticipatory(inv, lex):
    nxt = dom("KNOW", "B-L", "B-L", 20)
    recs = [detect(dom("THINK", "1", "B", 10), None, nxt, lex, inv) for _ in range(5)]
    assert direction_breakdown(recs)["one_handed"].affected == 5


def test_fixture_records_are_consistent(coartic_corpus, inv, lex):
    thr = DetectorThresholds()
    rep = scan(coartic_corpus, lex, inv, thresholds=thr)
    for r in rep.records:
        if r.direction in ("perseverative", "both"):
            assert r.trigger_prev is not None
        if r.direction in ("anticipatory", "both"):
            assert r.trigger_next is not None
        assert (r.severity == "subtle") == (r.max_distance <= thr.tau_subtle)
        assert r.severity == thr.severity(r.max_distance)
    assert sum(r.spread_to_both_hands for r in rep.records) == 2
    for split, c in rep.direction.items():
        assert c.affected == sum(1 for r in rep.records if r.split == split)


def test_partial_tallies_combine(coartic_corpus, inv, lex):
    half = len(coartic_corpus) // 2
    parts = [ScanTally(), ScanTally()]
    for i, utt in enumerate(coartic_corpus):
        parts[i >= half] = parts[i >= half] + scan_utterance(utt, lex, inv)
    a = build_report(parts[0] + parts[1]).to_json()
    b = build_report(parts[1] + parts[0]).to_json()
    assert a == b == scan(coartic_corpus, lex, inv).to_json()


def test_render_layout(coartic_corpus, inv, lex):
    text = scan(coartic_corpus, lex, inv).render()
    assert "Class1                24/405" in text
    assert "less than 1.5%" in text


# -- properties -------------------------------------------------------------

ONE_HANDED = ["KNOW", "THINK", "WHO", "MOTHER", "EXPERIENCE", "GIVE", "YES", "PHONE", "PURPLE",
              "SEE", "BALD"]


@st.composite
def scenarios(draw, inv):
    labels = inv.labels
    gloss = draw(st.sampled_from(ONE_HANDED))
    hs = lambda: draw(st.one_of(st.none(), st.sampled_from(labels)))  # noqa: E731
    prev = draw(st.one_of(st.none(), st.builds(lambda a, b: dom("CL", a, b, 0, ("classifier",)),
                                                st.sampled_from(labels), st.sampled_from(labels))))
    nxt = draw(st.one_of(st.none(), st.builds(lambda a, b: dom("CL", a, b, 20, ("classifier",)),
                                               st.sampled_from(labels), st.sampled_from(labels))))
    tok = SignToken(gloss, "dominant", 10, 15, (hs(), hs()))
    return tok, prev, nxt


_INV = load_default_inventory()


@settings(max_examples=300, deadline=None)
@given(scenarios(_INV), st.floats(0, 3), st.floats(0, 3))
def test_detect_properties(lex, case, t1, t2):
    tok, prev, nxt = case
    lo, hi = sorted((t1, t2))
    a = detect(tok, prev, nxt, lex, _INV, DetectorThresholds(tau_subtle=lo, tau_major=None))
    b = detect(tok, prev, nxt, lex, _INV, DetectorThresholds(tau_subtle=hi, tau_major=None))
    assert (a is None) == (b is None)
    if a is None:
        return
    # deterministic and threshold-independent apart from severity
    assert replace(a, severity="") == replace(b, severity="")
    assert (a.severity == "subtle") == (a.max_distance <= lo)
    if a.severity == "subtle":
        assert b.severity == "subtle"
    assert isinstance(a, CoarticRecord)
    for d in a.deviations:
        assert d.observed != d.canonical
        assert _INV.distance(d.observed, d.trigger) < _INV.distance(d.canonical, d.trigger)


@settings(max_examples=100, deadline=None)
@given(st.lists(scenarios(_INV), min_size=1, max_size=6))
def test_scan_properties(lex, cases):
    utts = []
    for i, (tok, prev, nxt) in enumerate(cases):
        toks = [t for t in (prev, tok, nxt) if t is not None]
        utts.append(Utterance(f"u{i}", "S", 30, tuple(toks)))
    rep = scan(utts, lex, _INV)
    assert rep.total_coarticulated <= rep.total_examined == len(cases)
    for c in rep.direction.values():
        assert c.persev + c.antic - c.both == c.affected >= 0
    assert rep.overall_rate == rep.total_coarticulated / rep.total_examined
