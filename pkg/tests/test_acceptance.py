"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line."""

import io
import time
from contextlib import contextmanager
from fractions import Fraction
from importlib import resources

import numpy as np
import pytest

from signphon.coarticulation import scan
from signphon.corpus import dumps_corpus, parse_corpus
from signphon.disambiguator import dumps_interpretations, interpret_utterance
from signphon.inventory import load_default_inventory, load_inventory
from signphon.lexicon import (IllFormedSign, check_dominance, check_symmetry, classify_sign_type,
                              load_default_lexicon, parse_lexicon)
from signphon.reranker import (NoiseModel, ObservationPair, argmax_label, evaluate,
                               pool_two_hands, rerank, synth_generate)
from signphon.transitions import (SmoothingConfig, cond_prob, dumps_stats, joint_prior,
                                  load_shipped_stats, load_stats, report)

import oracles

# Frozen from an oracle run of the harness (seed 42): observed margin 0.530.
# The criterion itself asks for at least three points.
MARGIN_CRITERION = 0.03
SEED = 42


@contextmanager
def criterion(log, n, title, budget):
    t0 = time.perf_counter()
    try:
        yield
    except BaseException as exc:
        log[n] = f"FAIL criterion {n}: {title} ({type(exc).__name__}: {exc})"
        print(log[n])
        raise
    elapsed = time.perf_counter() - t0
    ok = elapsed < budget
    log[n] = f"{'PASS' if ok else 'FAIL'} criterion {n}: {title} ({elapsed:.2f}s, budget {budget:g}s)"
    print(log[n])
    assert ok, log[n]


def test_criterion_1_stats_fixture(acceptance_log):
    with criterion(acceptance_log, 1, "chart stats fixture integrity", 1.0):
        table = load_shipped_stats(load_default_inventory())
        assert table.start_totals == {"B-L": 1089, "1": 992, "5": 777}
        assert table.count("B-L", "B-L") == 917
        assert table.count("1", "X") == 71
        assert table.count("5", "S") == 71


def test_criterion_2_conditional_probability(acceptance_log, chart):
    with criterion(acceptance_log, 2, "conditional probability and >1% ends", 1.0):
        cfg = SmoothingConfig(0)
        assert cond_prob(chart, "B-L", "B-L", cfg, exact=True) == Fraction(917, 1089)
        assert abs(cond_prob(chart, "B-L", "B-L", cfg) - 0.842057) <= 1e-6
        bl = next(r for r in report(chart, cfg).rows if r.start == "B-L")
        assert bl.n_other_above_1pct == 4


def test_criterion_3_coarticulation_prevalence(acceptance_log, inv, lex):
    with criterion(acceptance_log, 3, "coarticulation prevalence", 10.0):
        corpus = parse_corpus(io.StringIO(_shipped_text("coartic_fixture.jsonl")), inv)
        rep = scan(corpus, lex, inv)
        assert (rep.total_examined, rep.total_coarticulated) == (11077, 158)
        assert round(100 * rep.overall_rate, 2) == 1.43 and rep.overall_rate < 0.015
        classes = {c: (v["coartic"], v["occurrences"]) for c, v in rep.to_json()["per_class"].items()}
        assert classes == {"Class1": (24, 405), "Class2": (55, 992), "Class3": (6, 191),
                           "Class4": (11, 459), "ClassY": (4, 10), "ClassPK": (3, 14),
                           "Other": (0, 240)}
        sev = rep.to_json()["severity"]
        assert (sev["subtle"], sev["major"]) == (56, 75)
        assert sum(sev.values()) == 158


def test_criterion_4_direction_arithmetic(acceptance_log, coartic_corpus, inv, lex):
    with criterion(acceptance_log, 4, "direction arithmetic", 10.0):
        d = scan(coartic_corpus, lex, inv).direction
        one, dom = d["one_handed"], d["two_handed_dom_only"]
        assert (one.persev, one.antic, one.both, one.affected) == (29, 68, 7, 90)
        assert (dom.persev, dom.antic, dom.both, dom.affected) == (15, 35, 3, 47)


def test_criterion_5_wellformedness_oracle(acceptance_log, inv):
    with criterion(acceptance_log, 5, "well-formedness oracle equivalence", 30.0):
        n = agree = 0
        for e in oracles.all_cases():
            n += 1
            expected = oracles.sign_type(e)
            try:
                got = classify_sign_type(e, inv)
            except IllFormedSign:
                got = None
            agree += (check_symmetry(e, inv).status == oracles.symmetry(e)
                      and check_dominance(e, inv).status == oracles.dominance(e)
                      and got == expected)
        assert n >= 40_000 and agree == n, f"{agree}/{n} cases agree"


def _random_maps(rng, labels, count):
    """Sparse score maps on a coarse grid, so ties are common."""
    out = []
    for _ in range(count):
        k = int(rng.integers(1, 6))
        keys = rng.choice(labels, size=k, replace=False)
        vals = rng.integers(1, 11, size=k) / 10
        out.append({str(a): float(v) for a, v in zip(keys, vals)})
    return out


def test_criterion_6_reranker(acceptance_log, inv, chart):
    with criterion(acceptance_log, 6, "reranker properties", 30.0):
        prior = joint_prior(chart, SmoothingConfig(0.1))
        labels = list(prior.labels)
        rng = np.random.default_rng(SEED)
        starts, ends = _random_maps(rng, labels, 10_000), _random_maps(rng, labels, 10_000)
        hits = sum(rerank(ObservationPair(s, e), prior, 0.0).best
                   == (argmax_label(s), argmax_label(e)) for s, e in zip(starts, ends))
        assert hits == 10_000, f"(a) {hits}/10000"
        clean = synth_generate(prior, NoiseModel(kappa=0.0, seed=SEED), 2_000, inv)
        for lam in (0.0, 1.0):
            assert evaluate(clean, prior, lam)["rank1_accuracy"] == 1.0, "(b)"
        noisy = synth_generate(prior, NoiseModel(kappa=0.5, seed=SEED), 10_000, inv)
        margin = (evaluate(noisy, prior, 1.0)["rank1_accuracy"]
                  - evaluate(noisy, prior, 0.0)["rank1_accuracy"])
        assert margin >= MARGIN_CRITERION, f"(c) margin {margin:.4f}"


def test_criterion_7_pooling(acceptance_log, inv):
    with criterion(acceptance_log, 7, "two-hand pooling", 30.0):
        labels = list(inv.labels)
        rng = np.random.default_rng(SEED)
        unmarked = [h for h in labels if inv.is_unmarked(h)]
        maps = _random_maps(rng, labels, 2_000)
        for i in range(1_000):
            a, b = dict(maps[2 * i]), dict(maps[2 * i + 1])
            # keep at least one unmarked handshape so masking is never degenerate
            a.setdefault(str(rng.choice(unmarked)), 0.05)
            b.setdefault(str(rng.choice(unmarked)), 0.05)
            ndh = ObservationPair(a, b)
            pooled = pool_two_hands(ObservationPair({"X": 1.0}, {"X": 1.0}), ndh, "Type3", inv)
            for half in (pooled.start_scores, pooled.end_scores):
                assert all(inv.is_unmarked(h) for h, v in half.items() if v > 0)
            same = pool_two_hands(ndh, ndh, "Type1", inv)
            assert argmax_label(same.start_scores) == argmax_label(a)
            assert argmax_label(same.end_scores) == argmax_label(b)


EXPECTED_TAGS = {
    "hold": ("WHERE", "OneHandedWithConfound", "hold_H2_spread"),
    "mirroring": ("IX-loc", "OneHandedWithConfound", "mirroring"),
    "independent": ("EXPERIENCE", "TwoIndependent", None),
    "focus": ("fs-JOHN", "OneHandedWithConfound", "focus_marker"),
    "buoy": ("SELF", "OneHandedWithConfound", "theme_buoy"),
    "weak_drop": ("(1h)ANGRY", "MarkedOneHandVariant", None),
}


def test_criterion_8_disambiguator(acceptance_log, scenarios, lex, inv):
    with criterion(acceptance_log, 8, "disambiguator fixtures", 10.0):
        assert set(scenarios) == set(EXPECTED_TAGS)
        for uid, (segment, verdict, tag) in EXPECTED_TAGS.items():
            utt = scenarios[uid]
            results = interpret_utterance(utt, lex, inv)
            got = next(r for r in results if r.label == segment)
            assert (got.verdict, got.tag) == (verdict, tag), uid
            first = dumps_interpretations(utt, results)
            assert dumps_interpretations(utt, interpret_utterance(utt, lex, inv)) == first


def _shipped_text(name):
    return resources.files("signphon.data").joinpath(name).read_text(encoding="utf-8")


def test_criterion_9_round_trips(acceptance_log):
    with criterion(acceptance_log, 9, "round trips", 30.0):
        inv = load_inventory(io.StringIO(load_default_inventory().dumps()))
        text = inv.dumps()
        assert load_inventory(io.StringIO(text)).dumps() == text
        assert load_inventory(io.StringIO(text)) == inv

        lex = load_default_lexicon(inv)
        text = lex.dumps()
        again = parse_lexicon(io.StringIO(text), inv)
        assert dict(again) == dict(lex) and again.dumps() == text

        for name in ("coartic_fixture.jsonl", "chart_corpus.jsonl", "disambiguation.jsonl"):
            corpus = parse_corpus(io.StringIO(_shipped_text(name)), inv)
            text = dumps_corpus(corpus)
            again = parse_corpus(io.StringIO(text), inv)
            assert again == corpus and dumps_corpus(again) == text, name

        stats = load_stats(io.StringIO(_shipped_text("chart_stats.json")), inv)
        text = dumps_stats(stats)
        again = load_stats(io.StringIO(text), inv)
        assert again == stats and dumps_stats(again) == text


@pytest.mark.parametrize("n", range(1, 10))
def test_every_criterion_reported(acceptance_log, n):
    # runs after the criteria in file order; a missing line means a criterion never ran
    assert n in acceptance_log and acceptance_log[n].startswith("PASS"), acceptance_log.get(n)
