#!/usr/bin/env python3
"""Regenerate the shipped corpus fixtures under src/signphon/data.

    python3 scripts/build_fixtures.py

Outputs are deterministic (fixed seed) and re-checked after writing:

coartic_fixture.jsonl
    ~1000 utterances with 11,077 examined lexical tokens, 158 of which carry
    a coarticulated handshape. Per-class counts, direction splits and
    severity bands are the targets listed below.
chart_corpus.jsonl
    2,858 dominant-hand tokens whose (start, end) tally equals chart_stats.json,
    plus excluded and unannotated tokens that ``fit`` must skip.
disambiguation.jsonl
    One small utterance per non-dominant hand scenario (hold, mirroring,
    independent signs, focus marker, theme buoy, weak drop).
"""

from __future__ import annotations

import json
import random
import sys
from collections import Counter
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from signphon.coarticulation import DetectorThresholds, scan  # noqa: E402
from signphon.corpus import SignToken, Utterance, dumps_corpus, parse_corpus  # noqa: E402
from signphon.inventory import load_default_inventory  # noqa: E402
from signphon.lexicon import load_default_lexicon  # noqa: E402
from signphon.transitions import fit, load_shipped_stats  # noqa: E402
from signphon.corpus import filter_tokens  # noqa: E402

DATA = ROOT / "src" / "signphon" / "data"
SEED = 20240607

# coarticulated / occurrences per class, counting tokens with an annotated
# dominant start handshape
CLASS_TABLE = {"Class1": (24, 405), "Class2": (55, 992), "Class3": (6, 191), "Class4": (11, 459),
               "ClassY": (4, 10), "ClassPK": (3, 14), "Other": (0, 240)}
TOTAL_EXAMINED = 11_077
SEVERITY = {"subtle": 56, "moderate": 27, "major": 75}
# (split, direction, hands, spread) -> number of records
RECORD_PLAN = [
    ("one", "p", "dom", False, 22), ("one", "a", "dom", False, 61), ("one", "b", "dom", False, 7),
    ("dom", "p", "dom", False, 12), ("dom", "a", "dom", False, 32), ("dom", "b", "dom", False, 3),
    ("ndh", "p", "ndh", False, 2), ("ndh", "p", "both", True, 1), ("ndh", "p", "both", False, 1),
    ("ndh", "a", "ndh", False, 11), ("ndh", "a", "both", True, 1), ("ndh", "a", "both", False, 2),
    ("ndh", "b", "ndh", False, 2), ("ndh", "b", "both", False, 1),
]
# classes for records whose dominant start is not annotated
UNCOUNTED_CLASSES = {"Class1": 16, "Class2": 21, "Class3": 6, "Class4": 9, "ClassY": 2, "ClassPK": 1}

inv = load_default_inventory()
lex = load_default_lexicon(inv)
thr = DetectorThresholds()


def band(d: float) -> str:
    return thr.severity(d)


def pools():
    one, two, sym = {}, {}, {}
    for g, e in lex.items():
        if e.sign_class not in ("lexical", "loan"):
            continue
        cls = inv.class_of(e.dom_start)
        if e.handedness == "one":
            one.setdefault(cls, []).append(g)
        else:
            two.setdefault(cls, []).append(g)
            if e.both_hands_move and (e.dom_start, e.dom_end) == (e.ndh_start, e.ndh_end):
                sym.setdefault(cls, []).append(g)
    return one, two, sym


ONE, TWO, SYM = pools()


def pick_deviation(rng, canon: str, sev: str):
    """Observed handshape in the severity band and a trigger it moves toward."""
    labels = inv.labels
    opts = [(o, t) for o in labels if o != canon and band(inv.distance(o, canon)) == sev
            for t in labels if inv.distance(o, t) < inv.distance(canon, t)]
    if not opts:
        raise SystemExit(f"no {sev} deviation available for {canon}")
    return rng.choice(opts)


class Frames:
    def __init__(self, rng):
        self.rng = rng
        self.t = rng.randint(0, 5)

    def next(self):
        start = self.t
        end = start + self.rng.randint(5, 13)
        self.t = end + self.rng.randint(1, 4)
        return start, end


def tok(gloss, tier, fr, dom=None, ndh=None, tags=("lexical",), red=()):
    return dict(gloss=gloss, tier=tier, frames=fr, dom=dom, ndh=ndh, tags=tags, red=red)


def realize(spec_tokens, rng, uid, signer):
    frames = Frames(rng)
    toks = []
    for s in spec_tokens:
        start, end = frames.next()
        toks.append(SignToken(s["gloss"], s["tier"], start, end,
                              tuple(s["dom"]) if s["dom"] is not None else None,
                              tuple(s["ndh"]) if s["ndh"] is not None else None,
                              frozenset(s["tags"]), frozenset(s["red"])))
    return Utterance(uid, signer, 30, tuple(toks), None, frames.t + 3)


# -- coarticulation fixture ------------------------------------------------

def trigger_token(rng, dom_t, ndh_t=None, tier="dominant", start=True):
    """An excluded neighbor whose facing endpoint shows ``dom_t`` (and ``ndh_t``)."""
    def pair(t):
        other = rng.choice(inv.labels)
        return [t, other] if start else [other, t]
    if tier == "both":
        if dom_t == "5" and ndh_t == "5" and rng.random() < 0.5:
            return tok("part:indef", "both", None, pair("5"), pair("5"), ("part_indef",))
        return tok(f"CL:{dom_t}", "both", None, pair(dom_t), pair(ndh_t), ("classifier",))
    if dom_t == "1" and rng.random() < 0.7:
        return tok(rng.choice(["IX-1p", "IX-2p", "IX-loc"]), "dominant", None, pair("1"),
                   tags=("index",))
    kind = rng.choice(["classifier", "classifier", "fingerspelled"])
    gloss = f"CL:{dom_t}" if kind == "classifier" else "fs-" + rng.choice(["JOHN", "BOSTON", "IBM"])
    return tok(gloss, "dominant", None, pair(dom_t), tags=(kind,))


def record_gloss(rng, split, hands, spread, cls):
    if split == "one":
        return rng.choice(ONE[cls])
    if spread or (split == "ndh" and hands == "both"):
        return rng.choice(SYM[cls])
    return rng.choice(TWO[cls])


def feasible_bands(gloss, direction, hands, spread):
    e = lex[gloss]
    canon = {("dom", "start"): e.dom_start, ("dom", "end"): e.dom_end,
             ("ndh", "start"): e.ndh_start, ("ndh", "end"): e.ndh_end}
    dev_hands = {"dom": ("dom",), "ndh": ("ndh",), "both": ("dom", "ndh")}[hands]
    eps = {"p": ("start",), "a": ("end",), "b": ("start", "end")}[direction]
    out = []
    for sev in SEVERITY:
        ok = all(any(o != canon[h, ep] and band(inv.distance(o, canon[h, ep])) == sev
                     for o in inv.labels)
                 for ep in eps for h in dev_hands if not (spread and h == "ndh"))
        if ok:
            out.append(sev)
    return out


def record_block(rng, split, direction, hands, spread, gloss, counted, sev):
    dirs = {"p": ("start",), "a": ("end",), "b": ("start", "end")}[direction]
    e = lex[gloss]
    canon = {("dom", "start"): e.dom_start, ("dom", "end"): e.dom_end,
             ("ndh", "start"): e.ndh_start, ("ndh", "end"): e.ndh_end}
    dev_hands = {"dom": ("dom",), "ndh": ("ndh",), "both": ("dom", "ndh")}[hands]
    obs = {k: v for k, v in canon.items()}
    trig = {}
    for ep in dirs:
        for h in dev_hands:
            if spread and h == "ndh":
                continue
            o, t = pick_deviation(rng, canon[h, ep], sev)
            obs[h, ep] = o
            trig[h, ep] = t
        if spread:
            obs["ndh", ep] = obs["dom", ep]

    dom_hs = [obs["dom", "start"] if counted else None, obs["dom", "end"]]
    if split == "one":
        target = tok(gloss, "dominant", None, dom_hs)
    else:
        ndh_hs = [obs["ndh", "start"], obs["ndh", "end"]]
        target = tok(gloss, "both", None, dom_hs, ndh_hs)

    block = []
    for ep in ("start", "end"):
        if ep not in dirs:
            continue
        facing_start = ep == "end"   # the next sign's start faces our end
        if split == "ndh" and not spread:
            d_t = trig.get(("dom", ep), canon["dom", ep])
            n_t = trig["ndh", ep]
            t = trigger_token(rng, d_t, n_t, "both", facing_start)
        else:
            t = trigger_token(rng, trig["dom", ep], start=facing_start)
        block.append((ep, t))
    out = [t for ep, t in block if ep == "start"] + [target] + [t for ep, t in block if ep == "end"]
    return out, gloss


def filler(rng, cls, observed, deviate=None):
    if rng.random() < 0.7 or cls not in TWO:
        gloss = rng.choice(ONE[cls])
    else:
        gloss = rng.choice(TWO[cls])
    e = lex[gloss]
    start = e.dom_start if observed else None
    end = e.dom_end if rng.random() < 0.8 else None
    if deviate == "start":
        start = rng.choice([h for h in inv.labels if h != e.dom_start])
    if deviate == "end":
        end = rng.choice([h for h in inv.labels if h != e.dom_end])
    dom = None if start is None and end is None else [start, end]
    red = ()
    if e.handedness == "one":
        return tok(gloss, "dominant", None, dom)
    if rng.random() < 0.08:
        return tok(gloss, "dominant", None, dom, red=("weak_drop",))
    ndh = [e.ndh_start, e.ndh_end] if rng.random() < 0.6 else None
    return tok(gloss, "both", None, dom, ndh, red=red)


def excluded_token(rng):
    r = rng.random()
    if r < 0.35:
        return tok(rng.choice(["IX-1p", "IX-2p", "IX-loc"]), "dominant", None,
                   ["1", "1"] if rng.random() < 0.5 else None, tags=("index",))
    if r < 0.5:
        return tok("part:indef", "both", None, None, None, ("part_indef",))
    if r < 0.75:
        h = rng.choice(["B", "5", "V", "3", "C", "S", "1"])
        return tok(f"CL:{h}", "dominant", None, [h, h], tags=("classifier",))
    if r < 0.9:
        return tok("fs-" + rng.choice(["JOHN", "MARY", "BOSTON", "DVD"]), "dominant", None,
                   tags=("fingerspelled",))
    return tok(rng.choice(["g:well", "g:wave"]), "dominant", None, tags=("gesture",))


def build_coartic(rng):
    recs = []
    for split, d, hands, spread, n in RECORD_PLAN:
        recs += [dict(split=split, dir=d, hands=hands, spread=spread) for _ in range(n)]
    assert len(recs) == 158
    for r in recs:
        r["must_count"] = "dom" in ({"dom": ("dom",), "ndh": ("ndh",), "both": ("dom", "ndh")}
                                    [r["hands"]]) and r["dir"] in "pb"
    counted_total = sum(c for c, _ in CLASS_TABLE.values())
    optional = [r for r in recs if not r["must_count"]]
    rng.shuffle(optional)
    n_opt = counted_total - sum(r["must_count"] for r in recs)
    for i, r in enumerate(optional):
        r["counted"] = i < n_opt
    for r in recs:
        if r["must_count"]:
            r["counted"] = True

    counted_classes = [c for c, (k, _) in CLASS_TABLE.items() for _ in range(k)]
    uncounted_classes = [c for c, k in UNCOUNTED_CLASSES.items() for _ in range(k)]
    rng.shuffle(counted_classes)
    rng.shuffle(uncounted_classes)
    for r in recs:
        r["cls"] = (counted_classes if r["counted"] else uncounted_classes).pop()
        r["gloss"] = record_gloss(rng, r["split"], r["hands"], r["spread"], r["cls"])
        r["bands"] = feasible_bands(r["gloss"], r["dir"], r["hands"], r["spread"])
    # most constrained records pick their severity band first
    left = dict(SEVERITY)
    for r in sorted(recs, key=lambda r: len(r["bands"])):
        opts = [b for b in r["bands"] if left[b] > 0]
        r["sev"] = rng.choices(opts, [left[b] for b in opts])[0]
        left[r["sev"]] -= 1

    # fillers: annotated dominant start per class, then unannotated ones
    fillers = []
    for cls, (k, occ) in CLASS_TABLE.items():
        fillers += [(cls, True)] * (occ - k)
    n_unobs = TOTAL_EXAMINED - len(recs) - len(fillers)
    weights = {"Class1": 20, "Class2": 38, "Class3": 10, "Class4": 17, "ClassY": 2,
               "ClassPK": 1, "Other": 12}
    fillers += [(c, False) for c in rng.choices(list(weights), list(weights.values()), k=n_unobs)]
    rng.shuffle(fillers)

    utterances = []
    signers = ["S1", "S2", "S3", "S4", "S5", "S6"]
    rec_iter = iter(recs)
    fi = 0
    uid = 0
    pending = list(recs)
    rng.shuffle(pending)
    while fi < len(fillers) or pending:
        size = rng.randint(8, 16)
        chunk = fillers[fi:fi + size]
        fi += len(chunk)
        body = []
        for j, (cls, observed) in enumerate(chunk):
            dev = None
            # a few unexplained deviations at the utterance edges: no neighbor to blame
            if observed and j == 0 and rng.random() < 0.05:
                dev = "start"
            body.append(filler(rng, cls, observed, dev))
        for _ in range(rng.randint(0, 3)):
            if len(body) > 2:
                body.insert(rng.randint(1, len(body) - 1), excluded_token(rng))
        if pending and (rng.random() < 0.2 or fi >= len(fillers)):
            r = pending.pop()
            block, _ = record_block(rng, r["split"], r["dir"], r["hands"], r["spread"], r["gloss"],
                                    r["counted"], r["sev"])
            pos = 0 if r["spread"] or not body else rng.randint(1, len(body))
            body[pos:pos] = block
        if not body:
            continue
        uid += 1
        utterances.append(realize(body, rng, f"c{uid:05d}", signers[uid % len(signers)]))
    del rec_iter
    return utterances


# -- chart corpus ----------------------------------------------------------

CHART_GLOSSES = {"B-L": ["KNOW", "FUTURE", "HELLO", "HOUSE"],
                 "1": ["THINK", "WHERE", "DEAF", "REALLY", "GO", "WHEN", "IX-1p", "IX-loc"],
                 "5": ["MOTHER", "FATHER", "FINISH", "WANT", "EXPERIENCE"]}


def build_chart_corpus(rng):
    table = load_shipped_stats(inv)
    body = []
    for (s, e), c in table.counts.items():
        for _ in range(c):
            g = rng.choice(CHART_GLOSSES[s])
            ent = lex[g]
            tags = ("index",) if ent.sign_class == "index" else ("lexical",)
            if ent.handedness == "two":
                body.append(tok(g, "both", None, [s, e], [ent.ndh_start, ent.ndh_end], tags))
            else:
                body.append(tok(g, "dominant", None, [s, e], tags=tags))
    for _ in range(60):
        h = rng.choice(["B-L", "1", "5", "C"])
        body.append(tok(f"CL:{h}", "dominant", None, [h, rng.choice(inv.labels)],
                        tags=("classifier",)))
    for _ in range(25):
        g = rng.choice(CHART_GLOSSES["1"][:4])
        body.append(tok(g, "dominant", None, rng.choice([None, ["1", None], [None, "1"]])))
    rng.shuffle(body)
    out = []
    for i in range(0, len(body), 12):
        out.append(realize(body[i:i + 12], rng, f"h{i // 12 + 1:04d}", f"S{i % 4 + 1}"))
    return out


# -- disambiguation scenarios ----------------------------------------------

def build_disambiguation():
    T = SignToken
    lx = frozenset({"lexical"})
    scenarios = [
        # DRIVE is signed, then its weak hand stays up under two one-handed signs
        Utterance("hold", "S1", 30, (
            T("DRIVE", "both", 0, 14, ("S", "S"), ("S", "S"), lx),
            T("DRIVE", "nondominant", 15, 48, None, ("S", "S"), lx),
            T("WHERE", "dominant", 16, 28, ("1", "1"), None, lx),
            T("THINK", "dominant", 31, 45, ("1", "1"), None, lx),
        ), "(you) drove, where, (I) wonder", 52),
        # the weak hand copies a pointing sign
        Utterance("mirroring", "S2", 30, (
            T("IX-loc", "dominant", 0, 10, ("1", "1"), None, frozenset({"index"})),
            T("IX-loc", "nondominant", 0, 10, None, ("1", "1"), frozenset({"index"})),
            T("GO", "both", 12, 24, ("1", "1"), ("1", "1"), lx),
        ), "those places, go", 28),
        # each hand carries its own one-handed sign
        Utterance("independent", "S3", 30, (
            T("PHONE", "nondominant", 0, 30, None, ("Y", "Y"), lx),
            T("EXPERIENCE", "dominant", 4, 20, ("5", "flat-O"), None, lx),
        ), "on the phone, (I) have experience", 34),
        # weak-hand index points at the fingerspelled word
        Utterance("focus", "S4", 30, (
            T('1"focus"', "nondominant", 0, 25, None, ("1", "1"), lx),
            T("fs-JOHN", "dominant", 2, 22, None, None, frozenset({"fingerspelled"})),
            T("KNOW", "dominant", 27, 35, ("B-L", "B-L"), None, lx),
        ), "John, (I) know", 40),
        # a raised index held on the weak hand across several signs
        Utterance("buoy", "S5", 30, (
            T("THEME-BUOY", "nondominant", 0, 40, None, ("1", "1"), lx),
            T("SELF", "dominant", 2, 12, ("10", "10"), None, lx),
            T("SORRY", "dominant", 15, 25, ("A", "A"), None, lx),
            T("YES", "dominant", 28, 38, ("S", "S"), None, lx),
        ), "the topic itself, sorry, yes", 44),
        # a two-handed sign produced with one hand
        Utterance("weak_drop", "S6", 30, (
            T("(1h)ANGRY", "dominant", 0, 12, ("crvd-5", "crvd-5"), None, lx,
              frozenset({"weak_drop"})),
            T("KNOW", "dominant", 15, 24, ("B-L", "B-L"), None, lx),
        ), "angry, (I) know", 28),
    ]
    return scenarios


def write(name, corpus):
    text = dumps_corpus(corpus)
    (DATA / name).write_text(text, encoding="utf-8")
    with open(DATA / name, encoding="utf-8") as fh:
        return parse_corpus(fh, inv)


def main():
    rng = random.Random(SEED)
    coartic = write("coartic_fixture.jsonl", build_coartic(rng))
    rep = scan(coartic, lex, inv)
    print("examined", rep.total_examined, "coarticulated", rep.total_coarticulated)
    print({c: (r.coartic, r.occurrences) for c, r in rep.per_class.items()})
    print({s: c.to_json() for s, c in rep.direction.items()}, rep.severity)
    assert rep.total_examined == TOTAL_EXAMINED
    assert rep.total_coarticulated == 158
    assert {c: (r.coartic, r.occurrences) for c, r in rep.per_class.items()} == CLASS_TABLE
    assert rep.severity == SEVERITY

    chart = write("chart_corpus.jsonl", build_chart_corpus(random.Random(SEED + 1)))
    table = fit(filter_tokens(chart), inv)
    assert table == load_shipped_stats(inv), "chart corpus does not reproduce the stats"
    print("chart corpus tokens", table.total, "skipped", table.skipped)

    write("disambiguation.jsonl", build_disambiguation())
    print(Counter(len(u.tokens) for u in coartic).most_common(3))


if __name__ == "__main__":
    main()
