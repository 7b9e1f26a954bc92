"""Tell genuine two-handed signs apart from non-dominant-hand activity around one-handed signs.

Each segment is described by what the two hands do (``HandActivity``) and is
run through a fixed rule cascade; the first rule that fires gives the verdict
and every rule that fires is recorded.

    R1 held non-dominant hand left over from the previous two-handed sign
    R2 non-dominant hand already in position for the next two-handed sign
    R3 raised index held on the weak hand over two or more segments (theme buoy)
    R4 weak hand pointing at concurrent fingerspelling (focus marker)
    R5 mirrored copy of a one-handed sign
    R6 both hands active but no two-handed well-formedness pattern
    R7 symmetric or dominance-conforming two-handed sign
    R8 one active hand
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping

from .corpus import SignToken, Utterance
from .inventory import Inventory
from .lexicon import (LexiconEntry, LexiconError, check_dominance, check_symmetry,
                      classify_sign_type, resolve_gloss)

CONFOUND_TAGS = ("hold_H2_spread", "anticipatory_positioning", "mirroring", "focus_marker",
                 "theme_buoy")
VERDICTS = ("TwoHanded", "OneHandedWithConfound", "TwoIndependent", "MarkedTwoHandVariant",
            "MarkedOneHandVariant", "PlainOneHanded")

# Confidence given to a verdict, keyed by whether the lexicon confirmed it.
CONFIDENCE = {True: 1.0, False: 0.5}

FOCUS_GLOSS = '1"focus"'
BUOY_PREFIXES = ("BUOY", "THEME")


@dataclass(frozen=True)
class HandState:
    moving: bool = False
    handshape_start: str | None = None
    handshape_end: str | None = None
    held_since_previous: bool = False
    own_sign: bool = False

    def __post_init__(self):
        if self.held_since_previous and self.moving:
            raise ValueError("a held hand cannot be moving")


@dataclass(frozen=True)
class HandActivity:
    dom: HandState
    ndh: HandState | None = None
    orientation_relation: str = "other"
    movement_relation: str = "none"
    contact_between_hands: bool = False
    ndh_points_at_dom: bool = False
    ndh_vertical_index_held: bool = False
    concurrent_dom_is_fingerspelled: bool = False
    joint_token: bool = False
    label: str = ""


@dataclass(frozen=True)
class Context:
    """Surroundings of a segment: nearest two-handed segments and the buoy run length."""

    prev_two_handed: HandActivity | None = None
    next_two_handed: HandActivity | None = None
    buoy_run: int = 1


@dataclass(frozen=True)
class SegmentInterpretation:
    verdict: str
    sign_type: str | None = None
    tag: str | None = None
    confidence: float = 0.5
    fired_rules: tuple = ()
    secondary: str | None = None
    label: str = ""

    def to_json(self) -> dict:
        return {"segment": self.label, "verdict": self.verdict, "sign_type": self.sign_type,
                "tag": self.tag, "confidence": self.confidence,
                "fired_rules": list(self.fired_rules), "secondary": self.secondary}


def _same(inv: Inventory, a, b) -> bool:
    return a is not None and b is not None and inv.same_base(a, b)


def segment_entry(seg: HandActivity) -> LexiconEntry:
    """Read a two-hand segment as a lexicon-style entry for the well-formedness checks."""
    n = seg.ndh
    both_move = seg.dom.moving and n.moving
    location = (not n.moving) and seg.contact_between_hands
    mrel = seg.movement_relation if seg.movement_relation in ("simultaneous", "alternating") else "none"
    return LexiconEntry(
        gloss=seg.label or "segment", handedness="two",
        dom_start=seg.dom.handshape_start, dom_end=seg.dom.handshape_end,
        ndh_start=n.handshape_start, ndh_end=n.handshape_end,
        both_hands_move=both_move, movement_relation=mrel, contacts_body=False,
        ndh_is_location=location and not both_move,
        orientation_relation=seg.orientation_relation,
    )


def _has_handshapes(seg: HandActivity) -> bool:
    n = seg.ndh
    return None not in (seg.dom.handshape_start, seg.dom.handshape_end,
                        n.handshape_start, n.handshape_end)


def interpret(segment: HandActivity, context: Context | None = None,
              lexicon_hint: LexiconEntry | None = None,
              inv: Inventory | None = None) -> SegmentInterpretation:
    """Run the rule cascade on one segment.

    ``lexicon_hint`` is the citation entry of the dominant-hand sign, if known;
    its normal handedness is what marks one- or two-handed productions.
    """
    if inv is None:
        raise ValueError("an inventory is required")
    ctx = context or Context()
    d, n = segment.dom, segment.ndh
    hint = lexicon_hint.handedness if lexicon_hint else None
    hint_one = hint == "one"
    hint_two = hint == "two"
    fired = []
    outcomes = {}

    ndh_active = n is not None and (n.moving or n.own_sign)
    passive_free = n is not None and not n.moving and not segment.contact_between_hands

    prev2 = ctx.prev_two_handed
    if (passive_free and n.held_since_previous and prev2 is not None and prev2.ndh is not None
            and _same(inv, n.handshape_start, prev2.ndh.handshape_end)):
        fired.append("R1")
        outcomes["R1"] = ("OneHandedWithConfound", None, "hold_H2_spread", hint_one)

    next2 = ctx.next_two_handed
    if (passive_free and next2 is not None and next2.ndh is not None
            and _same(inv, n.handshape_start, next2.ndh.handshape_start)):
        fired.append("R2")
        outcomes["R2"] = ("OneHandedWithConfound", None, "anticipatory_positioning", hint_one)

    if n is not None and segment.ndh_vertical_index_held and ctx.buoy_run >= 2:
        fired.append("R3")
        outcomes["R3"] = ("OneHandedWithConfound", None, "theme_buoy", hint_one)

    if n is not None and segment.ndh_points_at_dom and segment.concurrent_dom_is_fingerspelled:
        fired.append("R4")
        outcomes["R4"] = ("OneHandedWithConfound", None, "focus_marker", True)

    if (n is not None and d.moving and n.moving and hint_one
            and segment.orientation_relation == "mirror"
            and _same(inv, d.handshape_start, n.handshape_start)
            and _same(inv, d.handshape_end, n.handshape_end)):
        fired.append("R5")
        outcomes["R5"] = ("OneHandedWithConfound", None, "mirroring", True)

    sym_ok = dom_ok = False
    sign_type = None
    if n is not None and _has_handshapes(segment):
        entry = segment_entry(segment)
        sym_ok = check_symmetry(entry, inv).ok
        dom_ok = check_dominance(entry, inv).ok
        if sym_ok or dom_ok:
            sign_type = classify_sign_type(entry, inv)

    if ndh_active and not sym_ok and not dom_ok:
        fired.append("R6")
        outcomes["R6"] = ("TwoIndependent", None, None, hint_one)

    if sym_ok or dom_ok:
        fired.append("R7")
        if hint_one:
            outcomes["R7"] = ("MarkedTwoHandVariant", sign_type, None, True)
        else:
            outcomes["R7"] = ("TwoHanded", sign_type, None, hint_two)

    if not ndh_active and not (sym_ok or dom_ok):
        fired.append("R8")
        if hint_two:
            outcomes["R8"] = ("MarkedOneHandVariant", None, None, True)
        else:
            outcomes["R8"] = ("PlainOneHanded", None, None, hint_one)

    first = fired[0]
    verdict, stype, tag, confirmed = outcomes[first]
    secondary = "MarkedTwoHandVariant" if first == "R5" else None
    return SegmentInterpretation(verdict, stype, tag, CONFIDENCE[bool(confirmed)], tuple(fired),
                                 secondary, segment.label)


# Converting annotated utterances into segments.

def _overlaps(a: SignToken, b: SignToken) -> bool:
    return a.start_frame <= b.end_frame and b.start_frame <= a.end_frame


def _lookup(lexicon, gloss):
    try:
        return resolve_gloss(lexicon, gloss)
    except LexiconError:
        return None, None


def _hs(tok: SignToken, hand: str, entry: LexiconEntry | None, canonical_hand: str):
    start, end = tok.observed(hand, "start"), tok.observed(hand, "end")
    if entry is not None:
        if canonical_hand == "dom":
            start = start or entry.dom_start
            end = end or entry.dom_end
        else:
            start = start or entry.ndh_start or entry.dom_start
            end = end or entry.ndh_end or entry.dom_end
    return start, end


def _is_buoy(gloss: str) -> bool:
    return gloss.upper().startswith(BUOY_PREFIXES)


@dataclass
class _Segment:
    activity: HandActivity
    gloss: str
    hint: LexiconEntry | None
    override: str | None


def utterance_segments(utt: Utterance, lexicon: Mapping[str, LexiconEntry]) -> list:
    """One segment per dominant-tier token, plus one per isolated non-dominant token.

    Conventions for the non-dominant tier: a token whose gloss repeats the
    most recent two-handed token is a hold of that sign; ``1"focus"`` is the
    focus marker; glosses starting with BUOY or THEME are theme buoys; a token
    with the same gloss as the concurrent dominant token mirrors it; any other
    token is a sign in its own right, held if it began earlier.
    """
    segments = []
    ndh_used = set()
    last_two_handed = None
    for tok in utt.dom_tokens:
        entry, override = _lookup(lexicon, tok.gloss)
        d_start, d_end = _hs(tok, "dom", entry, "dom")
        if tok.tier == "both":
            two_entry = entry is not None and entry.handedness == "two"
            n_start, n_end = _hs(tok, "ndh", entry, "ndh")
            if two_entry:
                ndh_moving = entry.both_hands_move
                contact = entry.ndh_is_location
                orient, mrel = entry.orientation_relation, entry.movement_relation
            else:
                ndh_moving, contact, orient, mrel = True, False, "identical", "simultaneous"
            act = HandActivity(
                dom=HandState(True, d_start, d_end),
                ndh=HandState(ndh_moving, n_start, n_end),
                orientation_relation=orient, movement_relation=mrel,
                contact_between_hands=contact, joint_token=True, label=tok.gloss)
            last_two_handed = tok
            segments.append((tok.start_frame, len(segments), _Segment(act, tok.gloss, entry, override)))
            continue

        concurrent = [t for t in utt.ndh_tokens if t.tier == "nondominant" and _overlaps(t, tok)]
        ndh_state = None
        kw = {}
        fingerspelled = "fingerspelled" in tok.class_tags
        for nt in concurrent:
            ndh_used.add(id(nt))
        if concurrent:
            nt = concurrent[0]
            n_entry, _ = _lookup(lexicon, nt.gloss)
            n_start, n_end = _hs(nt, "ndh", n_entry, "dom")
            began_earlier = nt.start_frame < tok.start_frame
            if last_two_handed is not None and nt.gloss == last_two_handed.gloss:
                ndh_state = HandState(False, n_start, n_end, held_since_previous=True)
            elif nt.gloss == FOCUS_GLOSS:
                ndh_state = HandState(False, n_start or "1", n_end or "1",
                                      held_since_previous=began_earlier)
                kw["ndh_points_at_dom"] = True
            elif _is_buoy(nt.gloss):
                ndh_state = HandState(False, n_start or "1", n_end or "1",
                                      held_since_previous=began_earlier)
                kw["ndh_vertical_index_held"] = True
            elif nt.gloss == tok.gloss:
                ndh_state = HandState(True, n_start, n_end)
                kw["orientation_relation"] = "mirror"
                kw["movement_relation"] = "simultaneous"
            else:
                ndh_state = HandState(not began_earlier, n_start, n_end,
                                      held_since_previous=began_earlier, own_sign=True)
                kw["movement_relation"] = "unrelated"
        act = HandActivity(dom=HandState(True, d_start, d_end), ndh=ndh_state,
                           concurrent_dom_is_fingerspelled=fingerspelled, label=tok.gloss, **kw)
        segments.append((tok.start_frame, len(segments), _Segment(act, tok.gloss, entry, override)))

    for nt in utt.ndh_tokens:
        if nt.tier != "nondominant" or id(nt) in ndh_used:
            continue
        entry, override = _lookup(lexicon, nt.gloss)
        n_start, n_end = _hs(nt, "ndh", entry, "dom")
        act = HandActivity(dom=HandState(True, n_start, n_end), label=nt.gloss)
        segments.append((nt.start_frame, len(segments), _Segment(act, nt.gloss, entry, override)))

    return [seg for _, _, seg in sorted(segments, key=lambda x: (x[0], x[1]))]


def interpret_utterance(utt: Utterance, lexicon: Mapping[str, LexiconEntry],
                        inv: Inventory) -> list[SegmentInterpretation]:
    segs = utterance_segments(utt, lexicon)
    acts = [s.activity for s in segs]

    # length of the run of consecutive buoy-carrying segments each segment sits in
    runs = [0] * len(acts)
    i = 0
    while i < len(acts):
        if acts[i].ndh_vertical_index_held:
            j = i
            while j < len(acts) and acts[j].ndh_vertical_index_held:
                j += 1
            for k in range(i, j):
                runs[k] = j - i
            i = j
        else:
            i += 1

    out = []
    for i, seg in enumerate(segs):
        prev2 = next((a for a in reversed(acts[:i]) if a.joint_token), None)
        next2 = next((a for a in acts[i + 1:] if a.joint_token), None)
        ctx = Context(prev2, next2, max(runs[i], 1))
        res = interpret(seg.activity, ctx, seg.hint, inv)
        out.append(replace(res, label=seg.gloss))
    return out


def dumps_interpretations(utt: Utterance, results: Iterable[SegmentInterpretation]) -> str:
    return "".join(json.dumps({"utterance": utt.id, **r.to_json()}, sort_keys=True) + "\n"
                   for r in results)
