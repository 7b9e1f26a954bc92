"""Handshape coarticulation detection and prevalence reporting.

A token endpoint deviates when its observed handshape differs from the
citation form. A start deviation counts as perseverative when the observed
handshape is closer than the citation handshape to the preceding sign's end
handshape on the same hand; an end deviation counts as anticipatory when it is
closer to the following sign's start handshape. Neighbors come from the raw
tiers, so excluded signs (index signs, part:indef) still act as triggers.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .corpus import ExclusionPolicy, SignToken, Utterance, iter_retained, neighbors
from .inventory import CLASSES, DEFAULT_WEIGHTS, DistanceWeights, Inventory
from .lexicon import LexiconEntry, LexiconError, resolve_gloss

SPLITS = ("one_handed", "two_handed_dom_only", "two_handed_ndh_affected")
SEVERITIES = ("subtle", "moderate", "major")


@dataclass(frozen=True)
class DetectorThresholds:
    """Severity cut points on the handshape distance.

    Records whose largest coarticulatory deviation is at most ``tau_subtle``
    are subtle; above ``tau_major`` they are major; in between they are
    moderate. ``tau_major=None`` makes the split strictly two-way.
    """

    tau_subtle: float = 0.5
    tau_major: float | None = 1.0
    require_movement_toward: bool = True
    weights: DistanceWeights = DEFAULT_WEIGHTS

    def __post_init__(self):
        if self.tau_subtle < 0:
            raise ValueError("tau_subtle must be non-negative")

    def severity(self, dist: float) -> str:
        if dist <= self.tau_subtle:
            return "subtle"
        cut = self.tau_subtle if self.tau_major is None else max(self.tau_subtle, self.tau_major)
        return "major" if dist > cut else "moderate"


@dataclass(frozen=True)
class Deviation:
    hand: str          # "dom" | "ndh"
    endpoint: str      # "start" | "end"
    observed: str
    canonical: str
    trigger: str
    distance: float    # observed vs canonical
    via_spread: bool = False


@dataclass(frozen=True)
class CoarticRecord:
    token: SignToken
    direction: str     # perseverative | anticipatory | both
    hands: str         # dom | ndh | both
    severity: str
    trigger_prev: str | None
    trigger_next: str | None
    spread_to_both_hands: bool
    handedness: str
    deviations: tuple = field(default_factory=tuple)

    @property
    def max_distance(self) -> float:
        return max(d.distance for d in self.deviations)

    @property
    def split(self) -> str:
        if self.handedness == "one":
            return "one_handed"
        return "two_handed_dom_only" if self.hands == "dom" else "two_handed_ndh_affected"

    def to_json(self) -> dict:
        return {
            "gloss": self.token.gloss, "start_frame": self.token.start_frame,
            "direction": self.direction, "hands": self.hands, "severity": self.severity,
            "trigger_prev": self.trigger_prev, "trigger_next": self.trigger_next,
            "spread_to_both_hands": self.spread_to_both_hands,
        }


def _canonical(entry: LexiconEntry, override: str | None, tier: str, hand: str, endpoint: str):
    """Citation handshape for one hand of a token as produced on ``tier``."""
    if tier == "nondominant" or hand == "dom":
        return entry.dom_start if endpoint == "start" else entry.dom_end
    if entry.handedness == "two":
        return entry.ndh_start if endpoint == "start" else entry.ndh_end
    if override == "two":
        return entry.dom_start if endpoint == "start" else entry.dom_end
    return None


def _hands_of(token: SignToken) -> tuple:
    if token.tier == "both":
        return ("dom", "ndh")
    return ("ndh",) if token.tier == "nondominant" else ("dom",)


def _neighbor_hs(neighbor: SignToken | None, hand: str, endpoint: str, lexicon) -> str | None:
    """Observed handshape of a neighbor on ``hand`` (citation form when unobserved)."""
    if neighbor is None:
        return None
    obs = neighbor.observed(hand, endpoint)
    if obs is not None:
        return obs
    try:
        entry, override = resolve_gloss(lexicon, neighbor.gloss)
    except LexiconError:
        return None
    return _canonical(entry, override, neighbor.tier, hand, endpoint)


def detect(token: SignToken, prev: SignToken | None, next: SignToken | None,
           lexicon: Mapping[str, LexiconEntry], inv: Inventory,
           thresholds: DetectorThresholds = DetectorThresholds(),
           ndh_neighbors: tuple = (None, None)) -> CoarticRecord | None:
    """Detect handshape coarticulation on one token.

    ``prev``/``next`` are the raw neighbors on the token's own tier (the
    dominant tier for two-handed tokens); ``ndh_neighbors`` gives the
    non-dominant-tier pair for two-handed tokens. Raises LexiconError for an
    unknown gloss.
    """
    entry, override = resolve_gloss(lexicon, token.gloss)
    handedness = override or entry.handedness
    if token.tier == "both" and handedness == "one":
        handedness = "two"
    w = thresholds.weights

    def qualifies(obs, canon, trigger):
        if trigger is None:
            return False
        if not thresholds.require_movement_toward:
            return obs == trigger
        return inv.distance(obs, trigger, w) < inv.distance(canon, trigger, w)

    tier_pairs = {}
    for hand in _hands_of(token):
        if hand == "ndh" and token.tier == "both":
            tier_pairs[hand] = ndh_neighbors
        else:
            tier_pairs[hand] = (prev, next)

    found: dict = {}
    raw: dict = {}
    for hand in _hands_of(token):
        p, n = tier_pairs[hand]
        for endpoint, nb, nb_end in (("start", p, "end"), ("end", n, "start")):
            obs = token.observed(hand, endpoint)
            canon = _canonical(entry, override, token.tier, hand, endpoint)
            if obs is None or canon is None or obs == canon:
                continue
            raw[hand, endpoint] = (obs, canon)
            trig = _neighbor_hs(nb, hand, nb_end, lexicon)
            if qualifies(obs, canon, trig):
                found[hand, endpoint] = Deviation(hand, endpoint, obs, canon, trig,
                                                  inv.distance(obs, canon, w))

    spread = False
    if token.tier == "both" and entry.handedness == "two" and (
            entry.dom_start == entry.ndh_start and entry.dom_end == entry.ndh_end):
        for endpoint, trig_tok in (("start", prev), ("end", next)):
            dom_dev = found.get(("dom", endpoint))
            ndh_raw = raw.get(("ndh", endpoint))
            if (dom_dev is None or ndh_raw is None or trig_tok is None
                    or trig_tok.tier == "both" or ndh_raw[0] != dom_dev.observed):
                continue
            spread = True
            if ("ndh", endpoint) not in found:
                found["ndh", endpoint] = Deviation("ndh", endpoint, ndh_raw[0], ndh_raw[1],
                                                   dom_dev.trigger, dom_dev.distance, True)

    if not found:
        return None
    devs = tuple(found[k] for k in sorted(found))
    starts = [d for d in devs if d.endpoint == "start"]
    ends = [d for d in devs if d.endpoint == "end"]
    direction = "both" if starts and ends else ("perseverative" if starts else "anticipatory")
    hands_hit = {d.hand for d in devs}
    hands = "both" if len(hands_hit) == 2 else hands_hit.pop()
    pick = lambda ds: (sorted(ds, key=lambda d: d.hand != "dom")[0].trigger if ds else None)  # noqa: E731
    return CoarticRecord(
        token=token, direction=direction, hands=hands,
        severity=thresholds.severity(max(d.distance for d in devs)),
        trigger_prev=pick(starts), trigger_next=pick(ends),
        spread_to_both_hands=spread, handedness=handedness, deviations=devs,
    )


def detect_in(utt: Utterance, token: SignToken, lexicon, inv: Inventory,
              thresholds: DetectorThresholds = DetectorThresholds()) -> CoarticRecord | None:
    """``detect`` with neighbors taken from the utterance's raw tiers."""
    prev, nxt = neighbors(utt, token)
    ndh = neighbors(utt, token, "nondominant") if token.tier == "both" else (None, None)
    return detect(token, prev, nxt, lexicon, inv, thresholds, ndh)


@dataclass(frozen=True)
class SplitCounts:
    persev: int = 0
    antic: int = 0
    both: int = 0

    @property
    def affected(self) -> int:
        return self.persev + self.antic - self.both

    def to_json(self) -> dict:
        return {"persev": self.persev, "antic": self.antic, "both": self.both,
                "affected": self.affected}


def direction_breakdown(records: Iterable[CoarticRecord]) -> dict:
    """Per-split perseverative/anticipatory/both counts (union arithmetic)."""
    tally = {s: Counter() for s in SPLITS}
    for r in records:
        t = tally[r.split]
        if r.direction in ("perseverative", "both"):
            t["persev"] += 1
        if r.direction in ("anticipatory", "both"):
            t["antic"] += 1
        if r.direction == "both":
            t["both"] += 1
    return {s: SplitCounts(t["persev"], t["antic"], t["both"]) for s, t in tally.items()}


@dataclass(frozen=True)
class ClassRate:
    coartic: int
    occurrences: int

    @property
    def rate(self) -> float:
        return self.coartic / self.occurrences if self.occurrences else 0.0


@dataclass
class ScanTally:
    """Partial scan result; ``+`` combines tallies from disjoint utterance sets."""

    examined: int = 0
    records: list = field(default_factory=list)
    class_occurrences: Counter = field(default_factory=Counter)
    class_coartic: Counter = field(default_factory=Counter)
    unknown_gloss: int = 0

    def __add__(self, other: "ScanTally") -> "ScanTally":
        return ScanTally(self.examined + other.examined, self.records + other.records,
                         self.class_occurrences + other.class_occurrences,
                         self.class_coartic + other.class_coartic,
                         self.unknown_gloss + other.unknown_gloss)


@dataclass(frozen=True)
class PrevalenceReport:
    total_examined: int
    total_coarticulated: int
    per_class: dict
    direction: dict
    severity: dict
    records: tuple = field(repr=False, default=())
    skipped: dict = field(default_factory=dict)

    @property
    def overall_rate(self) -> float:
        return self.total_coarticulated / self.total_examined if self.total_examined else 0.0

    def to_json(self) -> dict:
        return {
            "total_examined": self.total_examined,
            "total_coarticulated": self.total_coarticulated,
            "overall_rate": self.overall_rate,
            "per_class": {c: {"coartic": r.coartic, "occurrences": r.occurrences, "rate": r.rate}
                          for c, r in self.per_class.items()},
            "direction": {s: c.to_json() for s, c in self.direction.items()},
            "severity": dict(self.severity),
            "skipped": dict(self.skipped),
        }

    def render(self) -> str:
        lines = ["Handshape class   coarticulated/occurrences   percent"]
        for c, r in self.per_class.items():
            lines.append(f"{c:<17} {r.coartic:>6}/{r.occurrences:<6}{'':14}{100 * r.rate:6.2f}%")
        lines.append("")
        pct = 100 * self.overall_rate
        bound = "less than 1.5%" if self.overall_rate < 0.015 else "at least 1.5%"
        lines.append(f"Overall: {self.total_coarticulated} of {self.total_examined} signs "
                     f"({pct:.2f}%, {bound})")
        lines.append("")
        lines.append("Split                     persev  antic  both  affected")
        for s, c in self.direction.items():
            lines.append(f"{s:<25} {c.persev:>6} {c.antic:>6} {c.both:>5} {c.affected:>9}")
        lines.append("")
        lines.append("Severity: " + ", ".join(f"{k} {v}" for k, v in self.severity.items()))
        if any(self.skipped.values()):
            lines.append("Skipped: " + ", ".join(f"{k} {v}" for k, v in self.skipped.items()))
        return "\n".join(lines) + "\n"


def scan_utterance(utt: Utterance, lexicon, inv: Inventory,
                   policy: ExclusionPolicy = ExclusionPolicy(),
                   thresholds: DetectorThresholds = DetectorThresholds()) -> ScanTally:
    """Tally one utterance.

    Class occurrences use the citation start handshape of the dominant hand and
    count only tokens whose dominant start handshape was annotated.
    """
    tally = ScanTally()
    for _, tok in iter_retained([utt], policy, "coarticulation"):
        try:
            entry, _ = resolve_gloss(lexicon, tok.gloss)
        except LexiconError:
            tally.unknown_gloss += 1
            continue
        tally.examined += 1
        cls = inv.class_of(entry.dom_start)
        counted = tok.obs_dom_start is not None
        if counted:
            tally.class_occurrences[cls] += 1
        rec = detect_in(utt, tok, lexicon, inv, thresholds)
        if rec is not None:
            tally.records.append(rec)
            if counted:
                tally.class_coartic[cls] += 1
    return tally


def build_report(tally: ScanTally) -> PrevalenceReport:
    per_class = {c: ClassRate(tally.class_coartic[c], tally.class_occurrences[c]) for c in CLASSES}
    severity = Counter(r.severity for r in tally.records)
    return PrevalenceReport(
        total_examined=tally.examined,
        total_coarticulated=len(tally.records),
        per_class=per_class,
        direction=direction_breakdown(tally.records),
        severity={s: severity[s] for s in SEVERITIES},
        records=tuple(tally.records),
        skipped={"unknown_gloss": tally.unknown_gloss},
    )


def scan(corpus: Iterable[Utterance], lexicon, inv: Inventory,
         policy: ExclusionPolicy = ExclusionPolicy(),
         thresholds: DetectorThresholds = DetectorThresholds()) -> PrevalenceReport:
    total = ScanTally()
    for utt in corpus:
        total = total + scan_utterance(utt, lexicon, inv, policy, thresholds)
    return build_report(total)
