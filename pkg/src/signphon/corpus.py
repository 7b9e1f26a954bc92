"""Annotated continuous-signing corpora in a JSON Lines interchange format.

One utterance per line::

    {"id": "u1", "signer": "A", "fps": 30, "n_frames": 120, "translation": "...",
     "tokens": [{"gloss": "KNOW", "tier": "dominant", "start_frame": 3, "end_frame": 9,
                 "dom_hs": ["B-L", "B-L"], "class_tags": ["lexical"], "reduction_tags": []}]}

``dom_hs``/``ndh_hs`` are optional ``[start, end]`` pairs whose elements may be
null (annotation gaps). A token on the ``both`` tier is stored once and shows up
on both hand tiers. ``n_frames`` and ``translation`` are optional.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator, TextIO

from .inventory import Inventory

TIERS = ("dominant", "nondominant", "both")
CLASS_TAGS = frozenset({"lexical", "loan", "fingerspelled", "classifier", "gesture", "index",
                        "part_indef"})
REDUCTION_TAGS = frozenset({"weak_freeze", "weak_drop", "lowering", "distalization",
                            "joint_freeze", "iteration_loss"})


class CorpusError(ValueError):
    pass


@dataclass(frozen=True)
class SignToken:
    gloss: str
    tier: str
    start_frame: int
    end_frame: int
    dom_hs: tuple | None = None
    ndh_hs: tuple | None = None
    class_tags: frozenset = frozenset()
    reduction_tags: frozenset = frozenset()

    @property
    def obs_dom_start(self):
        return self.dom_hs[0] if self.dom_hs else None

    @property
    def obs_dom_end(self):
        return self.dom_hs[1] if self.dom_hs else None

    @property
    def obs_ndh_start(self):
        return self.ndh_hs[0] if self.ndh_hs else None

    @property
    def obs_ndh_end(self):
        return self.ndh_hs[1] if self.ndh_hs else None

    def on_tier(self, tier: str) -> bool:
        return self.tier == tier or self.tier == "both"

    def observed(self, hand: str, endpoint: str):
        pair = self.dom_hs if hand == "dom" else self.ndh_hs
        if not pair:
            return None
        return pair[0] if endpoint == "start" else pair[1]

    def to_json(self) -> dict:
        d = {
            "gloss": self.gloss,
            "tier": self.tier,
            "start_frame": self.start_frame,
            "end_frame": self.end_frame,
            "class_tags": sorted(self.class_tags),
            "reduction_tags": sorted(self.reduction_tags),
        }
        if self.dom_hs is not None:
            d["dom_hs"] = list(self.dom_hs)
        if self.ndh_hs is not None:
            d["ndh_hs"] = list(self.ndh_hs)
        return d


def _canonical_key(tok: SignToken):
    return (tok.tier, tok.start_frame, tok.end_frame, tok.gloss)


@dataclass(frozen=True)
class Utterance:
    id: str
    signer: str
    fps: int
    tokens: tuple
    translation: str | None = None
    n_frames: int | None = None
    dom_tokens: tuple = field(init=False, repr=False, compare=False)
    ndh_tokens: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        toks = tuple(sorted(self.tokens, key=_canonical_key))
        object.__setattr__(self, "tokens", toks)
        by_frame = lambda t: (t.start_frame, t.end_frame)  # noqa: E731
        object.__setattr__(self, "dom_tokens",
                           tuple(sorted((t for t in toks if t.on_tier("dominant")), key=by_frame)))
        object.__setattr__(self, "ndh_tokens",
                           tuple(sorted((t for t in toks if t.on_tier("nondominant")), key=by_frame)))

    def tier_tokens(self, tier: str) -> tuple:
        if tier == "dominant":
            return self.dom_tokens
        if tier == "nondominant":
            return self.ndh_tokens
        raise ValueError(f"tier must be dominant or nondominant, not {tier!r}")

    def to_json(self) -> dict:
        d = {"id": self.id, "signer": self.signer, "fps": self.fps,
             "tokens": [t.to_json() for t in self.tokens]}
        if self.translation is not None:
            d["translation"] = self.translation
        if self.n_frames is not None:
            d["n_frames"] = self.n_frames
        return d

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, ensure_ascii=False)


def _validate_utterance(utt: Utterance, inv: Inventory | None, where: str) -> None:
    if not isinstance(utt.fps, int) or utt.fps <= 0:
        raise CorpusError(f"{where}: fps must be a positive integer")
    for tok in utt.tokens:
        if tok.tier not in TIERS:
            raise CorpusError(f"{where}: {tok.gloss}: unknown tier {tok.tier!r}")
        if tok.start_frame < 0 or tok.end_frame < tok.start_frame:
            raise CorpusError(f"{where}: {tok.gloss}: end_frame precedes start_frame")
        if utt.n_frames is not None and tok.end_frame >= utt.n_frames:
            raise CorpusError(f"{where}: {tok.gloss}: frames exceed utterance length")
        if tok.tier == "dominant" and tok.ndh_hs is not None:
            raise CorpusError(f"{where}: {tok.gloss}: non-dominant handshapes on a dominant-tier token")
        if tok.tier == "nondominant" and tok.dom_hs is not None:
            raise CorpusError(f"{where}: {tok.gloss}: dominant handshapes on a non-dominant-tier token")
        bad = tok.class_tags - CLASS_TAGS
        if bad:
            raise CorpusError(f"{where}: {tok.gloss}: unknown class tags {sorted(bad)}")
        bad = tok.reduction_tags - REDUCTION_TAGS
        if bad:
            raise CorpusError(f"{where}: {tok.gloss}: unknown reduction tags {sorted(bad)}")
        if inv is not None:
            for pair in (tok.dom_hs, tok.ndh_hs):
                for hs in pair or ():
                    if hs is not None and hs not in inv:
                        raise CorpusError(f"{where}: {tok.gloss}: unknown handshape {hs!r}")
    for tier in ("dominant", "nondominant"):
        toks = utt.tier_tokens(tier)
        for a, b in zip(toks, toks[1:]):
            if b.start_frame <= a.end_frame:
                raise CorpusError(f"{where}: overlapping tokens {a.gloss} and {b.gloss} on {tier} tier")


def _hs_pair(raw, where):
    if raw is None:
        return None
    if not isinstance(raw, list) or len(raw) != 2:
        raise CorpusError(f"{where}: handshape field must be a [start, end] pair")
    return tuple(raw)


def token_from_json(obj: dict, where: str = "token") -> SignToken:
    try:
        return SignToken(
            gloss=str(obj["gloss"]),
            tier=obj["tier"],
            start_frame=int(obj["start_frame"]),
            end_frame=int(obj["end_frame"]),
            dom_hs=_hs_pair(obj.get("dom_hs"), where),
            ndh_hs=_hs_pair(obj.get("ndh_hs"), where),
            class_tags=frozenset(obj.get("class_tags", ())),
            reduction_tags=frozenset(obj.get("reduction_tags", ())),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, CorpusError):
            raise
        raise CorpusError(f"{where}: malformed token: {exc}") from None


def utterance_from_json(obj: dict, inv: Inventory | None = None, where: str = "utterance") -> Utterance:
    try:
        tokens = [token_from_json(t, f"{where} token {i}") for i, t in enumerate(obj["tokens"])]
        utt = Utterance(id=str(obj["id"]), signer=str(obj.get("signer", "")), fps=obj["fps"],
                        tokens=tuple(tokens), translation=obj.get("translation"),
                        n_frames=obj.get("n_frames"))
    except (KeyError, TypeError) as exc:
        raise CorpusError(f"{where}: malformed record: {exc}") from None
    _validate_utterance(utt, inv, where)
    return utt


def iter_corpus(source: TextIO | Iterable[str], inv: Inventory | None = None) -> Iterator[Utterance]:
    for lineno, line in enumerate(source, 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusError(f"line {lineno}: invalid JSON: {exc.msg}") from None
        if not isinstance(obj, dict):
            raise CorpusError(f"line {lineno}: expected a JSON object")
        yield utterance_from_json(obj, inv, f"line {lineno}")


def parse_corpus(source: TextIO | Iterable[str], inv: Inventory | None = None) -> list[Utterance]:
    return list(iter_corpus(source, inv))


def dump_corpus(corpus: Iterable[Utterance], sink: TextIO) -> None:
    for utt in corpus:
        sink.write(utt.dumps() + "\n")


def dumps_corpus(corpus: Iterable[Utterance]) -> str:
    return "".join(utt.dumps() + "\n" for utt in corpus)


def token_count(corpus: Iterable[Utterance]) -> int:
    """Tokens on the ``both`` tier count once."""
    return sum(len(u.tokens) for u in corpus)


@dataclass(frozen=True)
class ExclusionPolicy:
    exclude_classes: frozenset = frozenset({"classifier", "gesture", "fingerspelled"})
    coartic_extra_excludes: frozenset = frozenset({"index", "part_indef"})

    def __post_init__(self):
        for name in ("exclude_classes", "coartic_extra_excludes"):
            bad = set(getattr(self, name)) - CLASS_TAGS
            if bad:
                raise ValueError(f"{name} has unknown tags {sorted(bad)}")

    def excluded(self, purpose: str) -> frozenset:
        if purpose == "statistics":
            return frozenset(self.exclude_classes)
        if purpose == "coarticulation":
            return frozenset(self.exclude_classes) | frozenset(self.coartic_extra_excludes)
        raise ValueError(f"unknown purpose {purpose!r}")


def iter_retained(corpus: Iterable[Utterance], policy: ExclusionPolicy = ExclusionPolicy(),
                  purpose: str = "statistics") -> Iterator[tuple[Utterance, SignToken]]:
    """Yield ``(utterance, token)`` for every token the policy keeps."""
    drop = policy.excluded(purpose)
    for utt in corpus:
        for tok in utt.tokens:
            if not (tok.class_tags & drop):
                yield utt, tok


def filter_tokens(corpus: Iterable[Utterance], policy: ExclusionPolicy = ExclusionPolicy(),
                  purpose: str = "statistics") -> list[SignToken]:
    return [tok for _, tok in iter_retained(corpus, policy, purpose)]


def neighbors(utt: Utterance, token: SignToken, tier: str | None = None):
    """Adjacent tokens of ``token`` on one hand tier, ignoring any filtering.

    The tier defaults to the token's own tier, and to the dominant tier for
    tokens on the ``both`` tier.
    """
    if tier is None:
        tier = "nondominant" if token.tier == "nondominant" else "dominant"
    toks = utt.tier_tokens(tier)
    for i, t in enumerate(toks):
        if t is token:
            break
    else:
        try:
            i = toks.index(token)
        except ValueError:
            raise CorpusError(f"token {token.gloss!r} is not on the {tier} tier of {utt.id}") from None
    prev = toks[i - 1] if i > 0 else None
    nxt = toks[i + 1] if i + 1 < len(toks) else None
    return prev, nxt
