"""Closed handshape inventory: feature records, classes, variant folding and distance.

An inventory file is UTF-8 and line oriented. Each non-comment line has seven
tab-separated columns::

    label  base  fingers=TIMRP  flexion=<v>  thumb=<v>  spread=<v>  class=<v>

Lines starting with ``#`` are comments. Order is significant and preserved.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from importlib import resources
from typing import Iterable, Iterator, TextIO

import numpy as np

FINGERS = "TIMRP"
FLEXIONS = ("extended", "bent", "curved", "hooked", "closed")
THUMBS = ("opposed", "unopposed", "extended", "crossed")
SPREADS = ("spread", "together")
CLASSES = ("Class1", "Class2", "Class3", "Class4", "ClassY", "ClassPK", "Other")

DEFAULT_UNMARKED = frozenset({"5", "1", "B", "A", "C", "O"})
MAX_HANDSHAPES = 87


class InventoryError(ValueError):
    """Malformed inventory file or inconsistent inventory contents."""


class UnknownHandshape(KeyError):
    """A handshape label that is not in the inventory."""

    def __str__(self) -> str:
        return f"unknown handshape {self.args[0]!r}"


@dataclass(frozen=True)
class Features:
    fingers: frozenset
    flexion: str
    thumb: str
    spread: str

    def fingers_code(self) -> str:
        code = "".join(f for f in FINGERS if f in self.fingers)
        return code or "-"


@dataclass(frozen=True)
class Entry:
    label: str
    base: str
    features: Features
    hs_class: str


@dataclass(frozen=True)
class DistanceWeights:
    """Per-feature weights of the handshape distance."""

    fingers: float = 1.0
    flexion: float = 0.5
    thumb: float = 0.25
    spread: float = 0.25

    def __post_init__(self):
        for name in ("fingers", "flexion", "thumb", "spread"):
            if getattr(self, name) < 0:
                raise ValueError(f"weight {name} must be non-negative")


DEFAULT_WEIGHTS = DistanceWeights()


class Inventory:
    """Immutable, ordered collection of handshape entries."""

    def __init__(self, entries: Iterable[Entry], unmarked_bases=DEFAULT_UNMARKED):
        self._entries: dict[str, Entry] = {}
        for e in entries:
            if e.label in self._entries:
                raise InventoryError(f"duplicate label {e.label!r}")
            self._entries[e.label] = e
        self.unmarked_bases = frozenset(unmarked_bases)
        self._index = {label: i for i, label in enumerate(self._entries)}
        self._check()

    def _check(self) -> None:
        for e in self._entries.values():
            base = self._entries.get(e.base)
            if base is None:
                raise InventoryError(f"{e.label!r}: variant of unknown base {e.base!r}")
            if base.base != base.label:
                raise InventoryError(
                    f"{e.label!r}: base {e.base!r} is itself a variant (chains have depth 1)")
            if e.hs_class != base.hs_class:
                raise InventoryError(
                    f"{e.label!r}: class {e.hs_class} differs from base class {base.hs_class}")

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[str]:
        return iter(self._entries)

    def __contains__(self, label) -> bool:
        return label in self._entries

    def __eq__(self, other) -> bool:
        if not isinstance(other, Inventory):
            return NotImplemented
        return (list(self._entries.values()) == list(other._entries.values())
                and self.unmarked_bases == other.unmarked_bases)

    def __repr__(self) -> str:
        return f"Inventory({len(self)} handshapes)"

    @property
    def labels(self) -> tuple:
        return tuple(self._entries)

    def entry(self, label: str) -> Entry:
        try:
            return self._entries[label]
        except KeyError:
            raise UnknownHandshape(label) from None

    def index(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise UnknownHandshape(label) from None

    def require(self, label: str) -> str:
        if label not in self._entries:
            raise UnknownHandshape(label)
        return label

    def base(self, label: str) -> str:
        return self.entry(label).base

    def features(self, label: str) -> Features:
        return self.entry(label).features

    def same_base(self, a: str, b: str) -> bool:
        return self.base(a) == self.base(b)

    def class_of(self, label: str) -> str:
        return self.entry(label).hs_class

    def is_unmarked(self, label: str) -> bool:
        return self.base(label) in self.unmarked_bases

    def distance(self, a: str, b: str, weights: DistanceWeights = DEFAULT_WEIGHTS) -> float:
        fa, fb = self.features(a), self.features(b)
        return (weights.fingers * len(fa.fingers ^ fb.fingers)
                + weights.flexion * (fa.flexion != fb.flexion)
                + weights.thumb * (fa.thumb != fb.thumb)
                + weights.spread * (fa.spread != fb.spread))

    def distance_matrix(self, weights: DistanceWeights = DEFAULT_WEIGHTS) -> np.ndarray:
        labels = self.labels
        d = np.zeros((len(labels), len(labels)))
        for i, a in enumerate(labels):
            for j in range(i + 1, len(labels)):
                d[i, j] = d[j, i] = self.distance(a, labels[j], weights)
        return d

    def dump(self, sink: TextIO) -> None:
        for e in self._entries.values():
            f = e.features
            sink.write("\t".join([
                e.label, e.base, f"fingers={f.fingers_code()}", f"flexion={f.flexion}",
                f"thumb={f.thumb}", f"spread={f.spread}", f"class={e.hs_class}",
            ]) + "\n")

    def dumps(self) -> str:
        buf = io.StringIO()
        self.dump(buf)
        return buf.getvalue()


def _field(raw: str, key: str, allowed, lineno: int) -> str:
    name, sep, value = raw.partition("=")
    if not sep or name.strip() != key:
        raise InventoryError(f"line {lineno}: expected {key}=..., got {raw!r}")
    value = value.strip()
    if allowed is not None and value not in allowed:
        raise InventoryError(f"line {lineno}: unknown {key} value {value!r}")
    return value


def _parse_fingers(code: str, lineno: int) -> frozenset:
    if code == "-":
        return frozenset()
    if any(c not in FINGERS for c in code) or len(set(code)) != len(code):
        raise InventoryError(f"line {lineno}: bad finger set {code!r}")
    return frozenset(code)


def load_inventory(source: TextIO | Iterable[str], max_size: int | None = MAX_HANDSHAPES,
                   unmarked_bases=DEFAULT_UNMARKED) -> Inventory:
    """Parse an inventory file.

    ``max_size=None`` lifts the cardinality cap.
    """
    entries = []
    seen = set()
    for lineno, line in enumerate(source, 1):
        line = line.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) != 7:
            raise InventoryError(f"line {lineno}: expected 7 tab-separated columns, got {len(cols)}")
        label, base = cols[0].strip(), cols[1].strip()
        if not label or not base:
            raise InventoryError(f"line {lineno}: empty label or base")
        if label in seen:
            raise InventoryError(f"line {lineno}: duplicate label {label!r}")
        seen.add(label)
        features = Features(
            fingers=_parse_fingers(_field(cols[2], "fingers", None, lineno), lineno),
            flexion=_field(cols[3], "flexion", FLEXIONS, lineno),
            thumb=_field(cols[4], "thumb", THUMBS, lineno),
            spread=_field(cols[5], "spread", SPREADS, lineno),
        )
        hs_class = _field(cols[6], "class", CLASSES, lineno)
        entries.append(Entry(label, base, features, hs_class))
    if max_size is not None and len(entries) > max_size:
        raise InventoryError(f"inventory has {len(entries)} handshapes, cap is {max_size}")
    return Inventory(entries, unmarked_bases)


def load_default_inventory() -> Inventory:
    with resources.files("signphon.data").joinpath("inventory.tsv").open(encoding="utf-8") as fh:
        return load_inventory(fh)


# Function forms of the inventory queries.

def class_of(inv: Inventory, hs: str) -> str:
    return inv.class_of(hs)


def is_unmarked(inv: Inventory, hs: str) -> bool:
    return inv.is_unmarked(hs)


def distance(inv: Inventory, a: str, b: str, weights: DistanceWeights = DEFAULT_WEIGHTS) -> float:
    return inv.distance(a, b, weights)
