"""Citation-form sign bank, two-hand well-formedness checks and sign types.

The two well-formedness checks are the Symmetry Condition (both hands move:
same handshapes, simultaneous or alternating movement, identical or mirrored
orientation) and the Dominance Condition (a passive location hand carries the
active hand's handshape or one of the unmarked handshapes). Sign types follow
the usual one/two-handed breakdown: Type0 and TypeX are one-handed without and
with body contact, Type1 has both hands moving, Type2 and Type3 have a passive
location hand with the same or a different handshape.
"""

from __future__ import annotations

import csv
import io
import re
import warnings
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Mapping, TextIO

from .inventory import Inventory, UnknownHandshape

HANDEDNESS = ("one", "two")
MOVEMENT_RELATIONS = ("simultaneous", "alternating", "none")
ORIENTATION_RELATIONS = ("identical", "mirror", "other")
SIGN_CLASSES = ("lexical", "loan", "fingerspelled", "classifier", "gesture", "index", "part_indef")
SIGN_TYPES = ("Type0", "TypeX", "Type1", "Type2", "Type3")

COLUMNS = ("gloss", "handedness", "dom_start", "dom_end", "ndh_start", "ndh_end",
           "both_hands_move", "movement_relation", "contacts_body", "ndh_is_location",
           "orientation_relation", "sign_class")

OK = "ok"
VIOLATED = "violated"
NOT_APPLICABLE = "not_applicable"

_PREFIX = re.compile(r"^\((1h|2h)\)")


class LexiconError(ValueError):
    pass


class MarkedHandednessWarning(UserWarning):
    """A (1h)/(2h) prefix that restates the entry's normal handedness."""


@dataclass(frozen=True)
class LexiconEntry:
    gloss: str
    handedness: str
    dom_start: str
    dom_end: str
    ndh_start: str | None = None
    ndh_end: str | None = None
    both_hands_move: bool = False
    movement_relation: str = "none"
    contacts_body: bool = False
    ndh_is_location: bool = False
    orientation_relation: str = "other"
    sign_class: str = "lexical"

    @property
    def two_handed(self) -> bool:
        return self.handedness == "two"


@dataclass(frozen=True)
class Check:
    status: str
    reason: str | None = None

    @property
    def ok(self) -> bool:
        return self.status == OK

    @property
    def violated(self) -> bool:
        return self.status == VIOLATED

    def __str__(self) -> str:
        return self.status if self.reason is None else f"{self.status}({self.reason})"


@dataclass(frozen=True)
class ValidationReport:
    symmetry: Check
    dominance: Check
    structural: tuple = field(default_factory=tuple)

    @property
    def well_formed(self) -> bool:
        return not (self.symmetry.violated or self.dominance.violated or self.structural)

    def violations(self) -> list[str]:
        out = list(self.structural)
        if self.symmetry.violated:
            out.append(f"symmetry: {self.symmetry.reason}")
        if self.dominance.violated:
            out.append(f"dominance: {self.dominance.reason}")
        return out


class IllFormedSign(ValueError):
    def __init__(self, gloss: str, report: ValidationReport):
        self.report = report
        super().__init__(f"{gloss}: " + "; ".join(report.violations()))


def structural_problems(entry: LexiconEntry, inv: Inventory | None = None) -> list[str]:
    problems = []
    if entry.handedness not in HANDEDNESS:
        problems.append(f"unknown handedness {entry.handedness!r}")
    if entry.movement_relation not in MOVEMENT_RELATIONS:
        problems.append(f"unknown movement relation {entry.movement_relation!r}")
    if entry.orientation_relation not in ORIENTATION_RELATIONS:
        problems.append(f"unknown orientation relation {entry.orientation_relation!r}")
    if entry.sign_class not in SIGN_CLASSES:
        problems.append(f"unknown sign class {entry.sign_class!r}")
    has_ndh = (entry.ndh_start is not None, entry.ndh_end is not None)
    if entry.handedness == "two" and not all(has_ndh):
        problems.append("two-handed entry without non-dominant handshapes")
    if entry.handedness == "one" and any(has_ndh):
        problems.append("one-handed entry with non-dominant handshapes")
    if entry.both_hands_move and entry.handedness != "two":
        problems.append("both hands move in a one-handed entry")
    if entry.ndh_is_location and (entry.handedness != "two" or entry.both_hands_move):
        problems.append("location hand requires a two-handed entry with a passive hand")
    if entry.handedness == "two" and not (entry.both_hands_move or entry.ndh_is_location):
        problems.append("two-handed entry with neither both hands moving nor a location hand")
    if inv is not None:
        for hs in (entry.dom_start, entry.dom_end, entry.ndh_start, entry.ndh_end):
            if hs is not None and hs not in inv:
                problems.append(f"unknown handshape {hs!r}")
    return problems


def check_symmetry(entry: LexiconEntry, inv: Inventory) -> Check:
    if not entry.both_hands_move:
        return Check(NOT_APPLICABLE)
    if entry.dom_start != entry.ndh_start or entry.dom_end != entry.ndh_end:
        return Check(VIOLATED, "handshape mismatch")
    if entry.movement_relation not in ("simultaneous", "alternating"):
        return Check(VIOLATED, "movement neither simultaneous nor alternating")
    if entry.orientation_relation not in ("identical", "mirror"):
        return Check(VIOLATED, "orientation neither identical nor mirrored")
    return Check(OK)


def check_dominance(entry: LexiconEntry, inv: Inventory) -> Check:
    if not entry.ndh_is_location:
        return Check(NOT_APPLICABLE)
    if entry.ndh_start is None or entry.ndh_end is None:
        return Check(VIOLATED, "missing location hand")
    if entry.ndh_start != entry.ndh_end:
        return Check(VIOLATED, "non-static location hand")
    for dom, ndh in ((entry.dom_start, entry.ndh_start), (entry.dom_end, entry.ndh_end)):
        if not (inv.same_base(ndh, dom) or inv.is_unmarked(ndh)):
            return Check(VIOLATED, "marked non-dominant handshape")
    return Check(OK)


def validate_entry(entry: LexiconEntry, inv: Inventory) -> ValidationReport:
    structural = structural_problems(entry, inv)
    if any(p.startswith("unknown handshape") for p in structural):
        na = Check(NOT_APPLICABLE)
        return ValidationReport(na, na, tuple(structural))
    return ValidationReport(check_symmetry(entry, inv), check_dominance(entry, inv),
                            tuple(structural))


def classify_sign_type(entry: LexiconEntry, inv: Inventory) -> str:
    report = validate_entry(entry, inv)
    if not report.well_formed:
        raise IllFormedSign(entry.gloss, report)
    if entry.handedness == "one":
        return "TypeX" if entry.contacts_body else "Type0"
    if entry.both_hands_move:
        return "Type1"
    return "Type2" if inv.same_base(entry.ndh_start, entry.dom_start) else "Type3"


class Lexicon(Mapping):
    """Read-only gloss -> LexiconEntry mapping that keeps file order."""

    def __init__(self, entries: Iterable[LexiconEntry]):
        self._entries: dict[str, LexiconEntry] = {}
        for e in entries:
            if e.gloss in self._entries:
                raise LexiconError(f"duplicate gloss {e.gloss!r}")
            self._entries[e.gloss] = e

    def __getitem__(self, gloss):
        return self._entries[gloss]

    def __iter__(self):
        return iter(self._entries)

    def __len__(self):
        return len(self._entries)

    def __repr__(self):
        return f"Lexicon({len(self)} entries)"

    def resolve(self, gloss_with_prefix: str):
        return resolve_gloss(self, gloss_with_prefix)

    def dump(self, sink: TextIO) -> None:
        writer = csv.writer(sink, delimiter="\t", lineterminator="\n")
        writer.writerow(COLUMNS)
        for e in self._entries.values():
            writer.writerow([
                e.gloss, e.handedness, e.dom_start, e.dom_end, e.ndh_start or "", e.ndh_end or "",
                _fmt_bool(e.both_hands_move), e.movement_relation, _fmt_bool(e.contacts_body),
                _fmt_bool(e.ndh_is_location), e.orientation_relation, e.sign_class,
            ])

    def dumps(self) -> str:
        buf = io.StringIO()
        self.dump(buf)
        return buf.getvalue()


def _fmt_bool(value: bool) -> str:
    return "true" if value else "false"


def _parse_bool(raw: str, where: str) -> bool:
    value = raw.strip().lower()
    if value in ("true", "yes", "1"):
        return True
    if value in ("false", "no", "0", ""):
        return False
    raise LexiconError(f"{where}: not a boolean: {raw!r}")


def parse_lexicon(source: TextIO | Iterable[str], inv: Inventory) -> Lexicon:
    reader = csv.reader(source, delimiter="\t")
    header = next(reader, None)
    if header is None:
        return Lexicon([])
    header = [h.strip() for h in header]
    missing = [c for c in COLUMNS if c not in header]
    if missing:
        raise LexiconError(f"lexicon header lacks columns {missing}")
    entries = []
    seen = set()
    for lineno, row in enumerate(reader, 2):
        if not row or not any(cell.strip() for cell in row) or row[0].startswith("#"):
            continue
        if len(row) != len(header):
            raise LexiconError(f"line {lineno}: expected {len(header)} columns, got {len(row)}")
        cell = {h: v.strip() for h, v in zip(header, row)}
        where = f"line {lineno}"
        for col in ("dom_start", "dom_end", "ndh_start", "ndh_end"):
            if cell[col] and cell[col] not in inv:
                raise LexiconError(f"{where}: {UnknownHandshape(cell[col])}")
        if not cell["dom_start"] or not cell["dom_end"]:
            raise LexiconError(f"{where}: missing dominant handshape")
        entry = LexiconEntry(
            gloss=cell["gloss"],
            handedness=cell["handedness"],
            dom_start=cell["dom_start"],
            dom_end=cell["dom_end"],
            ndh_start=cell["ndh_start"] or None,
            ndh_end=cell["ndh_end"] or None,
            both_hands_move=_parse_bool(cell["both_hands_move"], where),
            movement_relation=cell["movement_relation"] or "none",
            contacts_body=_parse_bool(cell["contacts_body"], where),
            ndh_is_location=_parse_bool(cell["ndh_is_location"], where),
            orientation_relation=cell["orientation_relation"] or "other",
            sign_class=cell["sign_class"] or "lexical",
        )
        if entry.gloss in seen:
            raise LexiconError(f"{where}: duplicate gloss {entry.gloss!r}")
        seen.add(entry.gloss)
        problems = structural_problems(entry, inv)
        if problems:
            raise LexiconError(f"{where}: {entry.gloss}: " + "; ".join(problems))
        entries.append(entry)
    return Lexicon(entries)


def load_default_lexicon(inv: Inventory) -> Lexicon:
    with resources.files("signphon.data").joinpath("lexicon.tsv").open(encoding="utf-8", newline="") as fh:
        return parse_lexicon(fh, inv)


def split_prefix(gloss: str) -> tuple[str, str | None]:
    """``"(1h)ANGRY"`` -> ``("ANGRY", "one")``."""
    m = _PREFIX.match(gloss)
    if not m:
        return gloss, None
    return gloss[m.end():], ("one" if m.group(1) == "1h" else "two")


def resolve_gloss(lex: Mapping[str, LexiconEntry], gloss_with_prefix: str):
    """Look up a possibly prefixed gloss; returns ``(entry, handedness_override)``."""
    base, override = split_prefix(gloss_with_prefix)
    try:
        entry = lex[base]
    except KeyError:
        raise LexiconError(f"unknown gloss {base!r}") from None
    if override is not None and override == entry.handedness:
        warnings.warn(f"{gloss_with_prefix}: prefix repeats the normal handedness of {base}",
                      MarkedHandednessWarning, stacklevel=2)
    return entry, override
