"""Start/end handshape co-occurrence tables with additive smoothing.

Counts are kept exactly (integers); probabilities are derived on demand.
"""

from __future__ import annotations

import json
import warnings
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Iterable, TextIO

import numpy as np

from .corpus import SignToken
from .inventory import Inventory


class StatsError(ValueError):
    pass


class UndefinedRowWarning(RuntimeWarning):
    """Conditional probability requested for an empty row without smoothing."""


@dataclass(frozen=True)
class SmoothingConfig:
    alpha: float = 0.1

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be non-negative")


@dataclass
class TransitionTable:
    counts: dict
    inventory_size: int
    labels: tuple | None = None
    skipped: int = 0
    start_totals: dict = field(init=False)

    def __post_init__(self):
        self.counts = {k: int(v) for k, v in sorted(self.counts.items()) if v}
        if any(v < 0 for v in self.counts.values()):
            raise StatsError("negative count")
        if self.inventory_size <= 0:
            raise StatsError("inventory_size must be positive")
        if self.labels is not None:
            self.labels = tuple(self.labels)
            if len(self.labels) != self.inventory_size:
                raise StatsError("labels do not match inventory_size")
            known = set(self.labels)
            for s, e in self.counts:
                if s not in known or e not in known:
                    raise StatsError(f"pair ({s}, {e}) outside the inventory")
        totals = Counter()
        for (s, _), c in self.counts.items():
            totals[s] += c
        self.start_totals = dict(sorted(totals.items()))

    def __eq__(self, other):
        if not isinstance(other, TransitionTable):
            return NotImplemented
        return self.counts == other.counts and self.inventory_size == other.inventory_size

    @property
    def total(self) -> int:
        return sum(self.start_totals.values())

    def count(self, s: str, e: str) -> int:
        return self.counts.get((s, e), 0)

    def row(self, s: str) -> dict:
        return {e: c for (s2, e), c in self.counts.items() if s2 == s}

    def merge(self, other: "TransitionTable") -> "TransitionTable":
        if self.inventory_size != other.inventory_size:
            raise StatsError("cannot merge tables over different inventories")
        merged = Counter(self.counts)
        merged.update(other.counts)
        return TransitionTable(dict(merged), self.inventory_size, self.labels or other.labels,
                               self.skipped + other.skipped)


def _is_lexical(tok: SignToken) -> bool:
    return not tok.class_tags or "lexical" in tok.class_tags


def fit(tokens: Iterable[SignToken], inv: Inventory, hand: str = "dom",
        lexical_only: bool = False) -> TransitionTable:
    """Count observed (start, end) pairs on one hand, once per token.

    Tokens lacking either observed handshape are skipped and tallied in
    ``table.skipped``.
    """
    counts = Counter()
    skipped = 0
    for tok in tokens:
        if lexical_only and not _is_lexical(tok):
            continue
        s, e = tok.observed(hand, "start"), tok.observed(hand, "end")
        if s is None or e is None:
            skipped += 1
            continue
        inv.require(s)
        inv.require(e)
        counts[s, e] += 1
    return TransitionTable(dict(counts), len(inv), inv.labels, skipped)


def _prob(num, den, exact):
    if exact:
        return Fraction(num) / Fraction(den)
    return float(num) / float(den)


def cond_prob(table: TransitionTable, s: str, e: str, cfg: SmoothingConfig = SmoothingConfig(),
              exact: bool = False):
    """P(end=e | start=s) with additive smoothing.

    ``exact=True`` returns a Fraction (alpha is converted exactly).
    """
    alpha = Fraction(cfg.alpha) if exact else cfg.alpha
    total = table.start_totals.get(s, 0)
    den = total + alpha * table.inventory_size
    if den == 0:
        warnings.warn(f"undefined row for start {s!r}", UndefinedRowWarning, stacklevel=2)
        return Fraction(0) if exact else 0.0
    return _prob(table.count(s, e) + alpha, den, exact)


def cond_matrix(table: TransitionTable, cfg: SmoothingConfig = SmoothingConfig()) -> np.ndarray:
    labels = _labels(table)
    idx = {l: i for i, l in enumerate(labels)}
    c = np.zeros((len(labels), len(labels)))
    for (s, e), n in table.counts.items():
        c[idx[s], idx[e]] = n
    c += cfg.alpha
    rows = c.sum(axis=1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(rows > 0, c / np.where(rows > 0, rows, 1), 0.0)


def _labels(table: TransitionTable) -> tuple:
    if table.labels is None:
        raise StatsError("table has no inventory labels; load it with an inventory")
    return table.labels


@dataclass(frozen=True)
class JointPrior:
    """Dense joint distribution over (start, end) pairs in inventory order."""

    labels: tuple
    matrix: np.ndarray

    def index(self, label: str) -> int:
        return self.labels.index(label)

    def prob(self, s: str, e: str) -> float:
        return float(self.matrix[self.index(s), self.index(e)])

    def as_dict(self) -> dict:
        return {(s, e): float(self.matrix[i, j])
                for i, s in enumerate(self.labels) for j, e in enumerate(self.labels)}


def joint_prior(table: TransitionTable, cfg: SmoothingConfig = SmoothingConfig()) -> JointPrior:
    labels = _labels(table)
    n = table.total
    k = table.inventory_size
    den = n + cfg.alpha * k * k
    if den == 0:
        raise StatsError("undefined prior: empty table and alpha = 0")
    idx = {l: i for i, l in enumerate(labels)}
    m = np.full((k, k), float(cfg.alpha))
    for (s, e), c in table.counts.items():
        m[idx[s], idx[e]] += c
    m /= den
    m.setflags(write=False)
    return JointPrior(labels, m)


@dataclass(frozen=True)
class ChartRow:
    start: str
    total: int
    ends: tuple  # ((end, count, cond_prob_unsmoothed), ...)
    n_other_above_1pct: int

    @property
    def argmax_end(self) -> str:
        return self.ends[0][0]


@dataclass(frozen=True)
class FrequencyChart:
    rows: tuple
    inventory_size: int

    def to_json(self) -> dict:
        return {"inventory_size": self.inventory_size,
                "rows": [{"start": r.start, "total": r.total,
                          "other_ends_above_1pct": r.n_other_above_1pct,
                          "ends": [{"end": e, "count": c, "percent": round(100 * p, 2)}
                                   for e, c, p in r.ends]}
                         for r in self.rows]}

    def render(self, max_ends: int | None = None) -> str:
        lines = ["Dominant handshapes: start handshapes and co-occurring end handshapes", ""]
        for r in self.rows:
            ends = r.ends if max_ends is None else r.ends[:max_ends]
            cells = "  ".join(f"{e} {c}" for e, c, _ in ends)
            lines.append(f"{r.start} {r.total} | {cells}")
            lines.append(f"    other end handshapes above 1%: {r.n_other_above_1pct}")
        return "\n".join(lines) + "\n"


def _row_order(table: TransitionTable):
    return sorted(table.start_totals.items(), key=lambda kv: (-kv[1], kv[0]))


def report(table: TransitionTable, cfg: SmoothingConfig = SmoothingConfig()) -> FrequencyChart:
    """Frequency chart: rows by descending start frequency, ends by descending count.

    The derived column always uses unsmoothed conditional probabilities;
    ``cfg`` is accepted for interface symmetry.
    """
    rows = []
    for s, total in _row_order(table):
        ends = sorted(table.row(s).items(), key=lambda kv: (-kv[1], kv[0]))
        ends = tuple((e, c, c / total) for e, c in ends)
        above = sum(1 for e, c, _ in ends if e != s and Fraction(c, total) > Fraction(1, 100))
        rows.append(ChartRow(s, total, ends, above))
    return FrequencyChart(tuple(rows), table.inventory_size)


def stats_to_json(table: TransitionTable) -> dict:
    rows = []
    for s, total in _row_order(table):
        ends = sorted(table.row(s).items(), key=lambda kv: (-kv[1], kv[0]))
        rows.append({"start": s, "total": total,
                     "ends": [{"end": e, "count": c} for e, c in ends]})
    return {"inventory_size": table.inventory_size, "rows": rows}


def save_stats(table: TransitionTable, sink: TextIO) -> None:
    json.dump(stats_to_json(table), sink, indent=2, ensure_ascii=False)
    sink.write("\n")


def dumps_stats(table: TransitionTable) -> str:
    return json.dumps(stats_to_json(table), indent=2, ensure_ascii=False) + "\n"


def load_stats(source: TextIO, inv: Inventory | None = None) -> TransitionTable:
    """Read a stats file and check every row sums to its stated total."""
    try:
        obj = json.load(source)
        size = int(obj["inventory_size"])
        counts = {}
        for row in obj["rows"]:
            s, total = row["start"], int(row["total"])
            got = 0
            for cell in row["ends"]:
                e, c = cell["end"], int(cell["count"])
                if c < 0:
                    raise StatsError(f"negative count for ({s}, {e})")
                if (s, e) in counts:
                    raise StatsError(f"duplicate pair ({s}, {e})")
                counts[s, e] = c
                got += c
            if got != total:
                raise StatsError(f"row {s!r}: counts sum to {got}, total says {total}")
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, StatsError):
            raise
        raise StatsError(f"malformed stats file: {exc}") from None
    labels = None
    if inv is not None:
        for s, e in counts:
            for hs in (s, e):
                if hs not in inv:
                    raise StatsError(f"unknown handshape {hs!r}")
        if size != len(inv):
            raise StatsError(f"stats inventory_size {size} does not match inventory of {len(inv)}")
        labels = inv.labels
    return TransitionTable(counts, size, labels)


def load_shipped_stats(inv: Inventory | None = None) -> TransitionTable:
    """The shipped three-row dominant-hand chart (B-L, 1, 5)."""
    with resources.files("signphon.data").joinpath("chart_stats.json").open(encoding="utf-8") as fh:
        return load_stats(fh, inv)
