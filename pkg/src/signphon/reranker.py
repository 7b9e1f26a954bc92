"""Re-rank noisy (start, end) handshape hypotheses with a transition prior.

Scores are ``start(s) * end(e) * P(s, e) ** lam``: ``lam=0`` is likelihood
only, ``lam=1`` the full Bayesian product. Ties are broken by label order so
rankings are reproducible. Synthetic data uses numpy's PCG64 generator
(``numpy.random.default_rng(seed)``).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence, TextIO

import numpy as np

from .inventory import DEFAULT_WEIGHTS, Inventory
from .transitions import JointPrior


class DegenerateMaskError(ValueError):
    """No non-dominant mass left after restricting to unmarked handshapes."""


def _check_scores(scores: Mapping[str, float], what: str) -> dict:
    out = {}
    for k, v in scores.items():
        v = float(v)
        if not v >= 0 or math.isinf(v):
            raise ValueError(f"{what}: score for {k!r} must be finite and non-negative")
        out[k] = v
    if not any(v > 0 for v in out.values()):
        raise ValueError(f"{what}: needs at least one positive score")
    return out


@dataclass(frozen=True)
class ObservationPair:
    start_scores: dict
    end_scores: dict

    def __post_init__(self):
        object.__setattr__(self, "start_scores", _check_scores(self.start_scores, "start_scores"))
        object.__setattr__(self, "end_scores", _check_scores(self.end_scores, "end_scores"))

    def vectors(self, labels: Sequence[str]) -> tuple:
        index = {l: i for i, l in enumerate(labels)}
        out = []
        for scores in (self.start_scores, self.end_scores):
            v = np.zeros(len(labels))
            for k, x in scores.items():
                if k not in index:
                    raise KeyError(f"unknown handshape {k!r}")
                v[index[k]] = x
            out.append(v)
        return tuple(out)


@dataclass(frozen=True)
class RerankResult:
    ranked: tuple  # (((start, end), score), ...)

    @property
    def best(self):
        return self.ranked[0][0] if self.ranked else None

    def rank_of(self, pair) -> int | None:
        for i, (p, _) in enumerate(self.ranked, 1):
            if p == tuple(pair):
                return i
        return None


def _check_lambda(lam: float) -> float:
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lambda must lie in [0, 1]")
    return float(lam)


def _lex_order(labels: Sequence[str]) -> np.ndarray:
    """Rank of each label in lexicographic order."""
    order = sorted(range(len(labels)), key=lambda i: labels[i])
    rank = np.empty(len(labels), dtype=np.int64)
    rank[order] = np.arange(len(labels))
    return rank


def _rescaled(v: np.ndarray) -> np.ndarray:
    """Scale by a power of two so the maximum lies in [0.5, 1); order and ties are kept exactly."""
    _, e = math.frexp(float(v.max()))
    return np.ldexp(v, -e)


def score_matrix(start: np.ndarray, end: np.ndarray, prior: np.ndarray, lam: float) -> np.ndarray:
    weight = np.ones_like(prior) if lam == 0 else prior ** lam
    return np.outer(start, end) * weight


def rerank(obs: ObservationPair, prior: JointPrior, lam: float = 1.0) -> RerankResult:
    lam = _check_lambda(lam)
    labels = prior.labels
    start, end = obs.vectors(labels)
    # order on rescaled vectors so tiny likelihoods do not underflow out of the ranking
    keys = score_matrix(_rescaled(start), _rescaled(end), prior.matrix, lam)
    scores = score_matrix(start, end, prior.matrix, lam)
    rank = _lex_order(labels)
    nz = np.argwhere(keys > 0)
    items = sorted(((-keys[i, j], rank[i], rank[j], i, j) for i, j in nz))
    return RerankResult(tuple(((labels[i], labels[j]), float(scores[i, j]))
                              for _, _, _, i, j in items))


def _normalized(scores: dict) -> dict:
    total = sum(scores.values())
    return {k: v / total for k, v in scores.items() if v > 0}


def _geometric_pool(a: dict, b: dict) -> dict:
    keys = sorted(set(a) | set(b))
    # product of roots, so two tiny scores do not underflow to zero
    pooled = {k: math.sqrt(a.get(k, 0.0)) * math.sqrt(b.get(k, 0.0)) for k in keys}
    if not any(v > 0 for v in pooled.values()):
        raise DegenerateMaskError("the two hands share no supported handshape")
    return _normalized(pooled)


def pool_two_hands(obs_dom: ObservationPair, obs_ndh: ObservationPair, sign_type: str,
                   inv: Inventory) -> ObservationPair:
    """Combine evidence from the two hands under a known sign type.

    Type1/Type2 (same handshape on both hands): the shared estimate, a
    renormalized per-handshape geometric mean. Type3: the non-dominant
    estimate restricted to unmarked handshapes and renormalized; the
    dominant estimate is unchanged and not returned.
    """
    if sign_type in ("Type1", "Type2"):
        return ObservationPair(_geometric_pool(obs_dom.start_scores, obs_ndh.start_scores),
                               _geometric_pool(obs_dom.end_scores, obs_ndh.end_scores))
    if sign_type == "Type3":
        masked = []
        for scores in (obs_ndh.start_scores, obs_ndh.end_scores):
            m = {k: v for k, v in scores.items() if v > 0 and inv.is_unmarked(k)}
            if not m:
                raise DegenerateMaskError("non-dominant scores vanish on the unmarked set")
            masked.append(_normalized(m))
        return ObservationPair(*masked)
    raise ValueError(f"pooling needs a two-handed sign type, got {sign_type!r}")


def argmax_label(scores: Mapping[str, float]) -> str:
    """Highest score, ties to the lexicographically smallest label."""
    return min(scores, key=lambda k: (-scores[k], k))


@dataclass(frozen=True)
class NoiseModel:
    """Stand-in for a vision front end.

    Each endpoint is confused with probability ``kappa``: the reported
    center is then drawn from the neighbor kernel of the true handshape
    (weights ``exp(-distance / sigma)`` over the other handshapes). Scores are
    ``(1 - kappa) * onehot(center) + kappa * kernel(center)``.
    """

    kappa: float = 0.5
    sigma: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.kappa <= 1.0:
            raise ValueError("kappa must lie in [0, 1]")
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")


def neighbor_kernel(inv: Inventory, labels: Sequence[str], sigma: float) -> np.ndarray:
    """Row i: confusion weights from labels[i] to every other label (zero diagonal)."""
    d = np.array([[inv.distance(a, b, DEFAULT_WEIGHTS) for b in labels] for a in labels])
    k = np.exp(-d / sigma)
    np.fill_diagonal(k, 0.0)
    return k / k.sum(axis=1, keepdims=True)


@dataclass(frozen=True)
class Sample:
    true: tuple
    obs: ObservationPair

    def to_json(self) -> dict:
        return {"true": list(self.true),
                "start_scores": {k: v for k, v in sorted(self.obs.start_scores.items())},
                "end_scores": {k: v for k, v in sorted(self.obs.end_scores.items())}}


def synth_generate(prior: JointPrior, noise: NoiseModel, n: int, inv: Inventory) -> list[Sample]:
    if n < 1:
        raise ValueError("n must be at least 1")
    labels = prior.labels
    k = len(labels)
    rng = np.random.default_rng(noise.seed)
    kernel = neighbor_kernel(inv, labels, noise.sigma)
    flat = prior.matrix.ravel() / prior.matrix.sum()
    pairs = rng.choice(k * k, size=n, p=flat)
    confuse = rng.random((n, 2)) < noise.kappa
    out = []
    for t in range(n):
        truth = divmod(int(pairs[t]), k)
        halves = []
        for h in range(2):
            center = truth[h]
            if confuse[t, h]:
                center = int(rng.choice(k, p=kernel[center]))
            v = noise.kappa * kernel[center]
            v[center] += 1.0 - noise.kappa
            halves.append({labels[i]: float(v[i]) for i in np.flatnonzero(v > 0)})
        out.append(Sample((labels[truth[0]], labels[truth[1]]), ObservationPair(*halves)))
    return out


def evaluate(dataset: Sequence[Sample], prior: JointPrior, lam: float = 1.0) -> dict:
    """Rank-1 accuracy and mean reciprocal rank of the true pair."""
    lam = _check_lambda(lam)
    if len(dataset) == 0:
        raise ValueError("empty dataset")
    labels = prior.labels
    index = {l: i for i, l in enumerate(labels)}
    rank = _lex_order(labels)
    k = len(labels)
    # tie-break key: lexicographic position of (start, end)
    tie = (rank[:, None] * k + rank[None, :]).ravel()
    weight = np.ones_like(prior.matrix) if lam == 0 else prior.matrix ** lam
    hits = 0
    rr = 0.0
    for sample in dataset:
        start, end = sample.obs.vectors(labels)
        scores = (np.outer(_rescaled(start), _rescaled(end)) * weight).ravel()
        ti = index[sample.true[0]] * k + index[sample.true[1]]
        ts = scores[ti]
        if ts <= 0:
            continue
        better = np.count_nonzero(scores > ts) + np.count_nonzero((scores == ts) & (tie < tie[ti]))
        if better == 0:
            hits += 1
        rr += 1.0 / (better + 1)
    return {"rank1_accuracy": hits / len(dataset), "mean_reciprocal_rank": rr / len(dataset)}


def save_dataset(dataset: Iterable[Sample], sink: TextIO) -> None:
    for s in dataset:
        sink.write(json.dumps(s.to_json(), sort_keys=True) + "\n")


def load_dataset(source: TextIO | Iterable[str]) -> list[Sample]:
    out = []
    for lineno, line in enumerate(source, 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            out.append(Sample(tuple(obj["true"]),
                              ObservationPair(obj["start_scores"], obj["end_scores"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"line {lineno}: bad sample: {exc}") from None
    return out
