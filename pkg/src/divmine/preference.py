"""Feature extraction, pairwise logistic weight learning, discriminating
sub-pattern mining via interclass variance, and multiplicative weight
aggregation.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .data import Pattern, TransactionDatabase, cover_of

N_DISC_SLOTS = 3  # presence flag, relative frequency, relative size


@dataclass(frozen=True)
class FeatureLayout:
    """Slot layout of the dense feature/weight vectors.

    Order is fixed: item indicators, transaction indicators, length,
    frequency, then the three temporary discriminating-pattern slots.
    """

    n_items: int
    n_transactions: int
    items: bool = True
    transactions: bool = True
    length: bool = True
    frequency: bool = True
    disc: bool = False

    @property
    def width(self) -> int:
        w = 0
        if self.items:
            w += self.n_items
        if self.transactions:
            w += self.n_transactions
        if self.length:
            w += 1
        if self.frequency:
            w += 1
        if self.disc:
            w += N_DISC_SLOTS
        return w

    @property
    def items_offset(self) -> int | None:
        return 0 if self.items else None

    @property
    def transactions_offset(self) -> int | None:
        if not self.transactions:
            return None
        return self.n_items if self.items else 0

    def _scalar_base(self) -> int:
        w = 0
        if self.items:
            w += self.n_items
        if self.transactions:
            w += self.n_transactions
        return w

    @property
    def length_offset(self) -> int | None:
        return self._scalar_base() if self.length else None

    @property
    def frequency_offset(self) -> int | None:
        if not self.frequency:
            return None
        return self._scalar_base() + (1 if self.length else 0)

    @property
    def disc_offset(self) -> int | None:
        if not self.disc:
            return None
        return self.width - N_DISC_SLOTS

    def with_disc(self) -> "FeatureLayout":
        return replace(self, disc=True)

    def without_disc(self) -> "FeatureLayout":
        return replace(self, disc=False)


def layout_from_letters(letters: str, db: TransactionDatabase) -> FeatureLayout:
    """Build a layout from a feature-set string such as "ITLF" or "I"."""
    valid = set("ITLF")
    got = set(letters.upper())
    if not got or not got <= valid:
        raise ValueError(f"feature letters must be drawn from ITLF, got {letters!r}")
    return FeatureLayout(
        n_items=db.n_items,
        n_transactions=db.n_transactions,
        items="I" in got,
        transactions="T" in got,
        length="L" in got,
        frequency="F" in got,
    )


@dataclass(frozen=True)
class RankedQuery:
    """Query patterns with a rank permutation (rank 1 = best)."""

    patterns: tuple[Pattern, ...]
    ranks: tuple[int, ...]

    def __post_init__(self):
        if sorted(self.ranks) != list(range(1, len(self.patterns) + 1)):
            raise ValueError("ranks must be a bijection onto 1..k")

    def by_rank(self) -> list[Pattern]:
        order = sorted(range(len(self.patterns)), key=lambda i: self.ranks[i])
        return [self.patterns[i] for i in order]


def extract_features(
    p: Pattern,
    db: TransactionDatabase,
    layout: FeatureLayout,
    p_disc: tuple[int, ...] | None = None,
) -> np.ndarray:
    f = np.zeros(layout.width)
    if layout.items:
        off = layout.items_offset
        for i in p.items:
            f[off + i] = 1.0
    if layout.transactions:
        off = layout.transactions_offset
        cover = p.cover
        while cover:
            t = (cover & -cover).bit_length() - 1
            f[off + t] = 1.0
            cover &= cover - 1
    if layout.length:
        f[layout.length_offset] = len(p.items) / db.n_items
    if layout.frequency:
        f[layout.frequency_offset] = p.support / db.n_transactions
    if layout.disc:
        if p_disc is None:
            raise ValueError("disc slots enabled but no discriminating pattern given")
        f[layout.disc_offset :] = disc_features(p, p_disc, db)
    return f


def pairwise_examples(
    q: RankedQuery, features: Sequence[np.ndarray]
) -> list[np.ndarray]:
    """One positive difference vector F_i - F_j per ranked pair i above j."""
    order = sorted(range(len(q.patterns)), key=lambda i: q.ranks[i])
    out = []
    for a in range(len(order)):
        for b in range(a + 1, len(order)):
            out.append(features[order[a]] - features[order[b]])
    return out


def learn_weights(
    examples: np.ndarray,
    lam: float,
    warm_start: np.ndarray,
    steps: int = 200,
) -> np.ndarray:
    """L2-regularized logistic loss over positive difference examples,
    minimized by full-batch gradient descent from the warm start."""
    examples = np.atleast_2d(np.asarray(examples, dtype=float))
    if examples.shape[0] == 0:
        raise ValueError("learn_weights needs at least one example")
    w = np.array(warm_start, dtype=float)
    lr = 0.5 / (1.0 + lam * examples.shape[0])
    for _ in range(steps):
        z = np.clip(examples @ w, -500, 500)
        sig_neg = 1.0 / (1.0 + np.exp(z))  # sigmoid(-z)
        grad = -(sig_neg @ examples) + lam * w
        w -= lr * grad
    return w


def phi_logistic(f: np.ndarray, w: np.ndarray, a: float) -> float:
    """Learned quality function with range [a, 1]."""
    z = float(np.clip(np.dot(w, f), -500, 500))
    return a + (1.0 - a) / (1.0 + np.exp(-z))


def _mean_rank(ranks: Iterable[int]) -> float:
    ranks = list(ranks)
    return sum(ranks) / len(ranks)


def icv(y: Iterable[int], q: RankedQuery) -> float:
    """Interclass variance of the presence/absence split induced by y."""
    y = frozenset(y)
    in_ranks, out_ranks = [], []
    for p, r in zip(q.patterns, q.ranks):
        (in_ranks if y <= set(p.items) else out_ranks).append(r)
    mu_all = _mean_rank(q.ranks)
    total = 0.0
    if in_ranks:
        total += len(in_ranks) * (mu_all - _mean_rank(in_ranks)) ** 2
    if out_ranks:
        total += len(out_ranks) * (mu_all - _mean_rank(out_ranks)) ** 2
    return total


def learn_discriminating_pattern(q: RankedQuery) -> tuple[int, ...]:
    """Greedy quadratic search for the ICV-maximizing sub-pattern.

    Singleton pass first; then each tracked sub-pattern is combined with
    each remaining item, admitted only when the union is contained in some
    query pattern. Ties go to the latest evaluated candidate (>= updates);
    iteration order is ascending item id, candidates in insertion order.
    """
    pattern_sets = [frozenset(p.items) for p in q.patterns]
    all_items = sorted(set().union(*pattern_sets)) if pattern_sets else []
    icv_max = 0.0
    p_disc: frozenset[int] = frozenset()
    for item in all_items:
        v = icv({item}, q)
        if v >= icv_max:
            icv_max = v
            p_disc = frozenset({item})
    candidates: list[frozenset[int]] = [frozenset({i}) for i in all_items]
    for elt in candidates:  # grows as new winners are appended
        for item in all_items:
            if item in elt:
                continue
            cand = elt | {item}
            if not any(cand <= ps for ps in pattern_sets):
                continue
            v = icv(cand, q)
            if v >= icv_max:
                icv_max = v
                p_disc = cand
                candidates.append(cand)
    return tuple(sorted(p_disc))


def disc_features(
    p: Pattern, p_disc: Iterable[int], db: TransactionDatabase
) -> np.ndarray:
    """(presence flag, relative frequency, relative size) of p_disc in p."""
    p_disc = tuple(sorted(set(p_disc)))
    if not set(p_disc) <= set(p.items):
        return np.zeros(N_DISC_SLOTS)
    freq = cover_of(db, p_disc).bit_count() / db.n_transactions
    size = len(p_disc) / db.n_items
    return np.array([1.0, freq, size])


@dataclass(frozen=True)
class AggregationConfig:
    kind: str  # "linear" or "exponential"
    eta: float

    def __post_init__(self):
        if self.kind not in ("linear", "exponential"):
            raise ValueError(f"unknown aggregation kind {self.kind!r}")
        if not 0.0 < self.eta <= 0.5:
            raise ValueError("eta must lie in (0, 0.5]")

    def factor(self, m: float) -> float:
        if self.kind == "linear":
            return 1.0 + self.eta * m
        return float(np.exp(self.eta * m))


def aggregate_weights(
    w: np.ndarray,
    layout: FeatureLayout,
    w_disc: np.ndarray,
    p_disc: tuple[int, ...],
    db: TransactionDatabase,
    agg: AggregationConfig,
) -> np.ndarray:
    """Fold the learned disc weights multiplicatively onto the base slots.

    Item slots of p_disc's items and transaction slots of p_disc's cover
    scale by the presence-flag factor; the frequency slot by the disc
    frequency factor; the length slot by the disc size factor. Applied
    once per call.
    """
    out = np.array(w, dtype=float)
    patt_factor = agg.factor(float(w_disc[0]))
    if layout.items:
        off = layout.items_offset
        for i in p_disc:
            out[off + i] *= patt_factor
    if layout.transactions:
        off = layout.transactions_offset
        cover = cover_of(db, p_disc)
        while cover:
            t = (cover & -cover).bit_length() - 1
            out[off + t] *= patt_factor
            cover &= cover - 1
    if layout.frequency:
        out[layout.frequency_offset] *= agg.factor(float(w_disc[1]))
    if layout.length:
        out[layout.length_offset] *= agg.factor(float(w_disc[2]))
    return out
