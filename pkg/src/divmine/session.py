"""The interactive mine-rank-learn loop, simulated users, and regret
evaluation against a hidden quality measure.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .data import Pattern, TransactionDatabase, rel_freq
from .preference import (
    AggregationConfig,
    FeatureLayout,
    RankedQuery,
    aggregate_weights,
    extract_features,
    layout_from_letters,
    learn_discriminating_pattern,
    learn_weights,
    pairwise_examples,
    phi_logistic,
)
from .xor import cdflexics_draw


@dataclass(frozen=True)
class SessionConfig:
    theta: int
    jmax: float = 1.0
    k: int = 10
    ell: int = 1
    iterations: int = 100
    range_a: float = 0.1
    kappa: float = 0.9
    lam: float = 0.001
    eta: float = 0.13
    agg_kind: str = "exponential"
    features: str = "ITLF"
    measure: str = "freq"
    seed: int = 0
    top_m: int = 1
    disc_enabled: bool = True
    dup_redraws: int = 5

    def __post_init__(self):
        if not 0 <= self.ell < self.k:
            raise ValueError("query retention must satisfy 0 <= ell < k")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")


class Session:
    """One analyst session: presents queries, consumes rankings, learns.

    XOR randomness for draw d of iteration t derives solely from
    (seed, t, d), so variants sharing a seed see the same cell sequence.
    """

    def __init__(self, db: TransactionDatabase, cfg: SessionConfig):
        self.db = db
        self.cfg = cfg
        self.layout = layout_from_letters(cfg.features, db)
        self.agg = AggregationConfig(kind=cfg.agg_kind, eta=cfg.eta)
        self.t = 0  # completed iterations
        self.w = np.zeros(self.layout.width)
        self.pairs: list[tuple[Pattern, Pattern]] = []  # accumulated feedback U
        self.prev_ranked: RankedQuery | None = None
        self.live_query: list[Pattern] | None = None
        self.m_hint = 0

    # -- mining ---------------------------------------------------------

    def _quality(self) -> Callable[[Pattern], float]:
        w, layout, a, db = self.w, self.layout, self.cfg.range_a, self.db
        return lambda p: phi_logistic(extract_features(p, db, layout), w, a)

    def quality_of(self, p: Pattern) -> float:
        return self._quality()(p)

    def next_query(self) -> list[Pattern]:
        """Assemble the next query: retained prefix plus fresh Top(1) draws."""
        cfg = self.cfg
        retained: list[Pattern] = []
        if self.prev_ranked is not None and cfg.ell > 0:
            retained = self.prev_ranked.by_rank()[: cfg.ell]
        query = list(retained)
        quality = self._quality()
        t = self.t + 1
        draw_idx = 0
        while len(query) < cfg.k:
            rng = np.random.default_rng(
                np.random.SeedSequence(entropy=(cfg.seed, t, draw_idx))
            )
            chosen = None
            for _ in range(cfg.dup_redraws + 1):
                try:
                    _, cell, m = cdflexics_draw(
                        self.db,
                        cfg.theta,
                        cfg.jmax,
                        quality,
                        cfg.kappa,
                        rng,
                        m_start=self.m_hint,
                    )
                except Exception as exc:
                    raise RuntimeError(
                        f"sampling failed at iteration {t}, draw {draw_idx}: {exc}"
                    ) from exc
                self.m_hint = m
                top = sorted(cell, key=lambda p: (-quality(p), p.items))
                chosen = top[: cfg.top_m][0]
                if all(chosen.items != q.items for q in query):
                    break
            query.append(chosen)
            draw_idx += 1
        self.live_query = query
        return query

    # -- learning -------------------------------------------------------

    def advance(self, ranking: RankedQuery) -> None:
        """Consume the ranking of the live query and update the weights."""
        cfg = self.cfg
        self.pairs.extend(
            (a, b)
            for i, a in enumerate(ranking.by_rank())
            for b in ranking.by_rank()[i + 1 :]
        )
        if cfg.disc_enabled:
            p_disc = learn_discriminating_pattern(ranking)
            layout = self.layout.with_disc()
            warm = np.concatenate([self.w, np.zeros(3)])
        else:
            p_disc = None
            layout = self.layout
            warm = self.w
        feats: dict[tuple[int, ...], np.ndarray] = {}

        def feat(p: Pattern) -> np.ndarray:
            if p.items not in feats:
                feats[p.items] = extract_features(p, self.db, layout, p_disc=p_disc)
            return feats[p.items]

        examples = np.array([feat(a) - feat(b) for a, b in self.pairs])
        learned = learn_weights(examples, cfg.lam, warm)
        if cfg.disc_enabled:
            base, w_disc = learned[:-3], learned[-3:]
            if p_disc:
                base = aggregate_weights(
                    base, self.layout, w_disc, p_disc, self.db, self.agg
                )
            self.w = base
        else:
            self.w = learned
        self.prev_ranked = ranking
        self.live_query = None
        self.t += 1

    @property
    def done(self) -> bool:
        return self.t >= self.cfg.iterations


# -- hidden measures and simulated users --------------------------------


def surprisingness(p: Pattern, db: TransactionDatabase) -> float:
    """Excess of a pattern's frequency over the independence of its items."""
    prod = 1.0
    for i in p.items:
        prod *= db.cols[i].bit_count() / db.n_transactions
    return max(rel_freq(db, p) - prod, 0.0)


def measure_fn(name: str, db: TransactionDatabase) -> Callable[[Pattern], float]:
    if name == "freq":
        return lambda p: rel_freq(db, p)
    if name == "surp":
        return lambda p: surprisingness(p, db)
    raise ValueError(f"unknown hidden measure {name!r}")


def simulated_rank(
    query: list[Pattern], measure: Callable[[Pattern], float]
) -> RankedQuery:
    """Descending by measure, ties broken lexicographically on the itemset."""
    order = sorted(range(len(query)), key=lambda i: (-measure(query[i]), query[i].items))
    ranks = [0] * len(query)
    for pos, i in enumerate(order):
        ranks[i] = pos + 1
    return RankedQuery(patterns=tuple(query), ranks=tuple(ranks))


# -- reference set and regret -------------------------------------------


class ReferenceSetTooLarge(RuntimeError):
    pass


@dataclass
class ReferenceSet:
    """All frequent patterns at theta with sorted hidden-measure values."""

    values: np.ndarray  # ascending
    measure: Callable[[Pattern], float]

    @property
    def size(self) -> int:
        return len(self.values)

    def percentile_rank(self, p: Pattern) -> float:
        v = self.measure(p)
        return float(np.searchsorted(self.values, v, side="right")) / self.size


def mine_reference_set(
    db: TransactionDatabase,
    theta: int,
    measure: str,
    size_cap: int = 5_000_000,
) -> ReferenceSet:
    """Eclat-style vertical enumeration of all frequent itemsets."""
    fn = measure_fn(measure, db)
    values: list[float] = []
    cols = db.cols
    n = db.n_items

    def expand(prefix: list[int], cover: int, start: int) -> None:
        for i in range(start, n):
            c = cover & cols[i]
            if c.bit_count() >= theta:
                prefix.append(i)
                if len(values) >= size_cap:
                    raise ReferenceSetTooLarge(
                        f"reference set exceeds cap of {size_cap}"
                    )
                values.append(
                    fn(Pattern(items=tuple(prefix), cover=c, support=c.bit_count()))
                )
                expand(prefix, c, i + 1)
                prefix.pop()

    expand([], db.full_cover, 0)
    return ReferenceSet(values=np.sort(np.array(values)), measure=fn)


def count_frequent(db: TransactionDatabase, theta: int) -> int:
    """Number of frequent itemsets at theta (no measure attachment)."""
    count = 0
    cols = db.cols

    def expand(cover: int, start: int) -> None:
        nonlocal count
        for i in range(start, db.n_items):
            c = cover & cols[i]
            if c.bit_count() >= theta:
                count += 1
                expand(c, i + 1)

    expand(db.full_cover, 0)
    return count


def regret(query: list[Pattern], ref: ReferenceSet, mode: str) -> float:
    ranks = [ref.percentile_rank(p) for p in query]
    if mode == "max":
        return 1.0 - max(ranks)
    if mode == "avg":
        return 1.0 - sum(ranks) / len(ranks)
    raise ValueError(f"unknown regret mode {mode!r}")


# -- experiments ---------------------------------------------------------


@dataclass
class RegretRecord:
    iteration: int
    regret_max: float
    regret_avg: float
    cum_max: float
    cum_avg: float
    seconds: float


def run_session(
    db: TransactionDatabase,
    cfg: SessionConfig,
    ref: ReferenceSet,
) -> list[tuple[float, float, float]]:
    """One full simulated session; per-iteration (max, avg, seconds)."""
    session = Session(db, cfg)
    fn = ref.measure
    out = []
    for _ in range(cfg.iterations):
        t0 = time.perf_counter()
        query = session.next_query()
        session.advance(simulated_rank(query, fn))
        dt = time.perf_counter() - t0
        out.append((regret(query, ref, "max"), regret(query, ref, "avg"), dt))
    return out


def run_experiment(
    db: TransactionDatabase,
    cfg: SessionConfig,
    repetitions: int,
    ref: ReferenceSet | None = None,
) -> list[RegretRecord]:
    """Repeated sessions with seeds seed, seed+1, ...; averaged per iteration."""
    if ref is None:
        ref = mine_reference_set(db, cfg.theta, cfg.measure)
    acc = np.zeros((cfg.iterations, 3))
    for rep in range(repetitions):
        rows = run_session(db, replace(cfg, seed=cfg.seed + rep), ref)
        acc += np.array(rows)
    acc /= repetitions
    records = []
    cum_max = cum_avg = 0.0
    for t in range(cfg.iterations):
        cum_max += acc[t, 0]
        cum_avg += acc[t, 1]
        records.append(
            RegretRecord(
                iteration=t + 1,
                regret_max=acc[t, 0],
                regret_avg=acc[t, 1],
                cum_max=cum_max,
                cum_avg=cum_avg,
                seconds=acc[t, 2],
            )
        )
    return records


CSV_HEADER = "iter,regret_max,regret_avg,cum_max,cum_avg,seconds"


def records_to_csv(records: list[RegretRecord]) -> str:
    lines = [CSV_HEADER]
    for r in records:
        lines.append(
            f"{r.iteration},{r.regret_max:.10g},{r.regret_avg:.10g},"
            f"{r.cum_max:.10g},{r.cum_avg:.10g},{r.seconds:.6f}"
        )
    return "\n".join(lines) + "\n"
