"""Closed frequent itemset and Jaccard-diversity propagators.

Diversity is enforced through an anti-monotonic lower bound on the
Jaccard index of covers, which is safe to prune on because covers only
shrink as items are added.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .data import Pattern, TransactionDatabase
from .engine import FREE, SearchModel, VarState, solve


def jaccard(a: int, b: int) -> float:
    """Jaccard index of two non-empty covers."""
    if a == 0 and b == 0:
        raise ValueError("jaccard undefined for two empty covers")
    return (a & b).bit_count() / (a | b).bit_count()


def lower_bound(p_cover: int, h_cover: int, theta: int) -> float:
    """Anti-monotonic lower bound on jaccard(p, h) for frequent p."""
    diff = (p_cover & ~h_cover).bit_count()
    return max(0, theta - diff) / (h_cover.bit_count() + diff)


@dataclass
class History:
    """Covers of previously accepted diverse patterns."""

    covers: list[int] = field(default_factory=list)

    def add(self, cover: int) -> None:
        self.covers.append(cover)

    def __len__(self) -> int:
        return len(self.covers)


@dataclass(frozen=True)
class DiversityConfig:
    theta: int
    jmax: float


class ClosedPatternPropagator:
    """Enforces that x+ extends to a closed itemset with support >= theta."""

    def __init__(self, db: TransactionDatabase, theta: int):
        if theta < 1:
            raise ValueError("theta must be >= 1")
        self.db = db
        self.theta = theta

    def propagate(self, state: VarState) -> bool:
        db = self.db
        cover = state.cover
        if cover.bit_count() < self.theta:
            return False
        # Drop free items whose inclusion would fall below the threshold,
        # force in free items whose cover already contains cover(x+).
        for i in range(state.n):
            if state.values[i] != FREE:
                continue
            col = db.cols[i]
            if cover & ~col == 0:
                if not state.assign(i, 1):
                    return False
            elif (cover & col).bit_count() < self.theta:
                if not state.assign(i, 0):
                    return False
        # A forced-0 item absorbing the full cover makes closedness
        # unreachable anywhere below this node.
        for j in range(state.n):
            if state.values[j] == 0 and cover & ~db.cols[j] == 0:
                return False
        return True


class DiversityPropagator:
    """Prunes patterns whose Jaccard lower bound against the history
    exceeds jmax. Reads the history live, so covers appended mid-search
    constrain the remainder of the enumeration."""

    def __init__(self, db: TransactionDatabase, cfg: DiversityConfig, history: History):
        self.db = db
        self.cfg = cfg
        self.history = history

    def propagate(self, state: VarState) -> bool:
        covers = self.history.covers
        if not covers:
            return True
        theta, jmax = self.cfg.theta, self.cfg.jmax
        cover = state.cover
        for h in covers:
            if lower_bound(cover, h, theta) > jmax:
                return False
        for i in range(state.n):
            if state.values[i] != FREE:
                continue
            ext = cover & self.db.cols[i]
            for h in covers:
                if lower_bound(ext, h, theta) > jmax:
                    if not state.assign(i, 0):
                        return False
                    break
        return True


def _pattern_from_state(state: VarState) -> Pattern:
    items = state.pos_items()
    return Pattern(items=items, cover=state.cover, support=state.cover.bit_count())


def enumerate_closed(
    db: TransactionDatabase,
    theta: int,
    history: History | None = None,
    jmax: float = 1.0,
    extra_propagators: list | None = None,
    cap: int | None = None,
    on_pattern=None,
    grow_history: bool = True,
) -> list[Pattern]:
    """Enumerate closed frequent itemsets, optionally diversity-filtered.

    When ``history`` is given and ``grow_history`` is set, every emitted
    pattern's cover is appended to it before the search continues (the
    greedy history discipline); otherwise the history is a fixed filter.
    The empty itemset is never emitted.
    """
    props: list = [ClosedPatternPropagator(db, theta)]
    if history is not None:
        props.append(
            DiversityPropagator(db, DiversityConfig(theta=theta, jmax=jmax), history)
        )
    if extra_propagators:
        props.extend(extra_propagators)
    model = SearchModel(n_items=db.n_items, propagators=props)
    state = VarState(db.n_items, db.cols, db.full_cover)
    out: list[Pattern] = []

    def emit(s: VarState) -> bool:
        if s.pos_mask == 0:
            return True
        p = _pattern_from_state(s)
        out.append(p)
        if history is not None and grow_history:
            history.add(p.cover)
        if on_pattern is not None and not on_pattern(p):
            return False
        return cap is None or len(out) < cap

    solve(model, state, emit)
    return out
