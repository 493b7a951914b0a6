"""Minimal depth-first propagation solver over boolean item variables.

The solver runs its propagators round-robin to fixpoint before each
decision, branches on the lowest free item (1 before 0), and restores
state through a trail. Propagators force values through
``VarState.assign`` and signal dead branches by returning False.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Protocol

FREE = -1


class VarState:
    """Tri-state item domains with trailing undo and an incremental cover.

    ``cover`` is kept equal to the intersection of the covers of all
    forced-1 items (all transactions while none are forced).
    """

    __slots__ = ("n", "values", "free_count", "pos_mask", "cover", "_cols", "_trail")

    def __init__(self, n_items: int, cols: tuple[int, ...], full_cover: int):
        self.n = n_items
        self.values = [FREE] * n_items
        self.free_count = n_items
        self.pos_mask = 0
        self.cover = full_cover
        self._cols = cols
        self._trail: list[tuple[int, int]] = []

    def value(self, i: int) -> int:
        return self.values[i]

    def free_items(self) -> list[int]:
        return [i for i in range(self.n) if self.values[i] == FREE]

    def assign(self, i: int, v: int) -> bool:
        """Force item i to v. Returns False on conflict with a prior forcing."""
        cur = self.values[i]
        if cur != FREE:
            return cur == v
        self._trail.append((i, self.cover))
        self.values[i] = v
        self.free_count -= 1
        if v == 1:
            self.pos_mask |= 1 << i
            self.cover &= self._cols[i]
        return True

    def mark(self) -> int:
        return len(self._trail)

    def undo_to(self, mark: int) -> None:
        while len(self._trail) > mark:
            i, prev_cover = self._trail.pop()
            if self.values[i] == 1:
                self.pos_mask &= ~(1 << i)
            self.values[i] = FREE
            self.free_count += 1
            self.cover = prev_cover

    def pos_items(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.n) if self.values[i] == 1)


class Propagator(Protocol):
    def propagate(self, state: VarState) -> bool:
        """Filter the state; may force items. False means the branch fails."""


@dataclass
class SearchModel:
    n_items: int
    propagators: list = field(default_factory=list)


def branch(state: VarState) -> int:
    """Deterministic branching: the lowest free item id."""
    for i in range(state.n):
        if state.values[i] == FREE:
            return i
    raise ValueError("branch called with no free items")


def _propagate_to_fixpoint(model: SearchModel, state: VarState) -> bool:
    changed = True
    while changed:
        before = state.mark()
        for prop in model.propagators:
            if not prop.propagate(state):
                return False
        changed = state.mark() != before
    return True


def solve(
    model: SearchModel,
    state: VarState,
    on_solution: Callable[[VarState], bool],
    cap: int | None = None,
) -> int:
    """Enumerate all total assignments accepted by every propagator.

    ``on_solution`` receives the state at each solution and returns True to
    continue the search. Enumeration also stops once ``cap`` solutions have
    been emitted. Returns the number of solutions found.
    """
    count = 0
    stop = False

    def rec() -> None:
        nonlocal count, stop
        mark = state.mark()
        if not _propagate_to_fixpoint(model, state):
            state.undo_to(mark)
            return
        if state.free_count == 0:
            count += 1
            if not on_solution(state):
                stop = True
            elif cap is not None and count >= cap:
                stop = True
            state.undo_to(mark)
            return
        item = branch(state)
        for v in (1, 0):
            sub = state.mark()
            if state.assign(item, v):
                rec()
            else:  # pragma: no cover - assign on a free item cannot conflict
                pass
            state.undo_to(sub)
            if stop:
                break
        state.undo_to(mark)

    rec()
    return count
