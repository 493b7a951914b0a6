"""XOR-cell sampling: random GF(2) parity systems, their propagator, and
the cell-based diverse pattern sampler.

Each row of a system is a coefficient bitset over the item variables plus
a parity bit, encoding xor(b_i * x_i) = b_0. m rows split the solution
space into 2^m cells; enumerating one random cell with the closed/diverse
propagators and drawing from it proportional to a quality function yields
approximately quality-weighted samples.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .data import Pattern, TransactionDatabase
from .diversity import DiversityConfig, DiversityPropagator, History, ClosedPatternPropagator
from .engine import SearchModel, VarState, solve


class CellCalibrationError(RuntimeError):
    """Raised when no row count yields a usably sized probe cell."""


class EmptyCellError(RuntimeError):
    """Raised when repeated cell redraws all come up empty."""


@dataclass(frozen=True)
class XorSystem:
    n_vars: int
    coeffs: tuple[int, ...]  # per row: coefficient bitset over variables
    parities: tuple[int, ...]  # per row: parity bit

    @property
    def row_count(self) -> int:
        return len(self.coeffs)

    def satisfied_by(self, assignment_mask: int) -> bool:
        """Direct evaluation of every row on a total assignment."""
        return all(
            (c & assignment_mask).bit_count() & 1 == b
            for c, b in zip(self.coeffs, self.parities)
        )


def random_xor_system(n_vars: int, m: int, rng: np.random.Generator) -> XorSystem:
    """m rows with iid uniform coefficients and parity bits."""
    coeffs = []
    parities = []
    for _ in range(m):
        bits = rng.integers(0, 2, size=n_vars + 1)
        coeffs.append(int(sum(int(b) << i for i, b in enumerate(bits[:-1]))))
        parities.append(int(bits[-1]))
    return XorSystem(n_vars=n_vars, coeffs=tuple(coeffs), parities=tuple(parities))


class XorPropagator:
    """Gaussian-elimination filtering for a fixed XOR system.

    Stateless across calls: substitutes the current assignment into a
    fresh copy of the matrix, echelonizes, and forces single-variable
    rows, repeating until nothing changes. Backtracking therefore needs
    no matrix trailing.
    """

    def __init__(self, system: XorSystem):
        self.system = system

    def propagate(self, state: VarState) -> bool:
        if self.system.row_count == 0:
            return True
        rows = self._substitute(state)
        while True:
            if not self._consistent(rows):
                return False
            self._echelonize(rows)
            if not self._consistent(rows):
                return False
            forced = self._fix_variables(rows, state)
            if forced is None:
                return False
            if not forced:
                return True
            rows = self._substitute(state)

    def _substitute(self, state: VarState) -> list[list[int]]:
        assigned = 0
        for i in range(state.n):
            if state.values[i] != -1:
                assigned |= 1 << i
        pos = state.pos_mask
        rows = []
        for c, b in zip(self.system.coeffs, self.system.parities):
            b ^= (c & pos).bit_count() & 1
            rows.append([c & ~assigned, b])
        return rows

    @staticmethod
    def _consistent(rows: list[list[int]]) -> bool:
        return not any(c == 0 and b == 1 for c, b in rows)

    @staticmethod
    def _echelonize(rows: list[list[int]]) -> None:
        pivot_row = 0
        n_rows = len(rows)
        col = 0
        max_col = max((r[0].bit_length() for r in rows), default=0)
        while pivot_row < n_rows and col < max_col:
            sel = None
            for r in range(pivot_row, n_rows):
                if (rows[r][0] >> col) & 1:
                    sel = r
                    break
            if sel is not None:
                rows[pivot_row], rows[sel] = rows[sel], rows[pivot_row]
                pc, pb = rows[pivot_row]
                for r in range(n_rows):
                    if r != pivot_row and (rows[r][0] >> col) & 1:
                        rows[r][0] ^= pc
                        rows[r][1] ^= pb
                pivot_row += 1
            col += 1

    @staticmethod
    def _fix_variables(rows: list[list[int]], state: VarState) -> bool | None:
        """Force the variable of every single-coefficient row.

        Returns None on conflict, else whether anything was forced.
        """
        forced = False
        for c, b in rows:
            if c.bit_count() == 1:
                i = c.bit_length() - 1
                if state.values[i] == -1:
                    if not state.assign(i, b):
                        return None
                    forced = True
                elif state.values[i] != b:
                    return None
        return forced


@dataclass
class CellSample:
    patterns: list[Pattern]
    local_history: History = field(default_factory=History)


def pivot_for(kappa: float) -> int:
    """Probe-cell target size derived from the error tolerance kappa."""
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    return math.ceil(4.0 * (1.0 + 1.0 / kappa) ** 2)


def _count_cell(
    db: TransactionDatabase, theta: int, system: XorSystem, cap: int
) -> int:
    """Count non-empty closed frequent patterns in one cell, up to cap."""
    model = SearchModel(
        n_items=db.n_items,
        propagators=[ClosedPatternPropagator(db, theta), XorPropagator(system)],
    )
    state = VarState(db.n_items, db.cols, db.full_cover)
    found = 0

    def emit(s: VarState) -> bool:
        nonlocal found
        if s.pos_mask == 0:
            return True
        found += 1
        return found < cap

    solve(model, state, emit)
    return found


def estimate_cell_exponent(
    db: TransactionDatabase,
    theta: int,
    rng: np.random.Generator,
    pivot: int,
    start: int = 0,
    max_retries: int = 40,
) -> int:
    """Adaptive search for the XOR row count m.

    Probes one random cell per step: too many solutions increments m, an
    empty probe decrements it (floor 0); the first m whose probe lands in
    (0, pivot] is returned.
    """
    if pivot < 2:
        raise ValueError("pivot must be >= 2")
    m = max(0, start)
    for _ in range(max_retries):
        system = random_xor_system(db.n_items, m, rng)
        count = _count_cell(db, theta, system, cap=pivot + 1)
        if count == 0:
            if m == 0:
                continue  # base constraints may be unsat; reprobe
            m -= 1
        elif count > pivot:
            m += 1
        else:
            return m
    raise CellCalibrationError(
        f"cell calibration failed after {max_retries} probes (last m={m})"
    )


def sample_cell(
    db: TransactionDatabase,
    theta: int,
    jmax: float,
    m: int,
    rng: np.random.Generator,
    cap: int | None = None,
) -> CellSample:
    """Enumerate the diverse closed frequent patterns of one fresh cell.

    Every accepted pattern's cover joins the cell-local history before the
    search continues, so later acceptances are diverse against earlier ones.
    """
    system = random_xor_system(db.n_items, m, rng)
    history = History()
    cfg = DiversityConfig(theta=theta, jmax=jmax)
    model = SearchModel(
        n_items=db.n_items,
        propagators=[
            ClosedPatternPropagator(db, theta),
            DiversityPropagator(db, cfg, history),
            XorPropagator(system),
        ],
    )
    state = VarState(db.n_items, db.cols, db.full_cover)
    patterns: list[Pattern] = []

    def emit(s: VarState) -> bool:
        if s.pos_mask == 0:
            return True
        p = Pattern(items=s.pos_items(), cover=s.cover, support=s.cover.bit_count())
        patterns.append(p)
        history.add(p.cover)
        return cap is None or len(patterns) < cap

    solve(model, state, emit)
    return CellSample(patterns=patterns, local_history=history)


def cdflexics_draw(
    db: TransactionDatabase,
    theta: int,
    jmax: float,
    quality: Callable[[Pattern], float],
    kappa: float,
    rng: np.random.Generator,
    m: int | None = None,
    m_start: int = 0,
    cap: int | None = None,
    max_empty_redraws: int = 10,
) -> tuple[Pattern, list[Pattern], int]:
    """One quality-proportional draw from a random cell.

    Returns the drawn pattern, the cell's full diverse pattern list (for
    Top(m) selection by callers), and the row count used. Pass ``m`` to
    skip calibration, or ``m_start`` to warm-start it.
    """
    pivot = pivot_for(kappa)
    if m is None:
        m = estimate_cell_exponent(db, theta, rng, pivot, start=m_start)
    if cap is None:
        cap = pivot
    cell: CellSample | None = None
    for _ in range(max_empty_redraws):
        cell = sample_cell(db, theta, jmax, m, rng, cap=cap)
        if cell.patterns:
            break
    else:
        raise EmptyCellError(f"{max_empty_redraws} cell redraws all empty at m={m}")
    weights = np.array([quality(p) for p in cell.patterns], dtype=float)
    if not np.all(weights > 0):
        raise ValueError("quality must map patterns to positive values")
    probs = weights / weights.sum()
    idx = int(rng.choice(len(cell.patterns), p=probs))
    return cell.patterns[idx], cell.patterns, m
