"""Transaction database loading and cover algebra.

Covers are plain Python ints used as transaction bitsets (bit t set means
transaction t contains the pattern), which keeps intersection and popcount
on the hot path cheap.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence


class DatasetFormatError(ValueError):
    """Raised when a dataset file cannot be parsed."""


@dataclass(frozen=True)
class TransactionDatabase:
    n_items: int
    n_transactions: int
    rows: tuple[int, ...]  # per transaction: bitset over items
    cols: tuple[int, ...]  # per item: bitset over transactions

    @property
    def full_cover(self) -> int:
        """Bitset containing every transaction."""
        return (1 << self.n_transactions) - 1


@dataclass(frozen=True)
class Pattern:
    """An itemset with its cached cover and support."""

    items: tuple[int, ...]
    cover: int
    support: int

    def __len__(self) -> int:
        return len(self.items)


def load_database(path: str) -> TransactionDatabase:
    """Load a CP4IM-style transaction file.

    Each data line is whitespace-separated non-negative item ids; blank
    lines and lines starting with '#' are skipped; duplicate items within
    a line are dropped. The item universe is 1 + the largest id observed.
    """
    transactions: list[frozenset[int]] = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            items = set()
            for tok in stripped.split():
                try:
                    item = int(tok)
                except ValueError:
                    raise DatasetFormatError(
                        f"{path}:{lineno}: non-integer token {tok!r}"
                    ) from None
                if item < 0:
                    raise DatasetFormatError(
                        f"{path}:{lineno}: negative item id {item}"
                    )
                items.add(item)
            transactions.append(frozenset(items))
    return database_from_transactions(transactions)


def database_from_transactions(
    transactions: Sequence[Iterable[int]],
) -> TransactionDatabase:
    """Build the row/column bitset indexes from plain transactions."""
    txns = [frozenset(t) for t in transactions]
    if not txns:
        raise DatasetFormatError("no transactions")
    n_items = 1 + max((max(t) for t in txns if t), default=0)
    rows = []
    cols = [0] * n_items
    for t, txn in enumerate(txns):
        row = 0
        for i in txn:
            row |= 1 << i
            cols[i] |= 1 << t
        rows.append(row)
    return TransactionDatabase(
        n_items=n_items,
        n_transactions=len(txns),
        rows=tuple(rows),
        cols=tuple(cols),
    )


def cover_of(db: TransactionDatabase, items: Iterable[int]) -> int:
    """Intersection of the item covers; all transactions for the empty set."""
    cover = db.full_cover
    for i in items:
        if not 0 <= i < db.n_items:
            raise IndexError(f"item id {i} out of range (n_items={db.n_items})")
        cover &= db.cols[i]
    return cover


def closure_of(db: TransactionDatabase, items: Iterable[int]) -> tuple[int, ...]:
    """All items whose cover contains cover(items); a superset of items."""
    cover = cover_of(db, items)
    if cover == 0:
        raise ValueError("closure undefined for an empty cover")
    return tuple(i for i in range(db.n_items) if cover & ~db.cols[i] == 0)


def pattern_of(db: TransactionDatabase, items: Iterable[int]) -> Pattern:
    itemset = tuple(sorted(set(items)))
    if not itemset:
        raise ValueError("a pattern must be a non-empty itemset")
    cover = cover_of(db, itemset)
    return Pattern(items=itemset, cover=cover, support=cover.bit_count())


def rel_freq(db: TransactionDatabase, p: Pattern) -> float:
    return p.support / db.n_transactions
