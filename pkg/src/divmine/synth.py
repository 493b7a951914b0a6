"""Synthetic transaction data with planted item blocks.

Stand-ins for UCI/CP4IM benchmark files when those are unavailable:
transactions are drawn from a handful of overlapping item blocks plus
background noise, which yields clusters of closed patterns with heavily
overlapping covers (the regime where cover-diversity pruning matters).
"""
from __future__ import annotations

import numpy as np

from .data import TransactionDatabase, database_from_transactions


def make_blocked_database(
    n_transactions: int,
    n_items: int,
    n_blocks: int = 4,
    in_block_p: float = 0.9,
    background_p: float = 0.12,
    seed: int = 0,
) -> TransactionDatabase:
    """Each transaction adopts one block of items densely plus sparse noise."""
    rng = np.random.default_rng(seed)
    block_size = n_items // n_blocks
    transactions = []
    for _ in range(n_transactions):
        block = int(rng.integers(n_blocks))
        txn = set()
        lo = block * block_size
        hi = min(lo + block_size, n_items)
        for i in range(lo, hi):
            if rng.random() < in_block_p:
                txn.add(i)
        for i in range(n_items):
            if i < lo or i >= hi:
                if rng.random() < background_p:
                    txn.add(i)
        if not txn:
            txn.add(int(rng.integers(n_items)))
        transactions.append(txn)
    return database_from_transactions(transactions)


def write_database(db: TransactionDatabase, path: str) -> None:
    with open(path, "w") as fh:
        for row in db.rows:
            items = []
            r = row
            while r:
                items.append((r & -r).bit_length() - 1)
                r &= r - 1
            fh.write(" ".join(map(str, items)) + "\n")
