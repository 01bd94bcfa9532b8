"""Exhaustive ground truth for small databases.

Everything here is computed by scanning the horizontal rows for every one
of the ``2**n`` itemsets.  Nothing goes through the vertical index or the
propagator.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Iterable, Sequence

from .dataset import TransactionDatabase
from .engine import BOTH, ONE, ZERO

MAX_ITEMS = 20


class OracleTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class OracleResult:
    patterns: frozenset[tuple[tuple[int, ...], int]]
    digest: str
    theta: int

    def itemsets(self) -> set[tuple[int, ...]]:
        return {items for items, _ in self.patterns}

    def __len__(self) -> int:
        return len(self.patterns)


@dataclass(frozen=True)
class DCViolation:
    var: int
    value: int


def db_digest(db: TransactionDatabase) -> str:
    return hashlib.sha1(db.to_fimi().encode()).hexdigest()[:16]


def _require_small(db: TransactionDatabase) -> None:
    if db.n > MAX_ITEMS:
        raise OracleTooLarge(
            f"oracle refuses {db.n} items (limit {MAX_ITEMS}; it enumerates 2^n itemsets)"
        )


def _mask_items(mask: int) -> tuple[int, ...]:
    return tuple(i for i in range(mask.bit_length()) if mask >> i & 1)


def closed_table(db: TransactionDatabase) -> dict[int, int]:
    """Map every closed itemset (as an item bitmask) to its support, any support."""
    _require_small(db)
    rows = db.row_masks
    full = (1 << db.n) - 1
    closed = {}
    for p in range(1 << db.n):
        support = 0
        common = full
        for row in rows:
            if p & row == p:
                support += 1
                common &= row
        if common == p:
            closed[p] = support
    return closed


def brute_force_closed(db: TransactionDatabase, theta: int, table: dict[int, int] | None = None) -> OracleResult:
    if table is None:
        table = closed_table(db)
    pats = frozenset((_mask_items(p), s) for p, s in table.items() if s >= theta)
    return OracleResult(pats, db_digest(db), theta)


def brute_force_frequent(db: TransactionDatabase, theta: int) -> dict[tuple[int, ...], int]:
    _require_small(db)
    out = {}
    for p in range(1 << db.n):
        s = sum(1 for row in db.row_masks if p & row == p)
        if s >= theta:
            out[_mask_items(p)] = s
    return out


def derive_counts(
    db: TransactionDatabase, thetas: Iterable[int], include_empty: bool = False
) -> list[tuple[int, int]]:
    """(theta, #closed patterns) rows; the empty pattern only on request."""
    table = closed_table(db)
    supports = [s for p, s in table.items() if p or include_empty]
    return [(th, sum(1 for s in supports if s >= th)) for th in thetas]


def counts_csv(rows: Sequence[tuple[int, int]]) -> str:
    return "theta,patterns\n" + "".join(f"{th},{c}\n" for th, c in rows)


def check_domain_consistency(
    db: TransactionDatabase,
    theta: int,
    domains: Sequence[int],
    closed: Iterable[tuple[int, ...]] | None = None,
) -> DCViolation | None:
    """Return the first (variable, value) without a closed frequent support.

    ``domains`` holds one entry per item (0, 1, or 2 for free).  ``closed``
    may pass precomputed closed frequent itemsets.
    """
    _require_small(db)
    if closed is None:
        closed = brute_force_closed(db, theta).itemsets()
    plus = minus = 0
    free = []
    for i, d in enumerate(domains):
        if d == ONE:
            plus |= 1 << i
        elif d == ZERO:
            minus |= 1 << i
        elif d == BOTH:
            free.append(i)
    if not free:
        return None
    compatible = []
    for items in closed:
        mask = 0
        for i in items:
            mask |= 1 << i
        if mask & plus == plus and not mask & minus:
            compatible.append(mask)
    for i in free:
        bit = 1 << i
        for value in (ZERO, ONE):
            if not any(bool(mask & bit) == bool(value) for mask in compatible):
                return DCViolation(i, value)
    return None
