"""Transaction databases in FIMI format, with horizontal and vertical views.

Items are re-indexed densely in ascending order of their external label.
Covers (tidsets) are stored as Python ints used as bit-vectors: bit ``t`` is
set iff transaction ``t`` belongs to the cover.  Intersection, subset tests
and popcount therefore run word-parallel inside CPython's bignum routines.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Sequence, Union


class FimiParseError(ValueError):
    """Raised on malformed FIMI input; carries the 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class Cover:
    """An immutable set of transaction ids over the universe ``[0, m)``."""

    __slots__ = ("bits", "universe", "_card")

    def __init__(self, bits: int, universe: int):
        if bits < 0 or bits >> universe:
            raise ValueError("cover has members outside its universe")
        self.bits = bits
        self.universe = universe
        self._card = bits.bit_count()

    @classmethod
    def from_ids(cls, ids: Iterable[int], universe: int) -> "Cover":
        bits = 0
        for t in ids:
            bits |= 1 << t
        return cls(bits, universe)

    @classmethod
    def full(cls, universe: int) -> "Cover":
        return cls((1 << universe) - 1, universe)

    @property
    def cardinality(self) -> int:
        return self._card

    def __len__(self) -> int:
        return self._card

    def __iter__(self) -> Iterator[int]:
        bits = self.bits
        while bits:
            low = bits & -bits
            yield low.bit_length() - 1
            bits ^= low

    def __contains__(self, t: int) -> bool:
        return 0 <= t < self.universe and bool(self.bits >> t & 1)

    def _check(self, other: "Cover") -> None:
        if not isinstance(other, Cover):
            raise TypeError(f"expected Cover, got {type(other).__name__}")
        if other.universe != self.universe:
            raise ValueError(
                f"covers over different universes ({self.universe} vs {other.universe})"
            )

    def __and__(self, other: "Cover") -> "Cover":
        self._check(other)
        return Cover(self.bits & other.bits, self.universe)

    def issubset(self, other: "Cover") -> bool:
        self._check(other)
        if self._card > other._card:
            return False
        return self.bits & other.bits == self.bits

    __le__ = issubset

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Cover):
            return NotImplemented
        self._check(other)
        return self.bits == other.bits

    def __hash__(self) -> int:
        return hash((self.bits, self.universe))

    def members(self) -> list[int]:
        return list(self)

    def __repr__(self) -> str:
        return f"Cover({self.members()}, universe={self.universe})"


@dataclass(frozen=True, order=True)
class Pattern:
    """A sorted itemset over dense item indices, with optional cached support."""

    items: tuple[int, ...]
    frequency: int | None = field(default=None, compare=False)

    def __post_init__(self):
        items = tuple(self.items)
        if any(a >= b for a, b in zip(items, items[1:])):
            items = tuple(sorted(set(items)))
        object.__setattr__(self, "items", items)

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self) -> Iterator[int]:
        return iter(self.items)

    def __contains__(self, i: int) -> bool:
        return i in self.items


PatternLike = Union[Pattern, Iterable[int]]


class TransactionDatabase:
    """Immutable transaction list plus the per-item vertical cover index.

    ``horizontal[t]`` is the sorted tuple of item indices of transaction t;
    ``vertical[i]`` is the cover bitmask of item i; ``labels[i]`` is the
    external label of item i.
    """

    def __init__(self, transactions: Sequence[Iterable[int]]):
        rows = [sorted(set(int(x) for x in row)) for row in transactions]
        labels = sorted({x for row in rows for x in row})
        if any(x < 0 for x in labels[:1]):
            raise ValueError("item labels must be non-negative integers")
        index = {label: i for i, label in enumerate(labels)}
        self.labels: tuple[int, ...] = tuple(labels)
        self.index_of: dict[int, int] = index
        self.n = len(labels)
        self.m = len(rows)
        self.horizontal: tuple[tuple[int, ...], ...] = tuple(
            tuple(index[x] for x in row) for row in rows
        )
        vertical = [0] * self.n
        row_masks = []
        for t, row in enumerate(self.horizontal):
            bit = 1 << t
            mask = 0
            for i in row:
                vertical[i] |= bit
                mask |= 1 << i
            row_masks.append(mask)
        self.vertical: tuple[int, ...] = tuple(vertical)
        # item bitmask per transaction, used by the horizontal scans
        self.row_masks: tuple[int, ...] = tuple(row_masks)
        self.all_transactions = (1 << self.m) - 1
        self.all_items = (1 << self.n) - 1
        self.name: str | None = None

    @classmethod
    def from_labels(cls, rows: Sequence[Iterable[int]], name: str | None = None):
        db = cls(rows)
        db.name = name
        return db

    def item_cover(self, i: int) -> Cover:
        return Cover(self.vertical[i], self.m)

    def occurrences(self) -> int:
        return sum(len(row) for row in self.horizontal)

    def density(self) -> float:
        if not self.n or not self.m:
            return 0.0
        return self.occurrences() / (self.n * self.m)

    def to_labels(self, items: Iterable[int]) -> list[int]:
        return [self.labels[i] for i in sorted(items)]

    def from_label_set(self, labels: Iterable[int]) -> Pattern:
        try:
            return Pattern(tuple(self.index_of[x] for x in labels))
        except KeyError as exc:
            raise KeyError(f"unknown item label {exc.args[0]}") from None

    def to_fimi(self) -> str:
        return "".join(
            " ".join(str(self.labels[i]) for i in row) + "\n" for row in self.horizontal
        )

    def __repr__(self) -> str:
        return f"TransactionDatabase(n={self.n}, m={self.m})"


def parse_fimi(text: Union[bytes, str, Iterable[str]], name: str | None = None) -> TransactionDatabase:
    """Build a database from FIMI text: one transaction per line.

    Blank lines are kept as empty transactions and duplicate tokens within a
    line are collapsed.
    """
    if isinstance(text, bytes):
        text = text.decode("ascii", errors="replace")
    lines = text.splitlines() if isinstance(text, str) else [ln.rstrip("\r\n") for ln in text]
    if not lines:
        raise FimiParseError("no transactions")
    rows = []
    for lineno, line in enumerate(lines, start=1):
        row = []
        for tok in line.split():
            if not tok.isdigit():
                raise FimiParseError(f"invalid item token {tok!r}", lineno)
            row.append(int(tok))
        rows.append(row)
    return TransactionDatabase.from_labels(rows, name=name)


def read_fimi(path: Union[str, os.PathLike]) -> TransactionDatabase:
    with open(path, "rb") as fh:
        data = fh.read()
    name = os.path.splitext(os.path.basename(os.fspath(path)))[0]
    return parse_fimi(data, name=name)


def _items_of(db: TransactionDatabase, p: PatternLike) -> tuple[int, ...]:
    items = p.items if isinstance(p, Pattern) else tuple(p)
    for i in items:
        if not 0 <= i < db.n:
            raise KeyError(f"unknown item index {i}")
    return items


def cover_bits(db: TransactionDatabase, p: PatternLike) -> int:
    bits = db.all_transactions
    for i in _items_of(db, p):
        bits &= db.vertical[i]
    return bits


def cover(db: TransactionDatabase, p: PatternLike) -> Cover:
    """Transactions containing every item of ``p``; the empty pattern covers all."""
    return Cover(cover_bits(db, p), db.m)


def frequency(db: TransactionDatabase, p: PatternLike) -> int:
    return cover_bits(db, p).bit_count()


def common_items_mask(db: TransactionDatabase, tids: int) -> int:
    mask = db.all_items
    masks = db.row_masks
    while tids and mask:
        low = tids & -tids
        mask &= masks[low.bit_length() - 1]
        tids ^= low
    return mask


def _mask_to_pattern(mask: int) -> Pattern:
    items = []
    while mask:
        low = mask & -mask
        items.append(low.bit_length() - 1)
        mask ^= low
    return Pattern(tuple(items))


def common_items(db: TransactionDatabase, s: Union[Cover, int]) -> Pattern:
    """Items shared by every transaction of ``s``; the empty set yields all items."""
    if isinstance(s, Cover):
        if s.universe != db.m:
            raise ValueError("cover is not over this database's transactions")
        s = s.bits
    return _mask_to_pattern(common_items_mask(db, s))


def closure(db: TransactionDatabase, p: PatternLike) -> Pattern:
    c = cover_bits(db, p)
    return Pattern(common_items(db, c).items, c.bit_count())


def is_closed(db: TransactionDatabase, p: PatternLike) -> bool:
    items = _items_of(db, p)
    return closure(db, items).items == tuple(sorted(items))


ROUNDING = ("ceil", "floor")


def resolve_minsup(
    db_or_m: Union[TransactionDatabase, int],
    absolute: int | None = None,
    ratio: Union[float, Fraction, str, None] = None,
    rounding: str = "ceil",
) -> int:
    """Convert a minimum-support spec to an absolute transaction count.

    Exactly one of ``absolute`` (in [1, m]) or ``ratio`` (in (0, 1]) is given.
    Ratios are converted exactly (no float drift) and rounded per ``rounding``.
    """
    m = db_or_m.m if isinstance(db_or_m, TransactionDatabase) else int(db_or_m)
    if (absolute is None) == (ratio is None):
        raise ValueError("give exactly one of absolute or ratio")
    if absolute is not None:
        if isinstance(absolute, bool) or int(absolute) != absolute:
            raise ValueError(f"absolute minsup must be an integer, got {absolute!r}")
        if absolute < 1:
            raise ValueError(f"minsup must be >= 1, got {absolute}")
        if absolute > m:
            raise ValueError(f"absolute minsup {absolute} exceeds transaction count {m}")
        return int(absolute)
    r = Fraction(str(ratio)) if isinstance(ratio, float) else Fraction(ratio)
    if not 0 < r <= 1:
        raise ValueError(f"relative minsup must lie in (0, 1], got {ratio}")
    if rounding == "ceil":
        theta = math.ceil(r * m)
    elif rounding == "floor":
        theta = math.floor(r * m)
    else:
        raise ValueError(f"rounding must be one of {ROUNDING}, got {rounding!r}")
    return max(1, theta)
