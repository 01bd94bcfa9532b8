"""User constraints (pattern size, item membership) and the reified baseline.

The reified baseline adds one boolean per transaction and channels it with
the item variables through ``b <=> (all xs are 0)`` constraints:

* ``T_t <=> no item outside transaction t is selected``
* ``sum(T) >= theta``
* ``P_i <=> no selected transaction lacks item i``   (closedness)
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .dataset import TransactionDatabase
from .engine import BOTH, ONE, ZERO, Model, Propagator


class SizeConstraint(Propagator):
    """``min``: at least ``bound`` selected items; ``max``: at most ``bound``."""

    def __init__(self, kind: str, bound: int, item_vars: Sequence[int]):
        if kind not in ("min", "max"):
            raise ValueError(f"size constraint kind must be 'min' or 'max', got {kind!r}")
        n = len(item_vars)
        lo = 1 if kind == "min" else 0
        if not lo <= bound <= n:
            raise ValueError(f"{kind}Size bound {bound} outside [{lo}, {n}]")
        self.kind = kind
        self.bound = bound
        self.scope = list(item_vars)
        self.name = f"{kind}-size"

    def propagate(self, model: Model, changed: list[int], root: bool) -> bool:
        dom = model.dom
        ones = free = 0
        for v in self.scope:
            d = dom[v]
            if d == ONE:
                ones += 1
            elif d == BOTH:
                free += 1
        if self.kind == "min":
            if ones + free < self.bound:
                return False
            if free and ones + free == self.bound:
                for v in self.scope:
                    if dom[v] == BOTH:
                        model.fix(v, ONE)
        else:
            if ones > self.bound:
                return False
            if free and ones == self.bound:
                for v in self.scope:
                    if dom[v] == BOTH:
                        model.fix(v, ZERO)
        return True


def min_size(bound: int, item_vars: Sequence[int]) -> SizeConstraint:
    return SizeConstraint("min", bound, item_vars)


def max_size(bound: int, item_vars: Sequence[int]) -> SizeConstraint:
    return SizeConstraint("max", bound, item_vars)


class ItemConstraint(Propagator):
    """Force an item in (``required``) or out (``forbidden``) of the pattern."""

    def __init__(self, var: int, polarity: str):
        if polarity not in ("required", "forbidden"):
            raise ValueError(f"polarity must be 'required' or 'forbidden', got {polarity!r}")
        self.var = var
        self.polarity = polarity
        self.scope = [var]
        self.name = f"item-{polarity}"

    def propagate(self, model: Model, changed: list[int], root: bool) -> bool:
        return model.fix(self.var, ONE if self.polarity == "required" else ZERO)


class ReifiedNoneSelected(Propagator):
    """``b <=> sum(xs) == 0`` over booleans."""

    name = "reified-none"

    def __init__(self, b: int, xs: Sequence[int]):
        self.b = b
        self.xs = list(xs)
        self.scope = [b, *self.xs]

    def propagate(self, model: Model, changed: list[int], root: bool) -> bool:
        dom = model.dom
        free_x = None
        n_free = 0
        for x in self.xs:
            d = dom[x]
            if d == ONE:
                return model.fix(self.b, ZERO)
            if d == BOTH:
                n_free += 1
                free_x = x
        if n_free == 0:
            return model.fix(self.b, ONE)
        db_ = dom[self.b]
        if db_ == ONE:
            for x in self.xs:
                if dom[x] == BOTH:
                    model.fix(x, ZERO)
        elif db_ == ZERO and n_free == 1:
            model.fix(free_x, ONE)
        return True


class SumAtLeast(Propagator):
    """``sum(xs) >= k`` over booleans."""

    name = "sum-at-least"

    def __init__(self, xs: Sequence[int], k: int):
        self.scope = list(xs)
        self.k = k

    def propagate(self, model: Model, changed: list[int], root: bool) -> bool:
        dom = model.dom
        possible = sum(1 for x in self.scope if dom[x] != ZERO)
        if possible < self.k:
            return False
        if possible == self.k:
            for x in self.scope:
                if dom[x] == BOTH:
                    model.fix(x, ONE)
        return True


DEFAULT_MODEL_CAP = 2_000_000


@dataclass
class ReifiedModel:
    model: Model
    item_vars: list[int]
    transaction_vars: list[int]


def build_reified_model(
    db: TransactionDatabase, theta: int, max_cells: int = DEFAULT_MODEL_CAP
) -> ReifiedModel:
    """Item variables ``0..n-1``, transaction variables ``n..n+m-1``."""
    if db.m == 0 or db.n == 0:
        raise ValueError("reified model needs a database with items and transactions")
    if not 1 <= theta:
        raise ValueError(f"theta must be >= 1, got {theta}")
    if db.n * db.m > max_cells:
        raise MemoryError(
            f"reified model too large: n*m = {db.n * db.m} exceeds cap {max_cells}"
        )
    n, m = db.n, db.m
    items = list(range(n))
    trans = list(range(n, n + m))
    model = Model(n + m, decision_vars=items)
    for t, row in enumerate(db.horizontal):
        inside = set(row)
        model.post(ReifiedNoneSelected(trans[t], [i for i in items if i not in inside]))
    model.post(SumAtLeast(trans, theta))
    for i in items:
        lacking = [trans[t] for t in range(m) if not db.vertical[i] >> t & 1]
        model.post(ReifiedNoneSelected(i, lacking))
    return ReifiedModel(model, items, trans)
