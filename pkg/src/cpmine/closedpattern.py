"""The ClosedPattern global constraint over boolean item variables.

``P_i = 1`` means item ``i`` is in the pattern.  The propagator keeps the
cover of the present items incrementally and enforces domain consistency
with three rules over the free items ``i``, writing ``V(i)`` for the cover of
``i`` inside the current cover:

* ``|V(i)| == |cover|``  (full extension)            -> ``P_i = 1``
* ``|V(i)| < theta``                                 -> ``P_i = 0``
* ``V(i) ⊆ V(j)`` for some absent item ``j``          -> ``P_i = 0``

When the only news is that some items became absent, just the last rule is
applied against those items.
"""
from __future__ import annotations

from typing import Sequence, Union

from .dataset import Cover, TransactionDatabase, closure, cover_bits, frequency
from .engine import BOTH, ONE, ZERO, Model, PartialAssignment, Propagator, TrailError


class ClosedPatternPropagator(Propagator):
    name = "closed-pattern"

    def __init__(
        self,
        db: TransactionDatabase,
        theta: int,
        item_vars: Sequence[int] | None = None,
        debug: bool = False,
    ):
        if int(theta) != theta or theta < 1:
            raise ValueError(f"theta must be an integer >= 1, got {theta!r}")
        self.db = db
        self.theta = int(theta)
        self.item_vars = list(range(db.n)) if item_vars is None else list(item_vars)
        if len(self.item_vars) != db.n:
            raise ValueError("need exactly one variable per item")
        self.scope = self.item_vars
        self.item_of = {v: i for i, v in enumerate(self.item_vars)}
        self.debug = debug
        self.cover = db.all_transactions
        self.plus = 0  # bitmask of items intersected into self.cover
        # entries (level, cover, plus), saved on first change within a level
        self.cover_stack: list[tuple[int, int, int]] = []
        self._level = 0
        self.max_stack_depth = 0

    # -- level events -----------------------------------------------------
    def push(self) -> None:
        self._level += 1

    def pop(self) -> None:
        if self._level == 0:
            raise TrailError("closed-pattern: pop without matching push")
        stack = self.cover_stack
        if stack and stack[-1][0] == self._level:
            _, self.cover, self.plus = stack.pop()
        self._level -= 1

    def _save(self) -> None:
        stack = self.cover_stack
        if not stack or stack[-1][0] != self._level:
            stack.append((self._level, self.cover, self.plus))
            if len(stack) > self.max_stack_depth:
                self.max_stack_depth = len(stack)

    # -- queries ----------------------------------------------------------
    @property
    def current_cover(self) -> Cover:
        return Cover(self.cover, self.db.m)

    def projected_cover(self, i: int) -> Cover:
        return Cover(self.cover & self.db.vertical[i], self.db.m)

    def projected_support(self, var: int) -> int:
        return (self.cover & self.db.vertical[self.item_of[var]]).bit_count()

    def sigma(self, model: Model) -> PartialAssignment:
        a = model.assignment(self.item_vars)
        item = self.item_of
        return PartialAssignment(
            frozenset(item[v] for v in a.sigma_plus),
            frozenset(item[v] for v in a.sigma_minus),
            frozenset(item[v] for v in a.sigma_star),
        )

    def check_consistency(self, model: Model) -> bool:
        return check_consistency(self.db, self.theta, self.sigma(model))

    def check_invariants(self, model: Model) -> None:
        """Assert the cached cover equals the cover of the present items."""
        plus_items = [i for i, v in enumerate(self.item_vars) if model.dom[v] == ONE]
        expected = cover_bits(self.db, plus_items)
        if self.cover != expected:
            raise AssertionError("cached cover differs from cover(sigma+)")
        if self.max_stack_depth > self.db.n:
            raise AssertionError("cover stack deeper than the item count")

    # -- filtering --------------------------------------------------------
    def propagate(self, model: Model, changed: list[int], root: bool) -> bool:
        dom = model.dom
        item_of = self.item_of
        vertical = self.db.vertical
        new_zeros = []
        grew = False
        for v in changed:
            i = item_of[v]
            if dom[v] == ONE:
                if not self.plus >> i & 1:
                    if not grew:
                        self._save()
                        grew = True
                    self.cover &= vertical[i]
                    self.plus |= 1 << i
            else:
                new_zeros.append(i)
        if grew or root:
            ok = self.filter(model)
        elif new_zeros:
            ok = self._filter_absent(model, new_zeros)
        else:
            ok = True
        if self.debug and ok:
            expected = cover_bits(self.db, [i for i in range(self.db.n) if self.plus >> i & 1])
            assert self.cover == expected, "incremental cover drifted"
        return ok

    def _filter_absent(self, model: Model, absent: list[int]) -> bool:
        dom = model.dom
        vars_ = self.item_vars
        vertical = self.db.vertical
        c = self.cover
        for k in absent:
            pk = c & vertical[k]
            if pk == c:
                # an absent full extension: no closed completion exists
                return False
            ck = pk.bit_count()
            if ck < self.theta:
                continue
            for i, v in enumerate(vars_):
                if dom[v] == BOTH:
                    pi = c & vertical[i]
                    if pi.bit_count() <= ck and pi & pk == pi:
                        model.fix(v, ZERO)
        return True

    def filter(self, model: Model) -> bool:
        """One pass of all three rules over the free items."""
        c = self.cover
        cc = c.bit_count()
        theta = self.theta
        if cc < theta:
            return False
        dom = model.dom
        vars_ = self.item_vars
        vertical = self.db.vertical
        free = []
        absent: list[tuple[int, int]] = []
        for i, v in enumerate(vars_):
            d = dom[v]
            if d == BOTH:
                free.append(i)
            elif d == ZERO:
                pj = c & vertical[i]
                if pj == c:
                    return False
                cj = pj.bit_count()
                # free items left after rule 2 have support >= theta, so
                # smaller projections can never contain them
                if cj >= theta:
                    absent.append((cj, pj))
        for i in free:
            v = vars_[i]
            pi = c & vertical[i]
            ci = pi.bit_count()
            if ci == cc:
                model.fix(v, ONE)
                if not self.plus >> i & 1:
                    self._save()
                    self.plus |= 1 << i
            elif ci < theta:
                model.fix(v, ZERO)
            else:
                for cj, pj in absent:
                    if cj >= ci and pi & pj == pi:
                        model.fix(v, ZERO)
                        absent.append((ci, pi))
                        break
        return True


def _sigma_of(assignment: Union[PartialAssignment, Sequence[int]], n: int) -> PartialAssignment:
    if isinstance(assignment, PartialAssignment):
        return assignment
    values = list(assignment)
    if len(values) != n:
        raise ValueError(f"expected {n} values, got {len(values)}")
    plus = frozenset(i for i, x in enumerate(values) if x == 1)
    minus = frozenset(i for i, x in enumerate(values) if x == 0)
    star = frozenset(range(n)) - plus - minus
    return PartialAssignment(plus, minus, star)


def check_consistency(
    db: TransactionDatabase, theta: int, assignment: Union[PartialAssignment, Sequence[int]]
) -> bool:
    """True iff sigma+ is frequent and no absent item is a full extension of it.

    Sequence inputs use 1/0 for fixed and any other value (e.g. None) for free.
    """
    sigma = _sigma_of(assignment, db.n)
    c = cover_bits(db, sorted(sigma.sigma_plus))
    if c.bit_count() < theta:
        return False
    return not any(c & db.vertical[j] == c for j in sigma.sigma_minus)


def is_solution_closed_frequent(
    db: TransactionDatabase, theta: int, assignment: Union[PartialAssignment, Sequence[int]]
) -> bool:
    sigma = _sigma_of(assignment, db.n)
    if sigma.sigma_star:
        raise ValueError("assignment is not complete")
    items = tuple(sorted(sigma.sigma_plus))
    return frequency(db, items) >= theta and closure(db, items).items == items
