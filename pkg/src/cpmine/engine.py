"""A small boolean CSP engine: domain store, trail, fixpoint loop, DFS.

Domains are stored as ints (``ZERO``, ``ONE``, ``BOTH``) in a flat list.  Every
fixing is appended to a trail; ``push``/``pop`` mark and undo levels.  A
propagator subscribes to a set of variables and is woken with the list of
variables of its scope fixed since it last ran.
"""
from __future__ import annotations

import enum
import time
from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence


class BoolDomain(enum.IntEnum):
    ZERO_ONLY = 0
    ONE_ONLY = 1
    BOTH = 2


ZERO, ONE, BOTH = 0, 1, 2


class TrailError(RuntimeError):
    """Level bookkeeping was violated (e.g. pop without a matching push)."""


class Propagator:
    """Base class.  Subclasses set ``scope`` and implement ``propagate``.

    ``propagate(model, changed, root)`` returns False on failure.  ``changed``
    lists the scope variables fixed since the previous call (by anyone but
    this propagator).  Stateful propagators override ``push``/``pop``.
    """

    scope: Sequence[int] = ()
    name = "propagator"

    def propagate(self, model: "Model", changed: list[int], root: bool) -> bool:
        raise NotImplementedError

    def push(self) -> None:
        pass

    def pop(self) -> None:
        pass


@dataclass(frozen=True)
class PartialAssignment:
    sigma_plus: frozenset[int]
    sigma_minus: frozenset[int]
    sigma_star: frozenset[int]


VAR_ORDERS = ("lexicographic", "max_current_cover", "min_current_cover")
VALUE_ORDERS = ("one_first", "zero_first")


@dataclass(frozen=True)
class BranchingPolicy:
    variable_order: str = "lexicographic"
    value_order: str = "one_first"

    def __post_init__(self):
        if self.variable_order not in VAR_ORDERS:
            raise ValueError(f"unknown variable order {self.variable_order!r}")
        if self.value_order not in VALUE_ORDERS:
            raise ValueError(f"unknown value order {self.value_order!r}")


@dataclass
class SearchStats:
    nodes: int = 0
    propagations: int = 0
    failures: int = 0
    solutions: int = 0
    elapsed: float = 0.0
    completed: bool = True
    max_depth: int = 0

    def counters(self) -> tuple[int, int, int, int]:
        return (self.nodes, self.propagations, self.failures, self.solutions)


class Model:
    """Boolean variables, posted propagators and the search state."""

    def __init__(self, n_vars: int, decision_vars: Iterable[int] | None = None):
        if n_vars < 0:
            raise ValueError("negative variable count")
        self.n_vars = n_vars
        self.dom: list[int] = [BOTH] * n_vars
        self.trail: list[int] = []
        self.marks: list[int] = []
        self.propagators: list[Propagator] = []
        self._watchers: list[list[int]] = [[] for _ in range(n_vars)]
        self._cursor: list[int] = []
        self.decision_vars: list[int] = (
            list(range(n_vars)) if decision_vars is None else list(decision_vars)
        )
        self.stats = SearchStats()

    # -- construction -----------------------------------------------------
    def post(self, propagator: Propagator) -> "Model":
        pid = len(self.propagators)
        for v in propagator.scope:
            if not 0 <= v < self.n_vars:
                raise ValueError(f"{propagator.name}: variable {v} does not exist")
            self._watchers[v].append(pid)
        self.propagators.append(propagator)
        self._cursor.append(len(self.trail))
        return self

    # -- domain store -----------------------------------------------------
    def value(self, v: int) -> int:
        return self.dom[v]

    def is_fixed(self, v: int) -> bool:
        return self.dom[v] != BOTH

    def fix(self, v: int, value: int) -> bool:
        """Restrict ``v`` to ``value``; returns False if that empties the domain."""
        d = self.dom[v]
        if d == BOTH:
            self.dom[v] = value
            self.trail.append(v)
            return True
        return d == value

    def snapshot_domains(self) -> list[BoolDomain]:
        return [BoolDomain(d) for d in self.dom]

    def assignment(self, variables: Iterable[int] | None = None) -> PartialAssignment:
        vs = range(self.n_vars) if variables is None else variables
        plus, minus, star = [], [], []
        for v in vs:
            (minus, plus, star)[self.dom[v]].append(v)
        return PartialAssignment(frozenset(plus), frozenset(minus), frozenset(star))

    def ones(self) -> list[int]:
        return [v for v, d in enumerate(self.dom) if d == ONE]

    @property
    def level(self) -> int:
        return len(self.marks)

    def push(self) -> None:
        self.marks.append(len(self.trail))
        for p in self.propagators:
            p.push()

    def pop(self) -> None:
        if not self.marks:
            raise TrailError("pop without matching push")
        mark = self.marks.pop()
        dom, trail = self.dom, self.trail
        while len(trail) > mark:
            dom[trail.pop()] = BOTH
        for p in self.propagators:
            p.pop()
        self._cursor = [mark] * len(self.propagators)

    # -- propagation ------------------------------------------------------
    def propagate(self, root: bool = False) -> bool:
        """Run all propagators to a common fixpoint; False on failure.

        With ``root`` every propagator is invoked once even without pending
        events (the initial filtering).
        """
        props = self.propagators
        trail = self.trail
        queue: deque[int] = deque()
        queued = [False] * len(props)
        pending: list[list[int]] = [[] for _ in props]
        if root:
            for pid in range(len(props)):
                queue.append(pid)
                queued[pid] = True
        self._collect(queue, queued, pending)
        stats = self.stats
        while queue:
            pid = queue.popleft()
            queued[pid] = False
            changed, pending[pid] = pending[pid], []
            stats.propagations += 1
            start = len(trail)
            ok = props[pid].propagate(self, changed, root)
            # the propagator has absorbed its own fixings
            self._cursor[pid] = len(trail)
            if not ok:
                self._sync_cursors()
                return False
            if len(trail) > start:
                self._collect(queue, queued, pending, skip=pid, since=start)
        self._sync_cursors()
        return True

    def _collect(self, queue, queued, pending, skip=None, since=None):
        trail = self.trail
        if since is None:
            since = min(self._cursor, default=len(trail))
        watchers = self._watchers
        cursor = self._cursor
        for pos in range(since, len(trail)):
            v = trail[pos]
            for pid in watchers[v]:
                if pid == skip or pos < cursor[pid]:
                    continue
                pending[pid].append(v)
                if not queued[pid]:
                    queued[pid] = True
                    queue.append(pid)

    def _sync_cursors(self):
        n = len(self.trail)
        self._cursor = [n] * len(self.propagators)

    def decide(self, v: int, value: int) -> bool:
        """Fix ``v`` := ``value`` then propagate.  Caller pushes a level first."""
        if not self.fix(v, value):
            return False
        return self.propagate()

    # -- search -------------------------------------------------------
    def _select(self, policy: BranchingPolicy) -> int | None:
        dom = self.dom
        free = [v for v in self.decision_vars if dom[v] == BOTH]
        if not free:
            free = [v for v in range(self.n_vars) if dom[v] == BOTH]
            if not free:
                return None
        if policy.variable_order == "lexicographic":
            return free[0]
        scorer = next((p for p in self.propagators if hasattr(p, "projected_support")), None)
        if scorer is None:
            raise ValueError(f"{policy.variable_order} needs a cover-aware propagator")
        scores = [scorer.projected_support(v) for v in free]
        if policy.variable_order == "max_current_cover":
            best = max(scores)
        else:
            best = min(scores)
        return free[scores.index(best)]


def solve_all(
    model: Model,
    on_solution: Callable[[Model], object] | None = None,
    policy: BranchingPolicy | None = None,
    time_limit: float | None = None,
    on_fixpoint: Callable[[Model], object] | None = None,
) -> SearchStats:
    """Enumerate every complete assignment accepted by all propagators.

    Depth-first with binary branching.  ``on_solution`` gets the model with
    all variables fixed; ``on_fixpoint`` is called after each successful
    propagation (root included).  If ``time_limit`` (seconds) runs out the
    search stops and ``stats.completed`` is False.  Domains are restored to
    their pre-search state on return.
    """
    if model.n_vars < 1:
        raise ValueError("model has no variables")
    if model.marks:
        raise TrailError("solve_all must start at level 0")
    policy = policy or BranchingPolicy()
    first = ONE if policy.value_order == "one_first" else ZERO
    stats = model.stats = SearchStats()
    t0 = time.perf_counter()
    deadline = None if time_limit is None else t0 + time_limit

    # the root filtering lives at level 1 so that it can be undone
    model.push()
    stats.nodes = 1
    ok = model.propagate(root=True)
    if not ok:
        stats.failures += 1
    stack: list[list[int]] = []  # [var, branches_left]
    while True:
        if ok:
            if on_fixpoint is not None:
                on_fixpoint(model)
            v = model._select(policy)
            if v is not None:
                if deadline is not None and (stats.nodes & 63) == 0 and time.perf_counter() > deadline:
                    stats.completed = False
                    break
                model.push()
                stack.append([v, 1])
                if len(stack) > stats.max_depth:
                    stats.max_depth = len(stack)
                stats.nodes += 1
                ok = model.decide(v, first)
                if not ok:
                    stats.failures += 1
                continue
            stats.solutions += 1
            if on_solution is not None:
                on_solution(model)
        while stack and stack[-1][1] == 0:
            stack.pop()
            model.pop()
        if not stack:
            break
        frame = stack[-1]
        frame[1] = 0
        model.pop()
        model.push()
        stats.nodes += 1
        ok = model.decide(frame[0], 1 - first)
        if not ok:
            stats.failures += 1
    while model.level:
        model.pop()
    stats.elapsed = time.perf_counter() - t0
    return stats
