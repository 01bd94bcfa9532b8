"""Model assembly and pattern enumeration shared by the CLI and tests."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .closedpattern import ClosedPatternPropagator
from .dataset import Pattern, TransactionDatabase
from .engine import ONE, BranchingPolicy, Model, SearchStats, solve_all
from .sidecons import DEFAULT_MODEL_CAP, ItemConstraint, build_reified_model, max_size, min_size

MODELS = ("closed", "reified")


@dataclass
class SideConstraints:
    min_size: int | None = None
    max_size: int | None = None
    required: Sequence[int] = ()
    forbidden: Sequence[int] = ()

    def accepts(self, items: Sequence[int]) -> bool:
        if self.min_size is not None and len(items) < self.min_size:
            return False
        if self.max_size is not None and len(items) > self.max_size:
            return False
        s = set(items)
        return all(i in s for i in self.required) and not any(i in s for i in self.forbidden)


@dataclass
class MineResult:
    theta: int
    patterns: list[Pattern] = field(default_factory=list)
    count: int = 0
    stats: SearchStats = field(default_factory=SearchStats)
    model: str = "closed"


def build_model(
    db: TransactionDatabase,
    theta: int,
    model: str = "closed",
    side: SideConstraints | None = None,
    debug: bool = False,
    max_cells: int = DEFAULT_MODEL_CAP,
) -> tuple[Model, Callable[[Model], int]]:
    """Return the model and a function giving the support of its current solution."""
    if model == "closed":
        m = Model(db.n)
        prop = ClosedPatternPropagator(db, theta, debug=debug)
        m.post(prop)
        support = lambda _m: prop.cover.bit_count()  # noqa: E731
    elif model == "reified":
        rm = build_reified_model(db, theta, max_cells=max_cells)
        m = rm.model
        tvars = rm.transaction_vars
        support = lambda mm: sum(1 for t in tvars if mm.dom[t] == ONE)  # noqa: E731
    else:
        raise ValueError(f"unknown model {model!r}; expected one of {MODELS}")
    items = list(range(db.n))
    if side is not None:
        if side.min_size is not None:
            m.post(min_size(side.min_size, items))
        if side.max_size is not None:
            m.post(max_size(side.max_size, items))
        for i in side.required:
            m.post(ItemConstraint(i, "required"))
        for i in side.forbidden:
            m.post(ItemConstraint(i, "forbidden"))
    return m, support


def mine(
    db: TransactionDatabase,
    theta: int,
    model: str = "closed",
    side: SideConstraints | None = None,
    policy: BranchingPolicy | None = None,
    include_empty: bool = False,
    time_limit: float | None = None,
    collect: bool = True,
    on_pattern: Callable[[Pattern], object] | None = None,
    debug: bool = False,
    max_cells: int = DEFAULT_MODEL_CAP,
) -> MineResult:
    """Enumerate the closed patterns with support >= theta, in DFS order."""
    if theta < 1:
        raise ValueError(f"theta must be >= 1, got {theta}")
    result = MineResult(theta=theta, model=model)

    def emit(p: Pattern):
        if not include_empty and not p.items:
            return
        result.count += 1
        if collect:
            result.patterns.append(p)
        if on_pattern is not None:
            on_pattern(p)

    if db.n == 0:
        # no variables: only the empty pattern can be closed
        if model not in MODELS:
            raise ValueError(f"unknown model {model!r}; expected one of {MODELS}")
        if db.m >= theta and (side is None or side.accepts(())):
            emit(Pattern((), db.m))
        result.stats = SearchStats(nodes=1, solutions=result.count)
        return result

    m, support = build_model(db, theta, model, side, debug=debug, max_cells=max_cells)
    n = db.n

    def on_solution(mm: Model):
        dom = mm.dom
        emit(Pattern(tuple(i for i in range(n) if dom[i] == ONE), support(mm)))

    result.stats = solve_all(m, on_solution, policy=policy, time_limit=time_limit)
    return result


def pattern_set(patterns: Iterable[Pattern]) -> set[tuple[tuple[int, ...], int]]:
    return {(p.items, p.frequency) for p in patterns}
