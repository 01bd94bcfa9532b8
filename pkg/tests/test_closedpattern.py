import random

import pytest

from cpmine.closedpattern import (
    ClosedPatternPropagator, check_consistency, is_solution_closed_frequent,
)
from cpmine.dataset import cover, cover_bits
from cpmine.engine import BOTH, ONE, ZERO, Model, PartialAssignment, TrailError, solve_all
from cpmine.oracle import brute_force_closed, check_domain_consistency

from conftest import A, B, C, D, E, corpus


def closed_model(db, theta, debug=True):
    prop = ClosedPatternPropagator(db, theta, debug=debug)
    return Model(db.n).post(prop), prop


def sigma(plus=(), minus=(), n=5):
    star = set(range(n)) - set(plus) - set(minus)
    return PartialAssignment(frozenset(plus), frozenset(minus), frozenset(star))


def test_theta_must_be_positive(table1):
    with pytest.raises(ValueError):
        ClosedPatternPropagator(table1, 0)


def test_check_consistency_examples(table1):
    assert check_consistency(table1, 2, sigma(plus=(B, C, E), minus=(A, D)))
    assert not check_consistency(table1, 7, sigma())
    assert not check_consistency(table1, 2, sigma(plus=(B,), minus=(E,)))
    assert check_consistency(table1, 2, [None, 1, None, None, None])


def test_example3_trace(table1):
    m, prop = closed_model(table1, 2)
    m.push()
    assert m.propagate(root=True)
    m.push()
    assert m.decide(B, ONE)
    assert (m.dom[D], m.dom[E]) == (ZERO, ONE)
    assert prop.sigma(m).sigma_plus == {B, E} and prop.sigma(m).sigma_minus == {D}
    m.push()
    assert m.decide(C, ZERO)
    assert m.dom[A] == ZERO
    assert prop.projected_cover(A).issubset(prop.projected_cover(C))


def test_root_theta1_prunes_nothing(table1):
    m, _ = closed_model(table1, 1)
    m.push()
    assert m.propagate(root=True)
    assert m.dom == [BOTH] * 5


def test_save_and_restore(table1):
    m, prop = closed_model(table1, 1)
    root_cover = prop.cover
    m.push()
    m.propagate(root=True)
    m.push()
    m.decide(B, ONE)
    assert prop.current_cover == cover(table1, [B, E])
    m.pop()
    assert prop.cover == root_cover == cover_bits(table1, ())
    m.pop()
    with pytest.raises(TrailError):
        prop.pop()


def test_stack_depth_bounded_by_items(table1):
    m, prop = closed_model(table1, 1)
    for v in range(5):
        m.push()
        m.decide(v, ONE)
    assert prop.max_stack_depth <= table1.n
    for _ in range(5):
        m.pop()
    assert prop.cover == table1.all_transactions and not prop.cover_stack


def test_is_solution_examples(table1):
    assert is_solution_closed_frequent(table1, 2, [0, 1, 1, 0, 1])
    assert is_solution_closed_frequent(table1, 2, [0, 0, 0, 0, 0])
    assert not is_solution_closed_frequent(table1, 6, [0, 1, 0, 0, 1])
    with pytest.raises(ValueError):
        is_solution_closed_frequent(table1, 2, [0, 1, None, 0, 1])


def node_checks(db, theta):
    """Run a full search, checking propagator properties at every fixpoint."""
    m, prop = closed_model(db, theta)
    closed = brute_force_closed(db, theta).itemsets()
    seen = {"nodes": 0}

    def at_fixpoint(mm):
        seen["nodes"] += 1
        prop.check_invariants(mm)
        assert prop.check_consistency(mm)
        # rule-1 cover invariance: any fixed-to-1 item leaves the cover as is
        assert all(prop.cover & db.vertical[i] == prop.cover
                   for i in range(db.n) if mm.dom[i] == ONE)
        before = list(mm.dom)
        assert prop.filter(mm)
        assert mm.dom == before, "second pass changed domains"
        assert check_domain_consistency(db, theta, mm.dom, closed) is None

    sols = []
    solve_all(m, lambda mm: sols.append(tuple(i for i in range(db.n) if mm.dom[i] == ONE)),
              on_fixpoint=at_fixpoint)
    return sols, closed, seen["nodes"]


@pytest.mark.parametrize("theta", range(1, 7))
def test_table1_all_thetas(table1, theta):
    sols, closed, _ = node_checks(table1, theta)
    assert set(sols) == closed and len(sols) == len(closed)
    for s in sols:
        vals = [1 if i in s else 0 for i in range(5)]
        assert is_solution_closed_frequent(table1, theta, vals)


@pytest.mark.parametrize("db", corpus(12, seed=11, max_items=8, max_trans=15),
                         ids=lambda d: f"n{d.n}m{d.m}")
def test_small_random_dbs(db):
    for theta in range(1, db.m + 1):
        sols, closed, _ = node_checks(db, theta)
        assert set(sols) == closed


def test_sigma_monotone_along_paths(table1):
    m, prop = closed_model(table1, 1)
    stack = []
    violations = []

    def at_fixpoint(mm):
        s = prop.sigma(mm)
        level = mm.level
        del stack[level - 1:]
        if stack:
            prev = stack[-1]
            if not (prev.sigma_plus <= s.sigma_plus and prev.sigma_minus <= s.sigma_minus
                    and s.sigma_star <= prev.sigma_star):
                violations.append((prev, s))
        stack.append(s)

    solve_all(m, on_fixpoint=at_fixpoint)
    assert not violations


def test_external_absent_full_extension_fails(table1):
    m, prop = closed_model(table1, 2, debug=True)
    m.push()
    m.propagate(root=True)
    m.push()
    m.fix(B, ONE)
    m.fix(E, ZERO)
    assert not m.propagate()


def test_trail_fuzz_short(table1):
    rng = random.Random(0)
    m, prop = closed_model(table1, 2)
    root_dom = list(m.dom)
    for _ in range(300):
        depth = 0
        for _ in range(rng.randint(0, 6)):
            m.push()
            depth += 1
            free = [v for v in range(5) if m.dom[v] == BOTH]
            if not free:
                break
            if not m.decide(rng.choice(free), rng.randint(0, 1)):
                break
        for _ in range(depth):
            m.pop()
        assert m.dom == root_dom and prop.cover == table1.all_transactions
