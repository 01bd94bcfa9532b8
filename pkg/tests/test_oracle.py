import pytest

import random

from cpmine.dataset import TransactionDatabase, closure, frequency
from cpmine.engine import BOTH, ONE, ZERO
from cpmine.oracle import (
    DCViolation, OracleTooLarge, brute_force_closed, brute_force_frequent,
    check_domain_consistency, counts_csv, derive_counts,
)

from conftest import A, B, C, D, E, corpus, random_db


def test_brute_force_table1(table1):
    res = brute_force_closed(table1, 2)
    # AC occurs in rows 1, 3 and 5 of the table, so its support is 3
    assert set(res.patterns) - {((), 6)} == {
        ((C,), 5), ((B, E), 5), ((B, C, E), 4), ((A, B, C, E), 2), ((A, C), 3)}
    assert ((), 6) in res.patterns  # no item occurs everywhere
    assert len(brute_force_closed(table1, 7)) == 0
    assert set(brute_force_closed(table1, 5).patterns) - {((), 6)} == {((C,), 5), ((B, E), 5)}


def test_refuses_large():
    db = TransactionDatabase([list(range(21))])
    with pytest.raises(OracleTooLarge):
        brute_force_closed(db, 1)


def test_dc_after_example3_propagation(table1):
    doms = [BOTH, ONE, BOTH, ZERO, ONE]
    assert check_domain_consistency(table1, 2, doms) is None


def test_dc_violation_unpropagated(table1):
    # with everything free, D=1 has no support at theta=2
    assert check_domain_consistency(table1, 2, [BOTH] * 5) == DCViolation(D, ONE)


def test_dc_vacuous_when_fixed(table1):
    assert check_domain_consistency(table1, 2, [0, 1, 1, 0, 1]) is None


def test_derive_counts_table1(table1):
    rows = derive_counts(table1, range(1, 8))
    assert len(rows) == 7 and dict(rows)[2] == 5 and dict(rows)[7] == 0
    assert dict(derive_counts(table1, [2], include_empty=True))[2] == 6
    assert counts_csv(rows[:1]) == "theta,patterns\n1,6\n"


def test_derive_counts_pinned_regression():
    db = random_db(random.Random(2024), 10, 25, 0.3)
    # computed once by this oracle and frozen
    assert (db.n, db.m) == (10, 25)
    assert derive_counts(db, [3]) == [(3, 26)]


@pytest.mark.parametrize("db", corpus(25, seed=9, max_items=9, max_trans=20),
                         ids=lambda d: f"n{d.n}m{d.m}")
def test_oracle_self_consistency(db):
    prev = None
    for theta in range(1, db.m + 2):
        res = brute_force_closed(db, theta)
        # every entry closed and frequent, verified through the vertical path
        for items, s in res.patterns:
            assert closure(db, items).items == items and frequency(db, items) == s >= theta
        # the result is exactly the closure image of the frequent patterns
        freq = brute_force_frequent(db, theta)
        assert {closure(db, p).items for p in freq} == res.itemsets()
        if prev is not None:
            assert len(res) <= prev
        prev = len(res)
