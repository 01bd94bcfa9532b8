import random

import pytest

from cpmine.dataset import TransactionDatabase, parse_fimi

# Table 1 of the running example, items A..E written as 1..5
TABLE1 = "1 3 4\n2 3 5\n1 2 3 5\n2 5\n1 2 3 5\n2 3 5\n"
A, B, C, D, E = range(5)


@pytest.fixture
def table1() -> TransactionDatabase:
    return parse_fimi(TABLE1, name="table1")


def random_db(rng: random.Random, n: int, m: int, density: float) -> TransactionDatabase:
    rows = [[i + 1 for i in range(n) if rng.random() < density] for _ in range(m)]
    return TransactionDatabase.from_labels(rows, name="random")


def corpus(count: int, seed: int, max_items: int = 12, max_trans: int = 30,
           densities=(0.1, 0.3, 0.5, 0.7, 0.9)):
    """Seeded small databases; skips those where no item occurs."""
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        n = rng.randint(1, max_items)
        m = rng.randint(1, max_trans)
        density = densities[len(out) % len(densities)]
        db = random_db(rng, n, m, density)
        if db.n:
            out.append(db)
    return out
