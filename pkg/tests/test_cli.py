import json
import random
from fractions import Fraction

import pytest

from cpmine.bench import MinSup
from cpmine.cli import (
    EXIT_CONFIG, EXIT_OK, EXIT_PARSE, EXIT_TIMEOUT, main, oracle_check,
)
from cpmine.dataset import TransactionDatabase

from conftest import TABLE1, corpus, random_db


@pytest.fixture
def t1file(tmp_path):
    p = tmp_path / "table1.dat"
    p.write_text(TABLE1)
    return str(p)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_mine_table1(capsys, t1file):
    code, out, _ = run(capsys, "mine", t1file, "--minsup", "2")
    lines = out.splitlines()
    assert code == EXIT_OK and len(lines) == 5
    assert "2 3 5 (4)" in lines
    assert set(lines) == {"3 (5)", "2 5 (5)", "2 3 5 (4)", "1 2 3 5 (2)", "1 3 (3)"}


def test_count_only(capsys, t1file):
    assert run(capsys, "mine", t1file, "--minsup", "2", "--count-only")[1] == "5\n"


def test_min_size(capsys, t1file):
    _, out, _ = run(capsys, "mine", t1file, "--minsup", "2", "--min-size", "3", "--sort")
    assert out.splitlines() == ["1 2 3 5 (2)", "2 3 5 (4)"]


def test_include_empty_flag(capsys, t1file):
    _, out, _ = run(capsys, "mine", t1file, "--minsup", "2", "--include-empty", "--sort")
    assert out.splitlines()[0] == "(6)" and len(out.splitlines()) == 6


def test_require_forbid_labels(capsys, t1file):
    _, out, _ = run(capsys, "mine", t1file, "--minsup", "2", "--require", "1", "--sort")
    assert out.splitlines() == ["1 2 3 5 (2)", "1 3 (3)"]
    assert run(capsys, "mine", t1file, "--minsup", "2", "--require", "9")[0] == EXIT_CONFIG


def test_csv_and_json_formats(capsys, t1file):
    _, out, _ = run(capsys, "mine", t1file, "--minsup", "2", "--format", "csv", "--sort")
    lines = out.splitlines()
    assert lines[0] == "# schema: cpmine.patterns/1" and lines[1] == "items,frequency"
    assert lines[2] == "1 2 3 5,2" and len(lines) == 7
    _, out, _ = run(capsys, "mine", t1file, "--minsup", "2", "--format", "json")
    doc = json.loads(out)
    assert doc["schema"] == "cpmine.patterns/1" and doc["count"] == 5 and doc["completed"]
    assert {"items": [2, 3, 5], "frequency": 4} in doc["patterns"]


def test_stats_on_stderr(capsys, t1file):
    _, _, err = run(capsys, "mine", t1file, "--minsup", "2", "--stats")
    assert "patterns=5" in err and "nodes=" in err and "propagations=" in err


def test_output_deterministic(capsys, tmp_path):
    db = random_db(random.Random(4), 12, 60, 0.4)
    p = tmp_path / "r.dat"
    p.write_text(db.to_fimi())
    outs = [run(capsys, "mine", str(p), "--minsup", "3")[1] for _ in range(2)]
    assert outs[0] == outs[1] and outs[0]


@pytest.mark.parametrize("seed", range(6))
def test_count_and_model_agreement(capsys, tmp_path, seed):
    db = random_db(random.Random(seed), 9, 25, 0.5)
    p = tmp_path / "r.dat"
    p.write_text(db.to_fimi())
    for minsup in ("1", "3", "40%"):
        full = run(capsys, "mine", str(p), "--minsup", minsup, "--sort")[1]
        count = run(capsys, "mine", str(p), "--minsup", minsup, "--count-only")[1]
        reified = run(capsys, "mine", str(p), "--minsup", minsup, "--sort", "--model", "reified")[1]
        assert int(count) == len(full.splitlines())
        assert reified == full


def test_parse_error_exit(capsys, tmp_path):
    p = tmp_path / "bad.dat"
    p.write_text("1 2\n3 q\n")
    code, _, err = run(capsys, "mine", str(p), "--minsup", "1")
    assert code == EXIT_PARSE and "line 2" in err
    assert run(capsys, "mine", str(tmp_path / "missing.dat"), "--minsup", "1")[0] == EXIT_PARSE


@pytest.mark.parametrize("minsup", ["abc", "0", "7", "0%", "150%", "1.5"])
def test_invalid_minsup(capsys, t1file, minsup):
    assert run(capsys, "mine", t1file, "--minsup", minsup)[0] == EXIT_CONFIG


def test_time_limit_exit(capsys, tmp_path):
    db = random_db(random.Random(1), 20, 300, 0.6)
    p = tmp_path / "big.dat"
    p.write_text(db.to_fimi())
    code, out, err = run(capsys, "mine", str(p), "--minsup", "1", "--time-limit", "0")
    assert code == EXIT_TIMEOUT and "incomplete" in err


def test_oracle_check_cli(capsys, t1file):
    assert run(capsys, "oracle-check", t1file, "--minsup", "2")[1] == "ok\n"
    code, _, err = run(capsys, "mine", t1file, "--minsup", "2", "--oracle-check")
    assert code == EXIT_OK and err.startswith("ok")


def test_oracle_check_detects_suppressed_empty(table1):
    diff = oracle_check(table1, 2, include_empty=True, miner_include_empty=False)
    assert diff == "missing pattern [] (6)"


def test_oracle_check_sweep():
    for db in corpus(50, seed=77, max_items=10, max_trans=30):
        for theta in range(1, db.m + 1):
            assert oracle_check(db, theta) is None, (db.to_fimi(), theta)


def test_oracle_check_refuses_large(capsys, tmp_path):
    p = tmp_path / "wide.dat"
    p.write_text(" ".join(str(i) for i in range(1, 30)) + "\n")
    code, out, err = run(capsys, "oracle-check", str(p), "--minsup", "1")
    assert code == EXIT_CONFIG and "refuses" in err


def test_counts_command(capsys, t1file):
    code, out, _ = run(capsys, "counts", t1file)
    assert out.splitlines()[:3] == ["theta,patterns", "1,6", "2,5"]


def test_minsup_parsing():
    assert MinSup.parse("30%").ratio == Fraction(3, 10)
    assert MinSup.parse("0.3r").ratio == Fraction(3, 10)
    assert MinSup.parse("2").absolute == 2
    assert MinSup.parse("0.5%").resolve(TransactionDatabase([[1]] * 8124)) == 41
    with pytest.raises(ValueError):
        MinSup.parse("2.5")
