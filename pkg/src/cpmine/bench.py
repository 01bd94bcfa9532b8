"""Benchmark harness: mine a (dataset x minsup x model) matrix, report rows."""
from __future__ import annotations

import csv
import io
import json
import logging
import os
import resource
import shutil
import tracemalloc
import urllib.request
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence, Union

from .dataset import TransactionDatabase, read_fimi, resolve_minsup
from .engine import BranchingPolicy
from .mining import mine

log = logging.getLogger(__name__)

BENCH_SCHEMA = "cpmine.bench/1"
CSV_FIELDS = (
    "dataset", "minsup_abs", "minsup_rel", "model", "patterns",
    "nodes", "propagations", "time_ms", "completed",
)
FIMI_BASE_URL = "http://fimi.uantwerpen.be/data/"
DATA_ENV = "CPMINE_DATA"

# expected closed-pattern counts per (dataset, minsup %) on the FIMI benchmark files
REFERENCE_COUNTS: dict[str, dict[str, int]] = {
    "mushroom": {"30": 428, "20": 1198, "10": 4898, "5": 12855, "1": 51672},
    "chess": {"60": 98393},
    "connect": {"90": 3487},
    "pumsb": {"95": 111},
}
LONG_RUNNING = {"chess", "connect"}


def data_dir(override: Union[str, os.PathLike, None] = None) -> Path:
    if override is not None:
        return Path(override)
    if os.environ.get(DATA_ENV):
        return Path(os.environ[DATA_ENV])
    return Path.home() / ".cache" / "cpmine"


def dataset_path(name: str, directory: Union[str, os.PathLike, None] = None) -> Path:
    return data_dir(directory) / f"{name}.dat"


def fetch(name: str, directory=None, base_url: str = FIMI_BASE_URL) -> Path:
    """Download ``<base_url><name>.dat`` into the data directory (cached)."""
    target = dataset_path(name, directory)
    if target.exists():
        return target
    target.parent.mkdir(parents=True, exist_ok=True)
    url = base_url.rstrip("/") + f"/{name}.dat"
    tmp = target.with_suffix(".part")
    with urllib.request.urlopen(url, timeout=60) as resp, open(tmp, "wb") as out:
        shutil.copyfileobj(resp, out)
    tmp.replace(target)
    return target


@dataclass
class MinSup:
    """Parsed minsup: ``"30%"`` and ``"0.3r"`` are ratios, bare integers absolute."""

    absolute: int | None = None
    ratio: Fraction | None = None
    text: str = ""

    @classmethod
    def parse(cls, text: str) -> "MinSup":
        s = text.strip()
        try:
            if s.endswith("%"):
                return cls(ratio=Fraction(s[:-1]) / 100, text=s)
            if s.endswith("r"):
                return cls(ratio=Fraction(s[:-1]), text=s)
            if s.isdigit():
                return cls(absolute=int(s), text=s)
        except (ValueError, ZeroDivisionError):
            pass
        raise ValueError(
            f"bad minsup {text!r}: use an integer count, 'P%' or a ratio like '0.3r'"
        )

    def resolve(self, db: TransactionDatabase, rounding: str = "ceil") -> int:
        return resolve_minsup(db, absolute=self.absolute, ratio=self.ratio, rounding=rounding)

    @property
    def rel_text(self) -> str:
        return "" if self.ratio is None else _fmt_ratio(self.ratio)


def _fmt_ratio(r: Fraction) -> str:
    return format(float(r), "g")


@dataclass
class BenchRow:
    dataset: str
    minsup_abs: int
    minsup_rel: str
    model: str
    patterns: int
    nodes: int
    propagations: int
    time_ms: float
    completed: bool
    peak_mem_kb: int | None = None


@dataclass
class BenchReport:
    rows: list[BenchRow]
    disagreements: list[str]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# schema: {BENCH_SCHEMA}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_FIELDS)
        for r in self.rows:
            d = asdict(r)
            d["time_ms"] = f"{r.time_ms:.1f}"
            d["completed"] = "true" if r.completed else "false"
            w.writerow([d[k] for k in CSV_FIELDS])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(
            {"schema": BENCH_SCHEMA, "rows": [asdict(r) for r in self.rows],
             "peak_mem_note": "allocator/process estimate; not a reference figure"},
            indent=2,
        )


def run_cell(
    db: TransactionDatabase,
    minsup: MinSup,
    model: str,
    rounding: str = "ceil",
    include_empty: bool = False,
    time_limit: float | None = None,
    policy: BranchingPolicy | None = None,
    trace_memory: bool = False,
) -> BenchRow:
    theta = minsup.resolve(db, rounding)
    if trace_memory:
        tracemalloc.start()
    try:
        res = mine(db, theta, model=model, include_empty=include_empty,
                   time_limit=time_limit, collect=False, policy=policy)
    finally:
        if trace_memory:
            peak_kb = tracemalloc.get_traced_memory()[1] // 1024
            tracemalloc.stop()
    if not trace_memory:
        peak_kb = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
    st = res.stats
    return BenchRow(
        dataset=db.name or "db", minsup_abs=theta, minsup_rel=minsup.rel_text, model=model,
        patterns=res.count, nodes=st.nodes, propagations=st.propagations,
        time_ms=st.elapsed * 1000.0, completed=st.completed, peak_mem_kb=peak_kb,
    )


def bench(
    datasets: Sequence[TransactionDatabase],
    minsups: Sequence[MinSup],
    models: Sequence[str] = ("closed",),
    rounding: str = "ceil",
    include_empty: bool = False,
    time_limit: float | None = None,
    jobs: int = 1,
    trace_memory: bool = False,
    policy: BranchingPolicy | None = None,
) -> BenchReport:
    """One row per (dataset, minsup, model); counts across models are compared."""
    if trace_memory and jobs > 1:
        raise ValueError("memory tracing is process-wide; use jobs=1")
    cells = [(db, ms, md) for db in datasets for ms in minsups for md in models]

    def run(cell):
        db, ms, md = cell
        try:
            return run_cell(db, ms, md, rounding, include_empty, time_limit, policy, trace_memory)
        except (MemoryError, ValueError) as exc:
            log.warning("%s %s %s: %s", db.name, ms.text, md, exc)
            return BenchRow(db.name or "db", -1, ms.rel_text, md, 0, 0, 0, 0.0, False)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(run, cells))
    else:
        rows = [run(c) for c in cells]
    disagreements = []
    by_key: dict[tuple[str, int], list[BenchRow]] = {}
    for r in rows:
        if r.completed:
            by_key.setdefault((r.dataset, r.minsup_abs), []).append(r)
    for (name, theta), rs in by_key.items():
        if len({r.patterns for r in rs}) > 1:
            detail = ", ".join(f"{r.model}={r.patterns}" for r in rs)
            disagreements.append(f"{name} theta={theta}: {detail}")
    return BenchReport(rows, disagreements)


def reference_matrix(directory=None) -> tuple[list[tuple[str, Path | None]], dict[str, list[MinSup]]]:
    found = []
    for name in REFERENCE_COUNTS:
        p = dataset_path(name, directory)
        found.append((name, p if p.exists() else None))
    sups = {name: [MinSup.parse(f"{k}%") for k in rows] for name, rows in REFERENCE_COUNTS.items()}
    return found, sups


def load(path: Union[str, os.PathLike]) -> TransactionDatabase:
    return read_fimi(path)
