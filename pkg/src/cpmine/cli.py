"""Command line front end: ``cpmine mine|bench|oracle-check|counts|fetch``."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from typing import Sequence, TextIO

from . import bench as benchmod
from .dataset import FimiParseError, Pattern, TransactionDatabase, read_fimi
from .engine import VALUE_ORDERS, VAR_ORDERS, BranchingPolicy
from .mining import MODELS, SideConstraints, mine
from .oracle import OracleTooLarge, brute_force_closed, counts_csv, derive_counts

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PARSE = 3
EXIT_TIMEOUT = 4
EXIT_MISMATCH = 5

PATTERN_SCHEMA = "cpmine.patterns/1"


class ConfigError(ValueError):
    pass


def format_lcm(db: TransactionDatabase, p: Pattern) -> str:
    labels = " ".join(str(x) for x in db.to_labels(p.items))
    return f"{labels} ({p.frequency})" if labels else f"({p.frequency})"


def _labels_to_items(db: TransactionDatabase, labels: Sequence[int], flag: str) -> list[int]:
    out = []
    for x in labels:
        if x not in db.index_of:
            raise ConfigError(f"{flag}: item {x} does not occur in the database")
        out.append(db.index_of[x])
    return out


def side_from_args(db: TransactionDatabase, args) -> SideConstraints:
    side = SideConstraints(
        min_size=args.min_size,
        max_size=args.max_size,
        required=_labels_to_items(db, args.require, "--require"),
        forbidden=_labels_to_items(db, args.forbid, "--forbid"),
    )
    if side.min_size is not None and not 1 <= side.min_size <= db.n:
        raise ConfigError(f"--min-size must lie in [1, {db.n}]")
    if side.max_size is not None and not 0 <= side.max_size <= db.n:
        raise ConfigError(f"--max-size must lie in [0, {db.n}]")
    return side


def oracle_check(
    db: TransactionDatabase,
    theta: int,
    include_empty: bool = False,
    side: SideConstraints | None = None,
    model: str = "closed",
    miner_include_empty: bool | None = None,
) -> str | None:
    """Diff the miner against the oracle; None when they agree, else a message.

    ``miner_include_empty`` lets the miner run under a different empty-pattern
    convention than the one the oracle is held to (fault injection).
    """
    if miner_include_empty is None:
        miner_include_empty = include_empty
    got = mine(db, theta, model=model, side=side, include_empty=miner_include_empty)
    want = {
        (items, s) for items, s in brute_force_closed(db, theta).patterns
        if (include_empty or items) and (side is None or side.accepts(items))
    }
    have = {(p.items, p.frequency) for p in got.patterns}
    if len(have) != got.count:
        return "miner emitted a duplicate pattern"
    for items, s in sorted(want - have):
        return f"missing pattern {db.to_labels(items)} ({s})"
    for items, s in sorted(have - want):
        return f"unexpected pattern {db.to_labels(items)} ({s})"
    return None


def _add_search_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--var-order", choices=VAR_ORDERS, default="lexicographic")
    p.add_argument("--value-order", choices=VALUE_ORDERS, default="one_first")
    p.add_argument("--rounding", choices=("ceil", "floor"), default="ceil",
                   help="rounding of relative minsup to a transaction count")
    p.add_argument("--include-empty", action="store_true",
                   help="also report the empty pattern when it is closed")
    p.add_argument("--time-limit", type=float, default=None, metavar="SECONDS")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cpmine", description="Closed frequent itemset mining with a CP global constraint.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    pm = sub.add_parser("mine", help="mine closed frequent patterns from a FIMI file")
    pm.add_argument("input")
    pm.add_argument("--minsup", required=True, help="absolute count, 'P%%' or ratio 'Rr'")
    pm.add_argument("--model", choices=MODELS, default="closed")
    _add_search_args(pm)
    pm.add_argument("--min-size", type=int)
    pm.add_argument("--max-size", type=int)
    pm.add_argument("--require", type=int, action="append", default=[], metavar="ITEM")
    pm.add_argument("--forbid", type=int, action="append", default=[], metavar="ITEM")
    pm.add_argument("--format", choices=("lcm", "csv", "json"), default="lcm")
    pm.add_argument("--count-only", action="store_true")
    pm.add_argument("--stats", action="store_true", help="print search statistics to stderr")
    pm.add_argument("--oracle-check", action="store_true",
                    help="cross-check against exhaustive enumeration (small inputs)")
    pm.add_argument("--sort", action="store_true", help="sort output by item labels")
    pm.add_argument("-o", "--output")

    pb = sub.add_parser("bench", help="run a dataset x minsup x model matrix")
    pb.add_argument("inputs", nargs="*")
    pb.add_argument("--minsup", action="append", default=[])
    pb.add_argument("--model", action="append", choices=MODELS, default=[])
    pb.add_argument("--reference", action="store_true",
                    help="run the reference dataset/minsup rows found in the data directory")
    pb.add_argument("--data-dir")
    _add_search_args(pb)
    pb.add_argument("--jobs", type=int, default=1)
    pb.add_argument("--trace-memory", action="store_true")
    pb.add_argument("--format", choices=("csv", "json"), default="csv")
    pb.add_argument("-o", "--output")

    po = sub.add_parser("oracle-check", help="diff miner output against brute force")
    po.add_argument("input")
    po.add_argument("--minsup", required=True)
    po.add_argument("--model", choices=MODELS, default="closed")
    po.add_argument("--rounding", choices=("ceil", "floor"), default="ceil")
    po.add_argument("--include-empty", action="store_true")

    pc = sub.add_parser("counts", help="oracle pattern counts per absolute minsup (CSV)")
    pc.add_argument("input")
    pc.add_argument("--include-empty", action="store_true")

    pf = sub.add_parser("fetch", help="download FIMI datasets into the data directory")
    pf.add_argument("names", nargs="+")
    pf.add_argument("--data-dir")
    pf.add_argument("--base-url", default=benchmod.FIMI_BASE_URL)
    return parser


def _open_out(path: str | None) -> TextIO:
    return open(path, "w") if path else sys.stdout


def cmd_mine(args) -> int:
    db = read_fimi(args.input)
    theta = benchmod.MinSup.parse(args.minsup).resolve(db, args.rounding)
    side = side_from_args(db, args)
    policy = BranchingPolicy(args.var_order, args.value_order)
    if args.oracle_check:
        diff = oracle_check(db, theta, args.include_empty, side, args.model)
        print("ok" if diff is None else diff, file=sys.stderr)
        if diff is not None:
            return EXIT_MISMATCH
    out = _open_out(args.output)
    stream = not (args.sort or args.count_only or args.format == "json")
    writer = csv.writer(out, lineterminator="\n")

    def emit(p: Pattern):
        if args.format == "csv":
            writer.writerow([" ".join(map(str, db.to_labels(p.items))), p.frequency])
        else:
            out.write(format_lcm(db, p) + "\n")

    try:
        if args.format == "csv" and not args.count_only:
            out.write(f"# schema: {PATTERN_SCHEMA}\n")
            writer.writerow(["items", "frequency"])
        res = mine(db, theta, model=args.model, side=side, policy=policy,
                   include_empty=args.include_empty, time_limit=args.time_limit,
                   collect=not stream and not args.count_only,
                   on_pattern=emit if stream else None)
        patterns = res.patterns
        if args.sort:
            patterns = sorted(patterns, key=lambda p: db.to_labels(p.items))
        if args.count_only:
            out.write(f"{res.count}\n")
        elif args.format == "json":
            json.dump({
                "schema": PATTERN_SCHEMA, "minsup_abs": theta, "model": args.model,
                "completed": res.stats.completed, "count": res.count,
                "patterns": [{"items": db.to_labels(p.items), "frequency": p.frequency}
                             for p in patterns],
            }, out, indent=1)
            out.write("\n")
        elif not stream:
            for p in patterns:
                emit(p)
    finally:
        if args.output:
            out.close()
        else:
            out.flush()
    st = res.stats
    if args.stats:
        print(f"minsup_abs={theta} patterns={res.count} nodes={st.nodes} "
              f"propagations={st.propagations} failures={st.failures} "
              f"time_ms={st.elapsed * 1000:.1f} completed={str(st.completed).lower()}",
              file=sys.stderr)
    if not st.completed:
        print("# incomplete: time limit reached, output is partial", file=sys.stderr)
        return EXIT_TIMEOUT
    return EXIT_OK


def cmd_bench(args) -> int:
    dbs = [read_fimi(p) for p in args.inputs]
    models = args.model or ["closed"]
    rows = []
    disagreements = []
    status = EXIT_OK
    common = dict(rounding=args.rounding, include_empty=args.include_empty,
                  time_limit=args.time_limit, jobs=args.jobs, trace_memory=args.trace_memory,
                  policy=BranchingPolicy(args.var_order, args.value_order))
    if dbs:
        if not args.minsup:
            raise ConfigError("bench needs at least one --minsup for explicit inputs")
        sups = [benchmod.MinSup.parse(s) for s in args.minsup]
        rep = benchmod.bench(dbs, sups, models, **common)
        rows += rep.rows
        disagreements += rep.disagreements
    if args.reference:
        found, sups = benchmod.reference_matrix(args.data_dir)
        for name, path in found:
            if path is None:
                print(f"missing dataset {name} (looked in {benchmod.data_dir(args.data_dir)}); "
                      f"run 'cpmine fetch {name}'", file=sys.stderr)
                status = EXIT_PARSE
                continue
            rep = benchmod.bench([read_fimi(path)], sups[name], models, **common)
            rows += rep.rows
            disagreements += rep.disagreements
    if not dbs and not args.reference:
        raise ConfigError("give input files and/or --reference")
    report = benchmod.BenchReport(rows, disagreements)
    out = _open_out(args.output)
    out.write(report.to_csv() if args.format == "csv" else report.to_json() + "\n")
    if args.output:
        out.close()
    for d in disagreements:
        print(f"model disagreement: {d}", file=sys.stderr)
    if disagreements:
        return EXIT_MISMATCH
    if any(not r.completed for r in rows):
        return EXIT_TIMEOUT
    return status


def cmd_oracle_check(args) -> int:
    db = read_fimi(args.input)
    theta = benchmod.MinSup.parse(args.minsup).resolve(db, args.rounding)
    diff = oracle_check(db, theta, args.include_empty, model=args.model)
    print("ok" if diff is None else diff)
    return EXIT_OK if diff is None else EXIT_MISMATCH


def cmd_counts(args) -> int:
    db = read_fimi(args.input)
    rows = derive_counts(db, range(1, db.m + 2), include_empty=args.include_empty)
    sys.stdout.write(counts_csv(rows))
    return EXIT_OK


def cmd_fetch(args) -> int:
    status = EXIT_OK
    for name in args.names:
        try:
            path = benchmod.fetch(name, args.data_dir, args.base_url)
            print(path)
        except OSError as exc:
            print(f"fetch {name} failed: {exc}", file=sys.stderr)
            status = EXIT_PARSE
    return status


COMMANDS = {
    "mine": cmd_mine, "bench": cmd_bench, "oracle-check": cmd_oracle_check,
    "counts": cmd_counts, "fetch": cmd_fetch,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except FimiParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OracleTooLarge as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConfigError, ValueError, MemoryError) as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
