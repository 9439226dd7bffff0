"""Command line entry point: ``cnflab <subcommand> ...``.

Exit status is 0 on success, 1 on domain errors (bad input files, budget
exhaustion, failed verification) and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import io
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from . import census, catalog as cat, reduction
from .formula import (Formula, emit_dimacs, format_signature_line, parse_dimacs,
                      parse_signature_line, read_dimacs_clauses)
from .sat import (ins_bounds, ins_certificate, is_unsat_bruteforce,
                  is_unsat_cover, pivot_table)


class CliError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    n: Optional[int] = None
    m_range: Optional[tuple[int, int]] = None
    input_path: Optional[str] = None
    output_path: Optional[str] = None
    catalog_path: Optional[str] = None
    rng_seed: Optional[int] = None
    partitions: int = 1
    partition_index: int = 0
    budget_seconds: float = 600.0

    def __post_init__(self):
        if self.budget_seconds <= 0:
            raise CliError("--budget must be positive")

    @classmethod
    def from_args(cls, ns: argparse.Namespace) -> "RunConfig":
        return cls(
            subcommand=ns.command,
            n=getattr(ns, "n", None),
            m_range=getattr(ns, "m", None),
            input_path=getattr(ns, "dimacs", None),
            output_path=getattr(ns, "out", None),
            catalog_path=getattr(ns, "catalog", None),
            rng_seed=getattr(ns, "seed", None),
            partitions=getattr(ns, "partitions", 1),
            partition_index=getattr(ns, "partition_index", 0),
            budget_seconds=getattr(ns, "budget", 600.0),
        )


def m_range(text: str) -> tuple[int, int]:
    try:
        if ".." in text:
            lo, hi = (int(t) for t in text.split(".."))
        else:
            lo = hi = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected M or LO..HI, got {text!r}") from None
    if lo < 1 or hi < lo:
        raise argparse.ArgumentTypeError(f"empty or invalid range {text!r}")
    return lo, hi


def _read(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except FileNotFoundError:
        raise CliError(f"file not found: {path}") from None
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from None


def _write(path: Optional[str], data: bytes) -> None:
    if path is None:
        sys.stdout.write(data.decode("ascii"))
        return
    try:
        Path(path).write_bytes(data)
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc.strerror}") from None


def _load_catalog(path: str) -> cat.Catalog:
    return cat.parse_catalog(_read(path))


def _budget(ns) -> census.Budget:
    return census.Budget(seconds=ns.budget, nodes=ns.max_nodes)


# -- subcommands ---------------------------------------------------------------

def cmd_sig(ns) -> None:
    if ns.dimacs:
        print(format_signature_line(parse_dimacs(_read(ns.dimacs))))
    else:
        if ns.n is None:
            raise CliError("--line needs --n")
        _write(ns.out, emit_dimacs(parse_signature_line(ns.n, ns.line)))


def cmd_check_sat(ns) -> None:
    f = parse_dimacs(_read(ns.dimacs))
    verdicts = {}
    if ns.method in ("cover", "both"):
        verdicts["cover"] = is_unsat_cover(f)
    if ns.method in ("bruteforce", "both"):
        verdicts["bruteforce"] = is_unsat_bruteforce(f)
    if len(set(verdicts.values())) > 1:
        raise CliError(f"oracle disagreement: {verdicts}")
    print("UNSAT" if next(iter(verdicts.values())) else "SAT")


def cmd_check_ins(ns) -> None:
    n, clauses = read_dimacs_clauses(_read(ns.dimacs))
    f = Formula(clauses, n)
    if not is_unsat_cover(f):
        print("NOT-INS (satisfiable)")
        return
    # report in the file's clause numbering
    canon = {c: j for j, c in enumerate(f.clauses)}
    pivots = pivot_table(f)
    missing = [i + 1 for i, c in enumerate(clauses) if pivots[canon[c]] is None]
    if missing:
        if len(missing) == 1:
            print(f"NOT-INS (clause {missing[0]} has no pivot)")
        else:
            print(f"NOT-INS (clauses {', '.join(map(str, missing))} have no pivot)")
        return
    cert = ins_certificate(f)
    assert cert is not None
    print("INS")
    for i, c in enumerate(clauses):
        print(f"{i + 1}:{cert.pivots[canon[c]]}")


def cmd_census(ns) -> None:
    part = census.Partition(ns.partitions, ns.partition_index)
    if ns.method == "both":
        methods = (census.ENUMERATION, census.INCLUSION_EXCLUSION)
    else:
        methods = (ns.method,)
    lo, hi = ns.m
    rows = census.run_census(ns.n, range(lo, hi + 1), methods=methods,
                             partition=part, budget=_budget(ns))
    buf = io.BytesIO()
    census.emit_census_csv(rows, buf)
    _write(ns.out, buf.getvalue())


def cmd_build_catalog(ns) -> None:
    entries = cat.build_entries(ns.n, ns.kind, ns.m, _budget(ns))
    header = cat.CatalogHeader(ns.n, ns.kind, ns.m[0], ns.m[1], len(entries))
    data = cat.render(header, entries)
    if ns.verify:
        cat.verify_catalog(cat.parse_catalog(data))
    _write(ns.out, data)
    if ns.out:
        print(header.line())


def cmd_query(ns) -> None:
    catalog = _load_catalog(ns.catalog)
    f = parse_dimacs(_read(ns.dimacs))
    hit, rep = cat.lookup(catalog, f)
    print("MEMBER" if hit else "NOT-MEMBER")
    print(f"signature_ops={rep.signature_ops} sort_comparisons={rep.sort_comparisons} "
          f"search_comparisons={rep.search_comparisons} section_size={rep.section_size}")


def cmd_gen_noisy(ns) -> None:
    if ns.dimacs:
        seed = parse_dimacs(_read(ns.dimacs))
    elif ns.catalog and ns.m:
        if ns.m[0] != ns.m[1]:
            raise CliError("--m must be a single size for gen-noisy")
        seed = reduction.pick_seed(_load_catalog(ns.catalog), ns.m[0], ns.seed)
    else:
        raise CliError("gen-noisy needs --dimacs SEED or --catalog with --m")
    inst = reduction.gen_noisy(seed, ns.seed)
    _write(ns.out, emit_dimacs(inst.combined))


def cmd_reduce(ns) -> None:
    catalog = _load_catalog(ns.catalog)
    approaches = {
        "subsets-first": [reduction.reduce_subsets_first],
        "catalog-first": [reduction.reduce_catalog_first],
        "both": [reduction.reduce_subsets_first, reduction.reduce_catalog_first],
    }[ns.approach]
    if ns.dimacs:
        f = parse_dimacs(_read(ns.dimacs))
        for fn in approaches:
            r = fn(f, catalog)
            line = format_signature_line(r.found) if r.found else "none"
            print(f"{r.approach} visited={r.visited} membershipChecks={r.membership_checks} "
                  f"found={line}")
        return
    if not ns.m:
        raise CliError("reduce needs --dimacs FILE or --m LO..HI for an experiment batch")
    seeds = range(ns.seed, ns.seed + ns.instances)
    rows = []
    for m in range(ns.m[0], ns.m[1] + 1):
        for s in seeds:
            inst = reduction.gen_noisy(reduction.pick_seed(catalog, m, s), s)
            for fn in approaches:
                r = fn(inst, catalog)
                rows.append(reduction.ExperimentRow(
                    s, inst.n, m, r.approach, r.found.m if r.found else 0,
                    r.visited, r.membership_checks))
    buf = io.BytesIO()
    reduction.emit_report_csv(rows, buf)
    _write(ns.out, buf.getvalue())


def cmd_bounds(ns) -> None:
    b = ins_bounds(ns.n)
    print(f"m_min={b.m_min}")
    print(f"m_max={b.m_max_real} (~{float(b.m_max_real):.6g})")
    print(f"m_max_int={b.m_max_int}")
    if ns.n < 4:
        return
    observed = None
    if ns.census:
        rows = census.read_census_csv(_read(ns.census))
        observed = sum(r.ins for r in rows if r.n == ns.n)
    for line in reduction.appendix_bound(ns.n, observed).lines()[1:]:
        print(line)


# -- parser ------------------------------------------------------------------

def _add_budget(p):
    p.add_argument("--budget", type=float, default=600.0, metavar="SECONDS",
                   help="wall-clock budget, checked between work units (default 600)")
    p.add_argument("--max-nodes", type=int, default=10 ** 11, metavar="N",
                   help="search-node budget (default 1e11)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cnflab", description="3-CNF formula-space laboratory")
    sub = ap.add_subparsers(dest="command", required=True, metavar="SUBCOMMAND")

    p = sub.add_parser("sig", help="formula signature from DIMACS, or DIMACS from a signature")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--dimacs", metavar="FILE", help="DIMACS CNF input")
    g.add_argument("--line", metavar="U1,U2,...", help="descending signature line to decode")
    p.add_argument("--n", type=int, help="variable count for --line")
    p.add_argument("--out", metavar="FILE", help="write decoded DIMACS here (default stdout)")
    p.set_defaults(func=cmd_sig)

    p = sub.add_parser("check-sat", help="decide satisfiability")
    p.add_argument("--dimacs", metavar="FILE", required=True, help="DIMACS CNF input")
    p.add_argument("--method", choices=("cover", "bruteforce", "both"), default="both",
                   help="decision route(s); 'both' fails on disagreement (default both)")
    p.set_defaults(func=cmd_check_sat)

    p = sub.add_parser("check-ins", help="decide irreducible unsatisfiability, print pivots")
    p.add_argument("--dimacs", metavar="FILE", required=True, help="DIMACS CNF input")
    p.set_defaults(func=cmd_check_ins)

    p = sub.add_parser("census", help="count total/unsat/INS formulae per m as CSV")
    p.add_argument("--n", type=int, default=4, help="variable count (only 3 or 4; default 4)")
    p.add_argument("--m", type=m_range, required=True, metavar="LO..HI", help="clause counts")
    p.add_argument("--method", choices=("both", census.ENUMERATION, census.INCLUSION_EXCLUSION),
                   default="both", help="unsat counting route(s) (default both)")
    p.add_argument("--partitions", type=int, default=1,
                   help="number of work partitions (enumeration only; default 1)")
    p.add_argument("--partition-index", type=int, default=0,
                   help="which partition this process runs (default 0)")
    p.add_argument("--out", metavar="FILE", help="CSV output (default stdout)")
    _add_budget(p)
    p.set_defaults(func=cmd_census)

    p = sub.add_parser("build-catalog", help="enumerate and write a sorted catalog file")
    p.add_argument("--n", type=int, default=4, help="variable count (default 4)")
    p.add_argument("--kind", choices=cat.KINDS, default="INS", help="formula class (default INS)")
    p.add_argument("--m", type=m_range, required=True, metavar="LO..HI", help="clause counts")
    p.add_argument("--out", metavar="FILE", help="catalog output (default stdout)")
    p.add_argument("--verify", action="store_true",
                   help="re-check every entry before writing")
    _add_budget(p)
    p.set_defaults(func=cmd_build_catalog)

    p = sub.add_parser("query", help="look a formula up in a catalog")
    p.add_argument("--catalog", metavar="FILE", required=True, help="catalog file")
    p.add_argument("--dimacs", metavar="FILE", required=True, help="DIMACS CNF input")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("gen-noisy", help="extend an INS seed with random extra clauses")
    p.add_argument("--dimacs", metavar="FILE", help="INS seed as DIMACS")
    p.add_argument("--catalog", metavar="FILE", help="pick the seed from this catalog")
    p.add_argument("--m", type=m_range, metavar="M", help="seed size when picking from a catalog")
    p.add_argument("--seed", type=int, required=True, help="random seed")
    p.add_argument("--out", metavar="FILE", help="DIMACS output (default stdout)")
    p.set_defaults(func=cmd_gen_noisy)

    p = sub.add_parser("reduce", help="run INS reduction on a formula or an experiment batch")
    p.add_argument("--catalog", metavar="FILE", required=True, help="INS catalog file")
    p.add_argument("--dimacs", metavar="FILE", help="reduce this unsatisfiable formula")
    p.add_argument("--m", type=m_range, metavar="LO..HI", help="seed sizes for a batch")
    p.add_argument("--seed", type=int, default=0, help="first random seed of a batch (default 0)")
    p.add_argument("--instances", type=int, default=100,
                   help="instances per seed size (default 100)")
    p.add_argument("--approach", choices=("both", reduction.SUBSETS_FIRST, reduction.CATALOG_FIRST),
                   default="both", help="reduction approach(es) (default both)")
    p.add_argument("--out", metavar="FILE", help="report CSV output (default stdout)")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("bounds", help="INS clause-count bounds and the appendix lower bound")
    p.add_argument("--n", type=int, required=True, help="variable count")
    p.add_argument("--census", metavar="FILE", help="census CSV for the observed INS total")
    p.set_defaults(func=cmd_bounds)
    return ap


def run(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    try:
        ns = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        RunConfig.from_args(ns)
        ns.func(ns)
    except (CliError, ValueError, census.BudgetExceeded, census.OracleMismatch) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
