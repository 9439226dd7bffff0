"""Exact per-(n, m) counts of all, unsatisfiable and INS formulae.

Unsatisfiable counts come from two independent routes: a canonical-order
subset search over the clause universe and an inclusion-exclusion sum over
sets of assignments.  INS counts come from a pivot-pruned subset search, and
for ``m = 8`` the hypercube perfect matchings give a third route.
"""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass
from math import comb
from typing import BinaryIO, Iterable

import numpy as np

from . import kernels
from .formula import FormulaError, universe
from .sat import TooLarge, ins_bounds

ENUM_MAX_N = 4
IE_MAX_N = 4

ENUMERATION = "enumeration"
INCLUSION_EXCLUSION = "inclusion-exclusion"
BOTH = "both"

CSV_HEADER = ("n", "m", "total", "unsat", "ins", "method")


class BudgetExceeded(RuntimeError):
    """A search ran past its node or wall-clock budget.

    ``partial`` is the count accumulated over the finished work units.
    """

    def __init__(self, what: str, partial: int, units_done: int, units_total: int,
                 nodes: int, seconds: float):
        self.partial = partial
        self.units_done = units_done
        self.units_total = units_total
        self.nodes = nodes
        self.seconds = seconds
        super().__init__(
            f"{what}: budget exceeded after {units_done}/{units_total} work units, "
            f"{nodes} nodes, {seconds:.1f}s (partial count {partial})")


class OracleMismatch(AssertionError):
    pass


@dataclass(frozen=True)
class Budget:
    """Upper limits for one census call.  Time is checked between work units."""

    seconds: float = 600.0
    nodes: int = 10 ** 11

    def __post_init__(self):
        if self.seconds <= 0 or self.nodes <= 0:
            raise ValueError("budget must be positive")


@dataclass(frozen=True)
class Partition:
    """Work split: unit ``f`` (the first chosen clause) belongs to ``f % count``."""

    count: int = 1
    index: int = 0

    def __post_init__(self):
        if self.count < 1 or not 0 <= self.index < self.count:
            raise ValueError(f"bad partition {self.index}/{self.count}")

    def units(self, nitems: int) -> list[int]:
        return [f for f in range(nitems) if f % self.count == self.index]


def universe_size(n: int) -> int:
    if n < 3:
        raise FormulaError(f"need n >= 3, got {n}")
    return 8 * comb(n, 3)


def count_total(n: int, m: int) -> int:
    size = universe_size(n)
    if not 0 <= m <= size:
        raise ValueError(f"m={m} outside 0..{size}")
    return comb(size, m)


def _check_enum(n: int, m: int) -> int:
    if n > ENUM_MAX_N:
        raise TooLarge(f"enumeration is limited to n <= {ENUM_MAX_N}, got n={n}")
    size = universe_size(n)
    if not 1 <= m <= size:
        raise ValueError(f"m={m} outside 1..{size}")
    return size


def _drive(what, unit_fn, units, budget):
    start = time.monotonic()
    nodes = 0
    total = 0
    for done, f in enumerate(units):
        remaining = budget.nodes - nodes
        c, used = unit_fn(f, remaining)
        nodes += used
        elapsed = time.monotonic() - start
        if used > remaining or elapsed > budget.seconds:
            raise BudgetExceeded(what, total, done, len(units), nodes, elapsed)
        total += c
    return total, nodes


def count_unsat_enum(n: int, m: int, partition: Partition = Partition(),
                     budget: Budget = Budget(), masks: np.ndarray | None = None) -> int:
    """Count unsatisfiable m-clause formulae by pruned subset search.

    ``masks`` overrides the universe's falsify masks (in any order); the count
    only depends on the set of masks, which is what the symmetry checks use.
    """
    size = _check_enum(n, m)
    if masks is None:
        masks = universe(n).masks
    masks = np.ascontiguousarray(masks, dtype=np.uint64)
    full = np.uint64((1 << (1 << n)) - 1)
    suffix = kernels.suffix_unions(masks)
    binom = kernels.binom_table(size)
    per_clause = 1 << (n - 3)

    def unit(f, remaining):
        c, used = kernels.unsat_dfs_unit(masks, suffix, full, per_clause, m, f,
                                         binom, remaining)
        return int(c), int(used)

    total, _ = _drive(f"unsat enumeration n={n} m={m}", unit, partition.units(size), budget)
    return total


def count_unsat_ie(n: int, m: int) -> int:
    """Unsatisfiable count as ``total - #sat`` with ``#sat`` by inclusion-exclusion.

    A formula is satisfiable iff some assignment avoids all of its falsify
    sets; for a non-empty set ``A`` of assignments the formulae avoiding all of
    ``A`` are the m-subsets of the clauses whose falsify set misses ``A``.
    """
    if n > IE_MAX_N:
        raise TooLarge(f"inclusion-exclusion is limited to n <= {IE_MAX_N}, got n={n}")
    size = universe_size(n)
    if not 0 <= m <= size:
        raise ValueError(f"m={m} outside 0..{size}")
    masks = universe(n).masks.astype(np.uint64)
    sets = np.arange(1, 1 << (1 << n), dtype=np.uint64)
    avoid = np.zeros(len(sets), dtype=np.int64)
    for mk in masks:
        avoid += (sets & mk) == 0
    odd = kernels.popcount64(sets) % 2 == 1
    # weight[a] = sum of (-1)^(|A|+1) over the A with avoid(A) == a
    weight = (np.bincount(avoid[odd], minlength=size + 1).astype(object)
              - np.bincount(avoid[~odd], minlength=size + 1).astype(object))
    sat = sum(int(w) * comb(a, m) for a, w in enumerate(weight) if w)
    return comb(size, m) - sat


def ins_keys(n: int, m: int, budget: Budget = Budget(),
             partition: Partition = Partition()) -> np.ndarray:
    """Sorted selection keys of every INS formula with m clauses."""
    size = _check_enum(n, m)
    U = universe(n)
    masks = U.masks
    full = np.uint64((1 << (1 << n)) - 1)
    suffix = kernels.suffix_unions(masks)
    empty = np.zeros(0, dtype=np.uint64)
    counts: dict[int, int] = {}

    def count_unit(f, remaining):
        c, used, _ = kernels.ins_dfs_unit(masks, suffix, full, m, f, remaining, empty, 0)
        counts[f] = int(c)
        return int(c), int(used)

    units = partition.units(size)
    total, _ = _drive(f"INS enumeration n={n} m={m}", count_unit, units, budget)
    out = np.zeros(max(total, 1), dtype=np.uint64)
    pos = 0
    for f in units:
        if counts[f]:
            _, _, pos = kernels.ins_dfs_unit(masks, suffix, full, m, f, budget.nodes, out, pos)
    return np.sort(out[:total])


def count_ins_enum(n: int, m: int, partition: Partition = Partition(),
                   budget: Budget = Budget(), respect_bounds: bool = True) -> int:
    """Count INS formulae with m clauses.

    Outside ``8 <= m <= floor(m_max)`` the answer is 0 without searching
    unless ``respect_bounds`` is False.
    """
    size = _check_enum(n, m)
    b = ins_bounds(n)
    if respect_bounds and not b.m_min <= m <= b.m_max_int:
        return 0
    masks = universe(n).masks
    full = np.uint64((1 << (1 << n)) - 1)
    suffix = kernels.suffix_unions(masks)
    empty = np.zeros(0, dtype=np.uint64)

    def unit(f, remaining):
        c, used, _ = kernels.ins_dfs_unit(masks, suffix, full, m, f, remaining, empty, 0)
        return int(c), int(used)

    total, _ = _drive(f"INS enumeration n={n} m={m}", unit, partition.units(size), budget)
    return total


def hypercube_perfect_matchings(n: int) -> int:
    """Perfect matchings of the n-cube graph, by plain backtracking.

    For n = 4 every clause falsifies one edge of the cube and 8 clauses cover
    all 16 vertices only as a perfect matching, so this equals the m = 8
    unsatisfiable and INS counts.
    """
    nv = 1 << n

    def rec(free: int) -> int:
        if free == 0:
            return 1
        v = (free & -free).bit_length() - 1
        rest = free & ~(1 << v)
        total = 0
        for b in range(n):
            w = v ^ (1 << b)
            if rest >> w & 1:
                total += rec(rest & ~(1 << w))
        return total

    return rec((1 << nv) - 1)


@dataclass(frozen=True)
class CensusRow:
    n: int
    m: int
    total: int
    unsat: int
    ins: int
    method: str

    def as_tuple(self):
        return (self.n, self.m, self.total, self.unsat, self.ins, self.method)


def census_row(n: int, m: int, methods: Iterable[str] = (ENUMERATION, INCLUSION_EXCLUSION),
               partition: Partition = Partition(), budget: Budget = Budget()) -> CensusRow:
    """One census cell; with both unsat methods they must agree exactly.

    With a partition other than the whole range, the enumeration counts are
    the partial sums for that partition and only enumeration may be used.
    """
    methods = tuple(methods)
    if not methods or any(x not in (ENUMERATION, INCLUSION_EXCLUSION) for x in methods):
        raise ValueError(f"unknown census methods {methods}")
    partial = partition.count > 1
    if partial and INCLUSION_EXCLUSION in methods:
        raise ValueError("inclusion-exclusion cannot run on a partition")
    total = count_total(n, m)
    unsat_e = unsat_ie = None
    if ENUMERATION in methods:
        unsat_e = count_unsat_enum(n, m, partition, budget)
    if INCLUSION_EXCLUSION in methods:
        unsat_ie = count_unsat_ie(n, m)
    if unsat_e is not None and unsat_ie is not None and unsat_e != unsat_ie:
        raise OracleMismatch(
            f"n={n} m={m}: enumeration {unsat_e} != inclusion-exclusion {unsat_ie}")
    unsat = unsat_e if unsat_e is not None else unsat_ie
    if n <= ENUM_MAX_N:
        ins = count_ins_enum(n, m, partition, budget)
    else:  # pragma: no cover - n <= 4 is enforced above
        raise TooLarge("INS counts need enumeration")
    method = BOTH if len(set(methods)) == 2 else methods[0]
    return CensusRow(n, m, total, unsat, ins, method)


def run_census(n: int, ms: Iterable[int], **kw) -> list[CensusRow]:
    return [census_row(n, m, **kw) for m in ms]


def emit_census_csv(rows: Iterable[CensusRow], sink: BinaryIO) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow(r.as_tuple())
    sink.write(buf.getvalue().encode("ascii"))


def read_census_csv(data: bytes | str) -> list[CensusRow]:
    if isinstance(data, bytes):
        data = data.decode("ascii")
    rd = csv.reader(io.StringIO(data))
    header = tuple(next(rd))
    if header != CSV_HEADER:
        raise ValueError(f"unexpected census header {header}")
    return [CensusRow(int(a), int(b), int(c), int(d), int(e), f) for a, b, c, d, e, f in rd]
