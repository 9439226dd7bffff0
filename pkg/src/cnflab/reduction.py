"""Noisy extensions of INS seeds and the two INS-reduction searches.

An instance is an INS seed of m clauses plus m extra clauses drawn at random
from the rest of the universe.  Reduction looks for any INS sub-formula of
the combined 2m clauses, either by walking the combined formula's subsets
and querying the catalog (subsets first) or by walking the catalog and
testing containment (catalog first).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from math import comb, prod
from typing import BinaryIO, Iterable, Optional, Union

import numpy as np

from . import kernels
from .catalog import Catalog, is_subformula
from .formula import Formula, FormulaError, clause_universe, universe
from .sat import ins_bounds, ins_certificate, m_max

SUBSETS_FIRST = "subsets-first"
CATALOG_FIRST = "catalog-first"

REPORT_HEADER = ("rngSeed", "n", "m", "approach", "foundSize", "visited", "membershipChecks")


class SeedNotIns(ValueError):
    pass


class UniverseTooSmall(ValueError):
    pass


class CatalogRangeError(ValueError):
    pass


@dataclass(frozen=True)
class NoisyInstance:
    seed: Formula
    noise: tuple
    combined: Formula
    rng_seed: int

    @property
    def n(self) -> int:
        return self.seed.n

    @property
    def m(self) -> int:
        return self.seed.m


def gen_noisy(seed: Formula, rng_seed: int) -> NoisyInstance:
    if ins_certificate(seed) is None:
        raise SeedNotIns("seed formula is not INS")
    m = seed.m
    pool = [c for c in clause_universe(seed.n) if c not in set(seed.clauses)]
    if len(pool) + m < 2 * m:
        raise UniverseTooSmall(
            f"universe of {len(pool) + m} clauses cannot hold {2 * m} distinct clauses")
    rng = np.random.default_rng(rng_seed)
    picks = rng.choice(len(pool), size=m, replace=False)
    noise = tuple(pool[int(i)] for i in picks)
    return NoisyInstance(seed, noise, Formula(seed.clauses + noise, seed.n), rng_seed)


@dataclass(frozen=True)
class ReductionResult:
    found: Optional[Formula]
    approach: str
    visited: int
    membership_checks: int


Target = Union[NoisyInstance, Formula]


def _target(instance: Target) -> tuple[Formula, int]:
    """The formula to reduce and the largest sub-formula size to try."""
    if isinstance(instance, NoisyInstance):
        return instance.combined, instance.combined.m - 1
    return instance, instance.m


def _check_range(catalog: Catalog, formula: Formula, p_max: int) -> range:
    if catalog.n != formula.n:
        raise CatalogRangeError(f"catalog n={catalog.n}, formula n={formula.n}")
    if catalog.header.kind != "INS":
        raise CatalogRangeError("reduction needs an INS catalog")
    b = ins_bounds(formula.n)
    need_hi = min(p_max, b.m_max_int)
    if need_hi >= b.m_min and not (catalog.header.m_low <= b.m_min
                                   and catalog.header.m_high >= need_hi):
        raise CatalogRangeError(
            f"catalog covers m={catalog.header.m_low}..{catalog.header.m_high}, "
            f"reduction needs {b.m_min}..{need_hi}")
    return range(b.m_min, min(p_max, catalog.header.m_high) + 1)


def reduce_subsets_first(instance: Target, catalog: Catalog,
                         max_candidates: int = 10 ** 12) -> ReductionResult:
    """Walk sub-formulae by ascending size, lexicographic within a size."""
    formula, p_max = _target(instance)
    sizes = _check_range(catalog, formula, p_max)
    U = universe(formula.n)
    items = np.array([1 << j for j in U.indices_of(formula)], dtype=np.uint64)
    keys = catalog.keys_by_size
    visited = 0
    for p in sizes:
        section = keys.get(p, np.zeros(0, dtype=np.uint64))
        hit, seen, key = kernels.first_subset_hit(items, p, section,
                                                  max_candidates - visited)
        visited += int(seen)
        if hit >= 0:
            return ReductionResult(U.formula_of(int(key)), SUBSETS_FIRST, visited, visited)
        if visited >= max_candidates:
            break
    return ReductionResult(None, SUBSETS_FIRST, visited, visited)


def reduce_catalog_first(instance: Target, catalog: Catalog) -> ReductionResult:
    """Walk catalog entries ascending by (size, signature tuple)."""
    formula, p_max = _target(instance)
    sizes = _check_range(catalog, formula, p_max)
    keys, order = catalog.ordered_keys
    if len(order) == 0:
        return ReductionResult(None, CATALOG_FIRST, 0, 0)
    limit = int(np.searchsorted([len(e) for e in order], sizes.stop, side="left"))
    target = np.uint64(universe(formula.n).key_of(formula))
    i = int(kernels.first_contained(keys[:limit], target))
    if i < 0:
        return ReductionResult(None, CATALOG_FIRST, limit, limit)
    found = Formula.from_signatures(formula.n, order[i])
    return ReductionResult(found, CATALOG_FIRST, i + 1, i + 1)


def reduce_catalog_first_slow(instance: Target, catalog: Catalog) -> ReductionResult:
    """Reference loop calling :func:`is_subformula` on every entry."""
    formula, p_max = _target(instance)
    sizes = _check_range(catalog, formula, p_max)
    _, order = catalog.ordered_keys
    visited = 0
    for e in order:
        if len(e) >= sizes.stop:
            break
        visited += 1
        cand = Formula.from_signatures(formula.n, e)
        if is_subformula(cand, formula):
            return ReductionResult(cand, CATALOG_FIRST, visited, visited)
    return ReductionResult(None, CATALOG_FIRST, visited, visited)


def noisy_subset_count(m: int) -> int:
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    return comb(2 * m, m)


@dataclass(frozen=True)
class BoundReport:
    n: int
    numerator_terms: tuple[int, ...]
    denominator_terms: tuple[Fraction, ...]
    observed_ins_sum: Optional[int] = None

    @property
    def step(self) -> int:
        return self.numerator_terms[0] - self.numerator_terms[1]

    @property
    def numerator(self) -> int:
        return prod(self.numerator_terms)

    @property
    def denominator(self) -> Fraction:
        return prod(self.denominator_terms, start=Fraction(1))

    @property
    def bound_value(self) -> Fraction:
        return self.numerator / self.denominator

    @property
    def bound_below_observed(self) -> Optional[bool]:
        if self.observed_ins_sum is None:
            return None
        return self.bound_value <= self.observed_ins_sum

    def lines(self) -> list[str]:
        out = [
            f"n={self.n}",
            "numerator_terms=" + ",".join(map(str, self.numerator_terms)),
            f"numerator={self.numerator}",
            "denominator_terms=" + ",".join(str(t) for t in self.denominator_terms),
            f"denominator={self.denominator} (~{float(self.denominator):.6g})",
            f"bound={self.bound_value} (~{float(self.bound_value):.6g})",
        ]
        if self.observed_ins_sum is None:
            out.append("observed_ins_sum=unknown")
        else:
            out.append(f"observed_ins_sum={self.observed_ins_sum}")
            out.append(f"bound_below_observed={self.bound_below_observed}")
        return out


def appendix_bound(n: int, observed_ins_sum: Optional[int] = None) -> BoundReport:
    """Evaluate the five-pivot lower-bound expression with exact rationals.

    Each of the first five pivot choices removes ``2^(n-3) C + (2^(n-3)-1)(C-1)``
    of the ``2^n C`` clause/point incidences (C = C(n, 3)); the product of
    the remaining choices is divided by ``prod(m_max - i)``.
    """
    if n < 4:
        raise FormulaError(f"the bound needs n >= 4, got {n}")
    c = comb(n, 3)
    per = 2 ** (n - 3)
    step = per * c + (per - 1) * (c - 1)
    start = 2 ** n * c
    mm = m_max(n)
    return BoundReport(
        n,
        tuple(start - i * step for i in range(5)),
        tuple(mm - i for i in range(5)),
        observed_ins_sum,
    )


@dataclass(frozen=True)
class ExperimentRow:
    rng_seed: int
    n: int
    m: int
    approach: str
    found_size: int
    visited: int
    membership_checks: int

    def as_tuple(self):
        return (self.rng_seed, self.n, self.m, self.approach, self.found_size,
                self.visited, self.membership_checks)


def pick_seed(catalog: Catalog, m: int, rng_seed: int) -> Formula:
    section = catalog.section(m)
    if not section:
        raise CatalogRangeError(f"catalog has no INS formula with {m} clauses")
    rng = np.random.default_rng([rng_seed, m])
    return Formula.from_signatures(catalog.n, section[int(rng.integers(len(section)))])


def run_experiment(catalog: Catalog, m: int, rng_seed: int) -> tuple[NoisyInstance, list[ReductionResult]]:
    inst = gen_noisy(pick_seed(catalog, m, rng_seed), rng_seed)
    return inst, [reduce_subsets_first(inst, catalog), reduce_catalog_first(inst, catalog)]


def experiment_rows(catalog: Catalog, ms: Iterable[int], seeds: Iterable[int]) -> list[ExperimentRow]:
    seeds = list(seeds)
    rows = []
    for m in ms:
        for s in seeds:
            inst, results = run_experiment(catalog, m, s)
            for r in results:
                rows.append(ExperimentRow(s, inst.n, m, r.approach,
                                          r.found.m if r.found else 0,
                                          r.visited, r.membership_checks))
    return rows


def emit_report_csv(rows: Iterable[ExperimentRow], sink: BinaryIO) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_HEADER)
    for r in rows:
        w.writerow(r.as_tuple())
    sink.write(buf.getvalue().encode("ascii"))


def worst_case_subsets(m: int, p_low: int = 8) -> int:
    """Candidates the subsets-first walk examines if the only core comes last
    among the size-m subsets of a 2m-clause formula."""
    return sum(comb(2 * m, p) for p in range(p_low, m + 1))


def trend_table(rows: Iterable[ExperimentRow]) -> list[tuple[int, str, float, int, int]]:
    """(m, approach, mean visited, worst-case subsets, C(2m, m)) per group."""
    groups: dict[tuple[int, str], list[int]] = {}
    for r in rows:
        groups.setdefault((r.m, r.approach), []).append(r.visited)
    return [(m, a, sum(v) / len(v), worst_case_subsets(m), noisy_subset_count(m))
            for (m, a), v in sorted(groups.items())]
