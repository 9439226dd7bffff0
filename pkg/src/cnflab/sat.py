"""Satisfiability and irreducible-unsatisfiability (INS) decisions.

Two independent routes are kept for each question.  Unsatisfiability is
decided by covering (the falsify sets of the clauses jointly hit every
assignment) and by brute-force evaluation of the literals.  INS is decided by
pivots (every clause owns an assignment that no other clause falsifies) and
by clause deletion (dropping any single clause leaves a satisfiable formula).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, floor
from typing import Optional

import numpy as np

from .formula import Formula, FormulaError, bit_indices, falsify_set

BRUTEFORCE_MAX_N = 24


class TooLarge(ValueError):
    """Raised when an exhaustive routine would exceed its size guard."""


@dataclass(frozen=True)
class CoverState:
    union: int
    per_clause: tuple[int, ...]

    @classmethod
    def of(cls, formula: Formula) -> "CoverState":
        per = tuple(falsify_set(c) for c in formula.clauses)
        u = 0
        for s in per:
            u |= s
        return cls(u, per)


def full_mask(n: int) -> int:
    return (1 << (1 << n)) - 1


def is_unsat_cover(formula: Formula) -> bool:
    return CoverState.of(formula).union == full_mask(formula.n)


def is_unsat_bruteforce(formula: Formula) -> bool:
    n = formula.n
    if n > BRUTEFORCE_MAX_N:
        raise TooLarge(f"brute force capped at n={BRUTEFORCE_MAX_N}, got n={n}")
    alive = np.ones(1 << n, dtype=bool)
    a = np.arange(1 << n, dtype=np.int64)
    for c in formula.clauses:
        sat = np.zeros(1 << n, dtype=bool)
        for lit in c.lits:
            val = ((a >> (abs(lit) - 1)) & 1).astype(bool)
            sat |= val if lit > 0 else ~val
        alive &= sat
        if not alive.any():
            return True
    return not alive.any()


def covering_clauses(formula: Formula, v: int) -> set[int]:
    """Indices (canonical order) of the clauses falsified by assignment ``v``."""
    if not 0 <= v < 1 << formula.n:
        raise FormulaError(f"assignment index {v} out of range for n={formula.n}")
    return {j for j, c in enumerate(formula.clauses) if falsify_set(c) >> v & 1}


@dataclass(frozen=True)
class InsCertificate:
    """``pivots[j]`` is the assignment owned by clause ``j`` alone."""

    pivots: tuple[int, ...]

    def to_text(self) -> str:
        """One ``clauseIndex:pivotIndex`` line per clause, clause index 1-based."""
        return "".join(f"{j + 1}:{v}\n" for j, v in enumerate(self.pivots))

    @classmethod
    def from_text(cls, text: str) -> "InsCertificate":
        pairs = []
        for line in text.splitlines():
            if line.strip():
                j, v = line.split(":")
                pairs.append((int(j) - 1, int(v)))
        pairs.sort()
        if [j for j, _ in pairs] != list(range(len(pairs))):
            raise ValueError("certificate must list every clause exactly once")
        return cls(tuple(v for _, v in pairs))

    def verify(self, formula: Formula) -> bool:
        if len(self.pivots) != formula.m or not is_unsat_cover(formula):
            return False
        return all(covering_clauses(formula, v) == {j}
                   for j, v in enumerate(self.pivots))


def pivot_table(formula: Formula) -> list[Optional[int]]:
    """First pivot (lowest assignment index) for each clause, or None."""
    per = CoverState.of(formula).per_clause
    npoints = 1 << formula.n
    count = [0] * npoints
    for s in per:
        for v in bit_indices(s):
            count[v] += 1
    out: list[Optional[int]] = []
    for s in per:
        out.append(next((v for v in bit_indices(s) if count[v] == 1), None))
    return out


def ins_certificate(formula: Formula) -> Optional[InsCertificate]:
    if not is_unsat_cover(formula):
        return None
    pivots = pivot_table(formula)
    if any(p is None for p in pivots):
        return None
    return InsCertificate(tuple(pivots))  # type: ignore[arg-type]


def is_ins_by_deletion(formula: Formula) -> bool:
    if not is_unsat_cover(formula):
        return False
    for j in range(formula.m):
        rest = Formula(formula.clauses[:j] + formula.clauses[j + 1:], formula.n)
        if is_unsat_cover(rest):
            return False
    return True


@dataclass(frozen=True)
class InsBounds:
    n: int
    m_min: int
    m_max_real: Fraction

    @property
    def m_max_int(self) -> int:
        return floor(self.m_max_real)


def m_max(n: int) -> Fraction:
    if n < 3:
        raise FormulaError(f"need n >= 3, got {n}")
    c = comb(n, 3)
    return Fraction(c * 2 ** n, 2 ** (n - 3) + c - 1)


def ins_bounds(n: int) -> InsBounds:
    return InsBounds(n, 8, m_max(n))
