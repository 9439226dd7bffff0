"""Clauses, formulae and their canonical encodings.

A clause over ``n`` variables is stored as a sorted triple of signed DIMACS
literals.  Its *signature* is the clause's row in the literal-column matrix
(columns ``x1, ~x1, x2, ~x2, ..., xn, ~xn``, ``x1`` most significant) read
as a binary number.  A formula is a set of distinct clauses kept in strictly
descending signature order, which makes the signature tuple its canonical key.

Assignments are indexed ``i = a + 2b + 4c + ...`` with ``x1`` the least
significant bit; a falsify set is an integer bitmask over those indices.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, product
from math import comb
from typing import Iterable, Sequence

import numpy as np


class FormulaError(ValueError):
    """Raised for clauses or formulae that violate the 3-CNF invariants."""


class MalformedSignature(FormulaError):
    pass


class DimacsError(FormulaError):
    pass


def _check_n(n: int) -> None:
    if n < 3:
        raise FormulaError(f"need at least 3 variables, got n={n}")


@dataclass(frozen=True, order=False)
class Clause:
    """A disjunction of three literals over distinct variables.

    ``lits`` holds signed variable indices (``-3`` is ``~x3``) sorted by
    variable; construct through :meth:`of` to get that normalization.
    """

    lits: tuple[int, int, int]
    n: int

    def __post_init__(self) -> None:
        _check_n(self.n)
        if len(self.lits) != 3:
            raise FormulaError(f"a clause needs exactly 3 literals, got {self.lits}")
        vs = [abs(x) for x in self.lits]
        if 0 in vs:
            raise FormulaError("literal 0 is not a variable")
        if len(set(vs)) != 3:
            raise FormulaError(f"repeated variable in clause {self.lits}")
        if max(vs) > self.n:
            raise FormulaError(f"variable index out of range 1..{self.n} in {self.lits}")
        if vs != sorted(vs):
            raise FormulaError("literals must be sorted by variable; use Clause.of")

    @classmethod
    def of(cls, lits: Iterable[int], n: int) -> "Clause":
        lits = tuple(sorted(lits, key=abs))
        return cls(lits, n)  # type: ignore[arg-type]

    @property
    def vars(self) -> tuple[int, int, int]:
        return tuple(abs(x) for x in self.lits)  # type: ignore[return-value]

    @property
    def polarities(self) -> tuple[bool, bool, bool]:
        """True for a positive literal, False for a negated one."""
        return tuple(x > 0 for x in self.lits)  # type: ignore[return-value]

    @property
    def negations(self) -> int:
        return sum(1 for x in self.lits if x < 0)

    def row(self) -> list[int]:
        """The clause's 2n-column 0/1 row in the matrix representation."""
        cols = [0] * (2 * self.n)
        for lit in self.lits:
            cols[2 * (abs(lit) - 1) + (lit < 0)] = 1
        return cols

    def __str__(self) -> str:
        return " v ".join(f"x{x}" if x > 0 else f"~x{-x}" for x in self.lits)


def signature_of(clause: Clause) -> int:
    """Read the clause's matrix row as a binary number."""
    value = 0
    top = 2 * clause.n - 1
    for lit in clause.lits:
        value |= 1 << (top - (2 * (abs(lit) - 1) + (lit < 0)))
    return value


def signature_bounds(n: int) -> tuple[int, int]:
    _check_n(n)
    return 21, 21 * 2 ** (2 * n - 5)


def clause_from_signature(n: int, value: int) -> Clause:
    _check_n(n)
    if value < 0 or value >> (2 * n):
        raise MalformedSignature(f"signature {value} does not fit in {2 * n} columns")
    lits = []
    top = 2 * n - 1
    for var in range(1, n + 1):
        pos = (value >> (top - 2 * (var - 1))) & 1
        neg = (value >> (top - 2 * (var - 1) - 1)) & 1
        if pos and neg:
            raise MalformedSignature(
                f"signature {value} sets both columns of x{var}")
        if pos:
            lits.append(var)
        elif neg:
            lits.append(-var)
    if len(lits) != 3:
        raise MalformedSignature(
            f"signature {value} has {len(lits)} literals, expected 3")
    return Clause(tuple(lits), n)  # type: ignore[arg-type]


def falsify_set(clause: Clause, n: int | None = None) -> int:
    """Bitmask of the assignments on which every literal of ``clause`` is false.

    The three clause variables are pinned to their falsifying values and the
    remaining ``n - 3`` variables range freely, so exactly ``2**(n-3)`` bits
    are set.
    """
    n = clause.n if n is None else n
    if n != clause.n:
        raise FormulaError(f"clause lives in n={clause.n}, not n={n}")
    base = 0
    for lit in clause.lits:
        if lit < 0:
            base |= 1 << (abs(lit) - 1)
    pinned = {abs(x) - 1 for x in clause.lits}
    free = [b for b in range(n) if b not in pinned]
    bits = 0
    for choice in product((0, 1), repeat=len(free)):
        idx = base
        for b, on in zip(free, choice):
            if on:
                idx |= 1 << b
        bits |= 1 << idx
    return bits


def bit_indices(bits: int) -> list[int]:
    out = []
    i = 0
    while bits:
        if bits & 1:
            out.append(i)
        bits >>= 1
        i += 1
    return out


class Formula:
    """An immutable set of distinct clauses in descending-signature order."""

    __slots__ = ("n", "clauses", "_sigs")

    def __init__(self, clauses: Iterable[Clause], n: int | None = None):
        clauses = list(clauses)
        if not clauses:
            raise FormulaError("a formula needs at least one clause")
        if n is None:
            n = clauses[0].n
        for c in clauses:
            if c.n != n:
                raise FormulaError(f"clause {c} has n={c.n}, formula has n={n}")
        keyed = sorted(((signature_of(c), c) for c in clauses), key=lambda t: -t[0])
        sigs = tuple(s for s, _ in keyed)
        for a, b in zip(sigs, sigs[1:]):
            if a == b:
                raise FormulaError(f"duplicate clause {clause_from_signature(n, a)}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "clauses", tuple(c for _, c in keyed))
        object.__setattr__(self, "_sigs", sigs)

    def __setattr__(self, name, value):
        raise AttributeError("Formula is immutable")

    @classmethod
    def from_signatures(cls, n: int, sigs: Iterable[int]) -> "Formula":
        return cls([clause_from_signature(n, u) for u in sigs], n)

    @classmethod
    def from_lits(cls, n: int, rows: Iterable[Sequence[int]]) -> "Formula":
        return cls([Clause.of(r, n) for r in rows], n)

    @property
    def m(self) -> int:
        return len(self.clauses)

    @property
    def signature(self) -> tuple[int, ...]:
        return self._sigs

    def __len__(self) -> int:
        return len(self.clauses)

    def __iter__(self):
        return iter(self.clauses)

    def __eq__(self, other) -> bool:
        return (isinstance(other, Formula) and self.n == other.n
                and self._sigs == other._sigs)

    def __hash__(self) -> int:
        return hash((self.n, self._sigs))

    def __repr__(self) -> str:
        return f"Formula(n={self.n}, sigs={list(self._sigs)})"

    def union(self, other: "Formula") -> "Formula":
        return Formula(self.clauses + other.clauses, self.n)

    def falsify_sets(self) -> list[int]:
        return [falsify_set(c) for c in self.clauses]


def formula_signature(formula: Formula) -> list[int]:
    return list(formula.signature)


def size_of(formula: Formula) -> int:
    """Number of logical connectives: two ``or`` per clause, ``m - 1`` ``and``
    and one ``not`` per negated literal."""
    m = formula.m
    return 2 * m + (m - 1) + sum(c.negations for c in formula.clauses)


def clause_universe(n: int) -> list[Clause]:
    """All ``8 * C(n, 3)`` clauses over ``n`` variables, descending signature."""
    _check_n(n)
    out = []
    for vs in combinations(range(1, n + 1), 3):
        for signs in product((1, -1), repeat=3):
            out.append(Clause(tuple(s * v for s, v in zip(signs, vs)), n))  # type: ignore[arg-type]
    out.sort(key=signature_of, reverse=True)
    assert len(out) == 8 * comb(n, 3)
    return out


def falsify_table_order(n: int = 4) -> list[Clause]:
    """Clauses in falsify-table row order.

    Variable triples run lexicographically; within a triple, row ``r`` makes
    literal ``k`` positive iff bit ``k`` of ``r`` is set, so the first row
    is all-negative and the eighth all-positive.
    """
    _check_n(n)
    out = []
    for vs in combinations(range(1, n + 1), 3):
        for r in range(8):
            lits = tuple(v if (r >> k) & 1 else -v for k, v in enumerate(vs))
            out.append(Clause(lits, n))  # type: ignore[arg-type]
    return out


# -- DIMACS -----------------------------------------------------------------

def read_dimacs_clauses(text: str | bytes) -> tuple[int, list[Clause]]:
    """Parse DIMACS CNF and return ``(n, clauses)`` in file order."""
    if isinstance(text, bytes):
        text = text.decode("ascii")
    n = None
    declared = None
    clauses: list[Clause] = []
    pending: list[int] = []
    seen: dict[tuple[int, ...], int] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise DimacsError(f"line {lineno}: bad problem line {line!r}")
            if n is not None:
                raise DimacsError(f"line {lineno}: second problem line")
            try:
                n, declared = int(parts[2]), int(parts[3])
            except ValueError:
                raise DimacsError(f"line {lineno}: bad problem line {line!r}") from None
            if n < 3:
                raise DimacsError(f"line {lineno}: need n >= 3, got {n}")
            continue
        if n is None:
            raise DimacsError(f"line {lineno}: clause before problem line")
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise DimacsError(f"line {lineno}: bad literal {tok!r}") from None
            if lit != 0:
                pending.append(lit)
                continue
            if len(pending) != 3:
                raise DimacsError(
                    f"line {lineno}: clause has {len(pending)} literals, expected 3")
            vs = [abs(x) for x in pending]
            if len(set(vs)) != 3:
                raise DimacsError(f"line {lineno}: repeated variable in clause {pending}")
            if max(vs) > n:
                raise DimacsError(
                    f"line {lineno}: variable index out of range 1..{n} in {pending}")
            c = Clause.of(pending, n)
            if c.lits in seen:
                raise DimacsError(
                    f"line {lineno}: duplicate clause (first seen as clause {seen[c.lits]})")
            clauses.append(c)
            seen[c.lits] = len(clauses)
            pending = []
    if n is None:
        raise DimacsError("missing problem line")
    if pending:
        raise DimacsError("last clause is not terminated by 0")
    if not clauses:
        raise DimacsError("no clauses")
    if declared != len(clauses):
        raise DimacsError(f"problem line declares {declared} clauses, found {len(clauses)}")
    return n, clauses


def parse_dimacs(text: str | bytes) -> Formula:
    n, clauses = read_dimacs_clauses(text)
    return Formula(clauses, n)


def emit_dimacs(formula: Formula) -> bytes:
    lines = [f"p cnf {formula.n} {formula.m}"]
    lines += [" ".join(map(str, c.lits)) + " 0" for c in formula.clauses]
    return ("\n".join(lines) + "\n").encode("ascii")


# -- signature text format ---------------------------------------------------

def format_signature_line(formula: Formula) -> str:
    return ",".join(map(str, formula.signature))


def parse_signature_line(n: int, line: str) -> Formula:
    try:
        sigs = [int(tok) for tok in line.strip().split(",")]
    except ValueError:
        raise MalformedSignature(f"not a signature line: {line!r}") from None
    if any(a <= b for a, b in zip(sigs, sigs[1:])):
        raise MalformedSignature(f"signatures not strictly descending: {line!r}")
    return Formula.from_signatures(n, sigs)


# -- array views for the kernels ---------------------------------------------

@dataclass(frozen=True, eq=False)
class Universe:
    """The clause universe of one ``n`` as parallel arrays.

    Position ``j`` refers to ``clauses[j]`` (descending signature); selection
    keys put clause ``j`` on bit ``j``.
    """

    n: int
    clauses: tuple[Clause, ...]
    sigs: tuple[int, ...]
    masks: "np.ndarray"
    cvars: "np.ndarray"
    cpols: "np.ndarray"
    position: dict

    def key_of(self, formula: Formula) -> int:
        if formula.n != self.n:
            raise FormulaError(f"formula has n={formula.n}, universe n={self.n}")
        key = 0
        for c in formula.clauses:
            key |= 1 << self.position[c]
        return key

    def formula_of(self, key: int) -> Formula:
        return Formula([self.clauses[j] for j in bit_indices(int(key))], self.n)

    def indices_of(self, formula: Formula) -> list[int]:
        return [self.position[c] for c in formula.clauses]


@lru_cache(maxsize=None)
def universe(n: int) -> Universe:
    if n > 6:
        raise FormulaError(f"mask arrays hold at most 64 assignments; n={n} > 6")
    clauses = tuple(clause_universe(n))
    masks = np.array([falsify_set(c) for c in clauses], dtype=np.uint64)
    cvars = np.array([c.vars for c in clauses], dtype=np.int64)
    cpols = np.array([[int(p) for p in c.polarities] for c in clauses], dtype=np.int64)
    return Universe(n, clauses, tuple(signature_of(c) for c in clauses),
                    masks, cvars, cpols, {c: j for j, c in enumerate(clauses)})
