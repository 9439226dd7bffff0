"""Persisted, sorted catalogs of INS or unsatisfiable formulae.

A catalog file is line oriented ASCII::

    v1 n=4 kind=INS mlow=8 mhigh=8 count=272
    209,...,21
    ...

Each entry line is a formula's descending signature tuple.  Entries are
sorted by numeric tuple comparison, so a shorter tuple precedes every tuple
it prefixes.  Lookups run the query pipeline: compute clause signatures, sort
them, then binary search the section of entries of the same length.
"""

from __future__ import annotations

import re
from bisect import bisect_left
from dataclasses import dataclass, field
from functools import cached_property, cmp_to_key
from pathlib import Path
from typing import BinaryIO, Iterable, Sequence

import numpy as np

from . import kernels
from .census import Budget, ins_keys, universe_size
from .formula import Formula, FormulaError, bit_indices, signature_bounds, universe
from .sat import ins_bounds, ins_certificate, is_unsat_cover

FORMAT_VERSION = 1
KINDS = ("INS", "UNSAT")
_HEADER = re.compile(
    r"^v(\d+) n=(\d+) kind=(INS|UNSAT) mlow=(\d+) mhigh=(\d+) count=(\d+)$")


class CatalogError(ValueError):
    pass


@dataclass(frozen=True)
class CatalogHeader:
    n: int
    kind: str
    m_low: int
    m_high: int
    entry_count: int
    format_version: int = FORMAT_VERSION

    def line(self) -> str:
        return (f"v{self.format_version} n={self.n} kind={self.kind} "
                f"mlow={self.m_low} mhigh={self.m_high} count={self.entry_count}")


@dataclass
class OperationReport:
    """Abstract operation counts of one lookup, per pipeline stage.

    ``search_comparisons`` counts three-way tuple comparisons during the
    binary search.
    """

    signature_ops: int = 0
    sort_comparisons: int = 0
    search_comparisons: int = 0
    section_size: int = 0

    @property
    def total(self) -> int:
        return self.signature_ops + self.sort_comparisons + self.search_comparisons


@dataclass
class Catalog:
    header: CatalogHeader
    entries: list[tuple[int, ...]]
    _sections: dict[int, list[tuple[int, ...]]] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        for e in self.entries:
            self._sections.setdefault(len(e), []).append(e)

    @property
    def n(self) -> int:
        return self.header.n

    def section(self, m: int) -> list[tuple[int, ...]]:
        return self._sections.get(m, [])

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, formula: Formula) -> bool:
        return lookup(self, formula)[0]

    def formulas(self) -> Iterable[Formula]:
        for e in self.entries:
            yield Formula.from_signatures(self.n, e)

    @cached_property
    def keys_by_size(self) -> dict[int, np.ndarray]:
        """Sorted selection keys per formula size (universe of <= 64 clauses)."""
        U = universe(self.n)
        pos = {u: j for j, u in enumerate(U.sigs)}
        out = {}
        for m, sec in self._sections.items():
            keys = [sum(1 << pos[u] for u in e) for e in sec]
            out[m] = np.array(sorted(keys), dtype=np.uint64)
        return out

    @cached_property
    def ordered_keys(self) -> tuple[np.ndarray, list[tuple[int, ...]]]:
        """Entries ascending by (size, tuple) with their selection keys."""
        U = universe(self.n)
        pos = {u: j for j, u in enumerate(U.sigs)}
        order = sorted(self.entries, key=lambda e: (len(e), e))
        keys = np.array([sum(1 << pos[u] for u in e) for e in order], dtype=np.uint64)
        return keys, order


def _entries_for(n: int, kind: str, m: int, budget: Budget) -> list[tuple[int, ...]]:
    U = universe(n)
    if kind == "INS":
        b = ins_bounds(n)
        if not b.m_min <= m <= b.m_max_int:
            return []
        keys = ins_keys(n, m, budget)
    else:
        full = np.uint64((1 << (1 << n)) - 1)
        empty = np.zeros(0, dtype=np.uint64)
        total = int(kernels.collect_cover_keys(U.masks, full, m, empty))
        keys = np.zeros(total, dtype=np.uint64)
        kernels.collect_cover_keys(U.masks, full, m, keys)
    sigs = U.sigs
    return [tuple(sigs[j] for j in bit_indices(int(k))) for k in keys]


def build_entries(n: int, kind: str, m_range: tuple[int, int],
                  budget: Budget = Budget()) -> list[tuple[int, ...]]:
    if kind not in KINDS:
        raise CatalogError(f"kind must be one of {KINDS}, got {kind!r}")
    lo, hi = m_range
    if not 1 <= lo <= hi <= universe_size(n):
        raise CatalogError(f"bad m range {m_range} for n={n}")
    entries = []
    for m in range(lo, hi + 1):
        entries.extend(_entries_for(n, kind, m, budget))
    entries.sort()
    return entries


def render(header: CatalogHeader, entries: Sequence[tuple[int, ...]]) -> bytes:
    lines = [header.line()] + [",".join(map(str, e)) for e in entries]
    return ("\n".join(lines) + "\n").encode("ascii")


def build_catalog(n: int, kind: str, m_range: tuple[int, int], sink: BinaryIO | str | Path,
                  budget: Budget = Budget()) -> CatalogHeader:
    """Enumerate the catalog's formulae and write the file.

    Entries are fully enumerated before the header is formed, so the header's
    count always matches the body.
    """
    entries = build_entries(n, kind, m_range, budget)
    header = CatalogHeader(n, kind, m_range[0], m_range[1], len(entries))
    data = render(header, entries)
    if isinstance(sink, (str, Path)):
        Path(sink).write_bytes(data)
    else:
        sink.write(data)
    return header


def parse_catalog(data: bytes | str) -> Catalog:
    if isinstance(data, bytes):
        data = data.decode("ascii")
    lines = data.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise CatalogError("empty catalog")
    mo = _HEADER.match(lines[0])
    if not mo:
        raise CatalogError(f"bad catalog header {lines[0]!r}")
    version, n, kind, lo, hi, count = mo.groups()
    if int(version) != FORMAT_VERSION:
        raise CatalogError(f"unsupported catalog version {version}")
    header = CatalogHeader(int(n), kind, int(lo), int(hi), int(count), int(version))
    if header.entry_count != len(lines) - 1:
        raise CatalogError(
            f"header says {header.entry_count} entries, file has {len(lines) - 1}")
    smin, smax = signature_bounds(header.n)
    entries = []
    for i, line in enumerate(lines[1:], 2):
        try:
            e = tuple(int(t) for t in line.split(","))
        except ValueError:
            raise CatalogError(f"line {i}: bad entry {line!r}") from None
        if any(a <= b for a, b in zip(e, e[1:])):
            raise CatalogError(f"line {i}: signatures not strictly descending")
        if not header.m_low <= len(e) <= header.m_high:
            raise CatalogError(f"line {i}: {len(e)} clauses outside m range")
        if e[0] > smax or e[-1] < smin:
            raise CatalogError(f"line {i}: signature out of range for n={header.n}")
        if entries and entries[-1] >= e:
            raise CatalogError(f"line {i}: entries not sorted")
        entries.append(e)
    return Catalog(header, entries)


def load_catalog(path: str | Path) -> Catalog:
    return parse_catalog(Path(path).read_bytes())


def verify_catalog(catalog: Catalog) -> int:
    """Re-check every entry with the decision procedures; return the count."""
    for e in catalog.entries:
        try:
            f = Formula.from_signatures(catalog.n, e)
        except FormulaError as exc:
            raise CatalogError(f"entry {e}: {exc}") from None
        if catalog.header.kind == "INS":
            ok = ins_certificate(f) is not None
        else:
            ok = is_unsat_cover(f)
        if not ok:
            raise CatalogError(f"entry {e} is not {catalog.header.kind}")
    return len(catalog.entries)


def _cmp(a, b) -> int:
    return (a > b) - (a < b)


def lookup(catalog: Catalog, formula: Formula) -> tuple[bool, OperationReport]:
    if formula.n != catalog.n:
        raise CatalogError(f"formula has n={formula.n}, catalog n={catalog.n}")
    rep = OperationReport()
    sigs = []
    for c in formula.clauses:
        row = c.row()
        sigs.append(sum(bit << (len(row) - 1 - i) for i, bit in enumerate(row)))
        rep.signature_ops += 2 * catalog.n

    def counted(a, b):
        rep.sort_comparisons += 1
        return _cmp(b, a)

    key = tuple(sorted(sigs, key=cmp_to_key(counted)))
    section = catalog.section(len(key))
    rep.section_size = len(section)
    lo, hi = 0, len(section)
    while lo < hi:
        mid = (lo + hi) // 2
        rep.search_comparisons += 1
        c = _cmp(section[mid], key)
        if c == 0:
            return True, rep
        if c < 0:
            lo = mid + 1
        else:
            hi = mid
    return False, rep


def contains_sorted(entries: Sequence[tuple[int, ...]], key: tuple[int, ...]) -> bool:
    i = bisect_left(entries, key)
    return i < len(entries) and entries[i] == key


def is_subformula(small: Formula, big: Formula) -> bool:
    """Merge pass over the two descending signature lists."""
    if small.n != big.n:
        raise FormulaError(f"n mismatch: {small.n} vs {big.n}")
    a, b = small.signature, big.signature
    j = 0
    for u in a:
        while j < len(b) and b[j] > u:
            j += 1
        if j == len(b) or b[j] != u:
            return False
        j += 1
    return True
