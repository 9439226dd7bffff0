from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cnflab import kernels
from cnflab.census import count_ins_enum
from cnflab.formula import Formula, FormulaError, clause_universe, universe
from cnflab.sat import (InsCertificate, TooLarge, covering_clauses, ins_bounds,
                        ins_certificate, is_ins_by_deletion, is_unsat_bruteforce,
                        is_unsat_cover, pivot_table)


def test_first8_unsat(first8):
    assert is_unsat_cover(first8)
    assert is_unsat_bruteforce(first8)


def test_table1_sat(table1):
    assert not is_unsat_cover(table1)
    assert not is_unsat_bruteforce(table1)
    # points falsifying some clause, evaluated literal by literal
    bad = set()
    for i in range(16):
        val = [None] + [(i >> (v - 1)) & 1 for v in range(1, 5)]
        if not all(any(val[abs(x)] == (x > 0) for x in c.lits) for c in table1.clauses):
            bad.add(i)
    assert bad == {i for i in range(16) if covering_clauses(table1, i)}
    assert len(bad) == 6


@pytest.mark.parametrize("m", range(1, 8))
def test_under_eight_clauses_always_sat(m):
    rng = np.random.default_rng(m)
    U = clause_universe(4)
    for _ in range(50):
        pick = rng.choice(len(U), size=m, replace=False)
        assert not is_unsat_cover(Formula([U[i] for i in pick], 4))


def test_bruteforce_guard():
    big = Formula.from_lits(25, [(1, 2, 3)])
    with pytest.raises(TooLarge):
        is_unsat_bruteforce(big)


def test_column13_of_full_table(table2_rows):
    full = Formula(table2_rows, 4)
    hits = covering_clauses(full, 13)
    labels = {tuple(full.clauses[j].lits) for j in hits}
    # rows with a 1 in column 13: the boxed row and three underlined ones
    assert labels == {(-1, 2, -3), (-1, 2, -4), (-1, -3, -4), (2, -3, -4)}
    assert len(hits) == 4  # at most C(4, 3)


def test_covering_clauses_empty_and_singleton(table1):
    # assignment 1 (x1 = 1, rest 0) satisfies everything
    assert covering_clauses(table1, 1) == set()
    for v in range(16):
        for j in covering_clauses(table1, v):
            assert table1.falsify_sets()[j] >> v & 1
    with pytest.raises(FormulaError):
        covering_clauses(table1, 16)


def test_first8_certificate(first8):
    cert = ins_certificate(first8)
    assert cert is not None
    assert cert.verify(first8)
    # disjoint falsify sets: each clause's first point is its pivot
    for j, v in enumerate(cert.pivots):
        assert covering_clauses(first8, v) == {j}
    assert is_ins_by_deletion(first8)


def test_first9_not_ins(first9, table2_rows):
    assert is_unsat_cover(first9)
    assert ins_certificate(first9) is None
    assert not is_ins_by_deletion(first9)
    pivots = pivot_table(first9)
    ninth = first9.clauses.index(table2_rows[8])
    assert [j for j, p in enumerate(pivots) if p is None] == [ninth]
    # both points of the ninth clause are also hit by an earlier clause
    assert covering_clauses(first9, 11) == {ninth, first9.clauses.index(table2_rows[4])}
    assert covering_clauses(first9, 15) == {ninth, first9.clauses.index(table2_rows[0])}


def test_satisfiable_has_no_certificate(table1):
    assert ins_certificate(table1) is None
    assert not is_ins_by_deletion(table1)
    single = Formula.from_lits(4, [(1, 2, 3)])
    assert ins_certificate(single) is None
    assert not is_ins_by_deletion(single)


def test_certificate_text_round_trip(first8):
    cert = ins_certificate(first8)
    text = cert.to_text()
    assert text.splitlines()[0] == f"1:{cert.pivots[0]}"
    assert InsCertificate.from_text(text) == cert
    with pytest.raises(ValueError):
        InsCertificate.from_text("1:3\n3:4\n")


def test_bad_certificate_rejected(first8):
    cert = ins_certificate(first8)
    wrong = InsCertificate((cert.pivots[1],) + cert.pivots[1:])
    assert not wrong.verify(first8)
    assert not InsCertificate(cert.pivots[:-1]).verify(first8)


def test_ins_bounds():
    b = ins_bounds(4)
    assert b.m_min == 8
    assert b.m_max_real == Fraction(64, 5)
    assert b.m_max_int == 12
    b5 = ins_bounds(5)
    assert b5.m_max_real == Fraction(320, 13)
    assert b5.m_max_int == 24
    for n in range(4, 12):
        assert ins_bounds(n).m_max_real > 8
    assert ins_bounds(3).m_max_real == 8
    with pytest.raises(FormulaError):
        ins_bounds(2)


def _random_formula(rng, n, m):
    U = clause_universe(n)
    pick = rng.choice(len(U), size=min(m, len(U)), replace=False)
    return Formula([U[i] for i in pick], n)


def test_scalar_oracles_agree_on_random_formulae():
    rng = np.random.default_rng(1234)
    for _ in range(1500):
        n = int(rng.integers(3, 7))
        m = int(rng.integers(1, 21))
        f = _random_formula(rng, n, m)
        assert is_unsat_cover(f) == is_unsat_bruteforce(f)


def test_scalar_ins_classifiers_agree_on_unsat_formulae():
    rng = np.random.default_rng(99)
    checked = 0
    while checked < 400:
        f = _random_formula(rng, 4, int(rng.integers(8, 14)))
        if not is_unsat_cover(f):
            continue
        checked += 1
        cert = ins_certificate(f)
        assert (cert is not None) == is_ins_by_deletion(f)
        if cert is not None:
            assert cert.verify(f)


@settings(max_examples=150, deadline=None)
@given(st.data())
def test_monotone_under_superset(data):
    U = clause_universe(4)
    big = data.draw(st.lists(st.sampled_from(U), min_size=8, max_size=24, unique=True))
    k = data.draw(st.integers(1, len(big)))
    small = Formula(big[:k], 4)
    if is_unsat_cover(small):
        assert is_unsat_cover(Formula(big, 4))


@settings(max_examples=150, deadline=None)
@given(st.data())
def test_certificate_replay(data):
    U = clause_universe(4)
    picks = data.draw(st.lists(st.sampled_from(U), min_size=8, max_size=12, unique=True))
    f = Formula(picks, 4)
    cert = ins_certificate(f)
    if cert is not None:
        for j, v in enumerate(cert.pivots):
            assert covering_clauses(f, v) == {j}
            assert v == min(x for x in range(16) if covering_clauses(f, x) == {j})


def test_kernel_classifiers_match_scalar():
    rng = np.random.default_rng(5)
    U = universe(4)
    sels = np.zeros((300, 14), dtype=np.int64)
    sizes = np.zeros(300, dtype=np.int64)
    formulas = []
    for r in range(300):
        k = int(rng.integers(1, 15))
        pick = rng.choice(32, size=k, replace=False)
        sels[r, :k] = pick
        sizes[r] = k
        formulas.append(Formula([U.clauses[i] for i in pick], 4))
    for scan in (kernels.nb_batch_ins_scan, kernels.np_batch_ins_scan):
        got = scan(U.masks, 4, sels, sizes)
        for r, f in enumerate(formulas):
            assert got[r, 0] == (ins_certificate(f) is not None)
            assert got[r, 1] == is_ins_by_deletion(f)
    for scan in (kernels.nb_batch_sat_scan, kernels.np_batch_sat_scan):
        got = scan(U.masks, U.cvars, U.cpols, 4, sels, sizes)
        for r, f in enumerate(formulas):
            assert got[r, 0] == is_unsat_cover(f)
            assert got[r, 1] == is_unsat_bruteforce(f)


def test_bounds_enforced_exhaustively():
    U = universe(4)
    for m in range(1, 10):
        total, unsat, piv, dele, bad = kernels.exhaustive_ins_scan(U.masks, 4, m)
        assert bad == 0
        if m < 8:
            assert unsat == piv == dele == 0
    assert count_ins_enum(4, 13, respect_bounds=False) == 0
    assert count_ins_enum(4, 7, respect_bounds=False) == 0


def test_bounds_random_large_m():
    rng = np.random.default_rng(7)
    for _ in range(300):
        f = _random_formula(rng, 4, int(rng.integers(13, 33)))
        assert ins_certificate(f) is None
    for _ in range(100):
        f = _random_formula(rng, 5, int(rng.integers(25, 60)))
        assert ins_certificate(f) is None
