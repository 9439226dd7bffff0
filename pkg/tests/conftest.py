import io

import pytest

from cnflab.catalog import build_catalog, parse_catalog
from cnflab.formula import Clause, Formula, falsify_table_order

# Reference falsify-set table for n = 4: row label, then columns 0..15.
TABLE2 = [
    ("~x1 v ~x2 v ~x3", "0000000100000001"),
    ("x1 v ~x2 v ~x3", "0000001000000010"),
    ("~x1 v x2 v ~x3", "0000010000000100"),
    ("x1 v x2 v ~x3", "0000100000001000"),
    ("~x1 v ~x2 v x3", "0001000000010000"),
    ("x1 v ~x2 v x3", "0010000000100000"),
    ("~x1 v x2 v x3", "0100000001000000"),
    ("x1 v x2 v x3", "1000000010000000"),
    ("~x1 v ~x2 v ~x4", "0000000000010001"),
    ("x1 v ~x2 v ~x4", "0000000000100010"),
    ("~x1 v x2 v ~x4", "0000000001000100"),
    ("x1 v x2 v ~x4", "0000000010001000"),
    ("~x1 v ~x2 v x4", "0001000100000000"),
    ("x1 v ~x2 v x4", "0010001000000000"),
    ("~x1 v x2 v x4", "0100010000000000"),
    ("x1 v x2 v x4", "1000100000000000"),
    ("~x1 v ~x3 v ~x4", "0000000000000101"),
    ("x1 v ~x3 v ~x4", "0000000000001010"),
    ("~x1 v x3 v ~x4", "0000000001010000"),
    ("x1 v x3 v ~x4", "0000000010100000"),
    ("~x1 v ~x3 v x4", "0000010100000000"),
    ("x1 v ~x3 v x4", "0000101000000000"),
    ("~x1 v x3 v x4", "0101000000000000"),
    ("x1 v x3 v x4", "1010000000000000"),
    ("~x2 v ~x3 v ~x4", "0000000000000011"),
    ("x2 v ~x3 v ~x4", "0000000000001100"),
    ("~x2 v x3 v ~x4", "0000000000110000"),
    ("x2 v x3 v ~x4", "0000000011000000"),
    ("~x2 v ~x3 v x4", "0000001100000000"),
    ("x2 v ~x3 v x4", "0000110000000000"),
    ("~x2 v x3 v x4", "0011000000000000"),
    ("x2 v x3 v x4", "1100000000000000"),
]


def parse_label(label: str, n: int = 4) -> Clause:
    lits = []
    for tok in label.split(" v "):
        neg = tok.startswith("~")
        v = int(tok.lstrip("~x"))
        lits.append(-v if neg else v)
    return Clause.of(lits, n)


TABLE1_DIMACS = "p cnf 4 3\n1 2 -3 0\n-2 3 -4 0\n-1 -3 4 0\n"


@pytest.fixture
def table1():
    return Formula.from_lits(4, [(1, 2, -3), (-2, 3, -4), (-1, -3, 4)])


@pytest.fixture
def table2_rows():
    return falsify_table_order(4)


@pytest.fixture
def first8(table2_rows):
    return Formula(table2_rows[:8], 4)


@pytest.fixture
def first9(table2_rows):
    return Formula(table2_rows[:9], 4)


@pytest.fixture(scope="session")
def ins_catalog_bytes():
    buf = io.BytesIO()
    build_catalog(4, "INS", (8, 12), buf)
    return buf.getvalue()


@pytest.fixture(scope="session")
def ins_catalog(ins_catalog_bytes):
    return parse_catalog(ins_catalog_bytes)


# One line per acceptance criterion, printed after the run.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
