import re
import subprocess
import sys

import pytest

from cnflab.cli import build_parser, run
from cnflab.formula import parse_dimacs

from .conftest import TABLE1_DIMACS

SUBCOMMANDS = ("sig", "check-sat", "check-ins", "census", "build-catalog", "query",
               "gen-noisy", "reduce", "bounds")


def _dimacs_in_order(clauses):
    return "p cnf 4 %d\n" % len(clauses) + "".join(
        " ".join(map(str, c.lits)) + " 0\n" for c in clauses)


@pytest.fixture
def files(tmp_path, table2_rows, ins_catalog_bytes):
    paths = {"t1": tmp_path / "table1.cnf", "f8": tmp_path / "first8.cnf",
             "f9": tmp_path / "first9.cnf", "cat": tmp_path / "ins.cat"}
    paths["t1"].write_text(TABLE1_DIMACS)
    # table order, so the ninth row is clause 9 of the file
    paths["f8"].write_text(_dimacs_in_order(table2_rows[:8]))
    paths["f9"].write_text(_dimacs_in_order(table2_rows[:9]))
    paths["cat"].write_bytes(ins_catalog_bytes)
    out = {k: str(v) for k, v in paths.items()}
    out["dir"] = tmp_path
    return out


def _run(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_sig(capsys, files, tmp_path):
    assert _run(capsys, "sig", "--dimacs", files["t1"]) == (0, "164,70,25\n", "")
    code, out, _ = _run(capsys, "sig", "--line", "164,70,25", "--n", "4")
    assert code == 0 and parse_dimacs(out) == parse_dimacs(TABLE1_DIMACS)
    code, _, err = _run(capsys, "sig", "--line", "25,70,164", "--n", "4")
    assert code == 1 and err.startswith("error:")


def test_check_sat(capsys, files):
    assert _run(capsys, "check-sat", "--dimacs", files["t1"])[:2] == (0, "SAT\n")
    for method in ("cover", "bruteforce", "both"):
        assert _run(capsys, "check-sat", "--dimacs", files["f8"],
                    "--method", method)[:2] == (0, "UNSAT\n")


def test_check_ins(capsys, files):
    code, out, _ = _run(capsys, "check-ins", "--dimacs", files["f9"])
    assert (code, out) == (0, "NOT-INS (clause 9 has no pivot)\n")
    code, out, _ = _run(capsys, "check-ins", "--dimacs", files["t1"])
    assert (code, out) == (0, "NOT-INS (satisfiable)\n")
    code, out, _ = _run(capsys, "check-ins", "--dimacs", files["f8"])
    lines = out.splitlines()
    assert code == 0 and lines[0] == "INS" and len(lines) == 9
    assert all(re.fullmatch(r"\d+:\d+", x) for x in lines[1:])


def test_census(capsys, files):
    out_path = files["dir"] / "census.csv"
    code, _, _ = _run(capsys, "census", "--n", "4", "--m", "1..10", "--out", str(out_path))
    assert code == 0
    lines = out_path.read_text().splitlines()
    assert lines[0] == "n,m,total,unsat,ins,method"
    assert lines[8] == "4,8,10518300,272,272,both"
    assert len(lines) == 11
    first = out_path.read_bytes()
    _run(capsys, "census", "--n", "4", "--m", "1..10", "--out", str(out_path))
    assert out_path.read_bytes() == first


def test_census_partitions(capsys):
    totals = 0
    for i in range(3):
        code, out, _ = _run(capsys, "census", "--m", "9", "--method", "enumeration",
                            "--partitions", "3", "--partition-index", str(i))
        assert code == 0
        totals += int(out.splitlines()[1].split(",")[3])
    assert totals == 15936
    code, _, err = _run(capsys, "census", "--m", "9", "--partitions", "3",
                        "--partition-index", "0")
    assert code == 1 and "partition" in err


def test_census_budget(capsys):
    code, _, err = _run(capsys, "census", "--m", "12", "--method", "enumeration",
                        "--max-nodes", "100")
    assert code == 1 and "budget exceeded" in err
    assert _run(capsys, "census", "--m", "8", "--budget", "0")[0] == 1


def test_build_catalog_and_query(capsys, files):
    out = files["dir"] / "c8.cat"
    code, stdout, _ = _run(capsys, "build-catalog", "--n", "4", "--m", "8..8",
                           "--out", str(out), "--verify")
    assert code == 0
    assert stdout == "v1 n=4 kind=INS mlow=8 mhigh=8 count=272\n"
    first = out.read_bytes()
    _run(capsys, "build-catalog", "--n", "4", "--m", "8..8", "--out", str(out))
    assert out.read_bytes() == first
    code, stdout, _ = _run(capsys, "query", "--catalog", str(out), "--dimacs", files["f8"])
    assert code == 0 and stdout.splitlines()[0] == "MEMBER"
    assert "search_comparisons=" in stdout
    code, stdout, _ = _run(capsys, "query", "--catalog", files["cat"], "--dimacs", files["f9"])
    assert stdout.splitlines()[0] == "NOT-MEMBER"


def test_gen_noisy_and_reduce(capsys, files):
    code, out1, _ = _run(capsys, "gen-noisy", "--dimacs", files["f8"], "--seed", "5")
    assert code == 0
    code, out2, _ = _run(capsys, "gen-noisy", "--dimacs", files["f8"], "--seed", "5")
    assert out1 == out2 and parse_dimacs(out1).m == 16
    noisy = files["dir"] / "noisy.cnf"
    noisy.write_text(out1)
    code, out, _ = _run(capsys, "reduce", "--catalog", files["cat"], "--dimacs", str(noisy))
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("subsets-first visited=")
    assert lines[1].startswith("catalog-first visited=")
    assert all("found=none" not in x for x in lines)
    code, out, _ = _run(capsys, "gen-noisy", "--catalog", files["cat"], "--m", "10",
                        "--seed", "1")
    assert code == 0 and parse_dimacs(out).m == 20
    assert _run(capsys, "gen-noisy", "--dimacs", files["f9"], "--seed", "1")[0] == 1
    assert _run(capsys, "gen-noisy", "--seed", "1")[0] == 1


def test_reduce_batch(capsys, files):
    argv = ("reduce", "--catalog", files["cat"], "--m", "8..9", "--instances", "3")
    code, out, _ = _run(capsys, *argv)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "rngSeed,n,m,approach,foundSize,visited,membershipChecks"
    assert len(lines) == 1 + 2 * 3 * 2
    assert _run(capsys, *argv)[1] == out
    assert _run(capsys, "reduce", "--catalog", files["cat"])[0] == 1


def test_bounds(capsys, files):
    code, out, _ = _run(capsys, "bounds", "--n", "4")
    assert code == 0
    assert "m_max=64/5 (~12.8)" in out and "m_max_int=12" in out
    assert "numerator_terms=64,53,42,31,20" in out and "numerator=88327680" in out
    assert "observed_ins_sum=unknown" in out
    csv = files["dir"] / "c.csv"
    csv.write_text("n,m,total,unsat,ins,method\n4,8,10518300,272,272,both\n")
    code, out, _ = _run(capsys, "bounds", "--n", "4", "--census", str(csv))
    assert "observed_ins_sum=272" in out and "bound_below_observed=False" in out
    code, out, _ = _run(capsys, "bounds", "--n", "3")
    assert code == 0 and "numerator" not in out


def test_missing_file(capsys):
    code, out, err = _run(capsys, "sig", "--dimacs", "/nonexistent/x.cnf")
    assert code == 1 and out == ""
    assert err == "error: file not found: /nonexistent/x.cnf\n"


def test_malformed_dimacs(capsys, files):
    bad = files["dir"] / "bad.cnf"
    bad.write_text("p cnf 4 1\n1 2 0\n")
    code, _, err = _run(capsys, "check-sat", "--dimacs", str(bad))
    assert code == 1 and err.count("\n") == 1 and "literals" in err


def test_usage_errors(capsys):
    assert _run(capsys)[0] == 2
    assert _run(capsys, "census", "--n", "4")[0] == 2
    assert _run(capsys, "census", "--m", "5..2")[0] == 2
    assert _run(capsys, "sig", "--dimacs", "x", "--bogus")[0] == 2
    assert _run(capsys, "frobnicate")[0] == 2


@pytest.mark.parametrize("name", SUBCOMMANDS)
def test_help_lists_every_flag(capsys, name):
    code, text, _ = _run(capsys, name, "--help")
    assert code == 0
    sub = build_parser()._subparsers._group_actions[0].choices[name]
    for action in sub._actions:
        for opt in action.option_strings:
            assert opt in text
        if action.option_strings and action.dest != "help":
            assert action.help, f"{name} {action.option_strings} undocumented"


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "cnflab", "bounds", "--n", "4"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "m_max_int=12" in r.stdout
