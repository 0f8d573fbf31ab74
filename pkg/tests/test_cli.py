import json
import subprocess
import sys
from fractions import Fraction

import pytest

from bernstein_sl2.cli import EXIT_BUDGET, EXIT_FAIL, EXIT_OK, EXIT_USAGE, UsageError, main, parse_entry
from bernstein_sl2.tables import CSV_HEADER


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_tables_markdown(capsys):
    code, out, _ = run(capsys, "tables", "--q", "3", "--depth-max", "1", "--format", "md")
    assert code == EXIT_OK
    assert "| split:+1:m=1 | 40 | 0 |" in out
    assert "## sigma_1 (q=3)" in out


def test_tables_json_schema(capsys):
    code, out, _ = run(capsys, "tables", "--q", "5", "--depth-max", "1/2", "--format", "json")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert [t["table"] for t in doc] == ["table1", "table3", "sigma", "sigma"]
    for t in doc:
        assert t["q"] == 5
        for row in t["rows"]:
            assert set(row) == {"class", "value_num", "value_den", "q_exponent"}
            assert isinstance(row["value_num"], int) and row["value_den"] > 0


def test_tables_are_deterministic(capsys):
    first = run(capsys, "tables", "--q", "3,5", "--depth-max", "2", "--format", "csv")[1]
    second = run(capsys, "tables", "--q", "3,5", "--depth-max", "2", "--format", "csv")[1]
    assert first == second
    assert first.splitlines()[0] == ",".join(CSV_HEADER)


def test_tables_csv_matches_induction_fixture(capsys, tmp_path):
    code, table_csv, _ = run(capsys, "tables", "--q", "3", "--format", "csv")
    assert code == EXIT_OK
    out = tmp_path / "report.json"
    code, _, _ = run(capsys, "verify", "--suite", "induction", "--q", "3", "--out", str(out))
    assert code == EXIT_OK
    fixture = (tmp_path / "report.sigma-q3.csv").read_bytes()
    lines = table_csv.splitlines(keepends=True)
    expected = lines[0] + "".join(line for line in lines[1:] if line.startswith("sigma,"))
    assert fixture == expected.encode("utf-8")
    report = json.loads(out.read_text(encoding="utf-8"))
    assert report["pass"] and report["suites"][0]["cases"]


def test_verify_suites(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "gauss", "--q", "3,5,7")
    assert code == EXIT_OK and out.startswith("gauss: PASS")
    code, out, _ = run(capsys, "verify", "--suite", "induction", "--q", "3,5", "--depth-max", "2")
    assert code == EXIT_OK
    code, out, _ = run(capsys, "verify", "--suite", "ft-vanish", "--p", "3", "--ell-max", "2")
    assert code == EXIT_OK and '"-1/3"' in out


def test_verify_all_default(capsys):
    code, out, _ = run(capsys, "verify", "--q", "3,5", "--p", "3,5", "--format", "json")
    doc = json.loads(out)
    assert code == EXIT_OK and doc["pass"]
    assert {s["suite"] for s in doc["suites"]} == {
        "gauss", "chartab", "ps-oracle", "table1", "induction", "homogeneity", "census", "ft-vanish", "kim",
    }
    kim = next(s for s in doc["suites"] if s["suite"] == "kim")
    assert kim["extra"]["constants"]["p=5 d=1"] == "120"


def test_verify_failure_exit_code(capsys, monkeypatch):
    import bernstein_sl2.suites as suites

    monkeypatch.setattr(suites, "sigma", lambda d, c, q: Fraction(1))
    code, out, _ = run(capsys, "verify", "--suite", "homogeneity", "--q", "3")
    assert code == EXIT_FAIL and "FAIL" in out


def test_ft_examples(capsys):
    code, out, _ = run(capsys, "ft", "--p", "3", "--Y", "0,1,1,0", "--ell-max", "2")
    doc = json.loads(out)
    assert code == EXIT_OK and doc["stabilized"] and doc["value_rational"] == "0"
    code, out, _ = run(capsys, "ft", "--p", "3", "--Y", "0,1,3,0", "--ell-max", "2")
    doc = json.loads(out)
    assert doc["value_rational"] == "-1/3" and doc["histogram_order"] == 27
    assert set(doc["value_exact"]) == {"counts", "scale"}
    code, out, _ = run(capsys, "ft", "--p", "3", "--Y", "0,1/p,1,0", "--ell-max", "2")
    assert json.loads(out)["value_rational"] == "0"


def test_ft_scaled_path(capsys):
    code, out, _ = run(capsys, "ft", "--p", "3", "--k", "1", "--Y", "0,1,1,0")
    doc = json.loads(out)
    assert code == EXIT_OK and doc["scaling"].startswith("p^3")
    code, out, _ = run(capsys, "ft", "--p", "3", "--k", "1", "--Y", "0,9,9,0")
    assert json.loads(out)["value_rational"] == "45"


def test_census(capsys):
    code, out, _ = run(capsys, "census", "--q", "3", "--format", "json")
    rows = json.loads(out)
    assert code == EXIT_OK
    one = next(r for r in rows if r["depth"] == "1")
    assert (one["per_vertex_count"], one["formal_degree"]) == (4, "6")


@pytest.mark.parametrize(
    "argv",
    [
        ["tables", "--q", "4"],
        ["tables", "--depth-max", "1/3"],
        ["verify", "--suite", "nope"],
        ["ft", "--p", "3", "--Y", "0,1,0,0"],
        ["ft", "--p", "3", "--Y", "1,2,3"],
        ["ft", "--p", "3,5", "--Y", "0,1,1,0"],
        ["tables", "--budget", "0"],
        ["frobnicate"],
    ],
)
def test_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == EXIT_USAGE


def test_budget_refusal(capsys, monkeypatch):
    code, _, err = run(capsys, "ft", "--p", "5", "--Y", "1,1,1,-1", "--ell-max", "3", "--budget", "100")
    assert code == EXIT_BUDGET and "budget" in err
    monkeypatch.setenv("BERNSTEIN_BUDGET", "10")
    assert run(capsys, "ft", "--p", "3", "--Y", "0,1,3,0")[0] == EXIT_BUDGET
    # an explicit flag beats the environment
    assert run(capsys, "ft", "--p", "3", "--Y", "0,1,3,0", "--budget", "100000000")[0] == EXIT_OK


def test_config_file(capsys, tmp_path, monkeypatch):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# lattice settings\nq = 5\ndepth-max = 1/2\nformat = json\nbudget = 10\n", encoding="utf-8")
    code, out, _ = run(capsys, "tables", "--config", str(cfg))
    assert code == EXIT_OK and json.loads(out)[0]["q"] == 5
    # flags override the file
    code, out, _ = run(capsys, "tables", "--config", str(cfg), "--q", "3")
    assert json.loads(out)[0]["q"] == 3
    # the config budget applies, and the environment overrides it
    assert run(capsys, "ft", "--config", str(cfg), "--p", "3", "--Y", "0,1,3,0")[0] == EXIT_BUDGET
    monkeypatch.setenv("BERNSTEIN_BUDGET", "100000000")
    assert run(capsys, "ft", "--config", str(cfg), "--p", "3", "--Y", "0,1,3,0")[0] == EXIT_OK
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = blue\n", encoding="utf-8")
    assert run(capsys, "tables", "--config", str(bad))[0] == EXIT_USAGE
    assert run(capsys, "tables", "--config", str(tmp_path / "missing.cfg"))[0] == EXIT_USAGE


def test_out_file(capsys, tmp_path):
    out = tmp_path / "sub" / "t.md"
    assert run(capsys, "tables", "--q", "3", "--depth-max", "0", "--out", str(out))[0] == EXIT_OK
    assert out.read_text(encoding="utf-8").startswith("## e_0 (q=3)")


def test_parse_entry():
    assert parse_entry("3", 5) == 3
    assert parse_entry("-2/5", 5) == Fraction(-2, 5)
    assert parse_entry("1/p", 7) == Fraction(1, 7)
    assert parse_entry("1/p^2", 3) == Fraction(1, 9)
    assert parse_entry("1/3^2", 3) == Fraction(1, 9)
    with pytest.raises(UsageError):
        parse_entry("x", 3)


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "bernstein_sl2", "census", "--q", "3", "--depth-max", "1"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0 and proc.stdout.startswith("q | depth")
