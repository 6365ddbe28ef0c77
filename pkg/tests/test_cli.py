"""The command line: parsing, JSON output and exit codes."""
import json
import subprocess
import sys
from fractions import Fraction

import pytest

from twf.cli import EXIT_FAIL, EXIT_REGION, EXIT_USAGE, UsageError, main, parse_window


def lines(text: str) -> list[dict]:
    return [json.loads(line) for line in text.splitlines() if line.strip()]


def exit_code(argv) -> int:
    """``main`` returns a code, except that argparse exits on its own errors."""
    try:
        return main(argv)
    except SystemExit as exc:
        return exc.code


@pytest.mark.parametrize("text, expected", [
    ("-8,8", (Fraction(-8), Fraction(8))),
    ("[-8, 8]", (Fraction(-8), Fraction(8))),
    ("-7/2:7/2", (Fraction(-7, 2), Fraction(7, 2))),
])
def test_window_forms(text, expected):
    assert parse_window(text) == expected


@pytest.mark.parametrize("text", ["8,-8", "1/3,2", "a,b"])
def test_bad_windows(text):
    with pytest.raises(UsageError):
        parse_window(text)


def test_suite_passes(capsys):
    assert main(["suite", "crt"]) == 0
    out, err = capsys.readouterr()
    recs = lines(out)
    assert recs and all(r["status"] == "pass" for r in recs)
    assert json.loads(err)["ok"]


def test_failing_suite_exit_code(capsys):
    assert main(["suite", "dcomm"]) == EXIT_FAIL
    rec = lines(capsys.readouterr().out)[0]
    assert rec["status"] == "fail" and rec["obstruction_coefficient"] == "1/2"


def test_suite_writes_to_a_file(tmp_path, capsys):
    dest = tmp_path / "nord.jsonl"
    assert main(["suite", "nord", "--out", str(dest)]) == 0
    assert capsys.readouterr().out == ""
    assert all(r["status"] == "pass" for r in lines(dest.read_text()))


def test_environment_settings(monkeypatch, capsys):
    monkeypatch.setenv("TWF_MAX_WEIGHT", "1")
    assert main(["suite", "expdelta"]) == 0
    few = len(lines(capsys.readouterr().out))
    monkeypatch.delenv("TWF_MAX_WEIGHT")
    assert main(["suite", "expdelta"]) == 0
    assert len(lines(capsys.readouterr().out)) > few


@pytest.mark.parametrize("argv", [
    ["suite", "nosuch"],
    ["suite", "crt", "--window", "3,1"],
    ["suite", "crt", "--M", "0"],
    ["coeff", "e1(-1)", "u0"],
    ["correlate", "e1(-1/2)", "eb1(-1/2)", "u0", "u0", "2", "x", "0"],
])
def test_usage_errors(argv, capsys):
    assert exit_code(argv) == EXIT_USAGE


def test_coeff_table(capsys):
    assert main(["coeff", "e1(-1/2)", "eb1(-1)u0", "--window=-1,1"]) == 0
    rec = lines(capsys.readouterr().out)[0]
    table = {row["exponent"]: row["coefficient"] for row in rec["table"]}
    assert set(table) == {"-1/2", "1/2"}
    assert table["1/2"] == [{"word": [["e1", -1], ["eb1", -1]], "zeros": [], "coeff": "1"}]


def test_correlate_record(capsys):
    assert main(["correlate", "e1(-1/2)", "eb1(-1/2)", "u0", "u0", "2", "1", "0"]) == 0
    rec = lines(capsys.readouterr().out)[0]
    assert rec["closed_form_value"][0] == pytest.approx(2 ** -0.5)
    assert rec["abs_errors"]["product"] < 1e-8


def test_correlate_region_errors(monkeypatch, capsys):
    args = ["correlate", "e1(-1/2)", "eb1(-1/2)", "u0", "u0"]
    assert main(args + ["1", "1", "0"]) == EXIT_REGION
    assert main(args + ["1", "3i", "0"]) == 0
    assert main(args + ["1", "3i", "0", "--strict"]) == EXIT_REGION
    monkeypatch.setenv("TWF_STRICT", "1")
    assert main(args + ["1", "3i", "0"]) == EXIT_REGION


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "twf", "suite", "nord"],
                          capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0
    assert all(r["status"] == "pass" for r in lines(proc.stdout))
