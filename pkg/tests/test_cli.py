import csv
import io
import json
import subprocess
import sys

import pytest

from lotail.cli import main
from lotail.family import constant_family, dump_family


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_verify_example(capsys, two_step_json):
    code, out, _ = run(capsys, "verify", "--family", str(two_step_json), "--mode", "exact")
    rep = json.loads(out)
    assert code == 0 and rep["summary"]["failed"] == 0
    assert rep["summary"]["theorem_checks"] > 0


def test_unknown_flag_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["verify", "--bogus"])
    assert exc.value.code == 2
    assert "usage" in capsys.readouterr().err


def test_missing_seed_is_usage_error(capsys, two_step_json):
    for cmd in ("mc", "search"):
        with pytest.raises(SystemExit) as exc:
            main([cmd, "--family", str(two_step_json)])
        assert exc.value.code == 2


def test_validation_error_exits_3(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"n": 1, "functions": [[{"t": 0, "v": 1}, {"t": 0.5, "v": 0.5}]]}')
    code, _, err = run(capsys, "enumerate", "--family", str(bad))
    assert code == 3 and "NonMonotoneValues" in err
    code, _, _ = run(capsys, "enumerate", "--family", str(tmp_path / "missing.json"))
    assert code == 3


def test_exact_mode_rejects_non_dyadic(capsys, tmp_path):
    path = tmp_path / "f.json"
    dump_family(constant_family([0.1, 0.2]), path)
    code, _, err = run(capsys, "enumerate", "--family", str(path))
    assert code == 3 and "NotDyadic" in err
    code, out, _ = run(capsys, "enumerate", "--family", str(path), "--mode", "float", "--u", "0.1")
    assert code == 0 and json.loads(out)["reports"][0]["pY"] == [0.5]


def test_enumerate_json_and_csv(capsys, two_step_json):
    code, out, _ = run(capsys, "enumerate", "--family", str(two_step_json), "--u", "1")
    rep = json.loads(out)["reports"][0]
    assert rep["pX"] == [{"num": 2, "den2exp": 2}] and rep["EX"] == 0.5
    code, out, _ = run(capsys, "enumerate", "--family", str(two_step_json), "--u", "1", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert rows[0]["pX"] == "0.5" and rows[0]["pY"] == "0.25"


def test_mc(capsys, two_step_json):
    code, out, _ = run(capsys, "mc", "--family", str(two_step_json), "--u", "1", "--seed", "1", "--samples", "20000")
    rep = json.loads(out)["reports"][0]
    lo, hi = rep["pX_ci95"][0]
    assert code == 0 and lo <= 0.5 <= hi


def test_verify_csv_rows(capsys, two_step_json):
    code, out, _ = run(capsys, "verify", "--family", str(two_step_json), "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert rows and {"check", "kind", "lhs", "rhs", "holds", "margin", "digest"} <= set(rows[0])


def test_bound(capsys, two_step_json):
    code, out, _ = run(capsys, "bound", "--family", str(two_step_json))
    rep = json.loads(out)
    assert code == 0 and rep["bounds"][0]["bound"] >= 0.5
    assert rep["plan"]["levels"][0]["N"] == 15


def test_constants_and_reproduce(capsys, tmp_path):
    code, out, _ = run(capsys, "constants", "--budget", "200")
    rep = json.loads(out)
    assert rep["optimized_plan"]["total"] <= rep["template_plan"]["total"]
    out_path = tmp_path / "r.json"
    code, _, _ = run(capsys, "reproduce", "--budget", "200", "--out", str(out_path))
    table = {r["row"]: r for r in json.loads(out_path.read_text())["table"]}
    assert table["sza8_53"]["multiplier"] == 8.0 and table["sza8_53"]["tail_constant"] <= 53
    assert table["chaining_template"]["within_reference"] is False


def test_search(capsys):
    code, out, _ = run(capsys, "search", "--n", "3,4", "--seed", "0", "--budget", "50")
    rows = json.loads(out)["table"]
    assert code == 0 and [r["n"] for r in rows] == [3, 4]
    assert all(r["best_ratio"] <= 2 for r in rows)


def test_search_infeasible_dimension(capsys):
    code, _, err = run(capsys, "search", "--n", "2", "--seed", "0", "--budget", "5")
    assert code == 3 and "InfeasibleDimension" in err


def test_byte_identical_reports(tmp_path, two_step_json):
    def once(tag, *argv):
        path = tmp_path / f"{tag}.json"
        assert main([*argv, "--out", str(path)]) in (0, 1)
        return path.read_bytes()

    for argv in (
        ("verify", "--n", "5,6", "--seed", "3"),
        ("search", "--n", "4", "--seed", "3", "--budget", "60"),
        ("reproduce", "--budget", "300", "--seed", "3"),
    ):
        assert once("a", *argv) == once("b", *argv)


def test_module_entry_point(two_step_json):
    res = subprocess.run(
        [sys.executable, "-m", "lotail", "enumerate", "--family", str(two_step_json), "--u", "1"],
        capture_output=True,
        text=True,
        check=True,
    )
    assert json.loads(res.stdout)["reports"][0]["EX"] == 0.5
