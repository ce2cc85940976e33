import csv
import io
import json

import pytest

from rosenblatt.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


def test_quick_selftest(capsys):
    code, out = run(capsys, "selftest", "--quick")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out.out)))
    assert rows and all(r["status"] == "PASS" for r in rows)


def test_cumulant_table(capsys):
    code, out = run(capsys, "cumulants", "--H", "0.75", "--max-order", "4")
    assert code == 0
    rows = {int(r["r"]): float(r["kappa_r"]) for r in csv.DictReader(io.StringIO(out.out))}
    assert rows[2] == pytest.approx(1.0, abs=1e-12)
    assert rows[3] == pytest.approx(2.34787, abs=1e-5)


def test_ito_check_writes_result_and_manifest(tmp_path):
    out = tmp_path / "ito.json"
    code = main(["verify-ito", "--degree", "2", "--H", "0.75", "--a", "0.5", "--b", "1", "--xi-panel", "single",
                 "--cells", "1000", "--keep", "100", "--out", str(out)])
    assert code == 0
    rows = json.loads(out.read_text())
    assert rows[0]["relative"] < 1e-4 and rows[0]["pass"]
    manifest = json.loads((tmp_path / "ito.json.manifest.json").read_text())
    assert manifest["config"]["H"] == [0.75] and "wall_time_s" in manifest and "numpy" in manifest["versions"]


def test_simulation_output_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        assert main(["simulate", "--H", "0.7", "--paths", "20", "--times", "0.5,1", "--seed", "11",
                     "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()
    c = tmp_path / "c.csv"
    main(["simulate", "--H", "0.7", "--paths", "20", "--times", "0.5,1", "--seed", "12", "--out", str(c)])
    assert c.read_bytes() != a.read_bytes()


def test_variance_check_from_spec_file(tmp_path, capsys):
    spec = tmp_path / "phi.json"
    spec.write_text(json.dumps({"order": 0, "interval": [0.5, 1.5], "atoms": [{"time_poly": [1.0]}]}))
    code, out = run(capsys, "verify-variance", "--spec", str(spec), "--H", "0.7")
    assert code == 0
    row = json.loads(out.out)[0]
    assert row["closed_form"] == pytest.approx(1.0) and row["pass"]


def test_config_errors_exit_with_two(tmp_path, capsys):
    assert run(capsys, "cumulants", "--H", "1.3")[0] == 2
    assert run(capsys, "verify-variance", "--spec", str(tmp_path / "missing.json"))[0] == 2
    assert run(capsys, "no-such-command")[0] == 2
    bad = tmp_path / "cfg.json"
    bad.write_text(json.dumps({"unknown_key": 1}))
    assert run(capsys, "cumulants", "--config", str(bad))[0] == 2


def test_config_file_overrides_flags(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"H": "0.6", "max_order": 3}))
    code, out = run(capsys, "cumulants", "--config", str(cfg))
    rows = list(csv.DictReader(io.StringIO(out.out)))
    assert code == 0 and len(rows) == 3 and float(rows[0]["H"]) == 0.6


def test_tolerance_failure_exits_with_one(capsys):
    code, _ = run(capsys, "charfn", "--H", "0.75", "--cells", "400", "--keep", "20", "--n-theta", "3",
                  "--tol", "1e-300")
    assert code == 1
