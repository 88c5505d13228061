import csv
import io
import json
import math
import os

import pytest

from cavitycat.cli import CSV_COLUMNS, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_point_json(capsys):
    code, out, _ = run(capsys, "point", "--xi0", "2", "--r", "1", "--g", "0.5")
    assert code == 0
    data = json.loads(out)
    assert set(data) == {"S", "E"}
    for rec in data.values():
        assert 0 <= rec["R"] <= 1 and 0 <= rec["O"] <= 1


def test_point_initial_values(capsys):
    _, out, _ = run(capsys, "point", "--xi0", "2", "--r", "2", "--g", "0")
    s = json.loads(out)["S"]
    assert s["R"] == pytest.approx(1.0, abs=1e-12)
    assert s["O"] == pytest.approx(math.exp(-8), rel=1e-10)
    assert s["purity"] == pytest.approx(1.0, abs=1e-12)


def test_point_period(capsys):
    _, a, _ = run(capsys, "point", "--r", "1.5", "--g", "0")
    _, b, _ = run(capsys, "point", "--r", "1.5", "--g", repr(math.pi))
    da, db = json.loads(a), json.loads(b)
    for mode in "SE":
        for key in ("R", "D", "O", "purity", "fidelity"):
            assert da[mode][key] == pytest.approx(db[mode][key], abs=1e-9)


def test_overdamped_exit_code(capsys):
    code, _, err = run(capsys, "point", "--gamma-s", "3")
    assert code == 2
    assert "overdamped" in err


@pytest.mark.parametrize("argv", [[], ["point", "--xi0", "abc"], ["nope"], ["sweep", "--steps", "0"],
                                  ["sweep", "--r-grid", "1,0"], ["probe-sim", "--shots", "0"]])
def test_usage_errors(capsys, argv):
    try:
        code = main(argv)
    except SystemExit as exc:  # argparse rejects malformed flags itself
        code = exc.code
    assert code == 1


def test_sweep_csv(capsys):
    code, out, _ = run(capsys, "sweep", "--steps", "5", "--r-grid", "0,1")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == CSV_COLUMNS
    assert len(rows) == 11
    assert all(len(r) == len(CSV_COLUMNS) for r in rows)
    _, again, _ = run(capsys, "sweep", "--steps", "5", "--r-grid", "0,1")
    assert out == again


def test_sweep_parallel_matches_serial(capsys):
    _, serial, _ = run(capsys, "sweep", "--steps", "9", "--r-grid=-1,0,2")
    _, parallel, _ = run(capsys, "sweep", "--steps", "9", "--r-grid=-1,0,2", "--workers", "2")
    assert serial == parallel


def test_sweep_json_and_file(tmp_path, capsys):
    target = tmp_path / "out.json"
    code, out, _ = run(capsys, "sweep", "--steps", "3", "--format", "json", "--out", str(target))
    assert code == 0 and out == ""
    data = json.loads(target.read_text())
    assert len(data) == 3 and set(data[0]) == set(CSV_COLUMNS)


def test_unwritable_output(capsys):
    code, _, err = run(capsys, "point", "--out", "/nonexistent-dir/x.json")
    assert code == 1 and "cannot write" in err


def test_probe_sim(capsys):
    _, a, _ = run(capsys, "probe-sim", "--xi0", "0", "--r", "0", "--shots", "1000", "--seed", "3")
    _, b, _ = run(capsys, "probe-sim", "--xi0", "0", "--r", "0", "--shots", "1000", "--seed", "3")
    assert a == b
    data = json.loads(a)
    assert data["estimate"] == pytest.approx(2.0)
    assert data["shots"] == 1000


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nxi0 = 1.0\nr = 0.5\ng = 0.3\n")
    _, from_file, _ = run(capsys, "point", "--config", str(cfg))
    _, explicit, _ = run(capsys, "point", "--xi0", "1", "--r", "0.5", "--g", "0.3")
    assert from_file == explicit
    _, override, _ = run(capsys, "point", "--config", str(cfg), "--r", "1.0")
    _, direct, _ = run(capsys, "point", "--xi0", "1", "--r", "1.0", "--g", "0.3")
    assert override == direct


def test_config_file_errors(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = red\n")
    code, _, err = run(capsys, "point", "--config", str(bad))
    assert code == 1 and "unknown key" in err
    code, _, _ = run(capsys, "point", "--config", os.fspath(tmp_path / "missing.cfg"))
    assert code == 1


def test_oracle_check_passes(capsys):
    code, out, _ = run(capsys, "oracle-check", "--xi0", "1.5", "--r", "1", "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert data["pass"] and max(data["max_abs_dev"].values()) < 1e-6


def test_oracle_check_truncation_exit(capsys):
    code, _, err = run(capsys, "oracle-check", "--xi0", "1.5", "--r", "1", "--nmax", "10")
    assert code == 2 and "truncation" in err


def test_oracle_check_failure_exit(capsys):
    # a cutoff loose enough to run but too coarse for the requested accuracy
    code, out, _ = run(capsys, "oracle-check", "--xi0", "1.5", "--r", "1", "--nmax", "30",
                       "--trunc-tol", "1e-2", "--tol", "1e-12")
    assert code == 3 and "FAIL" in out
