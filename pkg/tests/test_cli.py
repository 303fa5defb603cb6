import csv
import json
import subprocess
import sys

import pytest

from treecert.cli import main
from treecert.formats import load_attacks, load_model

from _support import FIXTURES

MODEL = str(FIXTURES / "worked_tree.json")
THREAT = str(FIXTURES / "worked_threat.json")
DATA = str(FIXTURES / "worked_data.libsvm")


def _rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_analyze_then_verify(tmp_path, capsys):
    assert main(["analyze", "--model", MODEL, "--threat-json", THREAT, "--out", str(tmp_path / "a")]) == 0
    d, attacks = load_attacks(tmp_path / "a" / "region.json")
    assert d == 2 and len(attacks) == 6
    assert json.loads((tmp_path / "a" / "telemetry.json").read_text())["converged"]
    out = tmp_path / "v"
    assert main(["verify", "--model", MODEL, "--threat-json", THREAT, "--data", DATA,
                 "--region", str(tmp_path / "a" / "region.json"),
                 "--epsilon", "0", "--epsilon", "0.5", "--out", str(out)]) == 0
    rows = _rows(out / "report.csv")
    assert [float(r["r_hat"]) for r in rows] == pytest.approx([2 / 3, 2 / 3])
    assert [float(r["R_hat"]) for r in rows] == pytest.approx([2 / 3, 1 / 3])
    assert float(rows[0]["r"]) == pytest.approx(2 / 3)
    assert json.loads((out / "config.json").read_text())["argv"][0] == "verify"


def test_gen_writes_model_and_data(tmp_path):
    m, data = tmp_path / "m.json", tmp_path / "d.libsvm"
    assert main(["gen", "--out", str(m), "--trees", "3", "--features", "3", "--instances", "10",
                 "--data-out", str(data)]) == 0
    assert len(load_model(m).trees) == 3
    assert len(data.read_text().splitlines()) == 10
    assert (tmp_path / "m.json.config.json").is_file()


@pytest.mark.parametrize("argv", [
    ["analyze", "--model", MODEL, "--out", "x"],  # no threat model
    ["analyze", "--model", MODEL, "--delta", "-1", "--out", "x"],
    ["analyze", "--model", MODEL, "--delta", "1", "--workers", "0", "--out", "x"],
    ["gen", "--out", "x", "--trees", "2"],
])
def test_usage_errors_exit_2(argv, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(argv) == 2


def test_bad_inputs_exit_1(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"version": 7}')
    assert main(["analyze", "--model", str(bad), "--delta", "1", "--out", str(tmp_path)]) == 1
    assert main(["analyze", "--model", str(tmp_path / "missing.json"), "--delta", "1",
                 "--out", str(tmp_path)]) == 1
    broken = tmp_path / "d.libsvm"
    broken.write_text("1 0:1\n")
    assert main(["verify", "--model", MODEL, "--delta", "1", "--data", str(broken),
                 "--out", str(tmp_path)]) == 1
    assert "d.libsvm:1" in capsys.readouterr().err


def test_unknown_flag_exits_2():
    with pytest.raises(SystemExit) as e:
        main(["analyze", "--nope"])
    assert e.value.code == 2


def test_console_entry_point():
    out = subprocess.run([sys.executable, "-m", "treecert", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.startswith("treecert ")
