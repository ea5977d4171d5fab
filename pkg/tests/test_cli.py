import subprocess
import sys
from pathlib import Path

import pytest

from oocwdm.cli import main
from oocwdm.ooc import generate_family, read_family

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def test_gen_codes_and_validate(tmp_path, capsys):
    out = tmp_path / "c.txt"
    assert main(["gen-codes", "--length", "64", "--weight", "2", "--out", str(out)]) == 0
    assert read_family(out) == generate_family(64, 2)
    assert "31 codewords" in capsys.readouterr().out
    assert main(["validate", "--codes", str(out)]) == 0
    assert capsys.readouterr().out.startswith("pass: 31 codewords")


def test_validate_reports_violation(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("64 2 1 1\n0 1\n0 32\n")
    assert main(["validate", "--codes", str(bad)]) == 1
    out = capsys.readouterr().out
    assert "auto: codeword 1" in out and "fail:" in out


def test_validate_unreadable(tmp_path):
    (tmp_path / "junk.txt").write_text("not a code file\n")
    assert main(["validate", "--codes", str(tmp_path / "junk.txt")]) == 1
    assert main(["validate", "--codes", str(tmp_path / "missing.txt")]) == 1


def test_ber_writes_csv_only(tmp_path, capsys):
    assert main(["ber", "--config", str(CONFIGS / "minimal.ini"), "--out-dir", str(tmp_path)]) == 0
    assert (tmp_path / "results.csv").exists()
    assert not (tmp_path / "plotdata").exists()
    assert "N=31" in capsys.readouterr().out


def test_sweep_writes_plotdata_and_seed_override(tmp_path):
    cfg = str(CONFIGS / "strict_grid.ini")
    assert main(["sweep", "--config", cfg, "--out-dir", str(tmp_path / "a"), "--seed", "5"]) == 0
    assert main(["sweep", "--config", cfg, "--out-dir", str(tmp_path / "b"), "--seed", "5"]) == 0
    assert main(["sweep", "--config", cfg, "--out-dir", str(tmp_path / "c"), "--seed", "6"]) == 0
    a, b, c = ((tmp_path / d / "results.csv").read_bytes() for d in "abc")
    assert a == b and a != c
    assert (tmp_path / "a" / "plotdata" / "manifest.json").exists()


def test_config_error_exit_code(tmp_path, capsys):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("[code]\nlength = 64\nweight = 2\n[receiver]\nccr = 2\n[sweep]\nusers = 4\n[channels]\nplan.x = 0\n")
    assert main(["ber", "--config", str(cfg), "--out-dir", str(tmp_path)]) == 1
    assert "line 9" in capsys.readouterr().err
    assert main(["ber", "--config", str(tmp_path / "nope.ini"), "--out-dir", str(tmp_path)]) == 1


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["frobnicate"],
        ["gen-codes", "--length", "64"],
        ["sweep", "--config", "x.ini", "--out-dir", "o", "--seed", "-1"],
        ["gen-codes", "--length", "1", "--weight", "2", "--out", "x"],
    ],
)
def test_usage_errors_exit_one(argv, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(argv) == 1


def test_runtime_failure_exit_two(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    # out-dir is an existing regular file, so it cannot be created
    assert main(["ber", "--config", str(CONFIGS / "minimal.ini"), "--out-dir", str(blocker)]) == 2


def test_module_entry_point(tmp_path):
    out = tmp_path / "c.txt"
    proc = subprocess.run(
        [sys.executable, "-m", "oocwdm", "gen-codes", "--length", "7", "--weight", "3", "--out", str(out)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert out.read_text() == "7 3 1 1\n0 1 3\n"
