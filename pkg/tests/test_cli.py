import json
import os

import pytest

from isoframes.cli import main, parse_frame, validate_report_roundtrip
from isoframes.fields import field_make


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, json.loads(out)


def test_acyclicity_pass_exit_zero(capsys):
    code, rep = run_cli(
        capsys, "acyclicity", "--kind", "iu-proj", "--q", "3", "--eps", "-1",
        "--n", "2", "--coeff", "int",
    )
    assert code == 0
    assert rep["verdict"] == "PASS"
    rows = rep["checks"][0]["rows"]
    assert all(r["verdict"] == "PASS" for r in rows)
    assert validate_report_roundtrip(rep)


def test_acyclicity_refusal_exit_two(capsys):
    code, rep = run_cli(capsys, "acyclicity", "--kind", "iu-proj", "--q", "2", "--n", "2")
    assert code == 2
    assert rep["verdict"] == "REFUSED"
    assert "two-element field" in rep["reason"]


def test_tits_report_exit_codes(capsys):
    # the Steinberg module sits in degree 1, so asking up to bound 1 fails
    code, rep = run_cli(
        capsys, "acyclicity", "--kind", "tits", "--q", "2", "--n", "3",
        "--bound", "1", "--coeff", "int",
    )
    assert code == 1
    rows = rep["checks"][0]["rows"]
    top = [r for r in rows if r["degree"] == 1][0]
    assert top["rank"] == 8
    # while the claimed connectivity range itself passes
    code0, rep0 = run_cli(
        capsys, "acyclicity", "--kind", "tits", "--q", "2", "--n", "3", "--coeff", "int",
    )
    assert code0 == 0


def test_orbit_command(capsys):
    code, rep = run_cli(
        capsys, "orbit", "--q", "3", "--n", "2", "--frame", "e1;e3",
        "--expect-enumeration",
    )
    assert code == 0
    assert rep["checks"][0]["size"] == 480


def test_stab_command(capsys):
    code, rep = run_cli(
        capsys, "stab", "--q", "3", "--n", "2", "--p", "2", "--samples", "25",
    )
    assert code == 0
    r = rep["checks"][0]["report"]
    assert r["nprime_pattern_order"] == 27
    assert r["stab_order"] == 108


def test_spectral_commands(capsys):
    code, rep = run_cli(capsys, "spectral", "bottom-row", "--q", "3", "--n", "2", "--ell", "5")
    assert code == 0 and rep["verdict"] == "PASS"
    code, rep = run_cli(capsys, "spectral", "theta", "--q", "3", "--n", "2")
    assert code == 0
    code, rep = run_cli(
        capsys, "spectral", "coprime", "--torsion-prime", "3", "--copies", "2",
        "--ell", "5", "--degrees", "3",
    )
    assert code == 0
    assert rep["checks"][0]["dims"] == [1, 0, 0, 0]


def test_h1_command(capsys):
    code, rep = run_cli(capsys, "h1", "--q", "3", "--ell", "2", "--n-max", "1")
    assert code == 0
    code, rep = run_cli(capsys, "h1", "--q", "3", "--ell", "3", "--n-max", "1")
    assert code == 2


def test_genpos_command(capsys):
    code, rep = run_cli(
        capsys, "genpos", "--q", "5", "--n", "3", "--l", "2", "--k", "1", "--seed", "3",
    )
    assert code == 0
    assert rep["checks"][0]["reverified"]


def test_report_written_atomically(tmp_path, capsys):
    out = tmp_path / "report.json"
    code, _ = run_cli(
        capsys, "acyclicity", "--kind", "iu-proj", "--q", "3", "--n", "2",
        "--coeff", "int", "--out", str(out),
    )
    assert code == 0
    on_disk = json.loads(out.read_text())
    assert on_disk["verdict"] == "PASS"
    assert not list(tmp_path.glob("*.tmp"))


def test_cache_cold_vs_warm_identical(tmp_path, capsys):
    argv = [
        "acyclicity", "--kind", "iu-proj", "--q", "3", "--n", "2",
        "--coeff", "int", "--cache-dir", str(tmp_path),
    ]
    code1, rep1 = run_cli(capsys, *argv)
    code2, rep2 = run_cli(capsys, *argv)
    assert code1 == code2 == 0
    assert rep1["cache"]["misses"] > 0
    assert rep2["cache"]["hits"] > 0
    strip = lambda r: json.dumps(
        {"checks": r["checks"], "verdict": r["verdict"]}, sort_keys=True
    )
    assert strip(rep1) == strip(rep2)


def test_threads_do_not_change_output(capsys):
    argv = ["acyclicity", "--kind", "iu-proj", "--q", "3", "--n", "2", "--coeff", "int"]
    _, rep1 = run_cli(capsys, *argv, "--threads", "1")
    _, rep2 = run_cli(capsys, *argv, "--threads", "2")
    assert rep1["checks"] == rep2["checks"]


def test_same_seed_same_report(capsys):
    argv = ["genpos", "--q", "5", "--n", "3", "--l", "2", "--k", "2", "--seed", "11"]
    _, rep1 = run_cli(capsys, *argv)
    _, rep2 = run_cli(capsys, *argv)
    assert rep1["checks"] == rep2["checks"]


def test_parse_frame():
    F3 = field_make(3)
    assert parse_frame("e1;e3", 4, F3) == ((1, 0, 0, 0), (0, 0, 1, 0))
    assert parse_frame("1,2,0,0", 4, F3) == ((1, 2, 0, 0),)
    with pytest.raises(Exception):
        parse_frame("1,2", 4, F3)
