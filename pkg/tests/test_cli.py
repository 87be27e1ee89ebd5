from __future__ import annotations

import json

import pytest

from wtl import cli
from wtl import hurwitz as hz
from wtl import whitham as wt
from wtl.values import OmegaValue


def run(args, capsys):
    code = cli.main(args)
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def hurwitz_file(tmp_path, capsys):
    path = tmp_path / "h.json"
    assert run(["export", "hurwitz", "--profile", "3,2", "--seed", "1", "--out", str(path)], capsys)[0] == 0
    return path


def test_omega_table(hurwitz_file, capsys):
    code, out, _ = run(["omega", str(hurwitz_file)], capsys)
    assert code == 0
    assert out.splitlines()[0] == "index1,index2,omega"


def test_output_is_deterministic(hurwitz_file, capsys):
    a = run(["theta", str(hurwitz_file), "--format", "json"], capsys)[1]
    b = run(["theta", str(hurwitz_file), "--format", "json"], capsys)[1]
    assert a == b and json.loads(a)


def test_export_is_seeded(capsys):
    a = run(["export", "even", "--seed", "5"], capsys)[1]
    b = run(["export", "even", "--seed", "5"], capsys)[1]
    c = run(["export", "even", "--seed", "6"], capsys)[1]
    assert a == b != c


def test_stabilize_profiles_pass(capsys):
    code, out, _ = run(["stabilize", "--profile", "2,1,1", "--profile", "3,2,2", "--pmax", "2", "--qmax", "2"], capsys)
    assert code == 0 and "FAIL" not in out and "not guaranteed" in out


@pytest.mark.parametrize("extra", [["--open"], ["--even"], ["--even", "--open"]])
def test_stabilize_sectors(extra, capsys):
    code, out, _ = run(["stabilize", "--profile", "2,1,2", "--pmax", "2", "--qmax", "2"] + extra, capsys)
    assert code == 0 and "FAIL" not in out


def test_float_sweep(capsys):
    code, out, _ = run(["stabilize", "--backend", "float", "--precision", "40", "--sweep", "A:2..5"], capsys)
    assert code == 0 and out.count("\n") > 5


def test_negative_control_exits_one(monkeypatch, capsys):
    real = hz.omega_H
    monkeypatch.setattr(hz, "omega_H", lambda d, a, b: real(d, a, b) + OmegaValue(1))
    code, out, err = run(["stabilize", "--profile", "3,2"], capsys)
    assert code == 1 and "FAIL" in out and "exceed" in err


def test_truncation_failure_lists_entries(tmp_path, capsys):
    path = tmp_path / "u.json"
    run(["export", "u", "--m", "1", "--trunc", "8", "--out", str(path)], capsys)
    code, _, err = run(["omega", str(path), "--trunc", "3", "--pmax", "3", "--qmax", "3"], capsys)
    assert code == 1 and "truncation too small for" in err and "(e,3;e,3)" in err


def test_malformed_json_exits_two(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{oops")
    code, _, err = run(["omega", str(path)], capsys)
    assert code == 2 and "invalid JSON" in err


def test_non_even_data_exits_two(hurwitz_file, capsys):
    assert run(["stabilize", str(hurwitz_file), "--even"], capsys)[0] == 2


@pytest.mark.parametrize(
    "args",
    [
        ["stabilize", "--profile", "2", "--backend", "float", "--precision", "10"],
        ["stabilize", "--profile", "2", "--tol", "0"],
        ["stabilize", "--profile", "2,x"],
        ["stabilize"],
        ["verify", "nosuch"],
        ["bogus"],
    ],
)
def test_usage_errors_exit_two(args, capsys):
    assert run(args, capsys)[0] == 2


def test_precision_from_environment(monkeypatch, capsys, tmp_path):
    monkeypatch.setenv("WTL_DEFAULT_PRECISION", "20")
    out = run(["export", "point", "--backend", "float", "--m", "1", "--trunc", "4"], capsys)[1]
    assert run(["stabilize", "--backend", "float", "--profile", "2"], capsys)[0] == 0
    digits20 = max(len(s) for s in json.loads(out)["lambda0"]["coeffs"])
    out = run(["export", "point", "--backend", "float", "--precision", "50", "--m", "1", "--trunc", "4"], capsys)[1]
    digits50 = max(len(s) for s in json.loads(out)["lambda0"]["coeffs"])
    assert digits50 > digits20


def test_verify_dump_and_replay(monkeypatch, tmp_path, capsys):
    monkeypatch.chdir(tmp_path)
    real = wt.omega_transfer
    monkeypatch.setattr(wt, "omega_transfer", lambda pt, a, p, b, q: real(pt, a, p, b, q) + OmegaValue(1))
    dump = tmp_path / "fail.json"
    code, out, _ = run(["verify", "whitham", "--scale", "0.2", "--out", str(dump)], capsys)
    assert code == 1 and "FAIL whitham.symmetry_and_transfer" in out
    record = json.loads(dump.read_text())
    assert record["invariant"] == "symmetry_and_transfer" and "input" in record
    assert run(["verify", "--replay", str(dump)], capsys)[0] == 1
    assert (tmp_path / "wtl-failure-whitham-symmetry_and_transfer.json").exists()
    monkeypatch.setattr(wt, "omega_transfer", real)
    code, out, _ = run(["verify", "--replay", str(dump)], capsys)
    assert code == 0 and out.startswith("PASS")


def test_verify_suite_passes(capsys):
    code, out, _ = run(["verify", "ratfun", "--scale", "0.1"], capsys)
    assert code == 0 and out.count("PASS") == 3
