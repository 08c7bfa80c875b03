import json
import shutil
import subprocess

import numpy as np
import pytest

from moddft.cli import run
from moddft.modcore import complex_mod, dft_matrix


def _run(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_table1(capsys):
    code, out, _ = _run(capsys, "table1")
    assert code == 0
    rows = out.strip().splitlines()[1:]
    assert len(rows) == 8
    assert rows[0].split() == ["5", "15/32", "0.47"]
    assert rows[-1].split() == ["16", "2025/65536", "0.03"]


@pytest.mark.parametrize("argv, expected", [
    (["--n", "7", "--v", "0,1"], "identifiable"),
    (["--n", "7", "--v", "1"], "not identifiable; class {0} unhit"),
    (["--n", "16", "--v", "0,1,2,3,4,6,8,12"], "identifiable"),
    (["--n", "16", "--v", "0,1,3,4,8,12"], "not identifiable; classes {2,10}, {6,14} unhit"),
    (["--n", "7", "--v", "3", "--tail"], "identifiable"),
])
def test_check_human(capsys, argv, expected):
    code, out, _ = _run(capsys, "check", *argv)
    assert code == 0 and out.strip() == expected


def test_check_json_matches_human(capsys):
    for v in ("0,1", "1", "0,2,4"):
        _, human, _ = _run(capsys, "check", "--n", "8", "--v", v)
        _, js, _ = _run(capsys, "check", "--n", "8", "--v", v, "--format", "json")
        doc = json.loads(js)
        assert doc["identifiable"] == (human.strip() == "identifiable")
        # re-running with the parsed V reproduces the verdict
        again = json.loads(_run(capsys, "check", "--n", "8", "--v", ",".join(map(str, doc["V"])),
                                "--format", "json")[1])
        assert again == doc


def test_check_pbl(capsys):
    code, out, _ = _run(capsys, "check", "--n", "16", "--pbl", "3")
    assert code == 0 and out.startswith("identifiable (H(N)=4")
    _, out, _ = _run(capsys, "check", "--n", "16", "--pbl", "4", "--format", "json")
    doc = json.loads(out)
    assert doc["identifiable"] is False and doc["thm3_roots"]["identifiable"] is False
    _, out, _ = _run(capsys, "check", "--n", "5", "--pbl", "2")
    assert "N <= 2P+1" in out


def test_partition_and_cyclo(capsys):
    _, out, _ = _run(capsys, "partition", "--n", "16", "--format", "json")
    assert json.loads(out)["K"] == 8
    _, out, _ = _run(capsys, "partition", "--n", "12", "--field", "rational")
    assert "K=6" in out
    _, out, _ = _run(capsys, "cyclo", "--d", "105", "--format", "json")
    doc = json.loads(out)
    assert doc["degree"] == 48 and -2 in doc["coeffs"]
    code, out, _ = _run(capsys, "cyclo", "--identity", "64")
    assert code == 0 and out.strip().endswith("True")


def _write_z(tmp_path, z):
    p = tmp_path / "z.json"
    p.write_text(json.dumps([[float(a.real), float(a.imag)] for a in z]))
    return str(p)


def test_recover(tmp_path, capsys):
    rng = np.random.default_rng(0)
    s = rng.uniform(-1, 1, 7) + 1j * rng.uniform(-1, 1, 7)
    s[[0, 1]] = 0
    z = complex_mod(dft_matrix(7) @ s)
    path = _write_z(tmp_path, z)
    code, out, _ = _run(capsys, "recover", "--z", path, "--v", "0,1", "--box", "1")
    assert code == 0 and "status: unique_in_box" in out and "s_hat:" in out
    _, out, _ = _run(capsys, "recover", "--z", path, "--v", "0,1", "--format", "json")
    doc = json.loads(out)
    shat = np.array([complex(*p) for p in doc["s_hat"]])
    assert np.max(np.abs(shat - s)) < 1e-6


def test_recover_pbl(tmp_path, capsys):
    n = np.arange(12)
    y = 2 * np.real((0.9 + 0.8j) * np.exp(2j * np.pi * n / 12))
    z = y - np.floor(y + 0.5)
    path = _write_z(tmp_path, z)
    code, out, _ = _run(capsys, "recover", "--z", path, "--pbl", "1", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["status"] == "unique_in_box"
    d = np.array(doc["y_hat"]) - y
    assert np.ptp(d) < 1e-9


def test_recover_domain_error(tmp_path, capsys):
    path = _write_z(tmp_path, np.array([0.7, 0.1, 0.0]))
    code, _, err = _run(capsys, "recover", "--z", path, "--v", "0")
    assert code == 1 and "domain error" in err
    path = _write_z(tmp_path, np.array([0.3, 0.1, 0.2]))
    code, out, _ = _run(capsys, "recover", "--z", path, "--v", "0,1,2")
    assert code == 1 and "infeasible" in out


@pytest.mark.parametrize("argv, flag", [
    (["check", "--n", "8", "--v", "1,x"], "--v"),
    (["check", "--n", "0", "--v", "1"], "--n"),
    (["check", "--n", "8", "--v", "9"], "--v"),
    (["recover", "--z", "/nonexistent/z.json", "--v", "0"], "--z"),
    (["montecarlo", "--trials", "0"], "--trials"),
])
def test_usage_errors(capsys, argv, flag):
    code, _, err = _run(capsys, *argv)
    assert code == 2 and flag in err


def test_unknown_flag_and_missing_subcommand(capsys):
    assert _run(capsys, "table1", "--bogus")[0] == 2
    assert _run(capsys)[0] == 2


def test_bad_json(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text("[[0.1, 0.2], ")
    code, _, err = _run(capsys, "recover", "--z", str(p), "--v", "0")
    assert code == 2 and "--z" in err


def test_montecarlo_csv(tmp_path, capsys):
    out_file = tmp_path / "mc.csv"
    code, out, _ = _run(capsys, "montecarlo", "--n", "5,6", "--trials", "10", "--seed", "3",
                        "--format", "csv", "--out", str(out_file))
    assert code == 0
    assert out == out_file.read_text()
    assert out.splitlines()[0] == "# moddft-report v1 kind=montecarlo"
    _, out2, _ = _run(capsys, "montecarlo", "--n", "5,6", "--trials", "10", "--seed", "3",
                      "--format", "csv")
    assert out == out2


def test_montecarlo_seed_env(monkeypatch, capsys):
    monkeypatch.setenv("MODDFT_SEED", "5")
    _, a, _ = _run(capsys, "montecarlo", "--n", "6", "--trials", "5", "--scenario", "s2", "--format", "json")
    _, b, _ = _run(capsys, "montecarlo", "--n", "6", "--trials", "5", "--scenario", "s2", "--seed", "5",
                   "--format", "json")
    assert a == b and json.loads(a)["meta"]["seed"] == 5


def test_region_svg(tmp_path, capsys):
    svg = tmp_path / "out.svg"
    code, out, _ = _run(capsys, "region", "--pmax", "8", "--nmax", "48", "--svg", str(svg))
    assert code == 0 and svg.read_text().startswith("<svg")
    assert out.splitlines()[0].startswith("P=8")


def test_region_trials(capsys):
    code, out, _ = _run(capsys, "region", "--pmax", "2", "--nmax", "10", "--trials", "3", "--format", "csv")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "# moddft-report v1 kind=region"
    assert len(lines) == 2 + sum(1 for P in (1, 2) for N in range(3, 11) if N > 2 * P + 1)


@pytest.mark.skipif(shutil.which("moddft") is None, reason="console script not installed")
def test_console_script():
    res = subprocess.run(["moddft", "check", "--n", "7", "--v", "0,1"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.strip() == "identifiable"
