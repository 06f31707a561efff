import json

import pytest

from modtwist.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_coeffs_csv(capsys, tmp_path):
    code, out, _ = run(capsys, "coeffs", "--k", "12", "--nmax", "5", "--format", "csv", "--cache-dir", str(tmp_path))
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "n,a(n),lambda(n)"
    assert lines[-1].startswith("5,4830,")


def test_coeffs_binary_and_cache(capsys, tmp_path):
    dest = tmp_path / "d12.vfrg"
    assert main(["coeffs", "--nmax", "50", "--format", "binary", "--output", str(dest), "--cache-dir", str(tmp_path)]) == 0
    from modtwist.forms import load_table

    assert load_table(dest).a[5] == 4830
    cold = run(capsys, "coeffs", "--nmax", "40", "--cache-dir", str(tmp_path / "fresh"))[1]
    hit = run(capsys, "coeffs", "--nmax", "40", "--cache-dir", str(tmp_path / "fresh"))[1]
    assert cold == hit


def test_voronoi_check(capsys, tmp_path):
    code, out, err = run(capsys, "voronoi-check", "--family", "holo", "--k", "12", "--c", "5", "--N", "1000",
                         "--cache-dir", str(tmp_path))
    assert code == 0
    assert err.startswith("residual ")
    doc = json.loads(out)
    assert doc["summary"]["residual"] <= 1e-6


def test_scan_json_and_files(capsys, tmp_path):
    code, out, _ = run(capsys, "scan", "--family", "holo", "--k", "12", "--n-grid", "2^9..2^13", "--n-random", "16",
                       "--out", str(tmp_path), "--cache-dir", str(tmp_path))
    assert code == 0
    assert json.loads(out)["summary"]["slope"] <= 0.6
    assert {"scan.json", "scan.csv", "scan.dat"} <= {p.name for p in tmp_path.iterdir()}
    first, second = (tmp_path / "scan.dat").read_text().splitlines()[:2]
    assert len(first.split()) == 2 and int(second.split()[0]) == 1024


def test_failure_exit_and_json(capsys, tmp_path):
    code, _, err = run(capsys, "scan", "--family", "ones", "--n-grid", "2^9..2^13", "--n-random", "4",
                       "--tolerance", "0.5")
    assert code == 1
    fails = json.loads(err)["failures"]
    assert fails and fails[0]["check"] == "fitted slope"
    code, _, err = run(capsys, "scan", "--family", "ones", "--n-grid", "2^9..2^11")
    assert code == 2 and json.loads(err)["failures"][0]["error"] == "ValueError"


def test_airy_and_vdc(capsys):
    assert run(capsys, "airy")[0] == 0
    code, out, _ = run(capsys, "vdc", "--trials", "10")
    assert code == 0 and json.loads(out)["summary"]["trials"] == 10


def test_config_file_and_flag_precedence(capsys, tmp_path, monkeypatch):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("vdc:\n  trials: 3\nthreads: 2\n")
    monkeypatch.setenv("MODTWIST_THREADS", "5")
    code, out, _ = run(capsys, "vdc", "--config", str(cfg))
    assert json.loads(out)["summary"]["trials"] == 3
    code, out, _ = run(capsys, "vdc", "--config", str(cfg), "--trials", "4")
    assert json.loads(out)["summary"]["trials"] == 4


def test_repeat_runs_byte_identical(tmp_path, capsys):
    outs = []
    for i in range(2):
        d = tmp_path / f"r{i}"
        main(["scan", "--family", "random", "--n-grid", "2^9..2^13", "--n-random", "32", "--seed", "7",
              "--threads", str(1 + 2 * i), "--out", str(d)])
        outs.append({p.name: p.read_bytes() for p in d.iterdir()})
    capsys.readouterr()
    assert outs[0] == outs[1]


def test_bad_subcommand():
    with pytest.raises(SystemExit):
        main(["frobnicate"])
