import csv
import json
import subprocess
import sys

import pytest

from kghup.cli import main


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def doc_of(out):
    doc = json.loads(out)
    assert set(doc) == {"config", "seed", "results", "tail_bounds", "warnings"}
    return doc


def test_orbit_rational_terminates(capsys):
    code, out, _ = run(["orbit", "--x", "2/5", "--beta", "1", "--steps", "10"], capsys)
    assert code == 0
    res = doc_of(out)["results"]
    assert res["digits"] == [1, -1]
    assert res["terminated"] == "hit_zero"
    assert res["exact"] and res["iterates"][-1] == "0"


def test_hup_verdict_example(capsys):
    code, out, _ = run(["hup", "verdict", "--alpha", "2", "--beta", "1", "--eps", "0.25"], capsys)
    assert code == 0
    assert doc_of(out)["results"] == {"beta_prime": 0.5, "hup": True}


def test_spectrum_csv(tmp_path, capsys):
    path = tmp_path / "s.csv"
    code, out, _ = run(["spectrum", "--beta", "0.5", "--grid", "1024", "--top", "8",
                        "--out", str(path)], capsys)
    assert code == 0
    raw = path.read_bytes()
    assert b"\r\n" not in raw and raw.endswith(b"\n")
    rows = list(csv.DictReader(raw.decode("utf-8").splitlines()))
    assert len(rows) == 8
    mods = [float(r["modulus"]) for r in rows]
    assert all(m < 1 for m in mods) and mods == sorted(mods, reverse=True)
    assert doc_of(out)["seed"] == 0


def test_ecf_round_trip(capsys):
    code, out, _ = run(["ecf", "expand", "--x", "3/7"], capsys)
    assert code == 0
    res = doc_of(out)["results"]
    digits = ",".join(str(d) for d in res["digits"])
    code, out, _ = run(["ecf", "reconstruct", "--digits", digits, "--tail", res["tail"]], capsys)
    assert code == 0 and doc_of(out)["results"]["value"] == "3/7"


def test_moebius_classify(capsys):
    code, out, _ = run(["moebius", "classify", "--beta", "2,1.5"], capsys)
    assert code == 0
    v = doc_of(out)["results"]["verdicts"]
    assert (v[0]["p"], v[0]["q"]) == (1, 2)
    assert v[1]["status"] == "non_discrete"


@pytest.mark.parametrize("argv", [
    ["no-such-command"],
    ["orbit", "--x", "0.3", "--bogus", "1"],
    ["orbit", "--x", "abc"],
    ["spectrum", "--grid", "0"],
    ["spectrum", "--discretization", "spline"],
    ["hup", "verdict", "--alpha", "-1"],
    ["hup", "falsify", "--kind", "ac", "--alpha", "1", "--beta", "1", "--eps", "1"],
    ["hup", "density-gap", "--target-beta", "0.5"],
    ["survivor", "--beta", "1.5"],
    ["orbit", "--x", "0.3", "--threads", "0"],
])
def test_validation_errors_exit_2(argv, capsys):
    code, out, err = run(argv, capsys)
    assert code == 2
    assert out == "" and err


def test_accuracy_failure_exit_3(capsys):
    code, out, err = run(["hup", "lattice-residual", "--kind", "ac", "--beta", "2",
                          "--j-max", "1", "--k-max", "1", "--tol", "1e-30"], capsys)
    assert code == 3 and out == "" and "numerical" in err


def test_help_exits_0_and_documents_env(capsys):
    code, out, _ = run(["--help"], capsys)
    assert code == 0 and "KGHUP_" in out


def test_byte_identical_reruns(tmp_path, capsys):
    argv = ["spectrum-sweep", "--betas", "0.3,0.7", "--grids", "128,256", "--top", "4",
            "--out", str(tmp_path / "sw.csv")]
    _, first, _ = run(argv, capsys)
    csv1 = (tmp_path / "sw.csv").read_bytes()
    _, second, _ = run(argv, capsys)
    assert first == second and (tmp_path / "sw.csv").read_bytes() == csv1


def test_threads_do_not_change_output(tmp_path, capsys):
    base = ["spectrum-sweep", "--betas", "0.3,0.5,0.9", "--grids", "128", "--top", "3"]
    _, one, _ = run(base + ["--out", str(tmp_path / "a.csv")], capsys)
    _, four, _ = run(base + ["--threads", "4", "--out", str(tmp_path / "a.csv")], capsys)
    assert one == four


def test_seed_recorded_and_env_override(monkeypatch, capsys):
    argv = ["birkhoff", "--starts", "2", "--N", "10,50", "--precision-bits", "64"]
    _, a, _ = run(argv + ["--seed", "7"], capsys)
    monkeypatch.setenv("KGHUP_SEED", "7")
    _, b, _ = run(argv, capsys)
    assert a == b and doc_of(a)["seed"] == 7
    monkeypatch.setenv("KGHUP_SEED", "8")
    _, c, _ = run(argv, capsys)
    assert doc_of(c)["seed"] == 8 and doc_of(c)["results"] != doc_of(a)["results"]


def test_invalid_env_override_exit_2(monkeypatch, capsys):
    monkeypatch.setenv("KGHUP_STEPS", "many")
    code, _, _ = run(["orbit", "--x", "1/3"], capsys)
    assert code == 2


def test_floats_round_trip(capsys):
    _, out, _ = run(["orbit", "--x", "0.1", "--steps", "5"], capsys)
    res = doc_of(out)["results"]
    from kghup import gauss_map

    rec = gauss_map.orbit(0.1, 5)
    assert res["iterates"] == [p.value for p in rec.iterates]


def test_console_entry_point_module():
    proc = subprocess.run([sys.executable, "-m", "kghup.cli", "hup", "verdict", "--alpha", "1",
                           "--beta", "1", "--eps", "1"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["results"]["hup"] is True


def test_orbit_extended_precision_with_exact_beta(monkeypatch, capsys):
    monkeypatch.setenv("KGHUP_PRECISION_BITS", "256")
    code, out, _ = run(["orbit", "--x", "0.3", "--steps", "3"], capsys)
    assert code == 0
    doc = doc_of(out)
    assert doc["config"]["precision_bits"] == 256
    assert doc["results"]["digits"] == [2, 1, 1]
