import json
import subprocess
import sys

import pytest

from pwsc.system import fixture_path

PWSC = [sys.executable, "-m", "pwsc.cli"]


def run(*args, cwd=None):
    return subprocess.run(
        PWSC + [str(a) for a in args], capture_output=True, text=True, cwd=cwd
    )


@pytest.fixture(scope="module")
def sys_a_path():
    return str(fixture_path("sys_a"))


@pytest.fixture(scope="module")
def sys_b_path():
    return str(fixture_path("sys_b"))


def test_validate_fixture_passes(sys_a_path):
    r = run("validate", sys_a_path)
    assert r.returncode == 0, r.stderr
    report = json.loads(r.stdout)
    assert report["passed"] is True
    assert report["x_M"] == pytest.approx(0.95)


def test_validate_failing_system(tmp_path):
    bad = tmp_path / "bad.ini"
    bad.write_text(
        '[functions]\nf_minus = "x"\nf_plus = "x*(1.9 - x)"\ng = "x - lambda"\n'
        "[parameters]\neps = 0.1\nlambda = 0\n"
    )
    r = run("validate", bad)
    assert r.returncode == 2
    report = json.loads(r.stdout)
    failed = [c["name"] for c in report["checks"] if not c["passed"]]
    assert "f_minus'(0) <= 0" in failed


def test_validate_missing_file():
    r = run("validate", "no_such_file.ini")
    assert r.returncode == 1


def test_usage_error_exit_code():
    r = run("simulate", "--x0", "nope")
    assert r.returncode == 1


def test_classify_fixtures(sys_a_path, sys_b_path, tmp_path):
    r = run("classify", sys_a_path)
    assert r.returncode == 0, r.stderr
    rep = json.loads(r.stdout)
    assert rep["case"] == "iii-c"
    assert rep["criticality"] == "supercritical"

    out = tmp_path / "b.json"
    r = run("classify", sys_b_path, "--json", out)
    assert r.returncode == 0
    rep = json.loads(out.read_text())
    assert rep["case"] == "iii-a"
    assert rep["Lambda"] == pytest.approx(-0.55654, abs=1e-4)

    r = run("classify", str(fixture_path("sys_c")))
    rep = json.loads(r.stdout)
    assert rep["case"] == "i"
    assert rep["lambda0"] == pytest.approx(-0.035, abs=1e-6)


def test_classify_hypothesis_violation(tmp_path):
    bad = tmp_path / "bad.ini"
    bad.write_text(
        '[functions]\nf_minus = "-x"\nf_plus = "x - x^2"\ng = "y - lambda"\n'
        "[parameters]\neps = 0.1\nlambda = 0\n"
    )
    r = run("classify", bad)
    assert r.returncode == 2
    assert "hypothesis" in r.stderr


def test_simulate_csv_and_manifest(sys_a_path, tmp_path):
    out = tmp_path / "traj.csv"
    ev = tmp_path / "events.csv"
    r = run(
        "simulate", sys_a_path, "--lambda", 0.01, "--x0", 0.0, "--y0", 0.5,
        "--t-max", 50, "--out", out, "--events-out", ev,
    )
    assert r.returncode == 0, r.stderr
    lines = out.read_text().split("\n")
    assert lines[0] == "t,x,y,region"
    first = lines[1].split(",")
    assert float(first[0]) == 0.0 and float(first[1]) == 0.0 and float(first[2]) == 0.5
    assert set(l.split(",")[3] for l in lines[1:] if l) <= {"L", "R"}
    ev_lines = ev.read_text().split("\n")
    assert ev_lines[0] == "event_id,t,x,y,direction"
    manifest = json.loads((tmp_path / "traj.csv.manifest.json").read_text())
    assert manifest["command"] == "simulate"
    assert str(out) in manifest["outputs"]


def test_simulate_zero_duration_single_row(sys_a_path, tmp_path):
    out = tmp_path / "t0.csv"
    r = run("simulate", sys_a_path, "--x0", 0.2, "--y0", 0.3, "--t-max", 0, "--out", out)
    assert r.returncode == 0
    rows = [l for l in out.read_text().strip().split("\n")[1:] if l]
    assert len(rows) == 1
    t, x, y, region = rows[0].split(",")
    assert (float(t), float(x), float(y), region) == (0.0, 0.2, 0.3, "R")


def test_simulate_nonfinite_x0(sys_a_path, tmp_path):
    r = run("simulate", sys_a_path, "--x0", "nan", "--y0", 0.0, "--t-max", 1,
            "--out", tmp_path / "x.csv")
    assert r.returncode == 1


def test_simulate_byte_identical_reruns(sys_a_path, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        r = run("simulate", sys_a_path, "--lambda", 0.02, "--x0", 0.1, "--y0", 0.4,
                "--t-max", 30, "--out", out)
        assert r.returncode == 0
    assert a.read_bytes() == b.read_bytes()


def test_sweep_empty_range(sys_a_path, tmp_path):
    r = run("sweep", sys_a_path, "--lambda-min", 0.5, "--lambda-max", 0.5,
            "--out", tmp_path / "s.csv")
    assert r.returncode == 1


def test_sweep_small(sys_a_path, tmp_path):
    out = tmp_path / "s.csv"
    r = run("sweep", sys_a_path, "--lambda-min", 0.005, "--lambda-max", 0.02,
            "--steps", 4, "--out", out)
    assert r.returncode == 0, r.stderr
    summary = json.loads((tmp_path / "s.csv.summary.json").read_text())
    assert summary["plateau_amplitude"] > 1.5
    header = out.read_text().split("\n")[0]
    assert header == "lambda,found,amplitude,period,cycle_type,multiplier"


def test_shadow_check(sys_a_path, tmp_path):
    out = tmp_path / "sh.csv"
    r = run("shadow-check", sys_a_path, "--yc", 0.5, "--lambda", 0.01, "--out", out)
    assert r.returncode == 0, r.stderr
    summary = json.loads(r.stdout)
    assert summary["max_violation"] <= 1e-8
    assert out.read_text().startswith("t,x_true,y_true,R_true,x_shadow,y_shadow,R_shadow")


def test_shadow_check_bad_yc(sys_a_path, tmp_path):
    r = run("shadow-check", sys_a_path, "--yc", -0.1, "--out", tmp_path / "x.csv")
    assert r.returncode == 1


def test_shadow_check_ordering_violation(sys_b_path, tmp_path):
    # high entry: the excursion visits x < -0.5 where f_plus > f_minus
    r = run("shadow-check", sys_b_path, "--yc", 0.8, "--lambda", 0.01,
            "--out", tmp_path / "x.csv")
    assert r.returncode == 2
    assert "ordering" in r.stderr


def test_fixtures_lists_bundled_systems():
    r = run("fixtures")
    assert r.returncode == 0
    names = [l.split("\t")[0] for l in r.stdout.strip().split("\n")]
    assert names == ["sys_a", "sys_b", "sys_c", "sys_d"]
