import numpy as np
import pytest

from tricov import io
from tricov.cli import main
from tricov.estimator import estimate
from tricov.grid import make_equidistant_grid
from tricov.processes import OUProcess, add_noise
from tricov.rng import RngSpec
from tricov.weights import SmootherConfig


def run(*args):
    return main([str(a) for a in args])


def test_simulate_matches_library(tmp_path):
    out = tmp_path / "d.csv"
    assert run("simulate", "--process", "ou", "--theta", 3, "--sigma", 2, "--noise-sd", 0.75,
               "--n", 100, "--p", 40, "--seed", 7, "--out", out) == 0
    y, g = io.read_samples(out)
    rng = RngSpec(7)
    expected = add_noise(OUProcess(3, 2).simulate(100, make_equidistant_grid(40), rng), 0.75, rng)
    assert np.array_equal(y, expected)


def test_estimate_pipeline(tmp_path):
    d, s, sd, c = (tmp_path / f for f in ("d.csv", "s.csv", "sd.csv", "c.csv"))
    run("simulate", "--process", "ou", "--theta", 3, "--sigma", 2, "--noise-sd", 0.75,
        "--n", 100, "--p", 40, "--seed", 7, "--out", d)
    assert run("estimate", "--input", d, "--order", 1, "--bandwidth", 0.3, "--out", s,
               "--std-out", sd, "--corr-out", c) == 0
    y, g = io.read_samples(d)
    surf = io.read_surface(s)
    assert np.array_equal(surf.values, estimate(y, g, SmootherConfig(1, 0.3)).values)
    assert len(sd.read_text().splitlines()) == 41
    rho = io.read_surface(c)
    assert np.all(rho.values[rho.evals.diagonal_mask()] == 1.0)


def test_estimate_lattice_and_header(tmp_path):
    d, s = tmp_path / "d.csv", tmp_path / "s.csv"
    run("simulate", "--process", "bm", "--n", 30, "--p", 10, "--seed", 1, "--header", "--out", d)
    assert run("estimate", "--input", d, "--grid", "header", "--bandwidth", 0.4, "--kernel", "uniform",
               "--domain", "offdiag", "--lattice", 6, "--out", s) == 0
    assert len(s.read_text().splitlines()) == 22


def test_cv_singleton_prints_h(tmp_path, capsys):
    d, out = tmp_path / "d.csv", tmp_path / "cv.csv"
    run("simulate", "--n", 40, "--p", 12, "--seed", 2, "--noise-sd", 0.5, "--out", d)
    assert run("cv", "--input", d, "--folds", 5, "--h-grid", "0.3:0.3:0.1", "--order", 1,
               "--seed", 3, "--out", out) == 0
    assert capsys.readouterr().out.strip() == "chosen h = 0.3"


@pytest.mark.parametrize("argv", [
    ["estimate", "--input", "x.csv"],
    ["simulate", "--n", "5", "--p", "4", "--out", "x", "--bogus"],
    ["cv", "--input", "x", "--out", "y", "--h-grid", "a:b"],
    ["nonsense"],
    [],
])
def test_usage_errors_exit_2(argv, capsys):
    assert main(argv) == 2
    assert "usage" in capsys.readouterr().err


def test_help_mentions_na(capsys):
    assert main(["--help"]) == 0
    assert "NA" in capsys.readouterr().out


def test_runtime_errors_exit_1(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("1,2\n3,x\n")
    assert run("estimate", "--input", bad, "--bandwidth", 0.3, "--out", tmp_path / "s.csv") == 1
    assert "row 2, column 2" in capsys.readouterr().err
    assert run("simulate", "--n", 5, "--p", 1, "--out", tmp_path / "s.csv") == 1
    assert run("simulate", "--n", 5, "--p", 4, "--noise-sd", -1, "--out", tmp_path / "s.csv") == 1
    assert run("estimate", "--input", tmp_path / "missing.csv", "--bandwidth", 0.3, "--out", tmp_path / "o.csv") == 1
    assert run("clt", "--process", "bm", "--n", 10, "--p", 10, "--bandwidth", 0.3, "--out", tmp_path / "o.csv") == 1


def test_estimate_warns_about_holes(tmp_path, capsys):
    d, s = tmp_path / "d.csv", tmp_path / "s.csv"
    run("simulate", "--n", 10, "--p", 5, "--seed", 0, "--out", d)
    assert run("estimate", "--input", d, "--bandwidth", 0.05, "--out", s) == 0
    assert "warning" in capsys.readouterr().err
    assert s.read_text().count(",NA") == 5


SMALL = {
    "simulate": ["--process", "twoterm", "--n", 20, "--p", 8, "--noise-sd", 0.3],
    "decompose": ["--n", 20, "--p", 8, "--bandwidth", 0.5, "--reps", 2, "--include-indep"],
    "sweep": ["--n", 20, "--p", 8, "--h-grid", "0.4:0.6:0.2", "--reps", 2],
    "rates": ["--n-list", "20,40", "--p", 8, "--h-grid", "0.4:0.6:0.2", "--reps", 2],
    "compare": ["--n", 20, "--p", 8, "--orders", "0,1", "--h-grid", "0.4:0.6:0.2", "--reps", 2],
    "clt": ["--n", 20, "--p", 8, "--bandwidth", 0.5, "--reps", 5],
}


@pytest.mark.parametrize("cmd", sorted(SMALL))
def test_seeded_commands_byte_identical(cmd, tmp_path):
    a, b, c = tmp_path / "a.csv", tmp_path / "b.csv", tmp_path / "c.csv"
    assert run(cmd, *SMALL[cmd], "--seed", 5, "--out", a) == 0
    assert run(cmd, *SMALL[cmd], "--seed", 5, "--out", b) == 0
    assert a.read_bytes() == b.read_bytes()
    run(cmd, *SMALL[cmd], "--seed", 6, "--out", c)
    assert a.read_bytes() != c.read_bytes()


def test_python_dash_m(tmp_path):
    import subprocess
    import sys

    out = subprocess.run([sys.executable, "-m", "tricov", "--help"], capture_output=True, text=True)
    assert out.returncode == 0 and "estimate" in out.stdout
