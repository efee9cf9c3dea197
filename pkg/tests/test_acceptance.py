"""Acceptance gate: twelve criteria at their stated tolerances.

Each criterion prints one ``[PASS]`` / ``[FAIL]`` line with the measured numbers
and its runtime against the budget.
Criterion ``i`` uses master seed ``1000 + i``. Run the gate alone with

    pytest tests/test_acceptance.py -v

or as a script (``python3 tests/test_acceptance.py``) for the status lines only.
"""

from __future__ import annotations

import functools
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest

from tricov.basis import monomial_exponents
from tricov.cli import main as cli_main
from tricov.cv import CVPlan, h_grid, kfold_cv
from tricov.estimator import estimate, smooth_covariance
from tricov.experiments import (
    bandwidth_sweep,
    clt_check,
    decomposition_study,
    estimator_comparison,
)
from tricov.grid import make_equidistant_grid
from tricov.io import read_surface, write_surface
from tricov.processes import BrownianMotion, OUProcess, TwoTermProcess, add_noise
from tricov.rng import RngSpec
from tricov.weights import SmootherConfig, compute_weight_field, verify_weight_axioms

from oracles import wls_weights

H_GRID = h_grid(0.05, 1.0, 0.05)
OU = OUProcess(3.0, 2.0)
NOISE_SD = 0.75


def seed(i: int) -> RngSpec:
    return RngSpec(1000 + i)


def status_line(number: int, ok: bool, detail: str, elapsed: float, budget: float) -> str:
    verdict = "PASS" if ok and elapsed <= budget else "FAIL"
    return f"[{verdict}] criterion {number:2d}: {detail} ({elapsed:.1f}s, budget {budget:.0f}s)"


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


# shared OU sweeps: criterion 6, 7 and 8 all read the n=400, p=50 curve
@functools.lru_cache(maxsize=None)
def ou_sweep(n: int, p: int, reps: int = 200):
    return bandwidth_sweep(OU, n, p, NOISE_SD, 1, H_GRID, reps, seed(6).child(n, p))


def criterion_01_weight_axioms():
    rng = np.random.default_rng(1001)
    worst_zero = worst_mom = worst_out = 0.0
    with Timer() as t:
        for _ in range(200):
            p = int(rng.choice([15, 50]))
            m = int(rng.integers(0, 3))
            h = float(rng.uniform(4.0 / p, 1.0))
            x, y = np.sort(rng.uniform(0, 1, 2))
            g = make_equidistant_grid(p)
            fld = compute_weight_field(g, SmootherConfig(m, h), np.array([[x, y]]), cache=False)
            rep = verify_weight_axioms(fld)
            assert rep.holes == 0
            worst_zero = max(worst_zero, rep.zeroth)
            worst_mom = max(worst_mom, rep.moment)
            worst_out = max(worst_out, rep.out_of_window)
    ok = worst_zero <= 1e-8 and worst_mom <= 1e-8 and worst_out == 0.0
    return (ok, f"max|sum w - 1|={worst_zero:.2e}, max h-scaled moment={worst_mom:.2e}, "
           f"max out-of-window |w|={worst_out:g}", t.elapsed)


def criterion_02_polynomial_reproduction():
    rng = np.random.default_rng(1002)
    worst = {0: 0.0, 1: 0.0, 2: 0.0}
    with Timer() as t:
        for m in (0, 1, 2):
            exps = monomial_exponents(m)
            for _ in range(20):
                p = int(rng.choice([15, 30, 50]))
                h = float(rng.uniform(4.0 / p, 0.8))
                coef = rng.normal(size=len(exps))
                g = make_equidistant_grid(p)
                xs = g.points

                def q(a, b):
                    return sum(c * a**e1 * b**e2 for c, (e1, e2) in zip(coef, exps))

                surf = smooth_covariance(q(xs[:, None], xs[None, :]), g, SmootherConfig(m, h))
                err = np.max(np.abs(surf.values - q(surf.evals.x, surf.evals.y)))
                worst[m] = max(worst[m], float(err))
    ok = max(worst.values()) <= 1e-7
    return (ok, "sup|hatGamma - Q| by order " + ", ".join(f"m={m}: {v:.2e}" for m, v in worst.items()), t.elapsed)


def criterion_03_bruteforce_oracle():
    rng = np.random.default_rng(1003)
    worst = 0.0
    checked = 0
    with Timer() as t:
        for _ in range(60):
            p = int(rng.integers(4, 11))
            m = int(rng.integers(0, 3))
            h = float(rng.uniform(1.5 / p, 1.0))
            kind = str(rng.choice(["uniform", "epanechnikov"]))
            domain = str(rng.choice(["triangle", "offdiag"]))
            g = make_equidistant_grid(p)
            pts = np.sort(rng.uniform(0, 1, size=(4, 2)), axis=1)
            fld = compute_weight_field(g, SmootherConfig(m, h, kind, domain), pts, cache=False)
            for e, (x, y) in enumerate(pts):
                if fld.effective_order[e] < 0:
                    continue
                ref = wls_weights(g.points, x, y, h, int(fld.effective_order[e]), kind, domain)
                j, k, w = fld.weights_at(e)
                got = {(int(a), int(b)): float(c) for a, b, c in zip(j, k, w)}
                assert got.keys() == ref.keys()
                worst = max(worst, max(abs(got[key] - ref[key]) for key in ref))
                checked += 1
    return (worst <= 1e-9, f"max |w - w_oracle| = {worst:.2e} over {checked} points", t.elapsed)


def criterion_04_decomposition_identity():
    with Timer() as t:
        rep = decomposition_study(OU, 50, 15, NOISE_SD, SmootherConfig(1, 0.4), 20, seed(4), include_indep=True)
    resid = rep.values("residual")
    ok = resid.size == 20 and np.all(resid <= 1e-9)
    return (ok, f"max residual over 20 reps = {resid.max():.2e}", t.elapsed)


def criterion_05_mean_invariance():
    rng = np.random.default_rng(1005)
    worst = 0.0
    with Timer() as t:
        g = make_equidistant_grid(30)
        r = seed(5)
        y = add_noise(OU.simulate(80, g, r), NOISE_SD, r)
        cfg = SmootherConfig(1, 0.3)
        base = estimate(y, g, cfg).values
        for _ in range(50):
            c = rng.normal(scale=10.0, size=g.p)
            worst = max(worst, float(np.max(np.abs(estimate(y + c, g, cfg).values - base))))
    return (worst <= 1e-10, f"max |delta hatGamma| over 50 shifts = {worst:.2e}", t.elapsed)


def criterion_06_rate_in_n():
    with Timer() as t:
        e100 = float(np.min(ou_sweep(100, 50).extras["mean_curve"]))
        e400 = float(np.min(ou_sweep(400, 50).extras["mean_curve"]))
    ratio = e400 / e100
    return (0.3 <= ratio <= 0.8,
           f"oracle mean sup error n=100: {e100:.4f}, n=400: {e400:.4f}, ratio {ratio:.3f} (target [0.3, 0.8])", t.elapsed)


def criterion_07_bandwidth_optimum():
    with Timer() as t:
        best = {p: ou_sweep(400, p).extras["best_h"] for p in (25, 50)}
    ok = all(0.15 <= h <= 0.45 for h in best.values())
    return (ok, "argmin h at n=400: " + ", ".join(f"p={p}: {h:.2f}" for p, h in best.items())
           + " (target [0.15, 0.45])", t.elapsed)


def criterion_08_cv_behaviour():
    reps = 50
    step = H_GRID[1] - H_GRID[0]
    with Timer() as t:
        oracle = ou_sweep(400, 50).extras["best_h"]
        g = make_equidistant_grid(50)
        chosen = []
        for r in range(reps):
            rr = seed(8).child(r)
            y = add_noise(OU.simulate(400, g, rr), NOISE_SD, rr)
            plan = CVPlan(5, H_GRID, seed=1008 + r)
            chosen.append(kfold_cv(y, g, SmootherConfig(1, 0.3), plan).chosen_h)
    chosen = np.array(chosen)
    med = float(np.median(chosen))
    frac = float(np.mean(chosen >= oracle - step - 1e-12))
    ok = 0.15 <= med <= 0.6 and frac >= 0.8
    return (ok, f"median CV h = {med:.2f} (target [0.15, 0.6]), share >= oracle {oracle:.2f} - step: "
           f"{frac:.0%} (target >= 80%)", t.elapsed)


def criterion_09_estimator_comparison():
    with Timer() as t:
        rep = estimator_comparison(100, 50, NOISE_SD, [1], H_GRID, 200, seed(9), targets=[OU, TwoTermProcess()])
    best = rep.extras["best"]
    ou_tri, ou_off = best[("ou", "triangle", 1)][1], best[("ou", "offdiag", 1)][1]
    tt_tri, tt_off = best[("twoterm", "triangle", 1)][1], best[("twoterm", "offdiag", 1)][1]
    gap = ou_off / ou_tri - 1.0
    spread = max(tt_tri, tt_off) / min(tt_tri, tt_off) - 1.0
    ok = gap >= 0.10 and spread <= 0.15
    return (ok, f"OU: offdiag {ou_off:.4f} vs triangle {ou_tri:.4f} (+{gap:.1%}, need >= 10%); "
           f"two-term: {tt_off:.4f} vs {tt_tri:.4f} (spread {spread:.1%}, need <= 15%)", t.elapsed)


def criterion_10_clt_variance():
    points = [(0.25, 0.75), (0.5, 0.9)]
    with Timer() as t:
        rep = clt_check(OU, 400, 100, 0.1, 1, points, 500, seed(10), noise_sd=NOISE_SD)
    parts = []
    ok = True
    for x, y in points:
        name = f"clt/{x:g},{y:g}"
        ratio = rep.values("variance_ratio", summary=True, experiment=name)[0]
        mean = rep.values("mean", summary=True, experiment=name)[0]
        se = rep.values("mean_se", summary=True, experiment=name)[0]
        ok &= 0.85 <= ratio <= 1.15 and abs(mean) <= 3 * se
        parts.append(f"({x:g},{y:g}): var ratio {ratio:.3f} (target [0.85, 1.15]), mean {mean:+.3f} vs 3se {3 * se:.3f}")
    return (bool(ok), "; ".join(parts), t.elapsed)


def criterion_11_simulator_laws():
    n = 20000
    g = make_equidistant_grid(10)
    idx = [0, 2, 4, 7, 9]
    x = g.points[idx]
    worst = {}
    with Timer() as t:
        for i, proc in enumerate([OU, TwoTermProcess(), BrownianMotion(1.0)]):
            y = proc.simulate(n, g, seed(11).child(i))[:, idx]
            emp = np.cov(y, rowvar=False)
            gam = proc.kernel(x[:, None], x[None, :])
            # Var(Z_j Z_k) for Gaussian Z gives the standard error of each entry
            se = np.sqrt((np.outer(np.diag(gam), np.diag(gam)) + gam**2) / n)
            worst[proc.name] = float(np.max(np.abs(emp - gam) / se))
    ok = max(worst.values()) <= 3.0
    return (ok, "max |emp - kernel| / se: " + ", ".join(f"{k}: {v:.2f}" for k, v in worst.items()), t.elapsed)


def criterion_12_determinism_round_trip():
    with tempfile.TemporaryDirectory() as d:
        return _determinism_round_trip(Path(d))


def _determinism_round_trip(tmp_path: Path):
    cmds = {
        "simulate": ["--process", "ou", "--theta", "3", "--sigma", "2", "--noise-sd", "0.75", "--n", "60", "--p", "20"],
        "decompose": ["--n", "30", "--p", "10", "--bandwidth", "0.4", "--reps", "3"],
        "sweep": ["--n", "30", "--p", "10", "--h-grid", "0.3:0.6:0.1", "--reps", "3"],
        "rates": ["--n-list", "20,40", "--p", "10", "--h-grid", "0.3:0.6:0.1", "--reps", "3"],
        "compare": ["--n", "30", "--p", "10", "--orders", "1", "--h-grid", "0.3:0.6:0.1", "--reps", "3"],
        "clt": ["--n", "30", "--p", "10", "--bandwidth", "0.4", "--reps", "10"],
    }
    same = {}
    with Timer() as t:
        data = tmp_path / "data.csv"
        cli_main(["simulate", *cmds["simulate"], "--seed", "1012", "--out", str(data)])
        file_cmds = {
            "estimate": ["--input", str(data), "--bandwidth", "0.3"],
            "cv": ["--input", str(data), "--folds", "5", "--h-grid", "0.2:0.6:0.1"],
        }
        for name, args in list(cmds.items()) + list(file_cmds.items()):
            outs = []
            for rep in range(2):
                out = tmp_path / f"{name}{rep}.csv"
                extra = ["--seed", "1012"] if name != "estimate" else []
                assert cli_main([name, *args, *extra, "--out", str(out)]) == 0
                outs.append(out.read_bytes())
            same[name] = outs[0] == outs[1]
        first = tmp_path / "estimate0.csv"
        second = tmp_path / "roundtrip.csv"
        write_surface(second, read_surface(first))
        same["surface round-trip"] = first.read_bytes() == second.read_bytes()
    ok = all(same.values())
    bad = [k for k, v in same.items() if not v]
    return (ok, f"{len(same)} byte-identity checks" + (f", mismatched: {bad}" if bad else ", all identical"), t.elapsed)


CRITERIA = [
    (1, criterion_01_weight_axioms, 10),
    (2, criterion_02_polynomial_reproduction, 10),
    (3, criterion_03_bruteforce_oracle, 5),
    (4, criterion_04_decomposition_identity, 30),
    (5, criterion_05_mean_invariance, 5),
    (6, criterion_06_rate_in_n, 600),
    (7, criterion_07_bandwidth_optimum, 600),
    (8, criterion_08_cv_behaviour, 600),
    (9, criterion_09_estimator_comparison, 600),
    (10, criterion_10_clt_variance, 600),
    (11, criterion_11_simulator_laws, 60),
    (12, criterion_12_determinism_round_trip, 10),
]


@pytest.mark.parametrize("number, fn, budget", CRITERIA, ids=[f.__name__ for _, f, _ in CRITERIA])
def test_acceptance(number, fn, budget, capsys):
    ok, detail, elapsed = fn()
    line = status_line(number, ok, detail, elapsed, budget)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line
    assert elapsed <= budget, line


if __name__ == "__main__":
    failed = 0
    for number, fn, budget in CRITERIA:
        ok, detail, elapsed = fn()
        print(status_line(number, ok, detail, elapsed, budget), flush=True)
        failed += not (ok and elapsed <= budget)
    sys.exit(1 if failed else 0)
