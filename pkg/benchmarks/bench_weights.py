"""Time the weight-field core on both backends.

    python3 benchmarks/bench_weights.py [--repeat 3] [--quick]

Each row builds the full design-pair field (cache off) and reports the best
wall time per backend, the speedup and the largest weight difference.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from tricov._backend import available_backends
from tricov.grid import make_equidistant_grid, triangle_eval_grid
from tricov.weights import SmootherConfig, compute_weight_field

CASES = [
    # (p, h, m, domain)
    (25, 0.3, 1, "triangle"),
    (50, 0.3, 1, "triangle"),
    (50, 0.3, 2, "triangle"),
    (50, 0.3, 1, "offdiag"),
    (100, 0.1, 1, "triangle"),
    (100, 0.3, 1, "triangle"),
]
QUICK = CASES[:2]


def run(cases, repeat: int) -> None:
    backends = available_backends()
    if "cython" not in backends:
        print("compiled core not built; timing the numpy fallback only")
    header = f"{'p':>4} {'h':>5} {'m':>2} {'domain':>8} {'pairs':>10}"
    header += "".join(f" {b + ' [s]':>12}" for b in backends)
    if len(backends) == 2:
        header += f" {'speedup':>8} {'max|dw|':>9}"
    print(header)
    for p, h, m, domain in cases:
        g = make_equidistant_grid(p)
        evals = triangle_eval_grid(g)
        cfg = SmootherConfig(m, h, pair_domain=domain)
        times, fields = {}, {}
        for b in backends:
            fields[b] = compute_weight_field(g, cfg, evals, backend=b, cache=False)
            times[b] = min(timeit.repeat(
                lambda: compute_weight_field(g, cfg, evals, backend=b, cache=False), number=1, repeat=repeat))
        pairs = int(fields[backends[0]].counts.sum())
        line = f"{p:>4} {h:>5.2f} {m:>2} {domain:>8} {pairs:>10}"
        line += "".join(f" {times[b]:>12.4f}" for b in backends)
        if len(backends) == 2:
            diff = np.max(np.abs(fields["cython"].matrix.data - fields["python"].matrix.data))
            line += f" {times['python'] / times['cython']:>7.1f}x {diff:>9.1e}"
        print(line, flush=True)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--quick", action="store_true", help="two small cases only")
    args = ap.parse_args()
    run(QUICK if args.quick else CASES, args.repeat)


if __name__ == "__main__":
    main()
