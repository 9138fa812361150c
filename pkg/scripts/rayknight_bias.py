"""Discretization bias of the walk local time against the BESQ sheet.

For each step size, reports the mean and variance of the walk local time at
level a (exact values t and 2ta - t dx), the KS distance to a large sheet
sample, and the fraction of seeds passing the p > 0.005 gate at n = 10^4.
"""

from __future__ import annotations

import argparse

import numpy as np

from bochner.rng import RngStream
from bochner.verify import besq_sheet_chunk, ks2, rayknight_localtimes


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--a", type=float, default=0.3)
    p.add_argument("--steps", type=float, nargs="+", default=[1e-3, 2.5e-4, 1e-4, 2.5e-5])
    p.add_argument("--n-large", type=int, default=400_000)
    p.add_argument("--n-gate", type=int, default=10_000)
    p.add_argument("--seeds", type=int, default=100)
    args = p.parse_args()

    base = RngStream(2024)
    sheet = besq_sheet_chunk(base.child("sheet"), args.n_large, args.a, args.t)
    print(f"{'step':>9} {'dx':>9} {'mean':>8} {'var':>8} {'2ta-t*dx':>9} {'KS D':>7} {'pass rate':>9}")
    for step in args.steps:
        lt = rayknight_localtimes(args.t, [args.a], step, args.n_large, base.child(f"walk{step:g}"))
        x, dx = lt[args.a], lt["dx"]
        d, _ = ks2(x, sheet)
        passes = 0
        for s in range(args.seeds):
            g = base.child(f"gate{step:g}").child(s)
            walk = rayknight_localtimes(args.t, [args.a], step, args.n_gate, g.child(0))[args.a]
            passes += ks2(walk, besq_sheet_chunk(g.child(1), args.n_gate, args.a, args.t))[1] > 0.005
        print(f"{step:>9.2e} {dx:>9.5f} {x.mean():>8.4f} {x.var(ddof=1):>8.4f} "
              f"{2 * args.t * args.a - args.t * dx:>9.4f} {d:>7.4f} {passes / args.seeds:>9.2f}")
    print(f"sheet: mean {np.mean(sheet):.4f}, var {np.var(sheet, ddof=1):.4f} (exact {2 * args.t * args.a:.4f})")


if __name__ == "__main__":
    main()
