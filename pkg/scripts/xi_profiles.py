"""Export xi(x, lam) profiles and Laplace exponents for a measure, both branches and variants.

    python3 scripts/xi_profiles.py --mu '{"atoms": [[0.3, 1.0], [0.9, 0.5]]}' --out profiles
"""

from __future__ import annotations

import argparse
import json
from pathlib import Path

import numpy as np

from bochner.branch import BranchKind
from bochner.cli import write_csv
from bochner.sheet import HalfLineMeasure
from bochner.spectral import BoundaryVariant, riccati_solve


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    p.add_argument("--mu", default='{"atoms": [[0.3, 1.0], [0.9, 0.5]], "pieces": [[0.0, 1.5, 0.4]]}')
    p.add_argument("--lambdas", type=float, nargs="+", default=[0.25, 0.5, 1.0, 2.0, 4.0])
    p.add_argument("--points", type=int, default=301)
    p.add_argument("--out", default="profiles")
    args = p.parse_args()

    mu = HalfLineMeasure.from_dict(json.loads(args.mu))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    xs = np.linspace(0.0, 1.25 * mu.support_max + 0.25, args.points)
    prof, expo = [], []
    for branch in BranchKind:
        for variant in BoundaryVariant:
            for lam in args.lambdas:
                sol = riccati_solve(branch, mu, lam, variant)
                expo.append((branch.value, variant.value, lam, sol.phi))
                prof.extend((branch.value, variant.value, lam, x, xi) for x, xi in zip(xs, sol.xi(xs)))
    write_csv(out / "xi_profiles.csv", ["branch", "variant", "lambda", "x", "xi"], prof)
    write_csv(out / "exponents.csv", ["branch", "variant", "lambda", "phi"], expo)
    for row in expo:
        print("{:12s} {:10s} lam={:<5g} Phi={:.10f}".format(*row))


if __name__ == "__main__":
    main()
