"""Command-line front end.

    bochner <command> [--config PATH] [--seed S] [--parallel K] [--out DIR]

Commands: simulate-sheet, eval-exponent, verify-laplace, verify-eq3,
verify-martingale, verify-rayknight, verify-all.

Each run writes into the output directory:

* ``results.json``: config (minus execution-only fields), seed and every
  check report; determined by (config, seed) alone.
* ``run.json``: timestamp, parallelism and runtimes.
* CSV tables (header row, 17 significant digits).

Output directory precedence: ``--out`` > ``$BOCHNER_OUT`` > config ``out``.
Exit codes: 0 all gates pass, 1 gate failure, 2 invalid config, 3 internal error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import datetime
import functools
import json
import math
import os
import sys
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import verify
from .branch import BranchKind
from .rng import RngStream
from .sheet import HalfLineMeasure, sample_sheet, subordinate_brownian
from .spectral import BoundaryVariant, riccati_solve

COMMANDS = (
    "simulate-sheet",
    "eval-exponent",
    "verify-laplace",
    "verify-eq3",
    "verify-martingale",
    "verify-rayknight",
    "verify-all",
)
OUT_ENV = "BOCHNER_OUT"
# fields that may change between runs without changing any number
EXECUTION_FIELDS = ("parallel", "out")

EXIT_PASS, EXIT_GATE, EXIT_CONFIG, EXIT_INTERNAL = 0, 1, 2, 3

LN2 = math.log(2.0)


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    command: str = "verify-all"
    branch: str = "homographic"
    mu: dict = field(default_factory=lambda: {"atoms": [[LN2, 1.0]], "pieces": []})
    lambdas: list = field(default_factory=lambda: [0.5, 1.0, 2.0])
    ts: list = field(default_factory=lambda: [1.0])
    variant: str = "both"
    a_levels: list = field(default_factory=lambda: [0.0, 0.25, 0.5, 1.0])
    t_grid: list = field(default_factory=lambda: [0.5, 1.0, 2.0])
    n_sheets: int = 1
    epsilons: list = field(default_factory=lambda: [0.05, 0.2])
    a_checkpoints: list = field(default_factory=lambda: [0.25, 0.5, 1.0])
    require_separation: bool = False
    rayknight_a: float = 0.3
    rayknight_step: float = 1e-3
    xi_points: int = 201
    n: int = 1_000_000
    n_ks: int = 100_000
    n_rayknight: int = 10_000
    chunk_size: int = verify.DEFAULT_CHUNK
    seed: int = 12345
    parallel: int = 1
    out: str = "results"

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(d) - names)
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        return cls(**d)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(data)

    def dump(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")

    @property
    def measure(self) -> HalfLineMeasure:
        return HalfLineMeasure.from_dict(self.mu)

    @property
    def variants(self) -> list[BoundaryVariant]:
        return list(BoundaryVariant) if self.variant == "both" else [BoundaryVariant.parse(self.variant)]

    def validate(self) -> None:
        """Check every field against the preconditions of the operations it feeds."""
        try:
            self._validate()
        except ConfigError:
            raise
        except (ValueError, TypeError, KeyError) as exc:
            raise ConfigError(str(exc)) from exc

    def _validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        BranchKind.parse(self.branch)
        if self.variant != "both":
            BoundaryVariant.parse(self.variant)
        mu = self.measure
        for name in ("n", "n_ks", "n_rayknight"):
            if int(getattr(self, name)) < 2:
                raise ConfigError(f"{name} must be >= 2")
        for name in ("chunk_size", "parallel", "n_sheets", "xi_points"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        if any(not float(x) >= 0 for x in self.lambdas) or not self.lambdas:
            raise ConfigError("lambdas must be a nonempty list of values >= 0")
        if any(not float(x) > 0 for x in self.ts) or not self.ts:
            raise ConfigError("ts must be a nonempty list of values > 0")
        a = np.asarray(self.a_levels, dtype=float)
        tg = np.asarray(self.t_grid, dtype=float)
        if a.size == 0 or a[0] != 0 or np.any(np.diff(a) <= 0):
            raise ConfigError("a_levels must start at 0 and increase strictly")
        if tg.size == 0 or np.any(tg < 0) or np.any(np.diff(tg) <= 0):
            raise ConfigError("t_grid must be >= 0 and increase strictly")
        if self.command in ("verify-laplace", "verify-eq3", "verify-martingale") and not mu.is_atomic:
            raise ConfigError(f"{self.command} needs an atomic mu")
        if self.command == "verify-eq3":
            if any(not 0 < float(e) < mu.support_min for e in self.epsilons) or not self.epsilons:
                raise ConfigError("epsilons must be > 0 and below the support of mu")
        if self.command == "verify-martingale" and any(float(x) < 0 for x in self.a_checkpoints):
            raise ConfigError("a_checkpoints must be >= 0")
        if not 0 < float(self.rayknight_step) <= 1e-3:
            raise ConfigError("rayknight_step must be in (0, 1e-3]")
        if not float(self.rayknight_a) > 0:
            raise ConfigError("rayknight_a must be > 0")


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


def write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _xi_rows(branch: BranchKind, mu: HalfLineMeasure, lambdas, variants, n_points: int):
    x_hi = max(mu.support_max, 0.0) * 1.25 + 0.25
    xs = np.linspace(0.0, x_hi, n_points)
    for lam in lambdas:
        for variant in variants:
            sol = riccati_solve(branch, mu, float(lam), variant)
            for x, xi in zip(xs, sol.xi(xs)):
                yield (float(lam), variant.value, float(x), float(xi))


# --- commands ------------------------------------------------------------------------


def _simulate_sheet(cfg: ExperimentConfig, out: Path, executor) -> list:
    branch = BranchKind.parse(cfg.branch)
    rng = RngStream(cfg.seed).child("simulate-sheet")
    sheet = sample_sheet(branch, cfg.a_levels, cfg.t_grid, rng.child(0), size=cfg.n_sheets)
    bm = subordinate_brownian(sheet, rng.child(1))
    rows = (
        (k, float(a), float(t), float(sheet.values[k, i, j]), float(bm[k, i, j]))
        for k in range(cfg.n_sheets)
        for i, a in enumerate(sheet.a_levels)
        for j, t in enumerate(sheet.t_grid)
    )
    write_csv(out / "sheet.csv", ["sheet", "a", "t", "Y", "B_Y"], rows)
    return []


def _eval_exponent(cfg: ExperimentConfig, out: Path, executor) -> list:
    branch = BranchKind.parse(cfg.branch)
    mu = cfg.measure
    rows = []
    for lam in cfg.lambdas:
        for variant in cfg.variants:
            phi = riccati_solve(branch, mu, float(lam), variant).phi
            for t in cfg.ts:
                rows.append((float(lam), variant.value, float(t), phi, math.exp(-float(t) * phi)))
    write_csv(out / "exponent.csv", ["lambda", "variant", "t", "phi", "laplace"], rows)
    write_csv(out / "xi_profile.csv", ["lambda", "variant", "x", "xi"],
              _xi_rows(branch, mu, cfg.lambdas, cfg.variants, cfg.xi_points))
    return []


def _verify_laplace(cfg, out, executor) -> list:
    reports = []
    for variant in cfg.variants:
        for t in cfg.ts:
            reports.append(verify.check_laplace(cfg.branch, cfg.measure, cfg.lambdas, float(t), cfg.n, variant,
                                                seed=cfg.seed, chunk_size=cfg.chunk_size, executor=executor))
    return reports


def _verify_eq3(cfg, out, executor) -> list:
    return [verify.check_eq3(cfg.branch, cfg.measure, cfg.epsilons, float(t), cfg.n, seed=cfg.seed,
                             chunk_size=cfg.chunk_size, executor=executor) for t in cfg.ts]


def _verify_martingale(cfg, out, executor) -> list:
    reports = []
    for lam in cfg.lambdas:
        for t in cfg.ts:
            for comp in ("xi_at_zero", "xi_at_a"):
                reports.append(verify.check_martingale(
                    cfg.branch, cfg.measure, float(lam), cfg.a_checkpoints, float(t), cfg.n, compensator=comp,
                    seed=cfg.seed, require_separation=cfg.require_separation,
                    chunk_size=cfg.chunk_size, executor=executor))
    return reports


def _verify_rayknight(cfg, out, executor) -> list:
    reports = []
    for t in cfg.ts:
        rep = verify.check_rayknight(float(t), cfg.rayknight_a, cfg.rayknight_step, cfg.n_rayknight,
                                     seed=cfg.seed, chunk_size=cfg.chunk_size, executor=executor)
        reports.append(rep)
    _rayknight_quantiles(cfg, out)
    return reports


def _rayknight_quantiles(cfg, out: Path) -> None:
    t = float(cfg.ts[0])
    base = RngStream(cfg.seed).child("rayknight-export")
    lt = verify.rayknight_localtimes(t, [cfg.rayknight_a], cfg.rayknight_step, cfg.n_rayknight, base.child(0))
    sheet = verify.run_chunks(functools.partial(verify.besq_sheet_chunk, a=cfg.rayknight_a, t=t),
                              cfg.n_rayknight, base.child(1), cfg.chunk_size)
    qs = np.linspace(0.0, 1.0, 101)
    rows = zip(qs, np.quantile(lt[cfg.rayknight_a], qs), np.quantile(sheet, qs))
    write_csv(out / "rayknight_quantiles.csv", ["q", "walk_local_time", "besq_sheet"], rows)


def acceptance_reports(cfg: ExperimentConfig, executor=None) -> list:
    """The full battery of acceptance checks at the sample sizes in ``cfg``."""
    s, n, ck = cfg.seed, cfg.n, cfg.chunk_size
    kw = {"seed": s, "chunk_size": ck, "executor": executor}
    reps = [verify.check_semigroup()]
    for branch in BranchKind:
        for a in (LN2, 1.5):
            for t in (0.5, 2.0):
                reps.append(verify.check_subordinator(branch, a, t, [0.5, 1.0, 2.0], n, **kw))
    for branch in BranchKind:
        reps.append(verify.check_sheet_consistency(branch, n=cfg.n_ks, **kw))
    reps.append(verify.check_spectral())
    for branch in BranchKind:
        for mu in ACCEPTANCE_MEASURES:
            reps.append(verify.check_laplace(branch, mu, [0.5, 1.0, 2.0], 1.0, n, BoundaryVariant.PLAIN, **kw))
    for mu in ACCEPTANCE_MEASURES:
        reps.append(verify.check_laplace(BranchKind.HOMOGRAPHIC, mu, [0.0, 0.5, 1.0, 2.0], 1.0, n,
                                         BoundaryVariant.EXTINCTION, **kw))
    reps.append(verify.check_eq3(BranchKind.HOMOGRAPHIC, HalfLineMeasure.dirac(LN2, 2.0), [0.05, 0.2], 1.0, n, **kw))
    for comp in ("xi_at_zero", "xi_at_a"):
        reps.append(verify.check_martingale(BranchKind.HOMOGRAPHIC, HalfLineMeasure.dirac(0.5), 1.0,
                                            [0.25, 0.5, 1.0], 1.0, n, compensator=comp, require_separation=True,
                                            **kw))
    reps.append(verify.check_extinction(BranchKind.HOMOGRAPHIC, 1.0, 8.0, n, **kw))
    reps.append(verify.check_rayknight(1.0, 0.3, 1e-3, cfg.n_rayknight, **kw))
    return reps


ACCEPTANCE_MEASURES = (
    HalfLineMeasure.dirac(LN2),
    HalfLineMeasure(atoms=((0.3, 1.0), (0.9, 0.5))),
    HalfLineMeasure(atoms=((0.2, 0.7), (0.5, 1.2), (1.1, 0.4))),
)


def _verify_all(cfg, out, executor) -> list:
    reps = acceptance_reports(cfg, executor)
    write_csv(out / "xi_profile.csv", ["lambda", "variant", "x", "xi"],
              _xi_rows(BranchKind.HOMOGRAPHIC, ACCEPTANCE_MEASURES[2], [0.5, 1.0, 2.0], list(BoundaryVariant),
                       cfg.xi_points))
    rk = dataclasses.replace(cfg, ts=[1.0], rayknight_a=0.3, rayknight_step=1e-3)
    _rayknight_quantiles(rk, out)
    return reps


HANDLERS = {
    "simulate-sheet": _simulate_sheet,
    "eval-exponent": _eval_exponent,
    "verify-laplace": _verify_laplace,
    "verify-eq3": _verify_eq3,
    "verify-martingale": _verify_martingale,
    "verify-rayknight": _verify_rayknight,
    "verify-all": _verify_all,
}


def run_experiment(cfg: ExperimentConfig) -> tuple[int, list]:
    """Run ``cfg.command``, write artifacts to ``cfg.out``; returns (exit status, reports)."""
    cfg.validate()
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "error.json").unlink(missing_ok=True)
    started = datetime.datetime.now(datetime.timezone.utc).isoformat()
    t0 = time.perf_counter()
    if cfg.parallel > 1:
        with ProcessPoolExecutor(max_workers=cfg.parallel) as ex:
            reports = HANDLERS[cfg.command](cfg, out, ex)
    else:
        reports = HANDLERS[cfg.command](cfg, out, None)
    total = time.perf_counter() - t0
    passed = all(r.passed for r in reports)

    record_cfg = {k: v for k, v in cfg.to_dict().items() if k not in EXECUTION_FIELDS}
    record = {
        "command": cfg.command,
        "seed": cfg.seed,
        "config": record_cfg,
        "passed": passed,
        "checks": [r.to_dict(include_runtime=False) for r in reports],
    }
    (out / "results.json").write_text(json.dumps(record, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    run = {
        "started": started,
        "parallel": cfg.parallel,
        "out": str(out),
        "total_runtime": total,
        "runtimes": {r.name: r.runtime for r in reports},
    }
    (out / "run.json").write_text(json.dumps(run, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return (EXIT_PASS if passed else EXIT_GATE), reports


def _error_record(kind: str, message: str, out: str | None, detail: str | None = None) -> None:
    rec = {"error": kind, "message": message}
    if detail:
        rec["detail"] = detail
    text = json.dumps(rec, indent=2, sort_keys=True)
    print(text, file=sys.stderr)
    if out:
        try:
            Path(out).mkdir(parents=True, exist_ok=True)
            (Path(out) / "error.json").write_text(text + "\n", encoding="utf-8")
        except OSError:
            pass


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bochner", description=__doc__.split("\n\n")[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="JSON experiment config (defaults are used for missing keys)")
    p.add_argument("--seed", type=int)
    p.add_argument("--parallel", type=int)
    p.add_argument("--out")
    p.add_argument("--quiet", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out_hint = args.out or os.environ.get(OUT_ENV)
    try:
        cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
        cfg.command = args.command
        if args.seed is not None:
            cfg.seed = args.seed
        if args.parallel is not None:
            cfg.parallel = args.parallel
        if os.environ.get(OUT_ENV):
            cfg.out = os.environ[OUT_ENV]
        if args.out:
            cfg.out = args.out
        out_hint = cfg.out
        cfg.validate()
    except (ConfigError, TypeError) as exc:
        _error_record("invalid_config", str(exc), out_hint)
        return EXIT_CONFIG
    try:
        status, reports = run_experiment(cfg)
    except Exception as exc:  # noqa: BLE001 - reported as a machine-readable record
        _error_record("internal_error", f"{type(exc).__name__}: {exc}", cfg.out, traceback.format_exc())
        return EXIT_INTERNAL
    if not args.quiet:
        for r in reports:
            print(r.summary())
        print(f"{cfg.command}: {'PASS' if status == EXIT_PASS else 'FAIL'} -> {cfg.out}")
    return status


if __name__ == "__main__":
    sys.exit(main())
