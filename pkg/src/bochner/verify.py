"""Monte Carlo checks of the analytic formulas.

Every check draws its samples in fixed-size chunks, chunk ``i`` using the
sub-stream ``base.child(i)``; chunks are concatenated in order, so a report
depends only on ``(seed, parameters, chunk_size)`` and never on how many
workers produced the chunks.
"""

from __future__ import annotations

import functools
import math
import time
from concurrent.futures import Executor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from .branch import BranchKind, apply_exponent, levy_of, mobius
from .diffusion import entrance_sample, exact_chain, exact_step, extinction_weight, zero_probability
from .rng import RngStream
from .sheet import HalfLineMeasure, lattice_weights, pair_against, propagate_levels, sample_sheet
from .spectral import BoundaryVariant, riccati_solve
from .subordinator import increment

DEFAULT_CHUNK = 100_000


@dataclass(frozen=True)
class Estimate:
    mean: float
    std_error: float
    n: int

    def z(self, target: float) -> float:
        return _z(self.mean - target, self.std_error, target)


# relative slack for comparing deterministic (zero-variance) estimates
_EXACT_RTOL = 1e-12


def _z(diff: float, se: float, scale: float = 1.0) -> float:
    if se == 0:
        return 0.0 if abs(diff) <= _EXACT_RTOL * max(1.0, abs(scale)) else math.copysign(math.inf, diff)
    return diff / se


def mc_estimate(samples) -> Estimate:
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < 2:
        raise ValueError("need at least two samples")
    if np.all(x == x[0]):
        return Estimate(float(x[0]), 0.0, int(x.size))
    return Estimate(float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size)), int(x.size))


def z_between(a: Estimate, b: Estimate) -> float:
    """z-score of the difference of two independent estimates."""
    return _z(a.mean - b.mean, math.hypot(a.std_error, b.std_error), max(abs(a.mean), abs(b.mean)))


def ks2(xs, ys) -> tuple[float, float]:
    """Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value."""
    xs, ys = np.asarray(xs, dtype=float).ravel(), np.asarray(ys, dtype=float).ravel()
    if xs.size == 0 or ys.size == 0:
        raise ValueError("KS test needs two nonempty samples")
    res = stats.ks_2samp(xs, ys, method="asymp")
    return float(res.statistic), float(res.pvalue)


@dataclass(frozen=True)
class Gate:
    """A named scalar condition ``value <op> threshold``."""

    label: str
    value: float
    op: str
    threshold: float

    @property
    def ok(self) -> bool:
        if self.op == "<=":
            return bool(self.value <= self.threshold)
        if self.op == ">=":
            return bool(self.value >= self.threshold)
        if self.op == ">":
            return bool(self.value > self.threshold)
        raise ValueError(f"unknown gate operator {self.op!r}")


@dataclass
class CheckReport:
    name: str
    analytic: list = field(default_factory=list)
    estimates: list = field(default_factory=list)
    z: list = field(default_factory=list)
    labels: list = field(default_factory=list)
    gates: list = field(default_factory=list)
    z_gate: float = 3.0
    seed: int | None = None
    runtime: float = 0.0
    params: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(all(abs(z) <= self.z_gate for z in self.z) and all(g.ok for g in self.gates))

    def to_dict(self, include_runtime: bool = True) -> dict:
        d = {
            "name": self.name,
            "passed": self.passed,
            "seed": self.seed,
            "params": self.params,
            "labels": list(self.labels),
            "analytic": [float(a) for a in self.analytic],
            "estimates": [asdict(e) for e in self.estimates],
            "z": [float(z) for z in self.z],
            "z_gate": self.z_gate,
            "gates": [dict(asdict(g), value=float(g.value), ok=g.ok) for g in self.gates],
        }
        if include_runtime:
            d["runtime"] = self.runtime
        return d

    def summary(self) -> str:
        zmax = max((abs(z) for z in self.z), default=0.0)
        status = "PASS" if self.passed else "FAIL"
        extra = ", ".join(f"{g.label}={g.value:.4g}" for g in self.gates)
        return f"[{status}] {self.name}: max|z|={zmax:.2f}" + (f", {extra}" if extra else "")


def run_chunks(fn, n: int, base: RngStream, chunk_size: int = DEFAULT_CHUNK, executor: Executor | None = None):
    """Evaluate ``fn(stream, size)`` over the fixed chunk layout and concatenate.

    ``fn`` returns an array or a tuple of arrays; the result has the same
    structure with the chunk outputs joined along axis 0.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    sizes = [chunk_size] * (n // chunk_size)
    if n % chunk_size:
        sizes.append(n % chunk_size)
    streams = [base.child(i) for i in range(len(sizes))]
    if executor is None:
        outs = [fn(s, k) for s, k in zip(streams, sizes)]
    else:
        outs = list(executor.map(fn, streams, sizes))
    if isinstance(outs[0], tuple):
        return tuple(np.concatenate(parts) for parts in zip(*outs))
    return np.concatenate(outs)


def _base(seed: int, name: str) -> RngStream:
    return RngStream(seed).child(name)


def _timed(report_fn):
    @functools.wraps(report_fn)
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        rep = report_fn(*args, **kwargs)
        rep.runtime = time.perf_counter() - t0
        return rep

    return wrapper


def _atom_levels(mu: HalfLineMeasure, extra=()) -> list[float]:
    return sorted({0.0, *(x for x, _ in mu.atoms), *map(float, extra)})


def _require_atomic(mu: HalfLineMeasure) -> None:
    if not mu.is_atomic:
        raise ValueError("this check needs an atomic measure (lattice pairing is exact only for atoms)")


# --- subordinator and diffusion laws -------------------------------------------------


def _subordinator_chunk(rng, size, branch, a, t):
    return increment(levy_of(branch, a), t, rng, size=size)


@_timed
def check_subordinator(branch, a: float, t: float, lambdas, n: int, seed: int = 0,
                       chunk_size: int = DEFAULT_CHUNK, executor=None) -> CheckReport:
    """Laplace transform and zero-atom frequency of the branch subordinator at time t."""
    branch = BranchKind.parse(branch)
    name = f"subordinator[{branch.value},a={a:g},t={t:g}]"
    fn = functools.partial(_subordinator_chunk, branch=branch, a=a, t=t)
    y = run_chunks(fn, n, _base(seed, name), chunk_size, executor)
    m = mobius(branch, a)
    rep = CheckReport(name, seed=seed, params={"branch": branch.value, "a": a, "t": t, "n": n})
    for lam in lambdas:
        est = mc_estimate(np.exp(-lam * y))
        target = math.exp(-t * apply_exponent(m, lam))
        rep.labels.append(f"laplace(lam={lam:g})")
        rep.analytic.append(target)
        rep.estimates.append(est)
        rep.z.append(est.z(target))
    est = mc_estimate(y == 0)
    target = math.exp(-levy_of(branch, a).rate * t)
    rep.labels.append("P(Y=0)")
    rep.analytic.append(target)
    rep.estimates.append(est)
    rep.z.append(est.z(target))
    return rep


def _extinction_chunk(rng, size, branch, z0, horizon):
    return exact_step(branch, np.full(size, z0), horizon, rng)


@_timed
def check_extinction(branch, z0: float = 1.0, horizon: float = 8.0, n: int = 1_000_000, seed: int = 0,
                     chunk_size: int = DEFAULT_CHUNK, executor=None) -> CheckReport:
    """Empirical P(Z_A = 0 | Z_0 = z0) against exp(-z0 * rate(A))."""
    branch = BranchKind.parse(branch)
    name = f"extinction[{branch.value},z0={z0:g},A={horizon:g}]"
    fn = functools.partial(_extinction_chunk, branch=branch, z0=z0, horizon=horizon)
    z = run_chunks(fn, n, _base(seed, name), chunk_size, executor)
    est = mc_estimate(z == 0)
    target = zero_probability(branch, z0, horizon)
    return CheckReport(name, [target], [est], [est.z(target)], ["P(Z_A=0)"], seed=seed,
                       params={"branch": branch.value, "z0": z0, "horizon": horizon, "n": n})


# --- sheet consistency ---------------------------------------------------------------


def _two_level_chunk(rng, size, branch, a1, a2, t):
    s = sample_sheet(branch, [0.0, a1, a2], [t], rng, size=size)
    return s.values[:, 2, 0]


def _direct_chunk(rng, size, branch, a, t):
    return exact_step(branch, np.full(size, t), a, rng)


def _sheet_chunk(rng, size, branch, levels, t_grid):
    return sample_sheet(branch, levels, t_grid, rng, size=size).values


@_timed
def check_sheet_consistency(branch, n: int = 100_000, seed: int = 0, a_levels=(0.0, 0.3, 0.8),
                            t_grid=(0.5, 1.5), p_gate: float = 0.01,
                            chunk_size: int = DEFAULT_CHUNK, executor=None) -> CheckReport:
    """KS checks: two levels vs one step, columns vs diffusion chains, stationary t-increments."""
    branch = BranchKind.parse(branch)
    name = f"sheet-consistency[{branch.value}]"
    base = _base(seed, name)
    rep = CheckReport(name, seed=seed, params={"branch": branch.value, "n": n, "a_levels": list(a_levels),
                                               "t_grid": list(t_grid)})
    a1 = math.log(2.0)
    two = run_chunks(functools.partial(_two_level_chunk, branch=branch, a1=a1, a2=2 * a1, t=1.0),
                     n, base.child("two-level"), chunk_size, executor)
    one = run_chunks(functools.partial(_direct_chunk, branch=branch, a=2 * a1, t=1.0),
                     n, base.child("one-step"), chunk_size, executor)
    rep.gates.append(Gate("p(two-level vs one-step)", ks2(two, one)[1], ">", p_gate))

    levels = np.asarray(a_levels, dtype=float)
    sheets = run_chunks(functools.partial(_sheet_chunk, branch=branch, levels=levels, t_grid=np.asarray(t_grid)),
                        n, base.child("sheet"), chunk_size, executor)
    for j, t0 in enumerate(t_grid):
        chain = run_chunks(functools.partial(_chain_chunk_exact, branch=branch, levels=levels[1:], t0=t0),
                           n, base.child(f"chain{j}"), chunk_size, executor)
        for i, a in enumerate(levels[1:], start=1):
            rep.gates.append(Gate(f"p(column t={t0:g}, a={a:g} vs chain)", ks2(sheets[:, i, j], chain[:, i - 1])[1],
                                  ">", p_gate))

    # increments between consecutive grid times vs a fresh sheet at the span
    s_span = float(t_grid[-1] - t_grid[0])
    fresh = run_chunks(functools.partial(_sheet_chunk, branch=branch, levels=levels, t_grid=np.array([s_span])),
                       n, base.child("fresh"), chunk_size, executor)
    for i, a in enumerate(levels[1:], start=1):
        incr = sheets[:, i, -1] - sheets[:, i, 0]
        rep.gates.append(Gate(f"p(t-increment a={a:g} vs fresh)", ks2(incr, fresh[:, i, 0])[1], ">", p_gate))
    return rep


def _chain_chunk_exact(rng, size, branch, levels, t0):
    return exact_chain(branch, np.full(size, t0), levels, rng)


# --- Laplace functional ---------------------------------------------------------------


def _laplace_chunk(rng, size, branch, levels, t, weights, horizon_index, lambdas, extinction):
    vals = propagate_levels(branch, levels, np.full((size, 1), t), rng)[:, :, 0]
    pair = vals @ weights
    out = np.exp(-np.outer(pair, lambdas))
    if extinction:
        out *= extinction_weight(branch, vals[:, horizon_index])[:, None]
    return out


@_timed
def check_laplace(branch, mu: HalfLineMeasure, lam, t: float, n: int, variant=BoundaryVariant.PLAIN,
                  seed: int = 0, chunk_size: int = DEFAULT_CHUNK, executor=None) -> CheckReport:
    """MC of E exp(-lam <Y_t, mu>) (PLAIN) or its extinction-weighted version vs exp(-t Phi)."""
    branch = BranchKind.parse(branch)
    variant = BoundaryVariant.parse(variant)
    _require_atomic(mu)
    lambdas = np.atleast_1d(np.asarray(lam, dtype=float))
    levels = _atom_levels(mu)
    horizon = mu.support_max
    weights = lattice_weights(mu, levels)
    name = f"laplace[{branch.value},{variant.value},mu={mu.atoms},t={t:g}]"
    fn = functools.partial(_laplace_chunk, branch=branch, levels=np.asarray(levels), t=t, weights=weights,
                           horizon_index=levels.index(horizon), lambdas=lambdas,
                           extinction=variant is BoundaryVariant.EXTINCTION)
    samples = run_chunks(fn, n, _base(seed, name), chunk_size, executor)
    rep = CheckReport(name, seed=seed, params={"branch": branch.value, "variant": variant.value,
                                               "mu": mu.to_dict(), "t": t, "n": n, "lambdas": lambdas.tolist()})
    for k, lv in enumerate(lambdas):
        phi = riccati_solve(branch, mu, lv, variant).phi
        est = mc_estimate(samples[:, k])
        target = math.exp(-t * phi)
        rep.labels.append(f"lam={lv:g}")
        rep.analytic.append(target)
        rep.estimates.append(est)
        rep.z.append(est.z(target))
    return rep


# --- path-space Levy measure ---------------------------------------------------------


def _eq3_chunk(rng, size, branch, epsilon, rel_levels, weights):
    draw = entrance_sample(branch, epsilon, rng, size=size)
    path = exact_chain(branch, draw.state, rel_levels, rng)
    return draw.mass * np.expm1(-(path @ weights))


def _direct_pair_chunk(rng, size, branch, levels, t, weights):
    vals = propagate_levels(branch, levels, np.full((size, 1), t), rng)[:, :, 0]
    return np.exp(-(vals @ weights))


@_timed
def check_eq3(branch, mu: HalfLineMeasure, epsilons, t: float, n: int, seed: int = 0,
              chunk_size: int = DEFAULT_CHUNK, executor=None) -> CheckReport:
    """Levy measure of the path-valued process t -> Y_{.,t}.

    For each entrance level eps, estimates I(eps) = mass(nu_eps) E[exp(-<Z, mu>) - 1]
    for Z started from the entrance law, and confronts exp(t I(eps)), a
    direct sheet estimate of E exp(-<Y_t, mu>) and exp(-t Phi(1)).
    """
    branch = BranchKind.parse(branch)
    _require_atomic(mu)
    epsilons = [float(e) for e in epsilons]
    if any(not e > 0 for e in epsilons):
        raise ValueError("entrance levels must be > 0")
    if any(e >= mu.support_min for e in epsilons):
        raise ValueError("entrance levels must lie strictly below the support of mu")
    name = f"eq3[{branch.value},mu={mu.atoms},t={t:g}]"
    base = _base(seed, name)
    phi = riccati_solve(branch, mu, 1.0).phi
    rep = CheckReport(name, seed=seed, params={"branch": branch.value, "mu": mu.to_dict(), "t": t, "n": n,
                                               "epsilons": epsilons, "phi_plain(1)": phi})
    atom_locs = [x for x, _ in mu.atoms]
    weights = np.array([w for _, w in mu.atoms])

    levels = _atom_levels(mu)
    direct = mc_estimate(run_chunks(
        functools.partial(_direct_pair_chunk, branch=branch, levels=np.asarray(levels), t=t,
                          weights=lattice_weights(mu, levels)),
        n, base.child("direct"), chunk_size, executor))
    target_direct = math.exp(-t * phi)

    ints = []
    for k, eps in enumerate(epsilons):
        if mu.is_zero:
            est = Estimate(0.0, 0.0, n)
        else:
            fn = functools.partial(_eq3_chunk, branch=branch, epsilon=eps,
                                   rel_levels=np.array([x - eps for x in atom_locs]), weights=weights)
            est = mc_estimate(run_chunks(fn, n, base.child(f"eps{k}"), chunk_size, executor))
        ints.append(est)
        rep.labels.append(f"I(eps={eps:g}) vs -Phi")
        rep.analytic.append(-phi)
        rep.estimates.append(est)
        rep.z.append(est.z(-phi))
    for i in range(len(ints)):
        for j in range(i + 1, len(ints)):
            rep.labels.append(f"I(eps={epsilons[i]:g}) vs I(eps={epsilons[j]:g})")
            rep.analytic.append(0.0)
            rep.estimates.append(Estimate(ints[i].mean - ints[j].mean,
                                          math.hypot(ints[i].std_error, ints[j].std_error), n))
            rep.z.append(z_between(ints[i], ints[j]))
    rep.labels.append("direct sheet vs exp(-t Phi)")
    rep.analytic.append(target_direct)
    rep.estimates.append(direct)
    rep.z.append(direct.z(target_direct))
    for eps, est in zip(epsilons, ints):
        # delta method for exp(t I)
        lifted = Estimate(math.exp(t * est.mean), math.exp(t * est.mean) * t * est.std_error, est.n)
        rep.labels.append(f"exp(t I(eps={eps:g})) vs direct sheet")
        rep.analytic.append(target_direct)
        rep.estimates.append(lifted)
        rep.z.append(z_between(lifted, direct))
    return rep


# --- two-parameter martingale --------------------------------------------------------


def _martingale_chunk(rng, size, branch, levels, t):
    return propagate_levels(branch, levels, np.full((size, 1), t), rng)[:, :, 0]


@_timed
def check_martingale(branch, mu: HalfLineMeasure, lam: float, a_checkpoints, t: float, n: int,
                     compensator: str = "xi_at_zero", seed: int = 0, require_separation: bool = False,
                     separation_gate: float = 6.0, chunk_size: int = DEFAULT_CHUNK, executor=None) -> CheckReport:
    """Means of M_a = exp(-xi(a) Y_{a,t} + C t - lam <Y_t, mu 1_[0,a]>).

    ``compensator="xi_at_zero"`` uses C = Phi (the derived martingale, mean 1);
    ``"xi_at_a"`` uses C = xi(a), whose mean is predicted to be
    exp(t (xi(a) - Phi)). The separation between the two predictions at the
    last checkpoint, in units of its standard error, is always recorded and
    gated when ``require_separation`` is set.
    """
    branch = BranchKind.parse(branch)
    _require_atomic(mu)
    if compensator not in ("xi_at_zero", "xi_at_a"):
        raise ValueError(f"unknown compensator {compensator!r}")
    checkpoints = [float(a) for a in a_checkpoints]
    if any(a < 0 for a in checkpoints):
        raise ValueError("checkpoints must be >= 0")
    levels = _atom_levels(mu, checkpoints)
    # a fixed stream name, so both compensators see the same sheets
    name = f"martingale[{branch.value},mu={mu.atoms},lam={lam:g},t={t:g},levels={levels}]"
    vals = run_chunks(functools.partial(_martingale_chunk, branch=branch, levels=np.asarray(levels), t=t),
                      n, _base(seed, name), chunk_size, executor)
    sol = riccati_solve(branch, mu, lam)
    phi = sol.phi
    rep = CheckReport(f"{name}:{compensator}", seed=seed,
                      params={"branch": branch.value, "mu": mu.to_dict(), "lam": lam, "t": t, "n": n,
                              "compensator": compensator, "checkpoints": checkpoints, "phi": phi})
    sep = None
    for a in checkpoints:
        xi_a = sol.xi(a)
        w = lattice_weights(mu.restricted(0.0, a), levels)
        ya = vals[:, levels.index(a)]
        c = phi if compensator == "xi_at_zero" else xi_a
        m = np.exp(-xi_a * ya + c * t - lam * (vals @ w))
        est = mc_estimate(m)
        pred_literal = math.exp(t * (xi_a - phi))
        target = 1.0 if compensator == "xi_at_zero" else pred_literal
        rep.labels.append(f"E M(a={a:g})")
        rep.analytic.append(target)
        rep.estimates.append(est)
        rep.z.append(est.z(target))
        sep = _z(abs(pred_literal - 1.0), est.std_error)
    if sep is not None:
        rep.params["separation_last"] = sep
        if require_separation:
            rep.gates.append(Gate("separation(last checkpoint)", sep, ">=", separation_gate))
    return rep


# --- Ray-Knight -----------------------------------------------------------------------


def _walk_lattice(t: float, a_points, step: float) -> tuple[float, list[int], int]:
    """Space step ``dx`` with dt = dx^2/2 <= step putting every level (and 2t) on the lattice."""
    a_min = min(a_points)
    k0 = math.ceil(a_min / math.sqrt(2 * step) - 1e-12)
    for k in range(k0, k0 + 5000):
        dx = a_min / k
        targets = [a / dx for a in a_points] + [2 * t / dx]
        if all(abs(v - round(v)) <= 1e-9 * max(1.0, v) for v in targets):
            break
    else:
        dx = a_min / k0
    return dx, [int(round(a / dx)) for a in a_points], int(math.floor(2 * t / dx + 1e-9))


def rayknight_localtimes(t: float, a_points, step: float, n: int, rng: RngStream) -> dict:
    """Local times at levels 0 and ``a_points`` of a random walk stopped at inverse local time t.

    The walk has space step dx and time step dx^2/2 (so it approximates a
    Brownian motion with generator d^2/dx^2), and local time at a site is
    its number of visits times dx/2. The walk is stopped on the visit to 0
    that pushes the local time at 0 beyond t, i.e. after m = floor(2t/dx)
    completed excursions. Visit counts are sampled exactly through the
    upcrossing counts U_j of the edges (j, j+1): U_0 ~ Binomial(m, 1/2) and,
    given U_j, U_{j+1} is a sum of U_j independent Geometric(1/2) counts on
    {0, 1, ...}; level k >= 1 is visited U_{k-1} + U_k times.
    """
    if not 0 < step <= 1e-3:
        raise ValueError("step must be in (0, 1e-3]")
    a_points = sorted(float(a) for a in a_points)
    if not a_points or a_points[0] <= 0:
        raise ValueError("a_points must be positive levels")
    if not t > 0:
        raise ValueError("t must be > 0")
    dx, ks, m = _walk_lattice(t, a_points, step)
    k_max = max(ks)
    ups = [rng.gen.binomial(m, 0.5, size=n)]
    for _ in range(k_max):
        # sum of U iid Geometric(1/2) on {0,1,...} = NegBin(U, 1/2) = Poisson(Gamma(U, 1))
        ups.append(rng.gen.poisson(rng.gen.standard_gamma(ups[-1].astype(float))))
    half = dx / 2
    out = {0.0: np.full(n, (m + 1) * half)}
    for a, k in zip(a_points, ks):
        out[a] = (ups[k - 1] + ups[k]) * half
    out["dx"] = dx
    out["excursions"] = m
    return out


def besq_sheet_chunk(rng, size, a, t):
    return exact_step(BranchKind.BESQ, np.full(size, t), a, rng)


@_timed
def check_rayknight(t: float = 1.0, a: float = 0.3, step: float = 1e-3, n: int = 10_000, seed: int = 0,
                    p_gate: float = 0.005, chunk_size: int = DEFAULT_CHUNK, executor=None) -> CheckReport:
    """Walk local time at level a vs the BESQ sheet value Y_{a,t}: KS and mean."""
    name = f"rayknight[t={t:g},a={a:g},step={step:g}]"
    base = _base(seed, name)
    lt = rayknight_localtimes(t, [a], step, n, base.child("walk"))
    sheet = run_chunks(functools.partial(besq_sheet_chunk, a=a, t=t), n, base.child("sheet"), chunk_size, executor)
    est = mc_estimate(lt[a])
    _, p = ks2(lt[a], sheet)
    return CheckReport(name, [t], [est], [est.z(t)], [f"E l^{a:g}"], gates=[Gate("p(KS walk vs BESQ sheet)", p, ">", p_gate)],
                       seed=seed, params={"t": t, "a": a, "step": step, "n": n, "dx": lt["dx"],
                                          "excursions": lt["excursions"]})


# --- deterministic checks -------------------------------------------------------------


@_timed
def check_semigroup(a_grid=None, lam_grid=None) -> CheckReport:
    """max |f_a(f_b(lam)) - f_{a+b}(lam)| over a dense grid, both branches."""
    a_grid = np.linspace(0.0, 3.0, 31) if a_grid is None else np.asarray(a_grid)
    lam_grid = np.concatenate([np.linspace(0, 10, 101), [50.0, 1e3]]) if lam_grid is None else np.asarray(lam_grid)
    rep = CheckReport("semigroup")
    for branch in BranchKind:
        err = 0.0
        for a in a_grid:
            ma = mobius(branch, a)
            for b in a_grid:
                mb = mobius(branch, b)
                nested = apply_exponent(ma, apply_exponent(mb, lam_grid))
                err = max(err, float(np.max(np.abs(nested - apply_exponent(mobius(branch, a + b), lam_grid)))))
        rep.gates.append(Gate(f"max error ({branch.value})", err, "<=", 1e-12))
    return rep


def ode_exponent(theta: float, mu: HalfLineMeasure, lam: float, variant=BoundaryVariant.PLAIN,
                 rtol: float = 1e-12) -> float:
    """Independent oracle for Phi: adaptive Runge-Kutta on g'' = g (theta^2/4 + lam * density)."""
    from scipy.integrate import solve_ivp

    variant = BoundaryVariant.parse(variant)
    atoms = dict(mu.atoms)
    x_max = mu.support_max
    cuts = sorted({0.0, x_max, *atoms, *(p for lo, hi, _ in mu.pieces for p in (lo, hi) if p <= x_max)})

    def density(x: float) -> float:
        return sum(d for lo, hi, d in mu.pieces if lo <= x < hi)

    y = np.array([1.0, theta / 2 - variant.boundary_xi(theta)])
    for k in range(len(cuts) - 1, 0, -1):
        lo, hi = cuts[k - 1], cuts[k]
        y[1] -= lam * atoms.get(hi, 0.0) * y[0]
        y = y / y[0]
        q = theta * theta / 4 + lam * density(0.5 * (lo + hi))
        sol = solve_ivp(lambda x, v: [v[1], q * v[0]], (hi, lo), y, method="DOP853", rtol=rtol, atol=1e-14)
        y = sol.y[:, -1]
    y[1] -= lam * atoms.get(0.0, 0.0) * y[0]
    return theta / 2 - y[1] / y[0]


@_timed
def check_spectral(a_grid=(0.25, math.log(2.0), 1.5), w_grid=(0.5, 1.0, 2.0), lam_grid=(0.5, 1.0, 2.0),
                   density_measures=None) -> CheckReport:
    """Closed forms for single atoms and the ODE oracle for densities."""
    rep = CheckReport("spectral")
    for branch in BranchKind:
        err = 0.0
        for a in a_grid:
            for w in w_grid:
                for lam in lam_grid:
                    phi = riccati_solve(branch, HalfLineMeasure.dirac(a, w), lam).phi
                    err = max(err, abs(phi - apply_exponent(mobius(branch, a), lam * w)))
        rep.gates.append(Gate(f"atomic closed form ({branch.value})", err, "<=", 1e-10))
    if density_measures is None:
        density_measures = [
            HalfLineMeasure(pieces=((0.0, 1.0, 1.0),)),
            HalfLineMeasure(atoms=((0.2, 0.5),), pieces=((0.1, 0.6, 2.0), (0.8, 1.7, 0.7))),
            HalfLineMeasure(atoms=((1.0, 1.5), (2.5, 0.3)), pieces=((0.3, 2.0, 0.4),)),
        ]
    for branch in BranchKind:
        rel = 0.0
        for mu in density_measures:
            for lam in lam_grid:
                for variant in BoundaryVariant:
                    phi = riccati_solve(branch, mu, lam, variant).phi
                    ref = ode_exponent(branch.theta, mu, lam, variant)
                    rel = max(rel, abs(phi - ref) / abs(ref))
        rep.gates.append(Gate(f"density vs ODE oracle, rel ({branch.value})", rel, "<=", 1e-6))
    return rep
