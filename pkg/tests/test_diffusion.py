import math

import numpy as np
import pytest

from bochner.branch import BranchKind, apply_exponent, levy_of, mobius
from bochner.diffusion import (
    entrance_sample,
    euler_chain,
    exact_chain,
    exact_step,
    extinction_weight,
    zero_probability,
)
from bochner.verify import check_extinction, ks2, mc_estimate

from conftest import LN2, within

H, B = BranchKind.HOMOGRAPHIC, BranchKind.BESQ
N = 1_000_000


class TestExactStep:
    def test_absorbing_origin(self, rng):
        assert np.all(exact_step(H, np.zeros(1000), 0.7, rng) == 0)

    def test_mean_homographic(self, rng):
        assert within(mc_estimate(exact_step(H, np.ones(N), LN2, rng)), 2.0)

    def test_mean_besq(self, rng):
        assert within(mc_estimate(exact_step(B, np.ones(N), 0.5, rng)), 1.0)

    def test_bad_step(self, rng):
        with pytest.raises(ValueError):
            exact_step(H, 1.0, 0.0, rng)

    @pytest.mark.parametrize("branch", list(BranchKind))
    def test_chapman_kolmogorov(self, rng, branch):
        n = 100_000
        two = exact_step(branch, exact_step(branch, np.full(n, 1.3), 0.4, rng.child(0)), 0.7, rng.child(2))
        one = exact_step(branch, np.full(n, 1.3), 1.1, rng.child(1))
        assert ks2(two, one)[1] > 0.01

    @pytest.mark.parametrize("branch", list(BranchKind))
    @pytest.mark.parametrize("a", [0.2, 1.0])
    def test_laplace(self, rng, branch, a):
        x = 1.5
        z = exact_step(branch, np.full(N, x), a, rng)
        for lam in (0.5, 2.0):
            assert within(mc_estimate(np.exp(-lam * z)), math.exp(-x * apply_exponent(mobius(branch, a), lam)))
        assert within(mc_estimate(z == 0), zero_probability(branch, x, a))


class TestEuler:
    def test_zero_stays(self, rng):
        assert np.all(euler_chain(H, np.zeros(100), 1.0, 50, rng) == 0)

    def test_weak_convergence(self, rng):
        n = 100_000
        eu = euler_chain(H, np.ones(n), LN2, 2048, rng.child(0))
        ex = exact_step(H, np.ones(n), LN2, rng.child(1))
        assert ks2(eu, ex)[1] > 0.005

    def test_besq_martingale(self, rng):
        z = euler_chain(B, np.ones(100_000), 0.5, 256, rng)
        assert within(mc_estimate(z), 1.0)


class TestEntrance:
    def test_homographic(self, rng):
        d = entrance_sample(H, 0.1, rng, size=N)
        assert d.mass == pytest.approx(math.exp(0.1) / math.expm1(0.1)) and d.mass == pytest.approx(10.5083, abs=1e-4)
        assert within(mc_estimate(d.state), math.expm1(0.1))
        assert math.expm1(0.1) == pytest.approx(0.10517, abs=1e-5)

    def test_besq(self, rng):
        d = entrance_sample(B, 0.5, rng, size=N)
        assert d.mass == 2.0
        assert within(mc_estimate(d.state), 0.5)

    def test_zero_rejected(self, rng):
        with pytest.raises(ValueError):
            entrance_sample(H, 0.0, rng)

    @pytest.mark.parametrize("branch", list(BranchKind))
    @pytest.mark.parametrize("eps", [0.1, 0.5, 1.0])
    @pytest.mark.parametrize("b", [0.1, 0.5, 1.0])
    def test_entrance_semigroup(self, rng, branch, eps, b):
        # mass(eps) * E[1 - exp(-lam Z_{eps+b})] is the exponent of nu_{eps+b}; the mass
        # sent to 0 contributes nothing, as Levy measures do not charge the origin
        lam = 1.3
        d = entrance_sample(branch, eps, rng, size=400_000)
        z = exact_step(branch, d.state, b, rng)
        est = mc_estimate(d.mass * -np.expm1(-lam * z))
        assert within(est, apply_exponent(mobius(branch, eps + b), lam))
        # the conditional law of the surviving mass is the entrance law at eps+b
        pos = z[z > 0]
        later = levy_of(branch, eps + b)
        assert within(mc_estimate(d.mass * (z > 0)), later.rate)
        assert within(mc_estimate(np.exp(-lam * pos)), 1 / (1 + lam * later.jump_mean))


class TestExtinction:
    def test_values(self):
        assert extinction_weight(H, 0.0) == 1.0
        assert extinction_weight(H, 1.0) == pytest.approx(math.exp(-1))
        assert np.all(extinction_weight(B, np.array([0.0, 3.0, 50.0])) == 1.0)

    def test_homographic_frequency(self):
        rep = check_extinction(H, 1.0, 8.0, N, seed=2)
        assert rep.passed
        assert rep.analytic[0] == pytest.approx(math.exp(-levy_of(H, 8.0).rate))
        assert levy_of(H, 8.0).rate == pytest.approx(1.000335, abs=1e-6)

    def test_rate_limit(self):
        # P(Z_A = 0) approaches the extinction weight as A grows
        assert zero_probability(H, 1.0, 30.0) == pytest.approx(extinction_weight(H, 1.0), rel=1e-12)

    def test_besq_dies_out(self, rng):
        z = exact_step(B, np.ones(100_000), 200.0, rng)
        est = mc_estimate(z == 0)
        assert within(est, math.exp(-1 / 200.0))


def test_exact_chain_shape(rng):
    out = exact_chain(H, np.ones(7), [0.1, 0.3, 0.3, 0.9], rng)
    assert out.shape == (7, 4)
    assert np.array_equal(out[:, 1], out[:, 2])
