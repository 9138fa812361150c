import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bochner.branch import IDENTITY, BranchKind, JumpLaw, MobiusMap, apply_exponent, compose, levy_of, mobius

from conftest import LN2

H, B = BranchKind.HOMOGRAPHIC, BranchKind.BESQ
levels = st.floats(0.0, 5.0, allow_nan=False)
lams = st.floats(0.0, 1e3, allow_nan=False)
LAM_GRID = np.concatenate([np.linspace(0, 5, 51), [10.0, 100.0, 1e4]])


def test_theta():
    assert H.theta == 1.0 and B.theta == 0.0
    assert BranchKind.parse("BESQ") is B
    with pytest.raises(ValueError):
        BranchKind.parse("gamma")


class TestMobius:
    def test_homographic_ln2(self):
        m = mobius(H, LN2)
        assert (m.alpha, m.gamma, m.delta) == pytest.approx((2.0, 1.0, 1.0), abs=1e-15)

    def test_homographic_zero_is_identity(self):
        assert mobius(H, 0.0) == IDENTITY

    def test_besq(self):
        assert mobius(B, 0.5) == MobiusMap(1.0, 0.5, 1.0)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            mobius(H, -0.1)

    def test_invalid_map(self):
        with pytest.raises(ValueError):
            MobiusMap(1.0, -1.0, 1.0)


class TestApply:
    m = MobiusMap(2.0, 1.0, 1.0)

    def test_fixed_point(self):
        assert apply_exponent(self.m, 1.0) == 1.0

    def test_value(self):
        assert apply_exponent(self.m, 2.0) == pytest.approx(4 / 3, rel=1e-15)

    def test_supremum(self):
        assert apply_exponent(self.m, math.inf) == 2.0
        assert apply_exponent(self.m, 1e12) == pytest.approx(2.0)

    def test_negative_lambda(self):
        with pytest.raises(ValueError):
            apply_exponent(self.m, -1.0)


class TestCompose:
    def test_hand_product(self):
        m = compose(MobiusMap(2, 1, 1), MobiusMap(2, 1, 1))
        assert m == MobiusMap(4.0, 3.0, 1.0)
        assert m.alpha == pytest.approx(mobius(H, 2 * LN2).alpha)

    def test_identity(self):
        m = MobiusMap(3.0, 0.7, 1.0)
        assert compose(m, IDENTITY) == m and compose(IDENTITY, m) == m

    def test_besq_hand(self):
        assert compose(MobiusMap(1, 0.5, 1), MobiusMap(1, 0.25, 1)) == MobiusMap(1.0, 0.75, 1.0)


class TestLevy:
    def test_homographic_ln2(self):
        law = levy_of(H, LN2)
        assert law.rate == pytest.approx(2.0) and law.jump_mean == pytest.approx(1.0)

    def test_besq(self):
        assert levy_of(B, 0.5) == JumpLaw(2.0, 0.5)

    def test_large_a_limit(self):
        law = levy_of(H, 40.0)
        assert law.rate == pytest.approx(1.0, abs=1e-15)
        assert law.jump_mean > 1e17

    def test_zero_rejected(self):
        with pytest.raises(ValueError):
            levy_of(H, 0.0)

    def test_density_normalization(self):
        # Levy density of the homographic branch is e^a/(e^a-1)^2 exp(-y/(e^a-1))
        a = 0.8
        c = math.expm1(a)
        y = np.array([0.1, 1.0, 3.0])
        assert levy_of(H, a).density(y) == pytest.approx(math.exp(a) / c**2 * np.exp(-y / c), rel=1e-14)

    def test_density_integrates_to_exponent(self):
        from scipy.integrate import quad

        law = levy_of(H, 0.6)
        lam = 1.7
        val, _ = quad(lambda y: (1 - math.exp(-lam * y)) * float(law.density(y)), 0, np.inf)
        assert val == pytest.approx(apply_exponent(mobius(H, 0.6), lam), rel=1e-9)


@pytest.mark.parametrize("branch", list(BranchKind))
@given(a=levels, b=levels)
def test_semigroup(branch, a, b):
    nested = apply_exponent(mobius(branch, a), apply_exponent(mobius(branch, b), LAM_GRID))
    direct = apply_exponent(mobius(branch, a + b), LAM_GRID)
    assert np.max(np.abs(nested - direct)) <= 1e-12 * max(1.0, np.max(np.abs(direct)))
    m = compose(mobius(branch, a), mobius(branch, b))
    assert np.max(np.abs(apply_exponent(m, LAM_GRID) - direct)) <= 1e-12 * max(1.0, np.max(direct))


@pytest.mark.parametrize("branch", list(BranchKind))
@given(a=st.floats(1e-3, 5.0))
def test_bernstein_shape(branch, a):
    lam = np.linspace(0.0, 20.0, 401)
    f = apply_exponent(mobius(branch, a), lam)
    assert f[0] == 0.0 and np.all(f >= 0)
    d1 = np.diff(f)
    assert np.all(d1 > 0)
    assert np.all(np.diff(d1) <= 1e-15)


@pytest.mark.parametrize("branch", list(BranchKind))
@given(a=st.floats(1e-3, 5.0))
def test_jumplaw_matches_exponent(branch, a):
    law = levy_of(branch, a)
    f = apply_exponent(mobius(branch, a), LAM_GRID)
    assert np.max(np.abs(law.exponent(LAM_GRID) - f)) <= 1e-12 * max(1.0, np.max(f))


@given(a=levels)
def test_homographic_fixed_point(a):
    assert apply_exponent(mobius(H, a), 1.0) == pytest.approx(1.0, abs=1e-12)
