import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sharpconst.capacity import (CapacityQuery, ball_capacity, capacitary_lhs_radial,
                                 capacitary_rhs_radial, isocap_check, mu_b_ball,
                                 radial_capacity_discrete)
from sharpconst.constants import HSParams
from sharpconst.errors import DomainError
from sharpconst.fields import gaussian_bump, talenti_profile
from sharpconst.quad import RadialFunction


def tent(n):
    return RadialFunction(lambda r: np.maximum(0.0, 1.0 - np.asarray(r)), n,
                          lambda r: np.where(np.asarray(r) < 1.0, -1.0, 0.0), 1.0)


def test_ball_capacity_examples():
    assert ball_capacity(p=2, a=0, n=3) == pytest.approx(4 * math.pi, rel=1e-14)
    assert ball_capacity(p=2, a=0, n=3, radius=2.0) == pytest.approx(8 * math.pi, rel=1e-14)
    assert ball_capacity(p=1, a=0, n=2) == pytest.approx(2 * math.pi, rel=1e-14)


@pytest.mark.parametrize("p,a,n", [(2, 0, 3), (1.5, 0.3, 3), (3, 0.5, 5), (2.5, 0, 4)])
def test_ball_capacity_discrete_oracle(p, a, n):
    # the outer radius truncates a tail decaying like outer^{-(n-p-a)/(p-1)}
    assert radial_capacity_discrete(p, a, n, outer=1e8) == pytest.approx(ball_capacity(p=p, a=a, n=n), rel=1e-4)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 8), st.floats(0.0, 0.95), st.floats(0.0, 0.95), st.floats(0.01, 100.0))
def test_ball_capacity_homogeneity(n, pf, af, radius):
    p = 1.0 + pf * (n - 1.0 - 1e-3)
    a = af * (n - p)
    one = ball_capacity(p=p, a=a, n=n)
    assert ball_capacity(p=p, a=a, n=n, radius=radius) == pytest.approx(one * radius ** (n - p - a), rel=1e-12)


@pytest.mark.parametrize("kw", [dict(p=0.5, a=0, n=3), dict(p=3, a=0, n=3), dict(p=2, a=1, n=3),
                                dict(p=2, a=0, n=3, radius=0.0), dict(p=1.5, a=0, n=1)])
def test_capacity_query_gate(kw):
    with pytest.raises(DomainError):
        CapacityQuery(**kw)


def test_mu_b_ball_examples():
    assert mu_b_ball(3, 0) == pytest.approx(4 * math.pi / 3, rel=1e-14)
    assert mu_b_ball(3, 2) == pytest.approx(4 * math.pi, rel=1e-14)
    assert mu_b_ball(2, 1) == pytest.approx(2 * math.pi, rel=1e-14)
    with pytest.raises(DomainError):
        mu_b_ball(3, 3)


def test_isocap_examples():
    res = isocap_check(HSParams(2, 0, 0, 3))
    assert res.lhs == pytest.approx((4 * math.pi / 3) ** (1 / 3), rel=1e-13)
    assert res.relative_gap < 1e-10
    assert isocap_check(HSParams(2, 0, 0, 3), 2.0).relative_gap < 1e-10
    res = isocap_check(HSParams(1, 0, 0, 2))
    assert res.lhs == pytest.approx(math.sqrt(math.pi), rel=1e-13)
    assert res.relative_gap < 1e-12


def _corners(n, p):
    a_vals = [0.0, 0.5 * (n - p), 0.99 * (n - p)]
    for a in a_vals:
        lo, hi = a * n / (n - p), a + p
        for b in (lo, 0.5 * (lo + hi), hi):
            yield HSParams(p, a, b, n)


@pytest.mark.parametrize("n,p", list(itertools.product([3, 4, 5], [1, 1.5, 2, 2.5])))
def test_isocap_grid(n, p):
    for h in _corners(n, p):
        for radius in (0.5, 1.0, 3.0):
            assert isocap_check(h, radius).relative_gap < 1e-10


def test_capacitary_lhs_tent():
    val = capacitary_lhs_radial(tent(3), HSParams(2, 0, 0, 3), 2.0)
    assert val == pytest.approx(math.sqrt(4 * math.pi / 3), rel=1e-9)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.1, 10.0))
def test_capacitary_lhs_homogeneous(c):
    h = HSParams(2, 0, 0, 3)
    assert capacitary_lhs_radial(tent(3).scaled(c), h, 3.0) == pytest.approx(
        c * capacitary_lhs_radial(tent(3), h, 3.0), rel=1e-8)


def test_capacitary_lhs_zero_field():
    zero = RadialFunction(lambda r: 0.0 * np.asarray(r), 3, lambda r: 0.0 * np.asarray(r), 1.0)
    assert capacitary_lhs_radial(zero, HSParams(2, 0, 0, 3), 2.0) == 0.0


@pytest.mark.parametrize("u_fn", [lambda: tent(3), lambda: gaussian_bump(dimension=3).as_radial(),
                                  lambda: talenti_profile(3, cutoff=4.0).as_radial()])
@pytest.mark.parametrize("h,q", [(HSParams(2, 0, 0, 3), 2.0), (HSParams(2, 0, 0, 3), 6.0),
                                 (HSParams(1.5, 0.2, 0.6, 3), 3.0), (HSParams(2, 0.3, 1.0, 3), 2.5)])
def test_capacitary_inequality_radial(u_fn, h, q):
    u = u_fn()
    assert capacitary_lhs_radial(u, h, q) <= capacitary_rhs_radial(u, h, q) * (1 + 1e-6)
