import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate as sp_integrate

from sharpconst.errors import DomainError, QuadratureError
from sharpconst.fields import gaussian_bump, talenti_profile
from sharpconst.quad import (Integrand, RadialFunction, cubature, gauss_legendre_tensor, integrate,
                             integrate_1d, layer_cake, level_radius, lorentz_quasinorm,
                             mu_b_measure, radial_gradient_energy, weighted_lq_norm)


def tent(n):
    """max(0, 1 - |x|) on R^n."""
    return RadialFunction(lambda r: np.maximum(0.0, 1.0 - np.asarray(r)), n,
                          lambda r: np.where(np.asarray(r) < 1.0, -1.0, 0.0), 1.0)


def test_gaussian_plane_cartesian():
    f = Integrand(lambda x: np.exp(-np.sum(x * x, axis=1)), [-9.0, -9.0], [9.0, 9.0])
    res = integrate(f, tol=1e-13)
    assert res.value == pytest.approx(math.pi, abs=1e-12)
    assert res.abs_error_estimate >= 0


def test_gaussian_radial_and_polar_agree():
    rad = integrate(Integrand(lambda r: np.exp(-r[:, 0] ** 2), [0.0], [math.inf], "radial", n=2), 1e-13)
    pol = integrate(Integrand(lambda x: np.exp(-np.sum(x * x, axis=1)), [0.0, 0.0], [9.0, 2 * math.pi],
                              "polar"), 1e-13)
    assert rad.value == pytest.approx(math.pi, abs=1e-12)
    assert abs(rad.value - pol.value) < 1e-10


def test_cylindrical_gaussian_in_three_dimensions():
    f = Integrand(lambda p: np.exp(-(p[:, 0] ** 2 + p[:, 1] ** 2)), [-9.0, 0.0], [9.0, 9.0], "cylindrical")
    assert integrate(f, 1e-12).value == pytest.approx(math.pi**1.5, rel=1e-11)


def test_sin_cubed():
    res = integrate_1d(lambda t: np.sin(t) ** 3, 0.0, math.pi, tol=1e-14)
    assert res.value == pytest.approx(4.0 / 3.0, abs=1e-12)


def test_sech_half_line():
    res = integrate_1d(lambda t: 2.0 * np.exp(-t) / (1.0 + np.exp(-2.0 * t)), 0.0, math.inf, tol=1e-13)
    assert res.value == pytest.approx(math.pi / 2, abs=1e-10)


def test_declared_singularity():
    f = Integrand(lambda x: x[:, 0] ** -0.5, [0.0], [1.0], known_singularities=[(0.0,)])
    assert integrate(f, 1e-11).value == pytest.approx(2.0, rel=1e-10)


def test_budget_error_carries_estimate():
    with pytest.raises(QuadratureError) as info:
        cubature(lambda x: np.abs(np.sin(1e4 * x[:, 0])), [0.0], [1.0], tol=1e-14, max_evals=3000)
    assert info.value.best_estimate is not None


def test_unknown_coordinate_system():
    with pytest.raises(DomainError):
        integrate(Integrand(lambda x: x[:, 0], [0.0], [1.0], "spherical-ish"))


@settings(max_examples=30, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(0.2, 3.0))
def test_linearity(a, b, w):
    f = lambda x: np.exp(-x[:, 0] ** 2 / w)  # noqa: E731
    g = lambda x: np.cos(x[:, 0]) ** 2  # noqa: E731
    rf = cubature(f, [-2.0], [3.0], 1e-12)
    rg = cubature(g, [-2.0], [3.0], 1e-12)
    rs = cubature(lambda x: a * f(x) + b * g(x), [-2.0], [3.0], 1e-12)
    bound = abs(a) * rf.abs_error_estimate + abs(b) * rg.abs_error_estimate + rs.abs_error_estimate
    assert abs(rs.value - (a * rf.value + b * rg.value)) <= bound + 1e-13


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.integers(0, 5), st.integers(0, 5))
def test_tensor_gauss_exact_for_polynomials(order_half, i, j):
    order = 2 * order_half + 4
    val = gauss_legendre_tensor(lambda p: p[:, 0] ** i * p[:, 1] ** j, [0.0, 0.0], [1.0, 2.0], order)
    assert val == pytest.approx(2.0 ** (j + 1) / ((i + 1) * (j + 1)), rel=1e-13)


# ---------------------------------------------------------------------------
# level sets and Lorentz quasi-norms


def test_mu_b_examples():
    u = tent(3)
    assert mu_b_measure(u, 0.5, 0.0) == pytest.approx(math.pi / 6, rel=1e-11)
    assert mu_b_measure(u, 1.5, 0.0) == 0.0
    assert mu_b_measure(u, 0.5, 2.0) == pytest.approx(2 * math.pi, rel=1e-11)


def test_mu_b_requires_radial_field():
    with pytest.raises(DomainError):
        mu_b_measure(object(), 0.5, 0.0)
    with pytest.raises(DomainError):
        mu_b_measure(tent(3), 0.5, 3.0)


def test_level_radius_unbounded_profile():
    u = talenti_profile(3).as_radial()
    t = np.array([0.5, 0.1, 1e-3])
    assert np.allclose(level_radius(u, t), np.sqrt(t**-2 - 1.0), rtol=1e-11)


def test_lorentz_tent_value():
    assert lorentz_quasinorm(tent(3), 2, 2, 0) == pytest.approx(math.sqrt(2 * math.pi / 15), rel=1e-9)


@pytest.mark.parametrize("field_fn,q,b", [
    (lambda: tent(3), 2.0, 0.0),
    (lambda: tent(3), 3.0, 1.0),
    (lambda: gaussian_bump(dimension=3).as_radial(), 2.5, 0.5),
    (lambda: talenti_profile(3, cutoff=5.0).as_radial(), 6.0, 0.0),
    (lambda: gaussian_bump(width=0.3, dimension=4).as_radial(), 4.0, 2.0),
])
def test_lorentz_at_tau_equal_q_is_lq_norm(field_fn, q, b):
    u = field_fn()
    assert lorentz_quasinorm(u, q, q, b, tol=1e-11) == pytest.approx(weighted_lq_norm(u, q, b, tol=1e-12),
                                                                     rel=1e-8)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.1, 10.0), st.floats(1.0, 4.0), st.floats(1.0, 4.0))
def test_lorentz_homogeneity(c, tau, q):
    u = tent(3)
    base = lorentz_quasinorm(u, tau, q, 0.0)
    assert lorentz_quasinorm(u.scaled(c), tau, q, 0.0) == pytest.approx(c * base, rel=1e-8)


def test_lorentz_scipy_oracle():
    u = gaussian_bump(dimension=3).as_radial()
    tau, q = 1.5, 3.0

    def mu(t):
        r = math.sqrt(-2.0 * math.log(t))
        return 4 * math.pi * r**3 / 3

    ref, _ = sp_integrate.quad(lambda t: mu(t) ** (q / tau) * q * t ** (q - 1), 0.0, 1.0, epsabs=0, epsrel=1e-12)
    assert lorentz_quasinorm(u, tau, q, 0.0, tol=1e-11) == pytest.approx(ref ** (1 / q), rel=1e-8)


def test_layer_cake_of_zero_is_zero():
    zero = RadialFunction(lambda r: 0.0 * np.asarray(r), 3, None, 1.0)
    assert layer_cake(zero, lambda t: t, 2.0).value == 0.0


def test_radial_gradient_energy_tent():
    # int |grad u|^2 over the unit ball of R^3
    assert radial_gradient_energy(tent(3), 2.0, 0.0) == pytest.approx(4 * math.pi / 3, rel=1e-10)
