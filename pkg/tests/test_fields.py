import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sharpconst.errors import ConstructionError
from sharpconst.fields import (FAMILIES, angular_mean, angular_mode, annular_cutoff, compact_bump,
                               gaussian_bump, halfspace_lift, log_scale_bump, make_family,
                               mollified_log, plane_wave_bump, product, smooth_cutoff_radial,
                               sphere_concentrated, talenti_profile, xn_power)

RNG = np.random.default_rng(12345)


def _points(f, count=100, lo=None, hi=None):
    n = f.dimension
    lo = (f.hole_radius * 1.05 if f.hole_radius else 0.02) if lo is None else lo
    hi = min(f.support_radius, 6.0) if hi is None else hi
    d = RNG.normal(size=(count, n))
    d /= np.linalg.norm(d, axis=1)[:, None]
    r = lo + (hi - lo) * RNG.random(count)
    x = d * r[:, None]
    if f.domain == "half-space":
        x[:, -1] = np.abs(x[:, -1]) + 1e-2
    return x


def _fd_check(f, x, h=1e-5):
    j = f.jet(x)
    n = f.dimension
    g_fd = np.zeros_like(j.grad)
    hess_fd = np.zeros_like(j.hess)
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        g_fd[:, i] = (f.value(x + e) - f.value(x - e)) / (2 * h)
        hess_fd[:, :, i] = (f.gradient(x + e) - f.gradient(x - e)) / (2 * h)
    gscale = np.max(np.abs(j.grad)) + 1e-300
    hscale = np.max(np.abs(j.hess)) + 1e-300
    assert np.max(np.abs(g_fd - j.grad)) <= 1e-6 * gscale
    assert np.max(np.abs(hess_fd - j.hess)) <= 1e-4 * hscale
    lap_fd = np.trace(hess_fd, axis1=1, axis2=2)
    assert np.max(np.abs(lap_fd - j.laplacian)) <= 1e-4 * hscale
    assert np.array_equal(j.hess, np.swapaxes(j.hess, 1, 2))


FIELD_CASES = {
    "gaussian": lambda: gaussian_bump(center=(0.3, -0.2), width=0.8),
    "gaussian-3d": lambda: gaussian_bump(dimension=3),
    "cutoff": lambda: smooth_cutoff_radial(1.0, 2.0),
    "compact-bump": lambda: compact_bump((0.0, 1.5), 1.0, 2),
    "annular": lambda: annular_cutoff(),
    "plane-wave-re": lambda: plane_wave_bump((3.0, 1.0)).re,
    "plane-wave-im": lambda: plane_wave_bump((3.0, 1.0)).im,
    "angular-mode-3": lambda: angular_mode(3).re,
    "mollified-log": lambda: mollified_log(0.1),
    "talenti-4": lambda: talenti_profile(4, cutoff=3.0),
    "lift-plus": lambda: halfspace_lift(compact_bump((0.0, 1.5), 1.0, 2), 0.5),
    "lift-minus": lambda: halfspace_lift(compact_bump((0.0, 1.5), 1.0, 2), -0.5),
    "sphere-concentrated": lambda: sphere_concentrated(0.4, 0.25),
    "log-scale-bump": lambda: log_scale_bump(0.5),
    "product": lambda: product(xn_power(1.0, 2), gaussian_bump()),
}


@pytest.mark.parametrize("name", sorted(FIELD_CASES))
def test_finite_differences(name):
    f = FIELD_CASES[name]()
    _fd_check(f, _points(f))


def test_log_scale_bump_far_scales():
    f = log_scale_bump(0.25)
    for r in (0.03, 0.3, 3.0, 30.0):
        x = RNG.normal(size=(20, 2))
        x *= r / np.linalg.norm(x, axis=1)[:, None]
        _fd_check(f, x, h=1e-5 * r)


def test_log_scale_bump_support():
    eps = 0.5
    f = log_scale_bump(eps)
    hole = math.exp(-1 / eps)
    assert f.hole_radius == pytest.approx(hole)
    assert f.support_radius == pytest.approx(1 / hole)
    assert np.all(f.value(np.array([[0.9 * hole, 0.0], [0.0, 1.1 / hole]])) == 0.0)
    # homogeneity of degree -1/2 where eta is nearly flat: r^{1/2} u(r) = eta(eps log r)
    assert f.value(np.array([[1.0, 0.0]]))[0] == pytest.approx(math.exp(-1.0))


def test_gaussian_laplacian_at_center():
    for w in (0.5, 1.0, 2.0):
        f = gaussian_bump(width=w)
        j = f.jet(np.zeros((1, 2)))
        assert j.value[0] == 1.0
        assert j.laplacian[0] == pytest.approx(-2 / w**2, rel=1e-14)


def test_mollified_log_equals_log():
    eps, radius = 1e-3, 1.0
    f = mollified_log(eps, radius)
    r = np.linspace(2 * eps, 0.5 * radius, 50)[1:-1]
    x = np.stack([r, np.zeros_like(r)], axis=1)
    # log sqrt(r^2 + eps^2) - log r lies in [0, eps^2 / (2 r^2)]
    diff = f.value(x) - np.log(r)
    assert np.all(diff >= -1e-15)
    assert np.all(diff <= eps**2 / (2 * r**2) + 1e-15)


def test_support_radius_bounds_values():
    for name in sorted(FIELD_CASES):
        f = FIELD_CASES[name]()
        if not math.isfinite(f.support_radius):
            continue
        d = RNG.normal(size=(200, f.dimension))
        d /= np.linalg.norm(d, axis=1)[:, None]
        x = d * f.support_radius * (1.0001 + RNG.random(200)[:, None])
        if f.domain == "half-space":
            x[:, -1] = np.abs(x[:, -1])
        assert np.all(np.abs(f.value(x)) < 1e-16), name


def test_half_space_fields_vanish_on_boundary():
    for f in (FIELD_CASES["lift-plus"](), FIELD_CASES["product"]()):
        x = np.stack([np.linspace(-5, 5, 101), np.zeros(101)], axis=1)
        assert np.all(f.value(x) == 0.0)


def test_punctured_plane_hole():
    f = annular_cutoff()
    x = _points(f, lo=0.0, hi=0.999 * f.hole_radius)
    assert np.all(f.value(x) == 0.0)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.1, 10.0), st.sampled_from(sorted(FIELD_CASES)))
def test_dilation_chain_rule(s, name):
    f = FIELD_CASES[name]()
    fs = f.dilate(s)
    x = _points(f, count=10) / s
    j, j0 = fs.jet(x), f.jet(s * x)
    assert np.array_equal(j.value, j0.value)
    assert np.allclose(j.grad, s * j0.grad, rtol=1e-14, atol=0)
    assert np.allclose(j.hess, s * s * j0.hess, rtol=1e-14, atol=0)


def test_angular_mean_examples():
    mode = angular_mode(1).re
    for r in (0.3, 1.0, 2.0):
        assert abs(angular_mean(mode, r)) < 1e-15
    g = gaussian_bump()
    assert angular_mean(g, 1.3) == pytest.approx(math.exp(-1.3**2 / 2), rel=1e-14)
    off = gaussian_bump(center=(0.6, 0.8))
    assert angular_mean(off, 0.0) == pytest.approx(float(off.value(np.zeros((1, 2)))[0]), rel=1e-15)


def test_make_family_dispatch():
    assert make_family("gaussian_bump", width=2.0).family_params["width"] == 2.0
    assert set(FAMILIES) >= {"gaussian_bump", "talenti_profile", "sphere_concentrated", "log_scale_bump"}
    with pytest.raises(ConstructionError):
        make_family("no_such_family")
    with pytest.raises(ConstructionError):
        make_family("gaussian_bump", bogus=1)


def test_construction_errors():
    with pytest.raises(ConstructionError):
        talenti_profile(2)
    with pytest.raises(ConstructionError):
        mollified_log(0.5)
    with pytest.raises(ConstructionError):
        halfspace_lift(gaussian_bump(), -0.5)
    with pytest.raises(ConstructionError):
        log_scale_bump(0.0)


def test_sphere_concentrated_custom_support():
    from sharpconst.fields import annulus_r
    f = sphere_concentrated(0.0, 0.25, annulus_r(0.25, 0.5, 2.0, 4.0), (0.25, 4.0))
    assert f.support_radius == 4.0
    assert f.hole_radius == 0.25
    # positive near radius 3 on the concentration ray
    assert f.value(np.array([[3.0, 0.0]]))[0] > 0
