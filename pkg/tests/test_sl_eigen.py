import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import linalg

from sharpconst.errors import ConstructionError, DomainError, NoFiniteConstantError
from sharpconst.sl_eigen import (BASE_STEP, STANDARD_Q, SLProblem, build_problem, constant_weight,
                                 hardy_condition_sup, hlp_periodic_weight, lambda_upper_bounds,
                                 q_weight, rayleigh_quotient, smallest_eigenvalue, weight_mass)

FINITE_Q = ["one", "log_critical", "sqrt", "inverse_log"]


def _ritz_oracle(rhs, degree=40, order=200):
    """Rayleigh-Ritz for sin|y'|^2 + sin/4 |y|^2 over rhs |y|^2 on (0, pi),
    with Legendre polynomials in phi as trial space."""
    x, w = np.polynomial.legendre.leggauss(order)
    phi = 0.5 * math.pi * (x + 1.0)
    w = 0.5 * math.pi * w
    vander = np.polynomial.legendre.legvander(x, degree)
    dvander = np.zeros_like(vander)
    for k in range(degree + 1):
        c = np.zeros(degree + 1)
        c[k] = 1.0
        dvander[:, k] = np.polynomial.legendre.legval(x, np.polynomial.legendre.legder(c)) * 2.0 / math.pi
    s = np.sin(phi)
    a = dvander.T @ ((w * s)[:, None] * dvander) + vander.T @ ((0.25 * w * s)[:, None] * vander)
    b = vander.T @ ((w * rhs(phi))[:, None] * vander)
    return float(linalg.eigh(a, b, eigvals_only=True)[0])


@pytest.fixture(scope="module")
def corollary2():
    return smallest_eigenvalue(build_problem("corollary2"), tol=1e-8)


def test_corollary2_paper_value(corollary2):
    assert abs(corollary2.lambda_ - 0.1564) <= 2e-3


def test_corollary2_ritz_oracle(corollary2):
    ref = _ritz_oracle(lambda p: np.ones_like(p))
    assert corollary2.lambda_ == pytest.approx(ref, abs=1e-7)


def test_corollary2_runtime_at_ten_thousand_elements():
    import time
    t0 = time.perf_counter()
    res = smallest_eigenvalue(build_problem("corollary2"), tol=1e-6, min_levels=3, start_step=BASE_STEP / 32)
    elapsed = time.perf_counter() - t0
    assert res.mesh_levels[-1][0] >= 10_000
    assert len(res.mesh_levels) >= 3
    assert elapsed < 10.0
    assert abs(res.lambda_ - 0.1564) <= 2e-3


def test_mesh_levels_monotone(corollary2):
    lams = [lam for _, lam in corollary2.mesh_levels]
    assert len(lams) >= 3
    assert all(b <= a + 1e-10 for a, b in zip(lams, lams[1:]))


def test_eigenfunction_has_one_sign(corollary2):
    y = corollary2.eigenfunction
    y = y * np.sign(y[np.argmax(np.abs(y))])
    assert np.all(y > 0)


def test_legendre_sanity():
    res = smallest_eigenvalue(build_problem("legendre"), tol=1e-10)
    assert abs(res.lambda_ - 0.25) <= 1e-8


def test_hlp_value_and_eigenfunction():
    res = smallest_eigenvalue(build_problem("hlp"), tol=1e-6)
    assert abs(res.lambda_ - 2.0) <= 1e-4
    phi = res.nodes
    y = res.eigenfunction * np.sign(np.sum(res.eigenfunction))
    ref = phi * (math.pi - phi)
    y = y / math.sqrt(np.trapezoid(y * y, phi))
    ref = ref / math.sqrt(np.trapezoid(ref * ref, phi))
    assert math.sqrt(np.trapezoid((y - ref) ** 2, phi)) < 1e-3


def test_corollary81():
    res = smallest_eigenvalue(build_problem("corollary81"), tol=1e-6)
    # independent shooting on the transformed equation gives 0.1502706
    assert res.lambda_ == pytest.approx(0.15027, abs=2e-5)
    one = rayleigh_quotient(build_problem("corollary81"), lambda p: np.ones_like(p), lambda p: np.zeros_like(p))
    assert res.lambda_ < one


def test_remark7_constant_eigenfunction():
    res = smallest_eigenvalue(build_problem("remark7", n=3, mu=0.0), tol=1e-8)
    assert res.lambda_ == pytest.approx(0.25, abs=1e-7)


def test_remark8_reduces_to_hlp():
    # p(t) = t^2, mu = 1, q = sin^2/(psi(pi - psi)); eta = y sin turns this into the HLP problem
    p = q_weight(lambda t: t * t, 2.0, 0.0, "t^2")
    prob = build_problem("remark8", p=p, mu=1.0, q_angle=hlp_periodic_weight())
    res = smallest_eigenvalue(prob, tol=1e-5)
    assert res.lambda_ == pytest.approx(2.0, abs=1e-3)


def test_rayleigh_quotient_examples():
    prob = build_problem("corollary2")
    one = rayleigh_quotient(prob, lambda p: np.ones_like(p), lambda p: np.zeros_like(p))
    assert abs(one - 1 / (2 * math.pi)) < 1e-12
    cos = rayleigh_quotient(prob, np.cos, lambda p: -np.sin(p))
    assert cos == pytest.approx(3 / math.pi, rel=1e-12)
    hlp = rayleigh_quotient(build_problem("hlp"), lambda p: p * (math.pi - p), lambda p: math.pi - 2 * p)
    assert hlp == pytest.approx(2.0, rel=1e-10)


def test_rayleigh_zero_trial():
    with pytest.raises(DomainError):
        rayleigh_quotient(build_problem("corollary2"), lambda p: 0 * p, lambda p: 0 * p)


@settings(max_examples=20, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2))
def test_eigenvalue_below_every_rayleigh_quotient(a, b, c):
    prob = build_problem("corollary2")
    lam = smallest_eigenvalue(prob, tol=1e-6).lambda_
    trial = (lambda p: 1 + a * np.cos(p) + b * np.sin(p) + c * p * p)
    deriv = (lambda p: -a * np.sin(p) + b * np.cos(p) + 2 * c * p)
    assert lam <= rayleigh_quotient(prob, trial, deriv) + 1e-6


def test_hardy_condition_sup_examples():
    assert hardy_condition_sup(STANDARD_Q["one"]()) == pytest.approx(1.0, abs=1e-6)
    assert hardy_condition_sup(STANDARD_Q["log_critical"]()) == pytest.approx(1.0, abs=1e-6)
    assert hardy_condition_sup(STANDARD_Q["inverse"]()) == math.inf


def test_hardy_condition_rejects_negative_weight():
    with pytest.raises(DomainError):
        hardy_condition_sup(q_weight(lambda t: t - 0.5, name="t-1/2"))


@pytest.mark.parametrize("name", FINITE_Q)
def test_lambda_bounded_by_trial_bounds(name):
    q = STANDARD_Q[name]()
    lam = smallest_eigenvalue(build_problem("theorem31", q=q), tol=1e-5).lambda_
    assert lam <= lambda_upper_bounds(q) + 1e-5
    assert lam > 0
    assert 0.05 <= lam * hardy_condition_sup(q) <= 20


def test_lambda_upper_bounds_examples():
    assert lambda_upper_bounds(STANDARD_Q["one"]()) <= 1 / (2 * math.pi) + 1e-14
    assert lambda_upper_bounds(STANDARD_Q["inverse"]()) == 0.0


def test_divergent_weight_has_no_constant():
    with pytest.raises(NoFiniteConstantError):
        build_problem("theorem31", q=STANDARD_Q["inverse"]())


def test_weight_mass_log_critical():
    # int_0^t q = 1/(1 - log t)
    for t in (0.5, 1e-3, 1e-100, 1e-290):
        assert weight_mass(STANDARD_Q["log_critical"](), t) == pytest.approx(1 / (1 - math.log(t)), rel=1e-10)


def test_tolerance_not_met():
    from sharpconst.errors import ToleranceNotMetError
    with pytest.raises(ToleranceNotMetError) as info:
        smallest_eigenvalue(build_problem("corollary2"), tol=1e-15, max_elements=2000)
    assert info.value.best_estimate == pytest.approx(0.15641, abs=1e-4)


def test_problem_construction_errors():
    with pytest.raises(ConstructionError):
        SLProblem((1.0, 0.0), constant_weight(1.0), constant_weight(0.0), constant_weight(1.0))
    with pytest.raises(ConstructionError):
        SLProblem((0.0, 1.0), constant_weight(1.0), constant_weight(0.0), constant_weight(1.0), boundary="robin")
    with pytest.raises(ConstructionError):
        build_problem("no-such-problem")
    with pytest.raises(ConstructionError):
        build_problem("theorem31", q=lambda t: t)
