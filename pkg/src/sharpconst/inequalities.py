"""Registry of the sharp inequalities as pairs of numerical functionals.

Each case evaluates a left side and a right side (with quadrature error
estimates) for a test field and reports their ratio.  For the Hardy
inequalities with remainder the left side is the remainder term and the
right side the energy, so every case reads ``lhs <= rhs``.

Planar integrals are taken in log-polar coordinates (t = log r, phi) so
that fields living on very different scales, and the weights singular at
the origin, are handled by one adaptive rule.
"""

from dataclasses import dataclass, field, replace
from functools import lru_cache
import math
import time

import numpy as np
from scipy import optimize, signal

from .capacity import CapacityQuery, ball_capacity
from .constants import (HSParams, MatrixForm, capacitary_Apq, hardy_remainder_constant,
                        hs_constant, hs_constant_critical, qf_best_constant, sobolev_constant)
from .errors import ConstructionError, InadmissibleFieldError
from .fields import (ComplexField, annulus_r, radial_field, s_profile_from_r, ScalarField, angular_mean, compact_bump, gaussian_bump,
                     annular_cutoff, angular_mode, halfspace_lift, log_scale_bump, mollified_log,
                     plane_wave_bump, product, smooth_cutoff_radial, sphere_concentrated,
                     talenti_profile, xn_power)
from .quad import (Integrand, QuadResult, _graded_breaks, cubature, integrate, integrate_1d,
                   layer_cake, level_radius, lorentz_quasinorm, radial_gradient_energy,
                   weighted_lq_norm)
from .sl_eigen import STANDARD_Q, build_problem, smallest_eigenvalue, weight_mass
from .specfun import gamma

# innermost radius (relative to the support) kept in log-polar integrals
_INNER_CUT = 1e-15
DEFAULT_TOL = 1e-9
# angular strips narrower than this are integrated in closed form
PHI_FLOOR = 1e-290
VERDICT_SLACK = 1e-9


@dataclass(frozen=True)
class Estimate:
    value: float
    error: float

    @classmethod
    def of(cls, res):
        return cls(float(res.value), float(res.abs_error_estimate))

    def scale(self, c):
        return Estimate(c * self.value, abs(c) * self.error)

    def power(self, k):
        v = self.value**k
        err = abs(k) * abs(v) * self.error / abs(self.value) if self.value != 0 else 0.0
        return Estimate(v, err)


@dataclass(frozen=True)
class RatioReport:
    """Both sides of one inequality for one field, with the pass/fail verdict.

    ``budget`` is (lhs_error + rhs_error)/|rhs| plus a fixed slack; the
    verdict is ``lhs <= rhs + budget |rhs|``, which for rhs > 0 is the same as
    ``ratio <= 1 + budget``.
    """

    case: str
    field_id: str
    lhs: float
    lhs_error: float
    rhs: float
    rhs_error: float
    ratio: float
    budget: float
    verdict: bool
    constant: float
    constant_provenance: str
    params: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "case": self.case, "field": self.field_id,
            "lhs": self.lhs, "lhs_error": self.lhs_error,
            "rhs": self.rhs, "rhs_error": self.rhs_error,
            "ratio": self.ratio, "budget": self.budget, "verdict": "pass" if self.verdict else "fail",
            "constant": {"value": self.constant, "provenance": self.constant_provenance},
            "params": _jsonable(self.params), "extras": _jsonable(self.extras),
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, (str, int, float, bool)) or obj is None:
        return obj
    return repr(obj)


def make_report(case, field_id, lhs, rhs, constant, provenance, params=None, extras=None):
    budget = (lhs.error + rhs.error) / abs(rhs.value) + VERDICT_SLACK if rhs.value != 0 else math.inf
    if rhs.value != 0:
        ratio = lhs.value / rhs.value
    else:
        ratio = 0.0 if lhs.value == 0 else math.inf
    slack = VERDICT_SLACK * abs(rhs.value) + lhs.error + rhs.error
    verdict = bool(lhs.value <= rhs.value + slack)
    return RatioReport(case, field_id, float(lhs.value), float(lhs.error), float(rhs.value),
                       float(rhs.error), float(ratio), float(budget), verdict, float(constant),
                       provenance, dict(params or {}), dict(extras or {}))


# ---------------------------------------------------------------------------
# quadrature helpers


def _jet(u, x):
    j = u.jet(x)
    return j.value, j.grad, j.hess


def _abs2(z):
    return np.real(z * np.conj(z))


def polar_integral(fn, u, tol=DEFAULT_TOL, half=False, phi_singular=False, abs_tol=0.0,
                   phi_floor=PHI_FLOOR):
    """int fn(x, r, phi) dx over the plane (or the upper half-plane).

    Integrates in (t, phi) with r = e^t from the hole (or a negligible
    inner radius) out to the support radius of ``u``.  With
    ``phi_singular`` on the half-plane, each quarter of the angle range is
    mapped by phi = (pi/2) e^{1 - 1/w}, which turns weights as singular as
    1/(phi log^2 phi) at the boundary rays into bounded ones; the strips
    within ``phi_floor`` of the rays are left out (see :func:`_u1`).
    """
    big = u.support_radius
    if not math.isfinite(big):
        raise ConstructionError("planar integrals need a field of bounded support")
    small = u.hole_radius if u.hole_radius > 0 else big * _INNER_CUT
    t0, t1 = math.log(small), math.log(big)
    top = math.pi if half else 2.0 * math.pi

    def radial_part(t, ang, mirrored=False):
        # for mirrored points the angle is pi - ang; the coordinates are
        # formed from ang itself since sin(pi - ang) loses ang below 1e-16
        r = np.exp(t)
        c = -np.cos(ang) if mirrored else np.cos(ang)
        x = np.stack([r * c, r * np.sin(ang)], axis=1)
        phi = math.pi - ang if mirrored else ang
        return np.asarray(fn(x, r, phi), dtype=float) * r * r

    if half and phi_singular:
        total, err, evals = 0.0, 0.0, 0
        w_min = 1.0 / (1.0 - math.log(phi_floor / (0.5 * math.pi)))
        for mirror in (False, True):
            def g(p, mirror=mirror):
                w = p[:, 1]
                ang = 0.5 * math.pi * np.exp(1.0 - 1.0 / w)
                live = ang > 0
                out = np.zeros(len(w))
                if np.any(live):
                    with np.errstate(divide="ignore", invalid="ignore"):
                        out[live] = (radial_part(p[live, 0], ang[live], mirror)
                                     * ang[live] / w[live] ** 2)
                return out

            res = cubature(g, [t0, w_min], [t1, 1.0], tol, abs_tol)
            total += res.value
            err += res.abs_error_estimate
            evals += res.evaluations
        return QuadResult(total, err, evals)

    def g(p):
        return radial_part(p[:, 0], p[:, 1])

    phi_breaks = _graded_breaks(0.0, top, (0.0, top), levels=30) if phi_singular else [0.0, top]
    return cubature(g, [t0, 0.0], [t1, top], tol, abs_tol, breaks=[[t0, t1], phi_breaks])


# ---------------------------------------------------------------------------
# admissibility predicates


def _require(ok, case, predicate):
    if not ok:
        raise InadmissibleFieldError(f"{case}: field violates predicate '{predicate}'")


def _planar(case, u):
    _require(isinstance(u, (ScalarField, ComplexField)), case, "is a test field")
    _require(u.dimension == 2, case, "dimension == 2")
    _require(math.isfinite(u.support_radius), case, "bounded support")


def _radial_decreasing(case, u):
    _require(isinstance(u, ScalarField) and u.is_radial, case, "radial about the origin")
    rad = u.as_radial()
    top = u.support_radius if math.isfinite(u.support_radius) else 1e3
    r = np.linspace(0.0, top, 2001)
    vals = rad.profile(r)
    _require(np.all(np.diff(vals) <= 1e-14 * max(1.0, abs(vals[0]))), case, "nonincreasing profile")
    _require(np.all(vals >= 0), case, "nonnegative")


# ---------------------------------------------------------------------------
# cases on the whole plane


def _x1(u, params, tol):
    _planar("INEQ-X1", u)
    c = hs_constant_critical(HSParams(1.0, 0.0, 0.0, 2)) ** 2

    def dirichlet(x, r, phi):
        return np.sum(_abs2(_jet(u, x)[1]), axis=1)

    def hess_norm(x, r, phi):
        return np.sqrt(np.sum(_abs2(_jet(u, x)[2]), axis=(1, 2)))

    lhs = Estimate.of(polar_integral(dirichlet, u, tol))
    mass = Estimate.of(polar_integral(hess_norm, u, tol))
    return lhs, mass.power(2).scale(c), c, "closed_form", {"hessian_l1": mass.value}


def _x1_delta_ratio(u, tol):
    """int |grad u|^2 / (int |Delta u|)^2 for a planar field."""

    def dirichlet(x, r, phi):
        return np.sum(_abs2(_jet(u, x)[1]), axis=1)

    def lap(x, r, phi):
        h = _jet(u, x)[2]
        return np.abs(h[:, 0, 0] + h[:, 1, 1])

    if getattr(u, "is_radial", False):
        # |Delta u| has kinks on circles; integrate along a ray with the
        # sign changes as breakpoints
        top = _ray_integral(dirichlet, u, tol)
        bottom = _ray_integral(lap, u, tol, kinks=lambda x: _jet(u, x)[2].trace(axis1=1, axis2=2))
    else:
        top = Estimate.of(polar_integral(dirichlet, u, tol))
        bottom = Estimate.of(polar_integral(lap, u, tol))
    return top.value / bottom.value**2


def _ray_integral(fn, u, tol, kinks=None):
    """2 pi int_0^R fn(r e_1) r dr for a radial planar field."""
    big = u.support_radius

    def on_ray(r):
        x = np.stack([r, np.zeros_like(r)], axis=1)
        return fn(x, r, 0.0)

    points = [0.0, big]
    if kinks is not None:
        r = np.linspace(0.0, big, 20001)[1:]
        s = kinks(np.stack([r, np.zeros_like(r)], axis=1))
        idx = np.nonzero(np.sign(s[:-1]) * np.sign(s[1:]) < 0)[0]
        for i in idx:
            points.append(optimize.brentq(lambda t: float(kinks(np.array([[t, 0.0]]))[0]),
                                          r[i], r[i + 1], xtol=1e-15))
    res = integrate_1d(lambda r: on_ray(r) * r, 0.0, big, tol, points=tuple(sorted(points)))
    return Estimate.of(res).scale(2.0 * math.pi)


def _moment_integrand(u):
    def fn(x, r, phi):
        _, g, h = _jet(u, x)
        lap = h[:, 0, 0] + h[:, 1, 1]
        radial = x[:, 0] * g[:, 0] + x[:, 1] * g[:, 1]
        return np.real(radial * np.conj(lap)) / (r * r)

    return fn


def _laplacian_energy(u, x):
    h = _jet(u, x)[2]
    return _abs2(h[:, 0, 0] + h[:, 1, 1])


def _m1(u, params, tol):
    _planar("INEQ-1M", u)
    signed = polar_integral(_moment_integrand(u), u, tol)
    rhs = Estimate.of(polar_integral(lambda x, r, phi: _laplacian_energy(u, x), u, tol))
    lhs = Estimate(abs(signed.value), signed.abs_error_estimate)
    return lhs, rhs, 1.0, "paper_value", {"signed": signed.value}


def _zero_angular_mean(u, radii):
    ok = True
    for r in radii:
        x = np.array([[r, 0.0], [0.0, r]])
        scale = max(np.max(np.abs(_jet(u, x)[0])), 1e-300)
        m = angular_mean(u, r)
        ok = ok and abs(m) <= 1e-10 * max(scale, 1.0)
    return ok


def _m1_ortho(u, params, tol):
    _planar("INEQ-1M-ORTHO", u)
    big = u.support_radius
    _require(_zero_angular_mean(u, np.linspace(0.05, 0.5, 7) * big), "INEQ-1M-ORTHO",
             "zero angular mean on every circle")
    signed = polar_integral(_moment_integrand(u), u, tol)
    energy = Estimate.of(polar_integral(lambda x, r, phi: _laplacian_energy(u, x), u, tol))
    lhs = Estimate(abs(signed.value), signed.abs_error_estimate)
    sign_ok = signed.value <= signed.abs_error_estimate
    return lhs, energy.scale(0.75), 0.75, "paper_value", {
        "signed": signed.value, "signed_nonpositive": bool(sign_ok)}


def _elem_sides(k, x):
    lhs = np.abs(3.0 * x - 1.0 + k * k)
    rhs = x * x + 2.0 * (k * k + 1.0) * x + (k * k - 1.0) ** 2
    return lhs, rhs


def _elem(u, params, tol):
    k = float(params.get("k", 0))
    x = float(params.get("x", 0.0))
    if x < 0 or k < 0 or k != int(k):
        raise InadmissibleFieldError("INEQ-ELEM: needs an integer k >= 0 and x >= 0")
    lhs, rhs = _elem_sides(k, x)
    return Estimate(float(lhs), 0.0), Estimate(float(rhs), 0.0), 1.0, "paper_value", {}


@dataclass(frozen=True)
class ElemGridResult:
    holds: bool
    points: int
    equality_points: list
    degenerate_points: list
    max_ratio: float


def elem_grid_check(x_max=100.0, step=1e-3, k_max=50):
    """Exhaustive check of the reduced elementary inequality on a grid.

    Points where both sides vanish are reported as degenerate, not as
    equality cases.
    """
    count = int(round(x_max / step))
    x = np.arange(count + 1) * step
    holds = True
    eq, degenerate = [], []
    worst = 0.0
    for k in range(k_max + 1):
        lhs, rhs = _elem_sides(float(k), x)
        holds = holds and bool(np.all(lhs <= rhs))
        zero = (lhs == 0) & (rhs == 0)
        degenerate.extend((k, float(v)) for v in x[zero])
        tight = (lhs == rhs) & ~zero
        eq.extend((k, float(v)) for v in x[tight])
        pos = rhs > 0
        worst = max(worst, float(np.max(lhs[pos] / rhs[pos])))
    return ElemGridResult(holds, (count + 1) * (k_max + 1), eq, degenerate, worst)


def _t1(u, params, tol):
    _planar("INEQ-T1", u)
    _require(u.hole_radius > 0, "INEQ-T1", "vanishes near the origin (punctured plane)")

    # log(e^2 |x|)^{-1} = L - 2 with L = log |x|^{-1}
    def lhs_fn(x, r, phi):
        return np.sum(_abs2(_jet(u, x)[2]), axis=(1, 2)) * (-np.log(r) - 2.0)

    def rhs_fn(x, r, phi):
        _, g, h = _jet(u, x)
        lap = h[:, 0, 0] + h[:, 1, 1]
        big_l = -np.log(r)
        # grad L = -x / |x|^2
        cross = -(g[:, 0] * x[:, 0] + g[:, 1] * x[:, 1]) / (r * r)
        return _abs2(lap) * big_l + 2.0 * np.real(np.conj(lap) * cross)

    lhs = Estimate.of(polar_integral(lhs_fn, u, tol))
    rhs = Estimate.of(polar_integral(rhs_fn, u, tol))
    # under x -> s x both sides shift by log(s) int |Delta u|^2 (times s^2),
    # so the gap normalised by that integral is the scale-free quantity
    energy = polar_integral(lambda x, r, phi: _laplacian_energy(u, x), u, tol).value
    return lhs, rhs, 1.0, "paper_value", {
        "laplacian_energy": energy, "normalized_gap": (rhs.value - lhs.value) / energy}


def _f7(u, params, tol):
    _planar("INEQ-7F", u)

    def lhs_fn(x, r, phi):
        v = _jet(u, x)[0]
        # pi^2/4 - arcsin(x_1/|x|)^2 = psi (pi - psi) with psi = arccos(x_1/|x|),
        # evaluated through atan2 to stay accurate next to the x_1-axis
        psi = np.abs(np.arctan2(x[:, 1], x[:, 0]))
        sin2 = np.sin(psi) ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            w = np.where(sin2 > 0, sin2 / (psi * (math.pi - psi)), 0.0)
        return w * _abs2(v)

    def rhs_fn(x, r, phi):
        return x[:, 1] ** 2 * np.sum(_abs2(_jet(u, x)[1]), axis=1)

    lhs = Estimate.of(polar_integral(lhs_fn, u, tol, phi_singular=True))
    rhs = Estimate.of(polar_integral(rhs_fn, u, tol)).scale(0.5)
    return lhs, rhs, 0.5, "paper_value", {}


# ---------------------------------------------------------------------------
# the quadratic-form estimate (n = 2)


def _kernel_factor(n):
    # inverse Fourier transform of |xi|^{-n} <A xi/|xi|, xi/|xi|> is this factor
    # times <A x/|x|, x/|x|>
    return -(2.0 ** (-0.5 * n)) / gamma(0.5 * n + 1.0)


def _qf_matrix(params):
    a = params.get("A", np.diag([1.0, -1.0]))
    return a if isinstance(a, MatrixForm) else MatrixForm(a)


def kernel_double_integral(h, a, grid=512):
    """int int K(x - y) h(y) conj(h(x)) dx dy on a uniform lattice, by FFT convolution.

    The kernel is bounded (homogeneous of degree 0), so dropping its value
    at z = 0, where it is undefined, only removes one cell.  Returns the
    double integral and int |h| on the same lattice.
    """
    big = h.support_radius
    step = 2.0 * big / grid
    axis = -big + (np.arange(grid) + 0.5) * step
    xx, yy = np.meshgrid(axis, axis, indexing="ij")
    hv = _jet(h, np.stack([xx.ravel(), yy.ravel()], axis=1))[0].reshape(grid, grid)
    d = (np.arange(-grid + 1, grid)) * step
    zx, zy = np.meshgrid(d, d, indexing="ij")
    mat = a.entries
    d2 = zx * zx + zy * zy
    with np.errstate(divide="ignore", invalid="ignore"):
        form = (mat[0, 0] * zx * zx + (mat[0, 1] + mat[1, 0]) * zx * zy + mat[1, 1] * zy * zy) / d2
    kern = _kernel_factor(2) * np.where(d2 > 0, form, 0.0)
    if not np.any(np.imag(kern)):
        kern = np.real(kern)
    if not np.any(kern):
        conv = np.zeros_like(hv)
    elif np.iscomplexobj(kern) or np.iscomplexobj(hv):
        conv = signal.fftconvolve(hv.astype(complex), kern.astype(complex), mode="valid")
    else:
        conv = signal.fftconvolve(hv, kern, mode="valid")
    cell = step * step
    total = complex(np.sum(np.conj(hv) * conv)) * cell * cell
    return total, float(np.sum(np.abs(hv))) * cell


def _qf(h, params, tol):
    _planar("INEQ-QF", h)
    a = _qf_matrix(params)
    _require(a.n == 2, "INEQ-QF", "2x2 coefficient matrix")
    c = qf_best_constant(a)
    grid = int(params.get("resolution", 512))
    fine, l1 = kernel_double_integral(h, a, grid)
    coarse, l1c = kernel_double_integral(h, a, grid // 2)
    lhs = Estimate(abs(fine), abs(fine - coarse))
    rhs = Estimate(2.0 * math.pi * c * l1 * l1, 2.0 * math.pi * c * abs(l1 * l1 - l1c * l1c))
    return lhs, rhs, c, "closed_form", {"kernel_form": [fine.real, fine.imag]}


def qf_cross_check(u, a, inner_order=64, outer_radial=48, outer_angular=16):
    """(int <A grad u, grad u> dx, (2 pi)^{-1} int int K(x-y) h(y) conj h(x)) for h = -Delta u.

    The kernel side is written as int K(z) R(z) dz with the autocorrelation
    R(z) = int h(y) conj h(y + z) dy from a fixed tensor Gauss-Legendre rule;
    R is smooth, so the outer polar integral converges fast.  Real fields.
    """
    if not isinstance(a, MatrixForm):
        a = MatrixForm(a)
    if u.dimension != 2 or a.n != 2:
        raise ConstructionError("the cross-check is implemented for n = 2")
    mat = np.real(a.entries)
    big = u.support_radius

    def form(x, r, phi):
        g = _jet(u, x)[1]
        return np.einsum("ni,ij,nj->n", g, mat, g)

    quad_form = polar_integral(form, u, 1e-11, abs_tol=1e-14).value

    gx, gw = np.polynomial.legendre.leggauss(inner_order)
    ax = big * gx
    aw = big * gw
    yy = np.stack(np.meshgrid(ax, ax, indexing="ij"), -1).reshape(-1, 2)
    yw = np.outer(aw, aw).ravel()

    def minus_lap(x):
        h = _jet(u, x)[2]
        return -(h[:, 0, 0] + h[:, 1, 1])

    h0 = minus_lap(yy)
    rx, rw = np.polynomial.legendre.leggauss(outer_radial)
    rr = big * (rx + 1.0)
    rw = big * rw
    # R(-z) = conj R(z) and K is even, so half the circle suffices (times 2)
    phis = math.pi * np.arange(outer_angular) / outer_angular
    dphi = math.pi / outer_angular
    total = 0.0
    for phi in phis:
        e = np.array([math.cos(phi), math.sin(phi)])
        kval = _kernel_factor(2) * float(e @ mat @ e)
        if kval == 0.0:
            continue
        for r, w in zip(rr, rw):
            shifted = minus_lap(yy + r * e)
            corr = float(np.sum(yw * h0 * shifted))
            total += 2.0 * dphi * w * r * kval * corr
    return float(quad_form), float(total / (2.0 * math.pi))


# ---------------------------------------------------------------------------
# half-plane Hardy inequalities with remainder


@lru_cache(maxsize=None)
def remainder_eigenvalue(q_name):
    """lambda(q) for the angular weight q (tolerance 1e-4), cached per run."""
    if q_name not in STANDARD_Q:
        raise ConstructionError(f"unknown weight {q_name!r}; known: {sorted(STANDARD_Q)}")
    res = smallest_eigenvalue(build_problem("theorem31", q=STANDARD_Q[q_name]()), tol=1e-4)
    return res


def _eigen_meta(res):
    return {"lambda": res.lambda_, "error_estimate": res.error_estimate,
            "mesh_levels": [[int(n), float(v)] for n, v in res.mesh_levels]}


def _halfplane(case, u):
    _planar(case, u)
    _require(u.domain in ("whole-space", "half-space"), case, "smooth up to the boundary x_2 = 0")


def _u1(u, params, tol):
    _halfplane("INEQ-1U", u)
    q_name = params.get("q", "one")
    eig = remainder_eigenvalue(q_name)
    q = STANDARD_Q[q_name]()

    def lhs_fn(x, r, phi):
        return q(x[:, 1] / r) * _abs2(_jet(u, x)[0]) / r

    def rhs_fn(x, r, phi):
        return x[:, 1] * np.sum(_abs2(_jet(u, x)[1]), axis=1)

    main = polar_integral(lhs_fn, u, tol, half=True, phi_singular=True)
    # strips 0 < phi < PHI_FLOOR at both rays: u is constant across them to
    # double precision, so they contribute int_0^floor q times int |u(x_1, 0)|^2
    strip = weight_mass(q, PHI_FLOOR)
    big = u.support_radius

    def trace(r):
        pts = np.concatenate([np.stack([r, 0.0 * r], 1), np.stack([-r, 0.0 * r], 1)])
        vals = _abs2(_jet(u, pts)[0])
        return vals[: len(r)] + vals[len(r):]

    edge = integrate_1d(trace, 0.0, big, tol, abs_tol=1e-300)
    total = Estimate(main.value + strip * edge.value,
                     main.abs_error_estimate + strip * edge.abs_error_estimate)
    lhs = total.scale(eig.lambda_)
    rhs = Estimate.of(polar_integral(rhs_fn, u, tol, half=True))
    return lhs, rhs, eig.lambda_, "eigenvalue", {"eigen": _eigen_meta(eig), "q": q_name}


def _hardy_energy(v, tol):
    """int |grad v|^2 - (1/4) int v^2 / x_2^2 over the upper half-plane."""

    def fn(x, r, phi):
        val, g, _ = _jet(v, x)
        return np.sum(_abs2(g), axis=1) - 0.25 * _abs2(val) / x[:, 1] ** 2

    return Estimate.of(polar_integral(fn, v, tol, half=True))


def _open_halfplane(case, v):
    _planar(case, v)
    _require(v.boundary_gap > 0, case, "compact support in the open half-plane")


def _u2(v, params, tol):
    _open_halfplane("INEQ-2U", v)
    q_name = params.get("q", "one")
    eig = remainder_eigenvalue(q_name)
    q = STANDARD_Q[q_name]()

    def lhs_fn(x, r, phi):
        return q(np.sin(phi)) * _abs2(_jet(v, x)[0]) / (x[:, 1] * r)

    lhs = Estimate.of(polar_integral(lhs_fn, v, tol, half=True)).scale(eig.lambda_)
    return lhs, _hardy_energy(v, tol), eig.lambda_, "eigenvalue", {"eigen": _eigen_meta(eig), "q": q_name}


def _u8(v, params, tol):
    _open_halfplane("INEQ-8U", v)
    eig = remainder_eigenvalue("log_critical")

    def lhs_fn(x, r, phi):
        t = x[:, 1] / r
        return _abs2(_jet(v, x)[0]) / (x[:, 1] ** 2 * (1.0 - np.log(t)) ** 2)

    lhs = Estimate.of(polar_integral(lhs_fn, v, tol, half=True)).scale(eig.lambda_)
    return lhs, _hardy_energy(v, tol), eig.lambda_, "eigenvalue", {"eigen": _eigen_meta(eig)}


def _x7(u, params, tol):
    _planar("INEQ-7X", u)
    _require(u.domain == "half-space" and u.boundary_vanishing, "INEQ-7X",
             "vanishes on the boundary of the half-plane")
    n = 2
    c = hardy_remainder_constant(n)
    q = 2.0 * (n + 1) / (n - 1)
    gam = -1.0 / (n + 1)

    def norm_fn(x, r, phi):
        return np.abs(x[:, 1] ** gam * _jet(u, x)[0]) ** q

    mass = Estimate.of(polar_integral(norm_fn, u, tol, half=True))
    lhs = mass.power(2.0 / q).scale(c)
    return lhs, _hardy_energy(u, tol), c, "closed_form", {}


# ---------------------------------------------------------------------------
# radial cases (level sets are balls)


def _hs_params(u, params):
    p = float(params.get("p", 2.0))
    a = float(params.get("a", 0.0))
    b = float(params.get("b", 0.0))
    return HSParams(p, a, b, u.dimension)


def _radial_energy(u, h, tol):
    res = radial_gradient_energy(u, h.p, h.a, tol, with_error=True)
    return Estimate.of(res).power(1.0 / h.p)


def _a60(u, params, tol):
    _radial_decreasing("INEQ-60A", u)
    h = _hs_params(u, params)
    q = float(params.get("q", h.critical_q))
    tau = h.critical_q
    c = hs_constant(h, q)
    lhs = Estimate.of(lorentz_quasinorm(u, tau, q, h.b, tol, with_error=True))
    return lhs, _radial_energy(u, h, tol).scale(c), c, "closed_form", {"tau": tau, "q": q}


def _c60(u, params, tol):
    _radial_decreasing("INEQ-60C", u)
    h = _hs_params(u, params)
    c = hs_constant_critical(h)
    lhs = Estimate.of(weighted_lq_norm(u, h.critical_q, h.b, tol, with_error=True))
    return lhs, _radial_energy(u, h, tol).scale(c), c, "closed_form", {"q": h.critical_q}


def _x60(u, params, tol):
    _radial_decreasing("INEQ-60X", u)
    h = _hs_params(u, params)
    q = float(params.get("q", h.p))
    _require(q >= h.p, "INEQ-60X", "q >= p")
    unit = ball_capacity(CapacityQuery(h.p, h.a, h.n, 1.0))
    expo = (h.n - h.p - h.a) * q / h.p

    def level(t):
        return unit ** (q / h.p) * level_radius(u, t) ** expo

    lhs = Estimate.of(layer_cake(u, level, q, tol))
    c = capacitary_Apq(h.p, q)
    return lhs, _radial_energy(u, h, tol).scale(c), c, "closed_form", {"q": q}


def _x8(w, params, tol):
    _require(isinstance(w, ScalarField), "INEQ-8X", "real test field")
    m = w.dimension
    _require(m >= 3, "INEQ-8X", "dimension >= 3")
    s = sobolev_constant(m)
    q = 2.0 * m / (m - 2.0)
    if w.is_radial:
        norm = Estimate.of(weighted_lq_norm(w, q, 0.0, tol, with_error=True))
        energy = Estimate.of(radial_gradient_energy(w, 2.0, 0.0, tol, with_error=True))
    else:
        _require(m == 3 and math.isfinite(w.support_radius), "INEQ-8X",
                 "non-radial fields only in R^3 with bounded support")
        big = w.support_radius
        lo, hi = [-big] * 3, [big] * 3
        norm = Estimate.of(integrate(Integrand(lambda x: np.abs(_jet(w, x)[0]) ** q, lo, hi), tol))
        norm = norm.power(1.0 / q)
        energy = Estimate.of(integrate(
            Integrand(lambda x: np.sum(_jet(w, x)[1] ** 2, axis=1), lo, hi), tol))
    return norm.power(2.0).scale(s), energy, s, "closed_form", {}


# ---------------------------------------------------------------------------
# registry


@dataclass(frozen=True)
class InequalityCase:
    id: str
    description: str
    evaluate: object
    constant_provenance: str
    dimension: int = 2


CASES = {c.id: c for c in [
    InequalityCase("INEQ-X1", "int |grad u|^2 <= (1/4pi)(int |grad_2 u|)^2", _x1, "closed_form"),
    InequalityCase("INEQ-QF", "|int int K(x-y) h(y) h(x)| <= 2pi C (int |h|)^2", _qf, "closed_form"),
    InequalityCase("INEQ-1M", "|Re int (x.grad u) Delta u / |x|^2| <= int |Delta u|^2", _m1, "paper_value"),
    InequalityCase("INEQ-1M-ORTHO", "zero angular mean: constant 3/4", _m1_ortho, "paper_value"),
    InequalityCase("INEQ-ELEM", "|3x - 1 + k^2| <= x^2 + 2(k^2+1)x + (k^2-1)^2", _elem, "paper_value", 0),
    InequalityCase("INEQ-T1", "weighted Garding inequality with log|x|^{-1}", _t1, "paper_value"),
    InequalityCase("INEQ-1U", "lambda int q u^2/rho <= int x_2 |grad u|^2", _u1, "eigenvalue"),
    InequalityCase("INEQ-2U", "lambda int q v^2/(x_2 rho) <= Hardy energy", _u2, "eigenvalue"),
    InequalityCase("INEQ-8U", "logarithmic remainder of the half-plane Hardy inequality", _u8, "eigenvalue"),
    InequalityCase("INEQ-7F", "angular Hardy inequality with constant 1/2", _f7, "paper_value"),
    InequalityCase("INEQ-60A", "Lorentz-norm Hardy-Sobolev inequality", _a60, "closed_form", 3),
    InequalityCase("INEQ-60C", "weighted Hardy-Sobolev inequality", _c60, "closed_form", 3),
    InequalityCase("INEQ-60X", "capacitary integral inequality", _x60, "closed_form", 3),
    InequalityCase("INEQ-7X", "half-plane Hardy inequality with Sobolev remainder", _x7, "closed_form"),
    InequalityCase("INEQ-8X", "Sobolev inequality with the best constant", _x8, "closed_form", 3),
]}


def _case(case_id):
    try:
        return CASES[case_id]
    except KeyError:
        raise ConstructionError(f"unknown inequality case {case_id!r}; known: {sorted(CASES)}") from None


def field_label(u):
    if u is None:
        return "grid-point"
    params = ",".join(f"{k}={v}" for k, v in sorted(u.family_params.items()))
    return f"{u.family}({params})"


def evaluate_case(case_id, u=None, tol=DEFAULT_TOL, field_id=None, **params):
    """Evaluate both sides of an inequality for one field and report the ratio."""
    case = _case(case_id)
    t0 = time.perf_counter()
    lhs, rhs, const, prov, extras = case.evaluate(u, params, tol)
    extras = dict(extras, seconds=time.perf_counter() - t0)
    public = {k: v for k, v in params.items() if k != "resolution"}
    return make_report(case_id, field_id or field_label(u), lhs, rhs, const, prov, public, extras)


# ---------------------------------------------------------------------------
# standard corpus


def _x2_times(g):
    """x_2 g(x): smooth, vanishing on the boundary of the half-plane."""
    f = product(xn_power(1.0, 2), g)
    return replace(f, domain="half-space", boundary_vanishing=True, support_radius=g.support_radius,
                   family=f"x2*{g.family}", family_params=dict(g.family_params))


def standard_corpus(case_id):
    """Admissible (field_id, field, params) triples, at least three per case."""
    g0 = gaussian_bump()
    goff = gaussian_bump(center=(0.7, -0.3), width=0.6)
    gup = gaussian_bump(center=(0.3, 0.8), width=0.7)
    bump_up = compact_bump((0.0, 1.5), 1.0, 2)
    bump_side = compact_bump((0.8, 2.0), 1.2, 2)
    corpus = {
        "INEQ-X1": [("gaussian", g0, {}), ("gaussian-offcenter", goff, {}),
                    ("angular-mode-2", angular_mode(2), {}), ("annular-cutoff", annular_cutoff(), {})],
        "INEQ-QF": [("angular-mode-1-re", angular_mode(1).re, {}),
                    ("angular-mode-2-re", angular_mode(2).re, {}),
                    ("sphere-concentrated", sphere_concentrated(0.0, 0.25), {}),
                    ("radial-gaussian", g0, {"A": np.array([[0.0, 1.0], [1.0, 0.0]])})],
        "INEQ-1M": [("gaussian", g0, {}), ("gaussian-offcenter", goff, {}),
                    ("angular-mode-1", angular_mode(1), {}), ("plane-wave", plane_wave_bump((2.0, 1.0)), {})],
        "INEQ-1M-ORTHO": [("angular-mode-1", angular_mode(1), {}), ("angular-mode-2", angular_mode(2), {}),
                          ("angular-mode-3-re", angular_mode(3, width=0.5).re, {})],
        "INEQ-ELEM": [(f"k={k},x={x}", None, {"k": k, "x": x})
                      for k, x in [(0, 0.0), (1, 0.0), (1, 1.0 / 3.0), (2, 5.0), (7, 0.25)]],
        "INEQ-T1": [("annular-cutoff", annular_cutoff(), {}),
                    ("annular-cutoff-small", annular_cutoff().dilate(100.0), {}),
                    ("plane-wave", plane_wave_bump((3.0, 1.0)), {}),
                    ("sphere-concentrated", sphere_concentrated(1.0, 0.5), {})],
        "INEQ-1U": [("gaussian", g0, {}), ("gaussian-upper", gup, {}),
                    ("compact-bump", bump_up, {}), ("gaussian-log-critical", g0, {"q": "log_critical"}),
                    ("log-scale-bump", log_scale_bump(0.5), {})],
        "INEQ-2U": [("compact-bump", bump_up, {}), ("compact-bump-side", bump_side, {}),
                    ("lifted-bump", halfspace_lift(bump_up, 0.5), {}),
                    ("compact-bump-sqrt", bump_up, {"q": "sqrt"})],
        "INEQ-8U": [("compact-bump", bump_up, {}), ("compact-bump-side", bump_side, {}),
                    ("lifted-bump", halfspace_lift(bump_side, 0.5), {})],
        "INEQ-7F": [("gaussian", g0, {}), ("gaussian-upper", gup, {}),
                    ("angular-mode-1-re", angular_mode(1).re, {})],
        "INEQ-60A": [("gaussian-q3", gaussian_bump(dimension=3), {"q": 3.0}),
                     ("talenti-q8", talenti_profile(3), {"q": 8.0}),
                     ("cutoff-p1.5", smooth_cutoff_radial(dimension=3), {"p": 1.5, "a": 0.5, "b": 1.0, "q": 4.0}),
                     ("gaussian-critical", gaussian_bump(dimension=4), {"p": 2.0, "a": 0.5, "b": 1.0})],
        "INEQ-60C": [("gaussian", gaussian_bump(dimension=3), {}),
                     ("talenti", talenti_profile(3), {}),
                     ("cutoff-weighted", smooth_cutoff_radial(dimension=3), {"p": 1.5, "a": 0.5, "b": 1.0}),
                     ("gaussian-n5", gaussian_bump(dimension=5), {"p": 2.5, "a": 1.0, "b": 2.5})],
        "INEQ-60X": [("gaussian-q2", gaussian_bump(dimension=3), {}),
                     ("talenti-q4", talenti_profile(3), {"q": 4.0}),
                     ("cutoff-p1.5", smooth_cutoff_radial(dimension=3), {"p": 1.5, "a": 0.5, "b": 1.0, "q": 3.0})],
        "INEQ-7X": [("x2-gaussian", _x2_times(gaussian_bump(center=(0.0, 1.0))), {}),
                    ("x2-gaussian-side", _x2_times(gaussian_bump(center=(0.6, 0.4), width=0.6)), {}),
                    ("compact-bump", replace(bump_up, domain="half-space"), {})],
        "INEQ-8X": [("talenti", talenti_profile(3), {}), ("gaussian", gaussian_bump(dimension=3), {}),
                    ("gaussian-offcenter", gaussian_bump(center=(0.4, 0.0, -0.3), dimension=3), {}),
                    ("talenti-m5", talenti_profile(5), {})],
    }
    return corpus[_case(case_id).id]


def run_corpus(case_ids=None, tol=DEFAULT_TOL, workers=1):
    """Evaluate every corpus field; reports sorted by case id then field id."""
    ids = sorted(CASES) if case_ids is None else list(case_ids)
    jobs = [(cid, fid, u, params) for cid in ids for fid, u, params in standard_corpus(cid)]

    def run(job):
        cid, fid, u, params = job
        return evaluate_case(cid, u, tol, field_id=fid, **params)

    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor
        for cid in ids:
            if cid in ("INEQ-1U", "INEQ-2U", "INEQ-8U"):
                remainder_eigenvalue("log_critical")
                remainder_eigenvalue("one")
                remainder_eigenvalue("sqrt")
                break
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(run, jobs))
    else:
        reports = [run(j) for j in jobs]
    return sorted(reports, key=lambda r: (r.case, r.field_id))


# ---------------------------------------------------------------------------
# sharpness sweeps and the counterexample


@dataclass(frozen=True)
class SweepResult:
    case: str
    family: str
    schedule: list
    reports: list
    certified: bool

    @property
    def ratios(self):
        return [r.ratio for r in self.reports]

    def to_dict(self):
        return {"case": self.case, "family": self.family, "schedule": _jsonable(self.schedule),
                "ratios": self.ratios, "certified": self.certified,
                "reports": [r.to_dict() for r in self.reports]}


# cutoff scale of the plane-wave sweep: log|x|^{-1} is about 50 on the support
T1_SCALE = math.exp(-50.0)


def _t1_cutoff():
    # long inner ramp, sharp outer edge: the 1/|xi|^2 correction to the
    # ratio is then negative and the sweep increases towards its limit
    f = radial_field(s_profile_from_r(annulus_r(0.01, 0.5, 1.0, 1.2)), 2, 1.2,
                     family="annulus", family_params={"annulus": (0.01, 0.5, 1.0, 1.2)})
    return replace(f, hole_radius=0.01, domain="punctured-plane")


def _t1_member(k):
    return plane_wave_bump((float(k), 0.0), _t1_cutoff()).dilate(1.0 / T1_SCALE)


def _qf_direction(a):
    th = np.linspace(0.0, math.pi, 4097)
    vals = np.abs(a.form(np.stack([np.cos(th), np.sin(th)], axis=1)))
    return float(th[int(np.argmax(vals))])


def _sweep_members(case_id, params):
    if case_id == "INEQ-T1":
        return "plane_wave_bump", [4, 8, 16, 32], lambda k: _t1_member(k)
    if case_id == "INEQ-QF":
        theta = _qf_direction(_qf_matrix(params))

        def qf_member(eps):
            # a radial profile spread over a wide range of radii keeps the
            # near-diagonal loss of the kernel form small
            return sphere_concentrated(theta, eps, annulus_r(0.25, 0.5, 2.0, 4.0), (0.25, 4.0))

        return "sphere_concentrated", [2.0**-j for j in range(2, 7)], qf_member
    if case_id == "INEQ-1U":
        return "log_scale_bump", [2.0**-j for j in range(1, 7)], log_scale_bump
    if case_id in ("INEQ-8X", "INEQ-60C"):
        m = int(params.get("m", 6 if case_id == "INEQ-8X" else 3))
        return "talenti_profile", [10.0, 20.0, 40.0], lambda r: talenti_profile(m, cutoff=r)
    raise ConstructionError(f"no optimizing family registered for {case_id}")


def _qf_sweep_resolution(eps):
    # lattice fine enough to resolve the angular width eps of the field
    return max(512, int(2 ** math.ceil(math.log2(16.0 / eps))))


def sharpness_sweep(case_id, schedule=None, tol=DEFAULT_TOL, **params):
    """Ratios along the optimizing family of a case.

    Certified when the last ratio is at least 0.95 and the sequence is
    nondecreasing within the reported error budgets.
    """
    family, default, member = _sweep_members(case_id, params)
    schedule = list(default if schedule is None else schedule)
    reports = []
    for s in schedule:
        extra = dict(params)
        extra.pop("m", None)
        if case_id == "INEQ-QF":
            extra.setdefault("resolution", _qf_sweep_resolution(s))
        rep = evaluate_case(case_id, member(s), tol, field_id=f"{family}[{s:g}]", **extra)
        reports.append(replace(rep, params=dict(rep.params, schedule_value=s)))
    monotone = all(b.ratio >= a.ratio - (a.budget * abs(a.ratio) + b.budget * abs(b.ratio))
                   for a, b in zip(reports, reports[1:]))
    certified = bool(reports) and monotone and reports[-1].ratio >= 0.95
    return SweepResult(case_id, family, schedule, reports, certified)


def counterexample_x1_delta(epsilon_schedule=(0.1, 0.01, 0.001), tol=1e-8):
    """int |grad u|^2 / (int |Delta u|)^2 along mollified logarithms.

    The ratio grows like log(1/eps), so no inequality of the form
    int |grad u|^2 <= C (int |Delta u|)^2 can hold.
    """
    eps = list(epsilon_schedule)
    if any(e <= 0 for e in eps) or any(b >= a for a, b in zip(eps, eps[1:])):
        raise ConstructionError("epsilon schedule must be positive and decreasing")
    return [_x1_delta_ratio(mollified_log(e), tol) for e in eps]


__all__ = [
    "CASES", "ElemGridResult", "Estimate", "InequalityCase", "RatioReport", "SweepResult",
    "counterexample_x1_delta", "elem_grid_check", "evaluate_case", "kernel_double_integral",
    "make_report", "polar_integral", "qf_cross_check", "remainder_eigenvalue", "run_corpus",
    "sharpness_sweep", "standard_corpus",
]
