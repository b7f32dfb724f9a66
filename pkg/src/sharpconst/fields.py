"""Analytic test functions with exact derivatives up to second order.

A :class:`ScalarField` is a real function on R^n evaluated through its
*jet*: value, gradient and Hessian at an array of points.  Families are
assembled from a few closed-form pieces (radial profiles written in
s = |x|^2, harmonic polynomials, plane waves, powers of x_n, separable
polar products) combined by the product rule, so every derivative is
exact.  Complex fields are pairs of real fields.
"""

from dataclasses import dataclass, field, replace
import math
from typing import Callable, Optional

import numpy as np

from .errors import ConstructionError
from .quad import RadialFunction

# Gaussian supports end where exp(-r^2/2w^2) < 1e-20, leaving room for
# polynomial factors under the 1e-16 support bound
_NEG_LOG_TINY = math.log(1e20)


# ---------------------------------------------------------------------------
# one-dimensional building blocks


def smooth_step(t):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1; returns (S, S', S'')."""
    t = np.asarray(t, dtype=float)
    tc = np.clip(t, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore", under="ignore"):
        a = np.where(tc > 0, np.exp(-1.0 / tc), 0.0)
        b = np.where(tc < 1, np.exp(-1.0 / (1.0 - tc)), 0.0)
        ia = np.where(tc > 0, 1.0 / tc, 0.0)
        ib = np.where(tc < 1, 1.0 / (1.0 - tc), 0.0)
        a1 = a * ia**2
        a2 = a * (ia**4 - 2.0 * ia**3)
        b1 = -b * ib**2
        b2 = b * (ib**4 - 2.0 * ib**3)
        d = a + b
        num = a1 * b - a * b1
        s0 = a / d
        s1 = num / d**2
        s2 = (a2 * b - a * b2) / d**2 - 2.0 * num * (a1 + b1) / d**3
    inside = (t > 0) & (t < 1)
    s0 = np.where(t >= 1, 1.0, np.where(inside, s0, 0.0))
    s1 = np.where(inside, np.nan_to_num(s1), 0.0)
    s2 = np.where(inside, np.nan_to_num(s2), 0.0)
    return s0, s1, s2


@dataclass(frozen=True)
class Profile:
    """A function of one variable with its first two derivatives."""

    jet: Callable[[np.ndarray], tuple]

    def __call__(self, t):
        return self.jet(np.asarray(t, dtype=float))[0]

    def __mul__(self, other):
        def jet(t):
            f0, f1, f2 = self.jet(t)
            g0, g1, g2 = other.jet(t)
            return f0 * g0, f1 * g0 + f0 * g1, f2 * g0 + 2.0 * f1 * g1 + f0 * g2

        return Profile(jet)


def s_profile_from_r(rjet):
    """Turn a profile in r = sqrt(s) that is constant near r = 0 into one in s."""

    def jet(s):
        r = np.sqrt(np.maximum(s, 0.0))
        f0, f1, f2 = rjet(r)
        with np.errstate(divide="ignore", invalid="ignore"):
            g1 = np.where(r > 0, f1 / (2.0 * r), 0.0)
            g2 = np.where(r > 0, (f2 - f1 / np.where(r > 0, r, 1.0)) / (4.0 * r * r), 0.0)
        g1 = np.where(f1 == 0, 0.0, g1)
        g2 = np.where((f1 == 0) & (f2 == 0), 0.0, g2)
        return f0, g1, g2

    return Profile(jet)


def cutoff_r(r0, r1):
    """1 for r <= r0, 0 for r >= r1, smooth in between (profile in r)."""
    if not 0 < r0 < r1:
        raise ConstructionError(f"cutoff needs 0 < r0 < r1, got {r0}, {r1}")
    w = r1 - r0

    def jet(r):
        s0, s1, s2 = smooth_step((r - r0) / w)
        return 1.0 - s0, -s1 / w, -s2 / w**2

    return jet


def annulus_r(a0, a1, b0, b1):
    """Smooth bump equal to 1 on [a1, b0] and vanishing outside (a0, b1)."""
    if not 0 < a0 < a1 <= b0 < b1:
        raise ConstructionError("annulus needs 0 < a0 < a1 <= b0 < b1")

    def jet(r):
        u0, u1, u2 = smooth_step((r - a0) / (a1 - a0))
        u1, u2 = u1 / (a1 - a0), u2 / (a1 - a0) ** 2
        v0, v1, v2 = cutoff_r(b0, b1)(r)
        return u0 * v0, u1 * v0 + u0 * v1, u2 * v0 + 2 * u1 * v1 + u0 * v2

    return jet


def gaussian_s(width):
    c = 1.0 / (2.0 * width**2)

    def jet(s):
        e = np.exp(-c * s)
        return e, -c * e, c * c * e

    return Profile(jet)


def talenti_s(m):
    k = 0.5 * (m - 2.0)

    def jet(s):
        base = 1.0 + s
        return base**-k, -k * base ** (-k - 1.0), k * (k + 1.0) * base ** (-k - 2.0)

    return Profile(jet)


def log_s(eps):
    e2 = eps * eps

    def jet(s):
        base = s + e2
        return 0.5 * np.log(base), 0.5 / base, -0.5 / base**2

    return Profile(jet)


def compact_bump_s(radius):
    """exp(-1/(1 - s/R^2)) inside the ball of radius R, zero outside."""
    r2 = radius * radius

    def jet(s):
        sig = s / r2
        inside = sig < 1.0
        with np.errstate(divide="ignore", over="ignore", invalid="ignore", under="ignore"):
            om = np.where(inside, 1.0 - sig, 1.0)
            b = np.where(inside, np.exp(-1.0 / om), 0.0)
            d1 = -1.0 / (r2 * om**2)
            d2 = -2.0 / (r2 * r2 * om**3)
            g1 = b * d1
            g2 = b * (d1 * d1 + d2)
        return b, np.where(inside, g1, 0.0), np.where(inside, g2, 0.0)

    return Profile(jet)


def r_profile(jet):
    return Profile(jet)


# ---------------------------------------------------------------------------
# fields


@dataclass(frozen=True)
class Jet:
    value: np.ndarray
    grad: np.ndarray
    hess: np.ndarray

    @property
    def laplacian(self):
        return np.trace(self.hess, axis1=-2, axis2=-1)


@dataclass(frozen=True)
class ScalarField:
    """Real test function with exact value, gradient and Hessian.

    ``support_radius`` bounds the region (a ball about the origin) outside
    which the value is below 1e-16.  For half-space fields ``x_n`` is the
    last coordinate; ``boundary_gap`` is a distance from {x_n = 0} inside
    which the field vanishes identically (0 when it only vanishes on the
    boundary).  For punctured-plane fields ``hole_radius`` is the radius
    of a ball around the origin where the field vanishes identically.
    """

    jet_fn: Callable[[np.ndarray], tuple]
    dimension: int
    support_radius: float
    domain: str = "whole-space"
    family: str = "custom"
    family_params: dict = field(default_factory=dict)
    radial_profile_s: Optional[Profile] = None
    boundary_vanishing: bool = False
    boundary_gap: float = 0.0
    hole_radius: float = 0.0

    def jet(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[-1] != self.dimension:
            raise ValueError(f"expected points of dimension {self.dimension}, got {x.shape}")
        v, g, h = self.jet_fn(x)
        # exact symmetry; products of factors can differ in the last bit
        return Jet(v, g, 0.5 * (h + np.swapaxes(h, -1, -2)))

    def value(self, x):
        return self.jet(x).value

    def gradient(self, x):
        return self.jet(x).grad

    def hessian(self, x):
        return self.jet(x).hess

    def laplacian(self, x):
        return self.jet(x).laplacian

    @property
    def is_radial(self):
        return self.radial_profile_s is not None

    def as_radial(self):
        """The field as a :class:`RadialFunction` (radial fields only)."""
        if self.radial_profile_s is None:
            raise ConstructionError(f"{self.family} field is not radial about the origin")
        prof = self.radial_profile_s

        def profile(r):
            r = np.asarray(r, dtype=float)
            return prof.jet(r * r)[0]

        def derivative(r):
            r = np.asarray(r, dtype=float)
            return 2.0 * r * prof.jet(r * r)[1]

        return RadialFunction(profile, self.dimension, derivative, self.support_radius)

    def dilate(self, s):
        """The field x -> u(s x)."""
        base = self.jet_fn

        def jet(x):
            v, g, h = base(s * x)
            return v, s * g, s * s * h

        prof = None
        if self.radial_profile_s is not None:
            p0 = self.radial_profile_s

            def pj(t, p0=p0):
                g0, g1, g2 = p0.jet(s * s * t)
                return g0, s * s * g1, s**4 * g2

            prof = Profile(pj)
        params = dict(self.family_params, dilation=self.family_params.get("dilation", 1.0) * s)
        return replace(self, jet_fn=jet, support_radius=self.support_radius / s,
                       radial_profile_s=prof, family_params=params,
                       boundary_gap=self.boundary_gap / s, hole_radius=self.hole_radius / s)

    def __mul__(self, other):
        return product(self, other)


@dataclass(frozen=True)
class ComplexField:
    """A complex test function stored as (real part, imaginary part)."""

    re: ScalarField
    im: ScalarField

    @property
    def dimension(self):
        return self.re.dimension

    @property
    def domain(self):
        return self.re.domain

    @property
    def support_radius(self):
        return max(self.re.support_radius, self.im.support_radius)

    @property
    def family(self):
        return self.re.family

    @property
    def family_params(self):
        return self.re.family_params

    @property
    def hole_radius(self):
        return min(self.re.hole_radius, self.im.hole_radius)

    @property
    def boundary_gap(self):
        return min(self.re.boundary_gap, self.im.boundary_gap)

    @property
    def is_radial(self):
        return False

    def jet(self, x):
        a, b = self.re.jet(x), self.im.jet(x)
        return Jet(a.value + 1j * b.value, a.grad + 1j * b.grad, a.hess + 1j * b.hess)

    def dilate(self, s):
        return ComplexField(self.re.dilate(s), self.im.dilate(s))


def _outer(a, b):
    return a[:, :, None] * b[:, None, :]


def product(f, g):
    """Pointwise product of two scalar fields (product rule to second order)."""
    if f.dimension != g.dimension:
        raise ConstructionError("factors must live in the same dimension")

    def jet(x):
        fv, fg, fh = f.jet_fn(x)
        gv, gg, gh = g.jet_fn(x)
        v = fv * gv
        grad = fv[:, None] * gg + gv[:, None] * fg
        hess = (fv[:, None, None] * gh + gv[:, None, None] * fh
                + _outer(fg, gg) + _outer(gg, fg))
        return v, grad, hess

    prof = None
    if f.radial_profile_s is not None and g.radial_profile_s is not None:
        prof = f.radial_profile_s * g.radial_profile_s
    domain = f.domain if f.domain != "whole-space" else g.domain
    return ScalarField(
        jet, f.dimension, min(f.support_radius, g.support_radius), domain,
        family=f"{f.family}*{g.family}", family_params={},
        radial_profile_s=prof,
        boundary_vanishing=f.boundary_vanishing or g.boundary_vanishing,
        boundary_gap=max(f.boundary_gap, g.boundary_gap),
        hole_radius=max(f.hole_radius, g.hole_radius),
    )


def radial_field(prof, dimension, support_radius, center=None, **kw):
    """u(x) = G(|x - c|^2) from a profile G in s."""
    c = np.zeros(dimension) if center is None else np.asarray(center, dtype=float)

    def jet(x):
        y = x - c
        s = np.einsum("ij,ij->i", y, y)
        g0, g1, g2 = prof.jet(s)
        grad = 2.0 * g1[:, None] * y
        hess = 2.0 * g1[:, None, None] * np.eye(dimension)[None] + 4.0 * g2[:, None, None] * _outer(y, y)
        return g0, grad, hess

    centered = not np.any(c)
    return ScalarField(jet, dimension, support_radius + float(np.linalg.norm(c)),
                       radial_profile_s=prof if centered else None, **kw)


def harmonic_poly(k, part):
    """Re or Im of (x1 + i x2)^k on R^2."""

    def jet(x):
        z = x[:, 0] + 1j * x[:, 1]
        v = z**k
        d1 = k * z ** (k - 1) if k >= 1 else np.zeros_like(z)
        d2 = k * (k - 1) * z ** (k - 2) if k >= 2 else np.zeros_like(z)
        grad = np.stack([d1, 1j * d1], axis=1)
        hess = np.empty((len(x), 2, 2), dtype=complex)
        hess[:, 0, 0] = d2
        hess[:, 0, 1] = hess[:, 1, 0] = 1j * d2
        hess[:, 1, 1] = -d2
        pick = np.real if part == "re" else np.imag
        return pick(v), pick(grad), pick(hess)

    return ScalarField(jet, 2, math.inf, family=f"harmonic_{part}{k}")


def plane_wave(xi, part):
    """cos(xi.x) or sin(xi.x)."""
    xi = np.asarray(xi, dtype=float)
    d = xi.size

    def jet(x):
        ph = x @ xi
        c, s = np.cos(ph), np.sin(ph)
        if part == "re":
            v, dv, ddv = c, -s, -c
        else:
            v, dv, ddv = s, c, -s
        return v, dv[:, None] * xi[None], ddv[:, None, None] * np.outer(xi, xi)[None]

    return ScalarField(jet, d, math.inf, family=f"plane_wave_{part}")


def xn_power(alpha, dimension):
    """x_n^alpha on the half-space x_n > 0."""

    def jet(x):
        t = x[:, -1]
        with np.errstate(divide="ignore", invalid="ignore"):
            v = np.where(t > 0, np.abs(t) ** alpha, 0.0)
            d1 = np.where(t > 0, alpha * np.abs(t) ** (alpha - 1.0), 0.0)
            d2 = np.where(t > 0, alpha * (alpha - 1.0) * np.abs(t) ** (alpha - 2.0), 0.0)
        grad = np.zeros_like(x)
        grad[:, -1] = d1
        hess = np.zeros((len(x), dimension, dimension))
        hess[:, -1, -1] = d2
        return v, grad, hess

    return ScalarField(jet, dimension, math.inf, domain="half-space", family=f"xn^{alpha}")


def polar_separable(rjet, ajet, support_radius, hole_radius):
    """u = R(r) Phi(phi) on the plane; R must vanish near r = 0."""

    def jet(x):
        r = np.hypot(x[:, 0], x[:, 1])
        phi = np.arctan2(x[:, 1], x[:, 0])
        R0, R1, R2 = rjet(r)
        P0, P1, P2 = ajet(phi)
        rs = np.where(r > 0, r, 1.0)
        ur, up = R1 * P0, R0 * P1
        urr, urp, upp = R2 * P0, R1 * P1, R0 * P2
        c, s = np.cos(phi), np.sin(phi)
        gx = c * ur - s * up / rs
        gy = s * ur + c * up / rs
        hxx = c * c * urr - 2 * c * s * urp / rs + s * s * upp / rs**2 + s * s * ur / rs + 2 * c * s * up / rs**2
        hyy = s * s * urr + 2 * c * s * urp / rs + c * c * upp / rs**2 + c * c * ur / rs - 2 * c * s * up / rs**2
        hxy = (c * s * urr + (c * c - s * s) * urp / rs - c * s * upp / rs**2
               - c * s * ur / rs - (c * c - s * s) * up / rs**2)
        v = R0 * P0
        zero = r < hole_radius
        grad = np.stack([gx, gy], axis=1)
        hess = np.stack([np.stack([hxx, hxy], 1), np.stack([hxy, hyy], 1)], 1)
        grad[zero] = 0.0
        hess[zero] = 0.0
        return np.where(zero, 0.0, v), grad, hess

    return ScalarField(jet, 2, support_radius, hole_radius=hole_radius)


# ---------------------------------------------------------------------------
# registered families


def _gaussian_support(width):
    return width * math.sqrt(2.0 * _NEG_LOG_TINY)


def gaussian_bump(center=None, width=1.0, dimension=2):
    """exp(-|x - c|^2 / (2 w^2))."""
    c = np.zeros(dimension) if center is None else np.asarray(center, dtype=float)
    if c.size != dimension:
        raise ConstructionError("center has the wrong dimension")
    return radial_field(gaussian_s(width), dimension, _gaussian_support(width), c,
                        family="gaussian_bump",
                        family_params={"center": tuple(c.tolist()), "width": width})


def smooth_cutoff_radial(r0=1.0, r1=2.0, dimension=2):
    """Equal to 1 on |x| <= r0 and 0 on |x| >= r1."""
    return radial_field(s_profile_from_r(cutoff_r(r0, r1)), dimension, r1,
                        family="smooth_cutoff_radial", family_params={"r0": r0, "r1": r1})


def compact_bump(center, radius, dimension):
    c = np.asarray(center, dtype=float)
    f = radial_field(compact_bump_s(radius), dimension, radius, c, family="compact_bump",
                     family_params={"center": tuple(c.tolist()), "radius": radius})
    if dimension >= 1 and c[-1] - radius > 0:
        f = replace(f, boundary_gap=c[-1] - radius, boundary_vanishing=True)
    return f


def annular_cutoff(inner=0.5, outer=2.0, dimension=2):
    """Smooth bump supported in inner/2 < |x| < 2 outer, equal to 1 on [inner, outer]."""
    prof = s_profile_from_r(annulus_r(0.5 * inner, inner, outer, 2.0 * outer))
    f = radial_field(prof, dimension, 2.0 * outer, family="annular_cutoff",
                     family_params={"inner": inner, "outer": outer})
    return replace(f, hole_radius=0.5 * inner,
                   domain="punctured-plane" if dimension == 2 else "whole-space")


def plane_wave_bump(xi, cutoff=None):
    """e^{i x.xi} eta(x) as a (real, imaginary) pair."""
    xi = np.asarray(xi, dtype=float)
    if cutoff is None:
        cutoff = annular_cutoff(dimension=xi.size)
    if cutoff.dimension != xi.size:
        raise ConstructionError("wave vector and cutoff dimensions differ")
    re = product(plane_wave(xi, "re"), cutoff)
    im = product(plane_wave(xi, "im"), cutoff)
    params = {"xi": tuple(xi.tolist()), "cutoff": cutoff.family}
    re = replace(re, family="plane_wave_bump", family_params=params, domain=cutoff.domain)
    im = replace(im, family="plane_wave_bump", family_params=params, domain=cutoff.domain)
    return ComplexField(re, im)


def angular_mode(k, radial_profile=None, width=1.0):
    """Re/Im of (x1 + i x2)^k rho(|x|^2): angular frequency k, smooth at 0."""
    if int(k) != k or k < 0:
        raise ConstructionError("angular mode index must be a nonnegative integer")
    k = int(k)
    prof = gaussian_s(width) if radial_profile is None else radial_profile
    rho = radial_field(prof, 2, _gaussian_support(width) + 2.0 * k * width, family="profile")
    params = {"k": k, "width": width}
    re = replace(product(harmonic_poly(k, "re"), rho), family="angular_mode", family_params=params,
                 support_radius=rho.support_radius)
    im = replace(product(harmonic_poly(k, "im"), rho), family="angular_mode", family_params=params,
                 support_radius=rho.support_radius)
    if k == 0:
        re = replace(re, radial_profile_s=prof)
    return ComplexField(re, im)


def mollified_log(eps, radius=1.0):
    """eta(|x|) log sqrt(|x|^2 + eps^2) with eta = 1 on |x| < R/2, 0 beyond R."""
    if not 0 < eps < 0.25 * radius:
        raise ConstructionError("mollification scale must satisfy 0 < eps < R/4")
    prof = log_s(eps) * s_profile_from_r(cutoff_r(0.5 * radius, radius))
    return radial_field(prof, 2, radius, family="mollified_log",
                        family_params={"eps": eps, "radius": radius})


def talenti_profile(m, cutoff=None):
    """(1 + |z|^2)^{-(m-2)/2} on R^m, optionally cut off smoothly on [R, 2R]."""
    if int(m) != m or m < 3:
        raise ConstructionError("Talenti profile needs an integer dimension m >= 3")
    prof = talenti_s(m)
    support = math.inf
    if cutoff is not None:
        prof = prof * s_profile_from_r(cutoff_r(cutoff, 2.0 * cutoff))
        support = 2.0 * cutoff
    return radial_field(prof, int(m), support, family="talenti_profile",
                        family_params={"m": int(m), "cutoff": cutoff})


def halfspace_lift(v, power):
    """x_n^{power} v for power = +1/2 or -1/2 on the half-space."""
    if power not in (0.5, -0.5):
        raise ConstructionError("half-space lifts use the powers +1/2 and -1/2")
    if power < 0 and v.boundary_gap <= 0:
        raise ConstructionError("x_n^{-1/2} lift needs a field vanishing near x_n = 0")
    lifted = product(xn_power(power, v.dimension), v)
    return replace(lifted, family="halfspace_lift", support_radius=v.support_radius,
                   family_params={"power": power, "base": v.family},
                   boundary_gap=v.boundary_gap, boundary_vanishing=True, domain="half-space")


def sphere_concentrated(theta, eps, radial_profile=None, radial_support=None):
    """h(x) = eta(|x|) rho_eps(arg x - theta) on the plane, rho_eps of unit mass.

    A custom radial profile eta (a jet in r) must come with the interval
    ``radial_support`` = (inner, outer) outside which it vanishes.
    """
    if eps <= 0 or eps >= 1:
        raise ConstructionError("concentration width must lie in (0, 1)")
    if radial_profile is None:
        rjet, (inner, outer) = annulus_r(0.5, 1.0, 1.0, 2.0), (0.5, 2.0)
    else:
        if radial_support is None:
            raise ConstructionError("a custom radial profile needs its radial_support")
        rjet, (inner, outer) = radial_profile, radial_support
        if not 0 < inner < outer:
            raise ConstructionError("radial support must satisfy 0 < inner < outer")
    # normalisation of exp(-1/(1-t^2)) on (-1, 1)
    tt, ww = np.polynomial.legendre.leggauss(200)
    mass = float(np.sum(ww * np.exp(-1.0 / (1.0 - tt**2))))
    norm = 1.0 / (mass * eps)

    def ajet(phi):
        d = np.angle(np.exp(1j * (phi - theta))) / eps
        inside = np.abs(d) < 1.0
        with np.errstate(divide="ignore", over="ignore", invalid="ignore", under="ignore"):
            om = np.where(inside, 1.0 - d * d, 1.0)
            b = np.where(inside, np.exp(-1.0 / om), 0.0)
            # d/dd of -1/(1-d^2) = -2d/(1-d^2)^2
            l1 = -2.0 * d / om**2
            l2 = -2.0 / om**2 - 8.0 * d * d / om**3
            b1 = b * l1 / eps
            b2 = b * (l1 * l1 + l2) / eps**2
        return norm * b, norm * np.where(inside, b1, 0.0), norm * np.where(inside, b2, 0.0)

    f = polar_separable(rjet, ajet, outer, inner)
    return replace(f, family="sphere_concentrated",
                   family_params={"theta": theta, "eps": eps, "angular_mass": 1.0},
                   domain="punctured-plane")


def _bump_jet(t):
    """exp(-1/(1 - t^2)) on (-1, 1) with two derivatives."""
    inside = np.abs(t) < 1.0
    with np.errstate(divide="ignore", over="ignore", invalid="ignore", under="ignore"):
        om = np.where(inside, 1.0 - t * t, 1.0)
        b = np.where(inside, np.exp(-1.0 / om), 0.0)
        l1 = -2.0 * t / om**2
        l2 = -2.0 / om**2 - 8.0 * t * t / om**3
    return b, np.where(inside, b * l1, 0.0), np.where(inside, b * (l1 * l1 + l2), 0.0)


def log_scale_bump(eps):
    """r^{-1/2} eta(eps log r) on the plane, eta a smooth bump on (-1, 1).

    Homogeneous of degree -1/2 on a logarithmic range of scales; as eps -> 0
    its energy concentrates at zero frequency in t = log r.
    """
    if not 0 < eps <= 1:
        raise ConstructionError("log-scale width must lie in (0, 1]")

    def rjet(r):
        rs = np.where(r > 0, r, 1.0)
        e0, e1, e2 = _bump_jet(eps * np.log(rs))
        f0 = rs**-0.5 * e0
        f1 = rs**-1.5 * (-0.5 * e0 + eps * e1)
        f2 = rs**-2.5 * (0.75 * e0 - 2.0 * eps * e1 + eps * eps * e2)
        zero = r <= 0
        return np.where(zero, 0.0, f0), np.where(zero, 0.0, f1), np.where(zero, 0.0, f2)

    hole = math.exp(-1.0 / eps)
    f = radial_field(s_profile_from_r(rjet), 2, 1.0 / hole, family="log_scale_bump",
                     family_params={"eps": eps})
    return replace(f, hole_radius=hole)


FAMILIES = {
    "gaussian_bump": gaussian_bump,
    "smooth_cutoff_radial": smooth_cutoff_radial,
    "plane_wave_bump": plane_wave_bump,
    "angular_mode": angular_mode,
    "mollified_log": mollified_log,
    "talenti_profile": talenti_profile,
    "halfspace_lift": halfspace_lift,
    "sphere_concentrated": sphere_concentrated,
    "compact_bump": compact_bump,
    "annular_cutoff": annular_cutoff,
    "log_scale_bump": log_scale_bump,
}


def make_family(kind, **params):
    """Build a registered test-function family by name."""
    try:
        builder = FAMILIES[kind]
    except KeyError:
        raise ConstructionError(f"unknown field family {kind!r}; known: {sorted(FAMILIES)}") from None
    try:
        return builder(**params)
    except TypeError as exc:
        raise ConstructionError(f"bad parameters for {kind}: {exc}") from None


def angular_mean(f, r, points=1024):
    """(1/2pi) int_0^{2pi} f(r, phi) dphi by the trapezoidal rule (planar fields)."""
    if f.dimension != 2:
        raise ConstructionError("angular mean is defined for planar fields")
    phi = 2.0 * math.pi * np.arange(points) / points
    x = np.stack([r * np.cos(phi), r * np.sin(phi)], axis=1)
    vals = f.jet(x).value
    return complex(np.mean(vals)) if np.iscomplexobj(vals) else float(np.mean(vals))
