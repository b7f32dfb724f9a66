"""Weighted (p, a)-capacities of balls and the capacitary inequality.

The capacity of a ball B_R in R^n for the energy int |grad u|^p |x|^{-a}
is attained by a radial minimizer, which gives the closed form

    cap_{p,a}(B_R) = |S^{n-1}| ((n-p-a)/(p-1))^{p-1} R^{n-p-a}

with the convention 0**0 = 1 at p = 1.
"""

from dataclasses import dataclass
import math

import numpy as np

from .constants import (HSParams, _as_hs, _xlogy, capacitary_Apq, isocap_constant,
                        log_sphere_area)
from .errors import DomainError
from .quad import layer_cake, level_radius, mu_b_of_radius, radial_gradient_energy


@dataclass(frozen=True)
class CapacityQuery:
    p: float
    a: float
    n: int
    radius: float = 1.0

    def __post_init__(self):
        p, a, n = self.p, self.a, self.n
        if int(n) != n or n < 2:
            raise DomainError(f"n must be an integer >= 2, got {n!r}")
        if not 1.0 <= p < n:
            raise DomainError(f"condition 1 <= p < n violated (p={p}, n={n})")
        if not 0.0 <= a < n - p:
            raise DomainError(f"condition 0 <= a < n-p violated (a={a}, n-p={n - p})")
        if not self.radius > 0:
            raise DomainError(f"radius must be positive, got {self.radius!r}")


def log_ball_capacity(qry):
    p, a, n, r = qry.p, qry.a, qry.n, qry.radius
    out = log_sphere_area(n) + _xlogy(p - 1.0, (n - p - a) / (p - 1.0) if p > 1 else 1.0)
    return out + (n - p - a) * math.log(r)


def ball_capacity(qry=None, **kw):
    """(p, a)-capacity of the ball of the given radius, relative to R^n."""
    if qry is None:
        qry = CapacityQuery(**kw)
    return math.exp(log_ball_capacity(qry))


def radial_capacity_discrete(p, a, n, radius=1.0, outer=1e4, points=10_000):
    """Numerical capacity of B_R from the discretized radial Dirichlet problem.

    Minimizes sum_i w_i |u_{i+1} - u_i|^p / h_i^{p-1} over u = 1 at R and
    u = 0 at ``outer`` (times R), w_i = |S^{n-1}| r^{n-1-a} at the cell
    midpoint, on a logarithmic grid.  The minimizer of this series network
    is explicit: the increments are proportional to (h_i^{p-1}/w_i)^{1/(p-1)},
    so no iterative solve is needed.  Intended for p > 1.
    """
    if p <= 1:
        raise DomainError("the discrete radial oracle needs p > 1")
    r = radius * np.geomspace(1.0, outer, points)
    h = np.diff(r)
    mid = 0.5 * (r[1:] + r[:-1])
    w = math.exp(log_sphere_area(n)) * mid ** (n - 1.0 - a)
    # cell "resistance" for the p-energy w |du/h|^p h
    res = (h ** (p - 1.0) / w) ** (1.0 / (p - 1.0))
    total = res.sum()
    du = res / total
    return float(np.sum(w * du**p / h ** (p - 1.0)))


def mu_b_ball(n, b, radius=1.0):
    """mu_b(B_R) = int_{B_R} |x|^{-b} dx."""
    if not b < n:
        raise DomainError(f"mu_b of a ball needs b < n, got b={b!r}, n={n!r}")
    if not radius > 0:
        raise DomainError("radius must be positive")
    return mu_b_of_radius(n, b, radius)


@dataclass(frozen=True)
class IsocapResult:
    lhs: float
    rhs: float
    relative_gap: float


def isocap_check(h, radius=1.0):
    """Both sides of the isocapacitary inequality on a ball; equality is expected."""
    h = _as_hs(h)
    lhs = mu_b_ball(h.n, h.b, radius) ** h.gamma_exponent
    rhs = isocap_constant(h) * ball_capacity(CapacityQuery(h.p, h.a, h.n, radius))
    return IsocapResult(float(lhs), float(rhs), float(abs(lhs - rhs) / rhs))


def capacitary_lhs_radial(u, h, q, tol=1e-9):
    """(int_0^inf cap_{p,a}(M_t)^{q/p} d(t^q))^{1/q} for a radial decreasing u.

    The level sets M_t = {u >= t} are balls, so their capacities are closed form.
    """
    h = _as_hs(h)
    if q < h.p:
        raise DomainError(f"need q >= p, got q={q!r}, p={h.p!r}")
    unit = ball_capacity(CapacityQuery(h.p, h.a, h.n, 1.0))
    expo = (h.n - h.p - h.a) * q / h.p

    def level(t):
        r = level_radius(u, t)
        return unit ** (q / h.p) * r**expo

    return layer_cake(u, level, q, tol).value


def capacitary_rhs_radial(u, h, q, tol=1e-10):
    """A_{p,q} (int |grad u|^p |x|^{-a})^{1/p} for a radial u."""
    h = _as_hs(h)
    return capacitary_Apq(h.p, q) * radial_gradient_energy(u, h.p, h.a, tol) ** (1.0 / h.p)


__all__ = [
    "CapacityQuery", "HSParams", "IsocapResult", "ball_capacity", "capacitary_lhs_radial",
    "capacitary_rhs_radial", "isocap_check", "mu_b_ball", "radial_capacity_discrete",
]
