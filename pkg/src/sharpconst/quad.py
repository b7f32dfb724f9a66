"""Adaptive numerical integration on boxes, balls, half-spaces and R^n.

The workhorse is a tensorised Gauss-Kronrod 7/15 pair: the Kronrod
tensor rule gives the value, the embedded Gauss tensor rule (a subset of
the same nodes) gives the error estimate, and the box with the largest
estimate is split until the requested tolerance is met.
"""

from dataclasses import dataclass, field
import heapq
import itertools
import math
from typing import Callable, Optional, Sequence

import numpy as np

from .constants import sphere_area
from .errors import DomainError, QuadratureError

# Kronrod 15-point abscissae on [-1, 1]; odd indices are the Gauss 7 nodes.
_XK = np.array([
    -0.991455371120812639206854697526329,
    -0.949107912342758524526189684047851,
    -0.864864423359769072789712788640926,
    -0.741531185599394439863864773280788,
    -0.586087235467691130294144845693013,
    -0.405845151377397166906606412076961,
    -0.207784955007898467600689403773245,
    0.0,
    0.207784955007898467600689403773245,
    0.405845151377397166906606412076961,
    0.586087235467691130294144845693013,
    0.741531185599394439863864773280788,
    0.864864423359769072789712788640926,
    0.949107912342758524526189684047851,
    0.991455371120812639206854697526329,
])
_WK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
    0.204432940075298892414161999234649,
    0.190350578064785409913256402421014,
    0.169004726639267902826583426598550,
    0.140653259715525918745189590510238,
    0.104790010322250183839876322541518,
    0.063092092629978553290700663189204,
    0.022935322010529224963732008058970,
])
_WG = np.zeros(15)
_WG[1::2] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
    0.381830050505118944950369775488975,
    0.279705391489276667901467771423780,
    0.129484966168869693270611432679082,
]


@dataclass(frozen=True)
class QuadResult:
    value: float
    abs_error_estimate: float
    evaluations: int


@dataclass(frozen=True)
class Integrand:
    """An integrand together with the coordinates it is written in.

    ``evaluator`` receives an array of points of shape (N, d) in the
    coordinate system's own variables and returns N values.  Supported
    systems (with the Jacobian applied here, not by the caller):

    - ``cartesian``: points are x in the box [lo, hi]
    - ``radial``: points are r (d = 1); weight |S^{n-1}| r^{n-1}
    - ``polar``: points are (r, phi) in the plane, evaluator gets
      cartesian (x1, x2); weight r
    - ``cylindrical``: points are (x', r) with r the distance to an axis
      in R^{d+1}; weight 2 pi r (integrand independent of the angle)

    ``hi`` may contain ``inf`` for radial and cartesian integrals; such
    axes are mapped to [0, 1) by t -> t/(1-t).
    ``known_singularities`` lists points in these variables near which
    the initial subdivision is graded geometrically.
    """

    evaluator: Callable[[np.ndarray], np.ndarray]
    lo: Sequence[float]
    hi: Sequence[float]
    coordinate_system: str = "cartesian"
    n: Optional[int] = None
    known_singularities: Sequence[Sequence[float]] = field(default_factory=tuple)


def _tensor_rule(d):
    nodes = np.array(list(itertools.product(_XK, repeat=d)))
    wk = np.prod(np.array(list(itertools.product(_WK, repeat=d))), axis=1)
    wg = np.prod(np.array(list(itertools.product(_WG, repeat=d))), axis=1)
    return nodes, wk, wg


_RULES = {}


def _rule(d):
    if d not in _RULES:
        _RULES[d] = _tensor_rule(d)
    return _RULES[d]


def _graded_breaks(lo, hi, points, levels=40, ratio=0.5):
    """Breakpoints in [lo, hi] accumulating geometrically at given points."""
    br = {lo, hi}
    for p in points:
        if not (lo <= p <= hi):
            continue
        br.add(p)
        for side in (lo, hi):
            span = side - p
            if span == 0:
                continue
            for k in range(1, levels + 1):
                br.add(p + span * ratio**k)
    return sorted(br)


def cubature(f, lo, hi, tol=1e-10, abs_tol=0.0, max_evals=2_000_000, breaks=None):
    """Adaptive tensor G7/K15 cubature of vectorised f over a finite box.

    ``breaks`` optionally gives, per axis, an initial list of breakpoints.
    Returns a QuadResult; raises QuadratureError when the budget runs out.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    d = lo.size
    nodes, wk, wg = _rule(d)
    npts = nodes.shape[0]
    if breaks is None:
        breaks = [[lo[i], hi[i]] for i in range(d)]

    def evaluate(boxes):
        # boxes: (B, 2, d)
        c = 0.5 * (boxes[:, 0] + boxes[:, 1])
        h = 0.5 * (boxes[:, 1] - boxes[:, 0])
        pts = c[:, None, :] + h[:, None, :] * nodes[None, :, :]
        vals = np.asarray(f(pts.reshape(-1, d)), dtype=float).reshape(len(boxes), npts)
        if not np.all(np.isfinite(vals)):
            raise QuadratureError("integrand returned non-finite values")
        vol = np.prod(h, axis=1)
        k = vol * (vals @ wk)
        g = vol * (vals @ wg)
        return k, np.abs(k - g)

    cells = [np.array(list(zip(*corner))) for corner in itertools.product(
        *[list(zip(b[:-1], b[1:])) for b in breaks])]
    boxes = np.array([[cell[0], cell[1]] for cell in cells])
    vals, errs = evaluate(boxes)
    evals = len(boxes) * npts
    # heap of (-err, tiebreak, box, value)
    heap = []
    counter = itertools.count()
    for b, v, e in zip(boxes, vals, errs):
        heapq.heappush(heap, (-e, next(counter), b, v))
    total_err = float(np.sum(errs))
    while True:
        value = math.fsum(item[3] for item in heap)
        target = max(abs_tol, tol * abs(value))
        if total_err <= target:
            return QuadResult(value, total_err, evals)
        if evals >= max_evals:
            raise QuadratureError(
                f"cubature budget of {max_evals} evaluations exhausted "
                f"(estimate {value:.16g}, error {total_err:.3g})",
                best_estimate=value, error_estimate=total_err)
        # split the worst boxes together so evaluation stays vectorised
        batch = []
        removed = 0.0
        while heap and (not batch or (removed < 0.5 * (total_err - target) and len(batch) < 256)):
            e, _, b, v = heapq.heappop(heap)
            removed += -e
            batch.append(b)
        children = []
        for b in batch:
            mid = 0.5 * (b[0] + b[1])
            for corner in itertools.product((0, 1), repeat=d):
                lo_c = np.where(np.array(corner) == 0, b[0], mid)
                hi_c = np.where(np.array(corner) == 0, mid, b[1])
                children.append([lo_c, hi_c])
        children = np.array(children)
        cv, ce = evaluate(children)
        evals += len(children) * npts
        for b, v, e in zip(children, cv, ce):
            heapq.heappush(heap, (-e, next(counter), b, v))
        total_err = float(sum(-item[0] for item in heap))


def integrate_1d(f, a, b, tol=1e-10, abs_tol=0.0, points=(), max_evals=500_000):
    """Adaptive G7/K15 for a vectorised f on [a, b]; b may be +inf."""
    if math.isinf(b):
        if math.isinf(a):
            raise DomainError("only the upper limit may be infinite")

        def g(t):
            t = np.asarray(t, dtype=float)
            x = a + t / (1.0 - t)
            return np.asarray(f(x), dtype=float) / (1.0 - t) ** 2

        mapped = [(p - a) / (1.0 + p - a) for p in points if p >= a]
        return integrate_1d(g, 0.0, 1.0, tol, abs_tol, tuple(mapped) + (1.0,), max_evals)
    br = _graded_breaks(a, b, points)
    return cubature(lambda x: f(x[:, 0]), [a], [b], tol, abs_tol, max_evals,
                    breaks=[br])


def integrate(f, tol=1e-10, abs_tol=0.0, max_evals=2_000_000):
    """Integrate an :class:`Integrand` to relative tolerance ``tol``."""
    system = f.coordinate_system
    lo = np.asarray(f.lo, dtype=float)
    hi = np.asarray(f.hi, dtype=float)
    d = lo.size
    sing = [np.asarray(s, dtype=float) for s in f.known_singularities]

    if system == "radial":
        if f.n is None:
            raise DomainError("radial integrand needs the dimension n")
        area = sphere_area(f.n)
        n = f.n
        pts = [float(s[0]) for s in sing]
        res = integrate_1d(
            lambda r: area * np.asarray(f.evaluator(r[:, None]), dtype=float) * r ** (n - 1),
            lo[0], hi[0], tol, abs_tol, pts, max_evals)
        return res
    if system == "polar":
        if d != 2:
            raise DomainError("polar coordinates are (r, phi)")

        def g(p):
            r, phi = p[:, 0], p[:, 1]
            x = np.stack([r * np.cos(phi), r * np.sin(phi)], axis=1)
            return np.asarray(f.evaluator(x), dtype=float) * r
    elif system == "cylindrical":

        def g(p):
            return 2.0 * math.pi * np.asarray(f.evaluator(p), dtype=float) * p[:, -1]
    elif system == "cartesian":

        def g(p):
            return np.asarray(f.evaluator(p), dtype=float)
    else:
        raise DomainError(f"unknown coordinate system {system!r}")

    # map infinite axes to [0, 1)
    inf_axes = [i for i in range(d) if math.isinf(hi[i])]
    if any(math.isinf(v) for v in lo):
        raise DomainError("lower limits must be finite")
    if inf_axes:
        base = g
        lo_i = lo.copy()

        def g(p):
            p = p.copy()
            jac = np.ones(len(p))
            for i in inf_axes:
                t = p[:, i]
                p[:, i] = lo_i[i] + t / (1.0 - t)
                jac = jac / (1.0 - t) ** 2
            return base(p) * jac

        hi = hi.copy()
        for i in inf_axes:
            hi[i] = lo[i] + 1.0
    breaks = []
    for i in range(d):
        axis_pts = [float(s[i]) for s in sing if np.isfinite(s[i])]
        if i in inf_axes:
            axis_pts = [lo[i] + (q - lo[i]) / (1.0 + q - lo[i]) for q in axis_pts] + [hi[i]]
        breaks.append(_graded_breaks(lo[i], hi[i], axis_pts, levels=20))
    return cubature(g, lo, hi, tol, abs_tol, max_evals, breaks=breaks)


def gauss_legendre_tensor(f, lo, hi, order):
    """Fixed tensor Gauss-Legendre rule; used where adaptivity is too costly."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    d = lo.size
    orders = [order] * d if np.isscalar(order) else list(order)
    axes = []
    weights = []
    for i in range(d):
        x, w = np.polynomial.legendre.leggauss(orders[i])
        axes.append(0.5 * (hi[i] + lo[i]) + 0.5 * (hi[i] - lo[i]) * x)
        weights.append(0.5 * (hi[i] - lo[i]) * w)
    grids = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    wgrid = np.meshgrid(*weights, indexing="ij")
    w = np.prod(np.stack([g.ravel() for g in wgrid], axis=1), axis=1)
    return float(np.sum(w * np.asarray(f(pts), dtype=float)))


# ---------------------------------------------------------------------------
# radial level sets


@dataclass(frozen=True)
class RadialFunction:
    """A radial, nonincreasing function u(x) = profile(|x|) on R^n.

    ``derivative`` is d profile/dr; ``support`` is a radius beyond which
    the profile is zero (``inf`` for rapidly decaying profiles).
    """

    profile: Callable[[np.ndarray], np.ndarray]
    n: int
    derivative: Optional[Callable[[np.ndarray], np.ndarray]] = None
    support: float = math.inf

    @property
    def max_value(self):
        return float(np.asarray(self.profile(np.array([0.0])))[0])

    def scaled(self, c):
        return RadialFunction(lambda r: c * self.profile(r), self.n,
                              None if self.derivative is None else (lambda r: c * self.derivative(r)),
                              self.support)

    def dilated(self, s):
        """x -> u(s x)."""
        return RadialFunction(lambda r: self.profile(s * r), self.n,
                              None if self.derivative is None else (lambda r: s * self.derivative(s * r)),
                              self.support / s)


def _as_radial(u):
    if isinstance(u, RadialFunction):
        return u
    radial = getattr(u, "as_radial", None)
    if radial is None:
        raise DomainError("level-set operations need a radial nonincreasing field")
    return radial()


def level_radius(u, t, tol=1e-12):
    """Radius of the ball {u >= t} (vectorised over t)."""
    u = _as_radial(u)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    top = u.max_value
    lo = np.zeros_like(t)
    if math.isfinite(u.support):
        hi = np.full_like(t, u.support)
    else:
        hi = np.ones_like(t)
        for _ in range(2000):
            mask = u.profile(hi) >= t
            if not np.any(mask):
                break
            hi = np.where(mask, 2.0 * hi, hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        inside = u.profile(mid) >= t
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
        if np.all(hi - lo <= tol * np.maximum(1.0, hi)):
            break
    r = 0.5 * (lo + hi)
    return np.where(t > top, 0.0, r)


def mu_b_of_radius(n, b, r):
    if b >= n:
        raise DomainError(f"mu_b needs b < n (b={b}, n={n})")
    return sphere_area(n) * np.asarray(r, dtype=float) ** (n - b) / (n - b)


def mu_b_measure(u, t, b):
    """mu_b({u >= t}) = int_{u >= t} |x|^{-b} dx for radial nonincreasing u."""
    u = _as_radial(u)
    if t <= 0:
        raise DomainError("level t must be positive")
    if t > u.max_value:
        return 0.0
    return float(mu_b_of_radius(u.n, b, level_radius(u, t))[0])


def layer_cake(u, exponent_of_level, q, tol=1e-9):
    """(int_0^inf F(t)^... d(t^q))^{1/q} with F = exponent_of_level(t) already raised.

    ``exponent_of_level`` maps an array of levels t to the integrand
    before the d(t^q) measure; the substitution s = t^q is applied here.
    """
    u = _as_radial(u)
    top = u.max_value
    if top <= 0:
        return QuadResult(0.0, 0.0, 0)
    smax = top**q

    def g(s):
        t = np.asarray(s, dtype=float) ** (1.0 / q)
        return exponent_of_level(t)

    res = integrate_1d(g, 0.0, smax, tol, 0.0, points=(0.0, smax))
    val = res.value ** (1.0 / q)
    err = val * res.abs_error_estimate / (q * res.value) if res.value > 0 else 0.0
    return QuadResult(val, err, res.evaluations)


def lorentz_quasinorm(u, tau, q, b, tol=1e-9, with_error=False):
    """Quasi-norm of u in the Lorentz space L_{tau,q}(mu_b)."""
    u = _as_radial(u)
    if tau <= 0 or q <= 0:
        raise DomainError("tau and q must be positive")
    n = u.n

    def level(t):
        return mu_b_of_radius(n, b, level_radius(u, t)) ** (q / tau)

    res = layer_cake(u, level, q, tol)
    return res if with_error else res.value


def weighted_lq_norm(u, q, b, tol=1e-10, with_error=False):
    """(int |u|^q |x|^{-b} dx)^{1/q} for a radial function, by radial quadrature."""
    u = _as_radial(u)
    n = u.n
    hi = u.support

    res = integrate(Integrand(lambda r: np.abs(u.profile(r[:, 0])) ** q * r[:, 0] ** (-b),
                              [0.0], [hi], "radial", n=n), tol)
    val = res.value ** (1.0 / q)
    if with_error:
        err = val * res.abs_error_estimate / (q * res.value) if res.value > 0 else 0.0
        return QuadResult(val, err, res.evaluations)
    return val


def radial_gradient_energy(u, p, a, tol=1e-10, with_error=False):
    """int |grad u|^p |x|^{-a} dx for a radial function with known derivative."""
    u = _as_radial(u)
    if u.derivative is None:
        raise DomainError("radial energy needs the profile derivative")
    res = integrate(Integrand(lambda r: np.abs(u.derivative(r[:, 0])) ** p * r[:, 0] ** (-a),
                              [0.0], [u.support], "radial", n=u.n), tol)
    return res if with_error else res.value
