"""Weighted Sturm-Liouville eigenproblems behind the variational constants.

A problem is the Rayleigh quotient

    (int leading |y'|^2 + potential |y|^2) / (int rhs |y|^2)

on an interval, minimised over smooth y with natural, Dirichlet or
periodic end conditions.  The smallest eigenvalue is computed with
continuous piecewise-linear elements on a mesh graded geometrically
towards the endpoints (and towards interior points where a weight
degenerates).  The generalized tridiagonal pencil is bracketed by
bisection on the Sylvester inertia count, the eigenvector is obtained by
shifted inverse iteration, and the eigenvalue is Richardson-extrapolated
over nested refinements assuming O(h^2) convergence.
"""

from dataclasses import dataclass, field
import math
import time
import warnings
from typing import Callable, Optional

import numpy as np
import scipy.integrate as integrate
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import (ConstructionError, DomainError, NoFiniteConstantError,
                     ToleranceNotMetError)

# endpoint distance used only when a weight must be evaluated "at" an endpoint
EDGE_EPS = 1e-12
# grading: element ratio 0.75 at the coarsest level
BASE_STEP = -math.log(0.75)
# outer edge of the log-graded zone at scale-critical points, in -log(distance)
LOG_ZONE_LIMIT = 1e8
# -log(distance) beyond which even a local evaluator hands over to the model
LOCAL_V_LIMIT = 690.0

_GL16 = np.polynomial.legendre.leggauss(16)


# ---------------------------------------------------------------------------
# weights


@dataclass(frozen=True)
class Singularity:
    """Local model c * d^alpha * (-log d)^beta, d the distance to the point."""

    alpha: float = 0.0
    beta: float = 0.0

    @property
    def is_regular(self):
        return self.alpha == 0.0 and self.beta == 0.0

    @property
    def integrable(self):
        return self.integrable_against(0.0)

    def integrable_against(self, power_of_d):
        """Whether d**power_of_d times this singularity is integrable at d = 0."""
        a = self.alpha + power_of_d
        return a > -1.0 or (a == -1.0 and self.beta < -1.0)

    def model(self, d):
        return d**self.alpha * (-math.log(d)) ** self.beta

    def describe(self):
        if self.is_regular:
            return "regular"
        if self.beta == 0.0:
            return f"power({self.alpha:g})"
        return f"power_log({self.alpha:g}, {self.beta:g})"


REGULAR = Singularity()


def power(alpha):
    return Singularity(float(alpha), 0.0)


def power_log(alpha, beta):
    return Singularity(float(alpha), float(beta))


@dataclass(frozen=True)
class WeightExpr:
    """A nonnegative weight on an interval with declared local behaviour.

    ``singular_points`` maps a point (an endpoint, or an interior point of
    a periodic problem) to its :class:`Singularity`; unlisted points are
    regular.  ``local(point, side, d)``, when given, evaluates the weight at
    point + side * d without forming that sum, which keeps
    full relative accuracy for d far below the spacing of floats at the point.
    ``log_local(point, side, v)``, when given, is log w at distance
    d = e^{-v}; it is used where d underflows, in place of the model.
    ``name`` is used in reports.
    """

    evaluator: Callable[[np.ndarray], np.ndarray]
    singular_points: dict = field(default_factory=dict)
    name: str = "w"
    zero: bool = False
    local: Optional[Callable] = None
    log_local: Optional[Callable] = None

    def __call__(self, t):
        return np.asarray(self.evaluator(np.asarray(t, dtype=float)), dtype=float)

    def singularity_at(self, point):
        for p, s in self.singular_points.items():
            if abs(p - point) <= 1e-12 * max(1.0, abs(point)):
                return s
        return REGULAR

    def self_test(self, lo, hi, points):
        """Check nonnegativity and that declared singularities match."""
        probe = np.linspace(lo, hi, 203)[1:-1]
        gap = 1e-9 * (hi - lo)
        probe = probe[np.all(np.abs(probe[:, None] - np.asarray(points)[None, :]) > gap, axis=1)]
        vals = self(probe)
        if np.any(vals < 0) or not np.all(np.isfinite(vals)):
            raise ConstructionError(f"weight {self.name} must be finite and nonnegative inside ({lo}, {hi})")
        for pt in points:
            sing = self.singularity_at(pt)
            for side in (1.0, -1.0):
                d = np.array([1e-6, 1e-8, 1e-10])
                x = pt + side * d
                if side > 0 and pt >= hi or side < 0 and pt <= lo:
                    continue
                w = self(x)
                if sing.is_regular:
                    if not np.all(np.isfinite(w)):
                        raise ConstructionError(f"weight {self.name} is not finite near {pt}")
                    continue
                model = np.array([sing.model(v) for v in d])
                ratio = w / model
                if np.any(ratio <= 0) or ratio.max() > 2.0 * ratio.min():
                    raise ConstructionError(
                        f"weight {self.name} does not behave like {sing.describe()} near {pt}")


def constant_weight(c, name=None):
    c = float(c)
    return WeightExpr(lambda t: np.full_like(np.asarray(t, dtype=float), c),
                      name=name or f"{c:g}", zero=(c == 0.0))


# ---------------------------------------------------------------------------
# problems


@dataclass(frozen=True)
class SLProblem:
    """Weighted Sturm-Liouville variational problem.

    ``breakpoints`` are interior points where some weight degenerates; the
    mesh is graded towards them as towards the endpoints.  ``grading_depth``
    is the number of graded layers (at element ratio 0.75) next to each
    endpoint or breakpoint.
    """

    interval: tuple
    leading: WeightExpr
    potential: WeightExpr
    rhs: WeightExpr
    boundary: str = "natural"
    breakpoints: tuple = ()
    grading_depth: int = 40
    name: str = "custom"

    def __post_init__(self):
        lo, hi = self.interval
        if not lo < hi:
            raise ConstructionError("interval must satisfy lo < hi")
        if self.boundary not in ("natural", "dirichlet", "periodic"):
            raise ConstructionError(f"unknown boundary kind {self.boundary!r}")
        pts = self.nodes_of_interest
        for w in (self.leading, self.potential, self.rhs):
            w.self_test(lo, hi, pts)
        for w, role in ((self.potential, "potential"), (self.rhs, "rhs"), (self.leading, "leading")):
            for p in pts:
                s = w.singularity_at(p)
                # a Dirichlet end makes trial functions vanish like d
                pinned = self.boundary == "dirichlet" and p in self.interval and role != "leading"
                if not s.integrable_against(2.0 if pinned else 0.0):
                    if role == "rhs":
                        raise NoFiniteConstantError(
                            f"rhs weight {w.name} is not integrable near {p} "
                            f"({s.describe()}): no positive constant exists")
                    raise ConstructionError(f"{role} weight {w.name} is not integrable near {p}")
        if self.rhs.zero:
            raise ConstructionError("rhs weight vanishes identically")

    @property
    def nodes_of_interest(self):
        lo, hi = self.interval
        return (lo,) + tuple(self.breakpoints) + (hi,)

    def _renamed(self, name):
        return SLProblem(self.interval, self.leading, self.potential, self.rhs, self.boundary,
                         self.breakpoints, self.grading_depth, name)

    def describe(self):
        return {
            "name": self.name,
            "interval": list(self.interval),
            "leading": self.leading.name,
            "potential": self.potential.name,
            "rhs": self.rhs.name,
            "boundary": self.boundary,
            "breakpoints": list(self.breakpoints),
            "grading_depth": self.grading_depth,
        }


@dataclass(frozen=True)
class EigenResult:
    lambda_: float
    nodes: np.ndarray
    eigenfunction: np.ndarray
    mesh_levels: list
    error_estimate: float
    seconds: float = 0.0

    def to_dict(self):
        return {
            "lambda": self.lambda_,
            "error_estimate": self.error_estimate,
            "mesh_levels": [{"elements": int(n), "lambda": float(v)} for n, v in self.mesh_levels],
            "seconds": self.seconds,
        }


# ---------------------------------------------------------------------------
# mesh and assembly


def _is_scale_critical(problem, point):
    """True when the rhs (or potential) is as singular as leading/d^2 at ``point``.

    There the eigenfunction is a power of log(1/d), so elements linear in
    the distance itself cannot resolve it.
    """
    lead = problem.leading.singularity_at(point).alpha
    rest = min(problem.rhs.singularity_at(point).alpha,
               problem.potential.singularity_at(point).alpha)
    return rest - lead <= -2.0 + 1e-12


@dataclass
class _Mesh:
    """Elements in global order; element e joins nodes e and e+1.

    Linear elements are affine in x.  Near scale-critical points the
    elements are affine in v = -log(distance) and the last node carries a
    tail on which the trial function is constant (or zero, under Dirichlet).
    """

    nodes: np.ndarray
    lin_index: np.ndarray
    lin_x0: np.ndarray
    lin_x1: np.ndarray
    log_index: np.ndarray
    log_anchor: np.ndarray
    log_side: np.ndarray
    log_v0: np.ndarray
    log_v1: np.ndarray
    tails: list

    @property
    def elements(self):
        return len(self.nodes) - 1


def graded_mesh(problem, step):
    """Nested graded mesh: logistic map of a uniform grid of spacing ``step``.

    On each piece (a, b) between consecutive points of interest the nodes
    are a + (b - a) / (1 + exp(-xi)) for xi on a uniform grid in [-L, L],
    plus the ends themselves.  At a scale-critical end the last graded
    element is replaced by elements uniform in log(v), v = -log(distance),
    out to v = LOG_ZONE_LIMIT.  Halving ``step`` refines the mesh nestedly
    while the extent of the grading stays fixed.
    """
    pts = problem.nodes_of_interest
    for p in pts[1:-1]:
        if _is_scale_critical(problem, p):
            raise ConstructionError(f"interior point {p} is scale-critical; split the problem there")
    half = problem.grading_depth * BASE_STEP
    m = int(round(2.0 * half / step))
    xi = np.linspace(-half, half, m + 1)
    nodes = []
    lin = ([], [], [])
    logs = ([], [], [], [], [])
    tails = []

    def add_lin(x):
        lin[0].append(len(nodes) - 1)
        lin[1].append(nodes[-1])
        lin[2].append(x)
        nodes.append(x)

    def add_log(anchor, side, v_from, v_to):
        logs[0].append(len(nodes) - 1)
        logs[1].append(anchor)
        logs[2].append(side)
        logs[3].append(v_from)
        logs[4].append(v_to)
        nodes.append(anchor + side * math.exp(-v_to))

    def log_zone(a, b):
        # v-nodes from the junction with the logistic grid outwards
        v_join = -math.log((b - a) / (1.0 + math.exp(half)))
        span = math.ceil(math.log(LOG_ZONE_LIMIT / v_join) / BASE_STEP) * BASE_STEP
        k = int(round(span / step))
        return v_join * np.exp(np.linspace(0.0, span, k + 1))

    for a, b in zip(pts[:-1], pts[1:]):
        inner = a + (b - a) / (1.0 + np.exp(-xi))
        if not nodes:
            if _is_scale_critical(problem, a):
                v = log_zone(a, b)[::-1]
                nodes.append(a + math.exp(-v[0]))
                tails.append((0, a, 1.0, float(v[0])))
                for j in range(len(v) - 1):
                    add_log(a, 1.0, v[j], v[j + 1])
                # the last log node is the first logistic node
                inner = inner[1:]
            else:
                nodes.append(a)
        for x in inner:
            add_lin(float(x))
        if b == pts[-1] and _is_scale_critical(problem, b):
            v = log_zone(a, b)
            for j in range(len(v) - 1):
                add_log(b, -1.0, v[j], v[j + 1])
            tails.append((len(nodes) - 1, b, -1.0, float(v[-1])))
        else:
            add_lin(b)
    return _finish_mesh(nodes, lin, logs, tails)


def _finish_mesh(nodes, lin, logs, tails):
    return _Mesh(np.array(nodes), np.array(lin[0], dtype=int), np.array(lin[1]),
                 np.array(lin[2]), np.array(logs[0], dtype=int), np.array(logs[1]),
                 np.array(logs[2]), np.array(logs[3]), np.array(logs[4]), tails)


def _element_moments(w, x0, x1):
    """int_e w, int_e w N0^2, int_e w N0 N1, int_e w N1^2 for all elements."""
    h = x1 - x0
    t, wt = _GL16
    # nodes mapped to [0, 1]
    s = 0.5 * (t + 1.0)
    x = x0[:, None] + h[:, None] * s[None, :]
    vals = w(x.ravel()).reshape(x.shape) * (0.5 * wt)[None, :] * h[:, None]
    n0, n1 = 1.0 - s, s
    return (vals.sum(1), (vals * n0 * n0).sum(1), (vals * n0 * n1).sum(1),
            (vals * n1 * n1).sum(1))


def _end_element_moments(w, a, b, singular_at_a, skip=()):
    """Element moments with the endpoint singularity resolved.

    With d the distance to the singular end, the substitution d = h e^{-u}
    turns the singularity into a decaying tail on u in (0, inf).  Moments
    listed in ``skip`` (those of a basis function removed by a Dirichlet
    condition, possibly divergent) are returned as zero.
    """
    h = b - a
    p = a if singular_at_a else b
    side = 1.0 if singular_at_a else -1.0
    log_h = math.log(h)
    out = []
    for k in range(4):
        if k in skip:
            out.append(0.0)
            continue

        def f(u, k=k):
            s = math.exp(-u)
            if not singular_at_a:
                s = 1.0 - s
            basis = (1.0, (1.0 - s) ** 2, (1.0 - s) * s, s * s)[k]
            return float(_weight_in_v(w, p, side, [u - log_h], 1.0)[0]) * basis

        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, _ = integrate.quad(f, 0.0, math.inf, epsabs=0.0, epsrel=1e-11, limit=200)
        out.append(val)
    return out


def _weight_in_v(w, anchor, side, v, extra):
    """w(anchor + side d) * d**extra at d = exp(-v), overflow-safe.

    Where d underflows the weight is continued by ``log_local`` when given,
    else by its declared local model.
    """
    v = np.asarray(v, dtype=float)
    sing = w.singularity_at(anchor)
    if w.local is not None:
        v0 = LOCAL_V_LIMIT
        evaluate = lambda d: np.asarray(w.local(anchor, side, d), dtype=float)
    else:
        v0 = -math.log(EDGE_EPS * max(1.0, abs(anchor)))
        evaluate = lambda d: w(anchor + side * d)
    out = np.empty_like(v)
    near = v > v0
    far = ~near
    if np.any(far):
        d = np.exp(-v[far])
        out[far] = evaluate(d) * d**extra
    if np.any(near) and w.log_local is not None:
        vn = v[near]
        out[near] = np.exp(np.asarray(w.log_local(anchor, side, vn), dtype=float) - extra * vn)
    elif np.any(near):
        w0 = float(evaluate(np.array([math.exp(-v0)]))[0])
        if w0 == 0.0:
            out[near] = 0.0
        else:
            logc = math.log(w0) + sing.alpha * v0 - sing.beta * math.log(v0)
            vn = v[near]
            out[near] = np.exp(logc - (sing.alpha + extra) * vn + sing.beta * np.log(vn))
    return out


def _log_element_moments(w, mesh, extra):
    """Moments of w d**extra against v-linear basis functions on log elements."""
    t, wt = _GL16
    s = 0.5 * (t + 1.0)
    v0, v1 = mesh.log_v0, mesh.log_v1
    length = np.abs(v1 - v0)
    v = v0[:, None] + (v1 - v0)[:, None] * s[None, :]
    vals = np.empty_like(v)
    for i in range(len(v0)):
        vals[i] = _weight_in_v(w, mesh.log_anchor[i], mesh.log_side[i], v[i], extra)
    vals = vals * (0.5 * wt)[None, :] * length[:, None]
    n0, n1 = 1.0 - s, s
    return (vals.sum(1), (vals * n0 * n0).sum(1), (vals * n0 * n1).sum(1),
            (vals * n1 * n1).sum(1)), length


def _tail_integral(w, anchor, side, v_start):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(lambda v: float(_weight_in_v(w, anchor, side, [v], 1.0)[0]),
                                v_start, math.inf, epsabs=0.0, epsrel=1e-11, limit=200)
    return val


def _assemble(problem, mesh):
    n = len(mesh.nodes)
    kd = np.zeros(n)
    ko = np.zeros(n - 1)
    md = np.zeros(n)
    mo = np.zeros(n - 1)

    def scatter(idx, moments, diag, off, sign=1.0):
        np.add.at(diag, idx, sign * moments[1])
        np.add.at(diag, idx + 1, sign * moments[3])
        np.add.at(off, idx, sign * moments[2])

    # linear elements
    x0, x1, idx = mesh.lin_x0, mesh.lin_x1, mesh.lin_index
    if len(idx):
        h = x1 - x0
        lead = _element_moments(problem.leading, x0, x1)[0].copy()
        pot = None if problem.potential.zero else [m.copy() for m in _element_moments(problem.potential, x0, x1)]
        mas = [m.copy() for m in _element_moments(problem.rhs, x0, x1)]
        # elements touching a singular point: resolve the singularity adaptively
        for p in problem.nodes_of_interest:
            tol = 1e-15 * max(1.0, abs(p))
            for e in np.nonzero((np.abs(x0 - p) < tol) | (np.abs(x1 - p) < tol))[0]:
                at_a = abs(x0[e] - p) < tol
                skip = ()
                if problem.boundary == "dirichlet" and p in problem.interval:
                    # the endpoint basis function is removed
                    skip = (0, 1, 2) if at_a else (0, 2, 3)
                for wexpr, target in ((problem.rhs, mas), (problem.potential, pot)):
                    if target is None or wexpr.singularity_at(p).is_regular:
                        continue
                    vals = _end_element_moments(wexpr, x0[e], x1[e], at_a, skip)
                    for k in range(4):
                        target[k][e] = vals[k]
                if not problem.leading.singularity_at(p).is_regular:
                    lead[e] = _end_element_moments(problem.leading, x0[e], x1[e], at_a)[0]
        stiff = lead / h**2
        scatter(idx, (None, stiff, -stiff, stiff), kd, ko)
        if pot is not None:
            scatter(idx, pot, kd, ko)
        scatter(idx, mas, md, mo)
    # log elements
    idx = mesh.log_index
    if len(idx):
        lead, length = _log_element_moments(problem.leading, mesh, -1.0)
        stiff = lead[0] / length**2
        scatter(idx, (None, stiff, -stiff, stiff), kd, ko)
        if not problem.potential.zero:
            scatter(idx, _log_element_moments(problem.potential, mesh, 1.0)[0], kd, ko)
        scatter(idx, _log_element_moments(problem.rhs, mesh, 1.0)[0], md, mo)
    # tails carry a constant trial function
    for node, anchor, side, v_start in mesh.tails:
        md[node] += _tail_integral(problem.rhs, anchor, side, v_start)
        if not problem.potential.zero:
            kd[node] += _tail_integral(problem.potential, anchor, side, v_start)
    return kd, ko, md, mo


def _apply_boundary(problem, kd, ko, md, mo):
    """Return (diag, off, corner) arrays for K and M after the end conditions."""
    if problem.boundary == "natural":
        return (kd, ko, 0.0), (md, mo, 0.0)
    if problem.boundary == "dirichlet":
        return (kd[1:-1], ko[1:-1], 0.0), (md[1:-1], mo[1:-1], 0.0)
    # periodic: identify the last node with the first
    kd2, md2 = kd[:-1].copy(), md[:-1].copy()
    kd2[0] += kd[-1]
    md2[0] += md[-1]
    return (kd2, ko[:-1].copy(), ko[-1]), (md2, mo[:-1].copy(), mo[-1])


def _count_below(K, M, sigma):
    """Number of eigenvalues of the pencil (K, M) below sigma (Sylvester inertia)."""
    kd, ko, kc = K
    md, mo, mc = M
    d = (kd - sigma * md).tolist()
    e = (ko - sigma * mo).tolist()
    c = kc - sigma * mc
    n = len(d)
    tiny = 1e-300
    if c == 0.0:
        count = 0
        q = d[0]
        if q == 0.0:
            q = tiny
        if q < 0:
            count += 1
        for i in range(1, n):
            q = d[i] - e[i - 1] * e[i - 1] / q
            if q == 0.0:
                q = tiny
            if q < 0:
                count += 1
        return count
    # cyclic: LDL of the leading (n-1) block, then the Schur complement of the
    # last row, solving A y = b in the same sweep
    m = n - 1
    qs = [0.0] * m
    count = 0
    q = d[0]
    qs[0] = q if q != 0.0 else tiny
    if qs[0] < 0:
        count += 1
    for i in range(1, m):
        q = d[i] - e[i - 1] * e[i - 1] / qs[i - 1]
        qs[i] = q if q != 0.0 else tiny
        if qs[i] < 0:
            count += 1
    b = [0.0] * m
    b[0] += c
    b[m - 1] += e[m - 1]
    # forward solve L z = b, with L unit lower bidiagonal l_i = e_{i-1}/q_{i-1}
    z = b[:]
    for i in range(1, m):
        z[i] -= e[i - 1] / qs[i - 1] * z[i - 1]
    schur = d[n - 1] - sum(zi * zi / qi for zi, qi in zip(z, qs))
    if schur < 0:
        count += 1
    return count


def _sparse(P):
    dg, off, corner = P
    n = len(dg)
    mat = sp.diags([off, dg, off], [-1, 0, 1], shape=(n, n), format="lil")
    if corner != 0.0:
        mat[0, n - 1] += corner
        mat[n - 1, 0] += corner
    return mat.tocsc()


def _smallest_on_mesh(problem, mesh):
    K, M = _apply_boundary(problem, *_assemble(problem, mesh))
    Ks, Ms = _sparse(K), _sparse(M)
    n = Ks.shape[0]
    ones = np.ones(n)
    upper = float(ones @ (Ks @ ones)) / float(ones @ (Ms @ ones))
    lower = 0.0
    if _count_below(K, M, lower) > 0:
        raise DomainError("pencil has a negative eigenvalue; weights must be nonnegative")
    while _count_below(K, M, upper) == 0:
        upper *= 2.0
    for _ in range(200):
        mid = 0.5 * (lower + upper)
        if _count_below(K, M, mid) >= 1:
            upper = mid
        else:
            lower = mid
        if upper - lower <= 1e-7 * upper:
            break
    # shifted inverse iteration from just below the smallest eigenvalue
    shift = lower - 1e-3 * (upper - lower) - 1e-14
    lu = spla.splu((Ks - shift * Ms).tocsc())
    x = np.ones(n)
    lam = upper
    for _ in range(100):
        y = lu.solve(Ms @ x)
        y /= math.sqrt(float(y @ (Ms @ y)))
        new = float(y @ (Ks @ y))
        x = y
        if abs(new - lam) <= 1e-15 * abs(new):
            lam = new
            break
        lam = new
    if np.sum(x) < 0:
        x = -x
    if problem.boundary == "dirichlet":
        x = np.concatenate([[0.0], x, [0.0]])
    elif problem.boundary == "periodic":
        x = np.concatenate([x, x[:1]])
    return lam, x


def smallest_eigenvalue(problem, tol=1e-4, min_levels=3, max_elements=40_000, start_step=None):
    """Smallest eigenvalue of ``problem`` with estimated absolute error <= tol."""
    if tol <= 0:
        raise DomainError("tol must be positive")
    t0 = time.perf_counter()
    step = BASE_STEP / 4.0 if start_step is None else start_step
    levels = []
    best = None
    while True:
        mesh = graded_mesh(problem, step)
        if mesh.elements > max_elements:
            break
        lam, vec = _smallest_on_mesh(problem, mesh)
        levels.append((mesh.elements, lam))
        best = (mesh.nodes, vec)
        if len(levels) >= max(min_levels, 2):
            err = abs(levels[-2][1] - levels[-1][1]) / 3.0
            if err <= tol:
                extrap = levels[-1][1] + (levels[-1][1] - levels[-2][1]) / 3.0
                return EigenResult(extrap, best[0], best[1], levels, err,
                                   time.perf_counter() - t0)
        step *= 0.5
    if len(levels) >= 2:
        err = abs(levels[-2][1] - levels[-1][1]) / 3.0
        extrap = levels[-1][1] + (levels[-1][1] - levels[-2][1]) / 3.0
    else:
        err, extrap = math.inf, levels[-1][1] if levels else math.nan
    raise ToleranceNotMetError(
        f"refinement up to {max_elements} elements gave error estimate {err:.3g} > tol {tol:g}",
        best_estimate=extrap, error_estimate=err)


# ---------------------------------------------------------------------------
# Rayleigh quotient of a given trial function


def _piece_integral(fn_x, fn_v, a, b, sing_a, sing_b):
    """int_a^b of an integrand given in x, with singular ends done in -log(distance).

    ``fn_v(anchor, side, v)`` must return the integrand times the distance
    d = exp(-v), i.e. the integrand of dv.
    """
    delta = 1e-3 * (b - a)
    total = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        lo, hi = a, b
        if sing_a:
            lo = a + delta
            total += integrate.quad(lambda v: fn_v(a, 1.0, v), -math.log(delta), math.inf,
                                    epsabs=0.0, epsrel=1e-13, limit=400)[0]
        if sing_b:
            hi = b - delta
            total += integrate.quad(lambda v: fn_v(b, -1.0, v), -math.log(delta), math.inf,
                                    epsabs=0.0, epsrel=1e-13, limit=400)[0]
        total += integrate.quad(fn_x, lo, hi, epsabs=0.0, epsrel=1e-13, limit=400)[0]
    return total


def rayleigh_quotient(problem, trial, derivative):
    """Rayleigh quotient of ``trial`` (with its ``derivative``) for ``problem``.

    Both callables take angles.  Any trial satisfying the end conditions
    gives an upper bound for the smallest eigenvalue.
    """
    def y(x):
        return float(np.asarray(trial(np.asarray(x, dtype=float))))

    def dy(x):
        return float(np.asarray(derivative(np.asarray(x, dtype=float))))

    def term(w, f, extra_jac):
        if w.zero:
            return 0.0

        def in_x(x):
            return float(w(np.array([x]))[0]) * f(x) ** 2

        def in_v(anchor, side, v):
            x = anchor + side * math.exp(-v)
            return float(_weight_in_v(w, anchor, side, [v], extra_jac)[0]) * f(x) ** 2

        pts = problem.nodes_of_interest
        return sum(_piece_integral(in_x, in_v, a, b,
                                   not w.singularity_at(a).is_regular,
                                   not w.singularity_at(b).is_regular)
                   for a, b in zip(pts[:-1], pts[1:]))

    num = term(problem.leading, dy, 1.0) + term(problem.potential, y, 1.0)
    den = term(problem.rhs, y, 1.0)
    if not den > 0.0:
        raise DomainError("trial function has zero weighted norm")
    return num / den


# ---------------------------------------------------------------------------
# problem constructors


def _sin_local(point, side, d):
    """sin(point + side d) at a multiple of pi, accurate for tiny d."""
    return side * math.copysign(1.0, math.cos(point)) * np.sin(d)


def _compose_sin(w, name):
    """WeightExpr on angles: phi -> w(sin phi), singular where sin phi = 0."""
    sing0 = w.singularity_at(0.0)

    def local(point, side, d):
        t = _sin_local(point, side, d)
        return w.local(0.0, 1.0, t) if w.local is not None and np.all(t > 0) else w(t)

    # sin d = d to double precision once d < 1e-9, i.e. wherever log_local is used
    log_local = None if w.log_local is None else (lambda point, side, v: w.log_local(0.0, 1.0, v))

    return WeightExpr(lambda phi: w(np.sin(phi)), {}, name, w.zero, local, log_local), sing0


def _with_points(w, points, sing):
    if sing.is_regular:
        return WeightExpr(w.evaluator, {}, w.name, w.zero, w.local, w.log_local)
    return WeightExpr(w.evaluator, {p: sing for p in points}, w.name, w.zero, w.local, w.log_local)


def q_weight(fn, alpha=0.0, beta=0.0, name="q", log_fn=None):
    """Weight q on (0, 1) with local behaviour t^alpha (-log t)^beta at t = 0.

    ``log_fn(v)``, optional, is log q(e^{-v}) and extends q exactly below
    the smallest positive float.
    """
    sing = Singularity(float(alpha), float(beta))
    pts = {} if sing.is_regular else {0.0: sing}

    def local(point, side, d):
        return fn(np.asarray(d, dtype=float))

    log_local = None if log_fn is None else (lambda point, side, v: log_fn(np.asarray(v, dtype=float)))

    return WeightExpr(lambda t: fn(np.asarray(t, dtype=float)), pts, name, False, local, log_local)


def _unit(t):
    return np.ones_like(np.asarray(t, dtype=float))


def _log_critical(t):
    return 1.0 / (t * (1.0 - np.log(t)) ** 2)


STANDARD_Q = {
    "one": lambda: q_weight(_unit, name="1", log_fn=lambda v: 0.0 * v),
    "log_critical": lambda: q_weight(_log_critical, -1.0, -2.0, "t^-1(1-log t)^-2",
                                     log_fn=lambda v: v - 2.0 * np.log1p(v)),
    "inverse": lambda: q_weight(lambda t: 1.0 / t, -1.0, 0.0, "t^-1", log_fn=lambda v: v),
    "sqrt": lambda: q_weight(np.sqrt, 0.5, 0.0, "t^1/2", log_fn=lambda v: -0.5 * v),
    "inverse_log": lambda: q_weight(lambda t: 1.0 / (1.0 - np.log(t)), 0.0, -1.0, "(1-log t)^-1",
                                    log_fn=lambda v: -np.log1p(v)),
}


def _sin_weight(c, name):
    return WeightExpr(lambda t: c * np.sin(t), {0.0: power(1), math.pi: power(1)}, name,
                      False, lambda p, side, d: c * np.sin(d))


def build_problem(kind, **params):
    """Construct one of the registered Rayleigh-quotient problems.

    Kinds and parameters:

    * ``theorem31`` (q: WeightExpr on (0, 1)): interval (0, pi), leading
      sin, potential sin/4, rhs q(sin), natural ends.
    * ``corollary2``: ``theorem31`` with q = 1.
    * ``corollary81``: ``theorem31`` with q = t^-1 (1 - log t)^-2.
    * ``remark7`` (n, mu, optional p, q callables of cos): interval (0, pi),
      leading p(cos) sin^{n-2}, potential (mu - 1 + n/2)^2 times the same,
      rhs q(cos) sin^{n-2}; p and q must be bounded and positive.
    * ``remark8`` (p: WeightExpr in t = sin, mu, and q: WeightExpr in t or
      q_angle: WeightExpr in the angle): interval (0, 2 pi), periodic.
    * ``legendre``: leading sin, potential sin/4, rhs sin.
    * ``hlp``: leading 1, rhs 1/(phi (pi - phi)), Dirichlet ends.
    """
    pi = math.pi
    if kind == "corollary2":
        return build_problem("theorem31", q=STANDARD_Q["one"]())._renamed("corollary2")
    if kind == "corollary81":
        return build_problem("theorem31", q=STANDARD_Q["log_critical"]())._renamed("corollary81")
    if kind == "theorem31":
        q = params.get("q")
        if not isinstance(q, WeightExpr):
            raise ConstructionError("theorem31 needs q given as a WeightExpr on (0, 1)")
        rhs, sing = _compose_sin(q, f"{q.name}(sin)")
        rhs = _with_points(rhs, (0.0, pi), sing)
        return SLProblem((0.0, pi), _sin_weight(1.0, "sin"), _sin_weight(0.25, "sin/4"), rhs,
                         name=f"theorem31[{q.name}]")
    if kind == "legendre":
        return SLProblem((0.0, pi), _sin_weight(1.0, "sin"), _sin_weight(0.25, "sin/4"),
                         _sin_weight(1.0, "sin"), name="legendre")
    if kind == "hlp":
        rhs = WeightExpr(lambda t: 1.0 / (t * (pi - t)), {0.0: power(-1), pi: power(-1)},
                         "1/(phi(pi-phi))", False, lambda p, side, d: 1.0 / (d * (pi - d)))
        return SLProblem((0.0, pi), constant_weight(1.0), constant_weight(0.0), rhs,
                         boundary="dirichlet", name="hlp")
    if kind == "remark7":
        n = params["n"]
        mu = float(params.get("mu", 0.0))
        if int(n) != n or n < 2:
            raise ConstructionError(f"remark7 needs an integer n >= 2, got {n!r}")
        p = params.get("p") or _unit
        q = params.get("q") or _unit
        k = n - 2
        c = (mu - 1.0 + 0.5 * n) ** 2
        sing = {} if k == 0 else {0.0: power(k), pi: power(k)}

        def sinpow(d):
            return np.sin(d) ** k

        def local_of(f):
            return lambda pt, side, d: f(np.where(pt == 0.0, np.cos(d), -np.cos(d))) * sinpow(d)

        lead = WeightExpr(lambda t: p(np.cos(t)) * np.sin(t) ** k, sing, "p(cos)sin^(n-2)", False, local_of(p))
        pot = WeightExpr(lambda t: c * p(np.cos(t)) * np.sin(t) ** k, sing,
                         f"{c:g}p(cos)sin^(n-2)", c == 0.0, local_of(lambda x: c * p(x)))
        rhs = WeightExpr(lambda t: q(np.cos(t)) * np.sin(t) ** k, sing, "q(cos)sin^(n-2)", False, local_of(q))
        return SLProblem((0.0, pi), lead, pot, rhs, name=f"remark7[n={n},mu={mu:g}]")
    if kind == "remark8":
        p = params.get("p")
        mu = float(params.get("mu", 0.0))
        if not isinstance(p, WeightExpr):
            raise ConstructionError("remark8 needs p given as a WeightExpr in t = sin(phi)")
        pts = (0.0, pi, 2.0 * pi)
        lead, sing = _compose_sin(p, f"{p.name}(sin)")
        lead = _with_points(lead, pts, sing)
        pot = WeightExpr(lambda t: mu * mu * lead(t), lead.singular_points, f"{mu * mu:g}{lead.name}",
                         mu == 0.0, lambda pt, side, d: mu * mu * lead.local(pt, side, d))
        if "q_angle" in params:
            rhs = params["q_angle"]
        elif isinstance(params.get("q"), WeightExpr):
            rhs, qs = _compose_sin(params["q"], f"{params['q'].name}(sin)")
            rhs = _with_points(rhs, pts, qs)
        else:
            raise ConstructionError("remark8 needs q (WeightExpr in t) or q_angle (WeightExpr in phi)")
        breaks = (pi,) if not (sing.is_regular and all(
            rhs.singularity_at(x).is_regular for x in pts)) else ()
        return SLProblem((0.0, 2.0 * pi), lead, pot, rhs, boundary="periodic",
                         breakpoints=breaks, name=f"remark8[mu={mu:g}]")
    raise ConstructionError(f"unknown problem kind {kind!r}")


def hlp_periodic_weight():
    """sin^2(phi) / (psi (pi - psi)) with psi = phi mod pi, as a weight on (0, 2 pi)."""
    pi = math.pi

    def f(phi):
        psi = np.mod(phi, pi)
        return np.sin(phi) ** 2 / (psi * (pi - psi))

    def local(point, side, d):
        # distance d to a multiple of pi: psi is d or pi - d
        return np.sin(d) ** 2 / (d * (pi - d))

    return WeightExpr(f, {0.0: power(1), pi: power(1), 2.0 * pi: power(1)},
                      "sin^2/(psi(pi-psi))", False, local)


# ---------------------------------------------------------------------------
# the condition functional and trial-function upper bounds


def _inner_integral(q, t):
    """int_0^t q by the substitution tau = t e^{-u}."""
    sing = q.singularity_at(0.0)
    if not sing.integrable:
        return math.inf
    v0 = -math.log(t)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(lambda u: float(_weight_in_v(q, 0.0, 1.0, [v0 + u], 1.0)[0]),
                                0.0, math.inf, epsabs=0.0, epsrel=1e-12, limit=400)
    return val if math.isfinite(val) else math.inf


def weight_mass(q, t):
    """int_0^t q for a weight on (0, 1); inf when q is not integrable at 0."""
    return _inner_integral(q, t)


def _check_nonnegative(q):
    probe = np.geomspace(1e-12, 1.0, 400)
    vals = q(probe)
    if np.any(vals < 0):
        raise DomainError(f"weight {q.name} takes negative values")


def hardy_condition_sup(q, overflow=1e300):
    """sup over t in (0, 1) of (1 - log t) int_0^t q, or inf when it diverges."""
    _check_nonnegative(q)
    if not q.singularity_at(0.0).integrable:
        return math.inf

    def g(log_t):
        val = (1.0 - log_t) * _inner_integral(q, math.exp(log_t))
        return val

    grid = [-j * math.log(2.0) for j in range(61)]
    vals = [g(x) for x in grid]
    if any(not math.isfinite(v) or v > overflow for v in vals):
        return math.inf
    k = int(np.argmax(vals))
    lo = grid[min(k + 1, len(grid) - 1)]
    hi = grid[max(k - 1, 0)]
    best = vals[k]
    if hi > lo:
        from .constants import _golden_max
        best = max(best, _golden_max(g, lo, hi, tol=1e-10))
    return best


def _sech_moment(q, lo):
    """int_lo^inf q(sech xi) sech xi d xi."""
    def f(xi):
        v = xi + math.log1p(math.exp(-2.0 * xi)) - math.log(2.0)  # -log sech
        return float(_weight_in_v(q, 0.0, 1.0, [v], 1.0)[0]) if v > 0 else float(q(np.array([1.0]))[0])

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(f, lo, math.inf, epsabs=0.0, epsrel=1e-12, limit=400)
    return val


def lambda_upper_bounds(q):
    """Upper bound for the theorem31 eigenvalue from two explicit trial functions.

    The trials z = 1 and z = min(xi / eta, 1) in the half-line form give
    (1/4) / int_0^inf q(sech) sech and (1/eta + 1/4) / int_eta^inf q(sech) sech;
    the second is minimised over eta.  Returns 0 when the integrals diverge.
    """
    _check_nonnegative(q)
    if not q.singularity_at(0.0).integrable:
        return 0.0
    full = _sech_moment(q, 0.0)
    if not math.isfinite(full):
        return 0.0
    best = 0.25 / full

    def bound(log_eta):
        eta = math.exp(log_eta)
        m = _sech_moment(q, eta)
        return -(1.0 / eta + 0.25) / m if m > 0 else -math.inf

    grid = np.linspace(math.log(1e-3), math.log(200.0), 80)
    vals = [bound(x) for x in grid]
    k = int(np.argmax(vals))
    from .constants import _golden_max
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    second = -max(vals[k], _golden_max(bound, lo, hi, tol=1e-9))
    return min(best, second)
