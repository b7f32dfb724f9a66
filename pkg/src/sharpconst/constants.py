"""Closed-form sharp constants built from Gamma functions.

Every formula is evaluated in log space through :mod:`sharpconst.specfun`
so that large Gamma arguments (q close to p, high dimension) neither
overflow nor lose relative accuracy.  The convention 0**0 = 1 is used
wherever p = 1 makes a base vanish; it matches the p -> 1 limit.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import DomainError, NoFiniteConstantError
from .specfun import lgamma

# slack for the boundary cases of the admissibility conditions
_BOUNDARY_SLACK = 1e-12


def _xlogy(x, y):
    """x*log(y) with 0*log(0) = 0."""
    if x == 0.0:
        return 0.0
    return x * math.log(y)


def log_sphere_area(n):
    return math.log(2.0) + 0.5 * n * math.log(math.pi) - lgamma(0.5 * n)


def sphere_area(n):
    """Surface measure of the unit sphere S^{n-1} in R^n."""
    if int(n) != n or n < 1:
        raise DomainError(f"sphere_area needs an integer n >= 1, got {n!r}")
    return math.exp(log_sphere_area(int(n)))


def ball_volume(n):
    return sphere_area(n) / n


# ---------------------------------------------------------------------------
# quadratic form of the gradient


@dataclass(frozen=True)
class MatrixForm:
    """Constant complex coefficient matrix of the form <A grad u, grad u>."""

    entries: np.ndarray

    def __post_init__(self):
        a = np.array(self.entries, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DomainError(f"MatrixForm needs a square matrix, got shape {a.shape}")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def n(self):
        return self.entries.shape[0]

    @property
    def trace(self):
        # plain Python sum: no tolerance, exact on the supplied values
        return sum(complex(self.entries[i, i]) for i in range(self.n))

    @property
    def is_trace_zero(self):
        return self.trace == 0

    def symmetric_parts(self):
        """Real and imaginary parts of the symmetrised matrix."""
        s = 0.5 * (self.entries + self.entries.T)
        return s.real.copy(), s.imag.copy()

    def form(self, omega):
        """sum a_ij w_i w_j for real vectors w (last axis)."""
        omega = np.asarray(omega, dtype=float)
        return np.einsum("...i,ij,...j->...", omega, self.entries, omega)


def _golden_max(f, lo, hi, tol=1e-12):
    inv = (math.sqrt(5.0) - 1.0) / 2.0
    c = hi - inv * (hi - lo)
    d = lo + inv * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > tol:
        if fc > fd:
            hi, d, fd = d, c, fc
            c = hi - inv * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + inv * (hi - lo)
            fd = f(d)
    return max(fc, fd)


def _projected_ascent(sr, si, w, iters=500):
    def value(v):
        return (v @ sr @ v) ** 2 + (v @ si @ v) ** 2

    w = w / np.linalg.norm(w)
    fw = value(w)
    step = 1.0
    for _ in range(iters):
        a, b = w @ sr @ w, w @ si @ w
        g = 4.0 * (a * (sr @ w) + b * (si @ w))
        g -= (g @ w) * w
        if np.linalg.norm(g) < 1e-15 * max(1.0, math.sqrt(fw)):
            break
        while step > 1e-16:
            cand = w + step * g
            cand /= np.linalg.norm(cand)
            fc = value(cand)
            if fc > fw:
                break
            step *= 0.5
        else:
            break
        if fc - fw <= 1e-16 * fw:
            w, fw = cand, fc
            break
        w, fw = cand, fc
        step *= 2.0
    return math.sqrt(fw)


def sphere_max_abs_form(a, seed=0, restarts=16):
    """max over real unit vectors w of |sum a_ij w_i w_j|."""
    if not isinstance(a, MatrixForm):
        a = MatrixForm(a)
    sr, si = a.symmetric_parts()
    n = a.n
    if n == 1:
        return abs(complex(a.entries[0, 0]))
    if n == 2:

        def f(theta):
            c, s = math.cos(theta), math.sin(theta)
            re = sr[0, 0] * c * c + 2.0 * sr[0, 1] * c * s + sr[1, 1] * s * s
            im = si[0, 0] * c * c + 2.0 * si[0, 1] * c * s + si[1, 1] * s * s
            return math.hypot(re, im)

        grid = np.linspace(0.0, math.pi, 4096, endpoint=False)
        vals = np.array([f(t) for t in grid])
        k = int(np.argmax(vals))
        h = grid[1] - grid[0]
        return max(float(vals[k]), _golden_max(f, grid[k] - h, grid[k] + h))

    candidates = []
    for m in (sr, si, sr + si, sr - si):
        _, vecs = np.linalg.eigh(m)
        candidates.extend(vecs.T)
    rng = np.random.default_rng(seed)
    candidates.extend(rng.standard_normal((restarts, n)))
    return max(_projected_ascent(sr, si, np.array(w, dtype=float)) for w in candidates)


def qf_best_constant(a):
    """Best constant C in |int <A grad u, grad u>| <= C (int |(-Delta)^{(n+2)/4} u|)^2.

    Finite only for trace-free A; raises NoFiniteConstantError otherwise.
    """
    if not isinstance(a, MatrixForm):
        a = MatrixForm(a)
    if not a.is_trace_zero:
        raise NoFiniteConstantError(
            f"trace(A) = {a.trace}; the estimate holds with a finite constant "
            "if and only if the trace of A is zero"
        )
    n = a.n
    if n < 2:
        raise DomainError("the quadratic-form estimate needs n >= 2")
    m = sphere_max_abs_form(a)
    if m == 0.0:
        return 0.0
    return math.exp(-0.5 * n * math.log(4.0 * math.pi) - lgamma(0.5 * n + 1.0)) * m


def z10_constant(n, m, max_abs_ratio):
    """Best constant for P(D)u.u vs |Q(D)u| when P/|Q|^2 is a spherical harmonic.

    ``max_abs_ratio`` is max |P|/|Q|^2 on the sphere, supplied by the caller.
    Only m > 0 is supported (Gamma(m) is taken on its positive branch).
    """
    if m <= 0:
        raise DomainError(f"z10_constant supports m > 0 only, got m={m!r}")
    if n < 1:
        raise DomainError(f"dimension must be >= 1, got {n!r}")
    if max_abs_ratio < 0:
        raise DomainError("max_abs_ratio must be nonnegative")
    if max_abs_ratio == 0:
        return 0.0
    logc = -0.5 * n * math.log(4.0 * math.pi) + lgamma(m) - lgamma(0.5 * n + m)
    return math.exp(logc) * max_abs_ratio


# ---------------------------------------------------------------------------
# capacitary and Hardy-Sobolev constants


def log_capacitary_Apq(p, q):
    if p < 1:
        raise DomainError(f"need p >= 1, got p={p!r}")
    if q < p:
        raise DomainError(f"need q >= p, got p={p!r}, q={q!r}")
    if q == p:
        # p (p-1)^{(1-p)/p}
        return math.log(p) + _xlogy((1.0 - p) / p, p - 1.0)
    if math.isinf(q):
        # limit q -> infinity: Gamma(p)/(Gamma(1)Gamma(p)) = 1
        return 0.0
    d = q - p
    x1 = p * q / d
    x2 = q / d
    x3 = p * (q - 1.0) / d
    return (1.0 / p - 1.0 / q) * (lgamma(x1) - lgamma(x2) - lgamma(x3))


def capacitary_Apq(p, q):
    """Constant of the capacitary integral inequality, q >= p >= 1."""
    return math.exp(log_capacitary_Apq(p, q))


@dataclass(frozen=True)
class HSParams:
    """Exponents (p, a, b) and dimension n of the weighted Hardy-Sobolev family.

    Construction enforces 1 <= p < n, 0 <= a < n-p and an/(n-p) <= b <= a+p;
    both ends of the b-range are accepted.
    """

    p: float
    a: float
    b: float
    n: int
    q: float = field(default=None)

    def __post_init__(self):
        p, a, b, n = self.p, self.a, self.b, self.n
        if int(n) != n or n < 2:
            raise DomainError(f"n must be an integer >= 2, got {n!r}")
        if not (1.0 <= p < n):
            raise DomainError(f"condition 1 <= p < n violated (p={p}, n={n})")
        if not (0.0 <= a < n - p):
            raise DomainError(f"condition 0 <= a < n-p violated (a={a}, n-p={n - p})")
        lower = a * n / (n - p)
        if b < lower - _BOUNDARY_SLACK * max(1.0, abs(lower)):
            raise DomainError(f"condition b >= an/(n-p) violated (b={b}, an/(n-p)={lower})")
        if b > a + p + _BOUNDARY_SLACK * max(1.0, a + p):
            raise DomainError(f"condition b <= a+p violated (b={b}, a+p={a + p})")
        if self.q is not None and self.q < p:
            raise DomainError(f"q >= p required for a Lorentz-scale constant (q={self.q}, p={p})")

    @property
    def critical_q(self):
        # q* >= p exactly when b <= a+p; clamp the rounding at b = a+p
        return max(self.p, (self.n - self.b) * self.p / (self.n - self.p - self.a))

    @property
    def gamma_exponent(self):
        """(n-p-a)/(n-b), the power of the measure in the isocapacitary bound."""
        return (self.n - self.p - self.a) / (self.n - self.b)


def _as_hs(h):
    if isinstance(h, HSParams):
        return h
    return HSParams(*h)


def log_isocap_constant(h):
    h = _as_hs(h)
    p, a, b, n = h.p, h.a, h.b, h.n
    out = _xlogy(p - 1.0, (p - 1.0) / (n - p - a))
    out += (b - p - a) / (n - b) * log_sphere_area(n)
    out -= (n - p - a) / (n - b) * math.log(n - b)
    return out


def isocap_constant(h):
    """Sharp factor in mu_b(K)^{(n-p-a)/(n-b)} <= Lambda cap_{p,a}(K)."""
    return math.exp(log_isocap_constant(h))


def hs_constant(h, q):
    """Best constant of the Lorentz-norm inequality for mu_b, any q >= p."""
    h = _as_hs(h)
    p, a, b, n = h.p, h.a, h.b, h.n
    if q < p:
        raise DomainError(f"need q >= p, got q={q!r}, p={p!r}")
    first = log_capacitary_Apq(p, q)
    second = _xlogy(1.0 - 1.0 / p, (p - 1.0) / (n - p - a))
    # Gamma(n/2) / (2 pi^{n/2}) = 1/|S^{n-1}|; the exponents are combined so
    # the b = a+p boundary (where p+a-b = 0) needs no special case
    third = -(p + a - b) / ((n - b) * p) * log_sphere_area(n)
    third -= (n - p - a) / ((n - b) * p) * math.log(n - b)
    return math.exp(first + second + third)


def hs_constant_critical(h):
    """Best constant of the weighted Hardy-Sobolev (Il'in) inequality."""
    h = _as_hs(h)
    return hs_constant(h, h.critical_q)


def sobolev_constant(m):
    """Best constant S_m in int |grad w|^2 >= S_m ||w||^2_{L^{2m/(m-2)}(R^m)}."""
    if int(m) != m or m < 3:
        raise DomainError(f"sobolev_constant needs an integer m >= 3, got {m!r}")
    n = int(m) - 1
    logc = (n + 2.0) / (n + 1.0) * math.log(math.pi) + math.log(n * n - 1.0)
    logc -= n / (n + 1.0) * math.log(4.0)
    logc -= 2.0 / (n + 1.0) * lgamma(0.5 * n + 1.0)
    return math.exp(logc)


def hardy_remainder_constant(n):
    """Constant of the Sobolev-type remainder in the half-space Hardy inequality."""
    if int(n) != n or n < 2:
        raise DomainError(f"hardy_remainder_constant needs an integer n >= 2, got {n!r}")
    n = int(n)
    logc = n / (n + 1.0) * math.log(math.pi) + math.log(n * n - 1.0) - math.log(4.0)
    logc -= 2.0 / (n + 1.0) * lgamma(0.5 * n + 1.0)
    return math.exp(logc)
