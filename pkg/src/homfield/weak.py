"""Distributional pairings for radial-power solutions.

Test functions are ``poly(x, y) * bump(|x - c| / R)`` with the standard bump
``exp(1 / (s^2 - 1))``.  Their derivatives along any line come from truncated
Taylor arithmetic (jets), so radial derivatives of high order are exact up to
rounding.  A jet carries an optional first-order part in a second direction,
which supplies the angular derivative ``Phi_theta = r * (e_perp . grad Phi)``.

Pairings integrate over the area measure ``r dr dtheta``: trapezoid in theta,
Gauss-Legendre panels in r, geometrically graded towards the origin where
``r^a`` and ``ln r`` are singular; the geometric decay of the level sums
gives the remainder below the deepest panel in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .errors import ConvergenceError, PreconditionError
from .field import HomogeneousField, check_structure
from .periodic import PeriodicFn, PowerFn, grid, pf_eval

MASK_LEVEL = -1e-3
MAX_RADIAL = 12


# -- truncated Taylor arithmetic -------------------------------------------------

def jmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Product of two jets stored as arrays of shape (K+1, ...)."""
    out = np.empty(np.broadcast_shapes(a.shape, b.shape), dtype=complex)
    for k in range(out.shape[0]):
        out[k] = np.sum(a[:k + 1] * b[k::-1], axis=0)
    return out


def jexp(a: np.ndarray) -> np.ndarray:
    out = np.empty_like(a, dtype=complex)
    out[0] = np.exp(a[0])
    for k in range(1, a.shape[0]):
        m = np.arange(1, k + 1).reshape((-1,) + (1,) * (a.ndim - 1))
        out[k] = np.sum(m * a[1:k + 1] * out[k - 1::-1], axis=0) / k
    return out


def jrecip(a: np.ndarray) -> np.ndarray:
    out = np.empty_like(a, dtype=complex)
    out[0] = 1.0 / a[0]
    for k in range(1, a.shape[0]):
        out[k] = -np.sum(a[1:k + 1] * out[k - 1::-1], axis=0) * out[0]
    return out


def jderiv(a: np.ndarray) -> np.ndarray:
    """d/dt of a jet; the result is one order shorter."""
    k = np.arange(1, a.shape[0]).reshape((-1,) + (1,) * (a.ndim - 1))
    return k * a[1:]


def jpow_shift(r0: np.ndarray, power: complex, K: int) -> np.ndarray:
    """Jet of (r0 + t)^power about t = 0, for r0 > 0."""
    out = np.empty((K + 1,) + np.shape(r0), dtype=complex)
    base = np.exp(power * np.log(r0))
    coef = 1.0 + 0j
    for k in range(K + 1):
        out[k] = coef * base / r0 ** k
        coef *= (power - k) / (k + 1)
    return out


@dataclass
class Dual:
    """Jet ``a(t) + eps * b(t)`` with eps^2 = 0."""

    a: np.ndarray
    b: np.ndarray

    def __add__(self, o):
        if isinstance(o, Dual):
            return Dual(self.a + o.a, self.b + o.b)
        a = self.a.copy()
        a[0] = a[0] + o
        return Dual(a, self.b)

    __radd__ = __add__

    def __sub__(self, o):
        return self + (-1.0) * o if isinstance(o, Dual) else self + (-o)

    def __mul__(self, o):
        if isinstance(o, Dual):
            return Dual(jmul(self.a, o.a), jmul(self.a, o.b) + jmul(self.b, o.a))
        return Dual(self.a * o, self.b * o)

    __rmul__ = __mul__

    def exp(self):
        e = jexp(self.a)
        return Dual(e, jmul(e, self.b))

    def recip(self):
        r = jrecip(self.a)
        return Dual(r, -jmul(jmul(r, r), self.b))


def _line(x0, d, e, K):
    """Dual jet of the coordinate x0 + t d + eps e."""
    a = np.zeros((K + 1,) + np.shape(x0), dtype=complex)
    b = np.zeros_like(a)
    a[0] = x0
    if K >= 1:
        a[1] = d
    b[0] = e
    return Dual(a, b)


# -- test functions --------------------------------------------------------------

@dataclass(frozen=True)
class TestFn:
    """``amp * poly(x, y) * exp(1 / (s^2 - 1))`` with ``s = |(x, y) - center| / R``.

    ``poly`` maps exponent pairs ``(a, b)`` to the coefficient of ``x^a y^b``.
    """

    center: tuple[float, float] = (0.0, 0.0)
    R: float = 1.0
    poly: dict = field(default_factory=lambda: {(0, 0): 1.0})
    amp: complex = 1.0

    __test__ = False  # not a pytest class

    @property
    def support_radius(self) -> float:
        """Radius of the smallest origin-centred disc containing the support."""
        return float(math.hypot(*self.center) + self.R)

    def scaled(self, c: complex) -> "TestFn":
        return replace(self, amp=self.amp * c)

    def dilated(self, s: float) -> "TestFn":
        """x -> Phi(x / s)."""
        poly = {k: v / s ** (k[0] + k[1]) for k, v in self.poly.items()}
        return TestFn((self.center[0] * s, self.center[1] * s), self.R * s, poly, self.amp)

    def jet(self, x0, y0, dx, dy, ex, ey, K: int) -> Dual:
        """Jet in t (with eps part) of Phi((x0, y0) + t (dx, dy) + eps (ex, ey))."""
        X = _line(x0, dx, ex, K)
        Y = _line(y0, dy, ey, K)
        u = (X + (-self.center[0])) * (1.0 / self.R)
        v = (Y + (-self.center[1])) * (1.0 / self.R)
        h = u * u + v * v + (-1.0)
        inside = h.a[0].real < MASK_LEVEL
        h.a[0] = np.where(inside, h.a[0], -1.0)
        bump = h.recip().exp()
        P = None
        for (pa, pb), c in self.poly.items():
            term = Dual(np.zeros_like(X.a), np.zeros_like(X.b)) + c
            for _ in range(pa):
                term = term * X
            for _ in range(pb):
                term = term * Y
            P = term if P is None else P + term
        out = P * bump * self.amp
        return Dual(np.where(inside, out.a, 0), np.where(inside, out.b, 0))

    def __call__(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        z = np.zeros(x.shape)
        return self.jet(x, y, z, z, z, z, 0).a[0]

    def polar_jet(self, r, theta, K: int) -> Dual:
        """Jet along the ray through (r, theta); eps runs along e_theta."""
        c, s = np.cos(theta), np.sin(theta)
        return self.jet(r * c, r * s, c, s, -s, c, K)

    def radial_derivatives(self, r, theta, N: int) -> np.ndarray:
        """d^n Phi / dr^n for n = 0..N, stacked along the first axis."""
        a = self.polar_jet(r, theta, N).a
        f = np.array([math.factorial(n) for n in range(N + 1)], float)
        return a * f.reshape((-1,) + (1,) * (a.ndim - 1))

    def partials(self, x, y, order: int) -> dict[tuple[int, int], np.ndarray]:
        """All Cartesian partials of total order <= ``order`` at (x, y).

        The n-th directional derivative along (cos b, sin b) is
        ``sum_i C(n, i) cos^(n-i) b sin^i b d^n Phi / dx^(n-i) dy^i``; n + 1
        directions give a linear system for the n + 1 mixed partials.
        """
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        z = np.zeros(x.shape)
        angles = np.pi * (np.arange(order + 1) + 0.5) / (order + 1)
        jets = [self.jet(x, y, math.cos(b), math.sin(b), z, z, order).a for b in angles]
        out = {}
        for n in range(order + 1):
            fn = math.factorial(n)
            dirs = np.array([[math.comb(n, i) * math.cos(b) ** (n - i) * math.sin(b) ** i
                              for i in range(n + 1)] for b in angles[:n + 1]])
            rhs = np.stack([fn * jets[k][n] for k in range(n + 1)])
            sol = np.linalg.solve(dirs, rhs.reshape(n + 1, -1)).reshape(rhs.shape)
            for i in range(n + 1):
                out[(n - i, i)] = sol[i]
        return out


# -- quadrature ----------------------------------------------------------------------

@dataclass(frozen=True)
class Quadrature:
    n_theta: int = 256
    n_uniform: int = 32
    n_graded: int = 40
    ratio: float = 0.5
    order: int = 16

    def radial(self, rmax: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Nodes, weights, and the index of the graded level each node belongs to."""
        x, w = np.polynomial.legendre.leggauss(self.order)
        edges_u = np.linspace(0.0, rmax, self.n_uniform + 1)
        cut = edges_u[1]
        edges = [(edges_u[i], edges_u[i + 1]) for i in range(1, self.n_uniform)]
        level = [-1] * len(edges)
        hi = cut
        for k in range(self.n_graded):
            lo = hi * self.ratio
            edges.append((lo, hi))
            level.append(k)
            hi = lo
        nodes, weights, lev = [], [], []
        for (a, b), lv in zip(edges, level):
            nodes.append(0.5 * (b - a) * x + 0.5 * (a + b))
            weights.append(0.5 * (b - a) * w)
            lev.append(np.full(self.order, lv))
        return np.concatenate(nodes), np.concatenate(weights), np.concatenate(lev)


DEFAULT_QUAD = Quadrature()
SHALLOW_DEPTH = 20
CONSISTENCY_TOL = 1e-8
CHUNK = 2 ** 15


class _Tables:
    """Angular functions tabulated once on the theta nodes, then gathered per chunk."""

    def __init__(self, th: np.ndarray):
        self.th = th
        self.idx = None
        self._cache: dict[int, np.ndarray] = {}

    def __call__(self, f: PeriodicFn) -> np.ndarray:
        key = id(f)
        if key not in self._cache:
            self._cache[key] = (f, pf_eval(f, self.th))
        return self._cache[key][1][self.idx]


Integrand = Callable[[np.ndarray, np.ndarray, _Tables], np.ndarray]


def _geometric_tail(S: np.ndarray, mass: float) -> complex:
    """Part of the integral below the deepest panel, from the last two level sums.

    Near the origin the integrand behaves like r^b g(theta), so successive
    graded levels shrink by the constant factor ratio^(b+1).
    """
    if S.size < 2 or abs(S[-1]) <= 1e-17 * mass:
        return 0j
    if S[-2] == 0:
        raise ConvergenceError("graded level sums do not decay towards the origin")
    q = S[-1] / S[-2]
    if abs(q) >= 1:
        raise ConvergenceError("graded level sums do not decay towards the origin")
    return complex(S[-1] * q / (1 - q))


def _integrate(integrand: Integrand, phi: TestFn, quad: Quadrature,
               check: bool = True) -> tuple[complex, float]:
    """int_0^rmax int_0^2pi integrand dtheta dr over the support of ``phi``.

    Returns the integral and the integral of the absolute integrand.  The
    contribution below the deepest graded panel is extrapolated from the
    level sums.  The self-consistency check repeats the extrapolation after
    only ``SHALLOW_DEPTH`` levels and requires the two results to agree.
    """
    r, w, lev = quad.radial(phi.support_radius)
    th = grid(quad.n_theta)
    R = np.repeat(r, th.size)
    J = np.tile(np.arange(th.size), r.size)
    W = np.repeat(w, th.size) * (2 * np.pi / quad.n_theta)
    LV = np.repeat(lev + 1, th.size)
    TH = th[J]
    inside = np.hypot(R * np.cos(TH) - phi.center[0], R * np.sin(TH) - phi.center[1]) < phi.R
    R, TH, J, W, LV = R[inside], TH[inside], J[inside], W[inside], LV[inside]
    tables = _Tables(th)
    levels = np.zeros(quad.n_graded + 1, complex)
    mass = 0.0
    for s in range(0, R.size, CHUNK):
        sl = slice(s, s + CHUNK)
        tables.idx = J[sl]
        vals = integrand(R[sl], TH[sl], tables) * W[sl]
        levels += np.bincount(LV[sl], vals.real, levels.size)
        levels += 1j * np.bincount(LV[sl], vals.imag, levels.size)
        mass += float(np.abs(vals).sum())
    graded = levels[1:]
    total = complex(levels.sum()) + _geometric_tail(graded, mass)
    if check and quad.n_graded > SHALLOW_DEPTH:
        shallow = complex(levels[:SHALLOW_DEPTH + 1].sum()) \
            + _geometric_tail(graded[:SHALLOW_DEPTH], mass)
        if abs(total - shallow) > CONSISTENCY_TOL * max(mass, 1e-300):
            raise ConvergenceError(
                f"pairing changed by {abs(total - shallow):.3e} between grading depths")
    return total, mass


def _power_terms(u) -> list[PowerFn]:
    if isinstance(u, PowerFn):
        return [u]
    if hasattr(u, "terms"):
        return list(u.terms())
    raise PreconditionError("weak pairings need a radial-power solution")


def _eval_terms(terms: list[PowerFn], r, tab: _Tables):
    out = np.zeros(r.shape, complex)
    for t in terms:
        out += np.exp(t.exponent * np.log(r)) * tab(t.v)
    return out


def transpose_jet(L: HomogeneousField, phi: TestFn, r, th, K: int,
                  pqd: tuple | None = None) -> np.ndarray:
    """Jet in r of ^tL Phi = -r^(lam-1) [p Phi_th - i q r Phi_r - i(lam+1) q Phi + p' Phi]."""
    if pqd is None:
        pqd = (pf_eval(L.p, th), pf_eval(L.q, th), pf_eval(L.p.derivative(), th))
    p, q, dp = pqd
    j = phi.polar_jet(r, th, K + 1)
    rj = jpow_shift(r, 1.0, K)
    phi0 = j.a[:K + 1]
    phi_th = jmul(rj, j.b[:K + 1])
    rphi_r = jmul(rj, jderiv(j.a))
    lam = L.lam
    inner = p * phi_th - 1j * q * rphi_r + (-1j * (lam + 1) * q + dp) * phi0
    return -jmul(jpow_shift(r, lam - 1, K), inner)


def _pqd(L: HomogeneousField, tab: _Tables):
    if not hasattr(L, "_dp_cache"):
        object.__setattr__(L, "_dp_cache", L.p.derivative())
    return tab(L.p), tab(L.q), tab(L._dp_cache)


def transpose_apply(L: HomogeneousField, phi: TestFn, r, theta):
    r, theta = np.broadcast_arrays(np.asarray(r, float), np.asarray(theta, float))
    if np.any(r <= 0):
        raise PreconditionError("the transpose is evaluated off the origin only")
    out = transpose_jet(L, phi, r.ravel(), theta.ravel(), 0)[0]
    return out.reshape(r.shape) if r.ndim else complex(out[0])


def _check_integrable(terms):
    for t in terms:
        if not complex(t.exponent).real > -2:
            raise PreconditionError(f"r^{t.exponent} is not locally integrable in the plane")


def weak_pair(u, phi: TestFn, quad: Quadrature = DEFAULT_QUAD, check: bool = True) -> complex:
    """<u, Phi> = int int u Phi r dr dtheta for u a sum of r^a v(theta) terms."""
    terms = _power_terms(u)
    _check_integrable(terms)
    return _integrate(lambda r, th, tab: _eval_terms(terms, r, tab) * phi.polar_jet(r, th, 0).a[0] * r,
                      phi, quad, check)[0]


def _pair_rhs(f, phi, quad, check) -> tuple[complex, float]:
    if f is None or (np.isscalar(f) and f == 0):
        return 0j, 0.0
    if isinstance(f, PowerFn) or hasattr(f, "terms"):
        terms = _power_terms(f)
        _check_integrable(terms)
        fv = lambda r, th, tab: _eval_terms(terms, r, tab)
    else:
        fv = lambda r, th, tab: f(r, th)
    return _integrate(lambda r, th, tab: fv(r, th, tab) * phi.polar_jet(r, th, 0).a[0] * r,
                      phi, quad, check)


@dataclass(frozen=True)
class WeakResult:
    defect: complex
    lhs: complex
    rhs: complex
    scale: float

    @property
    def relative(self) -> float:
        return abs(self.defect) / max(self.scale, 1e-300)


def weak_residual(L: HomogeneousField, u, f, phi: TestFn,
                  quad: Quadrature = DEFAULT_QUAD) -> WeakResult:
    """<u, ^tL Phi> - <f, Phi>; the scale is the absolute integrand mass of both sides."""
    terms = _power_terms(u)
    _check_integrable(terms)
    lhs, m1 = _integrate(lambda r, th, tab: _eval_terms(terms, r, tab)
                         * transpose_jet(L, phi, r, th, 0, _pqd(L, tab))[0] * r, phi, quad, True)
    rhs, m2 = _pair_rhs(f, phi, quad, True)
    return WeakResult(lhs - rhs, lhs, rhs, max(m1, m2))


# -- low-regularity pairing ------------------------------------------------------

def lowreg_constant(sigma: complex, lam: complex, m: int) -> complex:
    """(-1)^m / prod_{i=1..m} (a + i) with a = sigma + 2 - lam.

    For m = k - 2 this equals Gamma(lam-sigma-k) / Gamma(lam-sigma-2).
    """
    a = complex(sigma) + 2 - complex(lam)
    c = 1.0 + 0j
    for i in range(1, m + 1):
        c /= -(a + i)
    return c


def default_integrations(sigma: complex, lam: complex) -> int:
    k = math.floor((complex(lam) - complex(sigma)).real)
    return k - 2


def _lowreg(v: PeriodicFn, sigma, lam, jet_fn, phi, m, quad, check) -> tuple[complex, float]:
    a = complex(sigma) + 2 - complex(lam)
    if not (a + m).real > -1:
        raise PreconditionError(f"{m} integrations leave r^{a + m}, not integrable at 0")
    if m > MAX_RADIAL:
        raise PreconditionError(f"radial derivatives of order {m} > {MAX_RADIAL} are not provided")
    C = lowreg_constant(sigma, lam, m)
    fm = math.factorial(m)

    def integrand(r, th, tab):
        return np.exp((a + m) * np.log(r)) * tab(v) * jet_fn(r, th, tab, m)[m] * fm

    val, mass = _integrate(integrand, phi, quad, check)
    return C * val, abs(C) * mass


def weak_pair_lowreg(L: HomogeneousField | None, v: PeriodicFn, sigma, lam, phi: TestFn,
                     m: int | None = None, quad: Quadrature = DEFAULT_QUAD,
                     check: bool = True) -> complex:
    """Pairing of u = r^(sigma+1-lam) v after m radial integrations by parts.

    With the default m = k - 2, k = floor(Re(lam - sigma)), this is the
    regularised pairing that still makes sense for Re sigma <= Re lam - 2.
    """
    if m is None:
        if not 0 < complex(sigma).real <= complex(lam).real - 2:
            raise PreconditionError("need 0 < Re(sigma) <= Re(lambda) - 2")
        m = default_integrations(sigma, lam)
        if m < 1:
            raise PreconditionError("need k >= 3")
    return _lowreg(v, sigma, lam, lambda r, th, tab, K: phi.polar_jet(r, th, K).a,
                   phi, m, quad, check)[0]


def weak_residual_lowreg(L: HomogeneousField, v: PeriodicFn, sigma, f, phi: TestFn,
                         m: int | None = None, quad: Quadrature = DEFAULT_QUAD) -> WeakResult:
    """<u, ^tL Phi> - <f, Phi> with the left side in the regularised form."""
    lam = L.lam
    if m is None:
        m = default_integrations(sigma, lam)
    lhs, m1 = _lowreg(v, sigma, lam,
                      lambda r, th, tab, K: transpose_jet(L, phi, r, th, K, _pqd(L, tab)),
                      phi, m, quad, True)
    rhs, m2 = _pair_rhs(f, phi, quad, True)
    return WeakResult(lhs - rhs, lhs, rhs, max(m1, m2))


# -- fundamental solution ------------------------------------------------------------

@dataclass(frozen=True)
class DeltaResult:
    value: complex
    target: complex
    ladder: list[tuple[int, float]]
    orders: list[float]

    @property
    def defect(self) -> float:
        return abs(self.value - self.target)


DELTA_LADDER = (
    Quadrature(n_theta=16, n_uniform=4, n_graded=40, order=4),
    Quadrature(n_theta=32, n_uniform=8, n_graded=40, order=6),
    Quadrature(n_theta=64, n_uniform=16, n_graded=40, order=8),
    Quadrature(n_theta=128, n_uniform=32, n_graded=40, order=12),
)


def _delta_pair(L: HomogeneousField, phi: TestFn, N: int, mu: complex, quad: Quadrature):
    """-<u, L Phi> with <u, Psi> = int int ln r / p * d^N Psi / dr^N / (2 pi i mu (N-1)!)."""
    def integrand(r, th, tab):
        p, q = tab(L.p), tab(L.q)
        j = phi.polar_jet(r, th, N + 1)
        rj = jpow_shift(r, 1.0, N)
        phi_th = jmul(rj, j.b[:N + 1])
        rphi_r = jmul(rj, jderiv(j.a))
        lphi = jmul(jpow_shift(r, N - 1.0, N), p * phi_th - 1j * q * rphi_r)
        return np.log(r) / p * lphi[N] * math.factorial(N)

    total, _ = _integrate(integrand, phi, quad, False)
    return -total / (2j * np.pi * mu * math.factorial(N - 1))


def delta_check(L: HomogeneousField, phi: TestFn,
                ladder: tuple[Quadrature, ...] = DELTA_LADDER) -> DeltaResult:
    """Check L u = delta for the logarithmic fundamental solution of a divergence-free field."""
    rep = check_structure(L)
    N = int(round(L.lam.real))
    if not rep.div_free:
        raise PreconditionError("delta_check needs div L = 0")
    if abs(L.lam - N) > 1e-12 or N < 2:
        raise PreconditionError("delta_check needs lambda = N, an integer >= 2")
    if abs(rep.mu) <= 1e-10:
        raise PreconditionError("delta_check needs mu != 0")
    target = complex(phi(0.0, 0.0))
    rows, vals = [], []
    for quad in ladder:
        val = _delta_pair(L, phi, N, rep.mu, quad)
        nodes = quad.n_theta * (quad.n_uniform - 1 + quad.n_graded) * quad.order
        rows.append((nodes, abs(val - target)))
        vals.append(val)
    orders = []
    for (n1, e1), (n2, e2) in zip(rows, rows[1:]):
        if e2 > 0 and e1 > 0:
            orders.append(math.log(e1 / e2) / math.log(n2 / n1))
    return DeltaResult(vals[-1], target, rows, orders)


# -- derivatives of delta ---------------------------------------------------------------

def _cartesian_transpose(L: HomogeneousField, phi: TestFn, x, y):
    """^tL Phi at Cartesian points, with its limit 0 at the origin (Re lam > 1)."""
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    r = np.hypot(x, y)
    out = np.zeros(x.shape, complex)
    nz = r > 0
    if np.any(nz):
        th = np.arctan2(y[nz], x[nz]) % (2 * np.pi)
        out[nz] = transpose_jet(L, phi, r[nz], th, 0)[0]
    return out


def _central_weights(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Offsets and weights of the standard central difference for d^n/dx^n."""
    if n == 0:
        return np.array([0.0]), np.array([1.0])
    half = (n + 1) // 2
    offs = np.arange(-half, half + 1, dtype=float)
    V = np.vander(offs, increasing=True).T
    rhs = np.zeros(offs.size)
    rhs[n] = math.factorial(n)
    return offs, np.linalg.solve(V, rhs)


def _fd_partial(G, j: int, k: int, h: float) -> complex:
    ox, wx = _central_weights(j)
    oy, wy = _central_weights(k)
    X, Y = np.meshgrid(ox * h, oy * h, indexing="ij")
    W = np.outer(wx, wy)
    return complex(np.sum(W * G(X, Y)) / h ** (j + k))


@dataclass(frozen=True)
class DiracResult:
    value: complex
    scale: float

    @property
    def defect(self) -> float:
        return abs(self.value) / self.scale


def dirac_derivative_check(L: HomogeneousField, j: int, k: int, phi: TestFn,
                           h: float = 1e-3) -> DiracResult:
    """<L d^(j+k) delta / dx^j dy^k, Phi> = (-1)^(j+k) d^(j+k)(^tL Phi)/dx^j dy^k (0)."""
    if j < 0 or k < 0 or j + k > L.lam.real - 1:
        raise PreconditionError(f"need j + k = {j + k} <= Re(lambda) - 1 = {L.lam.real - 1:g}")
    G = lambda X, Y: _cartesian_transpose(L, phi, X, Y)
    d1 = _fd_partial(G, j, k, h)
    d2 = _fd_partial(G, j, k, h / 2)
    val = (4 * d2 - d1) / 3 * (-1) ** (j + k)
    parts = phi.partials(0.0, 0.0, j + k + 1)
    scale = max(1.0, max(abs(complex(np.ravel(v)[0])) for v in parts.values()))
    return DiracResult(val, scale * max(1.0, L.p.sup() + L.q.sup()))


# -- batteries ---------------------------------------------------------------------------

BATTERY_QUAD = Quadrature(n_theta=128, n_uniform=16, n_graded=40, order=12)


def random_testfns(rng: np.random.Generator, count: int = 20) -> list[TestFn]:
    """Bumps of radius 0.4..1.2 centred within 0.6 of the origin, times quadratics."""
    out = []
    for _ in range(count):
        rad, ang = 0.6 * math.sqrt(rng.random()), 2 * math.pi * rng.random()
        poly = {(a, b): complex(*rng.normal(size=2))
                for a in range(3) for b in range(3 - a) if a + b <= 2}
        out.append(TestFn((rad * math.cos(ang), rad * math.sin(ang)),
                          float(rng.uniform(0.4, 1.2)), poly))
    return out


def weak_battery(L: HomogeneousField, u, f, count: int = 20, seed: int = 0,
                 quad: Quadrature = BATTERY_QUAD, lowreg: tuple | None = None) -> list[WeakResult]:
    """weak_residual over ``count`` random test functions.

    ``lowreg = (v, sigma)`` switches to the regularised pairing for u.
    """
    rng = np.random.default_rng(seed)
    out = []
    for phi in random_testfns(rng, count):
        if lowreg is None:
            out.append(weak_residual(L, u, f, phi, quad))
        else:
            out.append(weak_residual_lowreg(L, lowreg[0], lowreg[1], f, phi, quad=quad))
    return out
