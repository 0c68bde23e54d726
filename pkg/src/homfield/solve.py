"""Solutions of Lu = f for homogeneous and for Taylor-expanded right-hand sides.

For ``f = r^sigma f0(theta)`` we look for ``u = r^nu v(theta)`` with
``nu = sigma + 1 - lam``, which reduces Lu = f to the periodic ODE

    p v' - i nu q v = f0.

With ``psi = mu theta + P(theta)`` the integrating factor is ``e^{i nu psi}``.
Writing ``h = (f0/p) e^{-i nu P} = sum h_j e^{ij theta}`` and
``alpha = -nu mu``, the periodic solution is

    v = e^{i nu P} sum_j h_j e^{ij theta} / (i (j + alpha)),

which integrates the secular factor ``e^{i alpha theta}`` mode by mode in
closed form instead of by quadrature.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ConvergenceError, PreconditionError, ResonanceError
from .field import HomogeneousField
from .integral import psi
from .periodic import (TWO_PI, PeriodicFn, PowerFn, _freqs, constant, grid, pf_build,
                       pf_eval)
from .resonance import DCReport, DCStatus

RESONANCE_TOL = 1e-9
SMALL_DENOMINATOR = 1e-6
ODE_TOL = 1e-8
DEFECT_TOL = 1e-8


class SmallDenominatorWarning(RuntimeWarning):
    pass


@dataclass(frozen=True, eq=False)
class HomogeneousRHS:
    sigma: complex
    f0: PeriodicFn
    # the series solver also needs degree 0, which is outside the public contract
    strict: bool = field(default=True, repr=False)

    def __post_init__(self):
        if self.strict and not complex(self.sigma).real > 0:
            raise PreconditionError("need Re(sigma) > 0")

    def as_power(self) -> PowerFn:
        return PowerFn(complex(self.sigma), self.f0)


@dataclass(frozen=True, eq=False)
class HomogeneousSolution:
    sigma: complex
    nu: complex
    v: PeriodicFn
    K: complex
    ode_residual: float
    denominator: float

    @property
    def u(self) -> PowerFn:
        return PowerFn(self.nu, self.v)

    def __call__(self, r, theta):
        return self.u(r, theta)

    def terms(self) -> list[PowerFn]:
        return [self.u]


@dataclass(frozen=True, eq=False)
class SumFn:
    """Finite sum of radial-power terms r^a_k v_k(theta)."""

    parts: tuple[PowerFn, ...]

    def terms(self) -> list[PowerFn]:
        return list(self.parts)

    def __call__(self, r, theta):
        r, theta = np.broadcast_arrays(np.asarray(r, float), np.asarray(theta, float))
        out = np.zeros(r.shape, complex)
        for t in self.parts:
            out = out + t(r, theta)
        return out


def _degree_data(L: HomogeneousField, sigma: complex):
    ps = psi(L)
    mu = ps.mean
    nu = complex(sigma) + 1 - L.lam
    denom = abs(1 - np.exp(2j * np.pi * mu * nu))
    return ps, mu, nu, denom


def _kernel(L: HomogeneousField, f0: PeriodicFn, P: PeriodicFn, nu: complex) -> PeriodicFn:
    n = max(L.n_grid, f0.n_grid)
    f0 = f0.resample(n)
    return (f0 / L.p.resample(n)) * P.resample(n).map(lambda s: np.exp(-1j * nu * s))


def _assemble(L, f0, P, nu, alpha, skip=None):
    """v = e^{i nu P} * sum h_j e^{ij theta}/(i(j+alpha)), optionally omitting mode ``skip``."""
    h = _kernel(L, f0, P, nu)
    n = h.n_grid
    k = _freqs(n)
    den = 1j * (k + alpha)
    c = np.zeros(n, complex)
    keep = np.ones(n, bool) if skip is None else (k != skip)
    c[keep] = h.fft[keep] / den[keep]
    w = PeriodicFn(np.fft.ifft(c) * n)
    lift = P.resample(n).map(lambda s: np.exp(1j * nu * s))
    return lift * w, complex(np.sum(c)), h


def ode_residual(L: HomogeneousField, nu: complex, v: PeriodicFn, f0: PeriodicFn) -> float:
    n = max(v.n_grid, L.n_grid, f0.n_grid)
    v, f0 = v.resample(n), f0.resample(n)
    r = L.p.resample(n) * v.derivative() - 1j * nu * L.q.resample(n) * v - f0
    return r.sup()


def solve_homogeneous(L: HomogeneousField, rhs: HomogeneousRHS) -> HomogeneousSolution:
    sigma = complex(rhs.sigma)
    ps, mu, nu, denom = _degree_data(L, sigma)
    if denom <= RESONANCE_TOL:
        raise ResonanceError(
            f"degree sigma = {sigma} is resonant (|1 - exp(2 pi i mu nu)| = {denom:.2e}); "
            "use solve_homogeneous_compatible")
    if denom < SMALL_DENOMINATOR:
        warnings.warn(f"small denominator {denom:.2e} at sigma = {sigma}", SmallDenominatorWarning)
    if rhs.f0.sup() == 0:
        z = constant(0, rhs.f0.n_grid)
        return HomogeneousSolution(sigma, nu, z, 0j, 0.0, denom)
    v, K, _ = _assemble(L, rhs.f0, ps.periodic_part, nu, -nu * mu)
    res = ode_residual(L, nu, v, rhs.f0)
    if res > ODE_TOL * max(1.0, rhs.f0.sup()):
        raise ConvergenceError(f"ODE residual {res:.3e} exceeds tolerance; refine the grid")
    return HomogeneousSolution(sigma, nu, v, K, res, denom)


def period_constant(L: HomogeneousField, sigma: complex, f0: PeriodicFn) -> complex:
    """K from the loop integral: K = I / (exp(-2 pi i mu nu) - 1), I = int_0^2pi (f0/p) e^{-i nu psi}."""
    ps, mu, nu, _ = _degree_data(L, sigma)
    n = 8 * max(L.n_grid, f0.n_grid)
    t = grid(n)
    g = pf_eval(f0, t) / pf_eval(L.p, t) * np.exp(-1j * nu * ps(t))
    # g is quasi-periodic; integrate the periodic factor against e^{i alpha t} exactly
    h = PeriodicFn(g * np.exp(1j * nu * mu * t))
    alpha = -nu * mu
    k = _freqs(n)
    I = np.sum(h.fft * (np.exp(1j * (k + alpha) * TWO_PI) - 1) / (1j * (k + alpha)))
    return complex(I / (np.exp(-2j * np.pi * mu * nu) - 1))


def _resonant_mode(mu, nu) -> int:
    return int(round((nu * mu).real))


def compatibility_defect(L: HomogeneousField, rhs: HomogeneousRHS) -> complex:
    """Loop integral of (f0/p) e^{-i nu psi} over one period at a resonant degree."""
    ps, mu, nu, denom = _degree_data(L, rhs.sigma)
    if denom > RESONANCE_TOL:
        raise PreconditionError(f"degree sigma = {rhs.sigma} is not resonant")
    h = _kernel(L, rhs.f0, ps.periodic_part, nu)
    return complex(TWO_PI * h.coeff(_resonant_mode(mu, nu)))


def solve_homogeneous_compatible(L: HomogeneousField, rhs: HomogeneousRHS,
                                 c: complex = 0.0) -> HomogeneousSolution:
    """Periodic solution at a resonant degree (K = 0) plus c times the kernel e^{i nu psi}."""
    ps, mu, nu, denom = _degree_data(L, rhs.sigma)
    defect = compatibility_defect(L, rhs)
    scale = max(1.0, rhs.f0.sup())
    if abs(defect) > DEFECT_TOL * scale:
        raise ResonanceError(f"compatibility defect {abs(defect):.3e} at sigma = {rhs.sigma}")
    m = _resonant_mode(mu, nu)
    v, _, h = _assemble(L, rhs.f0, ps.periodic_part, nu, -nu * mu, skip=m)
    if c:
        v = v + c * homogeneous_kernel(L, nu, v.n_grid)
    res = ode_residual(L, nu, v, rhs.f0)
    if res > ODE_TOL * scale:
        raise ConvergenceError(f"ODE residual {res:.3e} exceeds tolerance")
    return HomogeneousSolution(complex(rhs.sigma), nu, v, complex(v.samples[0]), res, denom)


def homogeneous_kernel(L: HomogeneousField, nu: complex, n: int | None = None) -> PeriodicFn:
    """e^{i nu psi(theta)}, periodic exactly when nu mu is an integer."""
    ps = psi(L)
    n = n or L.n_grid
    m = _resonant_mode(ps.mean, nu)
    lift = ps.periodic_part.resample(n).map(lambda s: np.exp(1j * nu * s))
    return lift * pf_build(lambda t: np.exp(1j * m * t), n)


# -- Taylor right-hand sides ---------------------------------------------------

@dataclass(frozen=True)
class TaylorInput:
    """``coeffs[j][l]`` multiplies ``x^(j-l) y^l``; degrees above len(coeffs)-1 vanish."""

    coeffs: Sequence[Sequence[complex]]
    R_major: float
    M0: float

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, r, theta):
        x, y = r * np.cos(theta), r * np.sin(theta)
        out = np.zeros(np.broadcast(x, y).shape, complex)
        for j, row in enumerate(self.coeffs):
            for l, c in enumerate(row):
                if c:
                    out = out + c * x ** (j - l) * y ** l
        return out


def taylor_from_function(derivs: Callable[[int, int], complex], D: int, R: float,
                         M0: float) -> TaylorInput:
    """Build the table from mixed partials ``derivs(k, l)`` at the origin."""
    rows = [[derivs(j - l, l) / (math.factorial(j - l) * math.factorial(l))
             for l in range(j + 1)] for j in range(D + 1)]
    return TaylorInput(rows, R, M0)


def taylor_slices(T: TaylorInput, n_grid: int = 1024) -> list[PeriodicFn]:
    out = []
    for j, row in enumerate(T.coeffs):
        row = [complex(c) for c in row]
        if len(row) != j + 1:
            raise PreconditionError(f"row {j} of the Taylor table needs {j + 1} entries")
        f = pf_build(lambda t, row=row, j=j: sum(c * np.cos(t) ** (j - l) * np.sin(t) ** l
                                                 for l, c in enumerate(row)) + 0 * t, n_grid)
        bound = (j + 1) * T.M0 / T.R_major ** j
        if f.sup() > bound * (1 + 1e-12):
            warnings.warn(f"|f_{j}| = {f.sup():.3e} exceeds (j+1) M0 / R^j = {bound:.3e}; "
                          "the analyticity radius looks overstated", RuntimeWarning)
        out.append(f)
    return out


@dataclass(frozen=True, eq=False)
class SeriesSolution:
    vs: list[PeriodicFn]
    Ks: list[complex]
    J: int
    C2_estimate: float
    R0: float
    lam: complex
    denominators: list[float] = field(default_factory=list)
    resonant_degrees: list[int] = field(default_factory=list)

    def terms(self) -> list[PowerFn]:
        return [PowerFn(j + 1 - self.lam, v) for j, v in enumerate(self.vs)]

    def __call__(self, r, theta):
        return SumFn(tuple(self.terms()))(r, theta)

    def w(self, r, theta):
        """sum_j v_j(theta) r^j, so u = w / r^(lam - 1)."""
        r = np.asarray(r, float)
        return self(r, theta) * r ** (self.lam - 1)


def solve_series(L: HomogeneousField, T: TaylorInput, J: int, dc: DCReport | None = None,
                 n_grid: int | None = None) -> SeriesSolution:
    if dc is not None and dc.status is DCStatus.ViolationSuspected:
        raise PreconditionError("the small-divisor condition looks violated; refusing the series")
    n = n_grid or L.n_grid
    slices = taylor_slices(T, n)
    zero = constant(0, n)
    vs, Ks, dens, res_deg = [], [], [], []
    for j in range(J + 1):
        fj = slices[j] if j < len(slices) else zero
        ps, mu, nu, denom = _degree_data(L, j)
        dens.append(float(denom))
        if fj.sup() == 0:
            vs.append(zero)
            Ks.append(0j)
            continue
        rhs = HomogeneousRHS(j, fj, strict=False)
        if denom <= RESONANCE_TOL:
            res_deg.append(j)
            defect = compatibility_defect(L, rhs)
            if abs(defect) > DEFECT_TOL * max(1.0, fj.sup()):
                raise ResonanceError(f"degree j = {j} is resonant with defect {abs(defect):.3e}")
            sol = solve_homogeneous_compatible(L, rhs)
        else:
            sol = solve_homogeneous(L, rhs)
        vs.append(sol.v)
        Ks.append(sol.K)
    norms = [v.sup() for v in vs]
    growth = [norms[j] ** (1.0 / j) for j in range(1, J + 1) if norms[j] > 0]
    C2 = max(growth, default=0.0)
    R0 = 0.5 / C2 if C2 > 0 else math.inf
    return SeriesSolution(vs, Ks, J, C2, R0, L.lam, dens, res_deg)


# -- classical residuals ---------------------------------------------------------

def _apply_power(L: HomogeneousField, t: PowerFn) -> PowerFn:
    """L(r^a v) = r^(a + lam - 1) (p v' - i a q v)."""
    n = max(L.n_grid, t.v.n_grid)
    v = t.v.resample(n)
    g = L.p.resample(n) * v.derivative() - 1j * t.exponent * L.q.resample(n) * v
    return PowerFn(t.exponent + L.lam - 1, g)


def apply_L(L: HomogeneousField, u, r, theta_grid: np.ndarray):
    """L u on the tensor grid ``r x theta_grid`` (theta_grid uniform, size a power of two)."""
    r = np.asarray(r, float)
    R, TH = np.meshgrid(r, theta_grid, indexing="ij")
    if hasattr(u, "terms"):
        out = np.zeros(R.shape, complex)
        for t in u.terms():
            g = _apply_power(L, t)
            out += np.exp(g.exponent * np.log(r))[:, None] * pf_eval(g.v, theta_grid)[None, :]
        return out
    n = theta_grid.size
    vals = u(R, TH)
    k = _freqs(n)
    mult = 1j * k
    mult[n // 2] = 0.0
    ut = np.fft.ifft(np.fft.fft(vals, axis=1) * mult, axis=1)

    def D(h):
        return (u(R * (1 + h), TH) - u(R * (1 - h), TH)) / (2 * h)

    h = 1e-5
    rdr = (4 * D(h / 2) - D(h)) / 3
    pt, qt = pf_eval(L.p, theta_grid), pf_eval(L.q, theta_grid)
    return R ** (L.lam - 1) * (pt[None, :] * ut - 1j * qt[None, :] * rdr)


def residual_check(L: HomogeneousField, u, f, annulus: tuple[float, float],
                   n_samples: int = 16, n_theta: int = 256) -> float:
    """max |Lu - f| over a polar grid of the annulus, divided by max(1, max |f|)."""
    r1, r2 = annulus
    if not 0 < r1 < r2:
        raise PreconditionError("need 0 < r1 < r2")
    r = np.linspace(r1, r2, n_samples)
    th = grid(n_theta)
    Lu = apply_L(L, u, r, th)
    R, TH = np.meshgrid(r, th, indexing="ij")
    if f is None or (np.isscalar(f) and f == 0):
        fv = np.zeros(R.shape, complex)
    else:
        fv = np.asarray(f(R, TH), complex)
    scale = max(1.0, float(np.max(np.abs(fv))))
    return float(np.max(np.abs(Lu - fv)) / scale)
