"""Riemann-Hilbert problem ``Re(Lambda2 w) = Phi2`` on the unit circle.

With kappa the winding number of Lambda2 and ``alpha = arg Lambda2 - kappa tau``
(continuous branch), the holomorphic regulariser is ``gamma = S(alpha)`` where
S is the Schwarz operator, and the solutions are

    w(z) = z^(-kappa) exp(-i gamma(z)) [S(exp(-gamma_2) Phi2)(z) + Q(z)],
    Q(z) = i beta0 + sum_{k=1..n} (c_k z^k - conj(c_k) z^(-k)).

On the circle ``Lambda2 z^(-kappa) e^{-i gamma} = e^{gamma_2}`` is real and
positive and ``Re Q = 0``, so ``Re(Lambda2 w) = Phi2`` for every choice of
the free parameters.  The problem is posed for the index ``-kappa`` of this
normalisation; the pole budget n keeps the composed solution w(Z_mu)
admissible up to one extra order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConvergenceError, GridError, IndexConditionError, PreconditionError
from .field import HomogeneousField
from .integral import FirstIntegral, Kind, fi_eval
from .periodic import TWO_PI, PeriodicFn, grid, pf_build, pf_eval

UNIT_TOL = 1e-10
REAL_TOL = 1e-10
INDEX_SLACK = 1e-9
RESIDUAL_TOL = 1e-6
TAIL_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class TaylorFn:
    """Holomorphic function on the closed disc given by Taylor coefficients."""

    coeffs: np.ndarray

    def __call__(self, z):
        z = np.asarray(z, complex)
        return np.polynomial.polynomial.polyval(z, self.coeffs)

    def boundary(self, tau) -> np.ndarray:
        return self(np.exp(1j * np.asarray(tau, float)))


def schwarz(g: PeriodicFn) -> TaylorFn:
    """F = g_0 + 2 sum_{j>=1} g_j z^j, so that Re F = g on the circle."""
    if not g.is_real(REAL_TOL):
        raise PreconditionError("the Schwarz operator takes real boundary data")
    n = g.n_grid
    b = min(g.bandwidth, n // 2)
    c = np.zeros(b + 1, complex)
    c[0] = g.fft[0].real
    for j in range(1, b + 1):
        c[j] = 2 * g.coeff(j)
        if j == n // 2:
            # the Nyquist cosine is real on the grid: keep all of it
            c[j] = g.fft[j].real
    return TaylorFn(c)


def winding_number(Lam: PeriodicFn) -> int:
    """Sum of the phase increments between neighbouring grid points over 2 pi."""
    s = Lam.samples
    if np.any(np.abs(s) == 0):
        raise PreconditionError("boundary coefficient vanishes")
    steps = np.angle(np.roll(s, -1) / s)
    if np.max(np.abs(steps)) >= 0.5 * np.pi:
        raise GridError("phase changes by >= pi/2 between grid points; refine the grid")
    return int(round(steps.sum() / TWO_PI))


def continuous_argument(Lam: PeriodicFn, kappa: int) -> PeriodicFn:
    """arg Lambda - kappa tau on the continuous branch, as a periodic function."""
    th = Lam.theta
    ang = np.unwrap(np.angle(Lam.samples)) - kappa * th
    return pf_build(ang, Lam.n_grid)


@dataclass(frozen=True, eq=False)
class RHInput:
    Lambda2: PeriodicFn
    Phi2: PeriodicFn
    lam: complex
    mu: complex

    def __post_init__(self):
        if np.max(np.abs(np.abs(self.Lambda2.samples) - 1)) > UNIT_TOL:
            raise PreconditionError("|Lambda2| must equal 1 on the grid")
        if not self.Phi2.is_real(REAL_TOL):
            raise PreconditionError("Phi2 must be real")
        if not (1 / complex(self.mu)).real > 0:
            raise PreconditionError("need Re(1/mu) > 0")

    @property
    def budget(self) -> float:
        """(Re lam - 1) / Re(1/mu)."""
        return (complex(self.lam).real - 1) / (1 / complex(self.mu)).real


def index_admissible(kappa: int, lam: complex, mu: complex) -> bool:
    """Index -kappa exceeds -1 - (Re lam - 1)/Re(1/mu) (with a small slack)."""
    X = (complex(lam).real - 1) / (1 / complex(mu)).real
    return -kappa > -1 - X - INDEX_SLACK


@dataclass(frozen=True)
class FreeParams:
    beta0: float = 0.0
    c: tuple[complex, ...] = ()

    @classmethod
    def from_dict(cls, d: dict) -> "FreeParams":
        c = tuple(complex(x[0], x[1]) if isinstance(x, (list, tuple)) else complex(x)
                  for x in d.get("c", []))
        return cls(float(d.get("beta0", 0.0)), c)

    def to_dict(self) -> dict:
        return {"beta0": self.beta0, "c": [[z.real, z.imag] for z in self.c]}


@dataclass(frozen=True, eq=False)
class RHSolution:
    kappa: int
    n: int
    gamma: TaylorFn
    data: TaylorFn
    free: FreeParams = field(default_factory=FreeParams)

    @property
    def gamma_coeffs(self) -> np.ndarray:
        return self.gamma.coeffs

    @property
    def schwarz_coeffs(self) -> np.ndarray:
        return self.data.coeffs

    @property
    def pole_order(self) -> int:
        """Order of the pole of w at 0 (0 if w is holomorphic)."""
        used = max((k + 1 for k, c in enumerate(self.free.c) if c != 0), default=0)
        return max(0, self.kappa + used)

    def Q(self, z):
        z = np.asarray(z, complex)
        out = np.full(z.shape, 1j * self.free.beta0, complex)
        for k, c in enumerate(self.free.c, start=1):
            out = out + c * z ** k - np.conj(c) * z ** (-k)
        return out

    def family_part(self, z):
        """The part of w contributed by the free parameters."""
        z = np.asarray(z, complex)
        return z ** (-self.kappa) * np.exp(-1j * self.gamma(z)) * self.Q(z)

    def __call__(self, z):
        z = np.asarray(z, complex)
        if np.any(z == 0) or np.any(np.abs(z) > 1 + 1e-12):
            raise PreconditionError("w is evaluated on 0 < |z| <= 1")
        return z ** (-self.kappa) * np.exp(-1j * self.gamma(z)) * (self.data(z) + self.Q(z))

    def to_dict(self) -> dict:
        return {"kappa": self.kappa, "n": self.n, "pole_order": self.pole_order,
                "free_params": self.free.to_dict(),
                "gamma_coeffs": [[c.real, c.imag] for c in self.gamma.coeffs],
                "schwarz_coeffs": [[c.real, c.imag] for c in self.data.coeffs]}


def rh_solve(inp: RHInput, free: FreeParams | None = None, check: bool = True) -> RHSolution:
    free = free or FreeParams()
    kappa = winding_number(inp.Lambda2)
    X = inp.budget
    if not index_admissible(kappa, inp.lam, inp.mu):
        raise IndexConditionError(
            f"index condition fails: -kappa = {-kappa} must exceed -1 - {X:g} = {-1 - X:g}")
    n = -kappa + 1 + math.floor(X + INDEX_SLACK)
    if len(free.c) > n:
        raise PreconditionError(f"{len(free.c)} coefficients given but the pole budget is n = {n}")
    gamma = schwarz(continuous_argument(inp.Lambda2, kappa))
    g2 = pf_build(np.asarray(gamma.boundary(inp.Phi2.theta)).imag, inp.Phi2.n_grid)
    data = schwarz(inp.Phi2 * g2.map(lambda s: np.exp(-s)))
    sol = RHSolution(kappa, n, gamma, data, free)
    if check:
        res = rh_residual(inp, sol)
        if res > RESIDUAL_TOL:
            raise ConvergenceError(f"boundary residual {res:.3e} exceeds {RESIDUAL_TOL}")
    return sol


def rh_residual(inp: RHInput, sol: RHSolution, n_samples: int = 1024) -> float:
    """max |Re(Lambda2 w) - Phi2| on the circle; also checks the Taylor tail on |z| = 0.9."""
    tau = grid(n_samples)
    z = np.exp(1j * tau)
    w = sol(z)
    res = np.abs((pf_eval(inp.Lambda2, tau) * w).real - pf_eval(inp.Phi2, tau).real)
    m = 4 * max(64, len(sol.gamma.coeffs), len(sol.data.coeffs))
    zz = 0.9 * np.exp(1j * grid(m))
    a = np.abs(np.fft.fft(sol(zz) * zz ** sol.pole_order)) / m
    tail = a[m // 2 - m // 8: m // 2 + m // 8]
    if tail.max() > TAIL_TOL * max(a.max(), 1e-300):
        raise ConvergenceError("w z^m has no convergent Taylor tail on |z| = 0.9")
    return float(res.max())


def rh_compose(L: HomogeneousField, Z: FirstIntegral, sol: RHSolution, r, theta):
    """u = w(Z_mu(r, theta)) on Z_mu^{-1}(unit disc)."""
    if Z.kind is not Kind.PositiveReMu:
        raise PreconditionError("composition needs Re(mu) > 0")
    m = sol.pole_order
    a = (1 / Z.mu).real
    if m > 0 and not m * a < L.lam.real - 1:
        raise PreconditionError(
            f"pole of order {m}: need {m}*Re(1/mu) = {m * a:g} < Re(lambda) - 1 = {L.lam.real - 1:g}")
    z = fi_eval(Z, r, theta)
    if np.any(np.abs(z) > 1 + 1e-12):
        raise PreconditionError("point lies outside Z_mu^{-1}(unit disc)")
    return sol(z)


def boundary_from_coeffs(terms: Sequence[Sequence[float]], n_grid: int) -> PeriodicFn:
    """Periodic function from [j, re, im] Fourier triples."""
    th = grid(n_grid)
    out = np.zeros(n_grid, complex)
    for j, re, im in terms:
        out += complex(re, im) * np.exp(1j * int(j) * th)
    return pf_build(out, n_grid)
