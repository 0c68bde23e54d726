"""First integrals Z of L (LZ = 0) and solutions built from them.

Three regimes, by the invariant mu:

* ``ZeroMu``: ``Z = r^sigma e^{i phi}``, image the closed upper half-plane;
* ``PositiveReMu``: ``Z = r^{1/mu} e^{i(theta + phi)}``, image all of C;
* ``ImaginaryMu`` (mu = i beta): same formula, image an annulus.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.spatial import cKDTree

from .errors import AmbiguousError, DegenerateError, InconclusiveError, PreconditionError
from .field import HomogeneousField, compute_mu
from .periodic import PeriodicFn, PowerFn, pf_build, pf_eval, pf_zeros_extrema

KIND_TOL = 1e-10
FIBER_TOL = 1e-6


class Kind(str, enum.Enum):
    ZeroMu = "ZeroMu"
    PositiveReMu = "PositiveReMu"
    ImaginaryMu = "ImaginaryMu"


@dataclass(frozen=True)
class Psi:
    mean: complex
    periodic_part: PeriodicFn

    def __call__(self, theta):
        return self.mean * np.asarray(theta) + pf_eval(self.periodic_part, theta)


@dataclass(frozen=True, eq=False)
class FirstIntegral:
    kind: Kind
    mu: complex
    phi: PeriodicFn
    sigma: float | None = None
    beta: float | None = None
    annulus: tuple[float, float] | None = None

    @property
    def image(self) -> str:
        return {Kind.ZeroMu: "closed upper half-plane",
                Kind.PositiveReMu: "complex plane",
                Kind.ImaginaryMu: "annulus"}[self.kind]

    @property
    def radial_exponent(self) -> complex:
        return self.sigma if self.kind is Kind.ZeroMu else 1.0 / self.mu

    @property
    def turns(self) -> int:
        """Coefficient of theta in the phase: Z = r^a e^{i(turns*theta + phi)}."""
        return 0 if self.kind is Kind.ZeroMu else 1

    def __call__(self, r, theta):
        return fi_eval(self, r, theta)

    def power(self, m: int) -> PowerFn:
        """Z^m as r^(m a) v(theta)."""
        t = self.turns
        v = self.phi.map(lambda s, m=m: np.exp(1j * m * s))
        if t:
            n = self.phi.n_grid
            v = v * pf_build(lambda th, m=m, t=t: np.exp(1j * m * t * th), n)
        return PowerFn(m * self.radial_exponent, v)


def psi(L: HomogeneousField) -> Psi:
    """psi(theta) = mu theta + periodic part, with psi' = q/p and psi(0) = 0."""
    ratio = L.ratio
    return Psi(complex(ratio.mean), ratio.primitive())


def classify_mu(mu: complex) -> Kind:
    a, re = abs(mu), abs(mu.real)
    for v in (a, re):
        if 0.1 * KIND_TOL < v <= 10 * KIND_TOL:
            raise AmbiguousError(f"mu = {mu} is within a factor 10 of the classification threshold")
    if a <= KIND_TOL:
        return Kind.ZeroMu
    if re <= KIND_TOL:
        return Kind.ImaginaryMu
    if mu.real < 0:
        raise PreconditionError("Re(mu) < 0; orient the field first")
    return Kind.PositiveReMu


def first_integral(L: HomogeneousField, mu: complex | None = None) -> FirstIntegral:
    if mu is None:
        mu = compute_mu(L)
    kind = classify_mu(complex(mu))
    if kind is Kind.ZeroMu:
        m = psi(L).periodic_part
        rem = m.real
        try:
            ze = pf_zeros_extrema(rem - rem.mean, assume_real=True)
        except DegenerateError as e:
            raise DegenerateError("Re m is constant, sigma undefined") from e
        lo, hi = ze.min[1] + rem.mean.real, ze.max[1] + rem.mean.real
        sigma = float(np.pi / (hi - lo))
        phi = sigma * m - sigma * lo
        rp = phi.samples.real
        if abs(rp.min()) > 1e-8 or abs(rp.max() - np.pi) > 1e-8:
            raise DegenerateError("normalised Re(phi) does not span [0, pi] on the grid")
        return FirstIntegral(kind, 0j, phi, sigma=sigma)
    mu = complex(mu)
    phi = (L.ratio / mu - 1.0)
    phi = phi - phi.mean
    phi = phi.primitive()
    phi = phi - phi.mean
    if kind is Kind.PositiveReMu:
        return FirstIntegral(kind, mu, phi)
    ze = pf_zeros_extrema(-phi.imag, assume_real=True, scale=0.0)
    annulus = (float(np.exp(ze.min[1])), float(np.exp(ze.max[1])))
    return FirstIntegral(kind, mu, phi, beta=float(mu.imag), annulus=annulus)


def fi_eval(Z: FirstIntegral, r, theta):
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise PreconditionError("first integrals are evaluated at r > 0")
    theta = np.asarray(theta, dtype=float)
    ph = pf_eval(Z.phi, theta)
    return np.exp(Z.radial_exponent * np.log(r) + 1j * (Z.turns * theta + ph))


def _phase_derivative(Z: FirstIntegral, theta):
    return Z.turns + pf_eval(Z.phi.derivative(), theta)


def fi_residual(L: HomogeneousField, Z: FirstIntegral, r, theta) -> float:
    """Max of |p Z_theta - i q r Z_r| relative to |Z| times the size of the coefficients."""
    r, theta = np.broadcast_arrays(np.asarray(r, float), np.asarray(theta, float))
    z = fi_eval(Z, r, theta)
    zt = 1j * _phase_derivative(Z, theta) * z
    zr = Z.radial_exponent * z
    pt, qt = pf_eval(L.p, theta), pf_eval(L.q, theta)
    a, b = pt * zt, -1j * qt * zr
    dphi = np.max(np.abs(Z.turns + Z.phi.derivative().samples))
    scale = np.abs(z) * (L.p.sup() * dphi + L.q.sup() * abs(Z.radial_exponent)) + 1e-300
    return float(np.max(np.abs(a + b) / scale))


@dataclass(frozen=True)
class PowerSolution:
    m: int
    u: PowerFn
    admissible: bool
    constraint: str


def solution_from_powers(L: HomogeneousField, Z: FirstIntegral, m: int) -> PowerSolution:
    """Z^(-m) for ZeroMu/PositiveReMu, Z^m for ImaginaryMu, with the integrability constraint."""
    m = int(m)
    bound = L.lam.real - 1
    if Z.kind is Kind.ZeroMu:
        lhs, text = Z.sigma * m, "sigma*m"
    elif Z.kind is Kind.PositiveReMu:
        lhs, text = (1.0 / Z.mu).real * m, "Re(1/mu)*m"
    else:
        return PowerSolution(m, Z.power(m), True, "none")
    constraint = f"{text} = {lhs:g} < Re(lambda) - 1 = {bound:g}"
    if not lhs < bound:
        raise PreconditionError(f"inadmissible power: need {constraint}")
    return PowerSolution(m, Z.power(-m), True, constraint)


def fiber_check(r, theta, u, Z: FirstIntegral, tol: float = FIBER_TOL) -> float:
    """Largest spread of u between grid points with (nearly) equal Z-values."""
    r, theta = np.broadcast_arrays(np.asarray(r, float).ravel(), np.asarray(theta, float).ravel())
    vals = np.asarray(u(r, theta) if callable(u) else u, dtype=complex).ravel()
    z = fi_eval(Z, r, theta)
    pairs = cKDTree(np.column_stack([z.real, z.imag])).query_pairs(tol, output_type="ndarray")
    if len(pairs) == 0:
        raise InconclusiveError("no two grid points share a Z-value; refine the grid")
    return float(np.max(np.abs(vals[pairs[:, 0]] - vals[pairs[:, 1]])))


def fit_laurent(z, values, degrees: range) -> Callable[[np.ndarray], np.ndarray]:
    """Least-squares H(z) = sum_k h_k z^k over ``degrees`` through the samples."""
    z = np.asarray(z, complex).ravel()
    ks = np.array(list(degrees))
    V = z[:, None] ** ks[None, :]
    h, *_ = np.linalg.lstsq(V, np.asarray(values, complex).ravel(), rcond=None)
    return lambda w: np.asarray(w, complex)[..., None] ** ks @ h


def extension_defect(Z: FirstIntegral, u: Callable, r_seed: tuple[float, float],
                     r_test, theta_test, degrees: range = range(-4, 5), n_seed: int = 64) -> float:
    """Fit H on a thin annulus of the (r, theta) plane and test u = H(Z) elsewhere."""
    rr, tt = np.meshgrid(np.linspace(*r_seed, 5), np.linspace(0, 2 * np.pi, n_seed, endpoint=False))
    H = fit_laurent(fi_eval(Z, rr, tt), u(rr, tt), degrees)
    r_test, theta_test = np.broadcast_arrays(np.asarray(r_test, float), np.asarray(theta_test, float))
    return float(np.max(np.abs(H(fi_eval(Z, r_test, theta_test)) - u(r_test, theta_test))))
