"""Envelopes of extendability of starlike domains for real mu >= 0.

Two boundary points are in the same class when Z maps them to the same ray
of the image plane, i.e. when their class angles agree:
``alpha = theta + phi_1`` (mod 2 pi) for ``mu > 0`` and ``alpha = phi_1`` for
``mu = 0``.  ``rho`` is the largest ``|Z|`` over a class, and the envelope
radius in direction theta is the r at which ``|Z(r, theta)| = rho(class)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConvergenceError, DegenerateError, PreconditionError
from .field import HomogeneousField
from .integral import FirstIntegral, Kind, fi_eval
from .periodic import TWO_PI, PeriodicFn, pf_build, pf_eval

IDEMPOTENCE_TOL = 1e-8
SCAN_FACTOR = 4


@dataclass(frozen=True, eq=False)
class StarlikeDomain:
    """``{r < R(theta)}``; ``exact`` evaluates R off the grid when R is not smooth."""

    R: PeriodicFn
    exact: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        if not self.R.is_real():
            raise PreconditionError("boundary radius must be real")
        if self.R.samples.real.min() <= 0:
            raise PreconditionError("boundary radius must be positive")

    def radius(self, theta):
        theta = np.asarray(theta, float)
        if self.exact is not None:
            return np.asarray(self.exact(theta), float)
        return np.asarray(pf_eval(self.R, theta)).real

    def scaled(self, t: float) -> "StarlikeDomain":
        ex = None if self.exact is None else (lambda th, e=self.exact: t * e(th))
        return StarlikeDomain(self.R * t, ex)


def disc(radius: float = 1.0, n_grid: int = 1024) -> StarlikeDomain:
    return StarlikeDomain(pf_build(lambda t: np.full(t.shape, float(radius)), n_grid),
                          lambda t, r=float(radius): np.full(np.shape(t), r))


@dataclass(frozen=True, eq=False)
class EnvelopeResult:
    rho: PeriodicFn
    Lambda: PeriodicFn
    R_env: StarlikeDomain


def _require_real_mu(Z: FirstIntegral):
    if Z.kind not in (Kind.ZeroMu, Kind.PositiveReMu) or abs(Z.mu.imag) > 1e-10:
        raise PreconditionError("envelopes are defined for real mu >= 0 only")


class _ClassSolver:
    """Solve alpha(theta') = alpha(theta) for all theta' on the circle, vectorised."""

    def __init__(self, Z: FirstIntegral):
        _require_real_mu(Z)
        self.Z = Z
        self.periodic = Z.kind is Kind.PositiveReMu
        phi1 = Z.phi.real
        self.phi1 = phi1
        self.dalpha = phi1.derivative()
        n = SCAN_FACTOR * phi1.n_grid
        self.scan = TWO_PI * np.arange(n + 1) / n
        self.scan_alpha = self.alpha(self.scan)
        da = np.abs(Z.turns + pf_eval(self.dalpha, self.scan[:-1]).real)
        flat = da < 1e-10
        if flat.any():
            run = np.diff(np.flatnonzero(np.diff(np.r_[0, flat.astype(int), 0])))[::2]
            if run.size and run.max() > 2:
                raise DegenerateError("class angle is constant on an interval")

    def alpha(self, theta):
        theta = np.asarray(theta, float)
        return self.Z.turns * theta + np.asarray(pf_eval(self.phi1, theta)).real

    def _g(self, theta, target):
        d = self.alpha(theta) - target
        if self.periodic:
            d = (d + np.pi) % TWO_PI - np.pi
        return d

    def classes(self, thetas: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """All theta' in the class of each theta, as (index into thetas, theta')."""
        thetas = np.asarray(thetas, float).ravel()
        targets = self.alpha(thetas)
        d = self.scan_alpha[None, :] - targets[:, None]
        if self.periodic:
            d = (d + np.pi) % TWO_PI - np.pi
        a, b = d[:, :-1], d[:, 1:]
        cross = ((a <= 0) & (b > 0)) | ((a >= 0) & (b < 0))
        if self.periodic:
            cross &= np.abs(a - b) < np.pi
        ti, ki = np.nonzero(cross)
        lo, hi = self.scan[ki], self.scan[ki + 1]
        glo = d[ti, ki]
        tgt = targets[ti]
        exact = glo == 0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            gm = self._g(mid, tgt)
            left = np.sign(gm) == np.sign(glo)
            lo = np.where(left, mid, lo)
            glo = np.where(left, gm, glo)
            hi = np.where(left, hi, mid)
            if np.max(hi - lo, initial=0.0) < 1e-14:
                break
        roots = np.where(exact, self.scan[ki], 0.5 * (lo + hi))
        # a direction always belongs to its own class, even at a tangency
        return (np.concatenate([ti, np.arange(thetas.size)]),
                np.concatenate([roots, thetas]) % TWO_PI)


def _modulus(Z: FirstIntegral, D: StarlikeDomain, theta):
    return np.abs(fi_eval(Z, D.radius(theta), theta))


def rho_at(Z: FirstIntegral, D: StarlikeDomain, thetas, solver: _ClassSolver | None = None):
    """rho(class of theta) for each theta."""
    solver = solver or _ClassSolver(Z)
    thetas = np.asarray(thetas, float)
    idx, roots = solver.classes(thetas.ravel())
    vals = _modulus(Z, D, roots)
    out = np.full(thetas.size, -np.inf)
    np.maximum.at(out, idx, vals)
    return out.reshape(thetas.shape)


def rho_map(L: HomogeneousField, Z: FirstIntegral, D: StarlikeDomain) -> PeriodicFn:
    _require_real_mu(Z)
    n = D.R.n_grid
    return pf_build(lambda t: rho_at(Z, D, t), n)


def _lambda_from_rho(Z: FirstIntegral, rho, theta):
    phi2 = np.asarray(pf_eval(Z.phi.imag, theta)).real
    if Z.kind is Kind.PositiveReMu:
        mu = Z.mu.real
        return rho ** mu * np.exp(mu * phi2)
    return rho ** (1.0 / Z.sigma) * np.exp(phi2 / Z.sigma)


def envelope_radius(Z: FirstIntegral, D: StarlikeDomain) -> Callable[[np.ndarray], np.ndarray]:
    solver = _ClassSolver(Z)

    def radius(theta):
        theta = np.asarray(theta, float)
        return _lambda_from_rho(Z, rho_at(Z, D, theta, solver), theta)

    return radius


def envelope_build(L: HomogeneousField, Z: FirstIntegral, D: StarlikeDomain,
                   check: bool = True) -> EnvelopeResult:
    _require_real_mu(Z)
    n = D.R.n_grid
    solver = _ClassSolver(Z)
    th = TWO_PI * np.arange(n) / n
    rho = rho_at(Z, D, th, solver)
    lam = _lambda_from_rho(Z, rho, th)
    radius = envelope_radius(Z, D)
    R_env = StarlikeDomain(pf_build(radius, n), radius)
    result = EnvelopeResult(pf_build(rho, n), pf_build(lam, n), R_env)
    if check:
        again = _lambda_from_rho(Z, rho_at(Z, R_env, th, solver), th)
        err = float(np.max(np.abs(again - lam)))
        if err > IDEMPOTENCE_TOL * max(1.0, float(np.max(lam))):
            raise ConvergenceError(f"envelope is not idempotent (change {err:.3e})")
        if np.any(lam < D.radius(th) - 1e-8):
            raise ConvergenceError("envelope does not contain the domain")
    return result


def _image_radius(Z: FirstIntegral, D: StarlikeDomain, angles, n_dense: int):
    """Radial extent of Z(D) along each image angle, from the polyline Z(dD).

    Found independently of the class solver: crossings of the sampled
    boundary image with each ray are bracketed on a dense polyline and then
    refined by secant steps on the exact class angle.
    """
    t = TWO_PI * np.arange(n_dense + 1) / n_dense
    periodic = Z.kind is Kind.PositiveReMu
    ph1 = Z.phi.real

    def ang(s):
        return Z.turns * s + np.asarray(pf_eval(ph1, s)).real

    a = ang(t)
    angles = np.asarray(angles, float)
    ai, ki, f0, f1 = [], [], [], []
    for s in range(0, angles.size, 256):
        d = a[None, :] - angles[s:s + 256, None]
        if periodic:
            d = (d + np.pi) % TWO_PI - np.pi
        da, db = d[:, :-1], d[:, 1:]
        cross = (np.sign(da) != np.sign(db)) | (da == 0)
        if periodic:
            cross &= np.abs(da - db) < np.pi
        i, k = np.nonzero(cross)
        ai.append(i + s)
        ki.append(k)
        f0.append(da[i, k])
        f1.append(db[i, k])
    ai, ki, f0, f1 = map(np.concatenate, (ai, ki, f0, f1))
    x0, x1 = t[ki], t[ki + 1]
    tgt = angles[ai]
    for _ in range(8):
        denom = np.where(f1 == f0, 1.0, f1 - f0)
        x2 = np.where(f1 == f0, x1, x1 - f1 * (x1 - x0) / denom)
        x0, f0 = x1, f1
        x1 = x2
        f1 = ang(x1) - tgt
        if periodic:
            f1 = (f1 + np.pi) % TWO_PI - np.pi
    out = np.zeros(angles.size)
    np.maximum.at(out, ai, _modulus(Z, D, x1 % TWO_PI))
    return out


def envelope_check(L: HomogeneousField, Z: FirstIntegral, D: StarlikeDomain,
                   E: EnvelopeResult, n_samples: int = 4096) -> float:
    """Discrepancy between Z(boundary of the envelope) and the boundary of Z(D)."""
    th = TWO_PI * np.arange(n_samples) / n_samples
    z_env = fi_eval(Z, E.R_env.radius(th), th)
    angle = Z.turns * th + np.asarray(pf_eval(Z.phi.real, th)).real
    target = _image_radius(Z, D, angle, 2 * n_samples)
    return float(np.max(np.abs(np.abs(z_env) - target)))
