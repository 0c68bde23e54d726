"""Homogeneous vector fields L = r^(lam-1) (p(theta) d_theta - i q(theta) r d_r).

The diagnostics here (mu, characteristic rays, solvability condition P,
divergence, Liouville property) are pure functions of ``(lam, p, q)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import ConvergenceError, DegenerateError, DivisionError, FieldError
from .periodic import (DEFAULT_GRID, INFINITE, PeriodicFn, pf_build, pf_combine,
                       pf_zeros_extrema)

MU_DOUBLING_TOL = 1e-10
DIV_FREE_TOL = 1e-10
LIOUVILLE_TOL = 1e-10
DEGREE_TOL = 1e-12


@dataclass(frozen=True)
class CharacteristicRay:
    theta: float
    order: float
    sign_change: bool


@dataclass(frozen=True)
class FieldReport:
    mu: complex
    rays: list[CharacteristicRay]
    c1_ok: bool
    c2_ok: bool
    condition_p: bool
    div_free: bool
    liouville: bool
    finite_type: bool

    def to_dict(self) -> dict:
        return {
            "mu": [self.mu.real, self.mu.imag],
            "rays": [{"theta": r.theta,
                      "order": None if r.order == INFINITE else int(r.order),
                      "sign_change": r.sign_change} for r in self.rays],
            "c1_ok": self.c1_ok,
            "c2_ok": self.c2_ok,
            "condition_p": self.condition_p,
            "div_free": self.div_free,
            "liouville": self.liouville,
            "finite_type": self.finite_type,
        }


@dataclass(frozen=True, eq=False)
class HomogeneousField:
    lam: complex
    p: PeriodicFn
    q: PeriodicFn

    @property
    def n_grid(self) -> int:
        return max(self.p.n_grid, self.q.n_grid)

    @cached_property
    def ratio(self) -> PeriodicFn:
        """q / p."""
        return pf_combine("div", self.q, self.p)

    @cached_property
    def re_qpbar(self) -> PeriodicFn:
        return pf_combine("re", self.q * self.p.conj())

    @cached_property
    def divergence(self) -> PeriodicFn:
        """Angular factor of div L, i.e. p' - i (lam + 1) q."""
        return self.p.derivative() - 1j * (self.lam + 1) * self.q

    def resample(self, n: int) -> "HomogeneousField":
        return HomogeneousField(self.lam, self.p.resample(n), self.q.resample(n))

    def apply(self, u_theta, u_rdr, r):
        """L u at radius ``r`` given d_theta u and r d_r u sampled on the grid."""
        return r ** (self.lam - 1) * (self.p.samples * u_theta - 1j * self.q.samples * u_rdr)


def field_build_pq(lam: complex, p: PeriodicFn, q: PeriodicFn) -> HomogeneousField:
    lam = complex(lam)
    if not lam.real > 1:
        raise FieldError(f"need Re(lambda) > 1, got Re(lambda) = {lam.real:g}")
    n = max(p.n_grid, q.n_grid)
    p, q = p.resample(n), q.resample(n)
    pmin = float(np.min(np.abs(p.samples)))
    if pmin < 1e-12 * max(1.0, p.sup()):
        raise DivisionError(f"p vanishes on the grid (min |p| = {pmin:.3e})")
    return HomogeneousField(lam, p, q)


def fourier_fn(terms, n_grid: int = DEFAULT_GRID) -> PeriodicFn:
    """PeriodicFn from index-tagged Fourier terms ``[(j, c_j), ...]``."""
    terms = [(int(j), complex(c)) for j, c in terms]

    def ev(t):
        out = np.zeros(np.shape(t), dtype=complex)
        for j, c in terms:
            out = out + c * np.exp(1j * j * t)
        return out

    return pf_build(ev, n_grid)


def polynomial_pq(A_coeffs: Sequence[complex], B_coeffs: Sequence[complex],
                  n_grid: int = DEFAULT_GRID) -> tuple[complex, PeriodicFn, PeriodicFn]:
    """Polar data ``(lam, p, q)`` of ``A d_x + B d_y`` with A, B homogeneous of degree N+1.

    ``A = sum_j A_j x^(N+1-j) y^j`` and likewise for B.  The trigonometric
    degree bound ``N + 2`` of p and q is verified on the coefficients.
    """
    A = np.asarray(A_coeffs, dtype=complex)
    B = np.asarray(B_coeffs, dtype=complex)
    if A.size != B.size or A.size < 3:
        raise FieldError("A and B need equal length N+2 >= 3")
    deg = A.size - 1

    def hom(c):
        return lambda t: sum(cj * np.cos(t) ** (deg - j) * np.sin(t) ** j
                             for j, cj in enumerate(c)) + 0 * t

    a, b = hom(A), hom(B)
    p = pf_build(lambda t: b(t) * np.cos(t) - a(t) * np.sin(t), n_grid)
    q = pf_build(lambda t: 1j * (a(t) * np.cos(t) + b(t) * np.sin(t)), n_grid)
    bound = deg + 1
    for name, f in (("p", p), ("q", q)):
        scale = max(1.0, f.sup())
        high = max((abs(c) for j, c in f.coeffs.items() if abs(j) > bound), default=0.0)
        if high > DEGREE_TOL * scale:
            raise ConvergenceError(f"{name} has modes beyond degree {bound}: {high:.3e}")
    return complex(deg), p, q


def field_build_polynomial(A_coeffs, B_coeffs, n_grid: int = DEFAULT_GRID) -> HomogeneousField:
    lam, p, q = polynomial_pq(A_coeffs, B_coeffs, n_grid)
    if p.sup() <= 1e-12:
        raise DivisionError("p vanishes identically")
    return field_build_pq(lam, p, q)


def _mean_ratio(L: HomogeneousField) -> complex:
    return L.ratio.mean


def compute_mu(L: HomogeneousField, check: bool = True) -> complex:
    """Mean of q/p, confirmed under grid doubling when the data can be rebuilt."""
    mu = _mean_ratio(L)
    if check and L.p.rebuild is not None and L.q.rebuild is not None:
        mu2 = _mean_ratio(L.resample(2 * L.n_grid))
        if abs(mu - mu2) > MU_DOUBLING_TOL:
            raise ConvergenceError(f"mu changed by {abs(mu - mu2):.3e} under grid doubling")
    return complex(mu)


def characteristic_set(L: HomogeneousField) -> list[CharacteristicRay]:
    """Rays where Re(q conj p) vanishes; raises DegenerateError if it vanishes identically."""
    f = L.re_qpbar
    scale = max(1.0, L.p.sup() * L.q.sup())
    ze = pf_zeros_extrema(f, assume_real=True, scale=scale)
    return [CharacteristicRay(z.theta, z.order, z.sign_change) for z in ze.zeros]


def check_structure(L: HomogeneousField) -> FieldReport:
    mu = compute_mu(L)
    c2_ok = float(np.min(np.abs(L.p.samples))) > 1e-12
    try:
        rays = characteristic_set(L)
        c1_ok = True
    except DegenerateError:
        rays, c1_ok = [], False
    condition_p = c1_ok and not any(r.sign_change for r in rays)
    dp = L.p.derivative()
    div_free = L.divergence.sup() <= DIV_FREE_TOL * (dp.sup() + L.q.sup())
    liouville = abs(mu.real) > LIOUVILLE_TOL
    finite_type = c1_ok and all(r.order != INFINITE for r in rays)
    if condition_p:
        # Re(q/p) = Re(q conj p) / |p|^2, so a one-signed Re(q conj p) fixes sign(Re mu)
        s = np.sign(L.re_qpbar.mean.real)
        if mu.real * s <= 0:
            raise ConvergenceError("condition P holds but Re(mu) has the wrong sign")
    return FieldReport(mu, rays, c1_ok, c2_ok, condition_p, bool(div_free), liouville,
                       finite_type)


def orient(L: HomogeneousField) -> HomogeneousField:
    """Pull back by (x, y) -> (-x, y) when Re(mu) < 0 so that Re(mu) >= 0.

    In polar form this reflection is theta -> pi - theta, which sends
    ``p`` to ``-p(pi - theta)`` and ``q`` to ``q(pi - theta)``.
    """
    mu = compute_mu(L, check=False)
    if mu.real >= 0:
        return L
    out = HomogeneousField(L.lam, -L.p.reflect(), L.q.reflect())
    if compute_mu(out, check=False).real < 0:
        raise ConvergenceError("reflection did not flip the sign of Re(mu)")
    return out
