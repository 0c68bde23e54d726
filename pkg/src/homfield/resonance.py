"""Resonances of the pair (mu, lam) and the small-divisor condition.

The pair is resonant when ``mu lam = mu l + k`` for some positive integer l
and integer k.  The small divisors of the series solver are
``d_j = |1 - exp(2 pi i mu (j - lam))|``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import ResonanceError

RES_TOL = 1e-9
DENOM_CAP = 10 ** 6
IM_TOL = 1e-10


@dataclass(frozen=True)
class ResonanceReport:
    resonant: bool
    witnesses: list[tuple[int, int]]
    progression: tuple[int, int] | None = None
    rational_mu: tuple[int, int] | None = None
    ambiguous: list[int] = field(default_factory=list)
    divfree_consistent: bool | None = None

    def to_dict(self) -> dict:
        return {"resonant": self.resonant, "witnesses": [list(w) for w in self.witnesses],
                "progression": None if self.progression is None else list(self.progression),
                "rational_mu": None if self.rational_mu is None else list(self.rational_mu),
                "ambiguous": self.ambiguous,
                "divfree_consistent": self.divfree_consistent}


def rational_approx(x: complex, tol: float = 1e-14) -> tuple[int, int] | None:
    """(m, n) in lowest terms if x is real and equals m/n with n <= 10^6."""
    x = complex(x)
    if abs(x.imag) > tol:
        return None
    fr = Fraction(x.real).limit_denominator(DENOM_CAP)
    if abs(fr.numerator / fr.denominator - x.real) > tol * max(1.0, abs(x.real)):
        return None
    return fr.numerator, fr.denominator


def resonance_analyze(mu: complex, lam: complex, j_max: int = 1000,
                      div_free: bool = False) -> ResonanceReport:
    mu, lam = complex(mu), complex(lam)
    if mu == 0:
        return ResonanceReport(True, [(l, 0) for l in range(1, j_max + 1)], (1, 1), (0, 1))
    tol = RES_TOL * (1 + abs(mu * lam))
    ls = np.arange(1, j_max + 1)
    x = mu * (lam - ls)
    k = np.round(x.real)
    dist = np.abs(x - k)
    hit = dist <= tol
    near = (dist > tol) & (dist <= 10 * tol)
    witnesses = [(int(l), int(kk)) for l, kk in zip(ls[hit], k[hit])]
    rat = rational_approx(mu)
    prog = None
    if rat is not None and witnesses:
        prog = (witnesses[0][0], rat[1])
    consistent = None
    if div_free:
        lam_rational = rational_approx(lam) is not None and lam.real > 0
        consistent = bool(witnesses) == (mu == 0 or lam_rational)
    return ResonanceReport(bool(witnesses), witnesses, prog, rat,
                           [int(l) for l in ls[near]], consistent)


class DCStatus(str, enum.Enum):
    ProvenHolds_A = "ProvenHolds_A"
    ProvenHolds_B = "ProvenHolds_B"
    Estimated = "Estimated"
    ViolationSuspected = "ViolationSuspected"


@dataclass(frozen=True)
class DCReport:
    status: DCStatus
    C_estimate: float
    j_scanned: int
    worst_j: int
    d: np.ndarray = field(repr=False)
    dc_prime: np.ndarray = field(repr=False)

    def to_dict(self) -> dict:
        return {"status": self.status.value, "C_estimate": self.C_estimate,
                "j_scanned": self.j_scanned, "worst_j": self.worst_j}


def small_divisors(mu: complex, lam: complex, j) -> np.ndarray:
    j = np.asarray(j)
    # for Im(mu) < 0 the exponential overflows to inf, which is the right limit for d_j
    with np.errstate(over="ignore", invalid="ignore"):
        return np.abs(1 - np.exp(2j * np.pi * complex(mu) * (j - complex(lam))))


def dc_classify(mu: complex, lam: complex, j_max: int = 500) -> DCReport:
    mu, lam = complex(mu), complex(lam)
    if resonance_analyze(mu, lam, j_max).resonant:
        raise ResonanceError(f"(mu, lambda) = ({mu}, {lam}) is resonant")
    js = np.arange(1, j_max + 1)
    d = small_divisors(mu, lam, js)
    roots = np.minimum(1.0, d) ** (1.0 / js)
    worst = int(js[np.argmin(roots)])
    # shrink slightly so that d_j >= C^j survives rounding for every j
    C = float(min(1.0, roots.min()) * (1 - 1e-12))
    x = mu * (js - lam)
    dcp = np.abs(x - np.round(x.real))
    if abs(mu.imag) > IM_TOL:
        status = DCStatus.ProvenHolds_A
    elif abs(lam.imag) > IM_TOL:
        status = DCStatus.ProvenHolds_B
    else:
        tail = roots[-100:]
        falling = np.all(np.diff(tail) < 0) and tail[-1] < 1e-3
        status = DCStatus.ViolationSuspected if falling else DCStatus.Estimated
    return DCReport(status, C, j_max, worst, d, dcp)


def dc_prime_bound(rep: DCReport) -> float:
    """min_j (4 pi |mu(j - lam) - k|)^(1/j), the companion form of the condition."""
    js = np.arange(1, rep.j_scanned + 1)
    return float(np.min(np.minimum(1.0, 4 * math.pi * rep.dc_prime) ** (1.0 / js)))
