"""Smooth 2pi-periodic complex functions held as uniform samples plus FFT data.

A :class:`PeriodicFn` stores ``n`` samples at ``theta_k = 2 pi k / n`` and the
matching trigonometric-interpolation coefficients.  Functions built from a
closed-form evaluator remember how to rebuild themselves, so any derived
quantity can be recomputed at a finer grid for a resolution-doubling check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import ConvergenceError, DegenerateError, DivisionError, GridError

TWO_PI = 2.0 * np.pi
DEFAULT_GRID = 1024
MIN_GRID = 16
DIVISION_FLOOR = 1e-12
TANGENTIAL_TOL = 1e-10
ORDER_TOL = 1e-6
MAX_ORDER = 12
INFINITE = math.inf


def check_grid(n: int) -> int:
    n = int(n)
    if n < MIN_GRID or n & (n - 1):
        raise GridError(f"grid size must be a power of two >= {MIN_GRID}, got {n}")
    return n


def grid(n: int) -> np.ndarray:
    return TWO_PI * np.arange(n) / n


def _freqs(n: int) -> np.ndarray:
    return np.fft.fftfreq(n, 1.0 / n)


def _resize_coeffs(c: np.ndarray, m: int) -> np.ndarray:
    """Zero-pad or truncate numpy-ordered coefficients to length ``m``."""
    n = c.size
    if m == n:
        return c.copy()
    out = np.zeros(m, dtype=complex)
    h = min(n, m) // 2
    out[:h] = c[:h]
    out[m - h + 1:] = c[n - h + 1:]
    if m > n:
        out[h] = 0.5 * c[h]
        out[m - h] = 0.5 * c[h]
    else:
        out[h] = c[h] + c[n - h]
    return out


@dataclass(frozen=True, eq=False)
class PeriodicFn:
    """Samples of a periodic function on the uniform grid of size ``n_grid``."""

    samples: np.ndarray
    rebuild: Callable[[int], "PeriodicFn"] | None = field(default=None, repr=False)

    def __post_init__(self):
        s = np.array(self.samples, dtype=complex)
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def n_grid(self) -> int:
        return self.samples.size

    @property
    def theta(self) -> np.ndarray:
        return grid(self.n_grid)

    @cached_property
    def fft(self) -> np.ndarray:
        """Coefficients in numpy order, normalised so samples = n * ifft."""
        c = np.fft.fft(self.samples) / self.n_grid
        c.setflags(write=False)
        return c

    @cached_property
    def bandwidth(self) -> int:
        """Largest |j| whose coefficient exceeds 1e-15 of the largest one."""
        a = np.abs(self.fft)
        big = np.flatnonzero(a > 1e-15 * max(a.max(), 1e-300))
        if big.size == 0:
            return 0
        return int(np.abs(_freqs(self.n_grid)[big]).max())

    def coeff(self, j: int) -> complex:
        """Coefficient of ``e^{ij theta}``; the Nyquist mode is split evenly."""
        n = self.n_grid
        if abs(j) > n // 2:
            return 0j
        if abs(j) == n // 2:
            return complex(0.5 * self.fft[n // 2])
        return complex(self.fft[j % n])

    @property
    def coeffs(self) -> dict[int, complex]:
        n = self.n_grid
        return {j: self.coeff(j) for j in range(-(n // 2), n // 2 + 1)}

    @property
    def mean(self) -> complex:
        return complex(self.fft[0])

    def sup(self) -> float:
        return float(np.max(np.abs(self.samples)))

    def is_real(self, tol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.samples.imag)) <= tol * max(self.sup(), 1e-300))

    def __call__(self, theta):
        return pf_eval(self, theta)

    # -- spectral calculus -------------------------------------------------
    def derivative(self, order: int = 1) -> "PeriodicFn":
        if order == 0:
            return self
        n = self.n_grid
        k = _freqs(n)
        mult = (1j * k) ** order
        mult[n // 2] = 0.0
        rb = None
        if self.rebuild is not None:
            rb = lambda m, f=self, o=order: f.resample(m).derivative(o)
        return PeriodicFn(np.fft.ifft(self.fft * mult) * n, rb)

    def primitive(self) -> "PeriodicFn":
        """Periodic primitive of the zero-mean part, vanishing at theta = 0."""
        n = self.n_grid
        k = _freqs(n)
        c = np.zeros(n, dtype=complex)
        nz = k != 0
        c[nz] = self.fft[nz] / (1j * k[nz])
        c[n // 2] = 0.0
        c[0] = -np.sum(c)
        rb = None
        if self.rebuild is not None:
            rb = lambda m, f=self: f.resample(m).primitive()
        return PeriodicFn(np.fft.ifft(c) * n, rb)

    def resample(self, m: int) -> "PeriodicFn":
        check_grid(m)
        if m == self.n_grid:
            return self
        if self.rebuild is not None:
            return self.rebuild(m)
        return PeriodicFn(np.fft.ifft(_resize_coeffs(self.fft, m)) * m)

    def reflect(self) -> "PeriodicFn":
        """theta -> pi - theta, exact on the grid."""
        n = self.n_grid
        idx = (n // 2 - np.arange(n)) % n
        rb = None
        if self.rebuild is not None:
            rb = lambda m, f=self: f.resample(m).reflect()
        return PeriodicFn(self.samples[idx], rb)

    # -- pointwise algebra -------------------------------------------------
    def _binary(self, op, other, swap=False):
        if isinstance(other, PeriodicFn):
            return pf_combine(op, other, self) if swap else pf_combine(op, self, other)
        return _scalar_op(op, self, complex(other), swap)

    def __add__(self, other):
        return self._binary("add", other)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary("sub", other)

    def __rsub__(self, other):
        return self._binary("sub", other, swap=True)

    def __mul__(self, other):
        return self._binary("mul", other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._binary("div", other)

    def __rtruediv__(self, other):
        return self._binary("div", other, swap=True)

    def __neg__(self):
        return _scalar_op("mul", self, -1.0 + 0j, False)

    def conj(self):
        return pf_combine("conj", self)

    @property
    def real(self):
        return pf_combine("re", self)

    @property
    def imag(self):
        return pf_combine("im", self)

    def abs(self):
        return pf_combine("abs", self)

    def map(self, func: Callable[[np.ndarray], np.ndarray]) -> "PeriodicFn":
        """Apply an elementwise numpy function to the samples."""
        rb = None
        if self.rebuild is not None:
            rb = lambda m, f=self, g=func: f.resample(m).map(g)
        return PeriodicFn(func(self.samples), rb)


def pf_build(source, n_grid: int | None = None) -> PeriodicFn:
    """Sample a vectorised evaluator on the grid, or wrap explicit samples."""
    if callable(source):
        n = check_grid(DEFAULT_GRID if n_grid is None else n_grid)
        th = grid(n)
        vals = np.broadcast_to(np.asarray(source(th), dtype=complex), th.shape)
        if not np.all(np.isfinite(vals)):
            raise GridError("evaluator returned non-finite values")
        return PeriodicFn(vals, lambda m, src=source: pf_build(src, m))
    vals = np.asarray(source, dtype=complex).ravel()
    n = check_grid(vals.size)
    if n_grid is not None and int(n_grid) != n:
        raise GridError(f"got {n} samples for n_grid={n_grid}")
    if not np.all(np.isfinite(vals)):
        raise GridError("samples contain non-finite values")
    return PeriodicFn(vals)


def constant(value: complex, n_grid: int = DEFAULT_GRID) -> PeriodicFn:
    return pf_build(lambda t, v=complex(value): np.full(t.shape, v), n_grid)


def pf_eval(f: PeriodicFn, theta):
    """Trigonometric interpolant at arbitrary angles (scalar or array)."""
    th = np.asarray(theta, dtype=float)
    if not np.all(np.isfinite(th)):
        raise ValueError("theta must be finite")
    flat = th.ravel()
    n = f.n_grid
    h = n // 2
    b = f.bandwidth
    if b < h:
        k = np.arange(-b, b + 1)
        c = np.concatenate([f.fft[n - b:], f.fft[:b + 1]]) if b else f.fft[:1]
        nyq = 0.0
    else:
        k = np.arange(-h + 1, h)
        c = np.concatenate([f.fft[n - h + 1:], f.fft[:h]])
        nyq = f.fft[h]
    if flat.size >= 64:
        # Horner in z = e^{i theta}: one complex exponential per point
        z = np.exp(1j * flat)
        acc = np.full(flat.size, c[-1], dtype=complex)
        for a in c[-2::-1]:
            acc *= z
            acc += a
        out = acc * np.exp(1j * k[0] * flat) + nyq * np.cos(h * flat)
    else:
        out = np.exp(1j * np.outer(flat, k)) @ c + nyq * np.cos(h * flat)
    if th.ndim == 0:
        return complex(out[0])
    return out.reshape(th.shape)


@dataclass(frozen=True)
class Calculus:
    derivative: PeriodicFn
    mean: complex
    antiderivative_periodic: PeriodicFn


def pf_calculus(f: PeriodicFn) -> Calculus:
    """Derivative, mean, and periodic primitive; full primitive = mean*theta + periodic part."""
    return Calculus(f.derivative(), f.mean, f.primitive())


_UNARY = {
    "conj": np.conj,
    "re": lambda a: a.real.astype(complex),
    "im": lambda a: a.imag.astype(complex),
    "abs": lambda a: np.abs(a).astype(complex),
}
_BINARY = {
    "add": np.add,
    "sub": np.subtract,
    "mul": np.multiply,
    "div": np.divide,
}


def _scalar_op(op, f: PeriodicFn, c: complex, swap: bool) -> PeriodicFn:
    a, b = (c, f.samples) if swap else (f.samples, c)
    if op == "div":
        denom = np.abs(b) if np.ndim(b) else abs(b)
        if np.min(denom) < DIVISION_FLOOR:
            raise DivisionError("division by a function vanishing on the grid")
    rb = None
    if f.rebuild is not None:
        rb = lambda m, f=f, c=c: _scalar_op(op, f.resample(m), c, swap)
    return PeriodicFn(_BINARY[op](a, b), rb)


def pf_combine(op: str, f: PeriodicFn, g: PeriodicFn | None = None,
               floor: float = DIVISION_FLOOR) -> PeriodicFn:
    """Pointwise operation on samples; mismatched grids are upsampled spectrally."""
    if op in _UNARY:
        rb = None
        if f.rebuild is not None:
            rb = lambda m, f=f: pf_combine(op, f.resample(m))
        return PeriodicFn(_UNARY[op](f.samples), rb)
    if op not in _BINARY:
        raise ValueError(f"unknown operation {op!r}")
    if g is None:
        raise ValueError(f"operation {op!r} needs two operands")
    n = max(f.n_grid, g.n_grid)
    fa, ga = f.resample(n), g.resample(n)
    if op == "div":
        gmin = float(np.min(np.abs(ga.samples)))
        if gmin < floor:
            raise DivisionError(
                f"division by a function vanishing on the grid (min |g| = {gmin:.3e})")
    rb = None
    if f.rebuild is not None and g.rebuild is not None:
        rb = lambda m, f=f, g=g: pf_combine(op, f.resample(m), g.resample(m), floor)
    return PeriodicFn(_BINARY[op](fa.samples, ga.samples), rb)


def doubling_check(compute: Callable[[int], object], n: int, tol: float,
                   what: str = "quantity"):
    """Run ``compute`` at n and 2n and require agreement to ``tol``."""
    a = compute(n)
    b = compute(2 * n)
    diff = float(np.max(np.abs(np.asarray(a) - np.asarray(b))))
    if diff > tol:
        raise ConvergenceError(f"{what} changed by {diff:.3e} under grid doubling")
    return a


# -- zeros and extrema --------------------------------------------------------

@dataclass(frozen=True)
class Zero:
    theta: float
    order: float  # int, or INFINITE
    sign_change: bool


@dataclass(frozen=True)
class ZerosExtrema:
    zeros: list[Zero]
    min: tuple[float, float]
    max: tuple[float, float]
    argmin_all: list[float]
    argmax_all: list[float]


def _wrap(t):
    return np.mod(t, TWO_PI)


def _sign_change_roots(f: PeriodicFn, upsample: int = 4) -> tuple[list[float], list[float]]:
    """Roots of a real periodic function at sign changes, and exact node zeros."""
    g = _upsampled(f, upsample)
    v = g.samples.real
    th = g.theta
    m = v.size
    h = TWO_PI / m
    fr = lambda t: pf_eval(f, t).real
    roots, node_zeros = [], []
    for k in range(m):
        a, b = v[k], v[(k + 1) % m]
        if a == 0.0:
            node_zeros.append(th[k])
        elif a * b < 0:
            lo, hi = th[k], th[k] + h
            fa, fb = fr(lo), fr(hi)
            if fa * fb < 0:
                roots.append(float(_wrap(brentq(fr, lo, hi, xtol=1e-15, rtol=1e-15))))
            else:
                # rounding disagreement between the sampled and evaluated sign
                roots.append(float(_wrap(lo if abs(fa) <= abs(fb) else hi)))
    return roots, node_zeros


def _upsampled(f: PeriodicFn, factor: int) -> PeriodicFn:
    """Interpolant of the stored samples on a finer grid (ignores ``rebuild``)."""
    m = f.n_grid * factor
    return PeriodicFn(np.fft.ifft(_resize_coeffs(f.fft, m)) * m)


def _order_at(derivs: list[PeriodicFn], t: float) -> float:
    for m, d in enumerate(derivs, start=1):
        norm = d.sup()
        if norm == 0.0:
            continue
        if abs(pf_eval(d, t)) > ORDER_TOL * norm:
            return m
    return INFINITE


def _close(t, others, tol):
    return any(abs((t - o + np.pi) % TWO_PI - np.pi) < tol for o in others)



CLUSTER_GAP = 1e-3


def _clusters(ts: list[float], gap: float) -> list[list[float]]:
    """Group angles whose circular spacing is below ``gap``; each group is unwrapped."""
    if not ts:
        return []
    ts = sorted(float(_wrap(t)) for t in ts)
    diffs = np.diff(ts + [ts[0] + TWO_PI])
    start = (int(np.argmax(diffs)) + 1) % len(ts)
    ordered = ts[start:] + [t + TWO_PI for t in ts[:start]]
    groups = [[ordered[0]]]
    for t in ordered[1:]:
        if t - groups[-1][-1] < gap:
            groups[-1].append(t)
        else:
            groups.append([t])
    return groups


def _real_zeros(base: PeriodicFn, derivs, candidates, crit, cvals) -> list[Zero]:
    """Turn candidate roots into zeros, one per cluster.

    Near a zero of high order, rounding noise makes the sampled function
    cross zero several times within a tiny interval.  Each cluster is judged
    as a whole: the sign change is read just outside it, and a tangential
    cluster is represented by the critical point where |f| is smallest.
    """
    out = []
    h = TWO_PI / base.n_grid
    crit = np.asarray(crit, float)
    cvals = np.abs(np.asarray(cvals, float))
    for g in _clusters(candidates, CLUSTER_GAP):
        lo, hi = g[0], g[-1]
        delta = 0.01 * h if len(g) == 1 else max(2 * (hi - lo), 1e-6)
        fa, fb = pf_eval(base, np.array([lo - delta, hi + delta])).real
        change = bool(fa * fb < 0)
        theta = g[len(g) // 2]
        if len(g) > 1 and not change and crit.size:
            near = np.abs((crit - 0.5 * (lo + hi) + np.pi) % TWO_PI - np.pi) <= 0.5 * (hi - lo) + delta
            if near.any():
                k = np.flatnonzero(near)[np.argmin(cvals[near])]
                theta = float(crit[k])
        theta = float(_wrap(theta))
        order = _order_at(derivs, theta)
        if order != INFINITE and (order % 2 == 1) != change:
            # the parity of the order is fixed by the sign change; a location
            # error of a high-order zero leaks into the lower derivatives
            order += 1
        out.append(Zero(theta, order, change))
    return out

def pf_zeros_extrema(f: PeriodicFn, assume_real: bool = True,
                     scale: float = 1.0) -> ZerosExtrema:
    """Locate zeros (with order and sign-change flag) and global extrema.

    For real ``f`` zeros come from a sign-change scan refined by Brent's method,
    plus tangential zeros: critical points where ``|f|`` falls below
    ``1e-10 * ||f||``.  For complex ``f`` zeros are local minima of ``|f|``
    refined by golden-section search and the extrema refer to ``|f|``.
    """
    norm = f.sup()
    if norm <= 1e-12 * scale:
        raise DegenerateError("function vanishes identically on the grid")
    if assume_real:
        if np.max(np.abs(f.samples.imag)) > 1e-12 * norm:
            raise ValueError("assume_real set but the imaginary part is not negligible")
        base = f.real
    else:
        base = f
    derivs = []
    d = base
    for _ in range(MAX_ORDER):
        d = d.derivative()
        derivs.append(d)
    if assume_real:
        roots, node_zeros = _sign_change_roots(base)
        if derivs[0].sup() <= 1e-13 * norm:
            crit = [0.0]
        else:
            crit, crit_nodes = _sign_change_roots(derivs[0])
            crit = crit + [float(t) for t in crit_nodes]
        cvals = pf_eval(base, np.asarray(crit)).real
        tangential = [t for t, v in zip(crit, cvals) if abs(v) <= TANGENTIAL_TOL * norm]
        zeros = _real_zeros(base, derivs, roots + node_zeros + tangential, crit, cvals)
        crit = np.asarray(crit)
    else:
        s = np.abs(base.samples)
        n = s.size
        h = TWO_PI / n
        absf = lambda t: abs(pf_eval(base, t))
        negabs = lambda t: -abs(pf_eval(base, t))
        zeros = []
        crit_l, cval_l = [], []
        for k in range(n):
            is_min = s[k] <= s[k - 1] and s[k] <= s[(k + 1) % n]
            is_max = s[k] >= s[k - 1] and s[k] >= s[(k + 1) % n]
            if not (is_min or is_max):
                continue
            res = minimize_scalar(absf if is_min else negabs,
                                  bracket=(base.theta[k] - h, base.theta[k], base.theta[k] + h),
                                  method="golden", tol=1e-12)
            t = float(_wrap(res.x))
            crit_l.append(t)
            cval_l.append(abs(pf_eval(base, t)))
            if is_min and cval_l[-1] <= TANGENTIAL_TOL * norm \
                    and not _close(t, [z.theta for z in zeros], 1e-7):
                zeros.append(Zero(t, _order_at(derivs, t), False))
        crit, cvals = np.asarray(crit_l), np.asarray(cval_l)
    zeros.sort(key=lambda z: z.theta)
    imax, imin = int(np.argmax(cvals)), int(np.argmin(cvals))
    vmax, vmin = float(cvals[imax]), float(cvals[imin])
    tol = 1e-9 * norm
    argmax_all = sorted({round(float(t), 13) for t, v in zip(crit, cvals) if v >= vmax - tol})
    argmin_all = sorted({round(float(t), 13) for t, v in zip(crit, cvals) if v <= vmin + tol})
    return ZerosExtrema(zeros, (float(crit[imin]), vmin), (float(crit[imax]), vmax),
                        _dedupe(argmin_all), _dedupe(argmax_all))


def _dedupe(ts: Sequence[float], tol: float = 1e-9) -> list[float]:
    out: list[float] = []
    for t in ts:
        if not _close(t, out, tol):
            out.append(float(t))
    return out


# -- functions of the form r^a v(theta) ------------------------------------------

@dataclass(frozen=True, eq=False)
class PowerFn:
    """``u(r, theta) = r**exponent * v(theta)`` with complex exponent."""

    exponent: complex
    v: PeriodicFn

    def __call__(self, r, theta):
        r = np.asarray(r, dtype=float)
        return np.exp(self.exponent * np.log(r)) * pf_eval(self.v, theta)

    def terms(self) -> list["PowerFn"]:
        return [self]

    def scaled(self, c: complex) -> "PowerFn":
        return PowerFn(self.exponent, self.v * c)
