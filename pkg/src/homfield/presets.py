"""Named fields used by the CLI and the tests."""

from __future__ import annotations

import numpy as np

from .errors import PreconditionError
from .field import HomogeneousField, field_build_pq
from .periodic import DEFAULT_GRID, pf_build


def example1(n_grid: int = DEFAULT_GRID) -> HomogeneousField:
    """lam = 2, p = 1, q = (pi/2) sin - i cos; mu = 0."""
    p = pf_build(lambda t: np.ones_like(t), n_grid)
    q = pf_build(lambda t: 0.5 * np.pi * np.sin(t) - 1j * np.cos(t), n_grid)
    return field_build_pq(2.0, p, q)


def example2(k: int = 2, mu: complex = 1.0, lam: complex = 3.0,
             n_grid: int = DEFAULT_GRID) -> HomogeneousField:
    """p = 1, q = mu (1 + k cos k theta); first integral r^(1/mu) e^(i(theta + sin k theta))."""
    p = pf_build(lambda t: np.ones_like(t), n_grid)
    q = pf_build(lambda t: mu * (1 + k * np.cos(k * t)), n_grid)
    return field_build_pq(lam, p, q)


def example3(n_grid: int = DEFAULT_GRID) -> HomogeneousField:
    """lam = 2, p = 1, q = 2 cos 2theta - 2 sin 4theta + i; mu = i."""
    p = pf_build(lambda t: np.ones_like(t), n_grid)
    q = pf_build(lambda t: 2 * np.cos(2 * t) - 2 * np.sin(4 * t) + 1j, n_grid)
    return field_build_pq(2.0, p, q)


def divfree_from(f, lam: complex, n_grid: int = DEFAULT_GRID) -> HomogeneousField:
    """Divergence-free field of F = r^(lam+1) f(theta): p = (lam+1) f, q = -i f'."""
    fp = pf_build(f, n_grid)
    return field_build_pq(lam, (lam + 1) * fp, -1j * fp.derivative())


def divfree(N: int = 2, n_grid: int = DEFAULT_GRID) -> HomogeneousField:
    """f = e^(i theta)(2 + cos theta), lam = N, so mu = 1/(N+1)."""
    return divfree_from(lambda t: np.exp(1j * t) * (2 + np.cos(t)), float(N), n_grid)


def hamiltonian(N: int = 2, n_grid: int = DEFAULT_GRID) -> HomogeneousField:
    """Polynomial field H_y d_x - H_x d_y with H = x^(N+1) + i y^(N+1).

    The coefficients are polynomials of degree N, so L is smooth at the
    origin, and it is divergence free with mu = 1/(N+1).
    """
    d = N + 1
    return divfree_from(lambda t: -(np.cos(t) ** d + 1j * np.sin(t) ** d), float(N), n_grid)


def elliptic(n_grid: int = DEFAULT_GRID) -> HomogeneousField:
    p = pf_build(lambda t: np.ones_like(t), n_grid)
    q = pf_build(lambda t: np.full(t.shape, 1 + 1j), n_grid)
    return field_build_pq(2.0, p, q)


PRESETS = {
    "example1": example1,
    "example2": example2,
    "example3": example3,
    "divfree": divfree,
    "hamiltonian": hamiltonian,
    "elliptic": elliptic,
}


def get_preset(name: str, n_grid: int = DEFAULT_GRID, **params) -> HomogeneousField:
    """Look up a preset; ``name`` may carry parameters, e.g. ``example2:k=1,mu=1``."""
    base, _, arg = name.partition(":")
    if base not in PRESETS:
        raise PreconditionError(f"unknown preset {base!r}; choose from {sorted(PRESETS)}")
    for item in filter(None, arg.split(",")):
        key, _, val = item.partition("=")
        params[key.strip()] = complex(val) if "j" in val else float(val)
    for key in ("k", "N"):
        if key in params:
            params[key] = int(params[key].real if isinstance(params[key], complex) else params[key])
    return PRESETS[base](n_grid=n_grid, **params)
