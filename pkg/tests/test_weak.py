import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from homfield.errors import PreconditionError
from homfield.field import field_build_polynomial
from homfield.integral import first_integral, solution_from_powers
from homfield.periodic import PowerFn, constant, pf_build, pf_eval
from homfield.presets import get_preset
from homfield.solve import HomogeneousRHS, solve_homogeneous
from homfield.weak import (
    BATTERY_QUAD, Quadrature, TestFn, delta_check, dirac_derivative_check, lowreg_constant,
    transpose_apply, weak_battery, weak_pair, weak_pair_lowreg, weak_residual,
    weak_residual_lowreg,
)

QUAD = BATTERY_QUAD
FINE = Quadrature(n_theta=256, n_uniform=32, n_graded=40, order=16)
PHI = TestFn((0.2, -0.1), 0.9, {(0, 0): 1.0, (1, 0): 0.5 - 0.2j, (1, 1): 0.3})


def _cartesian_box(phi, n):
    cx, cy = phi.center
    h = 2 * phi.R / n
    x = cx - phi.R + h * np.arange(n)
    y = cy - phi.R + h * np.arange(n)
    X, Y = np.meshgrid(x, y, indexing="ij")
    return X, Y, h


def _cartesian_integral(f, phi, n=512):
    """Trapezoid rule on a box around the support (spectrally accurate for bumps)."""
    X, Y, h = _cartesian_box(phi, n)
    return np.sum(f(X, Y)) * h * h


# -- test functions -----------------------------------------------------------------

def test_partials_match_finite_differences():
    rng = np.random.default_rng(3)
    phi = TestFn((0.1, 0.2), 1.0, {(0, 0): 1.0, (2, 1): -0.7, (0, 1): 0.4j})
    rad = 0.85 * np.sqrt(rng.random(100))
    ang = 2 * np.pi * rng.random(100)
    x, y = 0.1 + rad * np.cos(ang), 0.2 + rad * np.sin(ang)
    P = phi.partials(x, y, 2)
    h = 1e-4
    f = phi
    fd = {
        (1, 0): (f(x + h, y) - f(x - h, y)) / (2 * h),
        (0, 1): (f(x, y + h) - f(x, y - h)) / (2 * h),
        (2, 0): (f(x + h, y) - 2 * f(x, y) + f(x - h, y)) / h ** 2,
        (0, 2): (f(x, y + h) - 2 * f(x, y) + f(x, y - h)) / h ** 2,
        (1, 1): (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h)) / (4 * h * h),
    }
    for key, val in fd.items():
        assert np.max(np.abs(P[key] - val)) < 1e-6 * max(1.0, np.max(np.abs(val)))


def test_radial_derivatives_match_partials():
    rng = np.random.default_rng(4)
    phi = TestFn((0.0, 0.0), 1.0, {(1, 0): 1.0, (0, 2): 2.0})
    r = 0.8 * rng.random(50) + 0.05
    th = 2 * np.pi * rng.random(50)
    c, s = np.cos(th), np.sin(th)
    D = phi.radial_derivatives(r, th, 12)
    P = phi.partials(r * c, r * s, 3)
    for n in (1, 2, 3):
        direct = sum(math.comb(n, i) * c ** (n - i) * s ** i * P[(n - i, i)] for i in range(n + 1))
        assert np.max(np.abs(D[n] - direct)) < 1e-8 * max(1.0, np.max(np.abs(direct)))
    # high orders: compare with finite differences of the order-10 derivative
    h = 1e-3
    d10 = lambda rr: phi.radial_derivatives(rr, th, 10)[10]
    d11 = (-d10(r + 2 * h) + 8 * d10(r + h) - 8 * d10(r - h) + d10(r - 2 * h)) / (12 * h)
    D11 = phi.radial_derivatives(r, th, 11)[11]
    assert np.max(np.abs(D11 - d11)) < 1e-6 * np.max(np.abs(D11))


def test_support_and_value_at_origin():
    phi = TestFn((0.0, 0.0), 1.0)
    assert abs(phi(0.0, 0.0) - np.exp(-1)) < 1e-15
    assert phi(1.0, 0.0) == 0 and phi(0.7, 0.8) == 0


# -- transpose ------------------------------------------------------------------------------

def test_transpose_outside_support_and_radial_case():
    L = get_preset("example2")
    phi = TestFn((0.0, 0.0), 0.5)
    assert np.all(transpose_apply(L, phi, np.array([0.6, 0.9]), np.array([0.0, 2.0])) == 0)
    p = pf_build(lambda t: np.ones_like(t), 64)
    from homfield.field import field_build_pq
    L0 = field_build_pq(2.0, p, constant(0, 64))
    r = np.linspace(0.05, 0.95, 20)
    assert np.max(np.abs(transpose_apply(L0, TestFn(), r, 0.3 + 0 * r))) < 1e-14


def _L_cartesian(L, psi, n):
    """L Psi on a periodic box by FFT differentiation."""
    X, Y, h = _cartesian_box(psi, n)
    vals = psi(X, Y)
    k = 2 * np.pi * np.fft.fftfreq(n, d=h)
    F = np.fft.fft2(vals)
    dx = np.fft.ifft2(1j * k[:, None] * F)
    dy = np.fft.ifft2(1j * k[None, :] * F)
    r = np.hypot(X, Y)
    th = np.arctan2(Y, X) % (2 * np.pi)
    p, q = pf_eval(L.p, th), pf_eval(L.q, th)
    return X, Y, h, r ** (L.lam - 1) * (p * (X * dy - Y * dx) - 1j * q * (X * dx + Y * dy))


@pytest.mark.parametrize("name", ["example1", "example3", "divfree"])
def test_transpose_identity(name):
    L = get_preset(name)
    psi = TestFn((0.7, 0.35), 0.45, {(0, 0): 1.0, (0, 1): 0.8j})
    phi = TestFn((0.5, 0.1), 0.9, {(0, 0): 1.0, (1, 0): -0.6, (1, 1): 0.3 + 0.4j})
    X, Y, h, Lpsi = _L_cartesian(L, psi, 256)
    lhs = np.sum(Lpsi * phi(X, Y)) * h * h
    r, th = np.hypot(X, Y), np.arctan2(Y, X) % (2 * np.pi)
    tphi = transpose_apply(L, phi, r, th)
    rhs = np.sum(psi(X, Y) * tphi) * h * h
    scale = np.sum(np.abs(psi(X, Y) * tphi)) * h * h
    assert abs(lhs - rhs) <= 1e-6 * scale


# -- pairings -----------------------------------------------------------------------------------

def test_pair_with_one_matches_cartesian_integral():
    one = PowerFn(0.0, constant(1, 64))
    val = weak_pair(one, PHI, FINE)
    assert abs(val - _cartesian_integral(PHI, PHI)) < 1e-8 * abs(val)
    assert abs(val - weak_pair(one, PHI, QUAD)) < 1e-8 * abs(val)


def test_angular_orthogonality():
    u = PowerFn(-1.0, pf_build(lambda t: np.exp(1j * t), 64))
    phi = TestFn((0.0, 0.0), 0.8, {(0, 0): 1.0})
    assert abs(weak_pair(u, phi, QUAD)) < 1e-13


@pytest.mark.parametrize("a", [-1.5, -0.5 + 0.3j, 0.7])
def test_pair_homogeneity(a):
    # <u, Phi(./s)> = s^(a+2) <u, Phi> for u = r^a v
    u = PowerFn(a, pf_build(lambda t: 2 + np.cos(t) + 0.5j * np.sin(3 * t), 64))
    base = weak_pair(u, PHI, QUAD)
    scaled = weak_pair(u, PHI.dilated(2.0), QUAD)
    assert abs(scaled - 2.0 ** (a + 2) * base) <= 1e-6 * abs(scaled)


def test_nonintegrable_power_rejected():
    with pytest.raises(PreconditionError):
        weak_pair(PowerFn(-2.0, constant(1, 64)), PHI, QUAD)


@given(st.complex_numbers(max_magnitude=3), st.complex_numbers(max_magnitude=3))
def test_pairing_linearity(a, b):
    u1 = PowerFn(-0.5, pf_build(lambda t: np.cos(t) + 1j, 64))
    phi2 = TestFn((-0.1, 0.3), 0.7, {(0, 1): 1.0})
    small = Quadrature(n_theta=32, n_uniform=8, n_graded=40, order=6)
    lhs = weak_pair(u1, PHI.scaled(a), small) + weak_pair(u1, phi2.scaled(b), small)
    rhs = a * weak_pair(u1, PHI, small) + b * weak_pair(u1, phi2, small)
    assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))
    u2 = PowerFn(-0.5, pf_build(lambda t: a * (np.cos(t) + 1j) + b * np.sin(2 * t), 64))
    u3 = PowerFn(-0.5, pf_build(lambda t: np.sin(2 * t) + 0j, 64))
    lhs = weak_pair(u2, PHI, small)
    rhs = a * weak_pair(u1, PHI, small) + b * weak_pair(u3, PHI, small)
    assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs), abs(rhs))


@pytest.fixture(scope="module")
def ex2():
    L = get_preset("example2:k=1")
    f0 = pf_build(lambda t: np.ones_like(t), L.n_grid)
    sol = solve_homogeneous(L, HomogeneousRHS(1.5, f0))
    return L, sol, PowerFn(1.5, f0)


def test_weak_residual_homogeneous_solution(ex2):
    L, sol, f = ex2
    for phi in (PHI, TestFn((0.0, 0.0), 1.0, {(0, 0): 1.0, (0, 1): 2.0})):
        res = weak_residual(L, sol, f, phi, QUAD)
        assert res.relative <= 1e-8


def test_weak_residual_negative_control(ex2):
    L, sol, f = ex2
    bumped = PowerFn(sol.nu, sol.v * 1.01)
    res = weak_residual(L, bumped, f, PHI, QUAD)
    assert abs(abs(res.defect) / abs(res.rhs) - 0.01) < 1e-3


def test_weak_residual_first_integral_power():
    L = get_preset("example2:k=2")
    u = solution_from_powers(L, first_integral(L), 1).u
    assert weak_residual(L, u, 0, PHI, QUAD).relative <= 1e-8


def test_weak_battery(ex2):
    L, sol, f = ex2
    out = weak_battery(L, sol, f, count=4, seed=1)
    assert max(r.relative for r in out) <= 1e-4


# -- low regularity -----------------------------------------------------------------------

def test_lowreg_constant_matches_gamma_ratio():
    from scipy.special import gamma
    for sigma, lam in ((1.0, 4.5), (1.5, 5.2), (0.7, 5.2), (1.2 + 0.3j, 6.1)):
        k = math.floor((lam - sigma).real)
        c = lowreg_constant(sigma, lam, k - 2)
        ref = gamma(lam - sigma - k) / gamma(lam - sigma - 2)
        assert abs(c - ref) < 1e-12 * abs(ref)


@pytest.fixture(scope="module")
def lowreg_case():
    L = get_preset("example2:k=1,lam=4.5")
    f0 = pf_build(lambda t: 1 + 0.5 * np.cos(t), L.n_grid)
    sol = solve_homogeneous(L, HomogeneousRHS(1.0, f0))
    return L, sol, PowerFn(1.0, f0)


def test_lowreg_zero_data(lowreg_case):
    L, sol, _ = lowreg_case
    assert weak_pair_lowreg(L, constant(0, 64), 1.0, 4.5, PHI, quad=QUAD) == 0


def test_lowreg_homogeneity(lowreg_case):
    L, sol, _ = lowreg_case
    base = weak_pair_lowreg(L, sol.v, 1.0, 4.5, PHI, quad=QUAD)
    scaled = weak_pair_lowreg(L, sol.v, 1.0, 4.5, PHI.dilated(2.0), quad=QUAD)
    a = sol.nu
    assert abs(scaled - 2.0 ** (a + 2) * base) <= 1e-5 * abs(scaled)


def test_lowreg_residual(lowreg_case):
    L, sol, f = lowreg_case
    assert weak_residual_lowreg(L, sol.v, 1.0, f, PHI, quad=QUAD).relative <= 1e-4


def test_lowreg_overlap_with_plain_pairing():
    # Re sigma > Re lam - 2: both pairings apply and must agree
    v = pf_build(lambda t: np.exp(1j * t) + 0.3, 64)
    sigma, lam = 2.9, 4.5
    plain = weak_pair(PowerFn(sigma + 1 - lam, v), PHI, QUAD)
    for m in (1, 2):
        assert abs(weak_pair_lowreg(None, v, sigma, lam, PHI, m=m, quad=QUAD) - plain) <= 1e-5 * abs(plain)


def test_lowreg_preconditions():
    v = constant(1, 64)
    with pytest.raises(PreconditionError):
        weak_pair_lowreg(None, v, 3.0, 4.5, PHI)


# -- fundamental solution and Dirac derivatives -------------------------------------------------

@pytest.fixture(scope="module")
def divfree():
    return get_preset("divfree")


def test_delta_pure_bump(divfree):
    res = delta_check(divfree, TestFn())
    assert abs(res.target - np.exp(-1)) < 1e-15
    assert res.defect <= 1e-3
    assert res.ladder[-1][1] <= res.ladder[0][1]
    assert min(res.orders) >= 1


def test_delta_shift_and_linearity(divfree):
    shifted = delta_check(divfree, TestFn((1.5, 0.5), 1.0), ladder=(FINE,))
    assert abs(shifted.value) <= 1e-6 and shifted.target == 0
    phi = TestFn((0.1, 0.0), 0.8, {(0, 0): 1.0, (1, 0): 0.5})
    one = delta_check(divfree, phi).value
    three = delta_check(divfree, phi.scaled(3.0)).value
    assert abs(three - 3 * one) <= 1e-10 * abs(three)


def test_delta_preconditions():
    with pytest.raises(PreconditionError):
        delta_check(get_preset("example2"), TestFn())


@pytest.mark.parametrize("N", [2, 4])
def test_dirac_all_admissible_orders(N):
    L = get_preset(f"hamiltonian:N={N}")
    phi = TestFn((0.1, -0.05), 0.9, {(0, 0): 1.0, (1, 0): 0.7, (0, 2): -0.4j})
    for n in range(N):
        for j in range(n + 1):
            assert dirac_derivative_check(L, j, n - j, phi).defect <= 1e-5


def test_dirac_out_of_range():
    L = get_preset("hamiltonian:N=4")
    with pytest.raises(PreconditionError, match="Re\\(lambda\\)"):
        dirac_derivative_check(L, 2, 2, PHI)


def test_dirac_needs_divergence_free_at_top_order():
    # A = -i y^2 + xy/2, B = x^2: polynomial of degree 2 with nonzero divergence
    L = field_build_polynomial([0, 0.5, -1j], [1, 0, 0])
    phi = TestFn((0.1, -0.05), 0.9, {(0, 0): 1.0, (1, 0): 0.7})
    assert dirac_derivative_check(L, 0, 0, phi).defect <= 1e-5
    assert max(dirac_derivative_check(L, j, 1 - j, phi).defect for j in range(2)) > 1e-3
