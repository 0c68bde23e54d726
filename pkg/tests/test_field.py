import numpy as np
import pytest
from hypothesis import given, strategies as st

from homfield.errors import DivisionError, FieldError
from homfield.field import (check_structure, characteristic_set, compute_mu, field_build_polynomial,
                            field_build_pq, orient, polynomial_pq)
from homfield.periodic import constant, pf_build
from homfield.presets import divfree_from

N = 256


def field(q, p=None, lam=2.0, n=N):
    p = constant(1.0, n) if p is None else pf_build(p, n)
    return field_build_pq(lam, p, pf_build(q, n) if callable(q) else constant(q, n))


def test_degenerate_field_builds_but_fails_c1():
    L = field(1j)
    rep = check_structure(L)
    assert not rep.c1_ok and not rep.condition_p


def test_example1_builds(presets):
    L = presets("example1")
    assert L.lam == 2 and abs(compute_mu(L)) < 1e-12


def test_lambda_must_exceed_one():
    with pytest.raises(FieldError):
        field(1.0, lam=1.0)


def test_vanishing_p_rejected():
    with pytest.raises(DivisionError):
        field(1.0, p=np.cos)


def test_polynomial_x2_ixy():
    # A = x^2, B = ixy: by hand, a = cos^2, b = i cos sin, so
    # p = b cos - a sin = (i - 1) cos^2 sin and q = i(cos^3 + i cos sin^2)
    lam, p, q = polynomial_pq([1, 0, 0], [0, 1j, 0], N)
    th = p.theta
    c, s = np.cos(th), np.sin(th)
    assert lam == 2
    assert np.max(np.abs(p.samples - (1j - 1) * c ** 2 * s)) < 1e-14
    assert np.max(np.abs(q.samples - 1j * (c ** 3 + 1j * c * s ** 2))) < 1e-14
    assert max(abs(v) for j, v in p.coeffs.items() if abs(j) > 3) < 1e-12
    # p vanishes on the coordinate axes, so the field itself is rejected
    with pytest.raises(DivisionError):
        field_build_polynomial([1, 0, 0], [0, 1j, 0], N)


def test_zero_polynomial_rejected():
    with pytest.raises(DivisionError):
        field_build_polynomial([0, 0, 0], [0, 0, 0], N)


def test_divfree_build(presets):
    L = presets("divfree")
    rep = check_structure(L)
    assert rep.div_free
    assert abs(rep.mu - 1 / 3) < 1e-10
    # p' = i (lam + 1) q is the defining identity
    assert np.max(np.abs(L.p.derivative().samples - 1j * (L.lam + 1) * L.q.samples)) < 1e-10


def test_mu_examples(presets):
    assert abs(compute_mu(presets("example1"))) < 1e-12
    assert abs(compute_mu(presets("example3")) - 1j) < 1e-12
    assert abs(compute_mu(field(0.3 - 2j)) - (0.3 - 2j)) < 1e-14


def test_example3_rays(presets):
    rays = characteristic_set(presets("example3"))
    p = np.pi
    want = sorted([p / 4, 3 * p / 4, 5 * p / 4, 7 * p / 4, p / 12, 5 * p / 12, 13 * p / 12, 17 * p / 12])
    assert np.allclose([r.theta for r in rays], want, atol=1e-8)
    assert all(r.sign_change for r in rays)


def test_example2_rays(presets):
    rays = characteristic_set(presets("example2"))
    p = np.pi
    assert np.allclose([r.theta for r in rays], [p / 3, 2 * p / 3, 4 * p / 3, 5 * p / 3], atol=1e-8)


def test_elliptic_has_no_rays(presets):
    assert characteristic_set(presets("elliptic")) == []


def test_example2_fails_p(presets):
    assert not check_structure(presets("example2")).condition_p


def test_tangential_zeros_keep_condition_p():
    rep = check_structure(field(lambda t: 1 + np.cos(2 * t) + 1j))
    assert rep.condition_p and rep.mu.real > 0
    assert all(not r.sign_change and r.order == 2 for r in rep.rays)


def test_orient_examples():
    L = field(-1.0)
    Lo = orient(L)
    assert abs(compute_mu(Lo) - 1) < 1e-12
    for q in (1j, lambda t: 0.5 * np.pi * np.sin(t) - 1j * np.cos(t)):
        L = field(q)
        assert orient(L) is L


def test_orient_reflects_rays():
    L = field(lambda t: -1 - 2 * np.cos(2 * t + 0.3) + 0.2j * np.sin(t))
    Lo = orient(L)
    assert compute_mu(Lo).real > 0
    a = sorted(r.theta for r in characteristic_set(L))
    b = sorted((np.pi - r.theta) % (2 * np.pi) for r in characteristic_set(Lo))
    assert np.allclose(a, b, atol=1e-10)


def test_mu_stable_under_doubling(presets):
    L = presets("example2")
    assert abs(compute_mu(L) - compute_mu(L.resample(2 * L.n_grid))) < 1e-10


@given(st.floats(0.1, 10))
def test_rays_depend_only_on_ray_structure(c):
    L = field(lambda t: 1 + 2 * np.cos(2 * t) + 0.5j)
    Lc = field_build_pq(L.lam, L.p, L.q * c)
    a = [r.theta for r in characteristic_set(L)]
    b = [r.theta for r in characteristic_set(Lc)]
    assert np.allclose(a, b, atol=1e-10)


@given(st.floats(-1.0, 1.0), st.floats(0.05, 2.0))
def test_condition_p_implies_positive_re_mu(a, b):
    L = field(lambda t: b + b * np.cos(3 * t) ** 2 + 1j * a * np.sin(t))
    rep = check_structure(L)
    if rep.condition_p:
        assert rep.mu.real > 0


@given(st.integers(1, 3), st.sampled_from([2.0, 3.0, 2.5]), st.floats(0.1, 0.9))
def test_divfree_mu_quantised(j, lam, eps):
    f = lambda t: np.exp(1j * j * t) * (2 + eps * np.cos(t))
    L = divfree_from(f, lam, N)
    rep = check_structure(L)
    assert rep.div_free
    x = rep.mu * (lam + 1)
    assert abs(x - round(x.real)) < 1e-8
