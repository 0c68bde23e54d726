import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from homfield.errors import ResonanceError
from homfield.resonance import (
    DCStatus, dc_classify, dc_prime_bound, rational_approx, resonance_analyze, small_divisors,
)


def _identity_error(mu, lam, l, k):
    return abs(mu * lam - mu * l - k)


def test_imaginary_mu_unique_witness():
    rep = resonance_analyze(1j, 2.0)
    assert rep.resonant
    assert rep.witnesses == [(2, 0)]
    assert rep.rational_mu is None and rep.progression is None


def test_rational_mu_progression():
    rep = resonance_analyze(0.5, 3.0)
    assert rep.resonant
    assert rep.witnesses[0] == (1, 1)
    assert rep.progression == (1, 2)
    assert rep.rational_mu == (1, 2)
    # exhaustive scan: exactly the odd l up to j_max
    assert [l for l, _ in rep.witnesses] == list(range(1, 1001, 2))


def test_irrational_nonresonant():
    rep = resonance_analyze(math.sqrt(2), 2.5)
    assert not rep.resonant and rep.witnesses == []


def test_zero_mu_trivially_resonant():
    rep = resonance_analyze(0.0, 2.7, j_max=10)
    assert rep.resonant and rep.witnesses[0] == (1, 0)


def test_near_threshold_flagged():
    rep = resonance_analyze(0.5, 3.0 + 1e-8)
    assert not rep.resonant
    assert 1 in rep.ambiguous


def test_witness_identity_reevaluated():
    for mu, lam in ((1j, 2.0), (0.5, 3.0), (1 / 3, 2.0), (0.25 + 0j, 5.0)):
        rep = resonance_analyze(mu, lam)
        tol = 1e-9 * (1 + abs(mu * lam))
        assert all(_identity_error(mu, lam, l, k) <= tol for l, k in rep.witnesses)


def test_divfree_criterion():
    # resonant iff lambda is a positive rational (for mu != 0)
    assert resonance_analyze(1 / 3, 2.0, div_free=True).divfree_consistent
    assert resonance_analyze(1 / 3.5, 2.5, div_free=True).divfree_consistent
    rep = resonance_analyze(1 / (1 + math.pi), math.pi, div_free=True)
    assert not rep.resonant and rep.divfree_consistent


@given(st.floats(0.1, 3.0), st.floats(0.1, 3.0), st.floats(-3.0, 3.0))
def test_non_real_mu_has_at_most_one_witness(a, b, lam_re):
    rep = resonance_analyze(complex(a, b), complex(lam_re, 0.3), j_max=200)
    assert len(rep.witnesses) <= 1


def test_rational_recognition():
    assert rational_approx(0.75) == (3, 4)
    assert rational_approx(1 / 7) == (1, 7)
    assert rational_approx(math.sqrt(2)) is None
    assert rational_approx(0.5 + 1j) is None


def test_dc_branch_a():
    rep = dc_classify(1j, 0.5)
    assert rep.status is DCStatus.ProvenHolds_A
    assert 0 < rep.C_estimate <= 1


def test_dc_branch_b_constant_divisor():
    rep = dc_classify(1.0, 2 + 1j)
    assert rep.status is DCStatus.ProvenHolds_B
    assert np.max(np.abs(rep.d - (np.exp(2 * np.pi) - 1))) < 1e-9 * np.exp(2 * np.pi)
    js = np.arange(1, 501)
    # (e^{2 pi} - 1)^{1/j} decreases towards 1
    trend = (np.exp(2 * np.pi) - 1) ** (1 / js)
    assert np.all(np.diff(trend) < 0) and trend[-1] > 1


def test_dc_golden_ratio():
    rep = dc_classify((1 + math.sqrt(5)) / 2, 1 / 3)
    assert rep.status is DCStatus.Estimated
    assert rep.C_estimate > 0.1


def test_dc_rejects_resonant():
    with pytest.raises(ResonanceError):
        dc_classify(0.5, 3.0)


def test_dc_prime_agrees_within_factor_ten():
    for mu, lam in (((1 + math.sqrt(5)) / 2, 1 / 3), (math.sqrt(2), 0.5), (math.e, 0.1)):
        rep = dc_classify(mu, lam)
        b = dc_prime_bound(rep)
        assert rep.C_estimate / 10 <= b <= rep.C_estimate * 10


@given(st.floats(-2.0, 2.0), st.floats(0.01, 2.0), st.floats(-3.0, 3.0), st.floats(-1.0, 1.0))
def test_dc_certificate_and_branches(mre, mim, lre, lim):
    mu, lam = complex(mre, mim), complex(lre, lim)
    if resonance_analyze(mu, lam, 200).resonant:
        return
    rep = dc_classify(mu, lam, 200)
    assert rep.status is not DCStatus.Estimated
    js = np.arange(1, 201)
    assert np.all(small_divisors(mu, lam, js) >= rep.C_estimate ** js)


@given(st.floats(0.05, 3.0), st.floats(-3.0, 3.0))
def test_dc_certificate_real_pairs(mu, lam):
    if resonance_analyze(mu, lam, 300).resonant:
        return
    rep = dc_classify(mu, lam, 300)
    js = np.arange(1, 301)
    assert np.all(rep.d >= rep.C_estimate ** js)
    assert 1 <= rep.worst_j <= 300
