import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad
from scipy.stats import multivariate_normal

from gmmflow.errors import DomainError, NotSpd
from gmmflow.gaussian import (
    Gaussian,
    ot_map,
    pair_report,
    quadratic_proxy,
    surrogate_cost,
    surrogate_cov_term,
    w2_squared,
)

from pairs import random_pair, random_spd

# frozen values from 30-digit evaluation of the per-eigenvalue closed forms
COMMUTING_SRC = np.diag([2.0, 3.0])
COMMUTING_DST = np.diag([1.6, 3.5])
COMMUTING_C_COV = 0.0415831901098282662
COMMUTING_W2_COV = 0.0415505375924762443
COMMUTING_Q = 0.0408333333333333356
ROW1_C = 5.03972077083991796


def _w2_oracle(src, dst):
    """Bures formula through Schur-based square roots."""
    r = sla.sqrtm(src.cov.entries).real
    cross = sla.sqrtm(r @ dst.cov.entries @ r).real
    dm = dst.mean - src.mean
    return dm @ dm + np.trace(src.cov.entries + dst.cov.entries - 2.0 * cross)


def _surrogate_oracle(src, dst):
    """Adaptive quadrature of 1/4 Tr(dS S(t)^{-1} dS) along the linear path."""
    s0, s1 = src.cov.entries, dst.cov.entries
    dS = s1 - s0
    f = lambda t: 0.25 * np.trace(dS @ np.linalg.solve((1 - t) * s0 + t * s1, dS))
    val, _ = quad(f, 0.0, 1.0, epsabs=1e-13, epsrel=1e-13)
    dm = dst.mean - src.mean
    return dm @ dm + val


def test_row_one_exact_values():
    src, dst = Gaussian([0.0], [[1.0]]), Gaussian([2.0], [[4.0]])
    rep = pair_report(src, dst)
    assert rep.w2_total == pytest.approx(5.0, abs=1e-14)
    assert rep.surrogate_total == pytest.approx(ROW1_C, abs=1e-14)
    assert rep.quadratic_proxy == pytest.approx(2.25)
    assert rep.err_w == pytest.approx(1.25)
    assert rep.err_c == pytest.approx(6.25 - ROW1_C, abs=1e-12)


def test_commuting_pair_frozen_values():
    s, d = Gaussian(np.zeros(2), COMMUTING_SRC), Gaussian(np.zeros(2), COMMUTING_DST)
    assert surrogate_cost(s, d) == pytest.approx(COMMUTING_C_COV, rel=1e-13)
    assert w2_squared(s, d) == pytest.approx(COMMUTING_W2_COV, rel=1e-12)
    assert quadratic_proxy(s, d) == pytest.approx(COMMUTING_Q, rel=1e-13)


def test_against_independent_oracles():
    rng = np.random.default_rng(5)
    for d in (1, 2, 4, 7):
        src, dst = random_pair(rng, d)
        assert w2_squared(src, dst) == pytest.approx(_w2_oracle(src, dst), rel=1e-9, abs=1e-9)
        assert surrogate_cost(src, dst) == pytest.approx(_surrogate_oracle(src, dst), rel=1e-9)


def test_self_cost_is_zero():
    rng = np.random.default_rng(1)
    g = Gaussian(rng.standard_normal(3), random_spd(rng, 3))
    assert surrogate_cost(g, g) == 0.0
    assert w2_squared(g, g) == pytest.approx(0.0, abs=1e-12)
    assert quadratic_proxy(g, g) == 0.0


def test_identity_to_scaled_identity():
    # C_cov = d/4 * s log(1 + s), W2_cov = d (sqrt(1+s) - 1)^2
    d, s = 3, 1.5
    a, b = Gaussian(np.zeros(d), np.eye(d)), Gaussian(np.zeros(d), (1 + s) * np.eye(d))
    assert surrogate_cost(a, b) == pytest.approx(0.25 * d * s * np.log1p(s), rel=1e-14)
    assert w2_squared(a, b) == pytest.approx(d * (np.sqrt(1 + s) - 1) ** 2, rel=1e-12)


def test_ot_map_pushes_source_to_target():
    rng = np.random.default_rng(9)
    for d in (1, 3, 6):
        src, dst = random_pair(rng, d)
        m, shift = ot_map(src, dst)
        np.testing.assert_allclose(m, m.T, atol=0)
        assert np.linalg.eigvalsh(m).min() > 0
        np.testing.assert_allclose(m @ src.cov.entries @ m, dst.cov.entries, rtol=1e-9, atol=1e-10)
        np.testing.assert_allclose(m @ src.mean + shift, dst.mean, atol=1e-12)
        # transport cost of the map equals W2^2
        e = np.trace((m - np.eye(d)) @ src.cov.entries @ (m - np.eye(d))) + np.sum((dst.mean - src.mean) ** 2)
        assert e == pytest.approx(w2_squared(src, dst), rel=1e-9)


def test_logpdf_matches_scipy():
    rng = np.random.default_rng(2)
    g = Gaussian(rng.standard_normal(4), random_spd(rng, 4))
    x = rng.standard_normal((10, 4))
    ref = multivariate_normal(g.mean, g.cov.entries).logpdf(x)
    np.testing.assert_allclose(g.logpdf(x), ref, rtol=1e-12)
    assert np.ndim(g.logpdf(x[0])) == 0


def test_errors():
    with pytest.raises(NotSpd):
        Gaussian([0.0, 0.0], np.diag([1.0, -1.0]))
    with pytest.raises(ValueError):
        Gaussian([0.0], np.eye(2))
    with pytest.raises(ValueError):
        w2_squared(Gaussian([0.0], [[1.0]]), Gaussian([0.0, 0.0], np.eye(2)))
    with pytest.raises(DomainError):
        surrogate_cov_term(Gaussian([0.0], [[1.0]]).cov, np.array([[-1.0]]))


def test_report_gap_identity():
    rng = np.random.default_rng(3)
    src, dst = random_pair(rng, 5)
    rep = pair_report(src, dst)
    assert rep.gap == rep.surrogate_total - rep.w2_total
    assert rep.err_w >= 0 and rep.err_c >= 0


@settings(max_examples=200, deadline=None)
@given(st.sampled_from([1, 2, 5, 10]), st.integers(0, 2**31 - 1))
def test_surrogate_dominates_w2(d, seed):
    src, dst = random_pair(np.random.default_rng(seed), d, kappa_max=1e3)
    w = w2_squared(src, dst)
    assert surrogate_cost(src, dst) >= w - 1e-9 * max(1.0, w)


@settings(max_examples=100, deadline=None)
@given(st.sampled_from([1, 3, 6]), st.integers(0, 2**31 - 1))
def test_w2_symmetric_and_nonnegative(d, seed):
    src, dst = random_pair(np.random.default_rng(seed), d)
    a, b = w2_squared(src, dst), w2_squared(dst, src)
    assert a >= 0
    assert a == pytest.approx(b, rel=1e-9, abs=1e-12)
