import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from complab.geometry import mobius
from complab.testfns import (
    basis_coeffs, default_gamma, eval_testfn, fit_lemma_d, lemma_d_gap, make_testfn,
    series_norm,
)
from complab.testfns import testfn_norm as quadrature_norm
from complab.weights import box_mass, std_weight

# 0.19**1.5 / 0.1
F_AT_ZERO = 0.828190799272728
# a = 0.9, z = a, w = 0, s = 2, N = 4 (mpmath at 30 digits)
GAP_LHS = 29.485899686076261
GAP_RHS = 24.930747922437673
ANCHORS = [0.0, 0.5, 0.9, 0.99, 0.999]


@pytest.fixture(scope="module")
def w0():
    return std_weight(0)


@pytest.fixture(scope="module")
def w1():
    return std_weight(1)


def test_origin_anchor_is_constant_one(w0):
    tf = make_testfn(0, w0, p=2, gamma=3)
    z = np.array([0, 0.5, -0.9j, 0.99])
    np.testing.assert_allclose(eval_testfn(tf, z), 1.0, atol=1e-15)


def test_value_at_origin(w0):
    tf = make_testfn(0.9, w0, p=2, gamma=2)
    assert eval_testfn(tf, 0) == pytest.approx(F_AT_ZERO, rel=1e-14)
    dil = make_testfn(0.9, w0, p=2, gamma=2, flavor="dilated", N=4)
    assert dil.t_N == pytest.approx(0.6, abs=1e-15)
    assert eval_testfn(dil, 0) == pytest.approx(F_AT_ZERO, rel=1e-14)


def test_normalization_is_box_mass_power(w1):
    tf = make_testfn(0.7j, w1, p=3)
    assert tf.normalization == pytest.approx(box_mass(w1, 0.7j) ** (-1 / 3), rel=1e-14)


def test_default_gamma(w1):
    cert = w1.certificate()
    assert default_gamma(w1, 2) == pytest.approx(max(cert.beta + 2, 3))
    assert default_gamma(w1, 10) == 11
    assert make_testfn(0.5, w1, p=2).exponent > 1


def test_bad_arguments(w0):
    with pytest.raises(ValueError):
        make_testfn(1.0, w0)
    with pytest.raises(ValueError):
        make_testfn(0.5, w0, flavor="shifted")
    with pytest.raises(ValueError, match="not evaluable"):
        make_testfn(0.5, w0, flavor="dilated", N=-2)


def test_norm_of_constant(w0):
    assert quadrature_norm(make_testfn(0, w0, p=2, gamma=3)) == pytest.approx(1.0, rel=1e-12)


def test_norm_examples(w0, w1):
    n = quadrature_norm(make_testfn(0.99, w0, p=2, gamma=3))
    assert 0.25 <= n <= 4
    n = quadrature_norm(make_testfn(0.999, w1, p=2, gamma=3))
    assert 0.25 <= n <= 4


@pytest.mark.parametrize("alpha", [0.0, 1.0])
@pytest.mark.parametrize("flavor", ["plain", "dilated"])
@pytest.mark.parametrize("a", ANCHORS)
def test_quadrature_agrees_with_series(alpha, flavor, a):
    w = std_weight(alpha)
    tf = make_testfn(a, w, p=2, gamma=3, flavor=flavor)
    assert quadrature_norm(tf) == pytest.approx(series_norm(tf), rel=1e-9)


@pytest.mark.parametrize("a", [0.3, 0.9, 0.99])
def test_series_against_mpmath(w1, a):
    tf = make_testfn(a, w1, p=2, gamma=3)
    ref = abs(tf.scale) * oracles.kernel_norm_series(
        a, tf.exponent, lambda n: oracles.log_beta(n + 1, 2))
    assert series_norm(tf) == pytest.approx(ref, rel=1e-10)


@pytest.mark.parametrize("flavor", ["plain", "dilated"])
def test_norms_stay_in_a_band(w1, flavor):
    norms = [quadrature_norm(make_testfn(a, w1, p=2, flavor=flavor)) for a in ANCHORS]
    band = max(norms) / min(norms)
    assert band < 4


def test_norm_for_p_other_than_two(w0):
    norms = [quadrature_norm(make_testfn(a, w0, p=3)) for a in ANCHORS]
    assert max(norms) / min(norms) < 4


def test_weak_null_on_compacts(w1):
    z0 = 0.5 * np.exp(2j * np.pi * np.arange(16) / 16)
    anchors = (0.9, 0.99, 0.999, 0.9999)
    vals = [np.abs(eval_testfn(make_testfn(a, w1, p=2), z0)).max() for a in anchors]
    assert all(x > 5 * y for x, y in zip(vals, vals[1:]))
    assert vals[-1] < 0.01


def test_point_evaluation_bound(w1):
    rng = np.random.default_rng(8)
    worst = 0.0
    for a in (0.5, 0.9, 0.99, 0.999):
        tf = make_testfn(a, w1, p=2)
        norm = quadrature_norm(tf)
        z = 0.9999 * np.sqrt(rng.random(2000)) * np.exp(2j * np.pi * rng.random(2000))
        z = np.append(z, a)
        lhs = box_mass(w1, z) * np.abs(eval_testfn(tf, z)) ** 2
        worst = max(worst, lhs.max() / norm ** 2)
    assert worst < 10


def test_basis_coefficients_reproduce_the_norm(w1):
    tf = make_testfn(0.9, w1, p=2, gamma=3)
    c = basis_coeffs(tf, 2000)
    assert np.sqrt(np.sum(np.abs(c) ** 2)) == pytest.approx(series_norm(tf), rel=1e-10)


def test_gap_is_zero_for_equal_points():
    assert lemma_d_gap(0.9, 0.9, 0.9, 2, 4) == (0.0, 0.0)


def test_gap_example():
    lhs, rhs = lemma_d_gap(0.9, 0.9, 0, 2, 4)
    assert lhs == pytest.approx(GAP_LHS, rel=1e-12)
    assert rhs == pytest.approx(GAP_RHS, rel=1e-12)
    assert lhs / rhs == pytest.approx(1.1827, abs=1e-4)


def test_gap_rejects_hypothesis_violations():
    with pytest.raises(ValueError, match="pseudo-hyperbolic"):
        lemma_d_gap(0.9, -0.9, 0, 2, 4)
    with pytest.raises(ValueError, match="1/\\(2N\\)"):
        lemma_d_gap(0.8, 0.8, 0, 2, 4)
    with pytest.raises(ValueError):
        lemma_d_gap(0.9, 0.9, 0, 1.0, 4)


@settings(max_examples=200)
@given(st.floats(1e-6, 0.12), st.floats(0, 2 * np.pi), st.floats(0, 0.49),
       st.floats(0, 2 * np.pi), st.floats(0, 0.999), st.floats(0, 2 * np.pi))
def test_gap_ratio_bounded_below(gap, ta, r, tz, rw, tw):
    a = (1 - gap) * np.exp(1j * ta)
    z = complex(mobius(a, r * np.exp(1j * tz)))
    w = rw * np.exp(1j * tw)
    lhs, rhs = lemma_d_gap(a, z, w, 2.0, 4)
    assert lhs >= 0.05 * rhs


def test_fitted_gap_constant_is_positive():
    best, table = fit_lemma_d(s=2.0, r0=0.5, count=10_000)
    assert best in table
    assert all(v > 0 for v in table.values())
    assert table[best] > 0.5
