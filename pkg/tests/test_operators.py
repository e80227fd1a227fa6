import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from complab.operators import (
    TruncatedOperator, combo_matrix, composition_matrix, dump_csv, essnorm_proxy, op_norm,
    proxy_decay,
)
from complab.symbols import Composition, Dilation, Rotation, parse_symbol, preset
from complab.testfns import basis_coeffs, make_testfn, series_norm
from complab.weights import std_weight

HALF_SQRT2 = 0.7071067811865476


@pytest.fixture(scope="module")
def w0():
    return std_weight(0)


@pytest.fixture(scope="module")
def w1():
    return std_weight(1)


def test_identity_matrix(w1):
    T = composition_matrix(preset("id"), w1, 32)
    np.testing.assert_allclose(T.entries, np.eye(32), atol=1e-12)


def test_dilation_is_diagonal(w0):
    T = composition_matrix(Dilation(0.5), w0, 16)
    np.testing.assert_allclose(T.entries, np.diag(0.5 ** np.arange(16)), atol=1e-15)


def test_halfmap_entry(w0):
    T = composition_matrix(preset("halfmap"), w0, 8)
    assert T.entries[0, 1] == pytest.approx(HALF_SQRT2, abs=1e-15)


@pytest.mark.parametrize("spec", ["halfmap", "tangentmap", "linfrac:1,0.5,0.25,2"])
def test_columns_match_area_inner_products(spec, w1):
    phi = parse_symbol(spec)
    T = composition_matrix(phi, w1, 8)
    mom = w1.moments(8)
    dens = w1.density
    for n in range(4):
        for m in range(6):
            val = oracles.area_inner(lambda z: phi(z) ** n, lambda z: z ** m, dens)
            ref = val / np.sqrt(mom[n] * mom[m])
            assert T.entries[m, n] == pytest.approx(ref, abs=1e-10)


def test_combo_examples(w0):
    phi = preset("tangentmap")
    Z = combo_matrix([(1, phi), (-1, phi)], w0, 16)
    assert not np.any(Z.entries)
    T = combo_matrix([(1, preset("id")), (-1, Dilation(0.5))], w0, 16)
    np.testing.assert_allclose(np.diag(T.entries), 1 - 0.5 ** np.arange(16), atol=1e-15)
    D = combo_matrix([(1, preset("halfmap")), (-1, preset("zhalfmap"))], w0, 4)
    # column 1: coefficients [0.5, 0.5, 0] - [0, 0.5, 0.5], scaled by sqrt(m_m / m_1)
    ref = np.array([0.5, 0.0, -0.5, 0.0]) * np.sqrt(2 / np.arange(1, 5))
    np.testing.assert_allclose(D.entries[:, 1], ref, atol=1e-15)
    with pytest.raises(ValueError):
        combo_matrix([], w0, 4)


def test_combo_records_provenance(w0):
    T = combo_matrix([(2, preset("halfmap")), (-1j, preset("id"))], w0, 4)
    assert T.provenance == [(2, "halfmap"), (-1j, "id")]


def test_op_norm_examples(w0):
    assert op_norm(composition_matrix(preset("id"), w0, 64)) == pytest.approx(1.0, rel=1e-12)
    assert op_norm(composition_matrix(Rotation(0.4), w0, 64)) == pytest.approx(1.0, rel=1e-12)
    T = TruncatedOperator.from_matrix(np.diag(1 - 2.0 ** -np.arange(64)))
    # 1 - 2**-63 rounds to 1 in double precision
    assert op_norm(T) == pytest.approx(1 - 2.0 ** -63, rel=1e-10)
    assert op_norm(TruncatedOperator.from_matrix(np.zeros((4, 4)))) == 0.0


def test_op_norm_agrees_with_numpy(w1):
    T = composition_matrix(preset("tangentmap"), w1, 64)
    assert op_norm(T) == pytest.approx(np.linalg.norm(T.extended, 2), rel=1e-10)


def test_proxy_examples(w0):
    T = composition_matrix(Dilation(0.5), w0, 64)
    M = [4, 8, 16, 32]
    np.testing.assert_allclose(essnorm_proxy(T, M), 2.0 ** -np.array(M), rtol=1e-14)
    ident = composition_matrix(preset("id"), w0, 64)
    np.testing.assert_allclose(essnorm_proxy(ident, M), 1.0, rtol=1e-12)
    Z = TruncatedOperator.from_matrix(np.zeros((64, 64)))
    assert essnorm_proxy(Z, M) == [0.0] * 4
    with pytest.raises(ValueError):
        essnorm_proxy(T, [64])


def test_proxy_decay():
    assert proxy_decay([1.0, 0.25]) == 4.0
    assert proxy_decay([1.0, 0.0]) == np.inf
    assert proxy_decay([0.0, 0.0]) == 1.0


@settings(max_examples=25)
@given(st.lists(st.tuples(st.complex_numbers(max_magnitude=2, allow_nan=False),
                          st.sampled_from(["halfmap", "zhalfmap", "tangentmap", "dilate:0.7",
                                           "rot:0.5"])),
                min_size=1, max_size=3))
def test_proxy_is_nonincreasing(terms):
    w = std_weight(1)
    T = combo_matrix([(lam, parse_symbol(s)) for lam, s in terms], w, 32)
    vals = essnorm_proxy(T, range(0, 32, 4))
    assert all(b <= a * (1 + 1e-12) + 1e-15 for a, b in zip(vals, vals[1:]))


def test_dilations_compose_exactly(w1):
    A = composition_matrix(Dilation(0.5), w1, 32).entries
    B = composition_matrix(Dilation(0.8), w1, 32).entries
    C = composition_matrix(Dilation(0.4), w1, 32).entries
    np.testing.assert_array_equal(np.abs(A @ B - C) < 1e-17, True)


@pytest.mark.parametrize("outer,inner", [("halfmap", "dilate:0.9"),
                                         ("tangentmap", "linfrac:1,0.5,0.25,2"),
                                         ("zhalfmap", "halfmap")])
def test_composition_law_on_leading_block(outer, inner, w1):
    psi, phi = parse_symbol(outer), parse_symbol(inner)
    errs = []
    for N in (16, 32, 64):
        A_phi = composition_matrix(phi, w1, N)
        width = A_phi.extended.shape[1]
        A_psi = composition_matrix(psi, w1, width)
        prod = A_phi.extended @ A_psi.entries[:, :N]
        direct = composition_matrix(Composition(psi, phi), w1, N).entries
        errs.append(np.abs(prod - direct)[:8, :8].max())
    assert errs[-1] <= errs[0] and errs[-1] < 1e-10


def test_dilation_proxies_ignore_the_weight(w0, w1):
    phi = Dilation(0.7)
    a = essnorm_proxy(composition_matrix(phi, w0, 64), [8, 16, 32])
    b = essnorm_proxy(composition_matrix(phi, w1, 64), [8, 16, 32])
    assert a == b


@pytest.mark.parametrize("terms", [[(1, "halfmap")], [(1, "halfmap"), (-1, "tangentmap")],
                                   [(2, "zhalfmap"), (1j, "dilate:0.5")]])
@pytest.mark.parametrize("a", [0.5, 0.9, 0.97])
def test_test_function_images_respect_the_norm(terms, a, w1):
    T = combo_matrix([(lam, parse_symbol(s)) for lam, s in terms], w1, 128)
    tf = make_testfn(a, w1, p=2)
    width = T.extended.shape[1]
    c = basis_coeffs(tf, width)
    image = T.extended @ c
    norm = series_norm(tf)
    slack = np.sqrt(max(norm ** 2 - np.sum(np.abs(c) ** 2), 0.0)) / norm
    assert np.linalg.norm(image) / norm <= op_norm(T) * (1 + slack) + 1e-12


def test_dump_csv_round_trip(tmp_path, w1):
    T = combo_matrix([(1, preset("halfmap")), (-0.5j, preset("id"))], w1, 6)
    re_path, im_path = dump_csv(T, tmp_path / "op")
    re = np.loadtxt(re_path, delimiter=",")
    im = np.loadtxt(im_path, delimiter=",")
    np.testing.assert_array_equal(re + 1j * im, T.entries)


def test_from_matrix_checks_shape():
    with pytest.raises(ValueError):
        TruncatedOperator.from_matrix(np.zeros((3, 4)))


def test_operator_arithmetic(w0):
    A = composition_matrix(preset("halfmap"), w0, 16)
    B = composition_matrix(preset("tangentmap"), w0, 16)
    D = A - B
    np.testing.assert_allclose(D.entries, A.entries - B.entries, atol=0)
    np.testing.assert_allclose((A + B).entries, A.entries + B.entries, atol=0)
    np.testing.assert_allclose(A.scaled(2j).entries, 2j * A.entries, atol=0)
