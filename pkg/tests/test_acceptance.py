"""Acceptance criteria, each at its stated tolerance and runtime budget.

Every test records one PASS/FAIL line that is printed in the terminal summary.
"""

import contextlib
import json
import subprocess
import sys
import time

import numpy as np
import pytest

import conftest
from complab.carleson import PullbackSampler, lemma5_premise, separation_indicator, vanishing_scan
from complab.criteria import theorem8_bound, theorem12_verdict, moorhouse_quantity
from complab.geometry import mobius, pseudo_disk, rho, strong_triangle_bound
from complab.operators import combo_matrix, composition_matrix, essnorm_proxy, proxy_decay
from complab.symbols import Dilation, preset
from complab.testfns import make_testfn, series_norm
from complab.testfns import testfn_norm as quadrature_norm
from complab.weights import box_mass, doubling_check, moments, std_weight

H, Z, T = preset("halfmap"), preset("zhalfmap"), preset("tangentmap")
N_MATRIX = 256


@contextlib.contextmanager
def criterion(label, budget):
    """Record PASS/FAIL for ``label``; the block must also finish within ``budget`` seconds."""
    start = time.perf_counter()
    try:
        yield
        elapsed = time.perf_counter() - start
        assert elapsed < budget, f"took {elapsed:.1f} s, budget {budget} s"
    except BaseException as exc:
        elapsed = time.perf_counter() - start
        first = str(exc).strip().splitlines()[0] if str(exc).strip() else type(exc).__name__
        conftest.ACCEPTANCE_LINES.append(
            f"criterion {label}: FAIL ({elapsed:.1f} s / {budget} s) {first}")
        raise
    conftest.ACCEPTANCE_LINES.append(f"criterion {label}: PASS ({elapsed:.1f} s / {budget} s)")


def _disk(rng, n):
    r = 0.999 * np.sqrt(rng.random(n))
    return r * np.exp(2j * np.pi * rng.random(n))


def test_criterion_1_geometry_identities():
    with criterion("1 geometry identities", 5):
        rng = np.random.default_rng(0)
        n = 100_000
        z, w, a = _disk(rng, n), _disk(rng, n), _disk(rng, n)
        lhs = 1 - np.abs(mobius(z, w)) ** 2
        rhs = (1 - np.abs(z) ** 2) * (1 - np.abs(w) ** 2) / np.abs(1 - np.conj(w) * z) ** 2
        assert np.max(np.abs(lhs - rhs)) <= 1e-12
        excess = rho(z, w) - strong_triangle_bound(rho(z, a), rho(a, w))
        assert np.max(excess) <= 1e-12
        # membership: one random pseudo-disk per sample point
        radius = 0.05 + 0.9 * rng.random(n)
        anchors = _disk(rng, n)
        pts = _disk(rng, n)
        mism = 0
        for k in range(n):
            D = pseudo_disk(anchors[k], radius[k])
            euclid = abs(pts[k] - D.euclid_center) < D.euclid_radius
            hyper = rho(anchors[k], pts[k]) < radius[k]
            if euclid != hyper and abs(rho(anchors[k], pts[k]) - radius[k]) > 1e-12:
                mism += 1
        assert mism == 0


def test_criterion_2_weight_certification():
    with criterion("2 weight certification", 10):
        w0, w1, w2 = std_weight(0), std_weight(1), std_weight(2)
        c0 = doubling_check(w0, K=2)
        assert abs(c0.C_hat - 2) <= 1e-9 and abs(c0.C_check - 2) <= 1e-9
        c2 = doubling_check(w2)
        assert 2.95 <= c2.alpha <= 3.05 and 2.95 <= c2.beta <= 3.05
        n = np.arange(257)
        np.testing.assert_allclose(moments(w0, 257), 1 / (n + 1), rtol=1e-10, atol=0)
        np.testing.assert_allclose(moments(w1, 257), 1 / ((n + 1) * (n + 2)), rtol=1e-10, atol=0)


def test_criterion_3_box_ratio_slopes():
    with criterion("3 box-ratio sandwich slopes", 10):
        rng = np.random.default_rng(0)
        n = 10_000
        u = np.exp(rng.uniform(np.log(0.5e-6), np.log(0.5), n))
        z = (1 - u) * np.exp(2j * np.pi * rng.random(n))
        image = H(z)
        Q = (1 - np.abs(z)) / (1 - np.abs(image))
        for alpha in (0, 1, 2):
            w = std_weight(alpha)
            cert = w.certificate()
            ratio = box_mass(w, z) / box_mass(w, image)
            slope = np.polyfit(np.log(Q), np.log(ratio), 1)[0]
            lo, hi = cert.beta + 1 - 0.1, cert.alpha + 1 + 0.1
            assert lo <= slope <= hi, f"std:{alpha} slope {slope:.4f} outside [{lo:.4f}, {hi:.4f}]"
            assert abs(slope - (alpha + 2)) <= 0.1


def test_criterion_4_test_function_norms():
    with criterion("4 test-function norms", 30):
        for alpha in (0, 1):
            w = std_weight(alpha)
            for flavor in ("plain", "dilated"):
                for a in (0, 0.5, 0.9, 0.99, 0.999):
                    tf = make_testfn(a, w, p=2, flavor=flavor)
                    q = quadrature_norm(tf)
                    s = series_norm(tf)
                    assert 0.25 <= q <= 4, f"norm {q} at a={a}, std:{alpha}, {flavor}"
                    assert abs(q - s) <= 1e-6 * s


def test_criterion_5_carleson_consistency():
    with criterion("5 Carleson consistency", 60):
        w = std_weight(0)
        ident = vanishing_scan(PullbackSampler(preset("id"), w, sample_count=1_000_000))
        assert ident.radii[-1] == 0.999
        assert all(0.25 <= s <= 4 for s in ident.sups), ident.sups
        dil = vanishing_scan(PullbackSampler(Dilation(0.5), w, sample_count=1_000_000))
        assert dil.verdict == "vanishing" and dil.sups[-1] == 0.0
        u = separation_indicator(H, T, 0.5)
        premise = lemma5_premise(H, u)
        assert premise.verdict == "vanishing"
        pulled = vanishing_scan(PullbackSampler(H, w, multiplier=u, sample_count=1_000_000),
                                radii=premise.radii)
        assert pulled.verdict == "vanishing"


def _decays(w, *terms_list):
    return [proxy_decay(essnorm_proxy(combo_matrix(terms, w, N_MATRIX))) for terms in terms_list]


def test_criterion_6a_half_and_tangent_maps():
    with criterion("6(a) pair (halfmap, tangentmap)", 120):
        w = std_weight(0)
        single_h, single_t, diff = _decays(w, [(1, H)], [(1, T)], [(1, H), (-1, T)])
        assert single_h < 1.5 and single_t < 1.5
        verdict = theorem12_verdict(H, T, 1, -1, w, 2, N=N_MATRIX)["verdict"]
        assert verdict == "COMPACT", f"verdict {verdict}, difference proxy decay {diff:.3f}"
        assert diff >= 4, f"difference proxy decay {diff:.3f}"


def test_criterion_6b_half_and_zhalf_maps():
    with criterion("6(b) pair (halfmap, zhalfmap)", 120):
        w = std_weight(0)
        verdict = theorem12_verdict(H, Z, 1, -1, w, 2, N=N_MATRIX)["verdict"]
        assert verdict == "NOT-COMPACT"
        assert abs(moorhouse_quantity(H, Z, 1 - 1e-6) - 4 / 3) <= 0.05
        (diff,) = _decays(w, [(1, H), (-1, Z)])
        assert diff < 1.5


def test_supplementary_pair_half_and_quartic_maps():
    """Same protocol as 6(a) on a pair whose difference is compact."""
    with criterion("6(a)-protocol supplement (halfmap, quarticmap)", 120):
        w = std_weight(0)
        Q = preset("quarticmap")
        single_q, diff = _decays(w, [(1, Q)], [(1, H), (-1, Q)])
        assert single_q < 1.5
        assert theorem12_verdict(H, Q, 1, -1, w, 2, N=N_MATRIX)["verdict"] == "COMPACT"
        assert diff >= 4


def test_criterion_7_exactness():
    with criterion("7 exactness checks", 10):
        w = std_weight(0)
        M = [16, 32, 64, 128]
        prox = essnorm_proxy(composition_matrix(Dilation(0.5), w, N_MATRIX), M)
        assert np.max(np.abs(np.array(prox) - 2.0 ** -np.array(M))) <= 1e-10
        assert essnorm_proxy(combo_matrix([(1, T), (-1, T)], w, N_MATRIX), M) == [0.0] * 4
        assert abs(theorem8_bound([(1, H)], 1, w, 2) - 4) <= 1e-9
        assert theorem8_bound([(1, H), (-1, H)], 1, w, 2) == 0
        assert abs(theorem8_bound([(1, H), (-1, Z)], 1, w, 2) - 4) <= 1e-9


def test_criterion_8_p_freeness():
    with criterion("8 p-freeness", 30):
        w = std_weight(0)
        for psi in (T, Z):
            docs = {json.dumps(theorem12_verdict(H, psi, 1, -1, w, p)["condition_ii"],
                               sort_keys=True) for p in (1, 2, 4)}
            assert len(docs) == 1


@pytest.mark.parametrize("argv", [
    ["criterion", "--weight", "std:0", "--phi", "halfmap", "--psi", "tangentmap", "--p", "2"],
    ["carleson", "--weight", "std:1", "--phi", "tangentmap", "--seed", "5", "--format", "csv"],
    ["essnorm", "--weight", "std:1", "--phi", "dilate:0.5", "--N", "256", "--format", "csv"],
])
def test_criterion_9_determinism(argv, tmp_path):
    with criterion(f"9 determinism ({argv[0]} {argv[-1] if argv[-2] == '--format' else 'json'})",
                   120):
        outs = []
        for k in range(2):
            path = tmp_path / f"run{k}"
            res = subprocess.run([sys.executable, "-m", "complab", *argv, "--output", str(path)],
                                 capture_output=True, text=True, check=False)
            assert res.returncode == 0, res.stderr
            outs.append(path.read_bytes())
        assert outs[0] == outs[1] and len(outs[0]) > 0
