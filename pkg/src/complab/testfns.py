"""Normalized kernel-type test functions and the two-kernel gap inequality.

``f_a(z) = ((1 - |a|^2) / (1 - conj(a) z))**((gamma + 1) / p) * box_mass(a)**(-1/p)``;
the dilated flavor replaces ``conj(a)`` in the denominator by ``t_N conj(a)``
with ``t_N = 1 - N (1 - |a|)``.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, betaln

from ._quad import dyadic_breaks, integrate
from .geometry import mobius, rho
from .weights import box_mass

__all__ = [
    "TestFunction",
    "make_testfn",
    "default_gamma",
    "eval_testfn",
    "testfn_norm",
    "series_norm",
    "basis_coeffs",
    "lemma_d_gap",
    "fit_lemma_d",
    "DEFAULT_N",
]

DEFAULT_N = 4.0
_MIN_ANGLES = 2048


def default_gamma(w, p):
    """``max(beta + 2, p + 1)`` with the fitted upper exponent of ``w``."""
    return max(w.certificate().beta + 2.0, p + 1.0)


@dataclass(frozen=True)
class TestFunction:
    anchor: complex
    gamma: float
    p: float
    weight: object
    flavor: str = "plain"
    N: float = DEFAULT_N

    __test__ = False  # keep pytest from collecting this class

    @property
    def t_N(self):
        return 1.0 - self.N * (1.0 - abs(self.anchor))

    @property
    def exponent(self):
        return (self.gamma + 1.0) / self.p

    @property
    def kernel_point(self):
        """``b`` in the denominator ``1 - b z``."""
        b = np.conj(self.anchor)
        return complex(b * self.t_N) if self.flavor == "dilated" else complex(b)

    @property
    def normalization(self):
        return box_mass(self.weight, self.anchor) ** (-1.0 / self.p)

    @property
    def scale(self):
        """Constant in front of ``(1 - b z)**(-exponent)``."""
        return (1.0 - abs(self.anchor) ** 2) ** self.exponent * self.normalization


def make_testfn(a, w, p=2.0, flavor="plain", N=DEFAULT_N, gamma=None):
    a = complex(a)
    if not abs(a) < 1:
        raise ValueError("anchor must lie in the open disk")
    if flavor not in ("plain", "dilated"):
        raise ValueError(f"unknown flavor {flavor!r}")
    if not p > 0:
        raise ValueError("p must be positive")
    if gamma is None:
        gamma = default_gamma(w, p)
    tf = TestFunction(a, float(gamma), float(p), w, flavor, float(N))
    if flavor == "dilated" and not abs(tf.t_N * a) < 1:
        raise ValueError(f"dilated test function not evaluable: |t_N a| = {abs(tf.t_N * a)}")
    return tf


def eval_testfn(tf, z):
    z = np.asarray(z, dtype=complex)
    den = 1.0 - tf.kernel_point * z
    if np.any(den.real <= 0):
        raise ValueError("denominator left the right half-plane; branch is ambiguous")
    out = tf.scale * den ** (-tf.exponent)
    return out[()] if out.ndim == 0 else out


def _angle_count(x):
    if x <= 0:
        return _MIN_ANGLES
    need = 40.0 / -math.log(x)
    return max(_MIN_ANGLES, 1 << math.ceil(math.log2(max(need, 1.0))))


def _circle_mean(x, power):
    """Mean over the circle of ``|1 - x e^{i t}|**(-power)`` for each ``x`` in ``[0, 1)``."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    counts = np.array([_angle_count(v) for v in x])
    for L in np.unique(counts):
        sel = counts == L
        th = np.pi * np.arange(L // 2 + 1) / (L // 2)
        wts = np.full(th.size, 1.0)
        wts[0] = wts[-1] = 0.5
        xs = x[sel][:, None]
        vals = (1.0 - 2.0 * xs * np.cos(th)[None, :] + xs * xs) ** (-0.5 * power)
        out[sel] = vals @ wts / (L // 2)
    return out


def testfn_norm(tf, rtol=1e-10):
    """``||f||`` in the weighted Bergman space by radial-angular quadrature."""
    w = tf.weight
    bm = abs(tf.kernel_point)
    power = tf.gamma + 1.0

    def integrand(u):
        return 2.0 * (1.0 - u) * w.density_gap(u) * _circle_mean((1.0 - u) * bm, power)

    val, _ = integrate(integrand, dyadic_breaks(60), rtol=rtol)
    return float(abs(tf.scale) * val ** (1.0 / tf.p))


def _log_moments(w, n_terms):
    n = np.arange(n_terms)
    if w.kind == "std":
        # m_n = B(n + 1, alpha + 1)
        return betaln(n + 1.0, w.alpha_std + 1.0)
    return np.log(w.moments(n_terms))


def series_norm(tf, tol=1e-18, max_terms=10_000_000):
    """``||f||`` at ``p = 2`` from ``sum |coef_n|^2 m_n |b|^(2n)``."""
    if tf.p != 2:
        raise ValueError("the series identity holds for p = 2 only")
    s = tf.exponent
    b = abs(tf.kernel_point)
    if b == 0:
        n_terms = 1
    else:
        # tail where |b|^(2n) n^(2s) is below tol
        lb = -math.log(b)
        n = 10.0
        for _ in range(60):
            n = max(10.0, (2 * s * math.log(n + 1) - math.log(tol)) / (2 * lb))
        n_terms = int(min(max_terms, n + 100))
    n = np.arange(n_terms)
    log_coef = gammaln(s + n) - gammaln(s) - gammaln(n + 1.0)
    with np.errstate(divide="ignore"):
        log_b = np.log(b) if b > 0 else -np.inf
    logs = 2 * log_coef + _log_moments(tf.weight, n_terms)
    if b > 0:
        logs = logs + 2 * n * log_b
    else:
        logs = logs[:1]
    top = logs.max()
    total = math.exp(top) * math.fsum(np.exp(logs - top))
    return float(abs(tf.scale) * math.sqrt(total))


def basis_coeffs(tf, n_terms):
    """Coordinates of ``f`` (``p = 2``) in the orthonormal basis ``z**n / sqrt(m_n)``."""
    s = tf.exponent
    n = np.arange(n_terms)
    log_coef = gammaln(s + n) - gammaln(s) - gammaln(n + 1.0)
    b = tf.kernel_point
    mom = tf.weight.moments(n_terms)
    powers = b ** n if b != 0 else (n == 0).astype(complex)
    return tf.scale * np.exp(log_coef) * powers * np.sqrt(mom)


def lemma_d_gap(a, z, w, s, N, r0=0.5):
    """Return ``(lhs, rhs_scale)`` of the two-kernel lower bound.

    ``lhs`` is the sum of the differences of ``(1 - conj(a) x)**(-s)`` and of
    ``(1 - t_N conj(a) x)**(-s)`` between ``x = z`` and ``x = w``;
    ``rhs_scale`` is ``rho(z, w) |1 - conj(a) z|**(-s)``.
    """
    a, z, w = complex(a), complex(z), complex(w)
    if not s > 1:
        raise ValueError("s must exceed 1")
    if not abs(a) < 1 or not abs(z) < 1 or not abs(w) < 1:
        raise ValueError("points must lie in the open disk")
    if not rho(a, z) < r0:
        raise ValueError(f"z is outside the pseudo-hyperbolic disk of radius {r0} about a")
    if not 1.0 - abs(a) < 1.0 / (2.0 * N):
        raise ValueError(f"need 1 - |a| < 1/(2N); got 1 - |a| = {1 - abs(a)!r}, N = {N!r}")
    tN = 1.0 - N * (1.0 - abs(a))
    ab = a.conjugate()

    def k(x, t):
        return (1.0 - t * ab * x) ** (-s)

    lhs = abs(k(z, 1.0) - k(w, 1.0)) + abs(k(z, tN) - k(w, tN))
    rhs = rho(z, w) * abs(1.0 - ab * z) ** (-s)
    return float(lhs), float(rhs)


def _admissible_triples(N, r0, count, rng):
    gap_hi = 1.0 / (2.0 * N)
    gap = gap_hi * np.exp(np.log(1e-6) * rng.random(count))
    a = (1.0 - gap) * np.exp(2j * np.pi * rng.random(count))
    zeta = r0 * np.sqrt(rng.random(count)) * np.exp(2j * np.pi * rng.random(count))
    z = mobius(a, zeta)
    # half the partners near z, half anywhere
    wide = np.sqrt(rng.random(count)) * np.exp(2j * np.pi * rng.random(count))
    near = mobius(z, 0.5 * np.sqrt(rng.random(count)) * np.exp(2j * np.pi * rng.random(count)))
    w = np.where(np.arange(count) % 2 == 0, wide, near)
    return a, z, w


def fit_lemma_d(s=2.0, r0=0.5, N_list=(2, 4, 8, 16, 32, 64), count=10_000, seed=0):
    """Empirical lower-bound constant per ``N``; returns ``(best_N, {N: min ratio})``."""
    out = {}
    for N in N_list:
        rng = np.random.default_rng([seed, int(N)])
        a, z, w = _admissible_triples(N, r0, count, rng)
        ratios = []
        for ai, zi, wi in zip(a, z, w):
            if rho(ai, zi) >= r0 or zi == wi:
                continue
            lhs, rhs = lemma_d_gap(ai, zi, wi, s, N, r0)
            ratios.append(lhs / rhs)
        out[N] = float(min(ratios))
    best = max(out, key=out.get)
    return best, out
