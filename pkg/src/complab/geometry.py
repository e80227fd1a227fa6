"""Mobius maps, pseudo-hyperbolic distance and disks, approach curves."""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

__all__ = [
    "mobius",
    "rho",
    "PseudoDisk",
    "pseudo_disk",
    "radius_chain",
    "ApproachPath",
    "approach_path",
    "approach_residual",
    "strong_triangle_bound",
]


def mobius(z, w):
    """The involutive disk automorphism ``w -> (z - w) / (1 - conj(z) w)``, vectorized."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    out = (z - w) / (1.0 - np.conj(z) * w)
    return out[()] if out.ndim == 0 else out


def rho(z, w):
    """Pseudo-hyperbolic distance ``|mobius(z, w)|``."""
    out = np.abs(mobius(z, w))
    return float(out) if np.ndim(out) == 0 else out


def strong_triangle_bound(d1, d2):
    """Upper bound ``(d1 + d2) / (1 + d1 d2)`` for ``rho(z, w)`` given two legs."""
    return (d1 + d2) / (1.0 + d1 * d2)


@dataclass(frozen=True)
class PseudoDisk:
    anchor: complex
    radius_rho: float
    euclid_center: complex
    euclid_radius: float

    def contains(self, w):
        """Membership through the Euclidean description."""
        return np.abs(np.asarray(w) - self.euclid_center) < self.euclid_radius

    def contains_rho(self, w):
        return rho(self.anchor, w) < self.radius_rho

    def gap_bounds(self):
        """Bounds on ``1 - |w|`` valid for every ``w`` in the disk."""
        a = abs(self.anchor)
        r = self.radius_rho
        den = 1.0 - r * r * a * a
        lo = (1.0 - a) * (1.0 - r * a) * (1.0 - r) / den
        hi = (1.0 - a) * (1.0 + r * a) * (1.0 + r) / den
        return lo, hi

    @property
    def modulus_range(self):
        """Extent of ``|w|`` over the closed disk."""
        c = abs(self.euclid_center)
        return max(0.0, c - self.euclid_radius), c + self.euclid_radius


def pseudo_disk(a, r):
    """Pseudo-hyperbolic disk of radius ``r`` about ``a`` as a Euclidean disk."""
    a = complex(a)
    if not abs(a) < 1:
        raise ValueError("anchor must lie in the open disk")
    if not 0 < r < 1:
        raise ValueError("radius must lie in (0, 1)")
    a2 = abs(a) ** 2
    den = 1.0 - r * r * a2
    center = (1.0 - r * r) * a / den
    radius = (1.0 - a2) * r / den
    return PseudoDisk(a, float(r), center, float(radius))


def _double(x):
    return 2.0 * x / (1.0 + x * x)


def radius_chain(r1):
    """Return ``(r, delta, r2)`` from three applications of ``x -> 2x / (1 + x^2)``."""
    if not 0 < r1 < 1:
        raise ValueError("r1 must lie in (0, 1)")
    r = _double(r1)
    delta = _double(r)
    return r, delta, _double(delta)


@dataclass(frozen=True)
class ApproachPath:
    target: complex
    aperture: float
    samples: np.ndarray
    skipped: int = 0

    def residuals(self):
        return approach_residual(self.samples, self.target, self.aperture)


def approach_residual(z, zeta, M):
    z = np.asarray(z, dtype=complex)
    return np.abs(z - zeta) - M * (1.0 - np.abs(z) ** 2)


def _angle_on_curve(gap, M):
    """Positive angle ``theta`` with ``|(1-gap) e^{i theta} - 1| = M (1 - (1-gap)^2)``.

    Uses ``|rho e^{it} - 1|^2 = gap^2 + 4 rho sin^2(t/2)`` to avoid cancellation.
    Returns ``None`` if the circle of radius ``1 - gap`` misses the curve.
    """
    r = 1.0 - gap
    target = M * gap * (2.0 - gap)
    if target < gap:
        return None
    s2 = (target * target - gap * gap) / (4.0 * r)
    if s2 > 1.0:
        return None

    def f(t):
        return np.sqrt(gap * gap + 4.0 * r * np.sin(t / 2) ** 2) - target

    t0 = 2.0 * np.arcsin(np.sqrt(s2))
    if f(t0) == 0.0:
        return t0
    lo, hi = t0 * (1 - 1e-6), min(np.pi, t0 * (1 + 1e-6) + 1e-300)
    if f(lo) * f(hi) > 0:
        return t0
    return brentq(f, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps)


def approach_path(zeta, M, n, start_gap=None):
    """Sample ``n`` points of the curve ``|z - zeta| = M (1 - |z|^2)``.

    Gaps ``1 - |z_k|`` halve from ``start_gap`` (default ``1 / (2M)``);
    the positive-angle branch is taken. Depths with no solution are skipped
    and counted.
    """
    zeta = complex(zeta)
    if abs(abs(zeta) - 1.0) > 1e-12:
        raise ValueError("target must be unimodular")
    zeta /= abs(zeta)
    if not M > 1:
        raise ValueError("aperture M must exceed 1")
    if n < 2:
        raise ValueError("need at least two samples")
    gap0 = 1.0 / (2.0 * M) if start_gap is None else float(start_gap)
    pts, skipped = [], 0
    for k in range(n):
        gap = gap0 * 2.0 ** -k
        t = _angle_on_curve(gap, M)
        if t is None:
            skipped += 1
            continue
        pts.append(zeta * (1.0 - gap) * np.exp(1j * t))
    if skipped:
        warnings.warn(f"approach path skipped {skipped} depth(s) with no solution",
                      RuntimeWarning, stacklevel=2)
    return ApproachPath(zeta, float(M), np.array(pts, dtype=complex), skipped)
