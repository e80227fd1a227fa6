"""Pullback measures and their pseudo-hyperbolic disk ratios.

For a symbol ``phi``, weight ``omega`` and bounded multiplier ``u`` the
pullback measure of a set ``E`` is ``int 1[phi(z) in E] u(z) omega(z) dA(z)``
with normalized area ``dA``. Ratios divide by ``box_mass(a)``.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np

from ._parallel import pmap
from .geometry import pseudo_disk, rho
from .verdict import classify, thresholds
from .weights import box_mass

__all__ = [
    "PullbackSampler",
    "BoxEstimate",
    "ScanResult",
    "pullback_box_ratio",
    "vanishing_scan",
    "lemma5_premise",
    "separation_indicator",
    "DEFAULT_RADII",
    "DEFAULT_R",
]

DEFAULT_R = 0.5
DEFAULT_RADII = (0.5, 0.75, 0.9, 0.95, 0.975, 0.99, 0.995, 0.999)
_CDF_KNOTS = 10_000
_ABS_STDERR_FLOOR = 1e-4


class BoxEstimate(NamedTuple):
    ratio: float
    stderr: float
    flagged: bool = False


@dataclass
class PullbackSampler:
    symbol: object
    weight: object
    multiplier: Optional[Callable] = None
    bound: float = 1.0
    sample_count: int = 1_000_000
    strategy: str = "monte-carlo"
    rng_seed: int = 0
    stderr_cap: float = 0.05
    _cdf: tuple = field(default=None, init=False, repr=False)

    def __post_init__(self):
        if self.strategy not in ("monte-carlo", "tensor-quadrature"):
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if not (math.isfinite(self.bound) and self.bound >= 0):
            raise ValueError("multiplier bound must be finite and nonnegative")
        if self.sample_count < 2:
            raise ValueError("need at least two samples")

    def _gap_table(self):
        """Log-spaced table of the radial mass beyond gap ``u``."""
        if self._cdf is None:
            u = np.logspace(-18, 0, _CDF_KNOTS)
            mass = self.weight.radial_mass_gap(u)
            keep = mass > 0
            self._cdf = (np.log(u[keep]), np.log(mass[keep]))
        return self._cdf

    def radial_mass(self, R0):
        return float(self.weight.radial_mass_gap(1.0 - R0))

    def gaps_from_uniform(self, v, R0):
        """Inverse CDF: gaps ``u`` in ``(0, 1 - R0]`` distributed like ``2 r omega(r) dr``."""
        logu, logm = self._gap_table()
        target = np.log(np.maximum(v, 1e-300) * self.radial_mass(R0))
        return np.minimum(np.exp(np.interp(target, logm, logu)), 1.0 - R0)

    def multiplier_values(self, z):
        if self.multiplier is None:
            return None
        vals = np.asarray(self.multiplier(z), dtype=float)
        if np.any(vals < 0) or np.any(vals > self.bound * (1 + 1e-12)):
            raise ValueError("multiplier left [0, bound]")
        return vals


def _strata(K, width):
    n_r = max(1, int(round(math.sqrt(K * width / (2 * math.pi)))))
    n_t = max(1, math.ceil(K / n_r))
    return n_r, n_t


def _draw(s, R0, key):
    """Two points per stratum of a grid in (radial CDF, angle); returns (z, n_strata)."""
    K = max(1, s.sample_count // 2)
    n_r, n_t = _strata(K, 1.0 - R0)
    ir, it = np.meshgrid(np.arange(n_r), np.arange(n_t), indexing="ij")
    ir, it = ir.ravel(), it.ravel()
    if s.strategy == "monte-carlo":
        rng = np.random.default_rng([s.rng_seed, *key])
        off = rng.random((2, 2, ir.size))
    else:
        off = np.empty((2, 2, ir.size))
        off[0] = 0.25
        off[1] = 0.75
        off[1, 1] = 0.25
        off[0, 1] = 0.75
    v = (ir[None, :] + off[:, 0]) / n_r
    th = 2 * np.pi * (it[None, :] + off[:, 1]) / n_t
    gaps = s.gaps_from_uniform(1.0 - v, R0)
    return (1.0 - gaps) * np.exp(1j * th), ir.size


def _annulus_floor(s, modulus, r):
    """Smallest ``|z|`` whose image can meet a pseudo-disk of radius ``r`` about
    any point of modulus ``modulus`` (Schwarz-Pick)."""
    p0 = abs(s.symbol.origin_image)
    d = abs(modulus - p0) / (1.0 - modulus * p0)
    if d <= r:
        return 0.0
    return (d - r) / (1.0 - r * d)


def _estimate(s, z, n_strata, R0, disks, weights):
    images = s.symbol(z)
    total = s.radial_mass(R0)
    out = []
    for D in disks:
        box = box_mass(s.weight, D.anchor)
        hit = (np.abs(images - D.euclid_center) < D.euclid_radius).astype(float)
        if weights is not None:
            hit = hit * weights
        y1, y2 = hit[0], hit[1]
        mean = 0.5 * (y1 + y2).sum() / n_strata
        se = math.sqrt(float(np.sum((y1 - y2) ** 2)) / 4.0) / n_strata
        ratio = total * mean / box
        stderr = total * se / box
        flagged = stderr > max(s.stderr_cap * ratio, _ABS_STDERR_FLOOR)
        out.append(BoxEstimate(float(ratio), float(stderr), bool(flagged)))
    return out


def pullback_box_ratio(s, a, r=DEFAULT_R):
    """Pullback mass of the pseudo-hyperbolic disk ``Delta(a, r)`` over ``box_mass(a)``."""
    a = complex(a)
    if not abs(a) < 1:
        raise ValueError("anchor must lie in the open disk")
    D = pseudo_disk(a, r)
    p0 = s.symbol.origin_image
    d = rho(a, p0)
    R0 = 0.0 if d <= r else (d - r) / (1.0 - r * d)
    z, n = _draw(s, R0, (0,))
    return _estimate(s, z, n, R0, [D], s.multiplier_values(z))[0]


@dataclass
class ScanResult:
    radii: list
    sups: list
    stderrs: list
    flagged: list
    verdict: str
    thresholds: dict

    def rows(self):
        return list(zip(self.radii, self.sups, self.stderrs))


def vanishing_scan(s, r=DEFAULT_R, radii=DEFAULT_RADII, angular=16):
    """Annulus suprema of ``pullback_box_ratio`` with the shared verdict policy."""
    radii = [float(x) for x in radii]
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must increase")

    def one(item):
        k, R = item
        R0 = _annulus_floor(s, R, r)
        z, n = _draw(s, R0, (1, k))
        anchors = R * np.exp(2j * np.pi * np.arange(angular) / angular)
        disks = [pseudo_disk(a, r) for a in anchors]
        est = _estimate(s, z, n, R0, disks, s.multiplier_values(z))
        best = max(est, key=lambda e: e.ratio)
        # a noisy box only matters if it could carry the annulus maximum
        shaky = any(e.flagged and e.ratio + 3 * e.stderr >= best.ratio for e in est)
        return best.ratio, best.stderr, shaky

    res = pmap(one, list(enumerate(radii)))
    sups = [x[0] for x in res]
    errs = [x[1] for x in res]
    flags = [x[2] for x in res]
    return ScanResult(radii, sups, errs, flags, classify(sups, any(flags)), thresholds())


def lemma5_premise(phi, u=None, radii=DEFAULT_RADII, angular=512):
    """Annulus suprema of ``u(z) (1 - |z|) / (1 - |phi(z)|)``."""
    radii = [float(x) for x in radii]
    th = 2 * np.pi * np.arange(angular) / angular
    sups = []
    for R in radii:
        z = R * np.exp(1j * th)
        q = (1.0 - R) / (1.0 - np.abs(phi(z)))
        if u is not None:
            q = q * np.asarray(u(z), dtype=float)
        sups.append(float(q.max()))
    return ScanResult(radii, sups, [0.0] * len(sups), [False] * len(sups),
                      classify(sups), thresholds())


def separation_indicator(phi, psi, level):
    """Multiplier ``1[rho(phi(z), psi(z)) >= level]``."""
    def u(z):
        return (rho(phi(z), psi(z)) >= level).astype(float)
    return u
