"""Radial weights on the unit disk and their tail masses.

A weight is stored through its density in the boundary-gap variable
``u = 1 - r`` so that tail integrals near the circle keep full relative
precision. ``omega_hat(r)`` is ``int_r^1 omega(s) ds``.
"""

import csv
import threading
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np

from ._quad import QuadratureError, dyadic_breaks, gk15_panels, integrate

__all__ = [
    "RadialWeight",
    "DoublingCertificate",
    "QuadratureError",
    "WeightSpecError",
    "std_weight",
    "table_weight",
    "custom_weight",
    "parse_weight",
    "omega_hat",
    "omega_tilde",
    "doubling_check",
    "box_mass",
    "lambda_shift",
    "moment",
    "moments",
    "default_grid",
]

_DEPTH = 60
_RTOL = 1e-12
_MAX_PANELS = 10_000
# C_hat above this is treated as unbounded on a finite grid
_DHAT_CAP = 1e6
DILATION_FACTORS = (2, 4, 8, 16)


class WeightSpecError(ValueError):
    pass


class _TailTable:
    """Cumulative integral ``T(u) = int_0^u g(v) dv`` of a gap integrand.

    Built once on dyadic knots ``2**-j`` (plus optional kinks); a query
    costs one 15-point panel from the nearest knot below.
    """

    def __init__(self, g, kinks=()):
        self._g = g
        kinks = np.asarray([k for k in kinks if 0.0 < k < 1.0], dtype=float)
        self._knots = np.unique(np.concatenate([dyadic_breaks(_DEPTH)[1:], kinks]))
        self._cum = None
        self._lock = threading.Lock()

    def _build(self):
        with self._lock:
            if self._cum is not None:
                return
            knots = self._knots
            first, _ = integrate(self._g, [0.0, knots[0]], rtol=_RTOL,
                                 max_panels=_MAX_PANELS)
            pieces = [first]
            for lo, hi in zip(knots[:-1], knots[1:]):
                val, _ = integrate(self._g, [lo, hi], rtol=_RTOL,
                                   max_panels=_MAX_PANELS)
                pieces.append(val)
            self._cum = np.cumsum(pieces)

    def __call__(self, u):
        if self._cum is None:
            self._build()
        u = np.asarray(u, dtype=float)
        flat = u.ravel()
        out = np.zeros_like(flat)
        knots = self._knots
        deep = (flat > 0) & (flat < knots[0])
        for i in np.flatnonzero(deep):
            out[i], _ = integrate(self._g, [0.0, flat[i]], rtol=_RTOL,
                                  max_panels=_MAX_PANELS)
        rest = flat >= knots[0]
        if rest.any():
            q = flat[rest]
            j = np.searchsorted(knots, q, side="right") - 1
            lo = knots[j]
            val, err = gk15_panels(self._g, lo, q)
            res = self._cum[j] + val
            bad = err > 1e-13 * np.abs(res)
            for k in np.flatnonzero(bad):
                val[k], _ = integrate(self._g, [lo[k], q[k]], rtol=_RTOL,
                                      max_panels=_MAX_PANELS)
            out[rest] = self._cum[j] + val
        return out.reshape(u.shape)


class RadialWeight:
    """A radial density ``omega(r)`` on ``[0, 1)``.

    Parameters
    ----------
    gap_density : callable
        Vectorized ``g(u) = omega(1 - u)``.
    kind : str
        ``"std"``, ``"table"``, ``"custom"`` or ``"shifted"``.
    label : str
        Spec string used in reports (``"std:1"``, ``"table:path"``...).
    """

    def __init__(self, gap_density, kind, label, alpha_std=None, kinks=()):
        self._gap = gap_density
        self.kind = kind
        self.label = label
        self.alpha_std = alpha_std
        self._tail = _TailTable(gap_density, kinks)
        self._mass_tail = _TailTable(
            lambda v: 2.0 * (1.0 - v) * gap_density(v), kinks)
        self._kinks = tuple(kinks)
        self._moments = np.empty(0)
        self._cert = None
        self._lock = threading.Lock()
        probe = gap_density(np.linspace(1e-6, 1.0, 257))
        if np.any(np.asarray(probe) < 0) or not np.all(np.isfinite(probe)):
            raise ValueError(f"density of {label} must be finite and nonnegative")

    def __repr__(self):
        return f"RadialWeight({self.label!r})"

    def density(self, r):
        return self._gap(1.0 - np.asarray(r, dtype=float))

    def density_gap(self, u):
        return self._gap(np.asarray(u, dtype=float))

    def tail_gap(self, u):
        """``omega_hat`` as a function of the gap ``u = 1 - r``."""
        return self._tail(u)

    def radial_mass_gap(self, u):
        """``2 int_{1-u}^1 s omega(s) ds``, the normalized-area mass of ``|z| > 1-u``."""
        return self._mass_tail(u)

    @property
    def total_mass(self):
        return float(self._mass_tail(1.0))

    def moments(self, n):
        """``m_k = 2 int_0^1 r^(2k+1) omega(r) dr`` for ``k < n``."""
        if n <= self._moments.size:
            return self._moments[:n].copy()
        with self._lock:
            if n > self._moments.size:
                size = max(n, 2 * self._moments.size)
                self._moments = _compute_moments(self, size)
        return self._moments[:n].copy()

    def certificate(self):
        """Doubling certificate on the default grid (cached)."""
        if self._cert is None:
            self._cert = doubling_check(self)
        return self._cert


def _compute_moments(w, n):
    k = np.arange(n)

    def f(u):
        lg = np.log1p(-u)[:, None]
        return 2.0 * np.exp((2 * k[None, :] + 1) * lg) * w.density_gap(u)[:, None]

    breaks = np.unique(np.concatenate([dyadic_breaks(_DEPTH), w._kinks]))
    try:
        val, _ = integrate(f, breaks, rtol=_RTOL, max_panels=_MAX_PANELS)
    except QuadratureError as exc:
        raise QuadratureError(
            f"moment quadrature failed for n={exc.component} of {w.label}: {exc}",
            interval=exc.interval, component=exc.component) from exc
    return val


# -- constructors -----------------------------------------------------------

def std_weight(alpha):
    """Standard weight ``(1 - r^2)^alpha``, ``alpha > -1``."""
    alpha = float(alpha)
    if not alpha > -1.0:
        raise WeightSpecError(f"standard weight needs alpha > -1, got {alpha}")

    def g(u):
        return (u * (2.0 - u)) ** alpha

    return RadialWeight(g, "std", f"std:{_fmt(alpha)}", alpha_std=alpha)


def table_weight(r, values, label="table"):
    """Piecewise-linear density through ``(r_i, values_i)``, flat outside the table."""
    r = np.asarray(r, dtype=float)
    v = np.asarray(values, dtype=float)
    if r.ndim != 1 or r.shape != v.shape or r.size < 2:
        raise WeightSpecError("table weight needs two equal-length columns with >= 2 rows")
    if np.any(np.diff(r) <= 0) or r[0] < 0 or r[-1] >= 1:
        raise WeightSpecError("table radii must be strictly increasing in [0, 1)")
    if np.any(v < 0):
        raise WeightSpecError("table densities must be nonnegative")
    gap_knots = (1.0 - r)[::-1]
    gap_vals = v[::-1]

    def g(u):
        return np.interp(u, gap_knots, gap_vals)

    return RadialWeight(g, "table", label, kinks=tuple(gap_knots))


def custom_weight(density, label="custom"):
    """Weight from a vectorized density callable in ``r``."""
    return RadialWeight(lambda u: np.asarray(density(1.0 - u), dtype=float),
                        "custom", label)


def parse_weight(spec):
    """Parse ``"std:<alpha>"`` or ``"table:<path>"``."""
    head, sep, arg = spec.partition(":")
    if not sep:
        raise WeightSpecError(
            f"bad weight spec {spec!r}; expected 'std:<alpha>' or 'table:<path>'")
    if head == "std":
        try:
            alpha = float(arg)
        except ValueError:
            raise WeightSpecError(
                f"bad alpha {arg!r} in weight spec {spec!r}; grammar 'std:<alpha>'") from None
        return std_weight(alpha)
    if head == "table":
        path = Path(arg)
        rows = []
        with path.open(newline="") as fh:
            for row in csv.reader(fh):
                if not row or row[0].strip().startswith("#"):
                    continue
                try:
                    rows.append((float(row[0]), float(row[1])))
                except (ValueError, IndexError):
                    if rows:
                        raise WeightSpecError(f"bad row {row!r} in {path}") from None
                    # header line
        if not rows:
            raise WeightSpecError(f"weight table {path} has no data rows")
        arr = np.array(rows)
        return table_weight(arr[:, 0], arr[:, 1], label=f"table:{arg}")
    raise WeightSpecError(
        f"unknown weight kind {head!r} in {spec!r}; expected 'std' or 'table'")


def _fmt(x):
    return repr(float(x)).rstrip("0").rstrip(".") if float(x) != int(x) else str(int(x))


# -- operations -------------------------------------------------------------

def omega_hat(w, r):
    """Tail mass ``int_r^1 omega(s) ds``; vectorized over ``r``."""
    r = np.asarray(r, dtype=float)
    if np.any((r < 0) | (r >= 1)):
        raise ValueError("omega_hat needs 0 <= r < 1")
    out = w.tail_gap(1.0 - r)
    return float(out) if out.ndim == 0 else out


def omega_tilde(w, r):
    r = np.asarray(r, dtype=float)
    return omega_hat(w, r) / (1.0 - r)


def box_mass(w, a):
    """``omega(S(a))``, taken as ``omega_hat(|a|) (1 - |a|)``."""
    ra = np.abs(np.asarray(a))
    if np.any(ra >= 1):
        raise ValueError("box_mass needs |a| < 1")
    u = 1.0 - ra
    out = w.tail_gap(u) * u
    return float(out) if out.ndim == 0 else out


def moments(w, n):
    return w.moments(n)


def moment(w, n):
    if n < 0:
        raise ValueError("moment index must be nonnegative")
    return float(w.moments(n + 1)[n])


def default_grid():
    """``1 - 2**(-j/8)`` for ``j = 0..160``: eight points per binade down to ``1 - 2**-20``."""
    return 1.0 - 2.0 ** (-np.arange(161) / 8.0)


@dataclass(frozen=True)
class DoublingCertificate:
    in_Dhat: bool
    C_hat: float
    in_Dcheck: bool
    C_check: float
    K: float
    alpha: float
    beta: float
    grid_resolution: int
    effective_max_r: float
    lemma_a_constant: float
    lemma_b_constant: float

    @property
    def in_D(self):
        return self.in_Dhat and self.in_Dcheck

    def to_dict(self):
        return asdict(self)


def _window_slopes(logu, logh, width=33, step=8):
    slopes = []
    n = logu.size
    if n < width:
        width = n
    for start in range(0, n - width + 1, step):
        x = logu[start:start + width]
        y = logh[start:start + width]
        slopes.append(np.polyfit(x, y, 1)[0])
    return np.array(slopes)


def doubling_check(w, grid=None, K=None):
    """Certify the doubling classes of ``w`` on a grid of radii.

    ``C_hat`` is the sup of ``omega_hat(r) / omega_hat((1+r)/2)``. ``C_check``
    is the inf of ``omega_hat(r) / omega_hat(1 - (1-r)/K)`` for the first
    ``K`` in ``(2, 4, 8, 16)`` giving a value above 1 (or for the given
    ``K``). ``alpha``/``beta`` are the smallest/largest least-squares slopes
    of ``log omega_hat`` against ``log(1-r)`` over sliding windows of four
    binades inside ``0.9 <= r <= 1 - 2**-20``.
    """
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
    if grid.ndim != 1 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing")
    if grid[0] < 0 or grid[-1] >= 1:
        raise ValueError("grid must lie in [0, 1)")
    if grid[-1] < 1 - 2.0 ** -20:
        raise ValueError("grid must reach 1 - 2**-20")
    u = 1.0 - grid
    h = w.tail_gap(u)
    h_half = w.tail_gap(u / 2)
    factors = (K,) if K is not None else DILATION_FACTORS
    h_k = {k: w.tail_gap(u / k) for k in factors}
    ok = (h > 0) & (h_half > 0)
    for v in h_k.values():
        ok &= v > 0
    # underflow near the circle: keep the leading block of usable points
    if not ok.all():
        stop = int(np.argmin(ok))
        ok[stop:] = False
    if ok.sum() < 8:
        raise ValueError(f"omega_hat underflows on the grid for {w.label}")
    u, h, h_half = u[ok], h[ok], h_half[ok]
    h_k = {k: v[ok] for k, v in h_k.items()}

    C_hat = float(np.max(h / h_half))
    in_Dhat = bool(np.isfinite(C_hat) and 1.0 < C_hat <= _DHAT_CAP)

    C_check, K_used = float("nan"), float(factors[-1])
    for k in factors:
        c = float(np.min(h / h_k[k]))
        C_check, K_used = c, float(k)
        if c > 1.0:
            break
    in_Dcheck = bool(C_check > 1.0)

    logu, logh = np.log(u), np.log(h)
    win = (u <= 0.1 + 1e-15) & (u >= 2.0 ** -20)
    slopes = _window_slopes(logu[win][::-1], logh[win][::-1])
    alpha, beta = float(slopes.min()), float(slopes.max())

    gA = h / u ** beta
    lemma_a = float(np.max(np.maximum.accumulate(gA) / gA))
    gB = h / u ** alpha
    lemma_b = float(np.max(gB / np.minimum.accumulate(gB)))

    return DoublingCertificate(
        in_Dhat=in_Dhat, C_hat=C_hat, in_Dcheck=in_Dcheck, C_check=C_check,
        K=K_used, alpha=alpha, beta=beta, grid_resolution=int(u.size),
        effective_max_r=float(1.0 - u[-1]),
        lemma_a_constant=lemma_a, lemma_b_constant=lemma_b,
    )


def lambda_shift(w, lam, certificate=None):
    """The weight ``omega(r) / (1 - r)^lam``; needs ``0 < lam < alpha(omega)``."""
    cert = certificate or w.certificate()
    lam = float(lam)
    if not 0.0 < lam < cert.alpha:
        raise ValueError(
            f"shift lambda={lam} must satisfy 0 < lambda < alpha={cert.alpha:.6g}")
    g = w._gap

    def shifted(u):
        return g(u) / u ** lam

    return RadialWeight(shifted, "shifted", f"{w.label}|shift:{_fmt(lam)}",
                        kinks=w._kinks)
