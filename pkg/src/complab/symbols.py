"""Analytic self-maps of the unit disk.

Every map evaluates on numpy arrays and on mpmath scalars, and can push a
truncated power series through itself (``apply_series``), which gives exact
Taylor coefficients of powers without sampling.
"""

import math
from dataclasses import dataclass, field

import mpmath as mp
import numpy as np

__all__ = [
    "SelfMap",
    "Dilation",
    "Rotation",
    "LinearFractional",
    "Polynomial",
    "Composition",
    "PRESETS",
    "preset",
    "parse_symbol",
    "SymbolSpecError",
    "TaylorToleranceError",
    "Validation",
    "selfmap_validate",
    "series_of",
    "taylor_coeffs",
    "power_coeffs",
    "julia_quotient",
    "FirstOrderData",
    "angular_derivative",
    "ContactScan",
    "contact_scan",
    "same_data",
    "DYADIC_LEVELS",
    "WINDOW_LEVELS",
]

DYADIC_LEVELS = tuple(range(4, 41))
WINDOW_LEVELS = tuple(range(30, 41))
DIVERGENCE_LEVEL = 1e6
OSCILLATION_RATIO = 10.0
ETA_TOL = 1e-6
D_REL_TOL = 1e-3
_MP_DPS = 60
# quotients whose gap 1 - |phi| falls below this are recomputed in mpmath
_MP_GAP = 1e-6


class SymbolSpecError(ValueError):
    pass


class TaylorToleranceError(RuntimeError):
    pass


def _conv(a, b, K):
    return np.convolve(a, b)[:K + 1]


def _series_div(num, den):
    K = num.size - 1
    q = np.zeros(K + 1, dtype=complex)
    d0 = den[0]
    for k in range(K + 1):
        acc = num[k]
        if k:
            acc -= np.dot(den[1:k + 1], q[k - 1::-1])
        q[k] = acc / d0
    return q


class SelfMap:
    """Base class; subclasses implement ``_eval``, ``derivative`` and ``apply_series``."""

    spec = "selfmap"

    def __call__(self, z):
        if isinstance(z, (mp.mpc, mp.mpf)):
            return self._eval(z)
        z = np.asarray(z, dtype=complex)
        out = self._eval(z)
        return out[()] if np.ndim(out) == 0 else out

    def _eval(self, z):
        raise NotImplementedError

    def derivative(self, z):
        raise NotImplementedError

    def apply_series(self, S):
        raise NotImplementedError

    @property
    def origin_image(self):
        return complex(self(0.0))

    @property
    def validation(self):
        if getattr(self, "_validation", None) is None:
            self._validation = selfmap_validate(self)
        return self._validation

    @property
    def validated(self):
        return self.validation.ok

    def singularities(self):
        """Points of the closed disk where the formula breaks down."""
        return []

    def __repr__(self):
        return f"<SelfMap {self.spec}>"

    def __eq__(self, other):
        return isinstance(other, SelfMap) and other.spec == self.spec

    def __hash__(self):
        return hash(self.spec)


def _num(x):
    x = complex(x)
    if x.imag == 0:
        return repr(x.real)
    return repr(x).strip("()")


class Dilation(SelfMap):
    def __init__(self, s, spec=None):
        self.s = complex(s)
        self.spec = spec or f"dilate:{_num(self.s)}"

    def _eval(self, z):
        return self.s * z

    def derivative(self, z):
        return np.full(np.shape(z), self.s, dtype=complex)[()]

    def apply_series(self, S):
        return self.s * S


class Rotation(SelfMap):
    def __init__(self, theta, spec=None):
        self.theta = float(theta)
        self.unit = complex(np.exp(1j * self.theta))
        self.spec = spec or f"rot:{self.theta!r}"

    def _eval(self, z):
        if isinstance(z, (mp.mpc, mp.mpf)):
            return mp.expj(mp.mpf(self.theta)) * z
        return self.unit * z

    def derivative(self, z):
        return np.full(np.shape(z), self.unit, dtype=complex)[()]

    def apply_series(self, S):
        return self.unit * S


class LinearFractional(SelfMap):
    """``(a z + b) / (c z + d)``."""

    def __init__(self, a, b, c, d, spec=None):
        self.a, self.b, self.c, self.d = (complex(x) for x in (a, b, c, d))
        if self.a * self.d - self.b * self.c == 0:
            raise SymbolSpecError("linfrac coefficients are degenerate (ad - bc = 0)")
        self.spec = spec or "linfrac:" + ",".join(
            _num(x) for x in (self.a, self.b, self.c, self.d))

    def _eval(self, z):
        return (self.a * z + self.b) / (self.c * z + self.d)

    def derivative(self, z):
        z = np.asarray(z, dtype=complex)
        out = (self.a * self.d - self.b * self.c) / (self.c * z + self.d) ** 2
        return out[()]

    def apply_series(self, S):
        return _series_div(self.a * S + self.b * _unit(S), self.c * S + self.d * _unit(S))

    def singularities(self):
        if self.c == 0:
            return []
        return [-self.d / self.c]


def _unit(S):
    e = np.zeros_like(S)
    e[0] = 1.0
    return e


class Polynomial(SelfMap):
    """``sum coeffs[k] z**k``."""

    def __init__(self, coeffs, spec=None):
        c = np.asarray(coeffs, dtype=complex)
        if c.ndim != 1 or c.size == 0:
            raise SymbolSpecError("polynomial needs at least one coefficient")
        self.coeffs = c
        self.spec = spec or "poly:" + ",".join(_num(x) for x in c)

    def _eval(self, z):
        out = 0
        for c in self.coeffs[::-1]:
            out = out * z + (c if c.imag else c.real)
        if not isinstance(z, (mp.mpc, mp.mpf)):
            out = out + np.zeros_like(z)
        return out

    def derivative(self, z):
        z = np.asarray(z, dtype=complex)
        dc = self.coeffs[1:] * np.arange(1, self.coeffs.size)
        out = np.zeros_like(z)
        for c in dc[::-1]:
            out = out * z + c
        return out[()]

    def apply_series(self, S):
        K = S.size - 1
        out = np.zeros(K + 1, dtype=complex)
        for c in self.coeffs[::-1]:
            out = _conv(out, S, K)
            out[0] += c
        return out


class Composition(SelfMap):
    """``outer(inner(z))``."""

    def __init__(self, outer, inner, spec=None):
        self.outer, self.inner = outer, inner
        self.spec = spec or f"compose({outer.spec};{inner.spec})"

    def _eval(self, z):
        return self.outer._eval(self.inner._eval(z))

    def derivative(self, z):
        return self.outer.derivative(self.inner(z)) * self.inner.derivative(z)

    def apply_series(self, S):
        return self.outer.apply_series(self.inner.apply_series(S))

    def singularities(self):
        return list(self.inner.singularities())


# (1+z)/2 + (1-z)^2/8 and (1+z)/2 + (1-z)^4/32 expanded
PRESETS = {
    "id": lambda: Dilation(1.0, spec="id"),
    "halfmap": lambda: Polynomial([0.5, 0.5], spec="halfmap"),
    "zhalfmap": lambda: Polynomial([0.0, 0.5, 0.5], spec="zhalfmap"),
    "tangentmap": lambda: Polynomial([0.625, 0.25, 0.125], spec="tangentmap"),
    "quarticmap": lambda: Polynomial(
        [0.5 + 1 / 32, 0.5 - 4 / 32, 6 / 32, -4 / 32, 1 / 32], spec="quarticmap"),
}

_GRAMMAR = ("dilate:<s> | rot:<theta> | linfrac:<a>,<b>,<c>,<d> | poly:<c0>,<c1>,... | "
            + " | ".join(PRESETS) + " | compose(<spec>;<spec>)")


def preset(name):
    return PRESETS[name]()


def _parse_number(tok, spec):
    t = tok.strip().replace(" ", "")
    try:
        return complex(t)
    except ValueError:
        raise SymbolSpecError(
            f"bad number {tok!r} in symbol spec {spec!r}; grammar: {_GRAMMAR}") from None


def parse_symbol(spec):
    """Build a ``SelfMap`` from the symbol mini-language."""
    s = spec.strip()
    if s in PRESETS:
        return preset(s)
    if s.startswith("compose(") and s.endswith(")"):
        body = s[len("compose("):-1]
        depth, split = 0, None
        for i, ch in enumerate(body):
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
            elif ch == ";" and depth == 0:
                if split is not None:
                    split = -1
                    break
                split = i
        if split is None or split < 0:
            raise SymbolSpecError(
                f"compose needs exactly two specs separated by ';' in {spec!r}")
        return Composition(parse_symbol(body[:split]), parse_symbol(body[split + 1:]))
    head, sep, arg = s.partition(":")
    if sep:
        args = [a for a in arg.split(",")]
        if head == "dilate":
            if len(args) != 1:
                raise SymbolSpecError(f"dilate takes one value in {spec!r}")
            return Dilation(_parse_number(args[0], spec))
        if head == "rot":
            val = _parse_number(args[0], spec)
            if len(args) != 1 or val.imag:
                raise SymbolSpecError(f"rot takes one real angle in {spec!r}")
            return Rotation(val.real)
        if head == "linfrac":
            if len(args) != 4:
                raise SymbolSpecError(f"linfrac takes four values a,b,c,d in {spec!r}")
            return LinearFractional(*(_parse_number(a, spec) for a in args))
        if head == "poly":
            return Polynomial([_parse_number(a, spec) for a in args])
    raise SymbolSpecError(f"unknown symbol {s!r}; grammar: {_GRAMMAR}")


# -- validation -------------------------------------------------------------

@dataclass(frozen=True)
class Validation:
    ok: bool
    max_modulus: float
    detail: str = ""

    def __iter__(self):
        return iter((self.ok, self.max_modulus))


BOUNDARY_POINTS = 4096
INTERIOR_POINTS = 10_000


def selfmap_validate(phi, seed=0):
    """Check ``|phi| <= 1`` on the circle and ``< 1`` inside."""
    for pole in phi.singularities():
        if abs(pole) <= 1.0:
            return Validation(False, math.inf, f"singularity at {pole!r} in the closed disk")
    zb = np.exp(2j * np.pi * np.arange(BOUNDARY_POINTS) / BOUNDARY_POINTS)
    rng = np.random.default_rng(seed)
    rad = np.sqrt(rng.random(INTERIOR_POINTS)) * (1 - 1e-9)
    zi = rad * np.exp(2j * np.pi * rng.random(INTERIOR_POINTS))
    with np.errstate(all="ignore"):
        vb = np.abs(phi(zb))
        vi = np.abs(phi(zi))
    if not (np.all(np.isfinite(vb)) and np.all(np.isfinite(vi))):
        k = int(np.argmax(~np.isfinite(np.concatenate([vb, vi]))))
        where = np.concatenate([zb, zi])[k]
        return Validation(False, math.inf, f"non-finite value at {complex(where)!r}")
    mx = float(max(vb.max(), vi.max()))
    if vb.max() > 1 + 1e-12:
        k = int(np.argmax(vb))
        return Validation(False, mx, f"boundary modulus {float(vb[k])!r} at {complex(zb[k])!r}")
    if vi.max() >= 1:
        k = int(np.argmax(vi))
        return Validation(False, mx, f"interior modulus {float(vi[k])!r} at {complex(zi[k])!r}")
    return Validation(True, mx, "")


def _require_valid(phi):
    v = phi.validation
    if not v.ok:
        raise ValueError(f"{phi.spec} is not a self-map of the disk: {v.detail}")


# -- Taylor coefficients ----------------------------------------------------

def series_of(phi, K):
    """Taylor coefficients of ``phi`` up to degree ``K``."""
    z = np.zeros(K + 1, dtype=complex)
    if K >= 1:
        z[1] = 1.0
    return phi.apply_series(z)


def power_coeffs(phi, n_max, K):
    """Array ``C[n, m]`` of degree-``m`` coefficients of ``phi**n``, ``n < n_max``, ``m <= K``."""
    S = series_of(phi, K)
    out = np.zeros((n_max, K + 1), dtype=complex)
    cur = np.zeros(K + 1, dtype=complex)
    cur[0] = 1.0
    for n in range(n_max):
        out[n] = cur
        cur = _conv(cur, S, K)
    return out


def _sampled(phi, n, K, radius):
    L = 1 << max(3, math.ceil(math.log2(max(4 * K, 1))))
    z = radius * np.exp(2j * np.pi * np.arange(L) / L)
    vals = np.asarray(phi(z)) ** n
    c = np.fft.fft(vals)[:K + 1] / L
    return c / radius ** np.arange(K + 1)


def taylor_coeffs(phi, n, K, method="series", tol=1e-10):
    """Coefficients ``c_{n,0..K}`` of ``phi(z)**n``.

    ``method="series"`` uses truncated power-series arithmetic.
    ``method="sampled"`` uses discrete Fourier inversion on circles of
    radius 0.75 and 0.85 and raises when they disagree by more than ``tol``.
    """
    if n < 0 or K < 0:
        raise ValueError("n and K must be nonnegative")
    _require_valid(phi)
    if method == "series":
        S = series_of(phi, K)
        out = _unit(np.zeros(K + 1, dtype=complex))
        for _ in range(n):
            out = _conv(out, S, K)
        return out
    if method == "sampled":
        a = _sampled(phi, n, K, 0.75)
        b = _sampled(phi, n, K, 0.85)
        gap = np.max(np.abs(a - b)) if K >= 0 else 0.0
        if gap > tol:
            raise TaylorToleranceError(
                f"circle-sampled coefficients of {phi.spec}**{n} disagree by {gap:.3g} "
                f"between radii; use method='series' or fewer degrees (K={K})")
        return a
    raise ValueError(f"unknown method {method!r}")


# -- boundary behaviour -----------------------------------------------------

def _unimodular(zeta):
    zeta = complex(zeta)
    if not math.isclose(abs(zeta), 1.0, abs_tol=1e-9):
        raise ValueError(f"boundary point {zeta!r} is not unimodular")
    return zeta / abs(zeta)


def julia_quotient(phi, zeta, t, precise=True):
    """``(1 - |phi(t zeta)|) / (1 - t)``; evaluated in extended precision by default."""
    zeta = _unimodular(zeta)
    if precise:
        with mp.workdps(_MP_DPS):
            zm = mp.mpc(zeta.real, zeta.imag)
            zm = zm / abs(zm)
            tm = mp.mpf(t)
            return float((1 - abs(phi(tm * zm))) / (1 - tm))
    w = phi(t * zeta)
    return float((1 - abs(w)) / (1 - t))


def _dyadic_quotients(phi, zeta):
    """Quotients at ``t_k = 1 - 2**-k`` plus the image at the deepest level."""
    ks = np.array(DYADIC_LEVELS)
    gaps = 2.0 ** -ks
    w = np.asarray(phi((1.0 - gaps) * zeta))
    mod_gap = 1.0 - np.abs(w)
    q = mod_gap / gaps
    redo = np.flatnonzero(mod_gap < _MP_GAP)
    eta = w[-1] / abs(w[-1]) if abs(w[-1]) > 0 else complex("nan")
    if redo.size:
        with mp.workdps(_MP_DPS):
            zm = mp.mpc(zeta.real, zeta.imag)
            zm = zm / abs(zm)
            for i in redo:
                tm = 1 - mp.mpf(2) ** (-int(ks[i]))
                val = phi(tm * zm)
                q[i] = float((1 - abs(val)) / (1 - tm))
                if i == ks.size - 1:
                    eta = complex(val / abs(val))
    return q, complex(eta)


@dataclass(frozen=True)
class FirstOrderData:
    boundary_point: complex
    image: complex
    derivative_modulus: float
    status: str  # "finite" | "infinite" | "inconclusive"
    quotients: tuple = field(default=(), repr=False, compare=False)

    @property
    def finite(self):
        return self.status == "finite"

    @property
    def infinite(self):
        return self.status == "infinite"

    def to_dict(self):
        return {
            "zeta": [self.boundary_point.real, self.boundary_point.imag],
            "eta": [self.image.real, self.image.imag],
            "d": self.derivative_modulus,
            "status": self.status,
        }


def _classify(q):
    win = q[-len(WINDOW_LEVELS):]
    if np.all(np.diff(win) >= 0) and win.max() > DIVERGENCE_LEVEL:
        return "infinite"
    lo = win.min()
    if lo <= 0 or win.max() / lo > OSCILLATION_RATIO:
        return "inconclusive"
    return "finite"


def angular_derivative(phi, zeta):
    """First-order data of ``phi`` at ``zeta`` from radial Julia quotients.

    Quotients are taken at ``t_k = 1 - 2**-k``, ``k = 4..40``. The value
    ``d`` is the minimum over ``k = 30..40``. The point is outside the contact
    set if those quotients increase and exceed ``1e6``; a spread above 10 in
    the window without that pattern is reported as inconclusive.
    """
    _require_valid(phi)
    zeta = _unimodular(zeta)
    q, eta = _dyadic_quotients(phi, zeta)
    status = _classify(q)
    win = q[-len(WINDOW_LEVELS):]
    if status == "finite":
        return FirstOrderData(zeta, eta, float(win.min()), status, tuple(q))
    d = math.inf if status == "infinite" else float("nan")
    return FirstOrderData(zeta, complex("nan"), d, status, tuple(q))


def same_data(a, b, eta_tol=ETA_TOL, rel_tol=D_REL_TOL):
    """Whether two finite first-order data agree within the matching band."""
    if not (a.finite and b.finite):
        return False
    if abs(a.image - b.image) > eta_tol:
        return False
    return abs(a.derivative_modulus - b.derivative_modulus) <= rel_tol * max(
        a.derivative_modulus, b.derivative_modulus)


@dataclass
class ContactScan:
    """Finite-derivative hits of a boundary scan."""

    symbol: str
    resolution: int
    hits: list
    base_hits: frozenset
    unresolved: list

    def __iter__(self):
        return iter(self.hits)

    def __len__(self):
        return len(self.hits)

    def __getitem__(self, i):
        return self.hits[i]

    @property
    def points(self):
        return [z for z, _ in self.hits]


def contact_scan(phi, angular_resolution=256):
    """Scan ``angular_resolution`` equally spaced boundary points (starting at 1)
    for finite angular derivatives, refining once at ``+-h/4`` and ``+-h/2``
    around each hit."""
    _require_valid(phi)
    n = int(angular_resolution)
    h = 2 * math.pi / n
    hits, unresolved, base = [], [], set()
    for j in range(n):
        zeta = complex(np.exp(1j * h * j)) if j else 1.0 + 0j
        data = angular_derivative(phi, zeta)
        if data.finite:
            base.add(j)
            hits.append((h * j, zeta, data))
        elif data.status == "inconclusive":
            unresolved.append(zeta)
    extra = []
    for theta, _, _ in hits:
        for off in (-h / 2, -h / 4, h / 4, h / 2):
            zeta = complex(np.exp(1j * (theta + off)))
            data = angular_derivative(phi, zeta)
            if data.finite:
                extra.append((theta + off, zeta, data))
            elif data.status == "inconclusive":
                unresolved.append(zeta)
    merged = sorted(hits + extra, key=lambda x: x[0] % (2 * math.pi))
    out, seen = [], set()
    for theta, zeta, data in merged:
        key = round((theta % (2 * math.pi)) / h * 4) % (4 * n)
        if key in seen:
            continue
        seen.add(key)
        out.append((zeta, data))
    return ContactScan(phi.spec, n, out, frozenset(base), unresolved)
