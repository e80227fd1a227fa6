"""Finite sections of composition operators on the Hilbert space with weight ``omega``.

The basis is ``e_k = z**k / sqrt(m_k)``. A truncated operator keeps the
``N x N`` block and a wider ``N x N_in`` block: the operator on degrees
``< N`` of the output can draw from input degrees beyond ``N`` (the map
``(1+z)/2`` sends ``z**n`` mostly to degrees near ``n/2``), so norms of row
tails are taken on the wide block.
"""

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.linalg import svdvals

from .symbols import power_coeffs, _require_valid

__all__ = [
    "TruncatedOperator",
    "composition_matrix",
    "combo_matrix",
    "op_norm",
    "essnorm_proxy",
    "proxy_decay",
    "dump_csv",
    "DEFAULT_N",
    "DEFAULT_M_LIST",
]

DEFAULT_N = 256
DEFAULT_M_LIST = (16, 32, 64, 128)
# input columns are added in blocks of N until a block is negligible
_COLUMN_TOL = 1e-13
_MAX_WIDTH_FACTOR = 8


@dataclass
class TruncatedOperator:
    entries: np.ndarray
    extended: np.ndarray
    weight: object = None
    provenance: list = field(default_factory=list)
    column_residual: float = 0.0

    @property
    def dim(self):
        return self.entries.shape[0]

    @classmethod
    def from_matrix(cls, A, weight=None, provenance=None):
        A = np.asarray(A, dtype=complex)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("matrix must be square")
        return cls(A, A.copy(), weight, list(provenance or []))

    def __add__(self, other):
        return _combine([(1.0, self), (1.0, other)])

    def __sub__(self, other):
        return _combine([(1.0, self), (-1.0, other)])

    def scaled(self, lam):
        return TruncatedOperator(lam * self.entries, lam * self.extended, self.weight,
                                 [(lam * l, s) for l, s in self.provenance],
                                 abs(lam) * self.column_residual)


def _widen(A, width):
    if A.shape[1] >= width:
        return A
    out = np.zeros((A.shape[0], width), dtype=complex)
    out[:, :A.shape[1]] = A
    return out


def _combine(pairs):
    dims = {T.dim for _, T in pairs}
    if len(dims) != 1:
        raise ValueError("operators have different dimensions")
    width = max(T.extended.shape[1] for _, T in pairs)
    ext = sum(lam * _widen(T.extended, width) for lam, T in pairs)
    N = dims.pop()
    prov = [(lam * l, s) for lam, T in pairs for l, s in T.provenance]
    resid = sum(abs(lam) * T.column_residual for lam, T in pairs)
    return TruncatedOperator(ext[:, :N].copy(), ext, pairs[0][1].weight, prov, resid)


def composition_matrix(phi, w, N=DEFAULT_N):
    """Matrix of ``f -> f o phi`` with entries ``c[n, m] sqrt(m_m / m_n)`` at row ``m``, column ``n``."""
    _require_valid(phi)
    if N < 1:
        raise ValueError("N must be positive")
    cap = _MAX_WIDTH_FACTOR * N
    coeffs = power_coeffs(phi, cap, N - 1)          # (cap, N): [n, m]
    mom = w.moments(cap)
    scale = np.sqrt(mom[:N])[:, None] / np.sqrt(mom)[None, :]
    full = coeffs.T * scale                          # (N, cap): [m, n]
    norms = np.linalg.norm(full, axis=0)
    top = norms.max() if norms.size else 0.0
    width, resid = cap, 0.0
    for start in range(N, cap, N):
        blk = norms[start:start + N].max()
        if blk <= _COLUMN_TOL * top:
            width, resid = start, float(blk)
            break
    else:
        resid = float(norms[cap - N:].max())
    ext = full[:, :width].copy()
    return TruncatedOperator(ext[:, :N].copy(), ext, w, [(1.0, phi.spec)], resid)


def combo_matrix(terms, w, N=DEFAULT_N):
    """``sum lam_j C_{phi_j}`` for ``terms = [(lam_j, phi_j), ...]``."""
    terms = list(terms)
    if not terms:
        raise ValueError("combination needs at least one term")
    mats = {}
    pairs = []
    for lam, phi in terms:
        if phi.spec not in mats:
            mats[phi.spec] = composition_matrix(phi, w, N)
        pairs.append((complex(lam), mats[phi.spec]))
    return _combine(pairs)


def op_norm(T):
    """Largest singular value of the wide block."""
    A = T.extended if isinstance(T, TruncatedOperator) else np.asarray(T)
    if not np.all(np.isfinite(A)):
        raise ValueError("operator has non-finite entries")
    if A.size == 0 or not np.any(A):
        return 0.0
    return float(svdvals(A)[0])


def essnorm_proxy(T, M_list=DEFAULT_M_LIST):
    """``||(I - P_M) T||`` for each ``M``: norm of the rows of degree ``>= M``."""
    out = []
    for M in M_list:
        M = int(M)
        if not 0 <= M < T.dim:
            raise ValueError(f"M={M} must satisfy 0 <= M < dim={T.dim}")
        out.append(op_norm(T.extended[M:]))
    return out


def proxy_decay(values):
    """First proxy value over the last; ``inf`` when the last vanishes."""
    first, last = values[0], values[-1]
    if last == 0:
        return np.inf if first > 0 else 1.0
    return first / last


def dump_csv(T, prefix):
    """Write ``<prefix>_re.csv`` and ``<prefix>_im.csv`` (row-major, N x N block)."""
    prefix = Path(prefix)
    paths = []
    for tag, part in (("re", T.entries.real), ("im", T.entries.imag)):
        p = prefix.with_name(f"{prefix.name}_{tag}.csv")
        with p.open("w", newline="") as fh:
            wr = csv.writer(fh)
            for row in part:
                wr.writerow([format(x, ".17g") for x in row])
        paths.append(p)
    return paths
