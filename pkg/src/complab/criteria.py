"""Boundary-limit quantities and compactness verdicts for combinations of
composition operators."""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from ._parallel import pmap
from .geometry import approach_path, rho
from .operators import composition_matrix, essnorm_proxy, proxy_decay, DEFAULT_M_LIST
from .symbols import angular_derivative, contact_scan, same_data
from .verdict import (BOUNDED_AWAY, INCONCLUSIVE, VANISHING, classify, thresholds)

__all__ = [
    "CriterionReport",
    "InconclusiveError",
    "moorhouse_quantity",
    "boundary_limsup",
    "local_limsup",
    "theorem8_bound",
    "necessary_conditions",
    "individual_compactness",
    "theorem12_verdict",
    "theorem15_verdict",
    "COMPACT",
    "NOT_COMPACT",
    "VERDICT_INCONCLUSIVE",
    "DEFAULT_ANNULI",
]

COMPACT = "COMPACT"
NOT_COMPACT = "NOT-COMPACT"
VERDICT_INCONCLUSIVE = "INCONCLUSIVE"

DEFAULT_ANNULI = tuple(1.0 - 2.0 ** -k for k in range(4, 15))
DEFAULT_ANGULAR = 512
PATH_APERTURES = (2.0, 8.0)
PATH_SAMPLES = 24
SUM_TOL = 1e-6
LAMBDA_TOL = 1e-12
PROXY_DECAY_COMPACT = 4.0
CONTACT_RESOLUTION = 256
_REFINE_TOP = 4
_REFINE_POINTS = 64


class InconclusiveError(RuntimeError):
    pass


def _c(z):
    z = complex(z)
    return [z.real, z.imag]


@dataclass
class CriterionReport:
    quantity_name: str
    annuli: list
    sups: list
    verdict: str
    path_values: list = field(default_factory=list)
    parameters: dict = field(default_factory=dict)
    thresholds: dict = field(default_factory=thresholds)

    def to_dict(self):
        return {
            "quantity": self.quantity_name,
            "annuli": list(self.annuli),
            "sups": list(self.sups),
            "paths": self.path_values,
            "verdict": self.verdict,
            "params": self.parameters,
            "thresholds": self.thresholds,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


# -- pointwise quantity -----------------------------------------------------

def moorhouse_quantity(phi, psi, z):
    """``((1-|z|^2)/(1-|phi|^2) + (1-|z|^2)/(1-|psi|^2)) rho(phi, psi)``; symmetric in the maps."""
    z = np.asarray(z, dtype=complex)
    a = np.asarray(phi(z))
    b = np.asarray(psi(z))
    rz = np.abs(z)
    top = (1.0 - rz) * (1.0 + rz)
    ra, rb = np.abs(a), np.abs(b)
    sa = top / ((1.0 - ra) * (1.0 + ra))
    sb = top / ((1.0 - rb) * (1.0 + rb))
    d = np.maximum(rho(a, b), rho(b, a))
    out = (sa + sb) * d
    return float(out) if out.ndim == 0 else out


def _moorhouse(phi, psi):
    def q(z):
        return moorhouse_quantity(phi, psi, z)
    q.__name__ = f"moorhouse({phi.spec},{psi.spec})"
    return q


# -- boundary scans ---------------------------------------------------------

def _ring_sup(q, R, angles):
    """Max of ``q`` on ``R e^{i angles}`` with a local refinement around the top values."""
    z = R * np.exp(1j * angles)
    vals = np.asarray(q(z), dtype=float)
    best = float(vals.max())
    if angles.size < 3:
        return best
    h = float(np.min(np.diff(angles)))
    for k in np.argsort(vals)[::-1][:_REFINE_TOP]:
        loc = angles[k] + np.linspace(-h, h, _REFINE_POINTS)
        best = max(best, float(np.max(q(R * np.exp(1j * loc)))))
    return best


def _path_entry(q, path):
    vals = [float(v) for v in np.asarray(q(path.samples), dtype=float)]
    return {
        "zeta": _c(path.target),
        "M": path.aperture,
        "moduli": [float(abs(z)) for z in path.samples],
        "values": vals,
        "verdict": classify(vals, bounded_label=BOUNDED_AWAY),
    }


def _combine(verdicts):
    if not verdicts:
        return INCONCLUSIVE
    if any(v == BOUNDED_AWAY for v in verdicts):
        return BOUNDED_AWAY
    if all(v == VANISHING for v in verdicts):
        return VANISHING
    return INCONCLUSIVE


def _paths_at(zetas, apertures=PATH_APERTURES, n=PATH_SAMPLES):
    out = []
    for zeta in zetas:
        for M in apertures:
            out.append(approach_path(zeta, M, n))
    return out


def boundary_limsup(q, radii=DEFAULT_ANNULI, angular=DEFAULT_ANGULAR, paths=None,
                    name=None, parameters=None):
    """Annulus suprema of ``q`` (plus values along approach paths) with a verdict."""
    radii = [float(r) for r in radii]
    angles = 2 * np.pi * np.arange(angular) / angular
    sups = pmap(lambda R: _ring_sup(q, R, angles), radii)
    verdicts = [classify(sups, bounded_label=BOUNDED_AWAY)] if radii else []
    entries = [_path_entry(q, p) for p in (paths or [])]
    verdicts += [e["verdict"] for e in entries]
    return CriterionReport(
        name or getattr(q, "__name__", "q"), radii, sups, _combine(verdicts), entries,
        dict(parameters or {}, angular=angular))


def local_limsup(q, zeta, radii=DEFAULT_ANNULI, angular=DEFAULT_ANGULAR,
                 apertures=PATH_APERTURES, name=None, parameters=None):
    """Suprema over shrinking sectors at ``zeta`` (half-width ``min(pi, 4 (1-r)^(1/4))``),
    together with approach paths of the given apertures."""
    zeta = complex(zeta)
    base = math.atan2(zeta.imag, zeta.real)
    radii = [float(r) for r in radii]

    def one(R):
        hw = min(math.pi, 4.0 * (1.0 - R) ** 0.25)
        return _ring_sup(q, R, base + np.linspace(-hw, hw, angular))

    sups = pmap(one, radii)
    entries = [_path_entry(q, p) for p in _paths_at([zeta], apertures)]
    verdicts = [classify(sups, bounded_label=BOUNDED_AWAY)] + [e["verdict"] for e in entries]
    params = dict(parameters or {}, zeta=_c(zeta), angular=angular,
                  sector="min(pi, 4*(1-r)**0.25)")
    return CriterionReport(name or getattr(q, "__name__", "q"), radii, sups,
                           _combine(verdicts), entries, params)


# -- first-order data bookkeeping -------------------------------------------

class _ScanCache:
    def __init__(self, resolution):
        self.resolution = resolution
        self._scans = {}

    def __call__(self, phi):
        if phi.spec not in self._scans:
            self._scans[phi.spec] = contact_scan(phi, self.resolution)
        return self._scans[phi.spec]


def _angle_key(zeta, resolution):
    th = math.atan2(zeta.imag, zeta.real) % (2 * math.pi)
    return round(th / (2 * math.pi / resolution) * 4) % (4 * resolution)


def _classes(members):
    """Greedy grouping of ``(index, lam, data)`` by matching first-order data."""
    groups = []
    for idx, lam, data in members:
        for g in groups:
            if same_data(g[0][2], data):
                g.append((idx, lam, data))
                break
        else:
            groups.append([(idx, lam, data)])
    return groups


def theorem8_bound(terms, zeta, w, p):
    """``max_i |sum_{j ~ i} lam_j|^p / d_i^(beta+1)`` over symbols with a finite
    angular derivative at ``zeta``; ``j ~ i`` means matching first-order data."""
    beta = w.certificate().beta
    data = [angular_derivative(phi, zeta) for _, phi in terms]
    bad = [phi.spec for (_, phi), d in zip(terms, data) if d.status == "inconclusive"]
    if bad:
        raise InconclusiveError(f"angular derivative inconclusive for: {', '.join(bad)}")
    best = 0.0
    for i, di in enumerate(data):
        if not di.finite:
            continue
        total = sum(complex(terms[j][0]) for j, dj in enumerate(data) if same_data(di, dj))
        best = max(best, abs(total) ** p / di.derivative_modulus ** (beta + 1.0))
    return float(best)


def necessary_conditions(terms, resolution=CONTACT_RESOLUTION, scans=None):
    """Cancellation of coefficients within every first-order data class, and for
    ``C_phi - sum C_phi_j`` the disjointness/coverage of contact sets."""
    scans = scans or _ScanCache(resolution)
    terms = [(complex(l), phi) for l, phi in terms]
    by_point = {}
    unresolved = []
    for idx, (lam, phi) in enumerate(terms):
        sc = scans(phi)
        unresolved += [{"symbol": phi.spec, "zeta": _c(z)} for z in sc.unresolved]
        for zeta, data in sc.hits:
            key = _angle_key(zeta, resolution)
            by_point.setdefault(key, [zeta, []])[1].append((idx, lam, data))
    classes = []
    for key in sorted(by_point):
        zeta, members = by_point[key]
        for g in _classes(members):
            s = sum(lam for _, lam, _ in g)
            classes.append({
                "zeta": _c(zeta),
                "eta": _c(g[0][2].image),
                "d": g[0][2].derivative_modulus,
                "members": [terms[i][1].spec for i, _, _ in g],
                "sum": _c(s),
                "pass": abs(s) <= SUM_TOL,
            })
    report = {
        "classes": classes,
        "cancellation_pass": all(c["pass"] for c in classes),
        "unresolved": unresolved,
        "resolution": resolution,
    }
    lams = [l for l, _ in terms]
    if len(terms) >= 2 and abs(lams[0] - 1) <= LAMBDA_TOL and all(
            abs(l + 1) <= LAMBDA_TOL for l in lams[1:]):
        report.update(_cover_check(terms[0][1], [phi for _, phi in terms[1:]], scans))
    report["pass"] = report["cancellation_pass"] and report.get("disjoint", True) \
        and report.get("covered", True)
    return report


def _cover_check(phi, parts, scans):
    main = set(scans(phi).base_hits)
    sets = [set(scans(p).base_hits) for p in parts]
    overlaps = [[parts[i].spec, parts[j].spec, sorted(sets[i] & sets[j])]
                for i in range(len(sets)) for j in range(i + 1, len(sets))
                if sets[i] & sets[j]]
    union = set().union(*sets) if sets else set()
    return {
        "disjoint": not overlaps,
        "overlaps": overlaps,
        "covered": main == union,
        "coverage_missing": sorted(main - union),
        "coverage_extra": sorted(union - main),
    }


def individual_compactness(phi, w, N=256, M_list=DEFAULT_M_LIST, scan=None):
    """Numerical stand-in for compactness of a single composition operator:
    empty contact set and a proxy decay of at least 4x over ``M_list``."""
    scan = scan or contact_scan(phi, CONTACT_RESOLUTION)
    out = {"symbol": phi.spec, "contact_points": len(scan.hits),
           "unresolved": len(scan.unresolved)}
    if scan.hits:
        out.update(proxy=None, decay=None, compact=False, established=True,
                   reason="finite angular derivative found")
        return out
    prox = essnorm_proxy(composition_matrix(phi, w, N), M_list)
    dec = proxy_decay(prox)
    ok = dec >= PROXY_DECAY_COMPACT and not scan.unresolved
    out.update(proxy=prox, decay=dec if math.isfinite(dec) else "inf", compact=bool(ok),
               established=bool(ok),
               reason="empty contact set and proxy decay" if ok else
               "empty contact set but proxy decay too slow")
    return out


def _require_D(w):
    cert = w.certificate()
    if not cert.in_D:
        raise ValueError(f"weight {w.label} is not certified doubling in both senses")
    return cert


def theorem12_verdict(phi, psi, lam1, lam2, w, p, N=256, resolution=CONTACT_RESOLUTION,
                      radii=DEFAULT_ANNULI, angular=DEFAULT_ANGULAR):
    """Verdict for compactness of ``lam1 C_phi + lam2 C_psi``."""
    _require_D(w)
    lam1, lam2 = complex(lam1), complex(lam2)
    scans = _ScanCache(resolution)
    nec = necessary_conditions([(lam1, phi), (lam2, psi)], resolution, scans)
    ind = [individual_compactness(f, w, N, scan=scans(f)) for f in (phi, psi)]
    cond_i = all(x["compact"] for x in ind)
    i_fails = not cond_i
    zetas = [z for f in (phi, psi) for z in scans(f).points]
    # shared points once, in angle order
    uniq = {}
    for z in zetas:
        uniq.setdefault(_angle_key(z, resolution), z)
    paths = _paths_at([uniq[k] for k in sorted(uniq)])
    mh = boundary_limsup(_moorhouse(phi, psi), radii, angular, paths,
                         name="moorhouse",
                         parameters={"phi": phi.spec, "psi": psi.spec})
    sum_zero = abs(lam1 + lam2) <= LAMBDA_TOL
    cond_ii = sum_zero and mh.verdict == VANISHING
    ii_fails = (not sum_zero) or mh.verdict == BOUNDED_AWAY
    if cond_i or cond_ii:
        verdict, via = COMPACT, "(i)" if cond_i else "(ii)"
    elif not nec["pass"]:
        verdict, via = NOT_COMPACT, "necessary conditions"
    elif i_fails and ii_fails:
        verdict, via = NOT_COMPACT, "(i) and (ii) fail"
    else:
        verdict, via = VERDICT_INCONCLUSIVE, None
    return {
        "verdict": verdict,
        "via": via,
        "params": {"phi": phi.spec, "psi": psi.spec, "lambda1": _c(lam1),
                   "lambda2": _c(lam2), "weight": w.label, "p": p, "N": N,
                   "resolution": resolution},
        "condition_i": {"holds": cond_i, "symbols": ind,
                        "note": "individual compactness is a numerical proxy"},
        "condition_ii": {"holds": cond_ii, "lambda_sum_zero": sum_zero,
                         "report": mh.to_dict()},
        "necessary": nec,
        "thresholds": thresholds(),
    }


def theorem15_verdict(phi, terms, w, resolution=CONTACT_RESOLUTION, radii=DEFAULT_ANNULI,
                      angular=DEFAULT_ANGULAR):
    """Verdict for compactness of ``C_phi - sum lam_j C_phi_j`` (all maps non-compact)."""
    _require_D(w)
    terms = [(complex(l), f) for l, f in terms]
    if not terms:
        raise ValueError("need at least one term")
    scans = _ScanCache(resolution)
    maps = [phi] + [f for _, f in terms]
    noncompact = {f.spec: bool(scans(f).hits) for f in maps}
    hypothesis = all(noncompact.values())

    cond1 = all(abs(l - 1) <= LAMBDA_TOL for l, _ in terms)
    cover = _cover_check(phi, [f for _, f in terms], scans)
    cond2 = cover["disjoint"] and cover["covered"]

    local = []
    for _, f in terms:
        for zeta, _ in scans(f).hits:
            j = _angle_key(zeta, resolution)
            if j % 4:
                continue  # refinement points: base grid only
            rep = local_limsup(_moorhouse(phi, f), zeta, radii, angular,
                               name="moorhouse-local",
                               parameters={"phi": phi.spec, "psi": f.spec})
            local.append(rep.to_dict())
    verdicts = [r["verdict"] for r in local]
    if all(v == VANISHING for v in verdicts):
        cond3 = True
    elif any(v == BOUNDED_AWAY for v in verdicts):
        cond3 = False
    else:
        cond3 = None

    if not hypothesis:
        verdict = VERDICT_INCONCLUSIVE
    elif cond1 and cond2 and cond3:
        verdict = COMPACT
    elif not cond1 or not cond2 or cond3 is False:
        verdict = NOT_COMPACT
    else:
        verdict = VERDICT_INCONCLUSIVE
    return {
        "verdict": verdict,
        "params": {"phi": phi.spec, "terms": [[_c(l), f.spec] for l, f in terms],
                   "weight": w.label, "resolution": resolution},
        "hypothesis_noncompact": {"holds": hypothesis, "symbols": noncompact},
        "condition_1": {"holds": cond1},
        "condition_2": dict(cover, holds=cond2),
        "condition_3": {"holds": cond3, "local_reports": local},
        "thresholds": thresholds(),
    }
