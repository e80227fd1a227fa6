"""Command-line front end.

Exit codes: 0 for a definitive result, 2 when the verdict is inconclusive,
1 on any error (including malformed arguments).
"""

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from .carleson import DEFAULT_R, DEFAULT_RADII, PullbackSampler, vanishing_scan
from .criteria import (VERDICT_INCONCLUSIVE, theorem8_bound, theorem12_verdict,
                       theorem15_verdict)
from .operators import DEFAULT_M_LIST, composition_matrix, essnorm_proxy, proxy_decay
from .symbols import SymbolSpecError, contact_scan, parse_symbol
from .verdict import INCONCLUSIVE
from .weights import WeightSpecError, parse_weight

COMMANDS = ("weight-check", "carleson", "essnorm", "criterion", "combo", "report")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    weight_spec: str = "std:0"
    symbol_specs: list = field(default_factory=list)
    scalars: list = field(default_factory=list)
    p: float = 2.0
    N: int = 256
    seed: int = 0
    output: str = None
    format: str = "json"
    M_list: list = field(default_factory=lambda: list(DEFAULT_M_LIST))
    radii: list = field(default_factory=lambda: list(DEFAULT_RADII))
    r: float = DEFAULT_R
    angular: int = 16
    samples: int = 1_000_000
    replay: str = None

    def to_dict(self):
        d = asdict(self)
        d.pop("output")
        d.pop("replay")
        return d


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _complex(tok):
    try:
        return complex(tok.replace(" ", ""))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad complex number {tok!r}") from None


def _int_list(tok):
    try:
        return [int(x) for x in tok.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer list {tok!r}") from None


def _float_list(tok):
    try:
        return [float(x) for x in tok.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad number list {tok!r}") from None


def build_parser():
    parser = _Parser(prog="complab", allow_abbrev=False,
                     description="Numerical checks for combinations of composition operators "
                                 "on weighted Bergman spaces.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, weight=True):
        if weight:
            sp.add_argument("--weight", default="std:0", help="std:<alpha> or table:<path>")
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        sp.add_argument("--output", help="write here instead of stdout")

    sp = sub.add_parser("weight-check", allow_abbrev=False, help="doubling certificate")
    common(sp)

    sp = sub.add_parser("carleson", allow_abbrev=False, help="pullback box-ratio scan")
    common(sp)
    sp.add_argument("--phi")
    sp.add_argument("--r", type=float, default=DEFAULT_R)
    sp.add_argument("--radii", type=_float_list, default=list(DEFAULT_RADII))
    sp.add_argument("--angular", type=int, default=16)
    sp.add_argument("--samples", type=int, default=1_000_000)
    sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("essnorm", allow_abbrev=False, help="essential-norm proxy")
    common(sp)
    sp.add_argument("--phi")
    sp.add_argument("--N", type=int, default=256)
    sp.add_argument("--M", type=_int_list, default=list(DEFAULT_M_LIST))

    sp = sub.add_parser("criterion", allow_abbrev=False,
                        help="two-symbol compactness verdict")
    common(sp)
    sp.add_argument("--phi")
    sp.add_argument("--psi")
    sp.add_argument("--lambda1", type=_complex, default=1.0)
    sp.add_argument("--lambda2", type=_complex, default=-1.0)
    sp.add_argument("--p", type=float, default=2.0)
    sp.add_argument("--N", type=int, default=256)

    sp = sub.add_parser("combo", allow_abbrev=False,
                        help="verdict for C_phi - sum lam_j C_phi_j and lower bounds")
    common(sp)
    sp.add_argument("--phi")
    sp.add_argument("--term", nargs=2, action="append", metavar=("LAMBDA", "SPEC"))
    sp.add_argument("--p", type=float, default=2.0)

    sp = sub.add_parser("report", allow_abbrev=False, help="re-run a saved JSON report")
    sp.add_argument("--replay", required=True, metavar="PATH")
    sp.add_argument("--output")
    return parser


def parse_config(argv):
    """Validated ``RunConfig`` from an argument list; raises ``UsageError``."""
    ns = build_parser().parse_args(argv)
    cfg = RunConfig(command=ns.command)
    if ns.command == "report":
        cfg.replay = ns.replay
        cfg.output = ns.output
        return cfg
    cfg.weight_spec = ns.weight
    cfg.format = ns.format
    cfg.output = ns.output
    # weight errors are reported before missing symbols
    _check_specs(cfg)
    needed = {"carleson": ["phi"], "essnorm": ["phi"], "criterion": ["phi", "psi"],
              "combo": ["phi", "term"]}.get(ns.command, [])
    missing = [f"--{k}" for k in needed if getattr(ns, k) is None]
    if missing:
        raise UsageError(f"complab {ns.command}: missing required argument(s): "
                         + ", ".join(missing))
    if ns.command in ("carleson", "essnorm"):
        cfg.symbol_specs = [ns.phi]
    if ns.command == "carleson":
        cfg.r, cfg.radii, cfg.angular = ns.r, ns.radii, ns.angular
        cfg.samples, cfg.seed = ns.samples, ns.seed
    if ns.command == "essnorm":
        cfg.N, cfg.M_list = ns.N, ns.M
    if ns.command == "criterion":
        cfg.symbol_specs = [ns.phi, ns.psi]
        cfg.scalars = [_pair(ns.lambda1), _pair(ns.lambda2)]
        cfg.p, cfg.N = ns.p, ns.N
    if ns.command == "combo":
        cfg.symbol_specs = [ns.phi] + [spec for _, spec in ns.term]
        try:
            cfg.scalars = [_pair(_complex(lam)) for lam, _ in ns.term]
        except argparse.ArgumentTypeError as exc:
            raise UsageError(f"complab combo: {exc}") from None
        cfg.p = ns.p
    _check_specs(cfg)
    return cfg


def _pair(z):
    z = complex(z)
    return [z.real, z.imag]


def _check_specs(cfg):
    try:
        parse_weight(cfg.weight_spec)
        for s in cfg.symbol_specs:
            parse_symbol(s)
    except (WeightSpecError, SymbolSpecError) as exc:
        raise UsageError(f"complab {cfg.command}: {exc}") from None
    except OSError as exc:
        raise UsageError(f"complab {cfg.command}: cannot read weight table: {exc}") from None


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    if isinstance(obj, complex):
        return [_clean(obj.real), _clean(obj.imag)]
    return obj


def _json(payload):
    return json.dumps(_clean(payload), sort_keys=True, indent=2) + "\n"


def _csv(header, rows):
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(header)
    for row in rows:
        wr.writerow([format(x, ".17g") if isinstance(x, float) else x for x in row])
    return buf.getvalue()


def _scalar(pair):
    return complex(pair[0], pair[1])


def execute(cfg):
    """Run a config; returns ``(payload dict, csv (header, rows) or None, verdict)``."""
    w = parse_weight(cfg.weight_spec)
    maps = [parse_symbol(s) for s in cfg.symbol_specs]
    for m in maps:
        if not m.validated:
            raise ValueError(f"{m.spec} is not a self-map of the disk: {m.validation.detail}")
    base = {"command": cfg.command, "config": cfg.to_dict()}

    if cfg.command == "weight-check":
        cert = w.certificate()
        d = cert.to_dict()
        d["in_D"] = cert.in_D
        rows = sorted(d.items())
        return dict(base, certificate=d), (["field", "value"], rows), None

    if cfg.command == "carleson":
        s = PullbackSampler(maps[0], w, sample_count=cfg.samples, rng_seed=cfg.seed)
        res = vanishing_scan(s, cfg.r, cfg.radii, cfg.angular)
        payload = dict(base, radii=res.radii, sups=res.sups, stderrs=res.stderrs,
                       flagged=res.flagged, verdict=res.verdict, thresholds=res.thresholds)
        return payload, (["radius", "sup_ratio", "stderr"], res.rows()), res.verdict

    if cfg.command == "essnorm":
        T = composition_matrix(maps[0], w, cfg.N)
        prox = essnorm_proxy(T, cfg.M_list)
        payload = dict(base, M=cfg.M_list, proxy=prox, decay=proxy_decay(prox),
                       input_width=T.extended.shape[1], column_residual=T.column_residual)
        return payload, (["M", "proxy"], list(zip(cfg.M_list, prox))), None

    if cfg.command == "criterion":
        v = theorem12_verdict(maps[0], maps[1], _scalar(cfg.scalars[0]),
                              _scalar(cfg.scalars[1]), w, cfg.p, N=cfg.N)
        rep = v["condition_ii"]["report"]
        rows = list(zip(rep["annuli"], rep["sups"]))
        return dict(base, **v), (["radius", "sup"], rows), v["verdict"]

    if cfg.command == "combo":
        phi, parts = maps[0], maps[1:]
        lams = [_scalar(x) for x in cfg.scalars]
        v = theorem15_verdict(phi, list(zip(lams, parts)), w)
        terms = [(1.0, phi)] + [(-l, f) for l, f in zip(lams, parts)]
        points = {}
        for f in maps:
            for zeta in contact_scan(f).points:
                key = round(math.atan2(zeta.imag, zeta.real), 12)
                points.setdefault(key, zeta)
        bounds = [{"zeta": _pair(points[k]), "bound": theorem8_bound(terms, points[k], w, cfg.p)}
                  for k in sorted(points)]
        rows = [(b["zeta"][0], b["zeta"][1], b["bound"]) for b in bounds]
        return dict(base, lower_bounds=bounds, **v), (["zeta_re", "zeta_im", "bound"], rows), \
            v["verdict"]
    raise UsageError(f"unknown command {cfg.command!r}")


def _config_from_dict(d):
    cfg = RunConfig(command=d["command"])
    for k, v in d.items():
        if not hasattr(cfg, k):
            raise UsageError(f"unknown key {k!r} in replayed config")
        setattr(cfg, k, v)
    _check_specs(cfg)
    return cfg


def _emit(text, path):
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _exit_code(verdict):
    return 2 if verdict in (INCONCLUSIVE, VERDICT_INCONCLUSIVE) else 0


def run_and_emit(cfg):
    """Execute and write the report; returns the process exit code."""
    try:
        if cfg.command == "report":
            with open(cfg.replay) as fh:
                saved = json.load(fh)
            new_cfg = _config_from_dict(saved["config"])
            payload, _, verdict = execute(new_cfg)
            same = saved.get("verdict") == payload.get("verdict")
            out = {"replayed": cfg.replay, "saved_verdict": saved.get("verdict"),
                   "verdict": payload.get("verdict"), "match": same}
            _emit(_json(out), cfg.output)
            return (_exit_code(verdict) if same else 1)
        payload, table, verdict = execute(cfg)
        if cfg.format == "csv":
            text = _csv(*table)
        else:
            text = _json(payload)
        _emit(text, cfg.output)
        return _exit_code(verdict)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except Exception as exc:  # module errors map to exit 1
        print(f"complab {cfg.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = parse_config(argv)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    return run_and_emit(cfg)


if __name__ == "__main__":
    sys.exit(main())
