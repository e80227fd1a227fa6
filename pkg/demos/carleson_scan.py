"""Annulus scans of pullback box ratios for a few symbols."""

from complab.carleson import PullbackSampler, vanishing_scan
from complab.symbols import parse_symbol
from complab.weights import std_weight


def main():
    w = std_weight(1)
    for spec in ("id", "dilate:0.5", "halfmap", "tangentmap"):
        res = vanishing_scan(PullbackSampler(parse_symbol(spec), w))
        sups = " ".join(f"{s:.3g}" for s in res.sups)
        print(f"{spec:12s} {res.verdict:12s} {sups}")


if __name__ == "__main__":
    main()
