"""Doubling certificates for standard weights and a tabulated weight."""

import tempfile
from pathlib import Path

import numpy as np

from complab.weights import parse_weight, std_weight


def show(name, w):
    c = w.certificate()
    print(f"{name:12s} C_hat={c.C_hat:.6f} C_check={c.C_check:.6f} "
          f"alpha={c.alpha:.4f} beta={c.beta:.4f} in_D={c.in_D}")


def main():
    for alpha in (0, 1, 2, 5):
        show(f"std:{alpha}", std_weight(alpha))
    # a tabulated copy of (1 - r)**2 behaves like std:2 at the boundary
    r = 1 - np.geomspace(1, 1e-6, 60)
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "w.csv"
        rows = "\n".join(f"{x:.17g},{(1 - x) ** 2:.17g}" for x in r)
        path.write_text("r,omega\n" + rows + "\n")
        show("table", parse_weight(f"table:{path}"))


if __name__ == "__main__":
    main()
