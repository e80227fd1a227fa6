"""Compare criterion verdicts with the trend of the essential-norm proxy.

For each pair the difference C_phi - C_psi is judged by the boundary
criterion and by how fast the truncated-matrix proxy decays from M = 16
to M = 128.
"""

from complab.criteria import moorhouse_quantity, theorem12_verdict
from complab.operators import combo_matrix, essnorm_proxy, proxy_decay
from complab.symbols import preset
from complab.weights import std_weight

N = 256
PAIRS = [("halfmap", "zhalfmap"), ("halfmap", "tangentmap"), ("halfmap", "quarticmap")]


def main():
    w = std_weight(0)
    phi = preset("halfmap")
    print(f"{'pair':28s} {'verdict':12s} {'ring sup':>9s} {'radial':>9s} {'decay':>7s}")
    for a, b in PAIRS:
        psi = preset(b)
        rep = theorem12_verdict(phi, psi, 1, -1, w, 2, N=N)
        sups = rep["condition_ii"]["report"]["sups"]
        radial = float(moorhouse_quantity(phi, psi, 1 - 2.0 ** -14))
        decay = proxy_decay(essnorm_proxy(combo_matrix([(1, phi), (-1, psi)], w, N)))
        print(f"{a + ' - ' + b:28s} {rep['verdict']:12s} {sups[-1]:9.4f} {radial:9.2e} {decay:7.3f}")


if __name__ == "__main__":
    main()
