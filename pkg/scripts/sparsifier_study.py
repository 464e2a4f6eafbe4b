#!/usr/bin/env python3
"""Sweep the halving-loop threshold on complete graphs and report quality.

Prints, per (eps, c_support) cell: rounds run, final support, measured
relative spectral error, and the worst weighted-degree deviation.
"""

import numpy as np

from walksparse.graph import Graph
from walksparse.sparsify import SparsifyOptions, spectral_sparsify, uc_sparsify


def complete_graph(n):
    return Graph(n, tuple((i, j, 1.0) for i in range(n) for j in range(i + 1, n)))


def main():
    print("spectral sparsifier, K_16 (m = 120)")
    print(f"{'eps':>6} {'c':>6} {'thr':>8} {'rounds':>6} {'supp':>5} "
          f"{'measured':>9} {'deg dev':>9}")
    g = complete_graph(16)
    for eps, c in [(0.5, 1024.0), (0.45, 1.5), (0.45, 1.0), (0.4, 1.0)]:
        try:
            res = spectral_sparsify(g, eps, SparsifyOptions(c_support=c))
        except Exception as exc:  # SubspaceExhausted at overly tight thresholds
            print(f"{eps:>6} {c:>6} {'-':>8} stopped: {exc}")
            continue
        dev = float(np.max(np.abs(res.graph.weighted_degrees() - g.weighted_degrees())))
        print(f"{eps:>6} {c:>6} {res.info.threshold:>8.1f} {res.info.rounds:>6} "
              f"{res.info.support_size:>5} {res.info.measured_eps:>9.4f} {dev:>9.2e}")

    print()
    print("unit-circle sparsifier, K_16")
    for eps, c in [(0.5, 1024.0), (0.45, 0.6)]:
        res = uc_sparsify(g, eps, SparsifyOptions(c_support=c))
        print(f"eps={eps} c={c}: rounds={res.info.rounds} supp={res.info.support_size} "
              f"L-err={res.measured['laplacian']:.4f} U-err={res.measured['unsigned']:.4f}")


if __name__ == "__main__":
    main()
