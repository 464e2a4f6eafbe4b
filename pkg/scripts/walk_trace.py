#!/usr/bin/env python3
"""Trace one matrix partial-coloring walk and print per-iteration invariants.

Usage: python scripts/walk_trace.py [m] [n] [seed]
"""

import sys
import time

import numpy as np
import scipy.linalg

from walksparse.matrix_walk import MatrixFamily, WalkLog, WalkOptions, partial_color


def projection_vectors(n, m, seed):
    rng = np.random.default_rng(seed)
    b = rng.normal(size=(n, m))
    return np.linalg.inv(scipy.linalg.sqrtm(b @ b.T).real) @ b


def main():
    m = int(sys.argv[1]) if len(sys.argv) > 1 else 64
    n = int(sys.argv[2]) if len(sys.argv) > 2 else 4
    seed = int(sys.argv[3]) if len(sys.argv) > 3 else 0
    fam = MatrixFamily.from_rank_one(projection_vectors(n, m, seed))
    bound = 16.0 * np.sqrt(2.0 * n / m)
    print(f"rank-one family: m={m}, n={n}, seed={seed}, norm budget {bound:.3f}")

    for adaptive in (False, True):
        log = WalkLog()
        t0 = time.time()
        x = partial_color(fam, options=WalkOptions(adaptive_steps=adaptive), log=log)
        dt = time.time() - t0
        frozen = int(np.count_nonzero(np.abs(x) == 1.0))
        print(f"adaptive={adaptive}: {dt:.2f}s, {log.iterations} iterations")
        print(f"  frozen {frozen}/{m}, ||A(x)|| = {fam.aggregate_norm(x):.6f}")
        print(f"  max linear term {max(abs(v) for v in log.linear_term):.2e}, "
              f"max step admissibility {max(log.step_norm):.4f} (cap 0.5)")
        worst_quad = max(
            q - 9.0 * np.sqrt(2.0 * n) / mt**2 for q, mt in zip(log.quad_term, log.m_t)
        )
        print(f"  worst quadratic-term slack {worst_quad:.2e} (must be <= 0)")


if __name__ == "__main__":
    main()
