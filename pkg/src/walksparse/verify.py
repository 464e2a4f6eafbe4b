"""Independent certification of sparsifier outputs.

Every check recomputes its quantities from scratch (pseudoinverse square
roots, kernel bases, quadratic forms) so a report never trusts anything the
construction pipeline produced along the way.  Reports are pure functions
of their inputs and serialize to JSON with a stable key order.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

import numpy as np

from . import graph as graph_mod
from . import linalg
from .errors import InvalidInput

DEGREE_TOL = 1e-6
KERNEL_RTOL = 1e-8


@dataclass(frozen=True)
class ApproxReport:
    """Outcome of one approximation check.

    passed requires the measured error to meet the target, the kernel
    inclusions of the matrix-approximation definition to hold, and the
    weighted degrees to agree within 1e-6.
    """

    kind: str
    target: float
    measured_eps: float
    kernel_ok: bool
    degree_max_dev: float
    support_size: int

    @property
    def passed(self):
        return (
            self.measured_eps <= self.target
            and self.kernel_ok
            and self.degree_max_dev <= DEGREE_TOL
        )

    def to_dict(self):
        return {
            "kind": self.kind,
            "target": self.target,
            "measured_eps": self.measured_eps,
            "kernel_ok": self.kernel_ok,
            "degree_max_dev": self.degree_max_dev,
            "support_size": self.support_size,
            "pass": self.passed,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)


def _kernel_inclusion(err_mat, diff, transpose):
    """ker(err_mat) inside ker(diff) (or of diff^T), tested on an explicit
    orthonormal kernel basis with residual <= 1e-8 * max(1, ||diff||)."""
    basis = linalg.kernel_basis(err_mat)
    if basis.shape[1] == 0:
        return True
    mat = diff.T if transpose else diff
    scale = max(1.0, linalg.spectral_norm(diff))
    resid = np.linalg.norm(mat @ basis, axis=0)
    return bool(np.all(resid <= KERNEL_RTOL * scale))


def check_matrix_approx(a, a_tilde, e_mat, f_mat, target, kind="standard", support_size=0):
    """Matrix-approximation check: ||E^{+/2}(A - At)F^{+/2}|| and kernels.

    e_mat and f_mat must be PSD error matrices; the kernel conditions are
    ker(E) inside ker((A - At)^T) and ker(F) inside ker(A - At).
    """
    a = np.asarray(a, dtype=float)
    a_tilde = np.asarray(a_tilde, dtype=float)
    diff = a - a_tilde
    eh = linalg.matrix_function(e_mat, "pinv_sqrt")
    fh = linalg.matrix_function(f_mat, "pinv_sqrt")
    measured = linalg.spectral_norm(eh @ diff @ fh)
    kernel_ok = _kernel_inclusion(e_mat, diff, transpose=True) and _kernel_inclusion(
        f_mat, diff, transpose=False
    )
    return ApproxReport(
        kind=kind,
        target=float(target),
        measured_eps=measured,
        kernel_ok=kernel_ok,
        degree_max_dev=0.0,
        support_size=int(support_size),
    )


def _degree_deviation(g, g_tilde):
    if g.directed:
        return float(
            max(
                np.max(np.abs(g.out_degrees() - g_tilde.out_degrees()), initial=0.0),
                np.max(np.abs(g.in_degrees() - g_tilde.in_degrees()), initial=0.0),
            )
        )
    return float(
        np.max(np.abs(g.weighted_degrees() - g_tilde.weighted_degrees()), initial=0.0)
    )


def _with_graph_fields(report, g, g_tilde):
    return ApproxReport(
        kind=report.kind,
        target=report.target,
        measured_eps=report.measured_eps,
        kernel_ok=report.kernel_ok,
        degree_max_dev=_degree_deviation(g, g_tilde),
        support_size=g_tilde.m,
    )


def check_spectral(g, g_tilde, target):
    """Relative spectral error ||L^{+/2}(L - L_hat)L^{+/2}|| of a reweighted
    subgraph, plus degree preservation."""
    lap = g.laplacian()
    rep = check_matrix_approx(
        lap, g_tilde.laplacian(), lap, lap, target, kind="spectral", support_size=g_tilde.m
    )
    return _with_graph_fields(rep, g, g_tilde)


def check_uc_undirected(g, g_tilde, target):
    """Unit-circle check: both the Laplacian and unsigned-Laplacian relative
    errors, the all-ones kernel residual, and for bipartite graphs the
    signed-partition kernel residual."""
    if g.directed or g_tilde.directed:
        raise InvalidInput("unit-circle check expects undirected graphs")
    lap, uns = g.laplacian(), g.unsigned_laplacian()
    lph = linalg.matrix_function(lap, "pinv_sqrt")
    uph = linalg.matrix_function(uns, "pinv_sqrt")
    dl = lap - g_tilde.laplacian()
    du = uns - g_tilde.unsigned_laplacian()
    measured = max(
        linalg.spectral_norm(lph @ dl @ lph), linalg.spectral_norm(uph @ du @ uph)
    )
    diff_adj = g.adjacency() - g_tilde.adjacency()
    scale = max(1.0, linalg.spectral_norm(diff_adj))
    kernel_ok = bool(
        np.linalg.norm(diff_adj @ np.ones(g.n)) <= KERNEL_RTOL * scale * np.sqrt(g.n)
    )
    part = g.bipartition()
    if part is not None:
        sign = np.zeros(g.n)
        sign[part[0]] = 1.0
        sign[part[1]] = -1.0
        kernel_ok = kernel_ok and bool(
            np.linalg.norm(diff_adj @ sign) <= KERNEL_RTOL * scale * np.sqrt(g.n)
        )
    return ApproxReport(
        kind="uc",
        target=float(target),
        measured_eps=measured,
        kernel_ok=kernel_ok,
        degree_max_dev=_degree_deviation(g, g_tilde),
        support_size=g_tilde.m,
    )


def check_sv(g, g_tilde, target):
    """Singular-value approximation check with error matrices
    E = D_out - A D_in^+ A^T and F = D_in - A^T D_out^+ A of the input."""
    e_mat, f_mat = graph_mod.sv_error_matrices(g)
    rep = check_matrix_approx(
        g.adjacency(),
        g_tilde.adjacency(),
        e_mat,
        f_mat,
        target,
        kind="sv",
        support_size=g_tilde.m,
    )
    return _with_graph_fields(rep, g, g_tilde)


def check_sketch(g, g_tilde, vectors, target):
    """Worst relative quadratic-form deviation over the constraint vectors."""
    lap = g.laplacian()
    lap_t = g_tilde.laplacian()
    vectors = np.asarray(vectors, dtype=float)
    worst = 0.0
    for z in vectors:
        denom = float(z @ lap @ z)
        num = float(z @ lap_t @ z)
        if denom <= 1e-12:
            continue
        worst = max(worst, abs(num / denom - 1.0))
    return ApproxReport(
        kind="sketch",
        target=float(target),
        measured_eps=worst,
        kernel_ok=True,
        degree_max_dev=_degree_deviation(g, g_tilde),
        support_size=g_tilde.m,
    )


def effective_resistance_report(g, g_tilde):
    """Worst |R_tilde(i,j)/R(i,j) - 1| over all connected pairs.

    Pairs are evaluated per connected component of the input; pairs the
    reweighted graph disconnects give an infinite ratio.
    """
    worst = 0.0
    for comp in g.connected_components():
        if len(comp) < 2:
            continue
        sub, ids = g.induced_on(comp)
        sub_t, _ = g_tilde.induced_on(comp)
        if not sub_t.is_connected() or sub_t.m == 0:
            return float("inf")
        ldag = linalg.matrix_function(sub.laplacian(), "pinv")
        ldag_t = linalg.matrix_function(sub_t.laplacian(), "pinv")
        dl = np.diag(ldag)
        dlt = np.diag(ldag_t)
        r = dl[:, None] + dl[None, :] - 2 * ldag
        rt = dlt[:, None] + dlt[None, :] - 2 * ldag_t
        iu = np.triu_indices(len(comp), k=1)
        ratios = np.abs(rt[iu] / r[iu] - 1.0)
        worst = max(worst, float(np.max(ratios, initial=0.0)))
    return worst


def check_resistance(g, g_tilde, target):
    worst = effective_resistance_report(g, g_tilde)
    return ApproxReport(
        kind="resistance",
        target=float(target),
        measured_eps=worst,
        kernel_ok=True,
        degree_max_dev=_degree_deviation(g, g_tilde),
        support_size=g_tilde.m,
    )


def brute_force_min_discrepancy(mats):
    """Exhaustive minimum of ||sum x(i) A_i||_op over full sign colorings.

    Fixes x(0) = +1 (global sign symmetry) and enumerates the remaining
    coordinates lexicographically with +1 before -1; the first minimizer
    encountered is returned, which makes ties deterministic.
    """
    mats = [linalg.sym(np.asarray(a, dtype=float)) for a in mats]
    m = len(mats)
    if m == 0:
        raise InvalidInput("empty family")
    if m > 20:
        raise InvalidInput("brute force is limited to m <= 20")
    stack = np.stack(mats)
    best_val = np.inf
    best_x = None
    for bits in itertools.product((1.0, -1.0), repeat=m - 1):
        x = np.concatenate(([1.0], bits))
        val = linalg.operator_norm(np.einsum("i,ijk->jk", x, stack))
        if val < best_val - 1e-15:
            best_val = val
            best_x = x
    return best_x, float(best_val)
