"""Graphical spectral sketches and effective-resistance sparsifiers.

A sketch preserves the Laplacian quadratic form z^T L z for a fixed set of
constraint vectors.  Each halving round rewrites the sketch constraint for
a degree-preserving update x as a plain vector-discrepancy constraint

    sum_e x(e) s(e) <b_e, z>^2  =  -2 sum_{uv} x(u,v) s(u,v) zbar(u) zbar(v),

where zbar is z recentered so its degree-weighted mean vanishes, freezes
the high-weight edges and the edges at low support-degree vertices (the
freeze sets keep ||a_z|| <= 100 (n/m) zbar^T D zbar), and runs the
multiplicative-weights walk on the remaining coordinates.

The effective-resistance sparsifier runs the same loop with the constraint
set {L^+ b_ij} while simultaneously steering the matrix-discrepancy side of
the walk on {L^{+/2} b_e b_e^T L^{+/2}}, so the output is both a spectral
sparsifier and a sketch with respect to the resistance vectors.  General
graphs are handled piece by piece through the expander decomposition.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import graph as graph_mod
from . import linalg, verify
from .errors import InvalidInput, SubspaceExhausted, WalksparseError
from .matrix_walk import (
    MatrixFamily,
    WalkLog,
    WalkOptions,
    _MatrixSide,
    _VectorSide,
    _walk_loop,
)
from .vector_walk import default_lambda0, prepare_constraints

NORM_CHAIN_CONST = 100.0
IDENTITY_RTOL = 1e-8


@dataclass
class SketchOptions:
    """Pipeline knobs shared by sketches and resistance sparsifiers."""

    phi_target: float | None = None
    c_resist: float = 1.0
    c_disc: float = 12.0
    adaptive_steps: bool = True
    freeze_tol: float = 1e-9
    combined_cut_fraction: float = 1.0 / 6.0


@dataclass
class RoundDiagnostics:
    support: int = 0
    frozen_sets: tuple = (0, 0, 0)
    norm_chain_margin: float = 0.0
    identity_residual: float = 0.0
    walk_iterations: int = 0
    walk_discrepancy: float = 0.0
    degree_dev: float = 0.0


@dataclass
class SketchResult:
    graph: graph_mod.Graph
    rounds: int
    worst_ratio: float
    threshold: float
    diagnostics: list = field(default_factory=list)
    stopped_early: str | None = None
    pieces: int = 1


def shift_center(z, g):
    """Recenter z so its degree-weighted entries sum to zero."""
    d = g.weighted_degrees()
    total = float(np.sum(d))
    if total <= 0:
        raise InvalidInput("graph has no edges")
    z = np.asarray(z, dtype=float)
    c = float(d @ z) / total
    return z - c


def freeze_sets(g, s):
    """Classify the support into (E0 high-weight, E1 low-degree, Es rest).

    E0 holds support edges whose weight exceeds 10 d(v)/d_s(v) at either
    endpoint; E1 holds the remaining support edges incident to a vertex of
    support-degree at most m/(10 n); Es is everything else.  The three
    index arrays partition supp(s), and |E0| <= m/5, |E1| <= m/10.
    """
    s = np.asarray(getattr(s, "s", s), dtype=float)
    if s.shape != (g.m,):
        raise InvalidInput("reweighting length mismatch")
    u, v, _ = g.edge_arrays()
    supp = s > 0
    d = g.weighted_degrees()
    d_s = np.zeros(g.n)
    np.add.at(d_s, u[supp], 1.0)
    np.add.at(d_s, v[supp], 1.0)
    safe = np.where(d_s > 0, d_s, 1.0)
    cap = 10.0 * d / safe
    e0 = supp & ((s > cap[u]) | (s > cap[v]))
    n_eff = max(1, len(g.non_isolated()))
    low = d_s <= g.m / (10.0 * n_eff)
    e1 = supp & ~e0 & (low[u] | low[v])
    es = supp & ~e0 & ~e1
    return np.flatnonzero(e0), np.flatnonzero(e1), np.flatnonzero(es)


def _require_sketchable(g):
    if g.directed:
        raise InvalidInput("sketches expect undirected graphs")
    if any(w != 1.0 for _, _, w in g.edges):
        raise InvalidInput("sketches expect unweighted input graphs")


def _degree_and_pin_rows(g, s, support, pinned):
    """Static constraint rows for one round, in support coordinates:
    weighted-degree preservation plus pinned (frozen-set) coordinates."""
    m_r = len(support)
    u, v, w = g.edge_arrays()
    rows = np.zeros((g.n, m_r))
    for pos, e in enumerate(support):
        rows[u[e], pos] = s[e] * w[e]
        rows[v[e], pos] = s[e] * w[e]
    pin_pos = np.flatnonzero(np.isin(support, pinned))
    pins = np.zeros((len(pin_pos), m_r))
    pins[np.arange(len(pin_pos)), pin_pos] = 1.0
    return np.vstack([rows, pins])


def _constraint_matrix(zbar, g, s, support, es):
    """Rows a_z over the support coordinates: s(e) zbar(u) zbar(v) on Es."""
    u, v, _ = g.edge_arrays()
    mask = np.isin(support, es)
    a = zbar[:, u[support]] * zbar[:, v[support]] * s[support][None, :]
    a[:, ~mask] = 0.0
    return a


def _check_norm_chain(a_rows, zbar_d, n_eff, m_r):
    """||a_z|| <= 100 (n/m) zbar^T D zbar, a consequence of the freeze sets."""
    norms = np.linalg.norm(a_rows, axis=1)
    bound = NORM_CHAIN_CONST * (n_eff / m_r) * zbar_d
    slack = bound - norms
    bad = slack < -1e-9 * np.maximum(1.0, bound)
    if np.any(bad):
        raise WalksparseError("freeze-set norm bound violated")
    return float(np.min(slack, initial=np.inf))


def _check_courant_fischer(g, zbar, zbar_d, lam2):
    """zbar^T L zbar >= lambda_2 zbar^T D zbar for degree-orthogonal zbar.

    This is the variational characterization of lambda_2 of the normalized
    Laplacian; it ties the recentred quadratic forms used by the norm chain
    back to the sketch denominators.
    """
    lap = g.laplacian()
    z_lz = np.einsum("kn,nm,km->k", zbar, lap, zbar)
    if np.any(z_lz < lam2 * zbar_d - 1e-8):
        raise WalksparseError("variational lower bound on the quadratic form failed")


def _check_identity(g, kvecs, a_rows, x_sub, s, support, tol_scale):
    """Per-round rewrite check: sum_e x s <b_e, z>^2 == -2 <a_z, x>."""
    u, v, _ = g.edge_arrays()
    du = kvecs[:, u[support]] - kvecs[:, v[support]]
    lhs = (du**2) @ (x_sub * s[support])
    rhs = -2.0 * (a_rows @ x_sub)
    resid = np.abs(lhs - rhs)
    scale = np.maximum(1.0, tol_scale)
    worst = float(np.max(resid / scale, initial=0.0))
    if worst > IDENTITY_RTOL:
        raise WalksparseError(f"degree-preserving rewrite failed: residual {worst:.3e}")
    return worst


def _sign_flip(x):
    if np.count_nonzero(x == 1.0) > np.count_nonzero(x == -1.0):
        return -x
    return x


def _walk_discrepancy(a_rows, x_sub):
    norms = np.linalg.norm(a_rows, axis=1)
    keep = norms > 1e-12
    if not np.any(keep):
        return 0.0
    return float(np.max(np.abs(a_rows[keep] @ x_sub) / norms[keep]))


def _check_degrees_preserved(g, s, tol=1e-7):
    """Weighted degrees under the reweighting match the input degrees."""
    u, v, w = g.edge_arrays()
    d = g.weighted_degrees()
    ds = np.zeros(g.n)
    np.add.at(ds, u, s * w)
    np.add.at(ds, v, s * w)
    dev = float(np.max(np.abs(ds - d), initial=0.0))
    if dev > tol * max(1.0, float(np.max(d, initial=1.0))):
        raise WalksparseError(f"degree preservation failed: deviation {dev:.3e}")
    return dev


def _worst_ratio(g, out, kvecs):
    lap = g.laplacian()
    lap_t = out.laplacian()
    worst = 0.0
    for z in kvecs:
        denom = float(z @ lap @ z)
        if denom <= 1e-12:
            continue
        worst = max(worst, abs(float(z @ lap_t @ z) / denom - 1.0))
    return worst


def sketch_expander(g, kvecs, eps, lam, options=None):
    """Spectral sketch of a connected expander piece.

    Runs the halving loop with threshold n f / eps where
    f = max(1, sqrt(log(|K|/m))) / lam, assembling the recentered constraint
    vectors each round and walking them with the multiplicative-weights
    subspace intersected with the degree and freeze subspaces.
    """
    _require_sketchable(g)
    options = options or SketchOptions()
    kvecs = np.asarray(kvecs, dtype=float)
    if kvecs.ndim != 2 or kvecs.shape[1] != g.n:
        raise InvalidInput("constraint vectors must be rows of length n")
    n_eff = len(g.non_isolated())
    if kvecs.shape[0] < n_eff:
        raise InvalidInput(f"need at least n={n_eff} constraint vectors")
    lam2 = graph_mod.lambda2(g)
    if lam > lam2 + 1e-9:
        raise InvalidInput(f"claimed expansion {lam} exceeds lambda_2 = {lam2:.6f}")
    m = g.m
    if m == 0:
        return SketchResult(g, 0, 0.0, 0.0)
    k = kvecs.shape[0]
    f_factor = max(1.0, np.sqrt(max(0.0, np.log(k / m)))) / lam
    threshold = n_eff * f_factor / eps

    d = g.weighted_degrees()
    zbar = kvecs - (kvecs @ d / np.sum(d))[:, None]
    zbar_d = (zbar**2) @ d
    _check_courant_fischer(g, zbar, zbar_d, lam2)

    s = np.ones(m)
    result = SketchResult(g, 0, 0.0, threshold)
    while np.count_nonzero(s) > threshold:
        support = np.flatnonzero(s)
        m_r = len(support)
        e0, e1, es = freeze_sets(g, s)
        if len(es) < int(np.ceil(m_r / 4.0)):
            result.stopped_early = "freeze sets leave too few movable edges"
            break
        a_rows = _constraint_matrix(zbar, g, s, support, es)
        diag = RoundDiagnostics(support=m_r, frozen_sets=(len(e0), len(e1), len(es)))
        diag.norm_chain_margin = _check_norm_chain(a_rows, zbar_d, n_eff, m_r)
        extra_rows = _degree_and_pin_rows(g, s, support, np.concatenate([e0, e1]))

        unit = prepare_constraints(a_rows, m_r)
        lambda0 = default_lambda0(unit.shape[0], m_r)
        side = _VectorSide(
            unit,
            lambda0,
            heavy_count=lambda mt: int(np.ceil(mt / 10.0)),
            cut_count=lambda mt: int(np.ceil(mt / 10.0)),
        )
        walk_opts = WalkOptions(
            adaptive_steps=options.adaptive_steps, freeze_tol=options.freeze_tol
        )
        wlog = WalkLog()
        try:
            x_sub = _walk_loop(
                m_r, [side], extra_rows, 1.0 / (2.0 * lambda0), walk_opts, wlog
            )
        except SubspaceExhausted as exc:
            result.stopped_early = f"walk subspace exhausted: {exc}"
            break
        diag.walk_iterations = wlog.iterations
        diag.identity_residual = _check_identity(
            g, kvecs, a_rows, x_sub, s, support, zbar_d
        )
        diag.walk_discrepancy = _walk_discrepancy(a_rows, x_sub)
        x_sub = _sign_flip(x_sub)
        s[support] = s[support] * (1.0 + x_sub)
        diag.degree_dev = _check_degrees_preserved(g, s)
        result.rounds += 1
        result.diagnostics.append(diag)

    result.graph = g.reweighted(s)
    result.worst_ratio = _worst_ratio(g, result.graph, kvecs)
    return result


def sketch(g, kvecs, eps, options=None):
    """Spectral sketch of an arbitrary unweighted graph.

    Decomposes into expander pieces, sketches each piece against the same
    constraint set with the piece's measured expansion, and unions the
    reweighted pieces (degree preservation survives the union).
    """
    _require_sketchable(g)
    options = options or SketchOptions()
    kvecs = np.asarray(kvecs, dtype=float)
    phi = options.phi_target
    if phi is None:
        phi = graph_mod.default_phi_target(g.n)
    pieces = graph_mod.expander_decompose(g, phi)
    edges = []
    rounds = 0
    diagnostics = []
    stopped = None
    for piece in pieces:
        lam = graph_mod.lambda2(piece)
        res = sketch_expander(piece, kvecs, eps, lam, options)
        rounds += res.rounds
        diagnostics.extend(res.diagnostics)
        stopped = stopped or res.stopped_early
        edges.extend(res.graph.edges)
    out = graph_mod.Graph(g.n, tuple(edges), directed=False)
    worst = _worst_ratio(g, out, kvecs)
    result = SketchResult(out, rounds, worst, 0.0, diagnostics, stopped, len(pieces))
    return result


@dataclass
class ResistanceResult:
    graph: graph_mod.Graph
    rounds: int
    worst_resistance_ratio: float
    spectral_eps: float
    sketch_eps: float
    pieces: int
    diagnostics: list = field(default_factory=list)
    stopped_early: str | None = None


def resistance_pairs(g):
    """Constraint vectors L^+ b_ij for all vertex pairs i < j."""
    ldag = linalg.matrix_function(g.laplacian(), "pinv")
    iu = np.triu_indices(g.n, k=1)
    vecs = ldag[:, iu[0]] - ldag[:, iu[1]]
    return vecs.T


def _combined_round(piece, lph, kvecs, zbar, zbar_d, s, options, n_eff):
    """One halving round of the combined matrix+vector walk on a piece.

    The matrix side steers {(1/2) s(e) L^{+/2} b_e b_e^T L^{+/2}} with the
    lowest 5/6 of the eigenspace; the vector side steers the recentered
    resistance constraints with 1/6 budgets for the heavy and top-eigenspace
    cuts, so the intersection keeps positive dimension alongside the degree
    and freeze rows.
    """
    m = piece.m
    support = np.flatnonzero(s)
    m_r = len(support)
    e0, e1, es = freeze_sets(piece, s)
    if len(es) < int(np.ceil(m_r / 4.0)):
        raise SubspaceExhausted("freeze sets leave too few movable edges")
    a_rows = _constraint_matrix(zbar, piece, s, support, es)
    diag = RoundDiagnostics(support=m_r, frozen_sets=(len(e0), len(e1), len(es)))
    diag.norm_chain_margin = _check_norm_chain(a_rows, zbar_d, n_eff, m_r)
    extra_rows = _degree_and_pin_rows(piece, s, support, np.concatenate([e0, e1]))

    vectors = lph @ piece.incidence_signed()[:, support]
    family = MatrixFamily.from_rank_one(vectors, 0.5 * s[support])
    top = float(linalg.eigvalsh(family.blocks[0].aggregate(np.ones(m_r)))[-1])
    if top > 1.0 + 1e-6:
        raise WalksparseError(f"loop invariant failed: half-aggregate norm {top:.4f} > 1")

    eta = 0.25 * np.sqrt(m_r)
    unit = prepare_constraints(a_rows, m_r)
    lambda0 = default_lambda0(unit.shape[0], m_r)
    cut = options.combined_cut_fraction
    sides = [
        _MatrixSide(family, eta, keep_count=lambda mt: mt - int(np.floor(cut * mt))),
        _VectorSide(
            unit,
            lambda0,
            heavy_count=lambda mt: int(np.ceil(cut * mt)),
            cut_count=lambda mt: int(np.ceil(cut * mt)),
        ),
    ]
    wlog = WalkLog()
    walk_opts = WalkOptions(
        adaptive_steps=options.adaptive_steps, freeze_tol=options.freeze_tol
    )
    base_cap = min(1.0 / (2.0 * eta), 1.0 / (2.0 * lambda0))
    x_sub = _walk_loop(m_r, sides, extra_rows, base_cap, walk_opts, wlog)
    diag.walk_iterations = wlog.iterations
    diag.identity_residual = _check_identity(
        piece, kvecs, a_rows, x_sub, s, support, zbar_d
    )
    diag.walk_discrepancy = _walk_discrepancy(a_rows, x_sub)
    x_sub = _sign_flip(x_sub)
    s_new = s.copy()
    s_new[support] = s[support] * (1.0 + x_sub)
    diag.degree_dev = _check_degrees_preserved(piece, s_new)
    return s_new, diag


def resistance_sparsify(g, eps, options=None):
    """Effective-resistance sparsifier of an unweighted undirected graph.

    Per expander piece, a combined walk keeps the reweighting simultaneously
    a spectral sparsifier and a sketch with respect to {L^+ b_ij}; the
    halving threshold is c n sqrt(log n) / (lambda eps).
    """
    _require_sketchable(g)
    options = options or SketchOptions()
    phi = options.phi_target
    if phi is None:
        phi = graph_mod.default_phi_target(g.n)
    kvecs = resistance_pairs(g)
    pieces = graph_mod.expander_decompose(g, phi)
    edges = []
    rounds = 0
    diagnostics = []
    stopped = None
    for piece in pieces:
        n_eff = max(1, len(piece.non_isolated()))
        lam = graph_mod.lambda2(piece)
        threshold = (
            options.c_resist
            * n_eff
            * np.sqrt(np.log(max(n_eff, 2)))
            / (max(lam, 1e-12) * eps)
        )
        d = piece.weighted_degrees()
        total = float(np.sum(d))
        zbar = kvecs - (kvecs @ d / total)[:, None]
        zbar_d = (zbar**2) @ d
        _check_courant_fischer(piece, zbar, zbar_d, lam)
        lph = linalg.matrix_function(piece.laplacian(), "pinv_sqrt")
        s = np.ones(piece.m)
        while np.count_nonzero(s) > threshold:
            try:
                s, diag = _combined_round(
                    piece, lph, kvecs, zbar, zbar_d, s, options, n_eff
                )
            except SubspaceExhausted as exc:
                stopped = f"piece walk stopped: {exc}"
                break
            rounds += 1
            diagnostics.append(diag)
        edges.extend(piece.reweighted(s).edges)
    out = graph_mod.Graph(g.n, tuple(edges), directed=False)
    spectral_eps = verify.check_spectral(g, out, target=np.inf).measured_eps
    sketch_eps = _worst_ratio(g, out, kvecs)
    worst = verify.effective_resistance_report(g, out)
    return ResistanceResult(
        out, rounds, worst, spectral_eps, sketch_eps, len(pieces), diagnostics, stopped
    )
