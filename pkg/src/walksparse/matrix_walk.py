"""Deterministic discrepancy walk for matrix partial coloring.

Given symmetric matrices A_1..A_m with sum_i |A_i| <= I and a constraint
subspace H of dimension >= (4/5) m, `partial_color` returns x in [-1,1]^m
with at least m/4 coordinates at +-1, x in H, and

    || sum_i x(i) A_i ||_op <= 16 sqrt(2 n / m).

The operator norm is tracked through the block doubling diag(A_i, -A_i),
whose top eigenvalue equals the norm of the original aggregate; the walk
never materializes the doubled matrices, it works with the +- spectra of
the original blocks.

Families are direct sums of blocks, each either a dense stack of symmetric
matrices or a rank-one factorization A_i = w_i g_i g_i^T.  The rank-one
path evaluates the step quadratic-form matrix

    N(i,j) = tr(M^{1/2} A_i M^{1/2} A_j M^{1/2})

through Hadamard products of small Gram matrices, which keeps each walk
iteration at O(n m^2) instead of O(m^2 n^2) and is what makes the graph
pipelines run at desk scale.

Each iteration restricts the update direction to the intersection of
  - the active coordinates (support of not-yet-frozen entries),
  - the orthogonal complement of the current point,
  - the kernel of the linear potential term i -> tr(M A_i),
  - the span of the lowest third of the eigenvectors of N,
  - the caller's subspace H,
and advances with step min(cap, distance to the [-1,1]^m boundary).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import linalg
from .errors import InvalidInput, StepTooLarge, SubspaceExhausted
from .linalg import Subspace
from .potential import solve_normalizer_from_eigenvalues

_ROW_DROP_TOL = 1e-12


# ---------------------------------------------------------------------------
# matrix families


class Rank1Block:
    """Block whose members are w_i g_i g_i^T with w_i >= 0."""

    def __init__(self, vectors, weights=None):
        vectors = np.asarray(vectors, dtype=float)
        if vectors.ndim != 2:
            raise InvalidInput("rank-one block expects an (n, m) array of columns")
        self.vectors = vectors
        m = vectors.shape[1]
        if weights is None:
            weights = np.ones(m)
        self.weights = np.asarray(weights, dtype=float)
        if self.weights.shape != (m,):
            raise InvalidInput("weights length does not match the number of members")
        if not np.all(np.isfinite(vectors)) or not np.all(np.isfinite(self.weights)):
            raise InvalidInput("non-finite family data")
        if np.any(self.weights < 0):
            raise InvalidInput("rank-one block weights must be nonnegative")

    @property
    def dim(self):
        return self.vectors.shape[0]

    @property
    def size(self):
        return self.vectors.shape[1]

    def member(self, i):
        g = self.vectors[:, i]
        return self.weights[i] * np.outer(g, g)

    def aggregate(self, coeffs):
        gw = self.vectors * (np.asarray(coeffs) * self.weights)
        return linalg.sym(gw @ self.vectors.T)

    def abs_aggregate(self):
        # members are PSD, so |A_i| = A_i
        return self.aggregate(np.ones(self.size))

    def scaled(self, coeffs):
        return Rank1Block(self.vectors, self.weights * np.asarray(coeffs, dtype=float))

    def restricted(self, idx):
        return Rank1Block(self.vectors[:, idx], self.weights[idx])


class DenseBlock:
    """Block holding an explicit stack of symmetric matrices."""

    def __init__(self, mats):
        mats = np.asarray(mats, dtype=float)
        if mats.ndim != 3 or mats.shape[1] != mats.shape[2]:
            raise InvalidInput("dense block expects an (m, n, n) stack")
        if not np.all(np.isfinite(mats)):
            raise InvalidInput("non-finite family data")
        self.mats = 0.5 * (mats + np.swapaxes(mats, 1, 2))

    @property
    def dim(self):
        return self.mats.shape[1]

    @property
    def size(self):
        return self.mats.shape[0]

    def member(self, i):
        return self.mats[i]

    def aggregate(self, coeffs):
        return linalg.sym(np.einsum("i,ijk->jk", np.asarray(coeffs, dtype=float), self.mats))

    def abs_aggregate(self):
        total = np.zeros((self.dim, self.dim))
        for i in range(self.size):
            total += linalg.matrix_function(self.mats[i], "abs")
        return linalg.sym(total)

    def scaled(self, coeffs):
        return DenseBlock(self.mats * np.asarray(coeffs, dtype=float)[:, None, None])

    def restricted(self, idx):
        return DenseBlock(self.mats[idx])


class MatrixFamily:
    """Direct sum of blocks sharing one coloring coordinate per member."""

    def __init__(self, blocks):
        blocks = list(blocks)
        if not blocks:
            raise InvalidInput("family needs at least one block")
        sizes = {b.size for b in blocks}
        if len(sizes) != 1:
            raise InvalidInput("all blocks must have the same member count")
        self.blocks = blocks
        self.m = blocks[0].size
        self.n = sum(b.dim for b in blocks)

    @classmethod
    def from_matrices(cls, mats):
        return cls([DenseBlock(np.asarray(mats, dtype=float))])

    @classmethod
    def from_rank_one(cls, vectors, weights=None):
        return cls([Rank1Block(vectors, weights)])

    def member(self, i):
        return scipy.linalg.block_diag(*[b.member(i) for b in self.blocks])

    def members(self):
        return [self.member(i) for i in range(self.m)]

    def aggregate(self, x):
        return scipy.linalg.block_diag(*[b.aggregate(x) for b in self.blocks])

    def abs_aggregate_norm(self):
        return max(linalg.operator_norm(b.abs_aggregate()) for b in self.blocks)

    def aggregate_norm(self, x):
        return max(linalg.operator_norm(b.aggregate(x)) for b in self.blocks)

    def scaled(self, coeffs):
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (self.m,):
            raise InvalidInput("coefficient length mismatch")
        return MatrixFamily([b.scaled(coeffs) for b in self.blocks])

    def restricted(self, idx):
        idx = np.asarray(idx, dtype=int)
        return MatrixFamily([b.restricted(idx) for b in self.blocks])

    def psd_relaxation(self):
        """Append |A_i| blocks so symmetric inputs satisfy the PSD contract."""
        extra = []
        for b in self.blocks:
            if isinstance(b, Rank1Block):
                extra.append(Rank1Block(b.vectors, b.weights))
            else:
                extra.append(
                    DenseBlock(
                        np.stack(
                            [linalg.matrix_function(b.mats[i], "abs") for i in range(b.size)]
                        )
                    )
                )
        return MatrixFamily(self.blocks + extra)


def as_family(family):
    if isinstance(family, MatrixFamily):
        return family
    return MatrixFamily.from_matrices(np.asarray(family, dtype=float))


@dataclass
class DoubledFamily:
    """Explicit diag(A_i, -A_i) doubling of a family (reference form).

    The walk itself uses the implicit +- spectra; this materialized form
    backs the public quadratic-form operation and the tests.
    """

    original: list
    doubled: list

    @classmethod
    def from_matrices(cls, mats):
        original = [linalg.sym(np.asarray(a, dtype=float)) for a in mats]
        doubled = [scipy.linalg.block_diag(a, -a) for a in original]
        return cls(original=original, doubled=doubled)

    @classmethod
    def from_family(cls, family):
        return cls.from_matrices(as_family(family).members())


# ---------------------------------------------------------------------------
# walk state and options


@dataclass
class WalkOptions:
    """Tunable walk parameters; defaults follow the analysis constants.

    eta defaults to sqrt(m)/4 and the step cap to 1/(2 eta).  With
    adaptive_steps the cap is raised to 1/(2 eta ||M^{1/2} A(y)||_op),
    which preserves the admissibility condition exactly while letting the
    walk reach the box boundary in far fewer iterations.
    """

    eta: float | None = None
    step_cap: float | None = None
    adaptive_steps: bool = False
    m_min: int = 40
    freeze_tol: float = 1e-9
    low_eig_fraction: float = 1.0 / 3.0
    max_iterations: int | None = None


@dataclass
class ColoringState:
    """Snapshot of the walk: current point, active set, iteration counter."""

    x: np.ndarray
    active: np.ndarray
    t: int
    alpha: float
    eta: float


@dataclass
class WalkLog:
    """Per-iteration trace used by invariant tests and diagnostics."""

    m: int = 0
    n_doubled: int = 0
    m_t: list = field(default_factory=list)
    delta: list = field(default_factory=list)
    linear_term: list = field(default_factory=list)
    quad_term: list = field(default_factory=list)
    step_norm: list = field(default_factory=list)
    phi: list = field(default_factory=list)
    norm_sq: list = field(default_factory=list)
    iterations: int = 0


# ---------------------------------------------------------------------------
# per-iteration spectral state of the (implicitly doubled) aggregate


class _BlockSpectra:
    def __init__(self, family, x, eta):
        self.family = family
        self.eta = eta
        self.lams = []
        self.vecs = []
        for b in family.blocks:
            w, v = linalg.eigh(b.aggregate(x))
            self.lams.append(w)
            self.vecs.append(v)
        doubled = np.concatenate([np.concatenate([w, -w]) for w in self.lams])
        self.u = solve_normalizer_from_eigenvalues(doubled, eta)
        # (u -+ eta lam)^{-1}: eigenvalues of the two half-blocks of M^{1/2}
        self.d_plus = [1.0 / (self.u - eta * w) for w in self.lams]
        self.d_minus = [1.0 / (self.u + eta * w) for w in self.lams]

    def potential(self):
        tr_inv = sum(np.sum(dp) + np.sum(dm) for dp, dm in zip(self.d_plus, self.d_minus))
        return float((tr_inv + self.u) / self.eta)

    def quad_and_linear(self, active):
        """N over the active members and the linear-term row tr(M A_i)."""
        m_t = len(active)
        n_mat = np.zeros((m_t, m_t))
        linear = np.zeros(m_t)
        for blk, dp, dm, v in zip(self.family.blocks, self.d_plus, self.d_minus, self.vecs):
            if isinstance(blk, Rank1Block):
                w_act = blk.weights[active]
                c = v.T @ blk.vectors[:, active]
                ww = np.outer(w_act, w_act)
                for d in (dp, dm):
                    p = np.sqrt(d)[:, None] * c
                    q = d[:, None] * c
                    s_gram = p.T @ p
                    t_gram = q.T @ q
                    n_mat += ww * (s_gram * t_gram)
                linear += w_act * ((dp**2 - dm**2) @ (c * c))
            else:
                mats = blk.mats[active]
                tilde = np.matmul(v.T[None, :, :], np.matmul(mats, v))
                for d in (dp, dm):
                    xs = np.sqrt(d)[None, :, None] * tilde * d[None, None, :]
                    flat = xs.reshape(m_t, -1)
                    n_mat += flat @ flat.T
                linear += np.einsum("ikk,k->i", tilde, dp**2 - dm**2)
        return linalg.sym(n_mat), linear

    def product_norm(self, y):
        """||M^{1/2} A(y)||_op for the doubled aggregate of direction y."""
        worst = 0.0
        for blk, dp, dm, v in zip(self.family.blocks, self.d_plus, self.d_minus, self.vecs):
            py = blk.aggregate(y)
            b = v.T @ py @ v
            for d in (dp, dm):
                worst = max(worst, linalg.spectral_norm(d[:, None] * b))
        return worst


# ---------------------------------------------------------------------------
# constraint-side plumbing for the shared walk loop


class _MatrixSide:
    """Linear-term and low-eigenspace constraints of the potential walk."""

    def __init__(self, family, eta, keep_count):
        self.family = family
        self.eta = eta
        self.keep_count = keep_count
        self.spectra = None
        self._n = None
        self._linear = None
        self._prod = 0.0

    def rows(self, x, active):
        self.spectra = _BlockSpectra(self.family, x, self.eta)
        n_mat, linear = self.spectra.quad_and_linear(active)
        self._n = n_mat
        self._linear = linear
        m_t = len(active)
        keep = self.keep_count(m_t)
        if keep <= 0:
            raise SubspaceExhausted("low-eigenspace budget is empty")
        rows = []
        cut = m_t - keep
        if cut > 0:
            if cut <= keep:
                _, top = scipy.linalg.eigh(n_mat, subset_by_index=[keep, m_t - 1])
                top = linalg.fix_signs(top)
            else:
                _, vecs = linalg.eigh(n_mat)
                top = vecs[:, keep:]
            rows.append(top.T)
        lin_norm = float(np.linalg.norm(linear))
        if lin_norm > _ROW_DROP_TOL:
            rows.append(linear[None, :] / lin_norm)
        return rows

    def step_cap(self, y_full):
        """Admissible step bound; also caches the product norm for observe."""
        self._prod = self.spectra.product_norm(y_full)
        if self._prod <= 1e-14:
            return np.inf
        return 0.5 / (self.eta * self._prod)

    def observe(self, y_act, y_full, delta, log):
        linear = float(self._linear @ y_act)
        quad = float(y_act @ self._n @ y_act)
        step_norm = self.eta * delta * self._prod
        if step_norm > 0.5 + 1e-9:
            raise StepTooLarge(
                f"inadmissible step: eta*delta*||M^(1/2)A(y)|| = {step_norm:.4f}"
            )
        if log is not None:
            log.linear_term.append(linear)
            log.quad_term.append(quad)
            log.step_norm.append(step_norm)
            log.phi.append(self.spectra.potential())


class _VectorSide:
    """Multiplicative-weights constraints (gradient, heavy rows, eigencut)."""

    def __init__(self, unit_rows, lambda0, heavy_count, cut_count):
        self.ahat = np.asarray(unit_rows, dtype=float)
        self.lambda0 = lambda0
        self.heavy_count = heavy_count
        self.cut_count = cut_count
        self.weights = None
        self.max_dot = 0.0
        self.max_exponent = -np.inf

    def rows(self, x, active):
        k = self.ahat.shape[0]
        if k == 0:
            return []
        margins = self.lambda0 * (self.ahat @ x) - self.lambda0**2
        self.max_exponent = float(np.max(margins))
        self.weights = np.exp(margins)
        a_act = self.ahat[:, active]
        rows = []
        grad = self.weights @ a_act
        g_norm = float(np.linalg.norm(grad))
        if g_norm > _ROW_DROP_TOL:
            rows.append(grad[None, :] / g_norm)
        m_t = len(active)
        heavy = self.heavy_count(m_t)
        if heavy > 0:
            order = np.lexsort((np.arange(k), -self.weights))
            rows.append(a_act[order[: min(heavy, k)]])
        cut = self.cut_count(m_t)
        if cut > 0 and cut < m_t:
            total = float(np.sum(self.weights))
            scaled = np.sqrt(self.weights / total)[:, None] * a_act
            w_gram = linalg.sym(scaled.T @ scaled)
            _, top = scipy.linalg.eigh(w_gram, subset_by_index=[m_t - cut, m_t - 1])
            rows.append(linalg.fix_signs(top).T)
        return rows

    def step_cap(self, y_full):
        if self.ahat.shape[0] == 0:
            return np.inf
        self.max_dot = float(np.max(np.abs(self.ahat @ y_full)))
        if self.max_dot <= 1e-14:
            return np.inf
        return 0.5 / (self.lambda0 * self.max_dot)

    def observe(self, y_act, y_full, delta, log):
        if self.ahat.shape[0] == 0:
            return
        step_norm = self.lambda0 * delta * self.max_dot
        if step_norm > 0.5 + 1e-9:
            raise StepTooLarge("inadmissible multiplicative-weights step")
        if log is not None:
            log.step_norm.append(step_norm)


def _walk_loop(m, sides, extra_rows, base_cap, options, log):
    """Shared walk loop: assemble constraints, pick y, step, freeze.

    extra_rows is a (r, m) array of static linear constraints (the caller's
    subspace H plus any pinned coordinates).  Returns the final x.
    """
    x = np.zeros(m)
    active = np.arange(m)
    freeze_tol = options.freeze_tol
    max_iter = options.max_iterations
    if max_iter is None:
        max_iter = int(np.ceil(m / base_cap**2)) + m + 16
    if log is not None:
        log.m = m
    iterations = 0
    while 4 * len(active) > 3 * m:
        if iterations >= max_iter:
            raise SubspaceExhausted(f"walk did not converge within {max_iter} iterations")
        iterations += 1

        rows = []
        x_act = x[active]
        x_norm = float(np.linalg.norm(x_act))
        if x_norm > _ROW_DROP_TOL:
            rows.append(x_act[None, :] / x_norm)
        for side in sides:
            rows.extend(side.rows(x, active))
        if extra_rows.shape[0]:
            restricted = extra_rows[:, active]
            norms = np.linalg.norm(restricted, axis=1)
            keep = norms > _ROW_DROP_TOL
            if np.any(keep):
                rows.append(restricted[keep] / norms[keep, None])

        m_t = len(active)
        if rows:
            stacked = np.vstack(rows)
            _, s, vt = np.linalg.svd(stacked, full_matrices=True)
            rank = int(np.sum(s > linalg.ZERO_RTOL * max(1.0, s[0] if s.size else 0.0)))
            if rank >= m_t:
                raise SubspaceExhausted(
                    f"update subspace is empty at m_t={m_t} with {stacked.shape[0]} constraints"
                )
            y_act = linalg.fix_signs(vt[rank:].T[:, :1])[:, 0]
        else:
            y_act = np.zeros(m_t)
            y_act[0] = 1.0

        y_full = np.zeros(m)
        y_full[active] = y_act

        # every side computes (and caches) its admissibility cap; in fixed
        # mode the cap is the configured one, in adaptive mode the tightest
        # admissible bound (which is never below the fixed cap)
        admissible = [side.step_cap(y_full) for side in sides]
        if options.adaptive_steps:
            finite = [c for c in admissible if np.isfinite(c)]
            cap = min(finite) if finite else np.inf
        else:
            cap = base_cap

        # distance to the boundary of the [-1, 1] box along y
        with np.errstate(divide="ignore"):
            pos = y_act > 1e-14
            neg = y_act < -1e-14
            dists = np.concatenate(
                [(1.0 - x_act[pos]) / y_act[pos], (-1.0 - x_act[neg]) / y_act[neg]]
            )
        boundary = float(np.min(dists)) if dists.size else np.inf
        delta = min(cap, boundary)
        if not np.isfinite(delta) or delta <= 0:
            raise SubspaceExhausted("no admissible step length")

        for side in sides:
            side.observe(y_act, y_full, delta, log)

        x[active] = x_act + delta * y_act

        if log is not None:
            log.m_t.append(m_t)
            log.delta.append(delta)
            log.norm_sq.append(float(x @ x))

        frozen = np.abs(x[active]) >= 1.0 - freeze_tol
        if np.any(frozen):
            hit = active[frozen]
            x[hit] = np.sign(x[hit])
            active = active[~frozen]
    if log is not None:
        log.iterations = iterations
    return x


# ---------------------------------------------------------------------------
# public operations


def quad_matrix(m_density, family, active=None):
    """N(i,j) = tr(M^{1/2} A_i M^{1/2} A_j M^{1/2}) over the active members.

    Reference construction as a Gram matrix X^T X with columns
    vec(M^{1/4} A_i M^{1/2}), which keeps N numerically PSD.  `family` may be
    a DoubledFamily (its doubled members are used), a MatrixFamily, or a
    plain list of symmetric matrices.
    """
    m_density = linalg.sym(np.asarray(m_density, dtype=float))
    if abs(float(np.trace(m_density)) - 1.0) > 1e-6:
        raise InvalidInput("quad_matrix expects a density matrix (unit trace)")
    if isinstance(family, DoubledFamily):
        mats = family.doubled
    elif isinstance(family, MatrixFamily):
        mats = family.members()
    else:
        mats = [np.asarray(a, dtype=float) for a in family]
    if active is None:
        active = np.arange(len(mats))
    active = np.asarray(active, dtype=int)
    half = linalg.matrix_function(m_density, "sqrt_psd")
    quarter = linalg.matrix_function(half, "sqrt_psd")
    cols = [(quarter @ mats[i] @ half).ravel() for i in active]
    x = np.column_stack(cols) if cols else np.zeros((m_density.shape[0] ** 2, 0))
    return linalg.sym(x.T @ x)


def step_subspace(state, ctx, family, n_mat, h):
    """The per-iteration update subspace of the walk, as an explicit Subspace.

    Intersects: support on active coordinates, orthogonality to the current
    point, the kernel of y -> tr(M A(y)), the span of the lowest floor(m_t/3)
    eigenvectors of N, and the caller's subspace H.
    """
    if isinstance(family, DoubledFamily):
        mats = family.doubled
    elif isinstance(family, MatrixFamily):
        mats = family.members()
    else:
        mats = [np.asarray(a, dtype=float) for a in family]
    m = len(mats)
    active = np.asarray(sorted(state.active), dtype=int)
    m_t = len(active)
    if 4 * m_t <= 3 * m:
        raise InvalidInput("step subspace is only defined while m_t > (3/4) m")
    rows = []
    inactive = np.setdiff1d(np.arange(m), active)
    for i in inactive:
        e = np.zeros(m)
        e[i] = 1.0
        rows.append(e)
    if np.linalg.norm(state.x) > _ROW_DROP_TOL:
        rows.append(np.asarray(state.x, dtype=float))
    density = ctx.density
    linear = np.zeros(m)
    for i in active:
        linear[i] = float(np.trace(density @ mats[i]))
    if np.linalg.norm(linear) > _ROW_DROP_TOL:
        rows.append(linear)
    keep = m_t // 3
    if keep <= 0:
        raise SubspaceExhausted("no room for the low-eigenspace restriction")
    _, vecs = linalg.eigh(np.asarray(n_mat, dtype=float))
    for col in range(keep, m_t):
        lifted = np.zeros(m)
        lifted[active] = vecs[:, col]
        rows.append(lifted)
    rows.extend(h.complement_rows)
    sub = linalg.nullspace(rows, m=m)
    if sub.dim <= 0:
        raise SubspaceExhausted("empty intersection of walk constraints")
    return sub


def partial_color(family, h=None, options=None, log=None):
    """Partial fractional coloring with small operator-norm discrepancy.

    family: MatrixFamily or list of symmetric n x n matrices, sum |A_i| <= I.
    h: constraint Subspace of dimension >= (4/5) m (default: full space).
    Returns x in [-1,1]^m with >= m/4 frozen coordinates, x in H, and
    ||sum x(i) A_i||_op <= 16 sqrt(2 n / m).
    """
    family = as_family(family)
    options = options or WalkOptions()
    m = family.m
    if h is None:
        h = Subspace.full(m)
    if h.ambient_dim != m:
        raise InvalidInput("subspace ambient dimension does not match the family size")
    if m < options.m_min:
        raise InvalidInput(f"family size {m} is below the walk minimum {options.m_min}")
    if h.dim < 0.8 * m - 1e-9:
        raise InvalidInput(f"constraint subspace dimension {h.dim} is below (4/5) m")
    abs_norm = family.abs_aggregate_norm()
    if abs_norm > 1.0 + 1e-8:
        raise InvalidInput(f"sum of |A_i| has operator norm {abs_norm:.6f} > 1")

    eta = options.eta if options.eta is not None else 0.25 * np.sqrt(m)
    base_cap = options.step_cap if options.step_cap is not None else 1.0 / (2.0 * eta)
    frac = options.low_eig_fraction
    side = _MatrixSide(family, eta, keep_count=lambda mt: int(np.floor(frac * mt)))
    if log is not None:
        log.n_doubled = 2 * family.n
    x = _walk_loop(m, [side], h.complement_rows, base_cap, options, log)
    return x
