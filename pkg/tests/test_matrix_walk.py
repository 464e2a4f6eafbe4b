"""Matrix discrepancy walk: doubling, quadratic-form matrix, subspaces, walk."""

import numpy as np
import pytest

from conftest import diagonal_family, projection_vectors, random_symmetric
from walksparse import linalg, potential
from walksparse.errors import InvalidInput
from walksparse.linalg import Subspace
from walksparse.matrix_walk import (
    ColoringState,
    DoubledFamily,
    MatrixFamily,
    WalkLog,
    WalkOptions,
    partial_color,
    quad_matrix,
    step_subspace,
)


def small_family(m=6, n=3, seed=0):
    mats = [random_symmetric(n, seed=seed + i, scale=1.0) for i in range(m)]
    total = sum(linalg.matrix_function(a, "abs") for a in mats)
    scale = linalg.operator_norm(total)
    return [a / scale for a in mats]


class TestDoubledFamily:
    def test_norm_equals_doubled_top_eigenvalue(self):
        mats = small_family()
        fam = DoubledFamily.from_matrices(mats)
        rng = np.random.default_rng(4)
        for _ in range(5):
            x = rng.uniform(-1, 1, size=len(mats))
            orig = sum(xi * a for xi, a in zip(x, mats))
            doub = sum(xi * a for xi, a in zip(x, fam.doubled))
            lam_max = float(linalg.eigvalsh(doub)[-1])
            assert abs(lam_max - linalg.operator_norm(orig)) <= 1e-10

    def test_abs_sum_within_identity(self):
        mats = small_family()
        total = sum(linalg.matrix_function(a, "abs") for a in mats)
        assert linalg.operator_norm(total) <= 1.0 + 1e-8


class TestQuadMatrix:
    def test_uniform_density(self):
        # M = I/n makes N(i,j) = n^{-3/2} tr(A_i A_j)
        mats = small_family(m=5, n=4, seed=2)
        n = 4
        n_mat = quad_matrix(np.eye(n) / n, mats)
        expect = np.array(
            [[np.trace(a @ b) / n**1.5 for b in mats] for a in mats]
        )
        assert np.allclose(n_mat, expect, atol=1e-10)

    def test_zero_family(self):
        zeros = [np.zeros((3, 3))] * 4
        assert np.allclose(quad_matrix(np.eye(3) / 3, zeros), 0.0)

    def test_psd(self):
        mats = small_family(m=8, n=3, seed=7)
        fam = DoubledFamily.from_matrices(mats)
        agg = sum(0.3 * a for a in fam.doubled)
        ctx = potential.density_optimizer(agg, eta=1.0)
        n_mat = quad_matrix(ctx.density, fam)
        assert linalg.eigvalsh(n_mat)[0] >= -1e-10

    def test_requires_density(self):
        with pytest.raises(InvalidInput):
            quad_matrix(np.eye(3), [np.eye(3)])

    def test_matches_walk_fast_path(self):
        # the Hadamard-Gram fast path agrees with the reference Gram build
        from walksparse.matrix_walk import _BlockSpectra

        vec = projection_vectors(3, 12, seed=5)
        fam = MatrixFamily.from_rank_one(vec)
        x = np.linspace(-0.5, 0.5, 12)
        eta = 0.25 * np.sqrt(12)
        spectra = _BlockSpectra(fam, x, eta)
        active = np.arange(12)
        n_fast, lin_fast = spectra.quad_and_linear(active)

        doubled = DoubledFamily.from_family(fam)
        agg = sum(xi * a for xi, a in zip(x, doubled.doubled))
        ctx = potential.density_optimizer(agg, eta)
        n_ref = quad_matrix(ctx.density, doubled)
        assert np.allclose(n_fast, n_ref, atol=1e-9)
        lin_ref = np.array([np.trace(ctx.density @ a) for a in doubled.doubled])
        assert np.allclose(lin_fast, lin_ref, atol=1e-9)


class TestStepSubspace:
    def test_zero_family_dimension(self):
        m = 9
        mats = [np.zeros((2, 2))] * m
        fam = DoubledFamily.from_matrices(mats)
        state = ColoringState(
            x=np.zeros(m), active=np.arange(m), t=1, alpha=0.5, eta=1.0
        )
        ctx = potential.density_optimizer(np.zeros((4, 4)), eta=1.0)
        n_mat = np.zeros((m, m))
        sub = step_subspace(state, ctx, fam, n_mat, Subspace.full(m))
        assert sub.dim == m // 3

    def test_constraints_hold(self):
        m, n = 40, 4
        vec = projection_vectors(n, m, seed=9)
        fam = DoubledFamily.from_family(MatrixFamily.from_rank_one(vec))
        rng = np.random.default_rng(3)
        x = 0.4 * rng.uniform(-1, 1, size=m)
        eta = 0.25 * np.sqrt(m)
        agg = sum(xi * a for xi, a in zip(x, fam.doubled))
        ctx = potential.density_optimizer(agg, eta)
        n_mat = quad_matrix(ctx.density, fam)
        h = linalg.nullspace(rng.normal(size=(m // 5, m)))
        state = ColoringState(
            x=x, active=np.arange(m), t=1, alpha=1 / (2 * eta), eta=eta
        )
        sub = step_subspace(state, ctx, fam, n_mat, h)
        assert sub.dim >= m / 4 - 2 - (m - h.dim)
        basis = sub.basis()
        lin = np.array([np.trace(ctx.density @ a) for a in fam.doubled])
        for y in basis.T:
            assert abs(np.dot(y, x)) <= 1e-9
            assert abs(lin @ y) <= 1e-9
            assert h.contains(y, tol=1e-9)
        # every member lies in the low eigenspace of N
        vals, vecs = linalg.eigh(n_mat)
        keep = m // 3
        top = vecs[:, keep:]
        assert np.max(np.abs(top.T @ basis)) <= 1e-9


class TestPartialColor:
    def test_zero_family_small(self):
        fam = MatrixFamily.from_matrices(np.zeros((8, 2, 2)))
        x = partial_color(fam, options=WalkOptions(m_min=8))
        assert np.count_nonzero(np.abs(x) == 1.0) >= 2
        assert linalg.operator_norm(fam.aggregate(x)) == 0.0

    def test_projection_instance(self):
        n, m = 4, 64
        fam = MatrixFamily.from_rank_one(projection_vectors(n, m, seed=17))
        rng = np.random.default_rng(17)
        h = linalg.nullspace(rng.normal(size=(12, m)))
        log = WalkLog()
        x = partial_color(fam, h, log=log)
        bound = 16.0 * np.sqrt(2.0 * n / m)
        assert np.max(np.abs(x)) <= 1.0
        assert np.count_nonzero(np.abs(x) == 1.0) >= m / 4
        assert fam.aggregate_norm(x) <= bound
        assert h.contains(x, tol=1e-8)
        assert log.iterations <= m * m / 4 + m

    def test_log_invariants(self):
        n, m = 4, 64
        fam = MatrixFamily.from_rank_one(projection_vectors(n, m, seed=23))
        log = WalkLog()
        x = partial_color(fam, log=log)
        assert max(abs(v) for v in log.linear_term) <= 1e-8
        for quad, m_t in zip(log.quad_term, log.m_t):
            assert quad <= 9.0 * np.sqrt(2.0 * n) / m_t**2 + 1e-8
        assert max(log.step_norm) <= 0.5 + 1e-9
        # norm increments match the squared steps
        prev = 0.0
        for nsq, delta in zip(log.norm_sq, log.delta):
            assert abs(nsq - prev - delta**2) <= 1e-9
            prev = nsq
        # potential telescoping: the final potential is controlled by the
        # initial one plus the summed second-order contributions
        from walksparse.matrix_walk import _BlockSpectra

        eta = 0.25 * np.sqrt(m)
        phi_final = _BlockSpectra(fam, x, eta).potential()
        budget = 2.0 * np.sqrt(2.0 * n) / eta + sum(
            2.0 * eta * d**2 * (9.0 * np.sqrt(2.0 * n) / m_t**2)
            for d, m_t in zip(log.delta, log.m_t)
        )
        assert phi_final <= budget + 1e-6

    def test_monotone_norm_and_membership_adaptive(self):
        n, m = 4, 48
        fam = MatrixFamily.from_rank_one(projection_vectors(n, m, seed=29))
        log = WalkLog()
        x = partial_color(fam, options=WalkOptions(adaptive_steps=True), log=log)
        assert np.count_nonzero(np.abs(x) == 1.0) >= m / 4
        assert fam.aggregate_norm(x) <= 16.0 * np.sqrt(2.0 * n / m)
        assert max(log.step_norm) <= 0.5 + 1e-9
        assert all(b >= a - 1e-12 for a, b in zip(log.norm_sq, log.norm_sq[1:]))

    def test_deterministic(self):
        fam = MatrixFamily.from_rank_one(projection_vectors(4, 40, seed=31))
        x1 = partial_color(fam)
        x2 = partial_color(fam)
        assert np.array_equal(x1, x2)

    def test_rejects_small_family(self):
        fam = MatrixFamily.from_matrices(np.zeros((10, 2, 2)))
        with pytest.raises(InvalidInput):
            partial_color(fam)

    def test_rejects_small_subspace(self):
        m = 40
        fam = MatrixFamily.from_rank_one(projection_vectors(4, m, seed=2))
        rng = np.random.default_rng(0)
        h = linalg.nullspace(rng.normal(size=(m // 2, m)))
        with pytest.raises(InvalidInput):
            partial_color(fam, h)

    def test_rejects_oversized_family_norm(self):
        vec = 2.0 * projection_vectors(4, 40, seed=3)
        fam = MatrixFamily.from_rank_one(vec)
        with pytest.raises(InvalidInput):
            partial_color(fam)

    def test_diagonal_sanity_against_brute_force(self):
        # full colorings can't beat the exhaustive optimum
        from walksparse.verify import brute_force_min_discrepancy

        mats = diagonal_family(10, 4, seed=13)
        _, best = brute_force_min_discrepancy(mats)
        x = drive_full_coloring(mats)
        assert np.all(np.abs(x) == 1.0)
        walk_norm = linalg.operator_norm(
            sum(xi * a for xi, a in zip(x, mats))
        )
        assert walk_norm >= best - 1e-9
        assert walk_norm <= 16.0 * np.sqrt(2.0 * 4 / 10)


def drive_full_coloring(mats):
    """Full +-1 coloring by repeated partial colorings on the active set,
    finishing greedily (sign minimizing the aggregate norm) below 9 coords."""
    mats = [np.asarray(a, dtype=float) for a in mats]
    m = len(mats)
    x = np.zeros(m)
    active = list(range(m))
    while active:
        if len(active) >= 9:
            sub = MatrixFamily.from_matrices(np.stack([mats[i] for i in active]))
            x_sub = partial_color(
                sub, options=WalkOptions(m_min=1, adaptive_steps=True)
            )
            for pos, i in enumerate(active):
                x[i] = x_sub[pos]
            active = [i for i in active if abs(x[i]) < 1.0]
            # clamp near-frozen coordinates the sub-walk left fractional
            continue
        i = active.pop(0)
        base = sum(x[j] * mats[j] for j in range(m) if j != i)
        plus = linalg.operator_norm(base + mats[i])
        minus = linalg.operator_norm(base - mats[i])
        x[i] = 1.0 if plus <= minus else -1.0
    return x
