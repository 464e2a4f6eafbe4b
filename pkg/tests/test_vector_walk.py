"""Multiplicative-weights vector walk: subspace recipe and discrepancy bound."""

import numpy as np
import pytest

from walksparse import linalg
from walksparse.errors import InvalidInput
from walksparse.matrix_walk import WalkLog
from walksparse.vector_walk import (
    MwuOptions,
    MwuState,
    default_lambda0,
    discrepancy_ratios,
    mwu_subspace,
    prepare_constraints,
    vector_partial_color,
)


def gaussian_rows(k, m, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(k, m))
    return a / np.linalg.norm(a, axis=1)[:, None]


class TestState:
    def test_weights_recomputable(self):
        rows = gaussian_rows(30, 12, seed=1)
        rng = np.random.default_rng(2)
        x = rng.uniform(-1, 1, size=12)
        state = MwuState(x=x, active=np.arange(12), lambda0=1.2, unit_rows=rows)
        w = state.weights()
        expect = np.exp(1.2 * rows @ x - 1.44)
        assert np.max(np.abs(w / expect - 1.0)) <= 1e-9

    def test_zero_rows_dropped(self):
        a = np.vstack([np.zeros(5), np.ones(5)])
        unit = prepare_constraints(a)
        assert unit.shape == (1, 5)
        assert abs(np.linalg.norm(unit[0]) - 1.0) <= 1e-12


class TestSubspace:
    def test_no_constraints(self):
        state = MwuState(
            x=np.zeros(10), active=np.arange(10), lambda0=1.0,
            unit_rows=np.zeros((0, 10)),
        )
        sub = mwu_subspace(state)
        assert sub.dim == 10

    def test_orthonormal_basis_constraints(self):
        # all weights equal: the heaviest constraints are the lowest indices
        m = 10
        rows = np.eye(m)
        state = MwuState(
            x=np.zeros(m), active=np.arange(m), lambda0=1.0, unit_rows=rows
        )
        sub = mwu_subspace(state)
        heavy = int(np.ceil(m / 10.0))
        basis = sub.basis()
        assert np.max(np.abs(basis[:heavy, :])) <= 1e-9

    def test_random_constraints_orthogonality(self):
        m, k = 50, 200
        rows = gaussian_rows(k, m, seed=5)
        rng = np.random.default_rng(6)
        x = 0.3 * rng.uniform(-1, 1, size=m)
        state = MwuState(x=x, active=np.arange(m), lambda0=1.3, unit_rows=rows)
        sub = mwu_subspace(state)
        w = state.weights()
        grad = w @ rows
        order = np.lexsort((np.arange(k), -w))
        heavy = order[: int(np.ceil(m / 10.0))]
        basis = sub.basis()
        for y in basis.T:
            assert abs(np.dot(y, x)) <= 1e-9
            assert abs(np.dot(grad, y)) <= 1e-9 * max(1.0, np.linalg.norm(grad))
            assert np.max(np.abs(rows[heavy] @ y)) <= 1e-9
        # members live in the low eigenspace of the weighted second moment
        scaled = np.sqrt(w / np.sum(w))[:, None] * rows
        w_gram = scaled.T @ scaled
        _, vecs = linalg.eigh(w_gram)
        cut = int(np.ceil(m / 10.0))
        top = vecs[:, m - cut :]
        assert np.max(np.abs(top.T @ basis)) <= 1e-9


class TestVectorPartialColor:
    def test_zero_constraints(self):
        x = vector_partial_color(np.zeros((25, 20)))
        assert np.count_nonzero(np.abs(x) == 1.0) >= 5
        assert np.max(np.abs(x)) <= 1.0

    def test_basis_vectors(self):
        m = 30
        x = vector_partial_color(np.eye(m))
        assert np.max(np.abs(x)) <= 1.0
        assert np.count_nonzero(np.abs(x) == 1.0) >= m / 4

    def test_gaussian_bound(self):
        m, k = 50, 400
        a = gaussian_rows(k, m, seed=7)
        log = WalkLog()
        x = vector_partial_color(a, log=log)
        ratios = discrepancy_ratios(a, x)
        bound = 12.0 * max(1.0, np.sqrt(np.log(k / m)))
        assert float(np.max(ratios)) <= bound
        assert np.count_nonzero(np.abs(x) == 1.0) >= m / 4
        assert max(log.step_norm) <= 0.5 + 1e-9

    def test_membership_in_extra(self):
        m = 40
        rng = np.random.default_rng(11)
        extra = linalg.nullspace(rng.normal(size=(4, m)))
        a = gaussian_rows(80, m, seed=12)
        x = vector_partial_color(a, extra=extra)
        assert extra.contains(x, tol=1e-8)

    def test_deterministic(self):
        a = gaussian_rows(60, 30, seed=13)
        assert np.array_equal(vector_partial_color(a), vector_partial_color(a))

    def test_k_less_than_m_rejected(self):
        with pytest.raises(InvalidInput):
            vector_partial_color(gaussian_rows(10, 20, seed=1))

    def test_k_less_than_m_allowed_when_requested(self):
        a = gaussian_rows(10, 20, seed=1)
        x = vector_partial_color(a, require_k_ge_m=False)
        assert np.count_nonzero(np.abs(x) == 1.0) >= 5

    def test_nonfinite_rejected(self):
        bad = np.full((25, 20), np.nan)
        with pytest.raises(InvalidInput):
            vector_partial_color(bad)

    def test_fixed_cap_also_works(self):
        a = gaussian_rows(50, 25, seed=21)
        x = vector_partial_color(a, options=MwuOptions(adaptive_steps=False))
        assert np.count_nonzero(np.abs(x) == 1.0) >= 25 / 4


class TestLambdaDefault:
    def test_clamped_at_one(self):
        assert default_lambda0(10, 20) == 1.0
        assert default_lambda0(20, 20) == 1.0

    def test_grows_with_ratio(self):
        assert abs(default_lambda0(400, 50) - np.sqrt(np.log(8.0))) <= 1e-12
