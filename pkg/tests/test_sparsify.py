"""Halving sparsification loop and the graph pipelines built on it."""

import numpy as np
import pytest

from conftest import (
    complete_bipartite,
    complete_graph,
    cycle_graph,
    random_connected_graph,
    star_graph,
    tournament_union,
)
from walksparse import linalg
from walksparse.errors import InvalidInput, SubspaceExhausted
from walksparse.graph import Graph
from walksparse.linalg import Subspace, kernel_basis
from walksparse.matrix_walk import MatrixFamily
from walksparse.sparsify import (
    Reweighting,
    SparsifyOptions,
    degree_subspace,
    sparsify,
    sparsify_components,
    spectral_family,
    spectral_sparsify,
    sv_expander_family,
    sv_sparsify,
    sv_sparsify_expander,
    uc_family,
    uc_sparsify,
)


class TestReweighting:
    def test_support(self):
        r = Reweighting(np.array([0.0, 2.0, 0.0, 1.0]))
        assert list(r.support) == [1, 3]
        assert r.support_size == 2

    def test_negative_rejected(self):
        with pytest.raises(InvalidInput):
            Reweighting(np.array([-0.1, 1.0]))


class TestCoreLoop:
    def test_below_threshold_identity(self):
        fam = spectral_family(complete_graph(8))
        rew, info = sparsify(fam, Subspace.full(fam.m), eps=0.5)
        assert np.array_equal(rew.s, np.ones(fam.m))
        assert info.rounds == 0 and info.measured_eps == 0.0

    def test_forced_rounds_contract(self):
        g = complete_graph(16)
        fam = spectral_family(g)
        h = degree_subspace(g)
        opts = SparsifyOptions(c_support=1.0)
        rew, info = sparsify(fam, h, eps=0.45, options=opts)
        assert info.rounds >= 2
        assert rew.support_size <= info.threshold
        assert np.all(rew.s >= 0.0)
        # support drops by at least an eighth of the round's support
        before = [fam.m] + info.round_supports[:-1]
        for prev, cur in zip(before, info.round_supports):
            assert cur <= prev - np.ceil(prev / 8.0)
        # s - 1 stays in the subspace
        assert info.subspace_residual <= 1e-7 * max(1.0, np.linalg.norm(rew.s - 1))
        # measured error from an independent eigen oracle
        diff = rew.s - 1.0
        oracle = linalg.operator_norm(fam.blocks[0].aggregate(diff))
        assert abs(oracle - info.measured_eps) <= 1e-12
        assert info.measured_eps <= 0.45

    def test_eps_validation(self):
        fam = spectral_family(complete_graph(8))
        with pytest.raises(InvalidInput):
            sparsify(fam, Subspace.full(fam.m), eps=0.75)
        with pytest.raises(InvalidInput):
            sparsify(
                fam,
                Subspace.full(fam.m),
                eps=0.2,
                options=SparsifyOptions(guarantee_mode=True),
            )

    def test_non_psd_rejected(self):
        mats = np.zeros((40, 2, 2))
        mats[0] = np.diag([0.5, -0.5])
        fam = MatrixFamily.from_matrices(mats)
        with pytest.raises(InvalidInput):
            sparsify(fam, Subspace.full(40), eps=0.4)

    def test_psd_relaxation_accepts_symmetric(self):
        rng = np.random.default_rng(3)
        mats = []
        for _ in range(48):
            a = rng.normal(size=(3, 3))
            mats.append(0.5 * (a + a.T))
        total = sum(linalg.matrix_function(a, "abs") for a in mats)
        scale = linalg.operator_norm(total)
        mats = np.stack([a / scale for a in mats])
        fam = MatrixFamily.from_matrices(mats)
        rew, info = sparsify(
            fam,
            Subspace.full(48),
            eps=0.5,
            options=SparsifyOptions(symmetric_inputs=True, c_support=1024.0),
        )
        assert info.rounds == 0  # desk threshold keeps it identity

    def test_subspace_exhausted_when_threshold_too_low(self):
        g = complete_graph(16)
        fam = spectral_family(g)
        h = degree_subspace(g)
        with pytest.raises(SubspaceExhausted):
            sparsify(fam, h, eps=0.5, options=SparsifyOptions(c_support=0.25))


class TestDegreeSubspace:
    def test_star_members_balance(self):
        # a star admits no degree-preserving perturbation: every leaf row
        # pins its single edge, so the subspace is trivial
        g = star_graph(3)
        sub = degree_subspace(g)
        assert sub.dim == 0
        for y in sub.basis().T:
            rows = np.zeros(g.n)
            for j, (u, v, w) in enumerate(g.edges):
                rows[u] += w * y[j]
                rows[v] += w * y[j]
            assert np.max(np.abs(rows)) <= 1e-10

    def test_cycle_alternating_member(self):
        g = cycle_graph(4)
        sub = degree_subspace(g)
        # edges sorted: (0,1),(0,3),(1,2),(2,3); alternate so each vertex
        # sees one +1 and one -1
        y = np.array([1.0, -1.0, -1.0, 1.0])
        assert sub.contains(y / 2.0, tol=1e-10)

    def test_random_graph_dimension(self):
        g = random_connected_graph(10, 0.6, seed=2)
        sub = degree_subspace(g)
        assert sub.dim >= g.m - g.n
        resid = sub.complement_rows @ sub.basis()
        assert np.max(np.abs(resid), initial=0.0) <= 1e-10


class TestSpectralSparsify:
    def test_identity_below_threshold(self):
        g = complete_graph(8)
        res = spectral_sparsify(g, 0.5)
        assert res.graph.edges == g.edges

    def test_forced_rounds_quality(self):
        g = complete_graph(16)
        res = spectral_sparsify(g, 0.45, SparsifyOptions(c_support=1.0))
        assert res.graph.m < g.m
        assert np.max(np.abs(res.graph.weighted_degrees() - g.weighted_degrees())) <= 1e-6
        lap = g.laplacian()
        lph = linalg.matrix_function(lap, "pinv_sqrt")
        rel = linalg.operator_norm(lph @ (lap - res.graph.laplacian()) @ lph)
        assert rel <= 0.45
        assert all(w > 0 for _, _, w in res.graph.edges)
        # Loewner-order oracle: (1 - eps) L <= L_hat <= (1 + eps) L
        eps = res.info.measured_eps + 1e-9
        lap_t = res.graph.laplacian()
        upper = linalg.eigvalsh((1.0 + eps) * lap - lap_t)
        lower = linalg.eigvalsh(lap_t - (1.0 - eps) * lap)
        assert upper[0] >= -1e-8 and lower[0] >= -1e-8

    def test_disconnected_rejected(self):
        g = Graph(4, ((0, 1, 1.0), (2, 3, 1.0)))
        with pytest.raises(InvalidInput):
            spectral_sparsify(g, 0.4)

    def test_component_wrapper(self):
        g = Graph(6, ((0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0), (3, 4, 1.0), (4, 5, 1.0)))
        out = sparsify_components(g, lambda sub: spectral_sparsify(sub, 0.5))
        assert out.m == g.m  # both components below threshold


class TestUcSparsify:
    def test_block_identity(self):
        # sum of the family equals diag(proj off ker L, proj off ker U)
        for g in (complete_graph(7), complete_bipartite(3, 4)):
            fam = uc_family(g)
            total = np.zeros((2 * g.n, 2 * g.n))
            for i in range(fam.m):
                total += fam.member(i)
            lap_kernel = kernel_basis(g.laplacian())
            uns_kernel = kernel_basis(g.unsigned_laplacian())
            proj_l = np.eye(g.n) - lap_kernel @ lap_kernel.T
            proj_u = np.eye(g.n) - uns_kernel @ uns_kernel.T
            expect = np.block(
                [
                    [proj_l, np.zeros((g.n, g.n))],
                    [np.zeros((g.n, g.n)), proj_u],
                ]
            )
            assert np.max(np.abs(total - expect)) <= 1e-9

    def test_identity_below_threshold(self):
        g = complete_graph(8)
        res = uc_sparsify(g, 0.5)
        assert res.graph.edges == g.edges
        assert res.measured["laplacian"] == 0.0
        assert res.measured["unsigned"] == 0.0

    def test_forced_rounds_both_errors(self):
        g = complete_graph(16)
        res = uc_sparsify(g, 0.45, SparsifyOptions(c_support=0.6))
        assert res.graph.m < g.m
        assert res.measured["laplacian"] <= 0.45
        assert res.measured["unsigned"] <= 0.45
        assert np.max(np.abs(res.graph.weighted_degrees() - g.weighted_degrees())) <= 1e-6

    def test_bipartite_kernel_preserved(self):
        g = complete_bipartite(10, 10)
        res = uc_sparsify(g, 0.45, SparsifyOptions(c_support=0.5))
        assert res.graph.m < g.m
        diff = g.adjacency() - res.graph.adjacency()
        sign = np.concatenate([np.ones(10), -np.ones(10)])
        assert np.linalg.norm(diff @ sign) <= 1e-8


class TestSvSparsify:
    def test_k44_family_norm(self):
        g = complete_bipartite(4, 4)
        fam = sv_expander_family(g, 1.0)
        norm = fam.aggregate_norm(np.ones(g.m))
        assert abs(norm - 1.0) <= 1e-9  # lam / lambda_2 with lambda_2 = 1

    def test_small_lambda_vacuous_but_valid(self):
        g = complete_bipartite(4, 4)
        fam = sv_expander_family(g, 1e-6)
        assert fam.aggregate_norm(np.ones(g.m)) <= 2e-6

    def test_expander_degrees_preserved(self):
        g = complete_bipartite(4, 4)
        res = sv_sparsify_expander(g, 1.0, 0.5)
        assert np.max(np.abs(res.graph.weighted_degrees() - g.weighted_degrees())) <= 1e-6

    def test_lambda_overclaim_rejected(self):
        g = complete_bipartite(4, 4)
        with pytest.raises(InvalidInput):
            sv_sparsify_expander(g, 1.5, 0.5)

    def test_non_bipartite_rejected(self):
        with pytest.raises(InvalidInput):
            sv_sparsify_expander(complete_graph(5), 0.5, 0.4)

    def test_directed_cycle_pipeline(self):
        g = Graph(6, tuple((i, (i + 1) % 6, 1.0) for i in range(6)), directed=True)
        res = sv_sparsify(g, eps=0.5)
        assert res.graph.m == g.m  # a cycle admits no degree-preserving removal
        assert res.report.kernel_ok
        assert res.report.measured_eps <= 1e-9

    def test_empty_graph(self):
        g = Graph(4, (), directed=True)
        res = sv_sparsify(g, eps=0.5)
        assert res.graph.m == 0

    def test_tournament_union_sparsifies(self):
        g = tournament_union(16, 101, 202)
        res = sv_sparsify(
            g, eps=2.0, phi_target=0.25, options=SparsifyOptions(c_support=1.25)
        )
        assert res.graph.m < g.m
        assert res.report.kernel_ok
        assert res.report.degree_max_dev <= 1e-6

    def test_weighted_arcs_rejected(self):
        g = Graph(3, ((0, 1, 2.0),), directed=True)
        with pytest.raises(InvalidInput):
            sv_sparsify(g, eps=0.5)

    def test_piece_eps_out_of_range_rejected(self):
        g = tournament_union(16, 1, 2)
        with pytest.raises(InvalidInput):
            sv_sparsify(g, eps=2.0, phi_target=0.3)  # eps * phi = 0.6 > 1/2

    def test_multi_piece_union_and_mapping(self):
        # two dense clusters: the lift decomposes into several pieces and the
        # reweighted union must map back to arcs with exact degrees
        arcs = set()
        for s1, s2, off in ((1, 2, 0), (3, 4, 16)):
            for rng in (np.random.default_rng(s1), np.random.default_rng(s2)):
                for i in range(16):
                    for j in range(i + 1, 16):
                        if rng.random() < 0.5:
                            arcs.add((off + i, off + j))
                        else:
                            arcs.add((off + j, off + i))
        arcs |= {(0, 16), (16, 0)}
        g = Graph(32, tuple((u, v, 1.0) for u, v in sorted(arcs)), directed=True)
        res = sv_sparsify(
            g, eps=2.0, phi_target=0.25, options=SparsifyOptions(c_support=1.25)
        )
        assert res.pieces >= 2
        assert res.graph.m < g.m
        assert res.report.kernel_ok
        assert res.report.degree_max_dev <= 1e-6
