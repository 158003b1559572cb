"""Kernel addition, co-training, CCA, and kernel CCA."""

import numpy as np
import pytest

from synthdata import compatible_view_kernels, incompatible_view_kernels
from viewfuse.fusion import (
    CcaModel,
    cca,
    cotrain,
    embedding_similarity,
    kcca,
    mkl_add,
    subspace_similarity,
)
from viewfuse.kernels import KernelMatrix, normalize_kernel, poly_kernel


def km(M, names=None):
    M = np.asarray(M, dtype=float)
    names = names or tuple(f"u{i}" for i in range(M.shape[0]))
    return KernelMatrix((M + M.T) / 2, tuple(names))


def block_kernel(sizes):
    n = sum(sizes)
    K = np.zeros((n, n))
    start = 0
    for s in sizes:
        K[start:start + s, start:start + s] = 1.0
        start += s
    return K


class TestMklAdd:
    def test_hand_case(self):
        out = mkl_add([km(np.eye(2), ("a", "b")), km(np.ones((2, 2)), ("a", "b"))])
        assert out.K.tolist() == [[2, 1], [1, 2]]

    def test_identical_views_degenerate(self, rng):
        K = poly_kernel(rng.normal(size=(5, 3)), 2)
        doubled = mkl_add([K, K])
        assert np.allclose(doubled.K, 2 * normalize_kernel(K, "trace").K)
        assert np.allclose(
            normalize_kernel(doubled, "cosine").K,
            normalize_kernel(K, "cosine").K,
        )

    def test_sum_is_psd(self, rng):
        a = poly_kernel(rng.normal(size=(6, 2)), 1)
        b = poly_kernel(rng.normal(size=(6, 4)), 3)
        mkl_add([a, b]).validate()

    def test_commutative_associative(self, rng):
        ks = [poly_kernel(rng.normal(size=(5, 3)), d) for d in (1, 2, 3)]
        abc = mkl_add(ks).K
        cba = mkl_add(ks[::-1]).K
        assert np.allclose(abc, cba, atol=1e-12)
        nested = mkl_add([normalize_kernel(mkl_add(ks[:2]), "trace"), ks[2]])
        # nesting changes scale, not definiteness; plain order invariance holds
        assert np.allclose(abc, cba, atol=1e-12)

    def test_mismatched_units_rejected(self):
        with pytest.raises(ValueError, match="unit"):
            mkl_add([km(np.eye(2), ("a", "b")), km(np.eye(2), ("x", "y"))])


class TestCotrain:
    def test_identical_views_stationary_from_iteration_one(self):
        K = km(block_kernel([2, 2]))
        emb = cotrain([K, K], c=2, iters=50, tol=1e-6)
        assert emb.converged and emb.iterations_run == 1
        assert emb.drift[0][0] < 1e-6

    def test_identical_views_match_single_view_embedding(self):
        K = km(block_kernel([3, 3]))
        emb = cotrain([K, K], c=2, iters=50, tol=1e-6)
        # both views produce the same embedding, and fused = [U, U]
        assert np.allclose(emb.per_view[0], emb.per_view[1], atol=1e-9)
        assert np.allclose(emb.fused, np.hstack([emb.per_view[0]] * 2), atol=1e-12)

    def test_two_block_recovery(self, rng):
        base = block_kernel([2, 2])
        noisy = [km(base + 0.02 * rng.normal(size=(4, 4))) for _ in range(2)]
        emb = cotrain(noisy, c=2, iters=50, tol=1e-6)
        F = emb.fused
        within = np.linalg.norm(F[0] - F[1])
        across = min(np.linalg.norm(F[0] - F[2]), np.linalg.norm(F[0] - F[3]))
        assert within < 0.2 < across

    def test_iters_zero_gives_raw_embeddings(self):
        K1, K2 = km(block_kernel([2, 2])), km(block_kernel([1, 3]))
        emb = cotrain([K1, K2], c=2, iters=0)
        assert emb.iterations_run == 0 and emb.drift == []
        single = cotrain([K1, K1], c=2, iters=0)
        assert np.allclose(emb.per_view[0], single.per_view[0])

    def test_compatible_views_converge(self):
        kernels = compatible_view_kernels(seed=3)
        emb = cotrain(kernels, c=4, iters=50, tol=1e-6)
        assert emb.converged and emb.iterations_run <= 50

    def test_incompatible_views_do_not_abort(self):
        kernels = incompatible_view_kernels(seed=4)
        emb = cotrain(kernels, c=4, iters=50, tol=1e-6)
        assert not emb.converged and emb.iterations_run == 50
        assert len(emb.drift) == 50
        assert np.isfinite(emb.fused).all()

    def test_deterministic(self):
        kernels = compatible_view_kernels(seed=5)
        a = cotrain(kernels, c=4, iters=10, tol=0.0)
        b = cotrain(kernels, c=4, iters=10, tol=0.0)
        assert np.array_equal(a.fused, b.fused)

    def test_c_bounds(self):
        K = km(block_kernel([2, 2]))
        with pytest.raises(ValueError):
            cotrain([K, K], c=4)
        with pytest.raises(ValueError):
            cotrain([K, K], c=1)

    def test_info_view_selects_single_view_coordinates(self):
        kernels = compatible_view_kernels(seed=6)
        emb = cotrain(kernels, c=4, iters=5, tol=0.0, info_view=1)
        assert emb.coordinates.shape == emb.per_view[1].shape
        assert np.array_equal(emb.coordinates, emb.per_view[1])
        emb_all = cotrain(kernels, c=4, iters=5, tol=0.0)
        assert emb_all.coordinates.shape[1] == 4 * len(kernels)


class TestCca:
    def test_identical_views(self, rng):
        X = rng.normal(size=(40, 3))
        model = cca(X, X, 2)
        assert model.correlations[0] == pytest.approx(1.0, abs=1e-6)

    def test_negated_view(self, rng):
        X = rng.normal(size=(40, 3))
        model = cca(X, -X, 2)
        assert model.correlations[0] == pytest.approx(1.0, abs=1e-6)

    def test_planted_latent(self, rng):
        n = 500
        z = rng.normal(size=n)
        rho = 0.8
        sigma = np.sqrt((1 - rho) / rho)
        X1 = np.column_stack([z + sigma * rng.normal(size=n), rng.normal(size=n)])
        X2 = np.column_stack([z + sigma * rng.normal(size=n), rng.normal(size=n)])
        model = cca(X1, X2, 2)
        assert abs(model.correlations[0] - rho) < 0.05
        assert model.correlations[1] < 0.2

    def test_coordinates_uncorrelated_across_components(self, rng):
        X1 = rng.normal(size=(200, 4))
        X2 = X1 @ rng.normal(size=(4, 3)) + 0.5 * rng.normal(size=(200, 3))
        model = cca(X1, X2, 3)
        cross = model.coords[0].T @ model.coords[1] / (200 - 1)
        off = cross - np.diag(np.diag(cross))
        assert np.abs(off).max() < 1e-6

    def test_small_n_rejected(self):
        with pytest.raises(ValueError):
            cca(np.zeros((2, 2)), np.zeros((2, 2)), 1)

    def test_d_reduced_with_warning(self, rng):
        X1 = rng.normal(size=(30, 2))
        X2 = rng.normal(size=(30, 5))
        with pytest.warns(UserWarning, match="reduc"):
            model = cca(X1, X2, 4)
        assert model.d == 2


class TestKcca:
    def test_matches_cca_for_linear_kernels(self, rng):
        X1 = rng.normal(size=(60, 3))
        X2 = X1 @ rng.normal(size=(3, 4)) + 0.3 * rng.normal(size=(60, 4))
        reference = cca(X1, X2, 2)
        names = tuple(f"u{i}" for i in range(60))
        kernel_model = kcca(
            [km(X1 @ X1.T, names), km(X2 @ X2.T, names)], 2, kappa=1e-8
        )
        assert np.allclose(
            kernel_model.correlations, reference.correlations, atol=1e-5
        )
        for v in range(2):
            for j in range(2):
                a = kernel_model.coords[v][:, j]
                b = reference.coords[v][:, j]
                sign = np.sign(a @ b)
                assert np.allclose(sign * a, b, atol=1e-5)

    def test_identical_kernels(self, rng):
        K = poly_kernel(rng.normal(size=(30, 4)), 1)
        model = kcca([K, K], 2, kappa=1e-6)
        assert model.correlations[0] == pytest.approx(1.0, abs=1e-4)

    def test_huge_kappa_kills_correlations(self, rng):
        X1, X2 = rng.normal(size=(40, 3)), rng.normal(size=(40, 3))
        names = tuple(f"u{i}" for i in range(40))
        model = kcca([km(X1 @ X1.T, names), km(X2 @ X2.T, names)], 2, kappa=1e6)
        assert np.all(model.correlations < 1e-3)

    def test_three_views_identical(self, rng):
        K = poly_kernel(rng.normal(size=(25, 4)), 1)
        model = kcca([K, K, K], 2, kappa=1e-6)
        assert model.correlations[0] == pytest.approx(1.0, abs=1e-3)
        assert np.all(model.correlations <= 1 + 1e-6)

    def test_persistence_round_trip(self, rng, tmp_path):
        X1, X2 = rng.normal(size=(20, 3)), rng.normal(size=(20, 4))
        names = tuple(f"u{i}" for i in range(20))
        model = kcca([km(X1 @ X1.T, names), km(X2 @ X2.T, names)], 2)
        model.save(tmp_path / "m")
        back = CcaModel.load(tmp_path / "m")
        assert np.array_equal(back.shared, model.shared)
        assert np.array_equal(back.correlations, model.correlations)
        for v in range(2):
            assert np.array_equal(back.U[v], model.U[v])
            assert np.array_equal(back.W[v], model.W[v])
        # byte-identical re-save
        back.save(tmp_path / "m2")
        for f in sorted((tmp_path / "m").iterdir()):
            assert (tmp_path / "m2" / f.name).read_bytes() == f.read_bytes()


class TestPermutationInvariance:
    def test_outputs_follow_unit_relabeling(self, rng):
        n = 16
        names = tuple(f"u{i:02d}" for i in range(n))
        X1, X2 = rng.normal(size=(n, 4)), rng.normal(size=(n, 3))
        perm = rng.permutation(n)
        pnames = tuple(names[i] for i in perm)

        k1, k2 = km(X1 @ X1.T, names), km(X2 @ X2.T, names)
        p1 = km((X1 @ X1.T)[np.ix_(perm, perm)], pnames)
        p2 = km((X2 @ X2.T)[np.ix_(perm, perm)], pnames)

        added = mkl_add([k1, k2]).K
        added_p = mkl_add([p1, p2]).K
        assert np.allclose(added_p, added[np.ix_(perm, perm)], atol=1e-12)

        sim = embedding_similarity(cotrain([k1, k2], c=3, iters=5, tol=0.0)).K
        sim_p = embedding_similarity(cotrain([p1, p2], c=3, iters=5, tol=0.0)).K
        assert np.allclose(sim_p, sim[np.ix_(perm, perm)], atol=1e-6)

        sub = subspace_similarity(kcca([k1, k2], 2))
        sub_p = subspace_similarity(kcca([p1, p2], 2))
        assert np.allclose(sub_p.K, sub.K[np.ix_(perm, perm)], atol=1e-6)
