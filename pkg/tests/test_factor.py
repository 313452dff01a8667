import numpy as np
import pytest

from conftest import dense_j, random_spd
from sympeig import (
    NumericalFailure,
    RankDeficientError,
    SpdOperator,
    canonical_frame,
    construct_stationary_point,
    gen_prescribed,
    grad,
    j_left,
    poisson,
    random_orthosymplectic,
    reference,
    restart_point,
    srr,
    ssvd,
    symplectic_gram,
    williamson_small,
)


class TestSsvd:
    def test_canonical_frame(self):
        x = canonical_frame(6, 2)
        fac = ssvd(x)
        np.testing.assert_allclose(fac.sigma, np.ones(4), atol=1e-14)
        # T is orthosymplectic: orthogonal and J-preserving
        np.testing.assert_allclose(fac.t.T @ fac.t, np.eye(4), atol=1e-13)
        np.testing.assert_allclose(fac.t.T @ poisson(2) @ fac.t, poisson(2), atol=1e-13)
        np.testing.assert_allclose(fac.s @ np.diag(fac.sigma) @ fac.t.T, x, atol=1e-13)

    def test_scaled_identity_pair(self):
        # n = p = 1, X = 2 I: X^T J X = 4 J so sigma = 2
        fac = ssvd(2.0 * np.eye(2))
        np.testing.assert_allclose(fac.sigma, [2.0, 2.0], atol=1e-14)
        gram = symplectic_gram(fac.s)
        np.testing.assert_allclose(gram, poisson(1), atol=1e-13)

    def test_random_input_invariants(self):
        rng = np.random.default_rng(0)
        n, p = 50, 5
        x = rng.standard_normal((2 * n, 2 * p))
        fac = ssvd(x)
        recon = fac.s @ np.diag(fac.sigma) @ fac.t.T
        assert np.linalg.norm(recon - x) <= 1e-10 * np.linalg.norm(x)
        assert np.linalg.norm(symplectic_gram(fac.s) - poisson(p)) <= 1e-10
        assert np.linalg.norm(fac.t.T @ fac.t - np.eye(2 * p)) <= 1e-12
        assert np.all(np.diff(fac.sigma[:p]) >= 0)
        np.testing.assert_array_equal(fac.sigma[:p], fac.sigma[p:])

    def test_rank_deficient_rejected(self):
        x = canonical_frame(5, 2)
        x[:, 1] = x[:, 0]  # duplicate a column: one symplectic direction lost
        x[:, 3] = x[:, 2]
        with pytest.raises(RankDeficientError) as info:
            ssvd(x)
        assert info.value.deficient >= 1

    def test_zero_basis_rejected(self):
        with pytest.raises(RankDeficientError):
            ssvd(np.zeros((8, 4)))

    def test_odd_columns_rejected(self):
        with pytest.raises(ValueError):
            ssvd(np.zeros((8, 3)))

    def test_residual_bound_diagnostic(self):
        # ||A S - J_n S L|| <= sqrt(2 p d_n / sigma_min(X^T A X)) ||grad||
        # with L = beta (Sigma^3 J_p T^T - Sigma T^T J_p) T Sigma^(-1)
        rng = np.random.default_rng(1)
        n, p, beta = 12, 3, 9.0
        a = random_spd(rng, 2 * n, cond=30.0)
        op = SpdOperator.from_dense(a)
        d_n = reference(op).d[-1]
        for _ in range(5):
            x = rng.standard_normal((2 * n, 2 * p))
            fac = ssvd(x)
            jp = poisson(p)
            sig = np.diag(fac.sigma)
            left = np.diag(fac.sigma**3) @ jp @ fac.t.T
            right = sig @ fac.t.T @ jp
            ell = beta * (left - right) @ fac.t @ np.diag(1.0 / fac.sigma)
            lhs = np.linalg.norm(a @ fac.s - j_left(fac.s @ ell))
            xax = x.T @ (a @ x)
            sigma_min = np.linalg.eigvalsh(0.5 * (xax + xax.T))[0]
            gnorm = np.linalg.norm(grad(op, x, beta).gradient)
            assert lhs <= np.sqrt(2 * p * d_n / sigma_min) * gnorm * (1 + 1e-12)


class TestWilliamsonSmall:
    def test_identity(self):
        wf = williamson_small(np.eye(8))
        np.testing.assert_allclose(wf.d, np.ones(4), atol=1e-13)
        np.testing.assert_allclose(wf.s.T @ wf.s, np.eye(8), atol=1e-12)
        np.testing.assert_allclose(wf.s.T @ dense_j(4) @ wf.s, dense_j(4), atol=1e-12)

    def test_hand_checked_two_by_two(self):
        wf = williamson_small(np.diag([2.0, 8.0]))
        np.testing.assert_allclose(wf.d, [4.0], atol=1e-12)
        m = np.diag([2.0, 8.0])
        np.testing.assert_allclose(wf.s.T @ m @ wf.s, np.diag([4.0, 4.0]), atol=1e-12)

    def test_random_input_invariants(self):
        rng = np.random.default_rng(2)
        k = 10
        m = random_spd(rng, 2 * k)
        wf = williamson_small(m)
        target = np.diag(np.concatenate([wf.d, wf.d]))
        m_norm = np.linalg.norm(m)
        assert np.linalg.norm(wf.s.T @ m @ wf.s - target) <= 1e-9 * m_norm
        assert np.linalg.norm(wf.s.T @ dense_j(k) @ wf.s - dense_j(k)) <= 1e-9
        assert np.all(np.diff(wf.d) >= 0)

    def test_matches_imaginary_eigenvalues(self):
        rng = np.random.default_rng(3)
        k = 8
        m = random_spd(rng, 2 * k)
        wf = williamson_small(m)
        imag = np.abs(np.linalg.eigvals(dense_j(k) @ m).imag)
        expected = np.sort(imag)[::2]  # each d appears as a +/- pair
        np.testing.assert_allclose(wf.d, expected, rtol=1e-10)

    def test_not_positive_definite_rejected(self):
        with pytest.raises(NumericalFailure):
            williamson_small(-np.eye(4))

    def test_odd_dimension_rejected(self):
        with pytest.raises(ValueError):
            williamson_small(np.eye(3))


class TestSrr:
    def test_identity_operator(self):
        op = SpdOperator.from_dense(np.eye(12))
        s_fin, d_fin = srr(op, canonical_frame(6, 2))
        np.testing.assert_allclose(d_fin, np.ones(2), atol=1e-13)
        target = np.diag(np.concatenate([d_fin, d_fin]))
        np.testing.assert_allclose(s_fin.T @ s_fin, target, atol=1e-12)

    def test_recovers_eigenvalues_from_minimizer(self):
        op, ref = gen_prescribed(10, seed=4)
        p, beta = 3, 25.0
        n = ref.d.size
        shat = ref.s_full[:, np.r_[0:p, n : n + p]]
        x = construct_stationary_point(shat, ref.d[:p], p, None, beta)
        s_fin, d_fin = srr(op, x)
        np.testing.assert_allclose(d_fin, ref.d[:p], rtol=1e-10)
        proj = s_fin.T @ op.apply(s_fin)
        target = np.diag(np.concatenate([d_fin, d_fin]))
        assert np.linalg.norm(proj - target) <= 1e-9 * np.linalg.norm(proj)

    def test_right_factor_invariance(self):
        op, ref = gen_prescribed(9, seed=5)
        p, beta = 2, 30.0
        n = ref.d.size
        shat = ref.s_full[:, np.r_[0:p, n : n + p]]
        rng = np.random.default_rng(6)
        t = random_orthosymplectic(p, rng)
        _, d_plain = srr(op, construct_stationary_point(shat, ref.d[:p], p, None, beta))
        _, d_mixed = srr(op, construct_stationary_point(shat, ref.d[:p], p, t, beta))
        np.testing.assert_allclose(d_mixed, d_plain, rtol=1e-10)


class TestRestartPoint:
    def test_small_eigenvalues_leave_basis_unscaled(self):
        rng = np.random.default_rng(7)
        s = rng.standard_normal((10, 4))
        out = restart_point(s, [1e-9, 1e-9], 1.0)
        np.testing.assert_allclose(out, s, rtol=1e-8)

    def test_half_beta_scaling(self):
        s = np.ones((6, 4))
        out = restart_point(s, [5.0, 5.0], 10.0)
        np.testing.assert_allclose(out, s / np.sqrt(2.0), rtol=1e-15)

    def test_clamps_negative_diagonal(self):
        s = np.ones((4, 2))
        out = restart_point(s, [100.0], 10.0)  # 1 - d/beta = -9, clamped
        np.testing.assert_allclose(out, np.sqrt(1e-12) * s)

    def test_restart_is_stationary_for_exact_pairs(self):
        op, ref = gen_prescribed(10, seed=8)
        p, beta = 3, 40.0
        n = ref.d.size
        s = ref.s_full[:, np.r_[0:p, n : n + p]]
        x = restart_point(s, ref.d[:p], beta)
        g = grad(op, x, beta).gradient
        assert np.linalg.norm(g) <= 1e-9 * np.linalg.norm(op.densify())

    def test_bad_beta_rejected(self):
        with pytest.raises(ValueError):
            restart_point(np.ones((4, 2)), [1.0], 0.0)


class TestRandomOrthosymplectic:
    def test_orthogonal_and_symplectic(self):
        rng = np.random.default_rng(9)
        for p in (1, 3, 7):
            t = random_orthosymplectic(p, rng)
            assert np.linalg.norm(t.T @ t - np.eye(2 * p)) <= 1e-12
            assert np.linalg.norm(t.T @ poisson(p) @ t - poisson(p)) <= 1e-12

    def test_deterministic_per_seed(self):
        a = random_orthosymplectic(4, np.random.default_rng(10))
        b = random_orthosymplectic(4, np.random.default_rng(10))
        np.testing.assert_array_equal(a, b)
