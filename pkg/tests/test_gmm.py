import numpy as np
import pytest

from conftest import make_hetero_dataset, make_vm, pipeline_moments
from gals import (
    Dataset,
    NumericalError,
    build_an_reference,
    build_moment_system,
    estimate_omega,
    fit_all,
    fit_ols,
    invert_block,
    solve_gals,
)
from gals.gmm import MomentSystem


class TestEstimateOmega:
    def test_single_observation_blocks(self):
        d = Dataset(y=np.array([2.0]), X=np.array([[1.0]]), column_names=["x"])
        vm = make_vm([4.0])
        Omega = estimate_omega(d, np.array([2.0]), vm)
        assert np.allclose(Omega, [[4.0, 1.0], [1.0, 0.25]])

    def test_unit_variances_collapse_blocks(self):
        rng = np.random.default_rng(10)
        d = make_hetero_dataset(10, n=40, p=2)
        resid = rng.standard_normal(40)
        Omega = estimate_omega(d, resid, make_vm(np.ones(40)))
        p = d.p
        assert np.allclose(Omega[:p, :p], Omega[:p, p:])
        assert np.allclose(Omega[:p, :p], Omega[p:, p:])
        sv = np.linalg.svd(Omega, compute_uv=False)
        assert sv[-1] <= 1e-12 * sv[0]  # rank <= p by construction

    def test_matches_brute_force_sums(self):
        rng = np.random.default_rng(50)
        n, p = 50, 2
        d = make_hetero_dataset(50, n=n, p=p)
        resid = rng.standard_normal(n)
        sigma2 = rng.uniform(0.5, 2.0, n)
        Omega = estimate_omega(d, resid, make_vm(sigma2))
        # oracle: naive per-entry double loop
        expected = np.zeros((2 * p, 2 * p))
        for j in range(p):
            for l in range(p):
                s11 = s12 = s22 = 0.0
                for i in range(n):
                    xx = d.X[i, j] * d.X[i, l] * resid[i] ** 2
                    s11 += xx
                    s12 += xx / sigma2[i]
                    s22 += xx / sigma2[i] ** 2
                expected[j, l] = s11 / n
                expected[j, p + l] = expected[p + j, l] = s12 / n
                expected[p + j, p + l] = s22 / n
        assert np.allclose(Omega, expected, rtol=1e-10)

    def test_symmetric_and_psd_on_random_samples(self):
        for seed in range(5):
            d, ols, vm, ms = pipeline_moments(seed, n=80)
            Omega = ms.Omega_hat
            assert np.array_equal(Omega, Omega.T)
            eig = np.linalg.eigvalsh(Omega)
            assert eig.min() >= -1e-10 * max(eig.max(), 1.0)


class TestInvertBlock:
    def test_identity(self):
        W, info = invert_block(np.eye(2))
        assert np.allclose(W, np.eye(2))
        assert not info.degenerate and info.ridge_lambda == 0.0

    def test_singular_schur_flags_degenerate(self):
        W, info = invert_block(np.array([[4.0, 1.0], [1.0, 0.25]]))
        assert info.degenerate and W is None

    def test_matches_dense_inverse(self):
        rng = np.random.default_rng(66)
        p = 3
        A = rng.standard_normal((2 * p, 2 * p))
        Omega = A @ A.T + 0.5 * np.eye(2 * p)
        W, info = invert_block(Omega)
        assert not info.degenerate
        direct = np.linalg.inv(Omega)
        assert np.allclose(W, direct, rtol=1e-10)
        assert np.abs(W @ Omega - np.eye(2 * p)).max() <= 1e-8

    def test_asymmetric_input_rejected(self):
        M = np.array([[1.0, 2.0], [0.0, 1.0]])
        with pytest.raises(ValueError, match="symmetric"):
            invert_block(M)

    def test_borderline_conditioning_gets_ridged(self):
        # near-cancelling Schur complement in the soft band: regularized,
        # not degenerate, and the ridge is recorded
        eps = 1e-13
        Omega = np.array([[1.0, 1.0], [1.0, 1.0 + eps]])
        W, info = invert_block(Omega)
        assert not info.degenerate
        assert info.ridge_lambda > 0.0
        ridged = Omega + info.ridge_lambda * np.eye(2)
        assert np.abs(W @ ridged - np.eye(2)).max() <= 1e-6

    def test_machine_level_collapse_is_degenerate(self):
        eps = 1e-16
        Omega = np.array([[1.0, 1.0], [1.0, 1.0 + eps]])
        W, info = invert_block(Omega)
        assert info.degenerate and W is None
        assert info.ridge_lambda == 0.0


class TestMomentSystem:
    def test_constant_variances_degenerate(self):
        d = make_hetero_dataset(3, n=50)
        resid = fit_ols(d).residuals
        ms = build_moment_system(d, resid, make_vm(np.ones(50)))
        assert ms.degenerate

    def test_scalar_jacobian_values(self):
        d = Dataset(
            y=np.array([1.0, 2.0, 3.0]),
            X=np.ones((3, 1)),
            column_names=["const"],
        )
        vm = make_vm([1.0, 2.0, 4.0])
        ms = build_moment_system(d, np.array([0.1, -0.2, 0.1]), vm)
        assert np.isclose(ms.G_hat[0, 0], 1.0)
        assert np.isclose(ms.G_hat[1, 0], 7.0 / 12.0)

    def test_matches_naive_loops(self):
        rng = np.random.default_rng(21)
        n = 100
        d = make_hetero_dataset(21, n=n, p=2)
        resid = rng.standard_normal(n)
        sigma2 = rng.uniform(0.5, 3.0, n)
        ms = build_moment_system(d, resid, make_vm(sigma2))
        p = d.p
        G = np.zeros((2 * p, p))
        m = np.zeros(2 * p)
        for i in range(n):
            xi = d.X[i]
            G[:p] += np.outer(xi, xi) / n
            G[p:] += np.outer(xi, xi) / sigma2[i] / n
            m[:p] += xi * d.y[i] / n
            m[p:] += xi * d.y[i] / sigma2[i] / n
        assert np.allclose(ms.G_hat, G, rtol=1e-10)
        assert np.allclose(ms.m_y, m, rtol=1e-10)


class TestSolve:
    def test_identity_weight_reduces_to_stacked_least_squares(self):
        from dataclasses import replace

        _, _, _, ms = pipeline_moments(17, n=80)
        ms_id = replace(ms, W=np.eye(2 * ms.p), ridge_lambda=0.0)
        beta = solve_gals(ms_id)
        expected, *_ = np.linalg.lstsq(ms.G_hat, ms.m_y, rcond=None)
        assert np.allclose(beta, expected, rtol=1e-9)

    def test_near_interpolation(self):
        rng = np.random.default_rng(40)
        n = 60
        x = rng.standard_normal(n)
        y = 1.0 + 2.0 * x + 1e-10 * rng.standard_normal(n)
        from gals import build_dataset

        d = build_dataset(y, x.reshape(-1, 1))
        fits = fit_all(d)
        assert np.allclose(fits["gals"].beta_hat, [1.0, 2.0], atol=1e-8)

    def test_degenerate_system_refused(self):
        d = make_hetero_dataset(3, n=50)
        resid = fit_ols(d).residuals
        ms = build_moment_system(d, resid, make_vm(np.ones(50)))
        with pytest.raises(NumericalError, match="degenerate"):
            solve_gals(ms)


class TestReferenceForm:
    def test_symmetry(self):
        for seed in range(5):
            d, _, _, ms = pipeline_moments(seed + 100, n=60)
            A, _ = build_an_reference(d, ms)
            assert np.abs(A - A.T).max() <= 1e-12 * np.abs(A).max()

    def test_two_point_hand_case(self):
        # p=1, n=2, X = (1, 1)', D = diag(1, 1/2), fixed 2x2 weight
        d = Dataset(y=np.array([1.0, 2.0]), X=np.ones((2, 1)), column_names=["c"])
        w11, w12, w22 = 2.0, 0.3, 1.0
        W = np.array([[w11, w12], [w12, w22]])
        ms = MomentSystem(
            G_hat=np.array([[1.0], [0.75]]),
            m_y=np.array([1.5, 1.0]),
            Omega_hat=np.eye(2),
            W=W,
            degenerate=False,
            cond_omega=1.0,
            ridge_lambda=0.0,
            inv_sigma2=np.array([1.0, 0.5]),
            n=2,
            p=1,
        )
        A, beta = build_an_reference(d, ms)
        # scalar expansion: A = (W11 J + W12 J D + W12 D J + W22 D J D) / n
        # with J the 2x2 all-ones matrix and D = diag(1, 1/2)
        a00 = 0.5 * (w11 + w12 * 1.0 + w12 * 1.0 + w22 * 1.0)
        a01 = 0.5 * (w11 + w12 * 0.5 + w12 * 1.0 + w22 * 0.5)
        a10 = 0.5 * (w11 + w12 * 1.0 + w12 * 0.5 + w22 * 0.5)
        a11 = 0.5 * (w11 + w12 * 0.5 + w12 * 0.5 + w22 * 0.25)
        assert np.allclose(A, [[a00, a01], [a10, a11]], rtol=1e-14)
        X = d.X
        expected_beta = np.linalg.solve(X.T @ A @ X, X.T @ A @ d.y)
        assert np.allclose(beta, expected_beta, rtol=1e-14)

    def test_agrees_with_stacked_solve(self):
        for seed in range(30):
            d, _, _, ms = pipeline_moments(seed + 300, n=80, p=(seed % 3) + 2)
            if ms.degenerate:
                continue
            beta_fast = solve_gals(ms)
            _, beta_ref = build_an_reference(d, ms)
            denom = np.abs(beta_ref).max()
            assert np.abs(beta_fast - beta_ref).max() <= 1e-8 * max(denom, 1.0)

    def test_large_sample_guard(self):
        d, _, _, ms = pipeline_moments(1, n=80)
        big = Dataset(
            y=np.zeros(501), X=np.ones((501, 1)), column_names=["c"]
        )
        with pytest.raises(ValueError, match="n <= 500"):
            build_an_reference(big, ms)


def test_pipeline_scale_equivariance():
    d = make_hetero_dataset(123, n=150)
    fits1 = fit_all(d)
    c = 3.0
    d2 = Dataset(y=c * d.y, X=d.X, column_names=d.column_names)
    fits2 = fit_all(d2)
    vm = fits2["gals"].variance_model
    assert vm.floor_applied == 0 and vm.clamp_applied == 0
    assert np.allclose(fits2["gals"].beta_hat, c * fits1["gals"].beta_hat, rtol=1e-8)


def test_block_inverse_identity_on_pipeline_systems():
    for seed in range(10):
        _, _, _, ms = pipeline_moments(seed + 700, n=100)
        if ms.degenerate:
            continue
        eye = np.eye(2 * ms.p)
        assert np.abs(ms.W @ ms.Omega_hat - eye).max() <= 1e-8
