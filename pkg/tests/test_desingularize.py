import numpy as np
import pytest

from fraclap.desingularize import (
    apply_Q,
    apply_Qt,
    correct_sum,
    projected_operator,
    rank_one_operator,
    shifted_solve_safe,
    split_b,
)
from fraclap.graphs import cycle_digraph, path_graph, random_strong_digraph
from fraclap.krylov import StoppingRule, krylov_fAb, laplacian_operator, pole_sequence
from fraclap.laplacian import build_laplacian
from fraclap.matfun import FracExpParams, dense_frac_exp, dense_frac_pow
from fraclap.solver import ensure_nullvec
from fraclap.spectral import SpectralExtent, estimate_extents

P_HALF = FracExpParams(1.0, 0.5)


def shifted_dense(sys, theta):
    z = ensure_nullvec(sys)
    return sys.Lt.to_dense() + theta * np.outer(z, np.ones(sys.n))


class TestShiftedSolveSafe:
    def test_k2_hand_inverse(self):
        sys = build_laplacian(path_graph(2))
        z = ensure_nullvec(sys)
        x = shifted_solve_safe(sys, z, 1.0, -1.0, np.array([1.0, 0.0]), verify=True)
        assert np.allclose(x, [5.0 / 12.0, 1.0 / 12.0], atol=1e-14)

    def test_z_is_theta_eigenvector(self, rng):
        sys = build_laplacian(random_strong_digraph(12, 36, rng))
        z = ensure_nullvec(sys)
        for theta, xi in ((1.0, -0.5), (2.0, -3.0)):
            x = shifted_solve_safe(sys, z, theta, xi, z)
            assert np.allclose(x, z / (theta - xi), atol=1e-12)

    def test_requires_negative_pole(self):
        sys = build_laplacian(path_graph(2))
        z = ensure_nullvec(sys)
        with pytest.raises(ValueError):
            shifted_solve_safe(sys, z, 1.0, 0.5, np.ones(2))

    def test_tiny_pole_beats_naive_route(self, rng):
        # dense 20-node digraph, pole 1e-6 from the origin: the safe
        # splitting keeps full accuracy while the textbook rank-one update
        # formula loses at least four digits
        from fraclap.solver import solve

        sys = build_laplacian(random_strong_digraph(20, 300, rng))
        z = ensure_nullvec(sys)
        theta, xi = 1.0, -1e-6
        w = rng.random(20)
        M_shift = shifted_dense(sys, theta) - xi * np.eye(20)
        x_true = np.linalg.solve(M_shift, w)
        x_safe = shifted_solve_safe(sys, z, theta, xi, w)
        phi = solve(sys.shift_factors(xi), w)
        x_naive = phi + theta / (xi * (theta - xi)) * w.sum() * z
        err_safe = np.linalg.norm(x_safe - x_true) / np.linalg.norm(x_true)
        err_naive = np.linalg.norm(x_naive - x_true) / np.linalg.norm(x_true)
        assert err_safe <= 1e-8
        assert err_naive >= 1e4 * err_safe


class TestRankOneOperator:
    def test_apply_ones_balanced(self):
        sys = build_laplacian(cycle_digraph(3))
        ensure_nullvec(sys)
        op = rank_one_operator(sys, 1.0)
        assert np.allclose(op.apply(np.ones(3)), np.ones(3), atol=1e-14)

    def test_spectrum_replaces_zero_by_theta(self, rng):
        n = 10
        sys = build_laplacian(random_strong_digraph(n, 30, rng))
        ensure_nullvec(sys)
        theta = 2.0
        M = shifted_dense(sys, theta)
        lam_m = np.sort_complex(np.linalg.eigvals(M))
        lam_l = np.linalg.eigvals(sys.Lt.to_dense())
        keep = np.abs(lam_l) > 1e-10
        expected = np.sort_complex(np.concatenate([lam_l[keep], [theta]]))
        assert np.allclose(lam_m, expected, atol=1e-8)

    def test_matches_dense_apply(self, rng):
        sys = build_laplacian(random_strong_digraph(15, 45, rng))
        ensure_nullvec(sys)
        op = rank_one_operator(sys, 1.5)
        M = shifted_dense(sys, 1.5)
        v = rng.standard_normal(15)
        assert np.allclose(op.apply(v), M @ v, atol=1e-12)

    def test_requires_null_vector(self):
        sys = build_laplacian(path_graph(2))
        with pytest.raises(ValueError):
            rank_one_operator(sys)

    @pytest.mark.parametrize("theta", [1.0, 3.7])
    def test_function_identity_dense(self, rng, theta):
        # f(L + theta*1*z^T) = f(L) + (f(theta) - f(0)) * 1 z^T
        from helpers import oracle_friendly_digraph

        for _ in range(3):
            n = int(rng.integers(4, 31))
            _, sys = oracle_friendly_digraph(n, 2 * n, rng)
            z = ensure_nullvec(sys)
            Ld = sys.L.to_dense()
            M = Ld + theta * np.outer(np.ones(n), z)
            for fM, fL, ftheta, f0 in [
                (
                    dense_frac_exp(M, P_HALF),
                    dense_frac_exp(Ld, P_HALF),
                    np.exp(-np.sqrt(theta)),
                    1.0,
                ),
                (dense_frac_pow(M, 0.5), dense_frac_pow(Ld, 0.5), np.sqrt(theta), 0.0),
            ]:
                resid = fM - fL - (ftheta - f0) * np.outer(np.ones(n), z)
                assert np.max(np.abs(resid)) <= 1e-10 * np.linalg.norm(fL, np.inf)

    def test_full_pipeline_matches_reference_for_both_shifts(self, rng):
        # end-to-end rank-one runs at theta = 1 and theta = |lambda_n|
        from helpers import oracle_friendly_digraph

        from fraclap.harness import MethodConfig, solve_fractional_diffusion
        from fraclap.matfun import dense_reference
        from fraclap.spectral import estimate_extents

        n = 24
        _, sys = oracle_friendly_digraph(n, 3 * n, rng)
        ext = estimate_extents(sys)
        u0 = np.zeros(n)
        u0[0] = 1.0
        ref = dense_reference(sys, u0, P_HALF)
        for theta in (1.0, ext.lambdaN_abs):
            cfg = MethodConfig("si-geomean", "rank1", theta=theta, max_k=n + 1)
            y, _ = solve_fractional_diffusion(sys, u0, P_HALF, cfg)
            assert np.linalg.norm(y - ref) <= 1e-9 * np.linalg.norm(ref)

    def test_sherman_morrison_identity(self, rng):
        # the rank-one update formula itself, at a benign pole
        n = 15
        sys = build_laplacian(random_strong_digraph(n, 45, rng))
        z = ensure_nullvec(sys)
        theta, xi = 1.0, -1.0
        Lt = sys.Lt.to_dense()
        lhs = np.linalg.inv(Lt + theta * np.outer(z, np.ones(n)) - xi * np.eye(n))
        rhs = np.linalg.inv(Lt - xi * np.eye(n)) + theta / (xi * (theta - xi)) * np.outer(
            z, np.ones(n)
        )
        assert np.max(np.abs(lhs - rhs)) <= 1e-10


class TestQProducts:
    def test_first_row(self):
        out = apply_Qt(np.array([1.0, 0.0, 0.0]))
        assert np.allclose(out, [1 / np.sqrt(3)] * 2, atol=1e-15)

    def test_embed_unit_vector(self):
        out = apply_Q(np.array([1.0, 0.0]))
        assert np.allclose(out, [0.57735027, 0.21132487, -0.78867513], atol=1e-8)
        assert abs(np.linalg.norm(out) - 1.0) <= 1e-14
        assert abs(out.sum()) <= 1e-14

    def test_round_trip(self, rng):
        u = rng.standard_normal(49)
        assert np.max(np.abs(apply_Qt(apply_Q(u)) - u)) <= 1e-13

    def test_orthogonality_identities(self, rng):
        n = 37
        Qd = np.column_stack([apply_Q(col) for col in np.eye(n - 1)])
        assert np.max(np.abs(Qd.T @ Qd - np.eye(n - 1))) <= 1e-13
        proj = np.eye(n) - np.ones((n, n)) / n
        assert np.max(np.abs(Qd @ Qd.T - proj)) <= 1e-13


class TestProjectedOperator:
    def test_k2_reduces_to_scalar_two(self):
        sys = build_laplacian(path_graph(2))
        op = projected_operator(sys)
        assert op.dimension == 1
        assert np.allclose(op.apply(np.array([1.0])), [2.0], atol=1e-14)

    def test_resolvent_identity(self, rng):
        # (Q^T A Q - xi I)^{-1} = Q^T (A - xi I)^{-1} Q
        n = 10
        sys = build_laplacian(random_strong_digraph(n, 20, rng))
        Lt = sys.Lt.to_dense()
        Qd = np.column_stack([apply_Q(col) for col in np.eye(n - 1)])
        xi = -1.0
        lhs = np.linalg.inv(Qd.T @ Lt @ Qd - xi * np.eye(n - 1))
        rhs = Qd.T @ np.linalg.inv(Lt - xi * np.eye(n)) @ Qd
        assert np.max(np.abs(lhs - rhs)) <= 1e-11
        op = projected_operator(sys)
        u = rng.standard_normal(n - 1)
        assert np.allclose(op.shifted_solve(xi, u), lhs @ u, atol=1e-10)

    def test_projected_matrix_nonsingular(self, rng):
        for _ in range(4):
            n = int(rng.integers(3, 31))
            sys = build_laplacian(random_strong_digraph(n, 2 * n, rng))
            Qd = np.column_stack([apply_Q(col) for col in np.eye(n - 1)])
            sv = np.linalg.svd(Qd.T @ sys.Lt.to_dense() @ Qd, compute_uv=False)
            assert sv[-1] > 1e-8


class TestSplitAndCorrect:
    def test_split_basic(self):
        w, beta = split_b(np.array([1.0, 0.0]), np.array([0.5, 0.5]))
        assert beta == 1.0
        assert np.allclose(w, [0.5, -0.5], atol=1e-15)

    def test_split_of_z_is_zero(self, rng):
        z = rng.random(9)
        z /= z.sum()
        w, beta = split_b(z, z)
        assert beta == pytest.approx(1.0)
        assert np.max(np.abs(w)) <= 1e-15

    def test_split_orthogonal_input(self):
        u0 = np.array([0.5, -0.5, 0.0])
        w, beta = split_b(u0, np.ones(3) / 3)
        assert beta == 0.0
        assert np.array_equal(w, u0)

    def test_correct_sum_cases(self):
        z = np.array([0.5, 0.5])
        assert np.allclose(correct_sum(np.array([0.7, 0.2]), z), [0.75, 0.25])
        y = np.array([0.3, 0.7])
        assert np.array_equal(correct_sum(y, z), y)
        assert np.array_equal(correct_sum(np.zeros(2), z), z)


class TestProjectionEquivalence:
    def test_implicit_equals_explicit_iterates(self, rng):
        # identical pole sequences, b orthogonal to the ones vector: the
        # lifted projected iterates coincide with the direct ones
        for _ in range(3):
            n = int(rng.integers(10, 61))
            sys = build_laplacian(random_strong_digraph(n, 2 * n, rng))
            z = ensure_nullvec(sys)
            ext = estimate_extents(sys)
            u0 = np.zeros(n)
            u0[0] = 1.0
            w, _ = split_b(u0, z)
            for kind in ("poly", "si-geomean", "si-time", "eds"):
                poles = pole_sequence(kind, extents=ext, params=P_HALF)
                stop = StoppingRule(max_k=15)
                direct = krylov_fAb(laplacian_operator(sys), w, P_HALF, poles, stop)
                proj = krylov_fAb(projected_operator(sys), apply_Qt(w), P_HALF, poles, stop)
                for yi, yp in zip(direct.iterates, proj.iterates):
                    lifted = apply_Q(yp)
                    rel = np.linalg.norm(yi - lifted) / max(np.linalg.norm(yi), 1e-300)
                    assert rel <= 1e-9

    def test_basis_stays_orthogonal_to_ones(self, rng):
        # the ones-component of each basis vector is preserved (not damped)
        # by the shifted solves, so rounding makes it creep upward slowly;
        # the bound is checked over the first ten steps
        n = 40
        sys = build_laplacian(random_strong_digraph(n, 120, rng))
        z = ensure_nullvec(sys)
        u0 = np.zeros(n)
        u0[0] = 1.0
        w, _ = split_b(u0, z)
        from fraclap.krylov import rational_arnoldi_step, start_state

        op = laplacian_operator(sys)
        state = start_state(op, w, 10)
        poles = pole_sequence("si-geomean", extents=estimate_extents(sys))
        for j in range(1, 10):
            rational_arnoldi_step(state, op, poles.pole(j))
            if state.breakdown:
                break
        sums = np.ones(n) @ state.basis()
        assert np.max(np.abs(sums)) <= 1e-10
