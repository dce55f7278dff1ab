import numpy as np
import pytest

from lrhankel import (
    DenseMaterializationError,
    LinearOperator,
    LowRankFactors,
    SvdConvergenceError,
    dense_limit,
    lowrank_matvec,
    project_rank,
    truncated_svd,
)
from lrhankel.lowrank import adjoint_mismatch, lowrank_adjoint_matvec, lowrank_dense


def dense_operator(A):
    A = np.asarray(A, dtype=np.complex128)
    return LinearOperator(
        n=A.shape[0],
        apply=lambda v: A @ v,
        apply_adjoint=lambda v: A.conj().T @ v,
        materialize=lambda: A,
    )


def random_spectrum_matrix(n, rng, decay=0.75):
    """Random matrix with well-separated singular values (no degenerate gaps)."""
    U, _ = np.linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    V, _ = np.linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    s = decay ** np.arange(n) * 10.0
    return (U * s) @ V.conj().T


class TestFactors:
    def test_zero_factors(self):
        f = LowRankFactors.zero(4)
        assert f.rank == 0
        assert not lowrank_matvec(f, np.ones(4)).any()

    def test_validation(self):
        with pytest.raises(ValueError, match="shapes"):
            LowRankFactors(3, np.zeros((3, 2)), np.zeros(1), np.zeros((3, 2)))
        with pytest.raises(ValueError, match="nonincreasing"):
            LowRankFactors(3, np.zeros((3, 2)), [1.0, 2.0], np.zeros((3, 2)))
        with pytest.raises(ValueError, match="nonincreasing"):
            LowRankFactors(3, np.zeros((3, 1)), [-1.0], np.zeros((3, 1)))

    def test_storage_is_linear_in_n(self):
        n, r = 5001, 31
        f = LowRankFactors(n, np.zeros((n, r)), np.zeros(r), np.zeros((n, r)))
        assert f.storage_nbytes() == 2 * n * r * 16 + r * 8
        assert f.storage_nbytes() < 0.02 * n * n * 16

    def test_elementary_outer_product(self):
        f = LowRankFactors(3, np.eye(3)[:, :1], [2.0], np.eye(3)[:, 1:2])
        assert np.allclose(lowrank_matvec(f, np.eye(3)[1]), [2, 0, 0])

    @pytest.mark.parametrize("seed", range(5))
    def test_matvec_matches_dense(self, seed):
        rng = np.random.default_rng(seed)
        A = random_spectrum_matrix(6, rng)
        U, s, Vh = np.linalg.svd(A)
        f = LowRankFactors(6, U[:, :2], s[:2], Vh[:2].conj().T)
        dense = lowrank_dense(f)
        v = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        assert np.linalg.norm(lowrank_matvec(f, v) - dense @ v) <= 1e-12 * np.linalg.norm(dense @ v)
        assert np.linalg.norm(
            lowrank_adjoint_matvec(f, v) - dense.conj().T @ v
        ) <= 1e-12 * np.linalg.norm(dense.conj().T @ v)

    def test_dense_guard(self):
        f = LowRankFactors.zero(10)
        with dense_limit(5):
            with pytest.raises(DenseMaterializationError):
                lowrank_dense(f)


class TestTruncatedSvd:
    def test_diagonal_example(self):
        op = dense_operator(np.diag([3.0, 2.0, 1.0]))
        f = truncated_svd(op, 2)
        assert np.allclose(f.sigma, [3, 2])
        # singular vectors are coordinate axes up to unit phase
        approx = lowrank_dense(f)
        assert np.allclose(approx, np.diag([3.0, 2.0, 0.0]), atol=1e-12)

    def test_zero_operator(self):
        op = dense_operator(np.zeros((5, 5)))
        assert truncated_svd(op, 3).rank == 0
        with dense_limit(0):
            assert truncated_svd(op, 3).rank == 0

    def test_rejects_bad_rank(self):
        op = dense_operator(np.eye(3))
        with pytest.raises(ValueError):
            truncated_svd(op, 0)
        with pytest.raises(ValueError):
            truncated_svd(op, 4)

    @pytest.mark.parametrize("seed", range(8))
    def test_matches_dense_svd_oracle(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(6, 33))
        r = int(rng.integers(1, 5))
        A = random_spectrum_matrix(n, rng)
        U, s, Vh = np.linalg.svd(A)
        oracle = (U[:, :r] * s[:r]) @ Vh[:r]
        with dense_limit(0):  # force the iterative path
            f = truncated_svd(dense_operator(A), r, tol=1e-12, seed=seed)
        assert np.allclose(f.sigma, s[:r], rtol=1e-8)
        assert np.linalg.norm(lowrank_dense(f) - oracle) <= 1e-8 * np.linalg.norm(oracle)

    @pytest.mark.parametrize("seed", range(4))
    def test_residual_contract(self, seed):
        rng = np.random.default_rng(100 + seed)
        A = random_spectrum_matrix(24, rng)
        op = dense_operator(A)
        tol = 1e-10
        with dense_limit(0):
            f = truncated_svd(op, 3, tol=tol, seed=seed)
        for i in range(f.rank):
            residual = np.linalg.norm(A @ f.V[:, i] - f.sigma[i] * f.U[:, i])
            assert residual <= 10 * tol * f.sigma[0]

    def test_deterministic_given_seed(self):
        rng = np.random.default_rng(9)
        A = random_spectrum_matrix(20, rng)
        with dense_limit(0):
            f1 = truncated_svd(dense_operator(A), 3, seed=5)
            f2 = truncated_svd(dense_operator(A), 3, seed=5)
        assert np.array_equal(f1.U, f2.U)
        assert np.array_equal(f1.sigma, f2.sigma)
        assert np.array_equal(f1.V, f2.V)

    def test_orthonormal_output(self):
        rng = np.random.default_rng(10)
        A = random_spectrum_matrix(30, rng)
        with dense_limit(0):
            f = truncated_svd(dense_operator(A), 4, seed=2)
        assert f.orthonormality_defect() <= 1e-10

    def test_adjoint_mismatch_helper(self):
        rng = np.random.default_rng(11)
        A = random_spectrum_matrix(7, rng)
        good = dense_operator(A)
        assert adjoint_mismatch(good, np.random.default_rng(0)) <= 1e-12
        bad = LinearOperator(7, lambda v: A @ v, lambda v: A.T @ v)
        assert adjoint_mismatch(bad, np.random.default_rng(0)) > 1e-6

    def test_nonconvergence_is_reported(self):
        # an inconsistent "adjoint" breaks the bidiagonalization invariants,
        # so residuals cannot reach the tolerance
        rng = np.random.default_rng(12)
        A = random_spectrum_matrix(12, rng)
        B = random_spectrum_matrix(12, rng)
        broken = LinearOperator(12, lambda v: A @ v, lambda v: B @ v)
        with dense_limit(0):
            with pytest.raises(SvdConvergenceError):
                truncated_svd(broken, 2, tol=1e-14, seed=0)


class TestProjectRank:
    def test_fixed_point_on_low_rank_input(self):
        rng = np.random.default_rng(13)
        A = random_spectrum_matrix(10, rng)
        U, s, Vh = np.linalg.svd(A)
        low = (U[:, :2] * s[:2]) @ Vh[:2]
        f = project_rank(dense_operator(low), 2)
        assert np.linalg.norm(lowrank_dense(f) - low) <= 1e-8 * np.linalg.norm(low)

    def test_eckart_young_on_diagonal(self):
        f = project_rank(dense_operator(np.diag([2.0, 1.0])), 1)
        assert np.allclose(lowrank_dense(f), np.diag([2.0, 0.0]), atol=1e-12)

    def test_drops_negligible_trailing_values(self):
        A = np.diag([1.0, 1e-15, 1e-16])
        f = project_rank(dense_operator(A), 3)
        assert f.rank == 1

    def test_optimal_among_random_rank2_competitors(self):
        rng = np.random.default_rng(14)
        A = random_spectrum_matrix(8, rng)
        f = project_rank(dense_operator(A), 2)
        best = np.linalg.norm(A - lowrank_dense(f))
        for _ in range(100):
            B = (rng.standard_normal((8, 2)) + 1j * rng.standard_normal((8, 2))) @ (
                rng.standard_normal((2, 8)) + 1j * rng.standard_normal((2, 8))
            )
            assert best <= np.linalg.norm(A - B) + 1e-12

    def test_idempotent(self):
        rng = np.random.default_rng(15)
        A = random_spectrum_matrix(12, rng)
        f1 = project_rank(dense_operator(A), 3)
        once = lowrank_dense(f1)
        f2 = project_rank(dense_operator(once), 3)
        assert np.linalg.norm(lowrank_dense(f2) - once) <= 1e-8 * np.linalg.norm(once)

    @pytest.mark.parametrize("n", [8, 16, 32])
    def test_approximation_error_matches_tail(self, n):
        rng = np.random.default_rng(n)
        A = random_spectrum_matrix(n, rng)
        s = np.linalg.svd(A, compute_uv=False)
        r = 3
        f = project_rank(dense_operator(A), r)
        err = np.linalg.norm(A - lowrank_dense(f))
        expected = np.sqrt(np.sum(s[r:] ** 2))
        assert abs(err - expected) <= 1e-8 * expected
