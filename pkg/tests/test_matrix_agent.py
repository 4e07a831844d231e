"""
Dense/sparse linear algebra checked against LAPACK and hand-computed cases.

Known values:
- Identity: norm 1, all singular values 1
- diag(3, 4i): norm 4
- [[0, 1], [-1, 0]]: eigenvalues +-i
- Jordan block [[0, 1], [0, 0]]: defective, pairing |w* v| ~ 0
- LAPACK non-convergence surfaces as ConvergenceError carrying the info value (exit code 3)
"""
import numpy as np
import pytest
import scipy.linalg
import scipy.sparse

from ShatterLab.diagnostic_agent import sigma_min_at
from ShatterLab.errors import ConvergenceError, DomainError
from ShatterLab.matrix_agent import DEFECTIVE_THRESHOLD, Matrix_Agent, as_dense, as_sparse, densify


def random_complex(n, seed, k=None):
    rng = np.random.default_rng(seed)
    shape = (n, n if k is None else k)
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


class TestMatvec:
    def test_identity(self):
        v = np.array([1 + 2j, -3, 0.5j])
        np.testing.assert_array_equal(Matrix_Agent.matvec(scipy.sparse.identity(3, format="csr"), v), v)

    def test_empty_sparse_gives_zero(self):
        S = scipy.sparse.csr_matrix((4, 4), dtype=complex)
        np.testing.assert_array_equal(Matrix_Agent.matvec(S, np.ones(4)), np.zeros(4))

    def test_hand_computed(self):
        S = scipy.sparse.csr_matrix(np.array([[1 + 1j, 0], [0, 2]]))
        np.testing.assert_allclose(Matrix_Agent.matvec(S, np.array([1, 1])), [1 + 1j, 2])

    def test_dimension_mismatch(self):
        with pytest.raises(DomainError):
            Matrix_Agent.matvec(scipy.sparse.identity(3, format="csr"), np.ones(4))

    def test_sparse_matches_dense(self):
        rng = np.random.default_rng(3)
        S = as_sparse(scipy.sparse.random(40, 40, density=0.1, random_state=4) * (1 + 0.5j))
        v = rng.standard_normal(40) + 1j * rng.standard_normal(40)
        dense = Matrix_Agent.matvec(densify(S), v)
        sparse = Matrix_Agent.matvec(S, v)
        bound = 1e-14 * Matrix_Agent.operator_norm(S) * np.linalg.norm(v)
        assert np.max(np.abs(dense - sparse)) <= max(bound, 1e-300)


class TestNormsAndSingularValues:
    def test_identity_norm(self):
        assert Matrix_Agent.operator_norm(np.eye(5)) == pytest.approx(1.0, rel=1e-10)

    def test_zero_norm(self):
        assert Matrix_Agent.operator_norm(np.zeros((3, 3))) == 0.0

    def test_diagonal_norm(self):
        assert Matrix_Agent.operator_norm(np.diag([3, 4j])) == pytest.approx(4.0, rel=1e-10)

    def test_identity_singular_values(self):
        np.testing.assert_allclose(Matrix_Agent.singular_values(np.eye(6)), np.ones(6), rtol=1e-12)

    def test_rank_one_nilpotent(self):
        np.testing.assert_allclose(Matrix_Agent.singular_values(np.array([[0, 2], [0, 0]])), [2, 0], atol=1e-14)

    def test_gram_matrix_oracle(self):
        A = random_complex(4, 11)
        gram = np.sort(np.linalg.eigvalsh(A.conj().T @ A))[::-1]
        np.testing.assert_allclose(Matrix_Agent.singular_values(A), np.sqrt(np.maximum(gram, 0)), atol=1e-8)

    def test_nonincreasing(self):
        s = Matrix_Agent.singular_values(random_complex(12, 2))
        assert np.all(np.diff(s) <= 0)

    def test_unitary_from_qr(self):
        Q, _ = scipy.linalg.qr(random_complex(16, 5))
        np.testing.assert_allclose(Matrix_Agent.singular_values(Q), np.ones(16), atol=1e-10)

    def test_norm_is_top_singular_value(self):
        A = random_complex(9, 6)
        assert Matrix_Agent.operator_norm(A) == pytest.approx(Matrix_Agent.singular_values(A)[0], rel=1e-10)


class TestEig:
    def test_diagonal(self):
        dec = Matrix_Agent.eig(np.diag([1.0, 2.0]))
        order = np.argsort(dec.eigenvalues.real)
        np.testing.assert_allclose(dec.eigenvalues[order], [1, 2], atol=1e-14)
        np.testing.assert_allclose(np.abs(dec.right_vectors[:, order]), np.eye(2), atol=1e-14)

    def test_rotation(self):
        dec = Matrix_Agent.eig(np.array([[0, 1], [-1, 0]]))
        order = np.argsort(dec.eigenvalues.imag)
        np.testing.assert_allclose(dec.eigenvalues[order], [-1j, 1j], atol=1e-14)

    def test_jordan_block_is_flagged(self):
        dec = Matrix_Agent.eig(np.array([[0, 1], [0, 0]]))
        assert np.all(np.abs(dec.eigenvalues) < 1e-7)
        assert dec.is_defective()
        assert np.min(dec.pairing) < DEFECTIVE_THRESHOLD

    def test_unit_columns(self):
        dec = Matrix_Agent.eig(random_complex(10, 8))
        np.testing.assert_allclose(np.linalg.norm(dec.right_vectors, axis=0), 1.0, atol=1e-12)
        np.testing.assert_allclose(np.linalg.norm(dec.left_vectors, axis=0), 1.0, atol=1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_residuals_on_random_20x20(self, seed):
        A = random_complex(20, 100 + seed)
        dec = Matrix_Agent.eig(A)
        norm = Matrix_Agent.operator_norm(A)
        right = np.linalg.norm(A @ dec.right_vectors - dec.right_vectors * dec.eigenvalues, axis=0)
        left = np.linalg.norm(dec.left_vectors.conj().T @ A - dec.eigenvalues[:, None] * dec.left_vectors.conj().T, axis=1)
        assert np.max(right) <= 1e-8 * norm
        assert np.max(left) <= 1e-8 * norm
        assert dec.residual <= 1e-8 * norm
        assert dec.left_residual <= 1e-8 * norm

    def test_eigenvalues_match_lapack(self):
        A = random_complex(7, 21)
        ours = np.sort_complex(Matrix_Agent.eig(A).eigenvalues)
        theirs = np.sort_complex(scipy.linalg.eigvals(A))
        np.testing.assert_allclose(ours, theirs, atol=1e-10)


class TestConversions:
    def test_rejects_nan(self):
        with pytest.raises(DomainError):
            as_dense(np.array([[np.nan, 0], [0, 1]]))

    def test_rejects_non_square(self):
        with pytest.raises(DomainError):
            as_dense(np.zeros((2, 3)))

    def test_sparse_indices_sorted_and_summed(self):
        S = scipy.sparse.coo_matrix(([1.0, 2.0, 3.0], ([0, 0, 1], [1, 1, 0])), shape=(2, 2))
        C = as_sparse(S)
        assert C.has_sorted_indices
        assert C.nnz == 2
        assert C[0, 1] == 3.0


class TestConvergenceFailures:
    @staticmethod
    def failing(message):
        def fail(*args, **kwargs):
            raise scipy.linalg.LinAlgError(message)
        return fail

    def test_eig_reports_lapack_info(self, monkeypatch):
        monkeypatch.setattr(scipy.linalg, "eig", self.failing(
            "eig algorithm (geev) did not converge (only eigenvalues with order >= 3 have converged)"))
        with pytest.raises(ConvergenceError) as info:
            Matrix_Agent.eig(np.eye(4))
        assert info.value.iterations == 3
        assert info.value.exit_code == 3
        assert "LAPACK info=3" in str(info.value)

    def test_svd_reports_lapack_info(self, monkeypatch):
        monkeypatch.setattr(scipy.linalg, "svdvals", self.failing("SVD did not converge"))
        monkeypatch.setattr(scipy.linalg, "get_lapack_funcs",
                            lambda names, arrays: lambda a, **kwargs: (None, np.zeros(2), None, 5))
        with pytest.raises(ConvergenceError) as info:
            Matrix_Agent.singular_values(np.eye(2))
        assert info.value.iterations == 5

    def test_batched_sigma_min_failure(self, monkeypatch):
        monkeypatch.setattr(np.linalg, "svd", self.failing("SVD did not converge"))
        monkeypatch.setattr(scipy.linalg, "svdvals", self.failing("SVD did not converge"))
        monkeypatch.setattr(scipy.linalg, "get_lapack_funcs",
                            lambda names, arrays: lambda a, **kwargs: (None, np.zeros(2), None, 2))
        with pytest.raises(ConvergenceError) as info:
            sigma_min_at(np.eye(2), [0.5, 1.5])
        assert info.value.iterations == 2
