"""Dense and sparse complex linear algebra used by every other agent.

Dense matrices are ``numpy.ndarray`` of dtype complex128 and shape (n, n);
sparse matrices are ``scipy.sparse.csr_matrix`` with sorted column indices.
"""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg
import scipy.sparse

from .errors import ConvergenceError, DomainError

logger = logging.getLogger(__name__)

# |w_j^* v_j| below this marks a numerically defective eigenvalue.
DEFECTIVE_THRESHOLD = 1e-13


def as_dense(A) -> np.ndarray:
    if scipy.sparse.issparse(A):
        A = A.toarray()
    A = np.asarray(A, dtype=np.complex128)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise DomainError(f"Expected a nonempty square matrix, got shape {A.shape}.")
    if not np.all(np.isfinite(A)):
        raise DomainError("Matrix has NaN or infinite entries.")
    return A


def as_sparse(A) -> scipy.sparse.csr_matrix:
    S = scipy.sparse.csr_matrix(A, dtype=np.complex128)
    if S.shape[0] != S.shape[1] or S.shape[0] < 1:
        raise DomainError(f"Expected a nonempty square matrix, got shape {S.shape}.")
    S.sum_duplicates()
    S.sort_indices()
    if not np.all(np.isfinite(S.data)):
        raise DomainError("Matrix has NaN or infinite entries.")
    return S


def densify(S) -> np.ndarray:
    return as_dense(S)


def normalize_columns(V: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(V, axis=0)
    norms[norms == 0] = 1.0
    return V / norms


@dataclass(frozen=True)
class EigDecomposition:
    """Eigenvalues with unit right (V) and left (W) eigenvectors paired by column."""

    eigenvalues: np.ndarray
    right_vectors: np.ndarray
    left_vectors: np.ndarray
    residual: float
    left_residual: float

    @property
    def n(self) -> int:
        return len(self.eigenvalues)

    @property
    def pairing(self) -> np.ndarray:
        """|w_j^* v_j| for each j."""
        return np.abs(np.sum(self.left_vectors.conj() * self.right_vectors, axis=0))

    def is_defective(self, threshold: float = DEFECTIVE_THRESHOLD) -> bool:
        return bool(np.any(self.pairing < threshold))


class Matrix_Agent:
    @staticmethod
    def matvec(A, v) -> np.ndarray:
        v = np.asarray(v, dtype=np.complex128)
        if v.ndim != 1 or A.shape[1] != v.shape[0]:
            raise DomainError(f"Dimension mismatch: matrix is {A.shape[0]}x{A.shape[1]}, vector has shape {v.shape}.")
        if scipy.sparse.issparse(A):
            # csr @ vector touches each stored entry once
            return np.asarray(A @ v, dtype=np.complex128)
        return np.asarray(A, dtype=np.complex128) @ v

    @staticmethod
    def operator_norm(A) -> float:
        A = as_dense(A)
        if not np.any(A):
            return 0.0
        return float(Matrix_Agent.singular_values(A)[0])

    @staticmethod
    def singular_values(A) -> np.ndarray:
        A = as_dense(A)
        try:
            return scipy.linalg.svdvals(A, check_finite=False)
        except scipy.linalg.LinAlgError as exc:
            raise ConvergenceError(
                f"SVD did not converge for a {A.shape[0]}x{A.shape[0]} matrix: {exc}",
                iterations=_gesdd_info(A),
            ) from exc

    @staticmethod
    def eig(A) -> EigDecomposition:
        A = as_dense(A)
        try:
            eigenvalues, left_lapack, right = scipy.linalg.eig(A, left=True, right=True, check_finite=False)
        except scipy.linalg.LinAlgError as exc:
            raise ConvergenceError(
                f"QR iteration did not converge for a {A.shape[0]}x{A.shape[0]} matrix: {exc}",
                iterations=_lapack_info(exc),
            ) from exc

        V = normalize_columns(right)
        W = _left_from_inverse_adjoint(V)
        if W is None:
            logger.debug("Eigenvector matrix is numerically singular; using LAPACK left eigenvectors.")
            W = normalize_columns(left_lapack)

        residual = float(np.max(np.linalg.norm(A @ V - V * eigenvalues, axis=0)))
        left_residual = float(np.max(np.linalg.norm(W.conj().T @ A - eigenvalues[:, None] * W.conj().T, axis=1)))
        return EigDecomposition(
            eigenvalues=eigenvalues,
            right_vectors=V,
            left_vectors=W,
            residual=residual,
            left_residual=left_residual,
        )


def _left_from_inverse_adjoint(V: np.ndarray):
    """Columns of V^{-*}, normalized; None when V cannot be inverted."""
    try:
        W = scipy.linalg.inv(V, check_finite=False).conj().T
    except scipy.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(W)):
        return None
    return normalize_columns(W)


def _lapack_info(exc: Exception) -> Optional[int]:
    """The positive LAPACK info scipy folds into its LinAlgError message, if any."""
    match = re.search(r"(?:order >=|info=)\s*(\d+)", str(exc))
    return int(match.group(1)) if match else None


def _gesdd_info(A: np.ndarray) -> Optional[int]:
    # svdvals drops gesdd's info from its message; rerun the driver to recover it
    try:
        gesdd = scipy.linalg.get_lapack_funcs("gesdd", (A,))
        info = int(gesdd(A, compute_uv=0, full_matrices=0)[-1])
    except (scipy.linalg.LinAlgError, ValueError):
        return None
    return info if info > 0 else None
