"""Test matrices M for campaigns, rescaled to a target operator norm."""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse

from .errors import DomainError
from .matrix_agent import Matrix_Agent, as_sparse
from .noise_agent import STREAM_MATRIX, complex_gaussian_vector, derive_rng

logger = logging.getLogger(__name__)


class FamilyKind(enum.Enum):
    ZERO = "Zero"
    IDENTITY = "Identity"
    JORDAN_BLOCK = "JordanBlock"
    GRCAR_LIKE = "GrcarLike"
    GINIBRE_DENSE = "GinibreDense"
    FROM_FILE = "FromFile"


@dataclass(frozen=True)
class MatrixFamily:
    kind: FamilyKind
    n: int
    norm_target: Optional[float] = 1.0
    spread: float = 0.0
    path: Optional[str] = None
    seed: int = 0

    def __post_init__(self):
        if not isinstance(self.kind, FamilyKind):
            object.__setattr__(self, "kind", FamilyKind(self.kind))
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"Family size n must be a positive integer, got {self.n}.")
        if self.kind is not FamilyKind.ZERO and self.norm_target is not None and not self.norm_target > 0:
            raise DomainError(f"norm_target must be > 0 for {self.kind.value}, got {self.norm_target}.")
        if self.spread < 0:
            raise DomainError(f"Diagonal spread must be >= 0, got {self.spread}.")
        if self.kind is FamilyKind.FROM_FILE and not self.path:
            raise DomainError("FromFile family needs a path.")

    def with_n(self, n: int) -> "MatrixFamily":
        return MatrixFamily(self.kind, n, self.norm_target, self.spread, self.path, self.seed)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "n": int(self.n),
            "norm_target": self.norm_target,
            "spread": self.spread,
            "path": self.path,
            "seed": int(self.seed),
        }


class Family_Agent:
    @staticmethod
    def build(family: MatrixFamily) -> scipy.sparse.csr_matrix:
        n = int(family.n)
        kind = family.kind
        if kind is FamilyKind.ZERO:
            return as_sparse(scipy.sparse.csr_matrix((n, n), dtype=np.complex128))

        if kind is FamilyKind.IDENTITY:
            steps = np.arange(n) / (n - 1) if n > 1 else np.zeros(1)
            M = scipy.sparse.diags(1.0 + family.spread * steps).astype(np.complex128)
        elif kind is FamilyKind.JORDAN_BLOCK:
            M = scipy.sparse.diags(np.ones(n - 1), 1, shape=(n, n)).astype(np.complex128)
        elif kind is FamilyKind.GRCAR_LIKE:
            offsets = [k for k in (-1, 0, 1, 2, 3) if abs(k) < n]
            bands = [(-1.0 if k == -1 else 1.0) * np.ones(n - abs(k)) for k in offsets]
            M = scipy.sparse.diags(bands, offsets, shape=(n, n)).astype(np.complex128)
        elif kind is FamilyKind.GINIBRE_DENSE:
            rng = derive_rng(family.seed, 0, STREAM_MATRIX)
            M = complex_gaussian_vector(rng, (n, n))
        elif kind is FamilyKind.FROM_FILE:
            from .io_agent import IO_Agent

            M = IO_Agent.read_matrix(family.path)
            if M.shape != (n, n):
                raise DomainError(f"{family.path} holds a {M.shape[0]}x{M.shape[1]} matrix, family says n={n}.")
        else:
            raise DomainError(f"Unknown matrix family {kind!r}.")

        M = as_sparse(M)
        if family.norm_target is None:
            return M
        norm = Matrix_Agent.operator_norm(M)
        if norm == 0:
            logger.warning("%s with n=%d has zero norm; norm_target ignored.", kind.value, n)
            return M
        return as_sparse(M * (family.norm_target / norm))
