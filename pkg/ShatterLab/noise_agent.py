"""Sparse Bernoulli-Gaussian perturbations N_g and the perturbed matrix M + scale * N_g.

Every random draw in the package goes through :func:`derive_rng`, so a
(seed, keys...) tuple names one reproducible stream (see docs/PRNG.md).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse

from .errors import DomainError
from .matrix_agent import as_dense, as_sparse

logger = logging.getLogger(__name__)

PRNG_CONTRACT = "philox4x64-10/seedsequence/v1"

# stream purposes, the second key after the trial index
STREAM_NOISE = 0
STREAM_PROBE = 1
STREAM_SHIFT = 2
STREAM_MATRIX = 3
STREAM_LEVY = 4

SEED_LIMIT = 2 ** 64


def derive_rng(seed: int, *keys: int) -> np.random.Generator:
    """Philox generator keyed by the hash of (seed, *keys)."""
    entropy = [int(seed)] + [int(key) for key in keys]
    if any(value < 0 for value in entropy):
        raise DomainError(f"Seeds and stream keys must be nonnegative, got {entropy}.")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def complex_gaussian_vector(rng: np.random.Generator, size) -> np.ndarray:
    """i.i.d. standard complex Gaussians, E|g|^2 = 1 (real and imaginary variance 1/2)."""
    shape = (size,) if np.isscalar(size) else tuple(size)
    pairs = rng.standard_normal(shape + (2,))
    return math.sqrt(0.5) * (pairs[..., 0] + 1j * pairs[..., 1])


@dataclass(frozen=True)
class NoiseSpec:
    n: int
    rho: float
    scale: float = 1.0
    seed: int = 0
    trial: int = 0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n}.")
        if not (0.0 < self.rho <= 1.0):
            raise DomainError(f"Sparsity rho must satisfy 0 < rho <= 1, got rho={self.rho}.")
        if not (math.isfinite(self.scale) and self.scale > 0.0):
            raise DomainError(f"Noise scale must satisfy scale > 0, got scale={self.scale}.")
        if not (0 <= int(self.seed) < SEED_LIMIT) or int(self.seed) != self.seed:
            raise DomainError(f"Seed must be an unsigned 64-bit integer, got {self.seed}.")
        if int(self.trial) != self.trial or self.trial < 0:
            raise DomainError(f"Trial index must be a nonnegative integer, got {self.trial}.")


@dataclass(frozen=True)
class KParam:
    value: float


class Noise_Agent:
    @staticmethod
    def sample_complex_gaussian(rng: np.random.Generator) -> complex:
        return complex(complex_gaussian_vector(rng, 1)[0])

    @staticmethod
    def sample_sparse_noise(spec: NoiseSpec) -> scipy.sparse.csr_matrix:
        """Each entry present with probability rho; present entries are scale * g.

        Row i is drawn from its own stream (seed, trial, STREAM_NOISE, i): first
        the Bernoulli mask for the whole row, then the Gaussians of the present
        entries in column order.
        """
        n = int(spec.n)
        indptr = np.zeros(n + 1, dtype=np.int64)
        columns, values = [], []
        for row in range(n):
            rng = derive_rng(spec.seed, spec.trial, STREAM_NOISE, row)
            present = np.flatnonzero(rng.random(n) < spec.rho)
            columns.append(present)
            values.append(spec.scale * complex_gaussian_vector(rng, present.size))
            indptr[row + 1] = indptr[row] + present.size

        N = scipy.sparse.csr_matrix(
            (np.concatenate(values).astype(np.complex128), np.concatenate(columns), indptr),
            shape=(n, n),
        )
        N.has_sorted_indices = True
        logger.debug("Sampled noise n=%d rho=%g trial=%d nnz=%d", n, spec.rho, spec.trial, N.nnz)
        return N

    @staticmethod
    def perturb(M, spec: NoiseSpec):
        """M + N with N from sample_sparse_noise(spec); sparse input stays sparse."""
        if M.shape != (spec.n, spec.n):
            raise DomainError(f"Dimension mismatch: matrix is {M.shape[0]}x{M.shape[1]} but the noise spec has n={spec.n}.")
        N = Noise_Agent.sample_sparse_noise(spec)
        if scipy.sparse.issparse(M):
            return as_sparse(as_sparse(M) + N)
        return as_dense(M) + N.toarray()

    @staticmethod
    def k_param(n: int, rho: float) -> KParam:
        if n * rho <= 1:
            raise DomainError(f"K = 2 log(n)/log(n rho) needs n*rho > 1, got n*rho={n * rho}.")
        return KParam(value=2.0 * math.log(n) / math.log(n * rho))

    @staticmethod
    def expected_nnz(n: int, rho: float) -> float:
        return float(n) * float(n) * float(rho)

    @staticmethod
    def untouched_rows(N) -> np.ndarray:
        N = scipy.sparse.csr_matrix(N)
        return np.flatnonzero(np.diff(N.indptr) == 0)

    @staticmethod
    def untouched_columns(N) -> np.ndarray:
        N = scipy.sparse.csc_matrix(N)
        return np.flatnonzero(np.diff(N.indptr) == 0)

    @staticmethod
    def sparsity_chi(n: int) -> float:
        """chi(n) = 2 log(n) / log(log(n)), the exponent for perturbations of size delta."""
        if n < 3:
            raise DomainError(f"chi(n) needs n >= 3, got n={n}.")
        return 2.0 * math.log(n) / math.log(math.log(n))

    @staticmethod
    def sparsity_law(n: int, law: str, parameter: float = None) -> float:
        """rho for a named law: dense, power (n^(alpha-1)), log2 (log^2(n)/n), coupon (c log(n)/n)."""
        if law == "dense":
            rho = 1.0
        elif law == "power":
            alpha = 0.5 if parameter is None else parameter
            rho = float(n) ** (alpha - 1.0)
        elif law == "log2":
            rho = math.log(n) ** 2 / n
        elif law == "coupon":
            c = 1.0 if parameter is None else parameter
            rho = c * math.log(n) / n
        else:
            raise DomainError(f"Unknown sparsity law {law!r}; expected dense, power, log2 or coupon.")
        if rho <= 0:
            raise DomainError(f"Sparsity law {law!r} gives rho={rho} <= 0 for n={n}.")
        return min(1.0, rho)
