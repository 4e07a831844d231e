"""Spectral radius from a sparse perturbation and k matrix-vector products.

The estimate is accurate for the perturbed matrix A = M + (delta/n) N rather
than for M itself: a (1 +- eps) forward error on an input moved by at most
delta in operator norm.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .errors import DomainError
from .matrix_agent import Matrix_Agent, as_sparse
from .noise_agent import STREAM_PROBE, NoiseSpec, Noise_Agent, complex_gaussian_vector, derive_rng

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SpecrConfig:
    rho: float
    eps: float
    delta: float
    seed: int = 0
    k_override: Optional[int] = None
    trial: int = 0

    def __post_init__(self):
        if not (0.0 < self.rho <= 1.0):
            raise DomainError(f"Sparsity rho must satisfy 0 < rho <= 1, got rho={self.rho}.")
        if not (0.0 < self.eps < 1.0):
            raise DomainError(f"Accuracy eps must satisfy 0 < eps < 1, got eps={self.eps}.")
        if not (0.0 < self.delta < 1.0):
            raise DomainError(f"Backward error delta must satisfy 0 < delta < 1, got delta={self.delta}.")
        if self.k_override is not None and (int(self.k_override) != self.k_override or self.k_override < 1):
            raise DomainError(f"k must be a positive integer, got k={self.k_override}.")


@dataclass(frozen=True)
class SpecrOutcome:
    estimate: float
    k_used: int
    nnz_perturbed: int
    perturbation_norm: float
    log_norm_trace: np.ndarray
    k_formula: int
    norm_M: float
    oracle_spr: Optional[float] = None
    relative_error: Optional[float] = None

    def within(self, eps: float) -> Optional[bool]:
        if self.oracle_spr is None:
            return None
        return (1.0 - eps) * self.oracle_spr <= self.estimate <= (1.0 + eps) * self.oracle_spr

    def to_dict(self) -> dict:
        return {
            "estimate": float(self.estimate),
            "k_used": int(self.k_used),
            "k_formula": int(self.k_formula),
            "nnz_perturbed": int(self.nnz_perturbed),
            "perturbation_norm": float(self.perturbation_norm),
            "norm_M": float(self.norm_M),
            "log_norm_trace": [float(x) for x in self.log_norm_trace],
            "oracle_spr": self.oracle_spr,
            "relative_error": self.relative_error,
        }


def probe_vector(n: int, seed: int, trial: int = 0) -> np.ndarray:
    return complex_gaussian_vector(derive_rng(seed, trial, STREAM_PROBE), n)


class Specr_Agent:
    @staticmethod
    def power_norm(A, b, k: int) -> Tuple[float, np.ndarray]:
        """log ||A^k b|| with the iterate rescaled to unit norm after every product.

        ``trace[t]`` is log ||A^(t+1) b||. An iterate that becomes exactly zero
        ends the chain with -inf.
        """
        if int(k) != k or k < 1:
            raise DomainError(f"k must be a positive integer, got k={k}.")
        b = np.asarray(b, dtype=np.complex128)
        norm_b = float(np.linalg.norm(b))
        if norm_b == 0:
            raise DomainError("Probe vector b must be nonzero.")

        log_norm = math.log(norm_b)
        x = b / norm_b
        trace = np.full(int(k), -np.inf)
        for step in range(int(k)):
            y = Matrix_Agent.matvec(A, x)
            norm_y = float(np.linalg.norm(y))
            if norm_y == 0:
                return -math.inf, trace
            log_norm += math.log(norm_y)
            trace[step] = log_norm
            x = y / norm_y
        return log_norm, trace

    @staticmethod
    def k_formula(n: int, rho: float, norm_M: float, eps: float, delta: float) -> int:
        """ceil(2 (log n / log(n rho)) log(n ||M|| / delta) / eps)."""
        K = Noise_Agent.k_param(n, rho).value
        return max(1, int(math.ceil(K * math.log(n * norm_M / delta) / eps)))

    @staticmethod
    def specr_estimate(M, cfg: SpecrConfig, with_oracle: bool = False) -> SpecrOutcome:
        M = as_sparse(M)
        n = M.shape[0]
        norm_M = Matrix_Agent.operator_norm(M)
        if norm_M < 1.0 - 1e-12:
            raise DomainError(f"specr needs ||M|| >= 1, got ||M||={norm_M}.")
        k_formula = Specr_Agent.k_formula(n, cfg.rho, norm_M, cfg.eps, cfg.delta)
        k = int(cfg.k_override) if cfg.k_override is not None else k_formula

        N = Noise_Agent.sample_sparse_noise(NoiseSpec(n=n, rho=cfg.rho, scale=1.0, seed=cfg.seed, trial=cfg.trial))
        E = N * (cfg.delta / n)
        A = as_sparse(M + E)

        b = probe_vector(n, cfg.seed, cfg.trial)
        log_norm, trace = Specr_Agent.power_norm(A, b, k)
        estimate = math.exp((log_norm - math.log(np.linalg.norm(b))) / k)
        logger.debug("specr n=%d k=%d (formula %d) estimate=%.6g", n, k, k_formula, estimate)

        oracle = relative_error = None
        if with_oracle:
            oracle = Specr_Agent.exact_spectral_radius(A)
            relative_error = abs(estimate - oracle) / oracle if oracle > 0 else float("inf")

        return SpecrOutcome(
            estimate=estimate,
            k_used=k,
            nnz_perturbed=int(A.nnz),
            perturbation_norm=Matrix_Agent.operator_norm(E),
            log_norm_trace=trace,
            k_formula=k_formula,
            norm_M=norm_M,
            oracle_spr=oracle,
            relative_error=relative_error,
        )

    @staticmethod
    def exact_spectral_radius(A) -> float:
        return float(np.max(np.abs(Matrix_Agent.eig(A).eigenvalues)))

    @staticmethod
    def specr_bracket(outcome: SpecrOutcome, n: int, kappa_v: float) -> Tuple[float, float]:
        """Interval for spr(A) from the power-method sandwich.

        The estimate is (||A^k b|| / ||b||)^(1/k). ||A^k b|| <= kappa_V spr^k ||b||
        always, which gives the lower end. The upper end uses
        ||A^k b|| >= spr^k |w* b| for the top left eigenvector w: it holds when
        |w* b|^2 >= 1/n and ||b||^2 <= n^3, an event of probability about 1 - 1/n.
        """
        k = outcome.k_used
        low = outcome.estimate / kappa_v ** (1.0 / k) if math.isfinite(kappa_v) else 0.0
        high = outcome.estimate * float(n) ** (2.0 / k)
        return low, high

    @staticmethod
    def unperturbed_growth(M, k: int, seed: int = 0, trial: int = 0) -> float:
        """(||M^k b|| / ||b||)^(1/k) on M itself, with specr's probe vector."""
        M = as_sparse(M)
        b = probe_vector(M.shape[0], seed, trial)
        log_norm, _ = Specr_Agent.power_norm(M, b, k)
        if log_norm == -math.inf:
            return 0.0
        return math.exp((log_norm - math.log(np.linalg.norm(b))) / k)
