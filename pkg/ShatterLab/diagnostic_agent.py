"""Spectral regularity diagnostics.

Eigenvalue and eigenvector conditioning, eigenvalue gaps, shifted least
singular values, pseudospectra and their area, Levy concentration of sparse
Gaussian sums, and the deterministic inequalities relating them.
"""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from .errors import DomainError
from .matrix_agent import DEFECTIVE_THRESHOLD, EigDecomposition, Matrix_Agent, as_dense
from .noise_agent import STREAM_LEVY, STREAM_SHIFT, Noise_Agent, complex_gaussian_vector, derive_rng
from .parallel import parallel_map

logger = logging.getLogger(__name__)

DEFAULT_AREA_RESOLUTION = 400
DEFAULT_WINDOW_RESOLUTION = 24
MIN_WINDOW_RESOLUTION = 20
MAX_WINDOW_DOUBLINGS = 6
LIPSCHITZ_BLOCK = 4
LEVY_BATCH_ENTRIES = 1 << 20
SVD_BATCH_ENTRIES = 1 << 18


# =============================================================================
# result types
# =============================================================================

@dataclass(frozen=True)
class SpectralReport:
    eigenvalues: np.ndarray
    kappa_j: np.ndarray
    kappa_v_lower: float
    kappa_v_upper: float
    kappa_v_direct: float
    eta: float
    sigma_n: float
    sigma_n_minus_1: float
    defective: bool

    @property
    def n(self) -> int:
        return len(self.eigenvalues)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "eigenvalues": [[float(lam.real), float(lam.imag)] for lam in self.eigenvalues],
            "kappa_j": [float(k) for k in self.kappa_j],
            "kappa_v_lower": float(self.kappa_v_lower),
            "kappa_v_upper": float(self.kappa_v_upper),
            "kappa_v_direct": float(self.kappa_v_direct),
            "eta": float(self.eta),
            "sigma_n": float(self.sigma_n),
            "sigma_n_minus_1": float(self.sigma_n_minus_1),
            "defective": bool(self.defective),
        }


@dataclass(frozen=True)
class PseudospectrumGrid:
    """sigma_min(zI - A) on a resolution x resolution grid of nodes.

    ``sigma_min_field[i, j]`` is the value at ``axis_re[j] + 1j * axis_im[i]``.
    """

    center: complex
    radius: float
    resolution: int
    sigma_min_field: np.ndarray
    eps_levels: Tuple[float, ...] = ()

    @property
    def axis_re(self) -> np.ndarray:
        return self.center.real + np.linspace(-self.radius, self.radius, self.resolution)

    @property
    def axis_im(self) -> np.ndarray:
        return self.center.imag + np.linspace(-self.radius, self.radius, self.resolution)

    @property
    def spacing(self) -> float:
        return 2.0 * self.radius / (self.resolution - 1)

    def nodes(self) -> np.ndarray:
        return self.axis_re[None, :] + 1j * self.axis_im[:, None]

    def inside(self, eps: float) -> np.ndarray:
        return self.sigma_min_field <= eps


@dataclass(frozen=True)
class AreaEstimate:
    area: float
    error_bound: float
    cells_evaluated: int
    method: str


@dataclass(frozen=True)
class ConcentrationQuery:
    v: np.ndarray
    r: float
    rho: float
    trials: int = 100_000
    seed: int = 0

    def __post_init__(self):
        v = np.asarray(self.v, dtype=np.complex128).ravel()
        if v.size == 0 or abs(np.linalg.norm(v) - 1.0) > 1e-12:
            raise DomainError(f"Concentration queries need a unit vector, got norm {np.linalg.norm(v)}.")
        if not self.r > 0:
            raise DomainError(f"Radius r must be > 0, got r={self.r}.")
        if not (0.0 < self.rho <= 1.0):
            raise DomainError(f"Sparsity rho must satisfy 0 < rho <= 1, got rho={self.rho}.")
        if int(self.trials) != self.trials or self.trials < 1:
            raise DomainError(f"trials must be a positive integer, got {self.trials}.")
        object.__setattr__(self, "v", v)


@dataclass(frozen=True)
class LevyEstimate:
    estimate: float
    stderr: float
    trials: int


class VectorClass(enum.Enum):
    COMP = "Comp"
    INCOMP = "Incomp"
    BOUNDARY = "Boundary"


@dataclass(frozen=True)
class RREFBasis:
    """Column space written as P [D; X]: rows ``perm[:k]`` carry D, rows ``perm[k:]`` carry X."""

    perm: np.ndarray
    diagonal: np.ndarray
    lower: np.ndarray

    @property
    def k(self) -> int:
        return len(self.diagonal)

    def stacked(self) -> np.ndarray:
        return np.vstack([np.diag(self.diagonal), self.lower])

    def permutation_matrix(self) -> np.ndarray:
        n = len(self.perm)
        P = np.zeros((n, n))
        P[self.perm, np.arange(n)] = 1.0
        return P

    def matrix(self) -> np.ndarray:
        basis = np.empty((len(self.perm), self.k), dtype=np.complex128)
        basis[self.perm] = self.stacked()
        return basis


@dataclass(frozen=True)
class DiskContainment:
    center: complex
    radius: float
    eps: float
    sampled: int
    violations: int
    max_sigma: float


@dataclass(frozen=True)
class ShatterReference:
    """Reference ceilings for kappa_V and floor for eta, in log form."""

    k: float
    log_kappa_ceiling: float
    log_eta_floor: float


@dataclass(frozen=True)
class TailReference:
    log_bound: float
    log_eps_ceiling: float

    @property
    def bound(self) -> float:
        return _safe_exp(self.log_bound)


# =============================================================================
# helpers
# =============================================================================

def _safe_exp(x: float) -> float:
    return math.exp(x) if x < 709.0 else float("inf")


def _logsumexp(*terms: float) -> float:
    top = max(terms)
    if top == -math.inf:
        return -math.inf
    return top + math.log(sum(math.exp(t - top) for t in terms))


def condition_numbers_from(dec: EigDecomposition, threshold: float = DEFECTIVE_THRESHOLD) -> np.ndarray:
    """kappa(lambda_j) = 1/|w_j^* v_j| for unit v_j, w_j; +inf below ``threshold``."""
    pairing = dec.pairing
    with np.errstate(divide="ignore"):
        kappa = np.where(pairing < threshold, np.inf, 1.0 / np.maximum(pairing, threshold))
    return np.maximum(kappa, 1.0)


def gap_of(eigenvalues: np.ndarray) -> float:
    eigenvalues = np.asarray(eigenvalues)
    if eigenvalues.size < 2:
        raise DomainError("The minimum eigenvalue gap needs n >= 2.")
    distances = np.abs(eigenvalues[:, None] - eigenvalues[None, :])
    np.fill_diagonal(distances, np.inf)
    return float(np.min(distances))


def matrix_condition(V: np.ndarray) -> float:
    s = Matrix_Agent.singular_values(V)
    return float(s[0] / s[-1]) if s[-1] > 0 else float("inf")


def sigma_min_at(A, zs, workers: Optional[int] = None) -> np.ndarray:
    """sigma_n(zI - A) for every z in ``zs``, batched through LAPACK."""
    A = as_dense(A)
    zs = np.asarray(zs, dtype=np.complex128).ravel()
    n = A.shape[0]
    chunk = max(1, SVD_BATCH_ENTRIES // (n * n))
    identity = np.eye(n, dtype=np.complex128)

    def block(start):
        z = zs[start:start + chunk]
        shifted = z[:, None, None] * identity - A
        try:
            return np.linalg.svd(shifted, compute_uv=False)[:, -1]
        except np.linalg.LinAlgError:
            # one shift at a time, so the failing one reports its LAPACK info
            return np.array([Matrix_Agent.singular_values(S)[-1] for S in shifted])

    parts = parallel_map(block, range(0, zs.size, chunk), workers)
    return np.concatenate(parts) if parts else np.empty(0)


def _boundary_cells(inside: np.ndarray) -> int:
    """Cells whose status differs from a 4-neighbour, plus inside cells on the grid edge."""
    edge = np.zeros_like(inside)
    edge[:-1, :] |= inside[:-1, :] != inside[1:, :]
    edge[1:, :] |= inside[1:, :] != inside[:-1, :]
    edge[:, :-1] |= inside[:, :-1] != inside[:, 1:]
    edge[:, 1:] |= inside[:, 1:] != inside[:, :-1]
    edge[0, :] |= inside[0, :]
    edge[-1, :] |= inside[-1, :]
    edge[:, 0] |= inside[:, 0]
    edge[:, -1] |= inside[:, -1]
    return int(np.count_nonzero(edge))


def _cell_centers(center: complex, half_width: float, resolution: int) -> Tuple[np.ndarray, float]:
    h = 2.0 * half_width / resolution
    offsets = -half_width + h * (np.arange(resolution) + 0.5)
    centers = (center.real + offsets)[None, :] + 1j * (center.imag + offsets)[:, None]
    return centers, h


def _inside_cells(A: np.ndarray, centers: np.ndarray, eps: float, workers: Optional[int],
                  candidates: Optional[np.ndarray] = None) -> Tuple[np.ndarray, int]:
    """Which cell centers satisfy sigma_n(zI - A) <= eps, and how many SVDs that took.

    sigma_n(zI - A) is 1-Lipschitz in z, so one SVD at the middle of a
    LIPSCHITZ_BLOCK x LIPSCHITZ_BLOCK patch decides the whole patch whenever
    |sigma - eps| exceeds the patch radius; only the remaining cells are
    evaluated one by one. Cells outside ``candidates`` are never inside.
    """
    if candidates is None:
        candidates = np.ones(centers.shape, dtype=bool)
    inside = np.zeros(centers.shape, dtype=bool)
    undecided = candidates.copy()
    rows, cols = centers.shape
    patches, mids, radii = [], [], []
    for r in range(0, rows, LIPSCHITZ_BLOCK):
        for c in range(0, cols, LIPSCHITZ_BLOCK):
            patch = (slice(r, r + LIPSCHITZ_BLOCK), slice(c, c + LIPSCHITZ_BLOCK))
            if not np.any(candidates[patch]):
                continue
            z = centers[patch]
            mid = 0.5 * (z[0, 0] + z[-1, -1])
            patches.append(patch)
            mids.append(mid)
            radii.append(float(np.max(np.abs(z - mid))))

    evaluated = len(mids)
    if mids:
        sigma = sigma_min_at(A, mids, workers)
        for patch, s, radius in zip(patches, sigma, radii):
            if s - radius > eps:
                undecided[patch] = False
            elif s + radius <= eps:
                inside[patch] |= candidates[patch]
                undecided[patch] = False
    if np.any(undecided):
        inside[undecided] = sigma_min_at(A, centers[undecided], workers) <= eps
        evaluated += int(np.count_nonzero(undecided))
    return inside, evaluated


# =============================================================================
# agent
# =============================================================================

class Diagnostic_Agent:
    @staticmethod
    def eigenvalue_condition_numbers(A, threshold: float = DEFECTIVE_THRESHOLD) -> np.ndarray:
        return condition_numbers_from(Matrix_Agent.eig(A), threshold)

    @staticmethod
    def kappa_v_bounds(A, threshold: float = DEFECTIVE_THRESHOLD) -> Tuple[float, float, float]:
        """(max_j kappa_j, sqrt(n sum_j kappa_j^2), ||V|| ||V^-1||) for unit-column V."""
        dec = Matrix_Agent.eig(A)
        return _kappa_v_bounds(dec, condition_numbers_from(dec, threshold))

    @staticmethod
    def min_eigenvalue_gap(A) -> float:
        A = as_dense(A)
        if A.shape[0] < 2:
            raise DomainError("The minimum eigenvalue gap needs n >= 2.")
        return gap_of(Matrix_Agent.eig(A).eigenvalues)

    @staticmethod
    def spectral_report(A, threshold: float = DEFECTIVE_THRESHOLD) -> SpectralReport:
        A = as_dense(A)
        if A.shape[0] < 2:
            raise DomainError("A spectral report needs n >= 2.")
        dec = Matrix_Agent.eig(A)
        kappa = condition_numbers_from(dec, threshold)
        lower, upper, direct = _kappa_v_bounds(dec, kappa)
        singular_values = Matrix_Agent.singular_values(A)
        report = SpectralReport(
            eigenvalues=dec.eigenvalues,
            kappa_j=kappa,
            kappa_v_lower=lower,
            kappa_v_upper=upper,
            kappa_v_direct=direct,
            eta=gap_of(dec.eigenvalues),
            sigma_n=float(singular_values[-1]),
            sigma_n_minus_1=float(singular_values[-2]),
            defective=not bool(np.all(np.isfinite(kappa))),
        )
        if report.defective:
            logger.warning("Matrix is numerically defective; kappa fields set to +inf.")
        return report

    @staticmethod
    def shifted_sigma(A, z: complex, m: int = 0) -> float:
        """sigma_{n-m}(A - zI)."""
        A = as_dense(A)
        n = A.shape[0]
        if not (0 <= m < n):
            raise DomainError(f"Need 0 <= m < n, got m={m}, n={n}.")
        shifted = A - complex(z) * np.eye(n)
        return float(Matrix_Agent.singular_values(shifted)[n - 1 - m])

    @staticmethod
    def pseudospectrum_grid(A, eps_levels: Sequence[float] = (), center: complex = 0j, radius: Optional[float] = None,
                            resolution: int = 100, workers: Optional[int] = None) -> PseudospectrumGrid:
        A = as_dense(A)
        if int(resolution) != resolution or resolution < 2:
            raise DomainError(f"Grid resolution must be an integer >= 2, got {resolution}.")
        eps_levels = tuple(sorted(float(eps) for eps in eps_levels))
        center = complex(center)
        if radius is None:
            radius = Matrix_Agent.operator_norm(A) + (eps_levels[-1] if eps_levels else 0.0) + abs(center)
        if not radius > 0:
            raise DomainError(f"Grid radius must be > 0, got {radius}.")

        grid = PseudospectrumGrid(center, float(radius), int(resolution), np.empty((0, 0)), eps_levels)
        field = sigma_min_at(A, grid.nodes(), workers).reshape(resolution, resolution)
        return PseudospectrumGrid(center, float(radius), int(resolution), field, eps_levels)

    @staticmethod
    def pseudospectral_area(A, eps: float, center: complex = 0j, radius: Optional[float] = None,
                            resolution: Optional[int] = None, method: str = "grid",
                            workers: Optional[int] = None) -> AreaEstimate:
        """Cell-counting quadrature of vol(Lambda_eps(A)).

        ``method="grid"`` counts cells of a resolution x resolution grid on the
        square around B(center, radius); a cell counts iff sigma_min at its
        center is <= eps. Cells certified outside by the Bauer-Fike bound
        dist(z, spectrum) > eps * cond(V) are not evaluated.

        ``method="windows"`` lays a resolution x resolution grid on a square
        window around each eigenvalue, of half-width 2 kappa_j eps, doubled
        until no boundary cell lies in Lambda_eps; each connected component of
        Lambda_eps contains an eigenvalue, so the windows cover it. Cells are
        attributed to the first window containing their center.
        """
        A = as_dense(A)
        if not eps > 0:
            raise DomainError(f"eps must be > 0, got eps={eps}.")
        if method == "grid":
            return _area_on_grid(A, eps, complex(center), radius, resolution or DEFAULT_AREA_RESOLUTION, workers)
        if method == "windows":
            resolution = resolution or DEFAULT_WINDOW_RESOLUTION
            if resolution < MIN_WINDOW_RESOLUTION:
                raise DomainError(
                    f"Window resolution {resolution} is too coarse: an eps-disk must span at least 5 cells "
                    f"(resolution >= {MIN_WINDOW_RESOLUTION})."
                )
            estimate = _area_by_windows(A, eps, resolution, workers)
            if estimate is not None:
                return estimate
            logger.warning("Window quadrature did not close for eps=%g; falling back to the full grid.", eps)
            return _area_on_grid(A, eps, 0j, None, DEFAULT_AREA_RESOLUTION, workers)
        raise DomainError(f"Unknown area method {method!r}; expected 'grid' or 'windows'.")

    @staticmethod
    def exponential_kappa_bound(eta: float, n: int) -> float:
        """n * 2^n * eta^(1-n), valid for ||A|| <= 1."""
        if n < 2:
            raise DomainError(f"The eigenvalue gap is undefined for n={n}; need n >= 2.")
        if not eta > 0:
            raise DomainError(f"Need eta > 0, got eta={eta}.")
        return _safe_exp(math.log(n) + n * math.log(2.0) + (1 - n) * math.log(eta))

    @staticmethod
    def weyl_pair_check(A, z: complex, tolerance: float = 1e-10) -> bool:
        """Two smallest |lambda - z| multiply to at least sigma_n * sigma_{n-1} of A - zI."""
        A = as_dense(A)
        n = A.shape[0]
        if n < 2:
            raise DomainError("The Weyl pair check needs n >= 2.")
        distances = np.sort(np.abs(Matrix_Agent.eig(A).eigenvalues - z))
        sigma = Matrix_Agent.singular_values(A - complex(z) * np.eye(n))
        slack = tolerance * Matrix_Agent.operator_norm(A) ** 2
        return bool(distances[0] * distances[1] >= sigma[-1] * sigma[-2] - slack)

    @staticmethod
    def disk_containment_check(A, eps: float, points: int = 50, seed: int = 0, trial: int = 0) -> DiskContainment:
        """Sample the disk B(lambda_1, min(eta/n, kappa(lambda_1) eps)/2) and test sigma_min <= eps.

        lambda_1 is the eigenvalue with the largest condition number.
        """
        A = as_dense(A)
        n = A.shape[0]
        dec = Matrix_Agent.eig(A)
        kappa = condition_numbers_from(dec)
        eta = gap_of(dec.eigenvalues)
        if eta == 0 or not np.all(np.isfinite(kappa)):
            raise DomainError("Disk containment needs distinct eigenvalues.")
        top = int(np.argmax(kappa))
        center = complex(dec.eigenvalues[top])
        radius = 0.5 * min(eta / n, kappa[top] * eps)

        rng = derive_rng(seed, trial, STREAM_SHIFT)
        r = radius * np.sqrt(rng.random(points))
        theta = 2.0 * np.pi * rng.random(points)
        sigma = sigma_min_at(A, center + r * np.exp(1j * theta), workers=1)
        violations = int(np.count_nonzero(sigma > eps * (1.0 + 1e-9)))
        return DiskContainment(center, float(radius), float(eps), int(points), violations, float(np.max(sigma)))

    @staticmethod
    def rref_basis(B, tolerance: float = 1e-12) -> RREFBasis:
        """Basis P [D; X] of span(B) with unit columns and |D_jj| >= 1/sqrt(n).

        Pivot rows come from Gaussian elimination with complete pivoting and
        are then swapped until every entry of B B_S^{-1} has modulus <= 1.
        """
        B = np.asarray(B, dtype=np.complex128)
        if B.ndim != 2 or B.shape[1] < 1 or B.shape[1] > B.shape[0]:
            raise DomainError(f"Expected an n x k basis with 1 <= k <= n, got shape {B.shape}.")
        n, k = B.shape
        pivots = _complete_pivoting_rows(B, tolerance)

        for _ in range(100 * n):
            C = scipy.linalg.solve(B[pivots].T, B.T, check_finite=False).T
            magnitude = np.abs(C)
            row, col = np.unravel_index(np.argmax(magnitude), magnitude.shape)
            if magnitude[row, col] <= 1.0 + tolerance:
                break
            pivots[col] = row
        else:
            logger.warning("Pivot refinement stopped before all entries reached modulus <= 1.")

        C = scipy.linalg.solve(B[pivots].T, B.T, check_finite=False).T
        C = C / np.linalg.norm(C, axis=0)
        rest = np.setdiff1d(np.arange(n), pivots)
        perm = np.concatenate([np.asarray(pivots, dtype=np.int64), rest])
        return RREFBasis(perm=perm, diagonal=np.diag(C[pivots]).copy(), lower=C[rest])

    @staticmethod
    def levy_concentration(q: ConcentrationQuery) -> LevyEstimate:
        """Monte-Carlo estimate of p(v, r) = Pr(|<g o delta_rho, v>| <= r).

        The sum is a mixture of centered circular Gaussians and an atom at 0, so
        the supremum over ball centers is attained at 0.
        """
        hits = 0
        for rows_g, rows_delta in _levy_batches(q):
            inner = (rows_g * rows_delta) @ q.v.conj()
            hits += int(np.count_nonzero(np.abs(inner) <= q.r))
        estimate = hits / q.trials
        smoothed = (hits + 1.0) / (q.trials + 2.0)
        return LevyEstimate(estimate, math.sqrt(smoothed * (1.0 - smoothed) / q.trials), int(q.trials))

    @staticmethod
    def levy_concentration_exact(q: ConcentrationQuery) -> LevyEstimate:
        """Same quantity with the Gaussian integrated out given the Bernoulli mask.

        Given delta, <g o delta, v> is complex Gaussian with variance
        ||delta o v||^2, so the conditional probability is 1 - exp(-r^2/||delta o v||^2).
        """
        weights = np.abs(q.v) ** 2
        values = []
        for _, rows_delta in _levy_batches(q):
            variance = rows_delta @ weights
            with np.errstate(divide="ignore"):
                values.append(np.where(variance > 0, -np.expm1(-q.r ** 2 / variance), 1.0))
        values = np.concatenate(values)
        stderr = float(np.std(values, ddof=1) / math.sqrt(q.trials)) if q.trials > 1 else 0.0
        return LevyEstimate(float(np.mean(values)), stderr, int(q.trials))

    @staticmethod
    def sparse_proximity_check(v, r: float, s: float, rho: float, trials: int = 20_000, seed: int = 0) -> bool:
        """If p(v, r) >= s then #{j : |v_j| >= r sqrt(2/s)} <= log(2/s)/rho."""
        if not (0.0 < s < 1.0):
            raise DomainError(f"Need 0 < s < 1, got s={s}.")
        q = ConcentrationQuery(v=v, r=r, rho=rho, trials=trials, seed=seed)
        levy = Diagnostic_Agent.levy_concentration(q)
        if levy.estimate - 3.0 * levy.stderr < s:
            return True
        large = int(np.count_nonzero(np.abs(q.v) >= r * math.sqrt(2.0 / s)))
        return large <= math.log(2.0 / s) / rho

    @staticmethod
    def comp_incomp_classify(v, r: float, s: float, rho: float, trials: int = 20_000, seed: int = 0) -> VectorClass:
        levy = Diagnostic_Agent.levy_concentration(ConcentrationQuery(v=v, r=r, rho=rho, trials=trials, seed=seed))
        if levy.estimate - 3.0 * levy.stderr >= s:
            return VectorClass.COMP
        if levy.estimate + 3.0 * levy.stderr <= s:
            return VectorClass.INCOMP
        return VectorClass.BOUNDARY

    @staticmethod
    def shatter_reference(norm_M: float, n: int, rho: float) -> ShatterReference:
        """(||M|| + n^2 rho)^(10K) ceiling for kappa_V and (||M|| + n^2 rho)^(-35K) floor for eta."""
        k = Noise_Agent.k_param(n, rho).value
        base = math.log(norm_M + n * n * rho)
        return ShatterReference(k=k, log_kappa_ceiling=10.0 * k * base, log_eta_floor=-35.0 * k * base)

    @staticmethod
    def singular_tail_reference(n: int, m: int, R: float, eps: float, rho: float) -> TailReference:
        """n^(3+m) R^(2K(m+1)) eps^(2(m+1)) + exp(-rho n), with its admissible eps ceiling."""
        k = Noise_Agent.k_param(n, rho).value
        polynomial = (3 + m) * math.log(n) + 2.0 * k * (m + 1) * math.log(R) + 2.0 * (m + 1) * math.log(eps)
        ceiling = (1 + k) * math.log(rho) - math.log(8.0) - (4 + k) * math.log(n) - 2.0 * k * math.log(R)
        return TailReference(log_bound=_logsumexp(polynomial, -rho * n), log_eps_ceiling=ceiling)

    @staticmethod
    def gap_split_exponent(c0: float, c1: float) -> Tuple[float, float]:
        """Best split lambda = (c1-c0)/(c1+c0) and min((1+lambda)c0, (1-lambda)c1); > 2 is nontrivial."""
        if not (c0 > 0 and c1 > 0):
            raise DomainError(f"Tail exponents must be positive, got c0={c0}, c1={c1}.")
        lam = (c1 - c0) / (c1 + c0)
        return lam, min((1.0 + lam) * c0, (1.0 - lam) * c1)


# =============================================================================
# internals
# =============================================================================

def _kappa_v_bounds(dec: EigDecomposition, kappa: np.ndarray) -> Tuple[float, float, float]:
    if not np.all(np.isfinite(kappa)):
        return float("inf"), float("inf"), float("inf")
    n = len(kappa)
    lower = float(np.max(kappa))
    upper = float(math.sqrt(n * float(np.sum(kappa ** 2))))
    return lower, upper, matrix_condition(dec.right_vectors)


def _complete_pivoting_rows(B: np.ndarray, tolerance: float) -> list:
    work = B.copy()
    n, k = work.shape
    free_rows = np.ones(n, dtype=bool)
    free_cols = np.ones(k, dtype=bool)
    scale = float(np.max(np.abs(B))) if B.size else 0.0
    pivots = [0] * k
    for _ in range(k):
        candidates = np.where(free_rows[:, None] & free_cols[None, :], np.abs(work), -1.0)
        row, col = np.unravel_index(np.argmax(candidates), candidates.shape)
        if candidates[row, col] <= tolerance * scale:
            raise DomainError("Input basis is rank deficient.")
        free_rows[row] = False
        free_cols[col] = False
        pivots[col] = int(row)
        remaining = np.flatnonzero(free_cols)
        if remaining.size:
            work[:, remaining] -= np.outer(work[:, col], work[row, remaining] / work[row, col])
    return pivots


def _levy_batches(q: ConcentrationQuery):
    n = q.v.size
    rng = derive_rng(q.seed, 0, STREAM_LEVY)
    batch = max(1, LEVY_BATCH_ENTRIES // n)
    remaining = int(q.trials)
    while remaining > 0:
        size = min(batch, remaining)
        delta = (rng.random((size, n)) < q.rho).astype(np.float64)
        g = complex_gaussian_vector(rng, (size, n))
        yield g, delta
        remaining -= size


def _area_on_grid(A: np.ndarray, eps: float, center: complex, radius: Optional[float], resolution: int,
                  workers: Optional[int]) -> AreaEstimate:
    norm = Matrix_Agent.operator_norm(A)
    needed = norm + eps + abs(center)
    if radius is None:
        radius = needed
    if radius < needed * (1.0 - 1e-12):
        raise DomainError(
            f"Area radius {radius} does not contain Lambda_eps: need radius >= ||A|| + eps + |center| = {needed}."
        )
    if int(resolution) != resolution or resolution < 2:
        raise DomainError(f"Grid resolution must be an integer >= 2, got {resolution}.")

    centers, h = _cell_centers(center, radius, int(resolution))
    candidates = np.ones(centers.shape, dtype=bool)
    dec = Matrix_Agent.eig(A)
    if not dec.is_defective():
        reach = eps * matrix_condition(dec.right_vectors) * (1.0 + 1e-8)
        distance = np.full(centers.shape, np.inf)
        for lam in dec.eigenvalues:
            np.minimum(distance, np.abs(centers - lam), out=distance)
        candidates = distance <= reach

    inside, evaluated = _inside_cells(A, centers, eps, workers, candidates)
    count = int(np.count_nonzero(inside))
    return AreaEstimate(
        area=count * h * h,
        error_bound=_boundary_cells(inside) * h * h,
        cells_evaluated=evaluated,
        method="grid",
    )


def _area_by_windows(A: np.ndarray, eps: float, resolution: int, workers: Optional[int]) -> Optional[AreaEstimate]:
    dec = Matrix_Agent.eig(A)
    kappa = condition_numbers_from(dec)
    if not np.all(np.isfinite(kappa)):
        return None
    limit = Matrix_Agent.operator_norm(A) + eps

    windows = []
    evaluated = 0
    for lam, kappa_j in zip(dec.eigenvalues, kappa):
        half = 2.0 * kappa_j * eps
        for _ in range(MAX_WINDOW_DOUBLINGS + 1):
            if half > limit:
                return None
            centers, h = _cell_centers(complex(lam), half, resolution)
            inside, count = _inside_cells(A, centers, eps, workers)
            evaluated += count
            ring = np.concatenate([inside[0, :], inside[-1, :], inside[:, 0], inside[:, -1]])
            if not np.any(ring):
                break
            half *= 2.0
        else:
            return None
        windows.append((complex(lam), half, centers, h, inside))

    area = 0.0
    error = 0.0
    for index, (lam, half, centers, h, inside) in enumerate(windows):
        claimed = np.zeros(centers.shape, dtype=bool)
        seam = np.zeros(centers.shape, dtype=bool)
        for other_lam, other_half, _, _, _ in windows[:index]:
            dx = np.abs(centers.real - other_lam.real)
            dy = np.abs(centers.imag - other_lam.imag)
            claimed |= (dx < other_half) & (dy < other_half)
            seam |= (np.abs(dx - other_half) < h) & (dy < other_half + h) | (np.abs(dy - other_half) < h) & (dx < other_half + h)
        counted = inside & ~claimed
        area += np.count_nonzero(counted) * h * h
        error += (_boundary_cells(counted) + np.count_nonzero(inside & seam)) * h * h
    return AreaEstimate(area=float(area), error_bound=float(error), cells_evaluated=evaluated, method="windows")
