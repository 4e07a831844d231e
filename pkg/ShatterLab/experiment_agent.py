"""Monte-Carlo campaigns over sparse Bernoulli-Gaussian perturbations.

Trial ``t`` of a campaign with seed ``s`` always perturbs with
``NoiseSpec(n, rho, scale, seed=s, trial=t)``, so campaigns sharing a seed
share their noise: at rho = 1 the sigma_n column of a shatter campaign and
the samples of an m = 0 tail campaign at z = 0 are the same numbers.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Dict, Optional, Tuple, Union

import numpy as np
import pandas as pd
import scipy.linalg
import scipy.stats

from .diagnostic_agent import Diagnostic_Agent, ShatterReference
from .errors import DomainError
from .family_agent import Family_Agent, MatrixFamily
from .matrix_agent import Matrix_Agent, as_sparse
from .noise_agent import STREAM_MATRIX, NoiseSpec, Noise_Agent, complex_gaussian_vector, derive_rng
from .parallel import parallel_map
from .specr_agent import SpecrConfig, SpecrOutcome, Specr_Agent

logger = logging.getLogger(__name__)

FIT_FLOOR_HITS = 5
FIT_CEILING = 0.5

RhoEntry = Union[float, str]


# =============================================================================
# configs
# =============================================================================

def _check_eps_grid(eps_grid, minimum_points: int) -> Tuple[float, ...]:
    eps_grid = tuple(float(eps) for eps in eps_grid)
    if len(eps_grid) < minimum_points:
        raise DomainError(f"eps_grid needs at least {minimum_points} points, got {len(eps_grid)}.")
    if any(not eps > 0 for eps in eps_grid):
        raise DomainError("eps_grid entries must be > 0.")
    if any(a <= b for a, b in zip(eps_grid, eps_grid[1:])):
        raise DomainError("eps_grid must be strictly decreasing.")
    return eps_grid


def geometric_eps_grid(high: float, low: float, points: int) -> Tuple[float, ...]:
    return tuple(float(eps) for eps in np.geomspace(high, low, points))


def resolve_rho(n: int, entry: RhoEntry) -> float:
    """A sparsity value, or a law name such as ``"log2"`` or ``"power:0.5"``, evaluated at n."""
    if isinstance(entry, str):
        law, _, parameter = entry.partition(":")
        try:
            value = float(parameter) if parameter else None
        except ValueError:
            raise DomainError(f"Bad sparsity law parameter in {entry!r}.") from None
        return Noise_Agent.sparsity_law(n, law, value)
    rho = float(entry)
    if not (0.0 < rho <= 1.0):
        raise DomainError(f"Sparsity rho must satisfy 0 < rho <= 1, got rho={rho}.")
    return rho


@dataclass(frozen=True)
class TailCampaignConfig:
    family: MatrixFamily
    rho: float
    eps_grid: Tuple[float, ...]
    m: int = 0
    shift_z: complex = 0j
    trials: int = 4000
    seed: int = 0
    scale: float = 1.0
    pair: bool = False

    campaign = "tail"

    def __post_init__(self):
        NoiseSpec(n=self.family.n, rho=self.rho, scale=self.scale, seed=self.seed)
        object.__setattr__(self, "eps_grid", _check_eps_grid(self.eps_grid, 4))
        object.__setattr__(self, "shift_z", complex(self.shift_z))
        if int(self.m) != self.m or not (0 <= self.m < self.family.n - (1 if self.pair else 0)):
            raise DomainError(f"Need 0 <= m < n, got m={self.m}, n={self.family.n}.")
        if int(self.trials) != self.trials or self.trials < 100:
            raise DomainError(f"Tail campaigns need trials >= 100, got {self.trials}.")

    def to_dict(self) -> dict:
        return {
            "campaign": self.campaign,
            "family": self.family.to_dict(),
            "rho": self.rho,
            "m": int(self.m),
            "shift_z": [self.shift_z.real, self.shift_z.imag],
            "eps_grid": list(self.eps_grid),
            "trials": int(self.trials),
            "seed": int(self.seed),
            "scale": self.scale,
            "pair": bool(self.pair),
        }


@dataclass(frozen=True)
class ShatterCampaignConfig:
    family: MatrixFamily
    rho_list: Tuple[RhoEntry, ...]
    n_list: Tuple[int, ...]
    trials: int = 200
    seed: int = 0
    scale: float = 1.0

    campaign = "shatter"

    def __post_init__(self):
        object.__setattr__(self, "rho_list", tuple(self.rho_list))
        object.__setattr__(self, "n_list", tuple(int(n) for n in self.n_list))
        if not self.rho_list or not self.n_list:
            raise DomainError("Shatter campaigns need nonempty rho_list and n_list.")
        if int(self.trials) != self.trials or self.trials < 1:
            raise DomainError(f"trials must be a positive integer, got {self.trials}.")
        for n in self.n_list:
            for entry in self.rho_list:
                rho = resolve_rho(n, entry)
                if n * rho <= 1:
                    raise DomainError(f"Need n*rho > 1 in every cell, got n={n}, rho={entry!r} (n*rho={n * rho}).")

    def to_dict(self) -> dict:
        return {
            "campaign": self.campaign,
            "family": self.family.to_dict(),
            "rho_list": list(self.rho_list),
            "n_list": list(self.n_list),
            "trials": int(self.trials),
            "seed": int(self.seed),
            "scale": self.scale,
        }


@dataclass(frozen=True)
class AreaCampaignConfig:
    family: MatrixFamily
    rho: Optional[float]
    eps_grid: Tuple[float, ...]
    trials: int = 200
    grid_resolution: int = 24
    seed: int = 0
    scale: float = 1.0
    method: str = "windows"

    campaign = "area"

    def __post_init__(self):
        if self.rho is not None:
            NoiseSpec(n=self.family.n, rho=self.rho, scale=self.scale, seed=self.seed)
        object.__setattr__(self, "eps_grid", _check_eps_grid(self.eps_grid, 1))
        if int(self.trials) != self.trials or self.trials < 1:
            raise DomainError(f"trials must be a positive integer, got {self.trials}.")
        if self.method not in ("grid", "windows"):
            raise DomainError(f"Unknown area method {self.method!r}; expected 'grid' or 'windows'.")

    def to_dict(self) -> dict:
        return {
            "campaign": self.campaign,
            "family": self.family.to_dict(),
            "rho": self.rho,
            "eps_grid": list(self.eps_grid),
            "trials": int(self.trials),
            "grid_resolution": int(self.grid_resolution),
            "seed": int(self.seed),
            "scale": self.scale,
            "method": self.method,
        }


@dataclass(frozen=True)
class CouponCampaignConfig:
    n: int
    c_list: Tuple[float, ...]
    trials: int = 2000
    seed: int = 0

    campaign = "coupon"

    def __post_init__(self):
        object.__setattr__(self, "c_list", tuple(float(c) for c in self.c_list))
        if int(self.n) != self.n or self.n < 8:
            raise DomainError(f"The coupon-collector probe needs n >= 8, got n={self.n}.")
        if not self.c_list or any(not c > 0 for c in self.c_list):
            raise DomainError("c_list must hold positive constants.")
        if int(self.trials) != self.trials or self.trials < 1:
            raise DomainError(f"trials must be a positive integer, got {self.trials}.")

    def to_dict(self) -> dict:
        return {
            "campaign": self.campaign,
            "n": int(self.n),
            "c_list": list(self.c_list),
            "trials": int(self.trials),
            "seed": int(self.seed),
        }


@dataclass(frozen=True)
class SpecrCampaignConfig:
    family: MatrixFamily
    rho: float
    eps: float
    delta: float
    trials: int = 50
    seed: int = 0
    k_override: Optional[int] = None

    campaign = "specr"

    def __post_init__(self):
        SpecrConfig(rho=self.rho, eps=self.eps, delta=self.delta, seed=self.seed, k_override=self.k_override)
        if int(self.trials) != self.trials or self.trials < 1:
            raise DomainError(f"trials must be a positive integer, got {self.trials}.")

    def to_dict(self) -> dict:
        return {
            "campaign": self.campaign,
            "family": self.family.to_dict(),
            "rho": self.rho,
            "eps": self.eps,
            "delta": self.delta,
            "trials": int(self.trials),
            "seed": int(self.seed),
            "k": self.k_override,
        }


@dataclass(frozen=True)
class InequalityCampaignConfig:
    n: int = 8
    instances: int = 500
    seed: int = 0
    eps: float = 1e-3

    campaign = "inequalities"

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise DomainError(f"The inequality suite needs n >= 2, got n={self.n}.")
        if int(self.instances) != self.instances or self.instances < 1:
            raise DomainError(f"instances must be a positive integer, got {self.instances}.")
        if not self.eps > 0:
            raise DomainError(f"eps must be > 0, got eps={self.eps}.")

    def to_dict(self) -> dict:
        return {
            "campaign": self.campaign,
            "n": int(self.n),
            "instances": int(self.instances),
            "seed": int(self.seed),
            "eps": self.eps,
        }


# =============================================================================
# results
# =============================================================================

@dataclass(frozen=True)
class TailCampaignResult:
    config: TailCampaignConfig
    empirical_cdf: Tuple[Tuple[float, float], ...]
    fitted_slope: Optional[float]
    slope_stderr: Optional[float]
    trials_used: int
    samples: np.ndarray
    log_reference: Optional[Tuple[float, ...]] = None
    log_eps_ceiling: Optional[float] = None
    message: Optional[str] = None

    def rows(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.empirical_cdf, columns=["eps", "fraction"])
        frame.insert(0, "m", int(self.config.m))
        frame["count"] = np.rint(frame["fraction"] * self.trials_used).astype(int)
        if self.log_reference is not None:
            frame["log_reference_bound"] = list(self.log_reference)
        return frame

    def summary(self) -> dict:
        return {
            "m": int(self.config.m),
            "fitted_slope": self.fitted_slope,
            "slope_stderr": self.slope_stderr,
            "trials_used": int(self.trials_used),
            "log_eps_ceiling": self.log_eps_ceiling,
            "message": self.message,
        }


@dataclass(frozen=True)
class TailPairResult:
    first: TailCampaignResult
    second: TailCampaignResult
    gap_split: Optional[Tuple[float, float]]

    def rows(self) -> pd.DataFrame:
        return pd.concat([self.first.rows(), self.second.rows()], ignore_index=True)

    def summary(self) -> dict:
        split = None
        if self.gap_split is not None:
            split = {"lambda": self.gap_split[0], "value": self.gap_split[1], "nontrivial": self.gap_split[1] > 2}
        return {"tails": [self.first.summary(), self.second.summary()], "gap_split": split}


@dataclass(frozen=True)
class ShatterRecord:
    trial: int
    kappa_v_lower: float
    kappa_v_upper: float
    kappa_v_direct: float
    eta: float
    sigma_n: float
    nnz: int
    untouched_rows: int
    defective: bool


@dataclass(frozen=True)
class ShatterCampaignResult:
    n: int
    rho: float
    rho_label: str
    records: Tuple[ShatterRecord, ...]
    quantiles: Dict[str, Dict[str, float]]
    untouched_trials: int
    reference: ShatterReference

    def sandwich_failures(self) -> int:
        failures = 0
        for r in self.records:
            if math.isfinite(r.kappa_v_lower):
                slack = 1.0 + 1e-12
                if not (r.kappa_v_lower <= r.kappa_v_upper * slack and r.kappa_v_upper <= self.n * r.kappa_v_lower * slack):
                    failures += 1
        return failures

    def rows(self) -> pd.DataFrame:
        frame = pd.DataFrame([r.__dict__ for r in self.records])
        frame.insert(0, "rho_label", self.rho_label)
        frame.insert(0, "rho", self.rho)
        frame.insert(0, "n", self.n)
        return frame

    def summary(self) -> dict:
        return {
            "n": int(self.n),
            "rho": self.rho,
            "rho_label": self.rho_label,
            "trials": len(self.records),
            "quantiles": self.quantiles,
            "untouched_trials": int(self.untouched_trials),
            "sandwich_failures": self.sandwich_failures(),
            "reference": {
                "K": self.reference.k,
                "log_kappa_ceiling": self.reference.log_kappa_ceiling,
                "log_eta_floor": self.reference.log_eta_floor,
            },
        }


@dataclass(frozen=True)
class ShatterCampaignSummary:
    config: ShatterCampaignConfig
    cells: Tuple[ShatterCampaignResult, ...]
    fits: Dict[str, Dict[str, Optional[float]]]

    def cell(self, n: int, rho_label: str) -> ShatterCampaignResult:
        for cell in self.cells:
            if cell.n == n and cell.rho_label == rho_label:
                return cell
        raise KeyError((n, rho_label))

    def rows(self) -> pd.DataFrame:
        return pd.concat([cell.rows() for cell in self.cells], ignore_index=True)

    def summary(self) -> dict:
        return {"cells": [cell.summary() for cell in self.cells], "fits": self.fits}


@dataclass(frozen=True)
class AreaCampaignResult:
    config: AreaCampaignConfig
    areas: np.ndarray
    error_bounds: np.ndarray
    fitted_slope: Optional[float]
    slope_stderr: Optional[float]
    message: Optional[str] = None

    @property
    def mean_area(self) -> np.ndarray:
        return self.areas.mean(axis=0)

    def rows(self) -> pd.DataFrame:
        trials, points = self.areas.shape
        return pd.DataFrame({
            "trial": np.repeat(np.arange(trials), points),
            "eps": np.tile(np.asarray(self.config.eps_grid), trials),
            "area": self.areas.ravel(),
            "error_bound": self.error_bounds.ravel(),
        })

    def summary(self) -> dict:
        trials = self.areas.shape[0]
        stderr = self.areas.std(axis=0, ddof=1) / math.sqrt(trials) if trials > 1 else np.zeros(self.areas.shape[1])
        return {
            "eps": list(self.config.eps_grid),
            "mean_area": [float(a) for a in self.mean_area],
            "area_stderr": [float(s) for s in stderr],
            "mean_error_bound": [float(e) for e in self.error_bounds.mean(axis=0)],
            "fitted_slope": self.fitted_slope,
            "slope_stderr": self.slope_stderr,
            "message": self.message,
        }


@dataclass(frozen=True)
class CouponProbeResult:
    config: CouponCampaignConfig
    rho: Tuple[float, ...]
    fraction: Tuple[float, ...]
    mean_untouched: Tuple[float, ...]

    def rows(self) -> pd.DataFrame:
        n = self.config.n
        return pd.DataFrame({
            "c": list(self.config.c_list),
            "rho": list(self.rho),
            "fraction": list(self.fraction),
            "mean_untouched_rows": list(self.mean_untouched),
            "expected_untouched_rows": [n * (1.0 - rho) ** n for rho in self.rho],
        })

    def summary(self) -> dict:
        return {"n": int(self.config.n), "fraction": dict(zip([str(c) for c in self.config.c_list], self.fraction))}


@dataclass(frozen=True)
class SpecrCampaignResult:
    config: SpecrCampaignConfig
    outcomes: Tuple[SpecrOutcome, ...]

    @property
    def success_fraction(self) -> float:
        return float(np.mean([bool(o.within(self.config.eps)) for o in self.outcomes]))

    @property
    def backward_fraction(self) -> float:
        return float(np.mean([o.perturbation_norm <= self.config.delta for o in self.outcomes]))

    def rows(self) -> pd.DataFrame:
        return pd.DataFrame({
            "trial": np.arange(len(self.outcomes)),
            "estimate": [o.estimate for o in self.outcomes],
            "oracle_spr": [o.oracle_spr for o in self.outcomes],
            "relative_error": [o.relative_error for o in self.outcomes],
            "perturbation_norm": [o.perturbation_norm for o in self.outcomes],
            "k_used": [o.k_used for o in self.outcomes],
            "nnz_perturbed": [o.nnz_perturbed for o in self.outcomes],
        })

    def summary(self) -> dict:
        return {
            "trials": len(self.outcomes),
            "k_used": int(self.outcomes[0].k_used),
            "success_fraction": self.success_fraction,
            "backward_error_fraction": self.backward_fraction,
            "median_relative_error": float(np.median([o.relative_error for o in self.outcomes])),
        }


@dataclass(frozen=True)
class InequalitySuiteResult:
    config: InequalityCampaignConfig
    failures: Dict[str, int]

    @property
    def total_failures(self) -> int:
        return sum(self.failures.values())

    def rows(self) -> pd.DataFrame:
        return pd.DataFrame({
            "check": list(self.failures),
            "instances": int(self.config.instances),
            "failures": list(self.failures.values()),
        })

    def summary(self) -> dict:
        return {"instances": int(self.config.instances), "failures": dict(self.failures)}


# =============================================================================
# agent
# =============================================================================

def _perturbed(M, spec: NoiseSpec):
    N = Noise_Agent.sample_sparse_noise(spec)
    return as_sparse(as_sparse(M) + N), N


def _linear_fit(x, y) -> Tuple[Optional[float], Optional[float]]:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = np.isfinite(x) & np.isfinite(y)
    if np.count_nonzero(keep) < 3 or np.ptp(x[keep]) == 0:
        return None, None
    fit = scipy.stats.linregress(x[keep], y[keep])
    return float(fit.slope), float(fit.stderr)


def _quantiles(values) -> Dict[str, float]:
    values = np.asarray(values, dtype=float)
    finite = values[np.isfinite(values)]
    if finite.size == 0:
        return {"q10": float("inf"), "q50": float("inf"), "q90": float("inf"), "finite": 0}
    q10, q50, q90 = np.quantile(finite, [0.1, 0.5, 0.9])
    return {"q10": float(q10), "q50": float(q50), "q90": float(q90), "finite": int(finite.size)}


class Experiment_Agent:
    @staticmethod
    def empirical_cdf(samples, eps_grid) -> Tuple[Tuple[float, float], ...]:
        """Fraction of samples <= eps, for each eps in increasing order."""
        samples = np.sort(np.asarray(samples, dtype=float))
        if samples.size == 0:
            raise DomainError("empirical_cdf needs at least one sample.")
        eps_sorted = np.sort(np.asarray(eps_grid, dtype=float))
        counts = np.searchsorted(samples, eps_sorted, side="right")
        return tuple((float(eps), float(count) / samples.size) for eps, count in zip(eps_sorted, counts))

    @staticmethod
    def fit_log_slope(points, window: Optional[Tuple[float, float]] = None, axis: str = "x") -> Tuple[float, float]:
        """Least squares slope of log y against log x, with its standard error.

        Only points with positive coordinates whose ``axis`` coordinate lies in
        the closed ``window`` take part.
        """
        points = np.asarray(points, dtype=float).reshape(-1, 2)
        x, y = points[:, 0], points[:, 1]
        keep = (x > 0) & (y > 0) & np.isfinite(x) & np.isfinite(y)
        if window is not None:
            coordinate = x if axis == "x" else y
            keep &= (coordinate >= window[0]) & (coordinate <= window[1])
        if np.count_nonzero(keep) < 3:
            raise DomainError(f"A slope fit needs at least 3 points in the window, got {np.count_nonzero(keep)}.")
        log_x, log_y = np.log(x[keep]), np.log(y[keep])
        if np.ptp(log_x) == 0:
            raise DomainError("Degenerate x values: all fit points share the same x.")
        fit = scipy.stats.linregress(log_x, log_y)
        return float(fit.slope), float(fit.stderr)

    @staticmethod
    def run_tail_campaign(cfg: TailCampaignConfig, workers: Optional[int] = None) -> TailCampaignResult:
        M = Family_Agent.build(cfg.family)
        n = cfg.family.n

        def trial(t):
            A, _ = _perturbed(M, NoiseSpec(n=n, rho=cfg.rho, scale=cfg.scale, seed=cfg.seed, trial=t))
            return Diagnostic_Agent.shifted_sigma(A, cfg.shift_z, cfg.m)

        samples = np.asarray(parallel_map(trial, range(cfg.trials), workers), dtype=float)
        cdf = Experiment_Agent.empirical_cdf(samples, cfg.eps_grid)

        slope = stderr = message = None
        try:
            slope, stderr = Experiment_Agent.fit_log_slope(cdf, window=(FIT_FLOOR_HITS / cfg.trials, FIT_CEILING), axis="y")
        except DomainError as exc:
            message = f"No slope fitted: {exc}"
            logger.warning("Tail campaign m=%d: %s", cfg.m, message)

        log_reference = log_ceiling = None
        if n * cfg.rho > 1:
            R = max(1.0, Matrix_Agent.operator_norm(M) + abs(cfg.shift_z))
            references = [Diagnostic_Agent.singular_tail_reference(n, cfg.m, R, eps, cfg.rho) for eps, _ in cdf]
            log_reference = tuple(ref.log_bound for ref in references)
            log_ceiling = references[0].log_eps_ceiling

        logger.info("Tail campaign n=%d m=%d trials=%d slope=%s", n, cfg.m, cfg.trials, slope)
        return TailCampaignResult(
            config=cfg,
            empirical_cdf=cdf,
            fitted_slope=slope,
            slope_stderr=stderr,
            trials_used=int(cfg.trials),
            samples=samples,
            log_reference=log_reference,
            log_eps_ceiling=log_ceiling,
            message=message,
        )

    @staticmethod
    def run_tail_pair(cfg: TailCampaignConfig, workers: Optional[int] = None) -> TailPairResult:
        """Tail campaigns at m and m + 1 on shared noise, plus the best exponent split."""
        first = Experiment_Agent.run_tail_campaign(cfg, workers)
        second_cfg = TailCampaignConfig(
            family=cfg.family, rho=cfg.rho, eps_grid=cfg.eps_grid, m=cfg.m + 1, shift_z=cfg.shift_z,
            trials=cfg.trials, seed=cfg.seed, scale=cfg.scale,
        )
        second = Experiment_Agent.run_tail_campaign(second_cfg, workers)
        split = None
        if first.fitted_slope is not None and second.fitted_slope is not None and min(first.fitted_slope, second.fitted_slope) > 0:
            split = Diagnostic_Agent.gap_split_exponent(first.fitted_slope, second.fitted_slope)
        return TailPairResult(first, second, split)

    @staticmethod
    def run_shatter_campaign(cfg: ShatterCampaignConfig, workers: Optional[int] = None) -> ShatterCampaignSummary:
        cells = []
        for n in cfg.n_list:
            M = Family_Agent.build(cfg.family.with_n(n))
            norm_M = Matrix_Agent.operator_norm(M)
            for entry in cfg.rho_list:
                rho = resolve_rho(n, entry)

                def trial(t, rho=rho, M=M, n=n):
                    A, N = _perturbed(M, NoiseSpec(n=n, rho=rho, scale=cfg.scale, seed=cfg.seed, trial=t))
                    report = Diagnostic_Agent.spectral_report(A)
                    return ShatterRecord(
                        trial=t,
                        kappa_v_lower=report.kappa_v_lower,
                        kappa_v_upper=report.kappa_v_upper,
                        kappa_v_direct=report.kappa_v_direct,
                        eta=report.eta,
                        sigma_n=report.sigma_n,
                        nnz=int(N.nnz),
                        untouched_rows=int(Noise_Agent.untouched_rows(N).size),
                        defective=report.defective,
                    )

                records = tuple(parallel_map(trial, range(cfg.trials), workers))
                with np.errstate(divide="ignore"):
                    log_kappa = np.log([r.kappa_v_upper for r in records])
                    log_inv_eta = -np.log([r.eta for r in records])
                cells.append(ShatterCampaignResult(
                    n=n,
                    rho=rho,
                    rho_label=str(entry),
                    records=records,
                    quantiles={
                        "log_kappa_v_upper": _quantiles(log_kappa),
                        "log_inv_eta": _quantiles(log_inv_eta),
                        "sigma_n": _quantiles([r.sigma_n for r in records]),
                    },
                    untouched_trials=sum(1 for r in records if r.untouched_rows > 0),
                    reference=Diagnostic_Agent.shatter_reference(norm_M, n, rho),
                ))
                logger.info("Shatter cell n=%d rho=%s: median log kappa_V=%.4g", n, entry, cells[-1].quantiles["log_kappa_v_upper"]["q50"])

        fits = {}
        for entry in cfg.rho_list:
            label = str(entry)
            chosen = [cell for cell in cells if cell.rho_label == label]
            log_n = [math.log(cell.n) for cell in chosen]
            kappa = [cell.quantiles["log_kappa_v_upper"]["q50"] for cell in chosen]
            inv_eta = [cell.quantiles["log_inv_eta"]["q50"] for cell in chosen]
            kappa_slope, kappa_stderr = _linear_fit(log_n, kappa)
            eta_slope, eta_stderr = _linear_fit(log_n, inv_eta)
            try:
                polylog, polylog_stderr = Experiment_Agent.fit_log_slope(list(zip(log_n, kappa)))
            except DomainError:
                polylog = polylog_stderr = None
            fits[label] = {
                "log_kappa_vs_log_n": kappa_slope,
                "log_kappa_vs_log_n_stderr": kappa_stderr,
                "log_inv_eta_vs_log_n": eta_slope,
                "log_inv_eta_vs_log_n_stderr": eta_stderr,
                "log_kappa_polylog_exponent": polylog,
                "log_kappa_polylog_exponent_stderr": polylog_stderr,
            }
        return ShatterCampaignSummary(config=cfg, cells=tuple(cells), fits=fits)

    @staticmethod
    def run_area_campaign(cfg: AreaCampaignConfig, workers: Optional[int] = None) -> AreaCampaignResult:
        M = Family_Agent.build(cfg.family)
        n = cfg.family.n

        def trial(t):
            if cfg.rho is None:
                A = M
            else:
                A, _ = _perturbed(M, NoiseSpec(n=n, rho=cfg.rho, scale=cfg.scale, seed=cfg.seed, trial=t))
            if cfg.method == "grid":
                cell = 2.0 * (Matrix_Agent.operator_norm(A) + cfg.eps_grid[0]) / cfg.grid_resolution
                if cfg.eps_grid[-1] < 5.0 * cell:
                    raise DomainError(
                        f"Grid resolution {cfg.grid_resolution} is too coarse for eps={cfg.eps_grid[-1]}: "
                        f"cells are {cell:.3g} wide and eps must span at least 5 of them."
                    )
            estimates = [
                Diagnostic_Agent.pseudospectral_area(A, eps, resolution=cfg.grid_resolution, method=cfg.method, workers=1)
                for eps in cfg.eps_grid
            ]
            return [e.area for e in estimates], [e.error_bound for e in estimates]

        results = parallel_map(trial, range(cfg.trials), workers)
        areas = np.array([r[0] for r in results], dtype=float)
        bounds = np.array([r[1] for r in results], dtype=float)

        slope = stderr = message = None
        try:
            slope, stderr = Experiment_Agent.fit_log_slope(list(zip(cfg.eps_grid, areas.mean(axis=0))))
        except DomainError as exc:
            message = f"No slope fitted: {exc}"
        logger.info("Area campaign n=%d trials=%d slope=%s", n, cfg.trials, slope)
        return AreaCampaignResult(cfg, areas, bounds, slope, stderr, message)

    @staticmethod
    def coupon_collector_probe(cfg: CouponCampaignConfig, workers: Optional[int] = None) -> CouponProbeResult:
        n = cfg.n
        rhos, fractions, means = [], [], []
        for c in cfg.c_list:
            rho = min(1.0, c * math.log(n) / n)

            def trial(t, rho=rho):
                N = Noise_Agent.sample_sparse_noise(NoiseSpec(n=n, rho=rho, seed=cfg.seed, trial=t))
                return int(Noise_Agent.untouched_rows(N).size)

            untouched = np.asarray(parallel_map(trial, range(cfg.trials), workers))
            rhos.append(rho)
            fractions.append(float(np.count_nonzero(untouched) / cfg.trials))
            means.append(float(untouched.mean()))
            logger.info("Coupon probe n=%d c=%g: untouched fraction %.4f", n, c, fractions[-1])
        return CouponProbeResult(cfg, tuple(rhos), tuple(fractions), tuple(means))

    @staticmethod
    def run_specr_campaign(cfg: SpecrCampaignConfig, workers: Optional[int] = None) -> SpecrCampaignResult:
        M = Family_Agent.build(cfg.family)

        def trial(t):
            spec = SpecrConfig(rho=cfg.rho, eps=cfg.eps, delta=cfg.delta, seed=cfg.seed, k_override=cfg.k_override, trial=t)
            return Specr_Agent.specr_estimate(M, spec, with_oracle=True)

        outcomes = tuple(parallel_map(trial, range(cfg.trials), workers))
        result = SpecrCampaignResult(cfg, outcomes)
        logger.info("specr campaign: %.0f%% within (1 +- %g)", 100 * result.success_fraction, cfg.eps)
        return result

    @staticmethod
    def run_inequality_suite(cfg: InequalityCampaignConfig, workers: Optional[int] = None) -> InequalitySuiteResult:
        """Deterministic inequalities on random complex Gaussian matrices scaled to ||A|| = 1."""
        n = cfg.n

        def instance(i):
            rng = derive_rng(cfg.seed, i, STREAM_MATRIX)
            A = complex_gaussian_vector(rng, (n, n))
            A = A / Matrix_Agent.operator_norm(A)
            z = 1.5 * math.sqrt(rng.random()) * np.exp(2j * np.pi * rng.random())
            k = int(rng.integers(1, n + 1))
            B, _ = scipy.linalg.qr(complex_gaussian_vector(rng, (n, k)), mode="economic")

            failed = set()
            if not Diagnostic_Agent.weyl_pair_check(A, z):
                failed.add("weyl_pair")
            report = Diagnostic_Agent.spectral_report(A)
            if report.eta > 0 and report.kappa_v_direct > Diagnostic_Agent.exponential_kappa_bound(report.eta, n) * (1 + 1e-6):
                failed.add("exponential_bound")
            if Diagnostic_Agent.disk_containment_check(A, cfg.eps, seed=cfg.seed, trial=i).violations:
                failed.add("disk_containment")
            basis = Diagnostic_Agent.rref_basis(B)
            if np.min(np.abs(basis.diagonal)) < (1.0 - 1e-12) / math.sqrt(n):
                failed.add("pivot_bound")
            slack = 1.0 + 1e-12
            if not (report.kappa_v_lower <= report.kappa_v_upper * slack
                    and report.kappa_v_upper <= n * report.kappa_v_lower * slack):
                failed.add("sandwich")
            return failed

        checks = ("weyl_pair", "exponential_bound", "disk_containment", "pivot_bound", "sandwich")
        outcomes = parallel_map(instance, range(cfg.instances), workers)
        failures = {check: sum(1 for failed in outcomes if check in failed) for check in checks}
        if any(failures.values()):
            logger.warning("Inequality suite failures: %s", failures)
        return InequalitySuiteResult(cfg, failures)

    @staticmethod
    def plan(cfg) -> Dict[str, int]:
        """Trial count and matvec estimate; a dense factorization of size n counts as n matvecs."""
        if isinstance(cfg, TailCampaignConfig):
            trials = cfg.trials * (2 if cfg.pair else 1)
            return {"trials": trials, "matvecs": trials * cfg.family.n}
        if isinstance(cfg, ShatterCampaignConfig):
            trials = cfg.trials * len(cfg.n_list) * len(cfg.rho_list)
            return {"trials": trials, "matvecs": sum(2 * cfg.trials * n * len(cfg.rho_list) for n in cfg.n_list)}
        if isinstance(cfg, AreaCampaignConfig):
            cells = cfg.family.n * cfg.grid_resolution ** 2 if cfg.method == "windows" else cfg.grid_resolution ** 2
            return {"trials": cfg.trials, "matvecs": cfg.trials * len(cfg.eps_grid) * cells * cfg.family.n}
        if isinstance(cfg, CouponCampaignConfig):
            return {"trials": cfg.trials * len(cfg.c_list), "matvecs": 0}
        if isinstance(cfg, SpecrCampaignConfig):
            M = Family_Agent.build(cfg.family)
            n = cfg.family.n
            k = cfg.k_override or Specr_Agent.k_formula(n, cfg.rho, Matrix_Agent.operator_norm(M), cfg.eps, cfg.delta)
            return {"trials": cfg.trials, "matvecs": cfg.trials * (k + n)}
        if isinstance(cfg, InequalityCampaignConfig):
            return {"trials": cfg.instances, "matvecs": cfg.instances * 4 * cfg.n}
        raise DomainError(f"Unknown campaign config {type(cfg).__name__}.")

    @staticmethod
    def run(cfg, workers: Optional[int] = None):
        if isinstance(cfg, TailCampaignConfig):
            if cfg.pair:
                return Experiment_Agent.run_tail_pair(cfg, workers)
            return Experiment_Agent.run_tail_campaign(cfg, workers)
        if isinstance(cfg, ShatterCampaignConfig):
            return Experiment_Agent.run_shatter_campaign(cfg, workers)
        if isinstance(cfg, AreaCampaignConfig):
            return Experiment_Agent.run_area_campaign(cfg, workers)
        if isinstance(cfg, CouponCampaignConfig):
            return Experiment_Agent.coupon_collector_probe(cfg, workers)
        if isinstance(cfg, SpecrCampaignConfig):
            return Experiment_Agent.run_specr_campaign(cfg, workers)
        if isinstance(cfg, InequalityCampaignConfig):
            return Experiment_Agent.run_inequality_suite(cfg, workers)
        raise DomainError(f"Unknown campaign config {type(cfg).__name__}.")
