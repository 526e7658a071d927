"""Kriging prediction, prediction variance, APV, and exceedance probability.

Prediction variance is the exact Gaussian conditional variance of S(x) given
the observations: PV(x) = sigma2 - c' V^-1 c with c the field covariance
between x and the data locations and V the observation covariance.  It
depends on locations and parameters only, never on observed values.

The per-location nugget can be scaled by measurement effort: with counts
n_i, the effective nugget is tau2 * (mean(n) / n_i), so better-sampled
households carry less noise.  This is switchable back to a constant nugget.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import linalg as sla
from scipy import special

from geoadapt.data import SurveyData
from geoadapt.errors import GeoadaptError
from geoadapt.geometry import Location, Region, locations_to_xy
from geoadapt.model import ModelSpec, cholesky_covariance, covariance_matrix_xy, cross_covariance_xy

NUGGET_CONSTANT = "constant"
NUGGET_COUNT_SCALED = "count-scaled"

# Conditional variances within this fraction of sigma2 of zero clip to
# exactly 0 (interpolation at data points lands here up to roundoff).
_VAR_CLIP_FRACTION = 1e-10


@dataclass(frozen=True)
class PredictionResult:
    """Predictive mean, prediction variance, and optional exceedance per target."""

    targets: tuple[Location, ...]
    mean: np.ndarray = field(repr=False)
    variance: np.ndarray = field(repr=False)
    exceedance: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        n = len(self.targets)
        if np.asarray(self.mean).shape != (n,) or np.asarray(self.variance).shape != (n,):
            raise ValueError("mean and variance must match targets length")
        if np.any(np.asarray(self.variance) < 0):
            raise ValueError("variances must be nonnegative")
        if self.exceedance is not None:
            exc = np.asarray(self.exceedance)
            if exc.shape != (n,) or np.any((exc < 0) | (exc > 1)):
                raise ValueError("exceedance must be probabilities per target")


def effective_nugget(model: ModelSpec, tested: np.ndarray | None, mode: str) -> np.ndarray | float:
    """Per-observation nugget: constant tau2, or tau2 * mean(n)/n_i."""
    if mode == NUGGET_CONSTANT or tested is None or model.tau2 == 0.0:
        return model.tau2
    if mode != NUGGET_COUNT_SCALED:
        raise ValueError(f"unknown nugget mode: {mode!r}")
    tested = np.asarray(tested, dtype=np.float64)
    return model.tau2 * (tested.mean() / tested)


def _data_factor(
    model: ModelSpec, data_xy: np.ndarray, nugget: np.ndarray | float
) -> np.ndarray:
    v = covariance_matrix_xy(data_xy, model, nugget=nugget)
    return cholesky_covariance(v, model, xy=data_xy)


def _clip_variance(var: np.ndarray, sigma2: float) -> np.ndarray:
    tol = _VAR_CLIP_FRACTION * sigma2
    if np.any(var < -1e-6 * sigma2):
        raise GeoadaptError("conditional variance went significantly negative; "
                            "covariance is numerically inconsistent")
    out = np.where(var < tol, 0.0, var)
    return np.maximum(out, 0.0)


def conditional_moments_xy(
    model: ModelSpec,
    data_xy: np.ndarray,
    y_star: np.ndarray,
    target_xy: np.ndarray,
    data_trend: np.ndarray | None = None,
    target_trend: np.ndarray | None = None,
    nugget: np.ndarray | float | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Conditional mean of trend + S and conditional variance of S at targets.

    ``data_trend`` / ``target_trend`` are precomputed d(x)'beta vectors
    (defaulting to the intercept).  ``nugget`` defaults to the model's tau2.
    """
    sigma2 = model.matern.sigma2
    target_xy = np.asarray(target_xy, dtype=np.float64)
    m = len(target_xy)
    if target_trend is None:
        target_trend = np.full(m, model.beta[0])
    if len(data_xy) == 0:
        return target_trend.copy(), np.full(m, sigma2)
    if data_trend is None:
        data_trend = np.full(len(data_xy), model.beta[0])
    if nugget is None:
        nugget = model.tau2
    factor = _data_factor(model, data_xy, nugget)
    cross = cross_covariance_xy(data_xy, target_xy, model)
    w = sla.solve_triangular(factor, cross, lower=True)
    var = _clip_variance(sigma2 - np.einsum("ij,ij->j", w, w), sigma2)
    resid = sla.solve_triangular(factor, np.asarray(y_star) - data_trend, lower=True)
    mean = target_trend + w.T @ resid
    return mean, var


def pv_surface_xy(
    model: ModelSpec,
    data_xy: np.ndarray,
    target_xy: np.ndarray,
    nugget: np.ndarray | float | None = None,
) -> np.ndarray:
    """Prediction variance at targets; values play no role, locations only."""
    sigma2 = model.matern.sigma2
    if len(data_xy) == 0:
        return np.full(len(target_xy), sigma2)
    if nugget is None:
        nugget = model.tau2
    factor = _data_factor(model, data_xy, nugget)
    cross = cross_covariance_xy(data_xy, target_xy, model)
    w = sla.solve_triangular(factor, cross, lower=True)
    return _clip_variance(sigma2 - np.einsum("ij,ij->j", w, w), sigma2)


def pv_surface_from_cov(
    cov: np.ndarray,
    data_idx: np.ndarray,
    model: ModelSpec,
    nugget: np.ndarray | float | None = None,
    target_idx: np.ndarray | None = None,
    data_xy: np.ndarray | None = None,
) -> np.ndarray:
    """Prediction variance from a precomputed candidate covariance matrix.

    ``cov`` is the field covariance (sigma2 * R, no nugget) over the full
    candidate set; data and targets are row indices into it.  Equivalent to
    ``pv_surface_xy`` on the corresponding coordinates.
    """
    data_idx = np.asarray(data_idx, dtype=np.intp)
    prior = np.diag(cov) if target_idx is None else np.diag(cov)[target_idx]
    if len(data_idx) == 0:
        return prior.astype(np.float64, copy=True)
    if nugget is None:
        nugget = model.tau2
    v = cov[np.ix_(data_idx, data_idx)].copy()
    v[np.diag_indices_from(v)] += nugget
    factor = cholesky_covariance(v, model, xy=data_xy)
    cross = cov[data_idx, :] if target_idx is None else cov[np.ix_(data_idx, target_idx)]
    w = sla.solve_triangular(factor, cross, lower=True)
    return _clip_variance(prior - np.einsum("ij,ij->j", w, w), model.matern.sigma2)


def _trend_values(model: ModelSpec, covariates: np.ndarray | None, n: int, what: str) -> np.ndarray:
    beta = np.asarray(model.beta)
    if model.n_covariates == 0:
        return np.full(n, beta[0])
    if covariates is None:
        raise GeoadaptError(
            f"model has {model.n_covariates} trend covariates but no {what} covariates were given"
        )
    covariates = np.asarray(covariates, dtype=np.float64)
    if covariates.shape != (n, model.n_covariates):
        raise GeoadaptError(
            f"{what} covariates must have shape ({n}, {model.n_covariates}), got {covariates.shape}"
        )
    return beta[0] + covariates @ beta[1:]


def krige(
    model: ModelSpec,
    data: SurveyData,
    targets: Sequence[Location],
    target_covariates: np.ndarray | None = None,
    nugget_mode: str = NUGGET_CONSTANT,
    threshold: float | None = None,
) -> PredictionResult:
    """Minimum mean-square-error prediction of trend + S at the targets.

    With tau2 = 0 the predictor interpolates: at a data location the mean
    reproduces the observation and the variance is 0.  When ``threshold`` is
    given the result also carries exceedance probabilities.
    """
    targets = tuple(targets)
    data_xy = locations_to_xy(data.locations)
    target_xy = locations_to_xy(targets)
    nugget = effective_nugget(model, data.tested, nugget_mode)
    mean, var = conditional_moments_xy(
        model,
        data_xy,
        data.y_star,
        target_xy,
        data_trend=_trend_values(model, data.covariates, data.n, "data"),
        target_trend=_trend_values(model, target_covariates, len(targets), "target"),
        nugget=nugget,
    )
    exceedance = None if threshold is None else _exceedance(mean, var, threshold)
    return PredictionResult(targets=targets, mean=mean, variance=var, exceedance=exceedance)


def prediction_variance_surface(
    model: ModelSpec,
    design_locations: Sequence[Location],
    targets: Sequence[Location],
    per_location_n=None,
) -> np.ndarray:
    """PV at each target given a (possibly empty) set of observation locations.

    ``per_location_n`` switches on count-scaled nuggets: locations with more
    tested individuals get proportionally less measurement noise.
    """
    tested = None if per_location_n is None else np.asarray(per_location_n, dtype=np.float64)
    mode = NUGGET_CONSTANT if tested is None else NUGGET_COUNT_SCALED
    nugget = effective_nugget(model, tested, mode)
    return pv_surface_xy(
        model, locations_to_xy(design_locations), locations_to_xy(targets), nugget=nugget
    )


def apv(
    model: ModelSpec,
    design: Sequence[Location],
    region: Region,
    data: SurveyData | None = None,
    grid_k: int | None = None,
    nugget_mode: str = NUGGET_CONSTANT,
) -> float:
    """Average prediction variance: unweighted mean of PV over the region's
    evaluation point set."""
    points = region.evaluation_points(grid_k)
    if not points:
        raise GeoadaptError("region provides no evaluation points")
    tested = data.tested if (data is not None and nugget_mode == NUGGET_COUNT_SCALED) else None
    pv = prediction_variance_surface(model, design, points, per_location_n=tested)
    return float(pv.mean())


def _exceedance(mean: np.ndarray, var: np.ndarray, threshold: float) -> np.ndarray:
    out = np.empty_like(mean)
    deg = var == 0
    sd = np.sqrt(np.where(deg, 1.0, var))
    out = special.ndtr((mean - threshold) / sd)
    # Degenerate predictive distributions: point mass at the mean; ties at
    # the threshold split to 0.5 by convention.
    out[deg & (mean > threshold)] = 1.0
    out[deg & (mean < threshold)] = 0.0
    out[deg & (mean == threshold)] = 0.5
    return out


def exceedance_probability(
    model: ModelSpec,
    data: SurveyData,
    targets: Sequence[Location],
    threshold: float,
    target_covariates: np.ndarray | None = None,
    nugget_mode: str = NUGGET_CONSTANT,
) -> np.ndarray:
    """Plug-in probability that S-plus-trend exceeds the threshold per target."""
    result = krige(
        model,
        data,
        targets,
        target_covariates=target_covariates,
        nugget_mode=nugget_mode,
        threshold=threshold,
    )
    return result.exceedance
