"""Maximum-likelihood estimation of the Gaussian field model.

The trend coefficients are profiled out by generalized least squares at each
covariance evaluation, so the search runs over log(sigma2, phi, tau2) with
the smoothness kappa held fixed (it is weakly identified and conventionally
pinned, 1.5 by default).  A derivative-free simplex search from three
spread-out heuristic starts, plus one refinement restart from the incumbent,
keeps the fit robust without gradients.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla
from scipy import optimize

from geoadapt.data import SurveyData
from geoadapt.errors import InferenceError
from geoadapt.geometry import locations_to_xy, pairwise_distances
from geoadapt.kriging import NUGGET_CONSTANT, effective_nugget
from geoadapt.model import (
    MaternParams,
    ModelSpec,
    cholesky_covariance,
    covariance_matrix_xy,
    matern_correlation,
)

_LOG_2PI = math.log(2.0 * math.pi)

SMALL_COUNT_THRESHOLD = 100


@dataclass(frozen=True)
class FitOptions:
    """Knobs for :func:`fit_ml`; the defaults suit household-survey scales."""

    min_n: int = 20
    max_evals_per_start: int = 2000
    ll_tol: float = 1e-8
    simplex_tol: float = 1e-6
    fix_tau2: float | None = None
    nugget_mode: str = NUGGET_CONSTANT
    starts: tuple[tuple[float, float, float], ...] | None = None
    refine: bool = True


@dataclass(frozen=True)
class FitResult:
    estimates: ModelSpec
    log_likelihood: float
    converged: bool
    iterations: int
    messages: tuple[str, ...] = ()


def _chol_or_none(v: np.ndarray) -> np.ndarray | None:
    try:
        return np.linalg.cholesky(v)
    except np.linalg.LinAlgError:
        return None


def _mvn_loglik(factor: np.ndarray, resid: np.ndarray) -> float:
    half = sla.solve_triangular(factor, resid, lower=True)
    logdet = 2.0 * float(np.log(np.diag(factor)).sum())
    return -0.5 * (len(resid) * _LOG_2PI + logdet + float(half @ half))


def gaussian_log_likelihood(data: SurveyData, model: ModelSpec, nugget_mode: str = NUGGET_CONSTANT) -> float:
    """Exact multivariate-normal log density of the working responses."""
    if data.n == 0:
        raise InferenceError("empty dataset")
    xy = locations_to_xy(data.locations)
    nugget = effective_nugget(model, data.tested, nugget_mode)
    v = covariance_matrix_xy(xy, model, nugget=nugget)
    factor = cholesky_covariance(v, model, xy=xy)
    d = data.design_matrix()
    beta = np.asarray(model.beta, dtype=np.float64)
    if d.shape[1] != len(beta):
        raise InferenceError(
            f"beta has {len(beta)} coefficients but the design matrix has {d.shape[1]} columns"
        )
    return _mvn_loglik(factor, data.y_star - d @ beta)


def gls_beta(data: SurveyData, model: ModelSpec, nugget_mode: str = NUGGET_CONSTANT) -> np.ndarray:
    """Generalized-least-squares trend coefficients (D'V^-1 D)^-1 D'V^-1 y."""
    xy = locations_to_xy(data.locations)
    nugget = effective_nugget(model, data.tested, nugget_mode)
    v = covariance_matrix_xy(xy, model, nugget=nugget)
    factor = cholesky_covariance(v, model, xy=xy)
    return _gls_from_factor(factor, data.design_matrix(), data.y_star)[0]


def _gls_from_factor(
    factor: np.ndarray, d: np.ndarray, y: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Profiled beta and whitened residual given the covariance factor."""
    dw = sla.solve_triangular(factor, d, lower=True)
    yw = sla.solve_triangular(factor, y, lower=True)
    beta, *_ = np.linalg.lstsq(dw, yw, rcond=None)
    return beta, yw - dw @ beta


class _ProfileObjective:
    """Profile log-likelihood over log covariance parameters.

    Caches the distance matrix, design matrix, and responses; each call
    rebuilds only the covariance and its factor.  Infeasible parameter
    points (failed factorization) report -inf.
    """

    def __init__(self, data: SurveyData, kappa: float, options: FitOptions):
        self.dist = pairwise_distances(locations_to_xy(data.locations))
        self.d = data.design_matrix()
        self.y = data.y_star
        self.kappa = kappa
        self.options = options
        self.tested = data.tested

    def theta_from_x(self, x: np.ndarray) -> tuple[float, float, float]:
        sigma2, phi = math.exp(x[0]), math.exp(x[1])
        tau2 = self.options.fix_tau2 if self.options.fix_tau2 is not None else math.exp(x[2])
        return sigma2, phi, tau2

    def x_from_theta(self, sigma2: float, phi: float, tau2: float) -> np.ndarray:
        x = [math.log(sigma2), math.log(phi)]
        if self.options.fix_tau2 is None:
            x.append(math.log(tau2))
        return np.asarray(x)

    def loglik_and_beta(self, x: np.ndarray) -> tuple[float, np.ndarray | None]:
        sigma2, phi, tau2 = self.theta_from_x(x)
        if not all(map(math.isfinite, (sigma2, phi, tau2))):
            return -math.inf, None
        model = ModelSpec(beta=(0.0,), matern=MaternParams(sigma2, phi, self.kappa), tau2=tau2)
        nugget = effective_nugget(model, self.tested, self.options.nugget_mode)
        v = sigma2 * matern_correlation(self.dist, model.matern)
        v[np.diag_indices_from(v)] += nugget
        factor = _chol_or_none(v)
        if factor is None:
            return -math.inf, None
        beta, resid_w = _gls_from_factor(factor, self.d, self.y)
        logdet = 2.0 * float(np.log(np.diag(factor)).sum())
        ll = -0.5 * (len(self.y) * _LOG_2PI + logdet + float(resid_w @ resid_w))
        return ll, beta

    def negative(self, x: np.ndarray) -> float:
        ll, _ = self.loglik_and_beta(x)
        return -ll if math.isfinite(ll) else 1e300


def _default_starts(data: SurveyData) -> list[tuple[float, float, float]]:
    s2 = float(np.var(data.y_star, ddof=1))
    xy = locations_to_xy(data.locations)
    span = xy.max(axis=0) - xy.min(axis=0)
    diameter = float(math.hypot(*span))
    if diameter <= 0:
        raise InferenceError("all observations share one location; no spatial scale to fit")
    return [
        (s2, 0.10 * diameter, 0.10 * s2),
        (0.5 * s2, 0.05 * diameter, 0.50 * s2),
        (1.5 * s2, 0.30 * diameter, 0.01 * s2),
    ]


def fit_ml(data: SurveyData, kappa: float = 1.5, options: FitOptions | None = None) -> FitResult:
    """Maximize the Gaussian likelihood over (beta, sigma2, phi, tau2).

    kappa stays fixed; beta is profiled by GLS at every covariance
    evaluation; the covariance parameters are searched on the log scale so
    every iterate stays valid.
    """
    options = options or FitOptions()
    if data.n < options.min_n:
        raise InferenceError(f"need at least {options.min_n} observations, got {data.n}")
    if float(np.ptp(data.y_star)) == 0.0:
        raise InferenceError("degenerate data: all responses are equal")

    messages: list[str] = []
    if data.has_counts:
        small = int(np.sum(data.tested < SMALL_COUNT_THRESHOLD))
        if small:
            msg = (
                f"{small} of {data.n} locations have fewer than {SMALL_COUNT_THRESHOLD} tested "
                "individuals; the empirical-logit working model is only a rough "
                "approximation at such counts"
            )
            messages.append(msg)
            warnings.warn(msg, UserWarning, stacklevel=2)

    objective = _ProfileObjective(data, kappa, options)
    starts = options.starts if options.starts is not None else _default_starts(data)

    nm_options = dict(
        maxfev=options.max_evals_per_start,
        fatol=options.ll_tol,
        xatol=options.simplex_tol,
    )
    best_x: np.ndarray | None = None
    best_val = math.inf
    best_success = False
    evals = 0
    for sigma2, phi, tau2 in starts:
        x0 = objective.x_from_theta(sigma2, phi, tau2)
        res = optimize.minimize(objective.negative, x0, method="Nelder-Mead", options=nm_options)
        evals += int(res.nfev)
        if res.fun < best_val:
            best_x, best_val, best_success = res.x, float(res.fun), bool(res.success)
    if options.refine and best_x is not None:
        res = optimize.minimize(
            objective.negative, best_x, method="Nelder-Mead", options=nm_options
        )
        evals += int(res.nfev)
        if res.fun <= best_val:
            best_x, best_val, best_success = res.x, float(res.fun), bool(res.success)

    if best_x is None or not math.isfinite(best_val):
        raise InferenceError("likelihood could not be evaluated at any candidate parameters")

    ll, beta = objective.loglik_and_beta(best_x)
    sigma2, phi, tau2 = objective.theta_from_x(best_x)
    estimates = ModelSpec(
        beta=tuple(float(b) for b in beta),
        matern=MaternParams(sigma2, phi, kappa),
        tau2=tau2,
    )
    if not best_success:
        messages.append("optimizer hit its evaluation budget before meeting tolerances")
    return FitResult(
        estimates=estimates,
        log_likelihood=float(ll),
        converged=best_success,
        iterations=evals,
        messages=tuple(messages),
    )
