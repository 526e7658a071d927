"""Stationary Gaussian field model: Matern correlation, covariance assembly,
and the empirical logit transform of binomial counts.

The field S(x) has variance sigma2 and isotropic Matern correlation with
scale phi and smoothness kappa; independent measurement noise adds a nugget
tau2 on the diagonal.  A linear trend d(x)'beta (first coefficient the
intercept) completes the observation model for continuous responses.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy import special

from geoadapt import _core
from geoadapt.errors import SingularCovarianceError
from geoadapt.geometry import Location, locations_to_xy, pairwise_distances

# Near-duplicate threshold, as a fraction of the correlation scale: pairs
# closer than this are numerically coincident for any smooth kappa.
_NEAR_DUP_FRACTION = 1e-6
_JITTER_FRACTION = 1e-10


class JitterAppliedWarning(UserWarning):
    """Cholesky needed a diagonal jitter to factorize a near-singular matrix."""


@dataclass(frozen=True)
class MaternParams:
    """Variance and Matern correlation parameters (all strictly positive)."""

    sigma2: float
    phi: float
    kappa: float

    def __post_init__(self):
        for name in ("sigma2", "phi", "kappa"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be finite and > 0, got {v}")


@dataclass(frozen=True)
class ModelSpec:
    """Full model parameterization: trend beta, Matern field, nugget.

    ``beta[0]`` is the intercept; further entries pair with per-location
    covariate vectors of matching dimension.
    """

    beta: tuple[float, ...]
    matern: MaternParams
    tau2: float = 0.0

    def __post_init__(self):
        if len(self.beta) < 1:
            raise ValueError("beta must contain at least the intercept")
        if not all(math.isfinite(b) for b in self.beta):
            raise ValueError("beta entries must be finite")
        if not (math.isfinite(self.tau2) and self.tau2 >= 0):
            raise ValueError(f"tau2 must be finite and >= 0, got {self.tau2}")

    @classmethod
    def intercept_only(
        cls, mu: float, sigma2: float, phi: float, kappa: float, tau2: float = 0.0
    ) -> "ModelSpec":
        return cls(beta=(mu,), matern=MaternParams(sigma2, phi, kappa), tau2=tau2)

    @property
    def n_covariates(self) -> int:
        return len(self.beta) - 1

    def with_beta(self, beta: Sequence[float]) -> "ModelSpec":
        return replace(self, beta=tuple(float(b) for b in beta))


@dataclass(frozen=True)
class FieldRealization:
    """Simulated field values at a fixed list of locations."""

    locations: tuple[Location, ...]
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != (len(self.locations),):
            raise ValueError("values length must match locations length")
        if not np.all(np.isfinite(values)):
            raise ValueError("field values must be finite")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)


_HALF_INTEGER_CASES = {0.5: 1, 1.5: 3, 2.5: 5}


def _matern_general(t: np.ndarray, kappa: float) -> np.ndarray:
    """General-kappa Matern correlation of scaled distances t = u/phi.

    Uses the exponentially scaled Bessel K for stability at large t; the
    t -> 0 limit is 1 by continuity.
    """
    t = np.asarray(t, dtype=np.float64)
    out = np.ones_like(t)
    pos = t > 0
    tp = t[pos]
    coef = math.exp((1.0 - kappa) * math.log(2.0) - math.lgamma(kappa))
    with np.errstate(under="ignore"):
        out[pos] = coef * np.power(tp, kappa) * special.kve(kappa, tp) * np.exp(-tp)
    return out


def matern_correlation(u, params: MaternParams):
    """Matern correlation at distance(s) ``u``.

    Equals 1 at u = 0 (continuity limit), decreases strictly with distance,
    and tends to 0 as u grows.  Half-integer smoothness (0.5, 1.5, 2.5)
    dispatches to closed forms; other kappa use the Bessel-K formula.
    """
    scalar = np.isscalar(u)
    arr = np.asarray(u, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ValueError("distances must be finite")
    if np.any(arr < 0):
        raise ValueError("distances must be nonnegative")
    case = _HALF_INTEGER_CASES.get(params.kappa)
    if case is not None:
        out = _core.matern_half_integer(arr, params.phi, case)
    else:
        out = _matern_general(arr / params.phi, params.kappa)
    return float(out) if scalar else out


def covariance_matrix(locations: Sequence[Location], model: ModelSpec) -> np.ndarray:
    """Observation covariance sigma2 * R + tau2 * I over the given locations.

    Symmetric by construction with diagonal sigma2 + tau2.  Exact duplicate
    locations with tau2 = 0 are rejected up front (the matrix would be
    singular); near-duplicates surface at factorization time.
    """
    xy = locations_to_xy(locations)
    return covariance_matrix_xy(xy, model)


def covariance_matrix_xy(
    xy: np.ndarray, model: ModelSpec, nugget: np.ndarray | float | None = None
) -> np.ndarray:
    """Like :func:`covariance_matrix` but on an (n, 2) array; ``nugget``
    overrides the model's tau2 (scalar or per-location vector)."""
    xy = np.asarray(xy, dtype=np.float64)
    nug = model.tau2 if nugget is None else nugget
    if np.all(np.asarray(nug) == 0.0):
        _reject_exact_duplicates(xy)
        nug = None
    d = pairwise_distances(xy)
    v = model.matern.sigma2 * matern_correlation(d, model.matern)
    if nug is not None:
        v[np.diag_indices_from(v)] += nug
    return v


def cross_covariance_xy(xy_a: np.ndarray, xy_b: np.ndarray, model: ModelSpec) -> np.ndarray:
    """Field covariance sigma2 * rho(||a - b||) between two point sets (no nugget)."""
    d = pairwise_distances(xy_a, xy_b)
    return model.matern.sigma2 * matern_correlation(d, model.matern)


def _reject_exact_duplicates(xy: np.ndarray) -> None:
    seen: dict[tuple[float, float], int] = {}
    pairs = []
    for i, (x, y) in enumerate(xy):
        key = (float(x), float(y))
        if key in seen:
            pairs.append((seen[key], i))
        else:
            seen[key] = i
    if pairs:
        raise SingularCovarianceError(
            f"duplicate locations with zero nugget make the covariance singular: {pairs}",
            pairs=pairs,
        )


def _near_duplicate_pairs(xy: np.ndarray, phi: float) -> list[tuple[int, int]]:
    d = pairwise_distances(xy)
    iu = np.triu_indices(len(xy), k=1)
    close = d[iu] < _NEAR_DUP_FRACTION * phi
    return [(int(i), int(j)) for i, j in zip(iu[0][close], iu[1][close])]


def cholesky_covariance(
    v: np.ndarray, model: ModelSpec, xy: np.ndarray | None = None
) -> np.ndarray:
    """Lower Cholesky factor of a covariance matrix built from ``model``.

    Numerically coincident locations with a zero nugget are a modeling error,
    not conditioning noise, so when ``xy`` is supplied they raise
    SingularCovarianceError naming the offending pairs whether or not the
    factorization happens to survive rounding.  Other failures get one retry
    with a +1e-10 * sigma2 diagonal jitter, reported via JitterAppliedWarning.
    """
    if xy is not None and model.tau2 == 0.0:
        pairs = _near_duplicate_pairs(xy, model.matern.phi)
        if pairs:
            raise SingularCovarianceError(
                "covariance is singular: near-duplicate locations at index "
                f"pairs {pairs} with no nugget",
                pairs=pairs,
            )
    try:
        return np.linalg.cholesky(v)
    except np.linalg.LinAlgError:
        pass
    if xy is not None:
        pairs = _near_duplicate_pairs(xy, model.matern.phi)
        if pairs:
            raise SingularCovarianceError(
                "covariance factorization failed: near-duplicate locations "
                f"at index pairs {pairs} (zero or tiny nugget)",
                pairs=pairs,
            )
    jitter = _JITTER_FRACTION * model.matern.sigma2
    try:
        factor = np.linalg.cholesky(v + jitter * np.eye(len(v)))
    except np.linalg.LinAlgError:
        raise SingularCovarianceError(
            "covariance factorization failed even with diagonal jitter"
        ) from None
    warnings.warn(
        f"covariance required a diagonal jitter of {jitter:g} to factorize",
        JitterAppliedWarning,
        stacklevel=2,
    )
    return factor


def empirical_logit(y, n):
    """Continuity-corrected logit log((y + 0.5) / (n - y + 0.5)) of counts.

    Finite for all valid inputs including y = 0 and y = n.  Accepts scalars
    or arrays; counts must satisfy 0 <= y <= n with n >= 1.
    """
    y_arr = np.asarray(y, dtype=np.float64)
    n_arr = np.asarray(n, dtype=np.float64)
    if np.any(n_arr < 1):
        raise ValueError("tested count n must be >= 1")
    if np.any(y_arr < 0) or np.any(y_arr > n_arr):
        raise ValueError("positive count y must satisfy 0 <= y <= n")
    out = np.log((y_arr + 0.5) / (n_arr - y_arr + 0.5))
    return float(out) if np.isscalar(y) and np.isscalar(n) else out
