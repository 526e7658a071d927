"""Survey observations: per-location responses with optional covariates.

Responses are either binomial counts (positives out of tested), carried to
the Gaussian working scale via the empirical logit, or continuous values
supplied directly.  Covariate vectors, when present, pair with the trend
coefficients beyond the intercept.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from geoadapt.geometry import Location
from geoadapt.model import empirical_logit


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=np.float64)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class SurveyData:
    """Aligned per-location observations.

    ``y_star`` always holds the continuous working responses; ``positives``
    and ``tested`` are set only when the data arrived as counts.
    """

    locations: tuple[Location, ...]
    y_star: np.ndarray = field(repr=False)
    positives: np.ndarray | None = field(default=None, repr=False)
    tested: np.ndarray | None = field(default=None, repr=False)
    covariates: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        n = len(self.locations)
        y = np.asarray(self.y_star, dtype=np.float64)
        if y.shape != (n,):
            raise ValueError("y_star length must match locations")
        if not np.all(np.isfinite(y)):
            raise ValueError("responses must be finite")
        object.__setattr__(self, "y_star", _frozen(y))
        if (self.positives is None) != (self.tested is None):
            raise ValueError("positives and tested must be supplied together")
        if self.tested is not None:
            pos = np.asarray(self.positives, dtype=np.float64)
            tst = np.asarray(self.tested, dtype=np.float64)
            if pos.shape != (n,) or tst.shape != (n,):
                raise ValueError("count arrays must match locations length")
            if np.any(tst < 1):
                raise ValueError("tested counts must be >= 1")
            if np.any(pos < 0) or np.any(pos > tst):
                raise ValueError("positive counts must satisfy 0 <= y <= n")
            object.__setattr__(self, "positives", _frozen(pos))
            object.__setattr__(self, "tested", _frozen(tst))
        if self.covariates is not None:
            cov = np.asarray(self.covariates, dtype=np.float64)
            if cov.ndim != 2 or cov.shape[0] != n:
                raise ValueError("covariates must be an (n, p) array")
            if not np.all(np.isfinite(cov)):
                raise ValueError("covariates must be finite")
            object.__setattr__(self, "covariates", _frozen(cov))

    @classmethod
    def from_continuous(
        cls,
        locations: Sequence[Location],
        values,
        covariates=None,
    ) -> "SurveyData":
        return cls(
            locations=tuple(locations),
            y_star=np.asarray(values, dtype=np.float64),
            covariates=None if covariates is None else np.asarray(covariates),
        )

    @classmethod
    def from_counts(
        cls,
        locations: Sequence[Location],
        positives,
        tested,
        covariates=None,
    ) -> "SurveyData":
        pos = np.asarray(positives, dtype=np.float64)
        tst = np.asarray(tested, dtype=np.float64)
        return cls(
            locations=tuple(locations),
            y_star=empirical_logit(pos, tst),
            positives=pos,
            tested=tst,
            covariates=None if covariates is None else np.asarray(covariates),
        )

    @property
    def n(self) -> int:
        return len(self.locations)

    @property
    def has_counts(self) -> bool:
        return self.tested is not None

    @property
    def n_covariates(self) -> int:
        return 0 if self.covariates is None else self.covariates.shape[1]

    def design_matrix(self) -> np.ndarray:
        """Trend design matrix: intercept column plus covariates."""
        ones = np.ones((self.n, 1))
        if self.covariates is None:
            return ones
        return np.hstack([ones, self.covariates])

    def extended(
        self, locations: Sequence[Location], values=None, positives=None, tested=None, covariates=None
    ) -> "SurveyData":
        """New dataset with extra rows appended (count fields only if both
        sides carry counts).  With ``values`` omitted, the appended responses
        are the empirical logits of the supplied counts."""
        locs = self.locations + tuple(locations)
        if values is None:
            if positives is None or tested is None:
                raise ValueError("appended rows need values or counts")
            values = empirical_logit(np.asarray(positives), np.asarray(tested))
        y = np.concatenate([self.y_star, np.asarray(values, dtype=np.float64)])
        pos = tst = None
        if self.has_counts and positives is not None:
            pos = np.concatenate([self.positives, np.asarray(positives, dtype=np.float64)])
            tst = np.concatenate([self.tested, np.asarray(tested, dtype=np.float64)])
        cov = None
        if self.covariates is not None:
            if covariates is None:
                raise ValueError("covariates required for appended rows")
            cov = np.vstack([self.covariates, np.asarray(covariates, dtype=np.float64)])
        return SurveyData(locations=locs, y_star=y, positives=pos, tested=tst, covariates=cov)

    def permuted(self, order: Sequence[int]) -> "SurveyData":
        idx = np.asarray(order, dtype=int)
        return SurveyData(
            locations=tuple(self.locations[i] for i in idx),
            y_star=self.y_star[idx],
            positives=None if self.positives is None else self.positives[idx],
            tested=None if self.tested is None else self.tested[idx],
            covariates=None if self.covariates is None else self.covariates[idx],
        )
