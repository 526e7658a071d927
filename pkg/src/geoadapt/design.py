"""Survey design generators.

Three strategies: uniform random sampling, inhibitory sampling (a constrained
form of random sampling where no two points sit closer than delta), and
adaptive batch selection that repeatedly adds the candidate with the largest
prediction variance subject to the same minimum-distance rule.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from geoadapt import _core
from geoadapt.data import SurveyData
from geoadapt.errors import InferenceError, InfeasibleDesignError
from geoadapt.geometry import Location, Region, locations_to_xy, xy_to_locations
from geoadapt.kriging import NUGGET_CONSTANT, NUGGET_COUNT_SCALED, effective_nugget, pv_surface_from_cov, pv_surface_xy
from geoadapt.likelihood import FitOptions, FitResult, fit_ml
from geoadapt.model import ModelSpec
from geoadapt.rng import as_generator

# Which minimum-distance rule a Design's points were generated under.
RULE_NONE = "none"
RULE_ALL_PAIRS = "all-pairs"
RULE_NEW_POINTS = "new-points"

_RULES = (RULE_NONE, RULE_ALL_PAIRS, RULE_NEW_POINTS)


@dataclass(frozen=True)
class Design:
    """A set of sampling locations with their batch lineage.

    ``batch_index`` is 0 for the initial design and increments per adaptive
    batch.  ``indices`` records positions within the candidate set the points
    were drawn from, when there was one.
    """

    points: tuple[Location, ...]
    batch_index: tuple[int, ...]
    delta: float = 0.0
    rule: str = RULE_NONE
    indices: tuple[int, ...] | None = None

    def __post_init__(self):
        if len(self.batch_index) != len(self.points):
            raise ValueError("batch_index and points must have equal length")
        if self.indices is not None and len(self.indices) != len(self.points):
            raise ValueError("indices and points must have equal length")
        if not np.isfinite(self.delta) or self.delta < 0:
            raise ValueError("delta must be finite and >= 0")
        if self.rule not in _RULES:
            raise ValueError(f"unknown constraint rule: {self.rule!r}")
        if len(set(self.points)) != len(self.points):
            raise ValueError("design points must be duplicate-free")
        if any(j < 0 for j in self.batch_index):
            raise ValueError("batch indices must be >= 0")
        if any(b > a for a, b in zip(self.batch_index[1:], self.batch_index)):
            raise ValueError("batch indices must be non-decreasing")

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def n_batches(self) -> int:
        """Number of adaptive batches appended after the initial design."""
        return max(self.batch_index) if self.points else 0

    def xy(self) -> np.ndarray:
        return locations_to_xy(self.points)

    def batch(self, j: int) -> tuple[Location, ...]:
        return tuple(p for p, k in zip(self.points, self.batch_index) if k == j)

    def extended(
        self,
        new_points: Sequence[Location],
        new_indices: Sequence[int] | None = None,
        batch: int | None = None,
    ) -> "Design":
        """Append points as one batch, numbered after the existing ones.

        ``batch`` overrides the number, e.g. to add late points to the
        current batch; it may not go backwards.
        """
        new_points = tuple(new_points)
        j = self.n_batches + 1 if batch is None else int(batch)
        if self.points and j < self.batch_index[-1]:
            raise ValueError("batch number may not precede the last batch")
        indices = None
        if (self.indices is not None or not self.points) and new_indices is not None:
            indices = (self.indices or ()) + tuple(int(i) for i in new_indices)
        return replace(
            self,
            points=self.points + new_points,
            batch_index=self.batch_index + (j,) * len(new_points),
            rule=RULE_NEW_POINTS,
            indices=indices,
        )


def _candidate_locations(candidates: Region | Sequence[Location]) -> tuple[Location, ...]:
    if isinstance(candidates, Region):
        if candidates.points is None:
            raise ValueError("this operation needs a discrete candidate set, not a rectangle")
        return candidates.points
    return tuple(candidates)


def random_design(candidates: Region, n: int, seed) -> Design:
    """Uniform design: n distinct candidates, or n iid points in a rectangle."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = as_generator(seed, "random-design")
    if isinstance(candidates, Region) and candidates.points is None:
        xmin, ymin, xmax, ymax = candidates.rect
        xy = rng.random((n, 2)) * (xmax - xmin, ymax - ymin) + (xmin, ymin)
        return Design(points=xy_to_locations(xy), batch_index=(0,) * n)
    pool = _candidate_locations(candidates)
    if n > len(pool):
        raise ValueError(f"requested {n} points but only {len(pool)} candidates exist")
    idx = rng.choice(len(pool), size=n, replace=False)
    return Design(
        points=tuple(pool[i] for i in idx),
        batch_index=(0,) * n,
        indices=tuple(int(i) for i in idx),
    )


def inhibitory_design(
    candidates: Region, n: int, delta: float, seed, max_attempts: int = 100
) -> Design:
    """Sequential-rejection sample with every pairwise distance >= delta.

    Draws uniformly from the not-yet-accepted candidates and rejects draws
    closer than delta to the accepted set.  After 10 * n consecutive
    rejections the whole design restarts; after ``max_attempts`` restarts the
    geometry is declared infeasible.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if delta < 0 or not np.isfinite(delta):
        raise ValueError("delta must be finite and >= 0")
    rng = as_generator(seed, "inhibitory-design")

    from_rect = isinstance(candidates, Region) and candidates.points is None
    if from_rect:
        xmin, ymin, xmax, ymax = candidates.rect
    else:
        pool_locs = _candidate_locations(candidates)
        if n > len(pool_locs):
            raise ValueError(f"requested {n} points but only {len(pool_locs)} candidates exist")
        pool_xy = locations_to_xy(pool_locs)

    delta2 = delta * delta
    reject_limit = 10 * n
    best_n = 0
    for _ in range(max_attempts):
        acc_xy = np.empty((n, 2))
        acc_idx = np.empty(n, dtype=np.intp)
        n_acc = 0
        consecutive_rejects = 0
        if not from_rect:
            # Swap-pop pool of candidate positions; accepted leave, rejected stay.
            pool = np.arange(len(pool_locs))
            pool_size = len(pool)
        while n_acc < n and consecutive_rejects < reject_limit:
            if from_rect:
                p = rng.random(2) * (xmax - xmin, ymax - ymin) + (xmin, ymin)
                idx = -1
            else:
                k = int(rng.integers(pool_size))
                idx = pool[k]
                p = pool_xy[idx]
            d2 = np.square(acc_xy[:n_acc] - p).sum(axis=1)
            if np.all(d2 >= delta2):
                acc_xy[n_acc] = p
                acc_idx[n_acc] = idx
                n_acc += 1
                consecutive_rejects = 0
                if not from_rect:
                    pool[k] = pool[pool_size - 1]
                    pool_size -= 1
            else:
                consecutive_rejects += 1
        best_n = max(best_n, n_acc)
        if n_acc == n:
            if from_rect:
                points = xy_to_locations(acc_xy)
                indices = None
            else:
                points = tuple(pool_locs[i] for i in acc_idx)
                indices = tuple(int(i) for i in acc_idx)
            return Design(
                points=points,
                batch_index=(0,) * n,
                delta=delta,
                rule=RULE_ALL_PAIRS,
                indices=indices,
            )
    raise InfeasibleDesignError(
        f"could not place {n} points at minimum spacing {delta} "
        f"within {max_attempts} attempts (best: {best_n})",
        best_n=best_n,
    )


@dataclass(frozen=True)
class AdaptiveState:
    """Bookkeeping for the adaptive loop.

    ``candidates`` is the full candidate set in its defining order (ties in
    prediction variance resolve to the lowest position here); ``active``
    holds the positions still eligible, i.e. never chosen and never discarded
    by the minimum-distance rule.
    """

    candidates: tuple[Location, ...]
    active: tuple[int, ...]
    design: Design
    model: ModelSpec
    data: SurveyData | None = None

    def __post_init__(self):
        n_cand = len(self.candidates)
        if any(i < 0 or i >= n_cand for i in self.active):
            raise ValueError("active indices out of range")
        if len(set(self.active)) != len(self.active):
            raise ValueError("active indices must be distinct")
        in_design = set(self.design.points)
        if any(self.candidates[i] in in_design for i in self.active):
            raise ValueError("active candidates must be disjoint from the design")

    @property
    def candidates_remaining(self) -> tuple[Location, ...]:
        return tuple(self.candidates[i] for i in self.active)

    @classmethod
    def from_candidates(
        cls,
        candidates: Region | Sequence[Location],
        design: Design,
        model: ModelSpec,
        data: SurveyData | None = None,
    ) -> "AdaptiveState":
        cand = _candidate_locations(candidates)
        taken = set(design.points)
        active = tuple(i for i, c in enumerate(cand) if c not in taken)
        return cls(candidates=cand, active=active, design=design, model=model, data=data)


def _pv_over_candidates(
    state: AdaptiveState,
    conditioning: Design,
    cov: np.ndarray | None,
    nugget_mode: str,
) -> np.ndarray:
    """Prediction-variance surface over the full candidate set.

    Conditions on the given design's locations only; observed values never
    enter.  ``cov`` is the precomputed field covariance over the candidates,
    usable whenever the conditioning points carry candidate indices.
    """
    tested = None
    if nugget_mode == NUGGET_COUNT_SCALED:
        if state.data is None or state.data.tested is None:
            raise ValueError("count-scaled nuggets need accumulated count data")
        if state.data.locations != conditioning.points:
            raise ValueError("count-scaled nuggets need data aligned with the design")
        tested = state.data.tested
    nugget = effective_nugget(state.model, tested, nugget_mode)
    if cov is not None and conditioning.indices is not None:
        return pv_surface_from_cov(
            cov,
            data_idx=np.asarray(conditioning.indices, dtype=np.intp),
            model=state.model,
            nugget=nugget,
            data_xy=conditioning.xy(),
        )
    return pv_surface_xy(
        state.model, conditioning.xy(), locations_to_xy(state.candidates), nugget=nugget
    )


def adaptive_next_batch(
    state: AdaptiveState,
    b: int,
    delta: float | None = None,
    *,
    cov: np.ndarray | None = None,
    nugget_mode: str = NUGGET_CONSTANT,
    pv: np.ndarray | None = None,
    update_within_batch: bool = False,
) -> tuple[tuple[Location, ...], AdaptiveState, bool]:
    """Select up to b candidates by greedy maximum prediction variance.

    Each pick must lie strictly farther than delta from every design point,
    including picks made earlier in the same batch; candidates failing that
    test are discarded from the active set for good.  The variance surface is
    computed once at batch start; ``update_within_batch=True`` instead
    recomputes it after every addition, conditioning on the picks so far.
    Returns the batch, the advanced state, and a flag set when the candidates
    ran out before b additions.

    ``cov`` is an optional precomputed field covariance over the candidate
    set, used to avoid rebuilding kernel matrices; ``pv`` overrides the
    surface entirely (mainly for tests) and implies a fixed surface.
    """
    if b < 1:
        raise ValueError("b must be >= 1")
    if delta is None:
        delta = state.design.delta
    if delta < 0 or not np.isfinite(delta):
        raise ValueError("delta must be finite and >= 0")
    if pv is not None:
        pv = np.asarray(pv, dtype=np.float64)
        if pv.shape != (len(state.candidates),):
            raise ValueError("pv must cover the full candidate set")
        update_within_batch = False
    if update_within_batch and nugget_mode == NUGGET_COUNT_SCALED:
        raise ValueError("within-batch updates have no counts for the new picks")

    cand_xy = locations_to_xy(state.candidates)
    active_mask = np.zeros(len(state.candidates), dtype=bool)
    active_mask[list(state.active)] = True

    # Picks accumulate in `conditioning` so the distance rule (and, in
    # within-batch mode, the variance surface) sees earlier picks.
    conditioning = state.design
    chosen_all: list[int] = []
    remaining = b
    while remaining > 0:
        surface = (
            pv
            if pv is not None
            else _pv_over_candidates(state, conditioning, cov, nugget_mode)
        )
        take = 1 if update_within_batch else remaining
        chosen, _rejected = _core.select_min_dist_batch(
            surface, cand_xy, active_mask, conditioning.xy(), take, delta
        )
        chosen_all.extend(int(i) for i in chosen)
        remaining -= len(chosen)
        if len(chosen) < take or not update_within_batch:
            break
        if remaining > 0:
            conditioning = conditioning.extended(
                tuple(state.candidates[i] for i in chosen), chosen
            )

    batch_points = tuple(state.candidates[i] for i in chosen_all)
    new_design = state.design.extended(batch_points, chosen_all) if batch_points else state.design
    new_state = replace(
        state,
        design=new_design,
        active=tuple(int(i) for i in np.flatnonzero(active_mask)),
    )
    exhausted = len(chosen_all) < b
    return batch_points, new_state, exhausted


@dataclass(frozen=True)
class RefitPerBatch:
    """Marker asking run_adaptive_design to re-estimate parameters by maximum
    likelihood on the accumulated data before proposing each batch."""

    kappa: float = 1.5
    options: FitOptions | None = None
    fallback: ModelSpec | None = None


def run_adaptive_design(
    initial: Design,
    model_source: ModelSpec | RefitPerBatch,
    total_n: int,
    b: int,
    delta: float,
    candidates: Region | Sequence[Location],
    observe: Callable[[tuple[Location, ...]], np.ndarray] | None = None,
    initial_data: SurveyData | None = None,
    *,
    cov: np.ndarray | None = None,
    nugget_mode: str = NUGGET_CONSTANT,
    update_within_batch: bool = False,
) -> Design:
    """Grow a design to total_n points, batch by batch.

    With a fixed ModelSpec the variance surface uses those parameters
    throughout and no observations are needed.  With RefitPerBatch, ``observe``
    supplies working responses for each new batch and the parameters are
    re-estimated before every proposal; a failed fit falls back to the last
    successful one with a warning.  The final batch may be short, and the
    design stops early (with a warning) if the candidates run out.
    """
    if total_n < initial.n:
        raise ValueError("total_n must be at least the initial design size")
    refit = isinstance(model_source, RefitPerBatch)
    if refit:
        if initial_data is None:
            if observe is None:
                raise ValueError("refitting needs initial_data or an observe callback")
            initial_data = SurveyData.from_continuous(
                initial.points, np.asarray(observe(initial.points), dtype=np.float64)
            )
        model = model_source.fallback
    else:
        model = model_source

    state = AdaptiveState.from_candidates(
        candidates, initial, model if model is not None else _PLACEHOLDER_MODEL, initial_data
    )

    while state.design.n < total_n:
        if refit:
            state = _refit_state(state, model_source)
        take = min(b, total_n - state.design.n)
        batch, state, exhausted = adaptive_next_batch(
            state,
            take,
            delta,
            cov=cov,
            nugget_mode=nugget_mode,
            update_within_batch=update_within_batch,
        )
        if refit and batch and observe is not None:
            values = np.asarray(observe(batch), dtype=np.float64)
            state = replace(state, data=state.data.extended(batch, values))
        if exhausted:
            if state.design.n < total_n:
                warnings.warn(
                    f"candidate set exhausted at {state.design.n} of {total_n} points",
                    UserWarning,
                    stacklevel=2,
                )
            break
    return state.design


# Stand-in when refitting has no fallback model yet; never used to compute a
# surface because the first refit happens before the first proposal.
_PLACEHOLDER_MODEL = ModelSpec.intercept_only(0.0, sigma2=1.0, phi=1.0, kappa=1.5, tau2=0.0)


def _refit_state(state: AdaptiveState, source: RefitPerBatch) -> AdaptiveState:
    try:
        result: FitResult = fit_ml(state.data, kappa=source.kappa, options=source.options)
    except InferenceError as exc:
        if state.model is _PLACEHOLDER_MODEL:
            raise
        warnings.warn(
            f"parameter re-estimation failed ({exc}); keeping the previous fit",
            UserWarning,
            stacklevel=3,
        )
        return state
    return replace(state, model=result.estimates)
