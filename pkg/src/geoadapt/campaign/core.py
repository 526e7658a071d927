"""Campaign commands and read models.

Commands validate against the current state, run whatever numerics they
need, and return (event, response); the event captures every computed
outcome so that replaying the log is pure bookkeeping.  Reads are
deterministic functions of state.

Conditioning conventions: batch proposals condition the variance surface on
the full design (committed points will be measured), while surfaces and
round reports condition on actually observed data.  In the usual
ingest-propose-review cycle the two coincide.
"""

from __future__ import annotations

import hashlib
import re
import warnings

import numpy as np

from geoadapt.campaign import files
from geoadapt.campaign.state import (
    EVENT_CREATED,
    EVENT_PROPOSED,
    EVENT_REVIEWED,
    EVENT_ROUND,
    STATUS_OPEN,
    CampaignState,
    Proposal,
    Settings,
    apply_event,
    canonical_json,
)
from geoadapt.design import AdaptiveState, adaptive_next_batch
from geoadapt.errors import CampaignError, InferenceError
from geoadapt.kriging import NUGGET_COUNT_SCALED, krige, prediction_variance_surface
from geoadapt.likelihood import FitOptions, fit_ml

_ID_PATTERN = re.compile(r"^[A-Za-z0-9][A-Za-z0-9_-]{0,63}$")

WHAT_PV = "pv"
WHAT_MEAN = "mean"
WHAT_EXCEEDANCE = "exceedance"


def _conflict(message: str) -> CampaignError:
    return CampaignError(message, details={"code": "conflict"})


def _not_found(message: str) -> CampaignError:
    return CampaignError(message, details={"code": "not-found"})


def create_campaign(
    campaign_id: str, crs: str, settings: Settings, candidates_text: str
) -> tuple[dict, CampaignState]:
    if not _ID_PATTERN.match(campaign_id):
        raise CampaignError(
            "campaign id must be 1-64 characters of letters, digits, '-' or '_', "
            "starting alphanumeric"
        )
    candidates = files.parse_candidates(candidates_text)
    n_cov = len(candidates[0].covariates)
    if any(len(c.covariates) != n_cov for c in candidates):
        raise CampaignError("all candidates must have the same number of covariates")
    event = {
        "type": EVENT_CREATED,
        "id": campaign_id,
        "crs": crs,
        "settings": settings.to_dict(),
        "candidates": [
            [c.id, c.location.x, c.location.y, list(c.covariates)] for c in candidates
        ],
    }
    return event, apply_event(None, event)


def ingest_round(state: CampaignState, observations_text: str) -> tuple[dict, dict]:
    """Parse, validate, and append one round of observations, then refit.

    All-or-nothing: any unknown id or invalid row rejects the whole file.
    Couples the fit outcome into the event so replay never re-estimates.
    """
    batch = files.parse_observations(observations_text)
    if state.mode is not None and batch.mode != state.mode:
        raise CampaignError(
            f"campaign ingests {state.mode} observations; got {batch.mode}"
        )
    known = {c.id for c in state.candidates}
    unknown = [i for i in batch.ids if i not in known]
    if unknown:
        raise CampaignError(
            f"{len(unknown)} observation id(s) are not campaign candidates",
            details={"ids": unknown},
        )
    if batch.mode == files.MODE_CONTINUOUS:
        already = {i for rnd in state.rounds for i in rnd.ids}
        repeated = [i for i in batch.ids if i in already]
        if repeated:
            raise CampaignError(
                "continuous locations cannot be re-observed",
                details={"ids": repeated},
            )
    digest = hashlib.sha256(
        canonical_json(
            {"mode": batch.mode, "ids": list(batch.ids), "values": [list(v) for v in batch.values]}
        ).encode()
    ).hexdigest()
    if any(rnd.digest == digest for rnd in state.rounds):
        raise _conflict("this file's content was already ingested as an earlier round")

    event = {
        "type": EVENT_ROUND,
        "round": len(state.rounds),
        "mode": batch.mode,
        "ids": list(batch.ids),
        "values": [list(v) for v in batch.values],
        "fit": None,
        "fit_warning": None,
        "digest": digest,
    }
    provisional = apply_event(state, event)
    data = provisional.observed_data()
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            result = fit_ml(
                data,
                kappa=state.settings.kappa,
                options=FitOptions(
                    min_n=state.settings.min_fit_n,
                    fix_tau2=state.settings.fix_tau2,
                    nugget_mode=state.settings.nugget_mode,
                ),
            )
        est = result.estimates
        event["fit"] = {
            "beta": [float(v) for v in est.beta],
            "sigma2": float(est.matern.sigma2),
            "phi": float(est.matern.phi),
            "kappa": float(est.matern.kappa),
            "tau2": float(est.tau2),
            "log_likelihood": float(result.log_likelihood),
            "converged": bool(result.converged),
            "iterations": int(result.iterations),
            "messages": list(result.messages),
        }
    except InferenceError as exc:
        event["fit_warning"] = f"parameter estimation failed: {exc}"

    new_state = apply_event(state, event)
    return event, round_report(new_state, len(new_state.rounds) - 1)


def _eligible_indices(state: CampaignState, also_exclude: set[str] = frozenset()) -> tuple[int, ...]:
    out_ids = set(state.design_ids) | set(state.infeasible) | set(state.removed) | also_exclude
    return tuple(i for i, c in enumerate(state.candidates) if c.id not in out_ids)


def _design_surface(state: CampaignState, conditioning) -> np.ndarray:
    """Variance surface over all candidates given a conditioning design."""
    per_n = None
    if state.settings.nugget_mode == NUGGET_COUNT_SCALED:
        data = state.observed_data()
        if data is None or data.tested is None:
            raise _conflict("count-scaled nuggets need ingested count data")
        if data.locations != conditioning.points:
            raise _conflict(
                "count-scaled proposals need observations for every design point; "
                "ingest the latest batch first"
            )
        per_n = data.tested
    model = state.fitted_model()
    return prediction_variance_surface(
        model,
        conditioning.points,
        tuple(c.location for c in state.candidates),
        per_location_n=per_n,
    )


def _select(
    state: CampaignState,
    conditioning,
    eligible: tuple[int, ...],
    b: int,
    delta: float,
) -> tuple[tuple[str, ...], tuple[float, ...], tuple[str, ...], bool]:
    """Greedy minimum-distance selection; returns (ids, pv, removed_ids, exhausted)."""
    surface = _design_surface(state, conditioning)
    astate = AdaptiveState(
        candidates=tuple(c.location for c in state.candidates),
        active=eligible,
        design=conditioning,
        model=state.fitted_model(),
        data=None,
    )
    batch, after, exhausted = adaptive_next_batch(astate, b, delta, pv=surface)
    chosen_idx = after.design.indices[conditioning.n :]
    removed_idx = set(eligible) - set(after.active) - set(chosen_idx)
    ids = tuple(state.candidates[i].id for i in chosen_idx)
    pv = tuple(float(surface[i]) for i in chosen_idx)
    removed = tuple(state.candidates[i].id for i in sorted(removed_idx))
    return ids, pv, removed, exhausted


def propose_batch(
    state: CampaignState, b: int | None = None, delta: float | None = None
) -> tuple[dict, dict]:
    if state.fitted_model() is None:
        raise _conflict("no fitted round yet; ingest observations first")
    if state.open_proposal is not None:
        raise _conflict(f"proposal {state.open_proposal.pid} is still open")
    b = state.settings.b if b is None else int(b)
    delta = state.settings.delta if delta is None else float(delta)
    if b < 1:
        raise CampaignError("b must be >= 1")
    if delta < 0:
        raise CampaignError("delta must be >= 0")

    ids, pv, removed, exhausted = _select(
        state, state.design(), _eligible_indices(state), b, delta
    )
    event = {
        "type": EVENT_PROPOSED,
        "pid": f"p{len(state.proposals) + 1}",
        "round": len(state.rounds) - 1,
        "b": b,
        "delta": delta,
        "ids": list(ids),
        "pv": list(pv),
        "removed": list(removed),
        "exhausted": exhausted,
    }
    new_state = apply_event(state, event)
    return event, _proposal_dict(new_state.proposals[-1])


def review_proposal(
    state: CampaignState, pid: str, action: str, excluded_ids=()
) -> tuple[dict, CampaignState]:
    proposal = next((p for p in state.proposals if p.pid == pid), None)
    if proposal is None:
        raise _not_found(f"no proposal {pid!r}")
    if proposal.status != STATUS_OPEN:
        raise _conflict(f"proposal {pid} was already {proposal.status}")
    if action not in ("accept", "reject", "amend"):
        raise CampaignError(f"action must be accept, reject, or amend; got {action!r}")
    excluded = tuple(dict.fromkeys(excluded_ids))
    if action in ("accept", "reject") and excluded:
        raise CampaignError(f"{action} does not take exclusions; use amend")
    if action == "reject":
        event = {"type": EVENT_REVIEWED, "pid": pid, "action": "reject"}
        return event, apply_event(state, event)

    bad = [i for i in excluded if i not in proposal.ids]
    if bad:
        raise CampaignError(
            "excluded ids must come from the proposal", details={"ids": bad}
        )
    accepted = tuple(i for i in proposal.ids if i not in excluded)
    backfill_ids: tuple[str, ...] = ()
    backfill_pv: tuple[float, ...] = ()
    backfill_removed: tuple[str, ...] = ()
    if action == "amend" and len(accepted) < proposal.b:
        # Replace exclusions by rerunning the selection, conditioning on the
        # design plus what was just accepted.
        index = state.candidate_index()
        by_id = state.candidate_by_id()
        conditioning = state.design().extended(
            tuple(by_id[i].location for i in accepted),
            tuple(index[i] for i in accepted),
        )
        eligible = _eligible_indices(state, also_exclude=set(excluded) | set(proposal.ids))
        backfill_ids, backfill_pv, backfill_removed, _ = _select(
            state, conditioning, eligible, proposal.b - len(accepted), proposal.delta
        )

    _check_spacing(state, accepted + backfill_ids, proposal.delta)
    event = {
        "type": EVENT_REVIEWED,
        "pid": pid,
        "action": action,
        "excluded": list(excluded),
        "accepted_ids": list(accepted),
        "backfill_ids": list(backfill_ids),
        "backfill_pv": list(backfill_pv),
        "backfill_removed": list(backfill_removed),
    }
    return event, apply_event(state, event)


def _check_spacing(state: CampaignState, joining_ids: tuple[str, ...], delta: float):
    """Joining points must sit strictly beyond delta from the design and from
    each other; selection guarantees it, acceptance rechecks it."""
    by_id = state.candidate_by_id()
    new_xy = np.asarray([[by_id[i].location.x, by_id[i].location.y] for i in joining_ids])
    if not len(new_xy):
        return
    design_xy = state.design().xy()
    all_xy = np.vstack([design_xy, new_xy]) if len(design_xy) else new_xy
    start = len(all_xy) - len(new_xy)
    for k in range(start, len(all_xy)):
        d2 = np.square(all_xy[:k] - all_xy[k]).sum(axis=1)
        if len(d2) and float(d2.min()) <= delta * delta:
            raise CampaignError(
                f"acceptance check failed: {joining_ids[k - start]!r} is within "
                f"{delta} of another design point"
            )


def surface(state: CampaignState, what: str, threshold: float | None = None) -> dict:
    """Per-candidate prediction summaries from the latest fit and all data."""
    if what not in (WHAT_PV, WHAT_MEAN, WHAT_EXCEEDANCE):
        raise CampaignError(f"what must be pv, mean, or exceedance; got {what!r}")
    model = state.fitted_model()
    if model is None:
        raise _conflict("no fitted round yet")
    if what == WHAT_EXCEEDANCE and threshold is None:
        raise CampaignError("exceedance needs a threshold c")
    data = state.observed_data()
    targets = tuple(c.location for c in state.candidates)
    target_cov = None
    if state.candidates[0].covariates:
        target_cov = [list(c.covariates) for c in state.candidates]

    if what == WHAT_PV:
        tested = data.tested if state.settings.nugget_mode == NUGGET_COUNT_SCALED else None
        values = prediction_variance_surface(model, data.locations, targets, per_location_n=tested)
    else:
        result = krige(
            model,
            data,
            targets,
            target_covariates=target_cov,
            nugget_mode=state.settings.nugget_mode,
            threshold=threshold,
        )
        values = result.mean if what == WHAT_MEAN else result.exceedance
    out = {
        "what": what,
        "ids": [c.id for c in state.candidates],
        "values": [float(v) for v in values],
        "min": float(np.min(values)),
        "max": float(np.max(values)),
        "mean": float(np.mean(values)),
    }
    if what == WHAT_EXCEEDANCE:
        out["threshold"] = float(threshold)
    return out


def round_report(state: CampaignState, round_index: int) -> dict:
    """Summary of one round: the fit in force, the variance surface it
    implies over the candidates, and any proposal made on it."""
    if round_index < 0 or round_index >= len(state.rounds):
        raise _not_found(f"no round {round_index}")
    rnd = state.rounds[round_index]
    fit = None
    for r in range(round_index, -1, -1):
        if state.rounds[r].fit is not None:
            fit = state.rounds[r].fit
            break
    report: dict = {
        "round": round_index,
        "fit": fit,
        "fit_warning": rnd.fit_warning,
        "n_locations": 0,
        "apv": None,
        "pv": None,
        "proposal": None,
    }
    data = state.observed_data(round_index)
    report["n_locations"] = data.n
    model = state.fitted_model(round_index)
    if model is not None:
        tested = data.tested if state.settings.nugget_mode == NUGGET_COUNT_SCALED else None
        targets = tuple(c.location for c in state.candidates)
        pv = prediction_variance_surface(model, data.locations, targets, per_location_n=tested)
        report["apv"] = float(np.mean(pv))
        report["pv"] = {"min": float(np.min(pv)), "max": float(np.max(pv)), "mean": float(np.mean(pv))}
    for p in reversed(state.proposals):
        if p.round_index == round_index:
            report["proposal"] = _proposal_dict(p)
            break
    return report


def _proposal_dict(p: Proposal) -> dict:
    return {
        "pid": p.pid,
        "round": p.round_index,
        "b": p.b,
        "delta": p.delta,
        "ids": list(p.ids),
        "pv": list(p.pv),
        "exhausted": p.exhausted,
        "status": p.status,
        "excluded": list(p.excluded),
        "backfill_ids": list(p.backfill_ids),
        "backfill_pv": list(p.backfill_pv),
    }


def campaign_response(state: CampaignState) -> dict:
    """GET body: full state plus derived conveniences."""
    out = state.to_dict()
    out["n_candidates"] = len(state.candidates)
    out["mode"] = state.mode
    open_p = state.open_proposal
    out["open_proposal"] = open_p.pid if open_p else None
    return out
