"""Event-sourced campaign state.

A campaign is fully described by its append-only event log; the in-memory
state is a pure fold over the events, and replaying the log always rebuilds
an identical state.  Events record computed outcomes (fits, chosen ids,
prediction variances), so replay involves no numerics and never diverges
from what actually happened.  Nothing here touches disk or clocks.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Iterable

from geoadapt.campaign.files import MODE_COUNTS
from geoadapt.data import SurveyData
from geoadapt.design import RULE_NEW_POINTS, Design
from geoadapt.errors import CampaignError
from geoadapt.geometry import Location
from geoadapt.model import MaternParams, ModelSpec

EVENT_CREATED = "campaign-created"
EVENT_ROUND = "round-ingested"
EVENT_PROPOSED = "proposal-created"
EVENT_REVIEWED = "proposal-reviewed"

STATUS_OPEN = "open"
STATUS_ACCEPTED = "accepted"
STATUS_REJECTED = "rejected"
STATUS_AMENDED = "amended"

NUGGET_MODES = ("constant", "count-scaled")


def canonical_json(obj) -> str:
    """Stable serialization: sorted keys, no whitespace.  Snapshot and log
    bytes must not depend on dict construction order."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


@dataclass(frozen=True)
class Settings:
    delta: float
    b: int
    kappa: float = 1.5
    nugget_mode: str = "constant"
    min_fit_n: int = 20
    fix_tau2: float | None = None

    def __post_init__(self):
        if self.delta < 0:
            raise CampaignError("delta must be >= 0")
        if self.b < 1:
            raise CampaignError("batch size b must be >= 1")
        if self.kappa <= 0:
            raise CampaignError("kappa must be > 0")
        if self.nugget_mode not in NUGGET_MODES:
            raise CampaignError(f"nugget_mode must be one of {NUGGET_MODES}")
        if self.min_fit_n < 2:
            raise CampaignError("min_fit_n must be >= 2")
        if self.fix_tau2 is not None and self.fix_tau2 < 0:
            raise CampaignError("fix_tau2 must be >= 0")

    def to_dict(self) -> dict:
        return {
            "delta": self.delta,
            "b": self.b,
            "kappa": self.kappa,
            "nugget_mode": self.nugget_mode,
            "min_fit_n": self.min_fit_n,
            "fix_tau2": self.fix_tau2,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "Settings":
        allowed = {"delta", "b", "kappa", "nugget_mode", "min_fit_n", "fix_tau2"}
        unknown = set(raw) - allowed
        if unknown:
            raise CampaignError(f"unknown settings fields: {sorted(unknown)}")
        if "delta" not in raw or "b" not in raw:
            raise CampaignError("settings need at least delta and b")
        return cls(**raw)


@dataclass(frozen=True)
class Candidate:
    id: str
    location: Location
    covariates: tuple[float, ...] = ()


@dataclass(frozen=True)
class RoundData:
    index: int
    mode: str
    ids: tuple[str, ...]
    values: tuple[tuple[float, ...], ...]
    fit: dict | None
    fit_warning: str | None
    digest: str


@dataclass(frozen=True)
class Proposal:
    pid: str
    round_index: int
    b: int
    delta: float
    ids: tuple[str, ...]
    pv: tuple[float, ...]
    exhausted: bool
    status: str = STATUS_OPEN
    excluded: tuple[str, ...] = ()
    backfill_ids: tuple[str, ...] = ()
    backfill_pv: tuple[float, ...] = ()


@dataclass(frozen=True)
class CampaignState:
    id: str
    crs: str
    settings: Settings
    candidates: tuple[Candidate, ...]
    rounds: tuple[RoundData, ...] = ()
    design_ids: tuple[str, ...] = ()
    design_batch: tuple[int, ...] = ()
    infeasible: tuple[str, ...] = ()
    removed: tuple[str, ...] = ()
    proposals: tuple[Proposal, ...] = ()

    def candidate_index(self) -> dict[str, int]:
        return {c.id: i for i, c in enumerate(self.candidates)}

    def candidate_by_id(self) -> dict[str, Candidate]:
        return {c.id: c for c in self.candidates}

    @property
    def mode(self) -> str | None:
        return self.rounds[0].mode if self.rounds else None

    @property
    def open_proposal(self) -> Proposal | None:
        for p in self.proposals:
            if p.status == STATUS_OPEN:
                return p
        return None

    def design(self) -> Design:
        index = self.candidate_index()
        by_id = self.candidate_by_id()
        return Design(
            points=tuple(by_id[i].location for i in self.design_ids),
            batch_index=self.design_batch,
            delta=self.settings.delta,
            rule=RULE_NEW_POINTS,
            indices=tuple(index[i] for i in self.design_ids),
        )

    def fitted_model(self, upto_round: int | None = None) -> ModelSpec | None:
        """Latest recorded fit at or before the given round (default: last)."""
        last = len(self.rounds) - 1 if upto_round is None else upto_round
        for r in range(last, -1, -1):
            fit = self.rounds[r].fit
            if fit is not None:
                return ModelSpec(
                    beta=tuple(fit["beta"]),
                    matern=MaternParams(fit["sigma2"], fit["phi"], fit["kappa"]),
                    tau2=fit["tau2"],
                )
        return None

    def observed_data(self, upto_round: int | None = None) -> SurveyData | None:
        """Accumulated observations through the given round, aggregated per
        location: counts sum across rounds, continuous values must not repeat.
        """
        last = len(self.rounds) if upto_round is None else upto_round + 1
        rounds = self.rounds[:last]
        if not rounds:
            return None
        by_id = self.candidate_by_id()
        order: list[str] = []
        if rounds[0].mode == MODE_COUNTS:
            tested: dict[str, float] = {}
            positive: dict[str, float] = {}
            for rnd in rounds:
                for lid, (n, y) in zip(rnd.ids, rnd.values):
                    if lid not in tested:
                        order.append(lid)
                        tested[lid] = 0.0
                        positive[lid] = 0.0
                    tested[lid] += n
                    positive[lid] += y
            locs = tuple(by_id[i].location for i in order)
            cov = _covariate_matrix(by_id, order)
            return SurveyData.from_counts(
                locs,
                positives=[positive[i] for i in order],
                tested=[tested[i] for i in order],
                covariates=cov,
            )
        value: dict[str, float] = {}
        for rnd in rounds:
            for lid, (v,) in zip(rnd.ids, rnd.values):
                if lid not in value:
                    order.append(lid)
                value[lid] = v
        locs = tuple(by_id[i].location for i in order)
        cov = _covariate_matrix(by_id, order)
        return SurveyData.from_continuous(locs, [value[i] for i in order], covariates=cov)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "crs": self.crs,
            "settings": self.settings.to_dict(),
            "candidates": [
                {"id": c.id, "x": c.location.x, "y": c.location.y, "covariates": list(c.covariates)}
                for c in self.candidates
            ],
            "rounds": [
                {
                    "round": r.index,
                    "mode": r.mode,
                    "ids": list(r.ids),
                    "values": [list(v) for v in r.values],
                    "fit": r.fit,
                    "fit_warning": r.fit_warning,
                    "digest": r.digest,
                }
                for r in self.rounds
            ],
            "design": [
                {"id": i, "batch": b} for i, b in zip(self.design_ids, self.design_batch)
            ],
            "infeasible": list(self.infeasible),
            "removed": list(self.removed),
            "proposals": [
                {
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
                for p in self.proposals
            ],
        }


def _covariate_matrix(by_id: dict[str, Candidate], order: list[str]):
    n_cov = len(by_id[order[0]].covariates) if order else 0
    if n_cov == 0:
        return None
    return [list(by_id[i].covariates) for i in order]


def apply_event(state: CampaignState | None, event: dict) -> CampaignState:
    etype = event.get("type")
    if etype == EVENT_CREATED:
        if state is not None:
            raise CampaignError("creation event on an existing campaign")
        return CampaignState(
            id=event["id"],
            crs=event["crs"],
            settings=Settings.from_dict(event["settings"]),
            candidates=tuple(
                Candidate(id=cid, location=Location(x, y), covariates=tuple(cov))
                for cid, x, y, cov in event["candidates"]
            ),
        )
    if state is None:
        raise CampaignError(f"event {etype!r} before campaign creation")
    if etype == EVENT_ROUND:
        known = {c.id for c in state.candidates}
        design_ids = set(state.design_ids)
        new_ids = [i for i in event["ids"] if i not in design_ids]
        unknown = [i for i in new_ids if i not in known]
        if unknown:
            raise CampaignError(f"round references unknown ids: {unknown[:5]}")
        rnd = RoundData(
            index=event["round"],
            mode=event["mode"],
            ids=tuple(event["ids"]),
            values=tuple(tuple(v) for v in event["values"]),
            fit=event["fit"],
            fit_warning=event["fit_warning"],
            digest=event["digest"],
        )
        # Newly observed locations join the design at the current batch
        # level (0 before any accepted proposal).
        current_batch = max(state.design_batch) if state.design_batch else 0
        return replace(
            state,
            rounds=state.rounds + (rnd,),
            design_ids=state.design_ids + tuple(new_ids),
            design_batch=state.design_batch + (current_batch,) * len(new_ids),
        )
    if etype == EVENT_PROPOSED:
        proposal = Proposal(
            pid=event["pid"],
            round_index=event["round"],
            b=event["b"],
            delta=event["delta"],
            ids=tuple(event["ids"]),
            pv=tuple(event["pv"]),
            exhausted=event["exhausted"],
        )
        return replace(
            state,
            proposals=state.proposals + (proposal,),
            removed=state.removed + tuple(event["removed"]),
        )
    if etype == EVENT_REVIEWED:
        pid = event["pid"]
        idx = next((i for i, p in enumerate(state.proposals) if p.pid == pid), None)
        if idx is None:
            raise CampaignError(f"review of unknown proposal {pid!r}")
        action = event["action"]
        proposal = state.proposals[idx]
        if action == "reject":
            updated = replace(proposal, status=STATUS_REJECTED)
            return replace(
                state,
                proposals=state.proposals[:idx] + (updated,) + state.proposals[idx + 1 :],
            )
        excluded = tuple(event["excluded"])
        accepted = tuple(event["accepted_ids"])
        backfill = tuple(event["backfill_ids"])
        status = STATUS_AMENDED if action == "amend" else STATUS_ACCEPTED
        updated = replace(
            proposal,
            status=status,
            excluded=excluded,
            backfill_ids=backfill,
            backfill_pv=tuple(event["backfill_pv"]),
        )
        batch = (max(state.design_batch) if state.design_batch else 0) + 1
        joining = accepted + backfill
        return replace(
            state,
            proposals=state.proposals[:idx] + (updated,) + state.proposals[idx + 1 :],
            design_ids=state.design_ids + joining,
            design_batch=state.design_batch + (batch,) * len(joining),
            infeasible=state.infeasible + excluded,
            removed=state.removed + tuple(event["backfill_removed"]),
        )
    raise CampaignError(f"unknown event type: {etype!r}")


def replay(events: Iterable[dict]) -> CampaignState:
    state: CampaignState | None = None
    for event in events:
        state = apply_event(state, event)
    if state is None:
        raise CampaignError("empty event log")
    return state
