"""HTTP API over the campaign core.

JSON in and out; the two file-upload endpoints also accept multipart form
data so command-line curl and browser forms both work.  Error bodies carry
``{"detail": {"message": ..., ...}}`` with statuses 400 (invalid input),
404 (missing), 409 (conflict), and 503 (write-lock timeout).
"""

from __future__ import annotations

import json
import uuid

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from geoadapt.campaign import core
from geoadapt.campaign.config import ServiceConfig
from geoadapt.campaign.state import Settings, apply_event
from geoadapt.campaign.store import CampaignStore
from geoadapt.errors import CampaignError

_STATUS_BY_CODE = {"conflict": 409, "not-found": 404, "timeout": 503}


class ProposalRequest(BaseModel):
    b: int | None = Field(default=None, ge=1)
    delta: float | None = Field(default=None, ge=0)


class ReviewRequest(BaseModel):
    action: str
    excluded_ids: list[str] = Field(default_factory=list)


async def _file_or_json(request: Request, file_key: str, json_key: str) -> tuple[str, dict]:
    """Both upload endpoints take multipart (a file part plus form fields)
    or a JSON body with the content inline; returns (text, other fields)."""
    content_type = request.headers.get("content-type", "")
    if content_type.startswith("multipart/"):
        form = await request.form()
        upload = form.get(file_key) or form.get("file")
        if upload is None:
            raise CampaignError(f"multipart body needs a {file_key!r} file part")
        text = (await upload.read()).decode("utf-8")
        fields = {k: v for k, v in form.items() if k not in (file_key, "file")}
        return text, fields
    try:
        body = await request.json()
    except json.JSONDecodeError as exc:
        raise CampaignError(f"body is neither multipart nor valid JSON: {exc}") from exc
    if json_key not in body:
        raise CampaignError(f"JSON body needs {json_key!r}")
    return str(body[json_key]), {k: v for k, v in body.items() if k != json_key}


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig()
    app = FastAPI(title="geoadapt campaign service")
    store = CampaignStore(config.data_dir, lock_timeout=config.lock_timeout)
    app.state.store = store
    app.state.config = config

    @app.exception_handler(CampaignError)
    async def campaign_error(request: Request, exc: CampaignError):
        details = dict(exc.details or {})
        status = _STATUS_BY_CODE.get(details.pop("code", None), 400)
        return JSONResponse(
            status_code=status, content={"detail": {"message": str(exc), **details}}
        )

    @app.get("/campaigns")
    def list_campaigns():
        out = []
        for cid in store.ids():
            state = store.get(cid)
            out.append(
                {
                    "id": cid,
                    "n_candidates": len(state.candidates),
                    "rounds": len(state.rounds),
                    "design_size": len(state.design_ids),
                    "open_proposal": state.open_proposal.pid if state.open_proposal else None,
                }
            )
        return out

    @app.post("/campaigns", status_code=201)
    async def create_campaign(request: Request):
        text, fields = await _file_or_json(request, "candidates", "candidates_csv")
        raw_settings = fields.get("settings", {})
        if isinstance(raw_settings, str):
            try:
                raw_settings = json.loads(raw_settings)
            except json.JSONDecodeError as exc:
                raise CampaignError(f"settings is not valid JSON: {exc}") from exc
        settings = Settings.from_dict(raw_settings)
        campaign_id = str(fields.get("id") or uuid.uuid4().hex[:12])
        crs = str(fields.get("crs") or "planar")
        event, state = core.create_campaign(campaign_id, crs, settings, text)
        store.create(event, state)
        return core.campaign_response(state)

    @app.get("/campaigns/{cid}")
    def get_campaign(cid: str):
        return core.campaign_response(store.get(cid))

    @app.post("/campaigns/{cid}/rounds", status_code=201)
    async def ingest_round(cid: str, request: Request):
        text, _ = await _file_or_json(request, "observations", "observations_csv")
        with store.lock(cid):
            state = store.get(cid)
            event, report = core.ingest_round(state, text)
            store.append(cid, event, apply_event(state, event))
        return report

    @app.post("/campaigns/{cid}/proposals", status_code=201)
    def propose(cid: str, body: ProposalRequest):
        with store.lock(cid):
            state = store.get(cid)
            event, proposal = core.propose_batch(state, b=body.b, delta=body.delta)
            store.append(cid, event, apply_event(state, event))
        return proposal

    @app.post("/campaigns/{cid}/proposals/{pid}/review")
    def review(cid: str, pid: str, body: ReviewRequest):
        with store.lock(cid):
            state = store.get(cid)
            event, new_state = core.review_proposal(
                state, pid, body.action, body.excluded_ids
            )
            store.append(cid, event, new_state)
        return core.campaign_response(new_state)

    @app.get("/campaigns/{cid}/surface")
    def surface(cid: str, what: str, c: float | None = None):
        return core.surface(store.get(cid), what, threshold=c)

    @app.get("/campaigns/{cid}/report/{round_index}")
    def report(cid: str, round_index: int):
        return core.round_report(store.get(cid), round_index)

    if config.static_dir:
        app.mount("/", StaticFiles(directory=config.static_dir, html=True), name="ui")

    return app
