import json

import pytest
from fastapi.testclient import TestClient

from geoadapt.campaign.config import ServiceConfig
from geoadapt.campaign.service import create_app

from .campaign_common import (
    ROUND1_IDS,
    continuous_obs_csv,
    default_settings,
    grid_candidates_csv,
)

SETTINGS = default_settings().to_dict()


def make_client(tmp_path, **config_overrides):
    config = ServiceConfig(data_dir=str(tmp_path / "data"), **config_overrides)
    return TestClient(create_app(config))


def create_demo(client, cid="demo"):
    return client.post(
        "/campaigns",
        json={
            "candidates_csv": grid_candidates_csv(),
            "id": cid,
            "crs": "planar",
            "settings": SETTINGS,
        },
    )


def ingest(client, ids, cid="demo"):
    return client.post(
        f"/campaigns/{cid}/rounds", json={"observations_csv": continuous_obs_csv(ids)}
    )


class TestCampaignFlow:
    @pytest.fixture()
    def client(self, tmp_path):
        return make_client(tmp_path)

    def test_create_returns_full_state(self, client):
        r = create_demo(client)
        assert r.status_code == 201
        body = r.json()
        assert body["id"] == "demo"
        assert body["n_candidates"] == 100
        assert body["mode"] is None
        assert body["open_proposal"] is None

    def test_listing(self, client):
        assert client.get("/campaigns").json() == []
        create_demo(client)
        listing = client.get("/campaigns").json()
        assert listing == [
            {
                "id": "demo",
                "n_candidates": 100,
                "rounds": 0,
                "design_size": 0,
                "open_proposal": None,
            }
        ]

    def test_full_round_cycle(self, client):
        create_demo(client)

        r = ingest(client, ROUND1_IDS)
        assert r.status_code == 201
        report = r.json()
        assert report["round"] == 0
        assert report["fit"]["converged"] is True
        assert report["apv"] > 0

        r = client.post("/campaigns/demo/proposals", json={})
        assert r.status_code == 201
        proposal = r.json()
        assert len(proposal["ids"]) == SETTINGS["b"]
        assert proposal["status"] == "open"

        excluded = proposal["ids"][:2]
        r = client.post(
            f"/campaigns/demo/proposals/{proposal['pid']}/review",
            json={"action": "amend", "excluded_ids": excluded},
        )
        assert r.status_code == 200
        body = r.json()
        reviewed = body["proposals"][0]
        assert reviewed["status"] == "amended"
        assert reviewed["excluded"] == excluded
        assert len(body["design"]) == len(ROUND1_IDS) + SETTINGS["b"]
        assert body["open_proposal"] is None

        r = client.get("/campaigns/demo/report/0")
        assert r.status_code == 200
        assert r.json()["proposal"]["pid"] == proposal["pid"]

    def test_get_campaign_round_trips_state(self, client):
        create_demo(client)
        ingest(client, ROUND1_IDS)
        body = client.get("/campaigns/demo").json()
        assert body["mode"] == "continuous"
        assert len(body["rounds"]) == 1
        assert len(body["design"]) == len(ROUND1_IDS)

    def test_surfaces(self, client):
        create_demo(client)
        ingest(client, ROUND1_IDS)
        pv = client.get("/campaigns/demo/surface", params={"what": "pv"}).json()
        assert len(pv["values"]) == 100
        assert pv["min"] == min(pv["values"])
        exc = client.get(
            "/campaigns/demo/surface", params={"what": "exceedance", "c": 0.0}
        ).json()
        assert exc["threshold"] == 0.0
        assert all(0 <= v <= 1 for v in exc["values"])

    def test_proposal_flow_with_reject(self, client):
        create_demo(client)
        ingest(client, ROUND1_IDS)
        p1 = client.post("/campaigns/demo/proposals", json={"b": 2}).json()
        r = client.post(
            f"/campaigns/demo/proposals/{p1['pid']}/review", json={"action": "reject"}
        )
        assert r.status_code == 200
        assert len(r.json()["design"]) == len(ROUND1_IDS)
        p2 = client.post("/campaigns/demo/proposals", json={}).json()
        assert p2["pid"] == "p2"


class TestMultipart:
    @pytest.fixture()
    def client(self, tmp_path):
        return make_client(tmp_path)

    def test_create_via_form_upload(self, client):
        r = client.post(
            "/campaigns",
            files={"candidates": ("candidates.csv", grid_candidates_csv(k=4))},
            data={"id": "field1", "settings": json.dumps(SETTINGS)},
        )
        assert r.status_code == 201
        assert r.json()["n_candidates"] == 16

    def test_generated_id_when_omitted(self, client):
        r = client.post(
            "/campaigns",
            files={"candidates": ("c.csv", grid_candidates_csv(k=2))},
            data={"settings": json.dumps(SETTINGS)},
        )
        assert r.status_code == 201
        assert len(r.json()["id"]) == 12

    def test_ingest_via_form_upload(self, client):
        create_demo(client)
        r = client.post(
            "/campaigns/demo/rounds",
            files={"observations": ("obs.csv", continuous_obs_csv(ROUND1_IDS))},
        )
        assert r.status_code == 201
        assert r.json()["fit"] is not None

    def test_multipart_without_file_part(self, client):
        r = client.post("/campaigns", data={"id": "x"})
        assert r.status_code == 400


class TestErrors:
    @pytest.fixture()
    def client(self, tmp_path):
        return make_client(tmp_path)

    def test_unknown_campaign_404(self, client):
        for url in (
            "/campaigns/nope",
            "/campaigns/nope/report/0",
        ):
            r = client.get(url)
            assert r.status_code == 404
            assert "message" in r.json()["detail"]

    def test_duplicate_create_409(self, client):
        assert create_demo(client).status_code == 201
        r = create_demo(client)
        assert r.status_code == 409

    def test_propose_without_fit_409(self, client):
        create_demo(client)
        r = client.post("/campaigns/demo/proposals", json={})
        assert r.status_code == 409

    def test_bad_settings_400(self, client):
        r = client.post(
            "/campaigns",
            json={"candidates_csv": grid_candidates_csv(k=2), "settings": {"delta": 0.1}},
        )
        assert r.status_code == 400
        assert "delta and b" in r.json()["detail"]["message"]

    def test_invalid_body_422(self, client):
        create_demo(client)
        ingest(client, ROUND1_IDS)
        r = client.post("/campaigns/demo/proposals", json={"b": 0})
        assert r.status_code == 422

    def test_bad_review_action_400(self, client):
        create_demo(client)
        ingest(client, ROUND1_IDS)
        p = client.post("/campaigns/demo/proposals", json={}).json()
        r = client.post(
            f"/campaigns/demo/proposals/{p['pid']}/review", json={"action": "defer"}
        )
        assert r.status_code == 400

    def test_bad_csv_400_with_row_details(self, client):
        r = client.post(
            "/campaigns",
            json={"candidates_csv": "id,x,y\na,0\n", "id": "bad", "settings": SETTINGS},
        )
        assert r.status_code == 400
        assert r.json()["detail"]["rows"]

    def test_lock_timeout_503(self, tmp_path):
        client = make_client(tmp_path, lock_timeout=0.05)
        create_demo(client)
        store = client.app.state.store
        lock = store._lock_for("demo")
        lock.acquire()
        try:
            r = ingest(client, ROUND1_IDS)
            assert r.status_code == 503
        finally:
            lock.release()

    def test_invalid_json_body_400(self, client):
        r = client.post(
            "/campaigns",
            content=b"not json",
            headers={"content-type": "application/json"},
        )
        assert r.status_code == 400


class TestPersistenceAcrossApps:
    def test_state_survives_restart(self, tmp_path):
        client = make_client(tmp_path)
        create_demo(client)
        ingest(client, ROUND1_IDS)
        before = client.get("/campaigns/demo").json()

        again = make_client(tmp_path)
        after = again.get("/campaigns/demo").json()
        assert after == before


class TestStaticMount:
    def test_ui_served_alongside_api(self, tmp_path):
        static = tmp_path / "ui"
        static.mkdir()
        (static / "index.html").write_text("<!doctype html><title>planner</title>")
        client = make_client(tmp_path, static_dir=str(static))
        r = client.get("/")
        assert r.status_code == 200
        assert "planner" in r.text
        assert client.get("/campaigns").status_code == 200
