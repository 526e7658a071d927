import numpy as np
import pytest

from geoadapt.campaign.core import (
    campaign_response,
    create_campaign,
    ingest_round,
    propose_batch,
    review_proposal,
    round_report,
    surface,
)
from geoadapt.campaign.state import STATUS_REJECTED, apply_event
from geoadapt.errors import CampaignError

from .campaign_common import (
    ROUND1_IDS,
    continuous_obs_csv,
    counts_obs_csv,
    default_settings,
    grid_candidates_csv,
    location_of,
    scripted_campaign,
)


def fresh_campaign(**settings_overrides):
    _, state = create_campaign(
        "demo", "planar", default_settings(**settings_overrides), grid_candidates_csv()
    )
    return state


def fitted_campaign(**settings_overrides):
    state = fresh_campaign(**settings_overrides)
    event, _ = ingest_round(state, continuous_obs_csv(ROUND1_IDS))
    return apply_event(state, event)


@pytest.fixture(scope="module")
def scripted():
    return scripted_campaign()


class TestCreateCampaign:
    def test_builds_state_and_event(self):
        event, state = create_campaign(
            "abc-1_X", "utm-35s", default_settings(), grid_candidates_csv(k=3)
        )
        assert state.id == "abc-1_X"
        assert state.crs == "utm-35s"
        assert len(state.candidates) == 9
        assert event["type"] == "campaign-created"

    @pytest.mark.parametrize("bad", ["", "-lead", "_lead", "a b", "x" * 65, "ü1"])
    def test_id_validation(self, bad):
        with pytest.raises(CampaignError, match="campaign id"):
            create_campaign(bad, "planar", default_settings(), grid_candidates_csv(k=2))

    def test_ragged_covariates_rejected(self):
        text = "id,x,y,elev\na,0,0,1\nb,1,1\n"
        with pytest.raises(CampaignError):
            create_campaign("c1", "planar", default_settings(), text)


class TestIngestRound:
    def test_first_round_fits_and_reports(self):
        state = fresh_campaign()
        event, report = ingest_round(state, continuous_obs_csv(ROUND1_IDS))
        assert event["fit"] is not None
        assert event["fit"]["converged"] is True
        assert event["fit"]["tau2"] == 0.0
        assert event["fit_warning"] is None
        assert report["round"] == 0
        assert report["n_locations"] == len(ROUND1_IDS)
        assert 0.0 < report["apv"]
        assert report["pv"]["min"] <= report["pv"]["mean"] <= report["pv"]["max"]

    def test_unknown_ids_rejected(self):
        state = fresh_campaign()
        with pytest.raises(CampaignError) as err:
            ingest_round(state, "location_id,y_star\nghost,0.5\n")
        assert err.value.details["ids"] == ["ghost"]

    def test_mode_locked_after_first_round(self):
        state = fitted_campaign()
        with pytest.raises(CampaignError, match="continuous"):
            ingest_round(state, counts_obs_csv([("c2", 10, 4)]))

    def test_duplicate_content_conflicts(self):
        # counts may legitimately re-observe a household, so the identical-file
        # guard is what catches an accidental double upload
        state = fresh_campaign(nugget_mode="count-scaled", fix_tau2=0.1)
        text = counts_obs_csv([(cid, 40, 8 + (i % 5)) for i, cid in enumerate(ROUND1_IDS)])
        event, _ = ingest_round(state, text)
        state = apply_event(state, event)
        with pytest.raises(CampaignError) as err:
            ingest_round(state, text)
        assert err.value.details["code"] == "conflict"

    def test_continuous_reobservation_rejected(self):
        state = fitted_campaign()
        text = continuous_obs_csv([ROUND1_IDS[0], "c2"]).replace(
            "location_id,y_star", "location_id,y_star"
        )
        with pytest.raises(CampaignError, match="re-observed"):
            ingest_round(state, text)

    def test_counts_mode_campaign(self):
        state = fresh_campaign(nugget_mode="count-scaled", fix_tau2=0.1)
        rows = [(cid, 50, 10 + 3 * (i % 4)) for i, cid in enumerate(ROUND1_IDS)]
        event, report = ingest_round(state, counts_obs_csv(rows))
        assert event["fit"] is not None
        state = apply_event(state, event)
        assert state.mode == "counts"
        data = state.observed_data()
        assert data.tested is not None

    def test_fit_failure_records_warning(self):
        state = fresh_campaign()
        text = "location_id,y_star\n" + "\n".join(f"{c},1.0" for c in ROUND1_IDS) + "\n"
        event, report = ingest_round(state, text)
        assert event["fit"] is None
        assert "estimation failed" in event["fit_warning"]
        assert report["apv"] is None

    def test_too_few_locations_fails_fit(self):
        state = fresh_campaign(min_fit_n=10)
        event, _ = ingest_round(state, continuous_obs_csv(ROUND1_IDS[:4]))
        assert event["fit"] is None
        assert "estimation failed" in event["fit_warning"]


class TestProposeBatch:
    def test_requires_a_fit(self):
        state = fresh_campaign()
        with pytest.raises(CampaignError) as err:
            propose_batch(state)
        assert err.value.details["code"] == "conflict"

    def test_proposes_default_b(self):
        state = fitted_campaign()
        event, proposal = propose_batch(state)
        assert len(proposal["ids"]) == state.settings.b
        assert proposal["pid"] == "p1"
        assert proposal["status"] == "open"
        assert len(proposal["pv"]) == len(proposal["ids"])

    def test_pv_non_increasing_within_batch(self):
        state = fitted_campaign()
        _, proposal = propose_batch(state)
        pv = proposal["pv"]
        assert all(a >= b for a, b in zip(pv, pv[1:]))

    def test_override_b_and_delta(self):
        state = fitted_campaign()
        _, proposal = propose_batch(state, b=5, delta=0.0)
        assert len(proposal["ids"]) == 5
        assert proposal["delta"] == 0.0

    def test_proposed_points_clear_of_design(self):
        state = fitted_campaign()
        _, proposal = propose_batch(state)
        design_pts = [location_of(i) for i in state.design_ids]
        for cid in proposal["ids"]:
            x, y = location_of(cid)
            for qx, qy in design_pts:
                assert ((x - qx) ** 2 + (y - qy) ** 2) ** 0.5 > state.settings.delta

    def test_open_proposal_blocks_another(self):
        state = fitted_campaign()
        event, _ = propose_batch(state)
        state = apply_event(state, event)
        with pytest.raises(CampaignError) as err:
            propose_batch(state)
        assert err.value.details["code"] == "conflict"

    def test_bad_overrides_rejected(self):
        state = fitted_campaign()
        with pytest.raises(CampaignError):
            propose_batch(state, b=0)
        with pytest.raises(CampaignError):
            propose_batch(state, delta=-1.0)


class TestReviewProposal:
    def make_open(self):
        state = fitted_campaign()
        event, proposal = propose_batch(state)
        return apply_event(state, event), proposal["pid"]

    def test_accept_commits_batch(self):
        state, pid = self.make_open()
        n_before = len(state.design_ids)
        _, new_state = review_proposal(state, pid, "accept")
        assert len(new_state.design_ids) == n_before + state.settings.b
        assert max(new_state.design_batch) == 1
        assert new_state.open_proposal is None

    def test_reject_leaves_design_unchanged(self):
        state, pid = self.make_open()
        _, new_state = review_proposal(state, pid, "reject")
        assert new_state.design_ids == state.design_ids
        assert new_state.proposals[0].status == STATUS_REJECTED
        # a fresh proposal is allowed afterwards
        event, proposal = propose_batch(new_state)
        assert proposal["pid"] == "p2"

    def test_amend_excludes_and_backfills(self):
        state, pid = self.make_open()
        proposal = state.proposals[0]
        excluded = list(proposal.ids[:1])
        _, new_state = review_proposal(state, pid, "amend", excluded)
        updated = new_state.proposals[0]
        assert updated.excluded == tuple(excluded)
        assert len(updated.backfill_ids) == 1
        assert set(updated.backfill_ids).isdisjoint(set(proposal.ids))
        joined = new_state.design_ids[len(state.design_ids):]
        assert len(joined) == state.settings.b
        assert excluded[0] not in joined
        assert excluded[0] in new_state.infeasible

    def test_amend_without_exclusions_accepts_all(self):
        state, pid = self.make_open()
        _, new_state = review_proposal(state, pid, "amend", [])
        assert new_state.proposals[0].status == "amended"
        assert new_state.proposals[0].backfill_ids == ()
        assert len(new_state.design_ids) == len(state.design_ids) + state.settings.b

    def test_exclusions_must_come_from_proposal(self):
        state, pid = self.make_open()
        with pytest.raises(CampaignError, match="from the proposal"):
            review_proposal(state, pid, "amend", ["c2"])

    def test_accept_with_exclusions_rejected(self):
        state, pid = self.make_open()
        some_id = state.proposals[0].ids[0]
        with pytest.raises(CampaignError, match="use amend"):
            review_proposal(state, pid, "accept", [some_id])

    def test_unknown_pid(self):
        state, _ = self.make_open()
        with pytest.raises(CampaignError) as err:
            review_proposal(state, "p9", "accept")
        assert err.value.details["code"] == "not-found"

    def test_double_review_conflicts(self):
        state, pid = self.make_open()
        _, new_state = review_proposal(state, pid, "accept")
        with pytest.raises(CampaignError) as err:
            review_proposal(new_state, pid, "accept")
        assert err.value.details["code"] == "conflict"

    def test_unknown_action(self):
        state, pid = self.make_open()
        with pytest.raises(CampaignError, match="accept, reject, or amend"):
            review_proposal(state, pid, "defer")


@pytest.fixture(scope="module")
def fitted():
    return fitted_campaign()


class TestSurface:

    def test_pv_surface(self, fitted):
        out = surface(fitted, "pv")
        assert out["what"] == "pv"
        assert len(out["values"]) == len(fitted.candidates)
        assert out["min"] == min(out["values"])
        assert out["max"] == max(out["values"])
        assert out["mean"] == pytest.approx(float(np.mean(out["values"])))
        assert all(v >= 0 for v in out["values"])

    def test_mean_surface(self, fitted):
        out = surface(fitted, "mean")
        assert len(out["values"]) == len(fitted.candidates)
        lo = min(v for (v,) in fitted.rounds[0].values)
        hi = max(v for (v,) in fitted.rounds[0].values)
        assert lo - 2 < out["min"] <= out["max"] < hi + 2

    def test_exceedance_needs_threshold(self, fitted):
        with pytest.raises(CampaignError, match="threshold"):
            surface(fitted, "exceedance")

    def test_exceedance_probabilities(self, fitted):
        out = surface(fitted, "exceedance", threshold=0.0)
        assert out["threshold"] == 0.0
        assert all(0.0 <= v <= 1.0 for v in out["values"])

    def test_unknown_kind(self, fitted):
        with pytest.raises(CampaignError, match="pv, mean, or exceedance"):
            surface(fitted, "variance")

    def test_requires_fit(self):
        with pytest.raises(CampaignError) as err:
            surface(fresh_campaign(), "pv")
        assert err.value.details["code"] == "conflict"

    def test_observed_locations_have_lowest_pv(self, fitted):
        out = surface(fitted, "pv")
        by_id = dict(zip(out["ids"], out["values"]))
        observed = [by_id[i] for i in ROUND1_IDS]
        rest = [v for i, v in by_id.items() if i not in ROUND1_IDS]
        assert max(observed) < min(rest)


class TestRoundReport:
    def test_missing_round(self, scripted):
        _, state = scripted
        with pytest.raises(CampaignError) as err:
            round_report(state, 7)
        assert err.value.details["code"] == "not-found"
        with pytest.raises(CampaignError):
            round_report(state, -1)

    def test_report_carries_proposal(self, scripted):
        _, state = scripted
        report = round_report(state, 0)
        assert report["proposal"]["pid"] == "p1"
        assert report["proposal"]["status"] == "amended"
        assert report["n_locations"] == len(ROUND1_IDS)

    def test_apv_decreases_with_rounds(self, scripted):
        _, state = scripted
        apvs = [round_report(state, r)["apv"] for r in range(3)]
        assert apvs[0] > apvs[2]


class TestCampaignResponse:
    def test_derived_fields(self, scripted):
        _, state = scripted
        out = campaign_response(state)
        assert out["n_candidates"] == 100
        assert out["mode"] == "continuous"
        assert out["open_proposal"] is None
        assert len(out["design"]) == len(state.design_ids)
        assert out["design"][0] == {"id": state.design_ids[0], "batch": 0}
