"""Shared builders for campaign tests: candidate grids, observation files,
and one fully scripted multi-round campaign used by several suites."""

import math

from geoadapt.campaign.core import create_campaign, ingest_round, propose_batch, review_proposal
from geoadapt.campaign.state import Settings, apply_event

GRID_K = 10
ROUND1_IDS = ["c0", "c4", "c8", "c32", "c36", "c50", "c59", "c64", "c81", "c85", "c93", "c98"]


def grid_candidates_csv(k=GRID_K, covariates=False):
    """k x k cell-center grid on the unit square, ids c0..c(k*k-1) row-major."""
    lines = ["id,x,y,elev" if covariates else "id,x,y"]
    for i in range(k * k):
        row, col = divmod(i, k)
        x = (col + 0.5) / k
        y = (row + 0.5) / k
        if covariates:
            lines.append(f"c{i},{x},{y},{round(x + 2 * y, 4)}")
        else:
            lines.append(f"c{i},{x},{y}")
    return "\n".join(lines) + "\n"


def location_of(cid, k=GRID_K):
    i = int(cid[1:])
    row, col = divmod(i, k)
    return (col + 0.5) / k, (row + 0.5) / k


def smooth_value(x, y):
    """Deterministic non-constant surface standing in for field data."""
    return round(0.8 * math.sin(2.1 * x) + 0.5 * math.cos(1.3 * y) + 0.3 * x * y, 6)


def continuous_obs_csv(ids):
    lines = ["location_id,y_star"]
    for cid in ids:
        x, y = location_of(cid)
        lines.append(f"{cid},{smooth_value(x, y)}")
    return "\n".join(lines) + "\n"


def counts_obs_csv(rows):
    lines = ["household_id,tested,positive"]
    for cid, n, y in rows:
        lines.append(f"{cid},{n},{y}")
    return "\n".join(lines) + "\n"


def default_settings(**overrides):
    base = dict(delta=0.12, b=3, kappa=1.5, min_fit_n=5, fix_tau2=0.0)
    base.update(overrides)
    return Settings(**base)


def scripted_campaign():
    """Three-round flow: create, then per round ingest -> propose -> review.

    Round 1 review amends with two exclusions (forcing backfill); rounds 2
    and 3 accept as proposed.  Returns (events, final_state).
    """
    events = []
    event, state = create_campaign(
        "demo", "planar", default_settings(), grid_candidates_csv()
    )
    events.append(event)

    observe = list(ROUND1_IDS)
    for round_no in range(3):
        event, _report = ingest_round(state, continuous_obs_csv(observe))
        events.append(event)
        state = apply_event(state, event)

        event, proposal = propose_batch(state)
        events.append(event)
        state = apply_event(state, event)

        if round_no == 0:
            excluded = list(proposal["ids"][:2])
            event, state = review_proposal(state, proposal["pid"], "amend", excluded)
        else:
            event, state = review_proposal(state, proposal["pid"], "accept")
        events.append(event)

        joined = state.design_ids[len(state.design_ids) - state.settings.b:]
        observe = list(joined)
    return events, state
