"""Round-based survey campaign management: file formats, event-sourced
state, command core, on-disk store, and the HTTP service."""

from geoadapt.campaign.core import (
    create_campaign,
    ingest_round,
    propose_batch,
    review_proposal,
    round_report,
    surface,
)
from geoadapt.campaign.state import CampaignState, Candidate, Settings, replay
from geoadapt.campaign.store import CampaignStore

__all__ = [
    "CampaignState",
    "CampaignStore",
    "Candidate",
    "Settings",
    "create_campaign",
    "ingest_round",
    "propose_batch",
    "review_proposal",
    "round_report",
    "replay",
    "surface",
]
