"""File-backed campaign persistence.

Per campaign: an append-only ``events.jsonl`` (the authority) and a
``snapshot.json`` convenience copy of the folded state.  Loading always
replays the log, so a snapshot lost or stale after a crash costs nothing.
Writers serialize per campaign through an in-process lock with a timeout;
readers take the last published immutable state without locking.
"""

from __future__ import annotations

import json
import os
import threading
from contextlib import contextmanager
from pathlib import Path

from geoadapt.campaign.state import CampaignState, canonical_json, replay
from geoadapt.errors import CampaignError


class CampaignStore:
    def __init__(self, data_dir, lock_timeout: float = 10.0):
        self.data_dir = Path(data_dir)
        self.lock_timeout = float(lock_timeout)
        self._registry_lock = threading.Lock()
        self._locks: dict[str, threading.Lock] = {}
        self._states: dict[str, CampaignState] = {}
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self._load_all()

    def _load_all(self):
        for log in sorted(self.data_dir.glob("*/events.jsonl")):
            state = self._replay_file(log)
            self._states[state.id] = state
            self._refresh_snapshot(state)

    def _replay_file(self, log: Path) -> CampaignState:
        events = []
        with log.open(encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    events.append(json.loads(line))
                except json.JSONDecodeError as exc:
                    raise CampaignError(f"corrupt event log {log} line {lineno}: {exc}") from exc
        state = replay(events)
        if state.id != log.parent.name:
            raise CampaignError(
                f"event log {log} belongs to campaign {state.id!r}, not {log.parent.name!r}"
            )
        return state

    def _dir(self, campaign_id: str) -> Path:
        return self.data_dir / campaign_id

    def _lock_for(self, campaign_id: str) -> threading.Lock:
        with self._registry_lock:
            return self._locks.setdefault(campaign_id, threading.Lock())

    @contextmanager
    def lock(self, campaign_id: str):
        lk = self._lock_for(campaign_id)
        if not lk.acquire(timeout=self.lock_timeout):
            raise CampaignError(
                f"campaign {campaign_id} is busy; try again",
                details={"code": "timeout"},
            )
        try:
            yield
        finally:
            lk.release()

    def ids(self) -> tuple[str, ...]:
        return tuple(sorted(self._states))

    def exists(self, campaign_id: str) -> bool:
        return campaign_id in self._states or (self._dir(campaign_id) / "events.jsonl").exists()

    def get(self, campaign_id: str) -> CampaignState:
        state = self._states.get(campaign_id)
        if state is None:
            raise CampaignError(
                f"no campaign {campaign_id!r}", details={"code": "not-found"}
            )
        return state

    def create(self, event: dict, state: CampaignState):
        with self.lock(state.id):
            if self.exists(state.id):
                raise CampaignError(
                    f"campaign {state.id!r} already exists", details={"code": "conflict"}
                )
            cdir = self._dir(state.id)
            cdir.mkdir(parents=True, exist_ok=True)
            self._append_lines(cdir / "events.jsonl", [event])
            self._refresh_snapshot(state)
            self._states[state.id] = state

    def append(self, campaign_id: str, event: dict, new_state: CampaignState):
        """Persist one event and publish the state it leads to.  Callers hold
        the campaign lock across the read-decide-append cycle."""
        self._append_lines(self._dir(campaign_id) / "events.jsonl", [event])
        self._refresh_snapshot(new_state)
        self._states[campaign_id] = new_state

    def _append_lines(self, path: Path, events: list[dict]):
        try:
            with path.open("a", encoding="utf-8") as fh:
                for event in events:
                    fh.write(canonical_json(event) + "\n")
                fh.flush()
                os.fsync(fh.fileno())
        except OSError as exc:
            raise CampaignError(f"cannot write event log {path}: {exc}") from exc

    def _refresh_snapshot(self, state: CampaignState):
        path = self._dir(state.id) / "snapshot.json"
        tmp = path.with_suffix(".json.tmp")
        try:
            tmp.write_text(canonical_json(state.to_dict()) + "\n", encoding="utf-8")
            os.replace(tmp, path)
        except OSError as exc:
            raise CampaignError(f"cannot write snapshot {path}: {exc}") from exc
