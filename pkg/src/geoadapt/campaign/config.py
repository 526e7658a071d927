"""Service configuration: JSON file with environment-variable overrides."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path

from geoadapt.errors import CampaignError


@dataclass(frozen=True)
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8000
    data_dir: str = "campaigns"
    lock_timeout: float = 10.0
    static_dir: str | None = None

    @classmethod
    def load(cls, path: str | None = None, env: dict | None = None) -> "ServiceConfig":
        env = os.environ if env is None else env
        values: dict = {}
        if path is not None:
            try:
                raw = json.loads(Path(path).read_text(encoding="utf-8"))
            except OSError as exc:
                raise CampaignError(f"cannot read config {path}: {exc}") from exc
            except json.JSONDecodeError as exc:
                raise CampaignError(f"config {path} is not valid JSON: {exc}") from exc
            unknown = set(raw) - {"host", "port", "data_dir", "lock_timeout", "static_dir"}
            if unknown:
                raise CampaignError(f"unknown config fields: {sorted(unknown)}")
            values.update(raw)
        if "GEOADAPT_HOST" in env:
            values["host"] = env["GEOADAPT_HOST"]
        if "GEOADAPT_PORT" in env:
            values["port"] = int(env["GEOADAPT_PORT"])
        if "GEOADAPT_DATA_DIR" in env:
            values["data_dir"] = env["GEOADAPT_DATA_DIR"]
        if "GEOADAPT_LOCK_TIMEOUT" in env:
            values["lock_timeout"] = float(env["GEOADAPT_LOCK_TIMEOUT"])
        if "GEOADAPT_STATIC_DIR" in env:
            values["static_dir"] = env["GEOADAPT_STATIC_DIR"]
        return cls(**values)
