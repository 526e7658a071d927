"""CSV formats for campaign inputs.

Candidates: header ``id,x,y`` plus optional covariate columns; one row per
enumerated household.  Observations: either household test counts with
header ``household_id,tested,positive`` or continuous working responses
with header ``location_id,y_star``.  Coordinates are planar, in whatever
projected units the campaign declared; no reprojection happens anywhere.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

from geoadapt.errors import CampaignError
from geoadapt.geometry import Location

MODE_COUNTS = "counts"
MODE_CONTINUOUS = "continuous"

_COUNTS_HEADER = ["household_id", "tested", "positive"]
_CONTINUOUS_HEADER = ["location_id", "y_star"]


@dataclass(frozen=True)
class CandidateRow:
    id: str
    location: Location
    covariates: tuple[float, ...] = ()


@dataclass(frozen=True)
class ObservationBatch:
    """Parsed observation file, aggregated to one row per location id."""

    mode: str
    ids: tuple[str, ...]
    # counts mode: (tested, positive) per id; continuous mode: (y_star,) per id
    values: tuple[tuple[float, ...], ...]


def _rows(text: str) -> list[list[str]]:
    rows = [row for row in csv.reader(io.StringIO(text)) if row and any(c.strip() for c in row)]
    if not rows:
        raise CampaignError("file is empty")
    return rows


def _bad(problems: list[str], kind: str):
    if problems:
        raise CampaignError(
            f"{kind} file has {len(problems)} bad row(s)", details={"rows": problems}
        )


def parse_candidates(text: str) -> tuple[CandidateRow, ...]:
    rows = _rows(text)
    header = [c.strip() for c in rows[0]]
    if header[:3] != ["id", "x", "y"]:
        raise CampaignError(f"candidate header must start with id,x,y; got {','.join(header)}")
    if len(rows) < 2:
        raise CampaignError("candidate file has no data rows")

    out: list[CandidateRow] = []
    seen: set[str] = set()
    problems: list[str] = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            problems.append(f"line {lineno}: expected {len(header)} fields, got {len(row)}")
            continue
        cid = row[0].strip()
        if not cid:
            problems.append(f"line {lineno}: empty id")
            continue
        if cid in seen:
            problems.append(f"line {lineno}: duplicate id {cid!r}")
            continue
        try:
            x, y = float(row[1]), float(row[2])
            cov = tuple(float(v) for v in row[3:])
        except ValueError:
            problems.append(f"line {lineno}: non-numeric coordinate or covariate")
            continue
        if not all(map(math.isfinite, (x, y, *cov))):
            problems.append(f"line {lineno}: non-finite value")
            continue
        seen.add(cid)
        out.append(CandidateRow(id=cid, location=Location(x, y), covariates=cov))
    _bad(problems, "candidate")
    return tuple(out)


def parse_observations(text: str) -> ObservationBatch:
    rows = _rows(text)
    header = [c.strip() for c in rows[0]]
    if header == _COUNTS_HEADER:
        return _parse_counts(rows[1:])
    if header == _CONTINUOUS_HEADER:
        return _parse_continuous(rows[1:])
    raise CampaignError(
        "observation header must be household_id,tested,positive or location_id,y_star; "
        f"got {','.join(header)}"
    )


def _parse_counts(rows: list[list[str]]) -> ObservationBatch:
    if not rows:
        raise CampaignError("observation file has no data rows")
    # Repeated ids within one file are partial uploads of the same household
    # and aggregate by summation.
    order: list[str] = []
    tested: dict[str, int] = {}
    positive: dict[str, int] = {}
    problems: list[str] = []
    for lineno, row in enumerate(rows, start=2):
        if len(row) != 3:
            problems.append(f"line {lineno}: expected 3 fields, got {len(row)}")
            continue
        hid = row[0].strip()
        if not hid:
            problems.append(f"line {lineno}: empty household_id")
            continue
        try:
            n, y = int(row[1]), int(row[2])
        except ValueError:
            problems.append(f"line {lineno}: tested and positive must be integers")
            continue
        if n < 0 or y < 0 or y > n:
            problems.append(f"line {lineno}: need 0 <= positive <= tested, got {y}/{n}")
            continue
        if hid not in tested:
            order.append(hid)
            tested[hid] = 0
            positive[hid] = 0
        tested[hid] += n
        positive[hid] += y
    _bad(problems, "observation")
    zero = [hid for hid in order if tested[hid] == 0]
    if zero:
        raise CampaignError(
            f"{len(zero)} household(s) have zero tested individuals",
            details={"ids": zero},
        )
    return ObservationBatch(
        mode=MODE_COUNTS,
        ids=tuple(order),
        values=tuple((float(tested[h]), float(positive[h])) for h in order),
    )


def _parse_continuous(rows: list[list[str]]) -> ObservationBatch:
    if not rows:
        raise CampaignError("observation file has no data rows")
    order: list[str] = []
    value: dict[str, float] = {}
    problems: list[str] = []
    for lineno, row in enumerate(rows, start=2):
        if len(row) != 2:
            problems.append(f"line {lineno}: expected 2 fields, got {len(row)}")
            continue
        lid = row[0].strip()
        if not lid:
            problems.append(f"line {lineno}: empty location_id")
            continue
        if lid in value:
            problems.append(f"line {lineno}: duplicate location_id {lid!r}")
            continue
        try:
            v = float(row[1])
        except ValueError:
            problems.append(f"line {lineno}: y_star must be numeric")
            continue
        if not math.isfinite(v):
            problems.append(f"line {lineno}: non-finite y_star")
            continue
        order.append(lid)
        value[lid] = v
    _bad(problems, "observation")
    return ObservationBatch(
        mode=MODE_CONTINUOUS,
        ids=tuple(order),
        values=tuple((value[l],) for l in order),
    )
