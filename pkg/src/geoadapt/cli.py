"""Command-line entry points.

``simulate`` runs the paired design-strategy experiment; ``campaign ...``
mirrors every HTTP endpoint against a local data directory for offline use;
``serve`` starts the HTTP service.
"""

from __future__ import annotations

import functools
import json
import sys
from dataclasses import replace
from pathlib import Path

import click

from geoadapt.campaign import core
from geoadapt.campaign.config import ServiceConfig
from geoadapt.campaign.state import Settings, apply_event
from geoadapt.campaign.store import CampaignStore
from geoadapt.errors import GeoadaptError
from geoadapt.experiment import ExperimentConfig, emit_results, run_experiment


def _fail_on_error(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except GeoadaptError as exc:
            raise click.ClickException(str(exc)) from exc

    return wrapper


def _int_list(ctx, param, value):
    if not value:
        return None
    out = []
    for chunk in value:
        for piece in str(chunk).split(","):
            piece = piece.strip()
            if piece:
                try:
                    out.append(int(piece))
                except ValueError:
                    raise click.BadParameter(f"{piece!r} is not an integer")
    return tuple(out)


@click.group()
def main():
    """Adaptive geostatistical survey design tools."""


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None, help="JSON file mirroring the experiment config fields.")
@click.option("--grid-k", type=int, default=None, help="Grid cells per side.")
@click.option("--n-total", type=int, default=None, help="Final design size.")
@click.option("--n0", multiple=True, callback=_int_list, help="Initial design size(s); repeatable or comma-separated.")
@click.option("--batch-sizes", multiple=True, callback=_int_list, help="Adaptive batch size(s); repeatable or comma-separated.")
@click.option("--delta", type=float, default=None, help="Minimum spacing between design points.")
@click.option("--replicates", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--refit/--no-refit", default=None, help="Re-estimate parameters before each batch.")
@click.option("--out-dir", type=click.Path(file_okay=False), default="results", show_default=True)
@click.option("--format", "fmt", type=click.Choice(["table", "csv", "json", "all"]), default="all", show_default=True)
@_fail_on_error
def simulate(config_path, grid_k, n_total, n0, batch_sizes, delta, replicates, seed, refit, out_dir, fmt):
    """Run the paired comparison of adaptive and non-adaptive designs."""
    if config_path is not None:
        try:
            raw = json.loads(Path(config_path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise click.ClickException(f"config {config_path} is not valid JSON: {exc}")
        try:
            config = ExperimentConfig.from_dict(raw)
        except (ValueError, KeyError, TypeError) as exc:
            raise click.ClickException(f"bad config {config_path}: {exc}")
    else:
        config = ExperimentConfig()

    overrides = {
        "grid_k": grid_k,
        "n_total": n_total,
        "n0_values": n0,
        "batch_sizes": batch_sizes,
        "delta": delta,
        "replicates": replicates,
        "seed": seed,
        "refit": refit,
    }
    overrides = {k: v for k, v in overrides.items() if v is not None}
    try:
        config = replace(config, **overrides)
    except ValueError as exc:
        raise click.ClickException(str(exc))

    def progress(done: int, total: int):
        click.echo(f"replicate {done}/{total}", err=True)

    result = run_experiment(config, progress=progress)
    paths = emit_results(result, out_dir, format=fmt)
    for c in result.cells:
        click.echo(
            f"{c.strategy:>5} n0={c.n0:<3} b={c.b:<3} mean APV {c.mean_apv:.4f} "
            f"(se {c.se_apv:.4f}, {len(c.apv)} replicates)"
        )
    for p in paths:
        click.echo(f"wrote {p}")


@main.group()
@click.option("--data-dir", envvar="GEOADAPT_DATA_DIR", default="campaigns", show_default=True, help="Campaign storage directory.")
@click.pass_context
def campaign(ctx, data_dir):
    """Manage survey campaigns offline (same operations as the HTTP API)."""
    ctx.obj = data_dir


def _store(ctx) -> CampaignStore:
    return CampaignStore(ctx.obj)


def _echo_json(obj):
    click.echo(json.dumps(obj, indent=2, sort_keys=True))


@campaign.command()
@click.argument("candidates_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--id", "campaign_id", required=True, help="New campaign id.")
@click.option("--crs", default="planar", show_default=True, help="Projected CRS label; coordinates are treated as planar.")
@click.option("--delta", type=float, required=True, help="Minimum spacing, in coordinate units.")
@click.option("--b", type=int, required=True, help="Default batch size.")
@click.option("--kappa", type=float, default=1.5, show_default=True)
@click.option("--nugget-mode", type=click.Choice(["constant", "count-scaled"]), default="constant", show_default=True)
@click.option("--min-fit-n", type=int, default=20, show_default=True)
@click.option("--fix-tau2", type=float, default=None)
@click.pass_context
@_fail_on_error
def create(ctx, candidates_file, campaign_id, crs, delta, b, kappa, nugget_mode, min_fit_n, fix_tau2):
    """Create a campaign from a candidate CSV (header id,x,y[,covariates...])."""
    settings = Settings(
        delta=delta, b=b, kappa=kappa, nugget_mode=nugget_mode,
        min_fit_n=min_fit_n, fix_tau2=fix_tau2,
    )
    text = Path(candidates_file).read_text(encoding="utf-8")
    event, state = core.create_campaign(campaign_id, crs, settings, text)
    _store(ctx).create(event, state)
    click.echo(f"created campaign {state.id} with {len(state.candidates)} candidates")


@campaign.command()
@click.argument("campaign_id")
@click.argument("observations_file", type=click.Path(exists=True, dir_okay=False))
@click.pass_context
@_fail_on_error
def ingest(ctx, campaign_id, observations_file):
    """Ingest one round of observations and refit the model."""
    store = _store(ctx)
    text = Path(observations_file).read_text(encoding="utf-8")
    with store.lock(campaign_id):
        state = store.get(campaign_id)
        event, report = core.ingest_round(state, text)
        store.append(campaign_id, event, apply_event(state, event))
    _echo_json(report)


@campaign.command()
@click.argument("campaign_id")
@click.option("--b", type=int, default=None, help="Batch size; defaults to the campaign setting.")
@click.option("--delta", type=float, default=None, help="Minimum spacing; defaults to the campaign setting.")
@click.pass_context
@_fail_on_error
def propose(ctx, campaign_id, b, delta):
    """Propose the next adaptive batch."""
    store = _store(ctx)
    with store.lock(campaign_id):
        state = store.get(campaign_id)
        event, proposal = core.propose_batch(state, b=b, delta=delta)
        store.append(campaign_id, event, apply_event(state, event))
    _echo_json(proposal)


@campaign.command()
@click.argument("campaign_id")
@click.argument("pid")
@click.argument("action", type=click.Choice(["accept", "reject", "amend"]))
@click.option("--exclude", multiple=True, help="Candidate id to exclude (amend only); repeatable.")
@click.pass_context
@_fail_on_error
def review(ctx, campaign_id, pid, action, exclude):
    """Accept, reject, or amend an open proposal."""
    store = _store(ctx)
    with store.lock(campaign_id):
        state = store.get(campaign_id)
        event, new_state = core.review_proposal(state, pid, action, list(exclude))
        store.append(campaign_id, event, new_state)
    proposal = next(p for p in new_state.proposals if p.pid == pid)
    click.echo(
        f"proposal {pid}: {proposal.status}; design size {len(new_state.design_ids)}"
    )


@campaign.command()
@click.argument("campaign_id")
@click.argument("what", type=click.Choice(["pv", "mean", "exceedance"]))
@click.option("--c", "threshold", type=float, default=None, help="Exceedance threshold (linear-predictor scale).")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write the JSON here instead of stdout.")
@click.pass_context
@_fail_on_error
def surface(ctx, campaign_id, what, threshold, out):
    """Per-candidate prediction surface from the latest fit."""
    state = _store(ctx).get(campaign_id)
    result = core.surface(state, what, threshold=threshold)
    if out is None:
        _echo_json(result)
    else:
        Path(out).write_text(json.dumps(result, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        click.echo(f"wrote {out}")


@campaign.command()
@click.argument("campaign_id")
@click.argument("round_index", type=int)
@click.pass_context
@_fail_on_error
def report(ctx, campaign_id, round_index):
    """Report for one ingested round."""
    state = _store(ctx).get(campaign_id)
    _echo_json(core.round_report(state, round_index))


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None, help="Service config JSON.")
@click.option("--host", default=None)
@click.option("--port", type=int, default=None)
@click.option("--data-dir", default=None)
@click.option("--static-dir", default=None, help="Directory of built UI assets to serve at /.")
@_fail_on_error
def serve(config_path, host, port, data_dir, static_dir):
    """Run the campaign HTTP service."""
    import uvicorn

    from geoadapt.campaign.service import create_app

    config = ServiceConfig.load(config_path)
    overrides = {
        "host": host,
        "port": port,
        "data_dir": data_dir,
        "static_dir": static_dir,
    }
    config = replace(config, **{k: v for k, v in overrides.items() if v is not None})
    click.echo(f"serving campaigns from {config.data_dir} on {config.host}:{config.port}", err=True)
    uvicorn.run(create_app(config), host=config.host, port=config.port)


if __name__ == "__main__":
    sys.exit(main())
