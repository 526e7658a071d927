"""Paired simulation experiment comparing design strategies.

Each replicate simulates one field realization on a square grid and evaluates
every strategy against it: a non-adaptive inhibitory design of the full size,
and adaptive designs grown from smaller inhibitory seeds with several batch
sizes.  Pairing all strategies on the same realization (and the same initial
design across batch sizes) removes most replicate-to-replicate noise from the
comparisons.  The figure of merit is the average prediction variance over the
whole grid.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from geoadapt.design import (
    Design,
    RefitPerBatch,
    inhibitory_design,
    run_adaptive_design,
)
from geoadapt.errors import GeoadaptError, InferenceError, InfeasibleDesignError, SingularCovarianceError
from geoadapt.field import FieldSimulator
from geoadapt.geometry import Region, locations_to_xy, regular_grid
from geoadapt.kriging import pv_surface_from_cov
from geoadapt.model import MaternParams, ModelSpec, covariance_matrix_xy
from geoadapt.rng import rng_from

STRATEGY_ADAPTIVE = "AGD"
STRATEGY_NON_ADAPTIVE = "NAGD"


def default_model() -> ModelSpec:
    return ModelSpec.intercept_only(0.0, sigma2=1.0, phi=0.05, kappa=1.5, tau2=0.0)


@dataclass(frozen=True)
class ExperimentConfig:
    """Settings for one paired experiment; defaults reproduce the reference
    comparison (unit square, 64 x 64 grid, 100 points, delta = 0.03)."""

    grid_k: int = 64
    model: ModelSpec = field(default_factory=default_model)
    n_total: int = 100
    n0_values: tuple[int, ...] = (30, 40, 50, 60, 70, 80, 90)
    batch_sizes: tuple[int, ...] = (1, 5, 10)
    delta: float = 0.03
    replicates: int = 100
    seed: int = 0
    refit: bool = False

    def __post_init__(self):
        if self.grid_k < 2:
            raise ValueError("grid_k must be >= 2")
        if self.n_total < 1 or self.n_total > self.grid_k**2:
            raise ValueError("n_total must be between 1 and the grid size")
        if not self.n0_values:
            raise ValueError("n0_values must be non-empty")
        if any(n0 < 1 or n0 > self.n_total for n0 in self.n0_values):
            raise ValueError("every n0 must satisfy 1 <= n0 <= n_total")
        if not self.batch_sizes or any(b < 1 for b in self.batch_sizes):
            raise ValueError("batch sizes must be positive")
        if self.delta < 0 or not math.isfinite(self.delta):
            raise ValueError("delta must be finite and >= 0")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")

    def to_dict(self) -> dict:
        m = self.model
        return {
            "grid_k": self.grid_k,
            "model": {
                "beta": list(m.beta),
                "matern": {
                    "sigma2": m.matern.sigma2,
                    "phi": m.matern.phi,
                    "kappa": m.matern.kappa,
                },
                "tau2": m.tau2,
            },
            "n_total": self.n_total,
            "n0_values": list(self.n0_values),
            "batch_sizes": list(self.batch_sizes),
            "delta": self.delta,
            "replicates": self.replicates,
            "seed": self.seed,
            "refit": self.refit,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        allowed = {
            "grid_k",
            "model",
            "n_total",
            "n0_values",
            "batch_sizes",
            "delta",
            "replicates",
            "seed",
            "refit",
        }
        unknown = set(raw) - allowed
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        kwargs = dict(raw)
        if "model" in kwargs:
            m = kwargs["model"]
            extra = set(m) - {"beta", "matern", "tau2"}
            if extra:
                raise ValueError(f"unknown model fields: {sorted(extra)}")
            kwargs["model"] = ModelSpec(
                beta=tuple(float(b) for b in m.get("beta", (0.0,))),
                matern=MaternParams(**m["matern"]),
                tau2=float(m.get("tau2", 0.0)),
            )
        for key in ("n0_values", "batch_sizes"):
            if key in kwargs:
                kwargs[key] = tuple(int(v) for v in kwargs[key])
        return cls(**kwargs)


@dataclass(frozen=True)
class CellResult:
    """APV across replicates for one (strategy, n0, b) combination.

    b is 0 for the non-adaptive strategy, whose n0 equals the full size.
    """

    strategy: str
    n0: int
    b: int
    apv: tuple[float, ...]

    @property
    def mean_apv(self) -> float:
        return float(np.mean(self.apv))

    @property
    def se_apv(self) -> float:
        """Standard error of the mean across replicates (0 if fewer than 2)."""
        if len(self.apv) < 2:
            return 0.0
        return float(np.std(self.apv, ddof=1) / math.sqrt(len(self.apv)))


@dataclass(frozen=True)
class ExperimentResult:
    config: ExperimentConfig
    cells: tuple[CellResult, ...]
    failures: tuple[tuple[int, str], ...] = ()

    def cell(self, strategy: str, n0: int | None = None, b: int | None = None) -> CellResult:
        for c in self.cells:
            if c.strategy == strategy and (n0 is None or c.n0 == n0) and (b is None or c.b == b):
                return c
        raise KeyError(f"no cell for ({strategy}, n0={n0}, b={b})")

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "cells": [
                {
                    "strategy": c.strategy,
                    "n0": c.n0,
                    "b": c.b,
                    "mean_apv": c.mean_apv,
                    "se_apv": c.se_apv,
                    "apv": list(c.apv),
                }
                for c in self.cells
            ],
            "failures": [[r, msg] for r, msg in self.failures],
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentResult":
        return cls(
            config=ExperimentConfig.from_dict(raw["config"]),
            cells=tuple(
                CellResult(
                    strategy=c["strategy"],
                    n0=int(c["n0"]),
                    b=int(c["b"]),
                    apv=tuple(float(v) for v in c["apv"]),
                )
                for c in raw["cells"]
            ),
            failures=tuple((int(r), str(msg)) for r, msg in raw.get("failures", [])),
        )


def _cell_keys(config: ExperimentConfig) -> list[tuple[str, int, int]]:
    keys = [(STRATEGY_NON_ADAPTIVE, config.n_total, 0)]
    for n0 in config.n0_values:
        for b in config.batch_sizes:
            keys.append((STRATEGY_ADAPTIVE, n0, b))
    return keys


def run_experiment(
    config: ExperimentConfig,
    progress: Callable[[int, int], None] | None = None,
) -> ExperimentResult:
    """Run the paired comparison; deterministic given config.seed.

    Replicates draw independent seed streams, so aggregation does not depend
    on execution order.  A failed replicate is dropped whole (pairing stays
    intact) with a warning; more than 5% failures aborts the experiment.
    """
    model = config.model
    grid = regular_grid(Region.unit_square(), config.grid_k)
    grid_xy = locations_to_xy(grid)
    region = Region.from_points(grid)

    # One field covariance and one simulator factorization serve every
    # replicate; per-design work only gathers sub-blocks.
    cov = covariance_matrix_xy(grid_xy, model, nugget=0.0)
    simulator = FieldSimulator(grid, model)
    trend = float(model.beta[0])

    def apv_of(design: Design) -> float:
        pv = pv_surface_from_cov(
            cov,
            data_idx=np.asarray(design.indices, dtype=np.intp),
            model=model,
            data_xy=design.xy(),
        )
        return float(pv.mean())

    keys = _cell_keys(config)
    values: dict[tuple[str, int, int], list[float]] = {k: [] for k in keys}
    failures: list[tuple[int, str]] = []

    for r in range(config.replicates):
        try:
            cells = _run_replicate(config, r, grid, region, cov, simulator, trend, apv_of)
        except (InfeasibleDesignError, InferenceError, SingularCovarianceError) as exc:
            failures.append((r, str(exc)))
            warnings.warn(f"replicate {r} failed and was excluded: {exc}", UserWarning, stacklevel=2)
            if len(failures) > 0.05 * config.replicates:
                raise GeoadaptError(
                    f"{len(failures)} of {config.replicates} replicates failed; aborting"
                ) from exc
            continue
        for key, apv_value in cells.items():
            values[key].append(apv_value)
        if progress is not None:
            progress(r + 1, config.replicates)

    cell_results = tuple(
        CellResult(strategy=s, n0=n0, b=b, apv=tuple(values[(s, n0, b)])) for s, n0, b in keys
    )
    return ExperimentResult(config=config, cells=cell_results, failures=tuple(failures))


def _run_replicate(
    config: ExperimentConfig,
    r: int,
    grid,
    region: Region,
    cov: np.ndarray,
    simulator: FieldSimulator,
    trend: float,
    apv_of: Callable[[Design], float],
) -> dict[tuple[str, int, int], float]:
    out: dict[tuple[str, int, int], float] = {}

    y_star = trend + simulator.draw_values(config.seed, "field", r)
    value_at = dict(zip(grid, y_star))

    nagd = inhibitory_design(
        region, config.n_total, config.delta, seed=rng_from(config.seed, "design-nagd", r)
    )
    out[(STRATEGY_NON_ADAPTIVE, config.n_total, 0)] = apv_of(nagd)

    for n0 in config.n0_values:
        initial = inhibitory_design(
            region, n0, config.delta, seed=rng_from(config.seed, "design-initial", r, n0)
        )
        if config.refit:
            model_source: ModelSpec | RefitPerBatch = RefitPerBatch(kappa=config.model.matern.kappa)

            def observe(pts):
                return np.asarray([value_at[p] for p in pts])

        else:
            model_source = config.model
            observe = None
        for b in config.batch_sizes:
            final = run_adaptive_design(
                initial,
                model_source,
                config.n_total,
                b,
                config.delta,
                region,
                observe=observe,
                cov=cov,
            )
            out[(STRATEGY_ADAPTIVE, n0, b)] = apv_of(final)
    return out


def emit_results(result: ExperimentResult, out_dir, format: str = "all") -> tuple[Path, ...]:
    """Write results under out_dir; returns the paths written.

    format selects "csv" (results.csv), "json" (results.json), "table"
    (summary.txt), or "all".
    """
    if format not in ("csv", "json", "table", "all"):
        raise ValueError(f"unknown format: {format!r}")
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise GeoadaptError(f"cannot create output directory {out_dir}: {exc}") from exc

    written: list[Path] = []
    if format in ("csv", "all"):
        written.append(_write_csv(result, out_dir / "results.csv"))
    if format in ("json", "all"):
        written.append(_write_json(result, out_dir / "results.json"))
    if format in ("table", "all"):
        written.append(_write_summary(result, out_dir / "summary.txt"))
    return tuple(written)


def _write(path: Path, text: str) -> Path:
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise GeoadaptError(f"cannot write {path}: {exc}") from exc
    return path


def _write_csv(result: ExperimentResult, path: Path) -> Path:
    rows = [["strategy", "n0", "b", "mean_apv", "se_apv", "replicates"]]
    for c in result.cells:
        rows.append([c.strategy, str(c.n0), str(c.b), repr(c.mean_apv), repr(c.se_apv), str(len(c.apv))])
    try:
        with path.open("w", newline="", encoding="utf-8") as fh:
            csv.writer(fh).writerows(rows)
    except OSError as exc:
        raise GeoadaptError(f"cannot write {path}: {exc}") from exc
    return path


def _write_json(result: ExperimentResult, path: Path) -> Path:
    return _write(path, json.dumps(result.to_dict(), indent=2) + "\n")


def _write_summary(result: ExperimentResult, path: Path) -> Path:
    cfg = result.config
    lines = [
        "Average prediction variance by design strategy",
        "",
        f"grid {cfg.grid_k}x{cfg.grid_k}, n_total={cfg.n_total}, delta={cfg.delta}, "
        f"replicates={cfg.replicates}, seed={cfg.seed}, refit={cfg.refit}",
        f"model: beta={list(cfg.model.beta)}, sigma2={cfg.model.matern.sigma2}, "
        f"phi={cfg.model.matern.phi}, kappa={cfg.model.matern.kappa}, tau2={cfg.model.tau2}",
        "",
        f"{'strategy':>8} {'n0':>4} {'b':>4} {'mean_apv':>10} {'se_apv':>8} {'reps':>5}",
    ]
    for c in result.cells:
        lines.append(
            f"{c.strategy:>8} {c.n0:>4} {c.b:>4} {c.mean_apv:>10.4f} {c.se_apv:>8.4f} {len(c.apv):>5}"
        )
    if result.failures:
        lines.append("")
        lines.append(f"excluded replicates: {len(result.failures)}")
        for r, msg in result.failures:
            lines.append(f"  replicate {r}: {msg}")
    lines.append("")
    return _write(path, "\n".join(lines))
