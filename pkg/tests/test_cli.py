import json

import pytest
from click.testing import CliRunner

from geoadapt.cli import main

from .campaign_common import (
    ROUND1_IDS,
    continuous_obs_csv,
    grid_candidates_csv,
)


@pytest.fixture()
def runner():
    return CliRunner()


def write_inputs(tmp_path):
    cand = tmp_path / "candidates.csv"
    cand.write_text(grid_candidates_csv())
    obs = tmp_path / "round1.csv"
    obs.write_text(continuous_obs_csv(ROUND1_IDS))
    return cand, obs


class TestSimulate:
    def test_tiny_run_writes_outputs(self, runner, tmp_path):
        out = tmp_path / "results"
        r = runner.invoke(
            main,
            [
                "simulate",
                "--grid-k", "12", "--n-total", "12", "--n0", "6,8",
                "--batch-sizes", "1,3", "--replicates", "2", "--seed", "0",
                "--out-dir", str(out),
            ],
        )
        assert r.exit_code == 0, r.output
        assert "NAGD" in r.output
        assert (out / "results.csv").exists()
        assert (out / "results.json").exists()
        assert (out / "summary.txt").exists()
        raw = json.loads((out / "results.json").read_text())
        assert raw["config"]["replicates"] == 2
        assert len(raw["cells"]) == 5

    def test_config_file(self, runner, tmp_path):
        cfg = tmp_path / "exp.json"
        cfg.write_text(json.dumps({
            "grid_k": 12, "n_total": 10, "n0_values": [6],
            "batch_sizes": [2], "replicates": 1, "seed": 3,
        }))
        r = runner.invoke(
            main,
            ["simulate", "--config", str(cfg), "--out-dir", str(tmp_path / "r"),
             "--format", "json"],
        )
        assert r.exit_code == 0, r.output
        raw = json.loads((tmp_path / "r" / "results.json").read_text())
        assert raw["config"]["seed"] == 3

    def test_flag_overrides_config_file(self, runner, tmp_path):
        cfg = tmp_path / "exp.json"
        cfg.write_text(json.dumps({
            "grid_k": 12, "n_total": 10, "n0_values": [6],
            "batch_sizes": [2], "replicates": 1, "seed": 3,
        }))
        r = runner.invoke(
            main,
            ["simulate", "--config", str(cfg), "--seed", "9",
             "--out-dir", str(tmp_path / "r"), "--format", "json"],
        )
        assert r.exit_code == 0, r.output
        raw = json.loads((tmp_path / "r" / "results.json").read_text())
        assert raw["config"]["seed"] == 9

    def test_bad_config_file(self, runner, tmp_path):
        cfg = tmp_path / "exp.json"
        cfg.write_text(json.dumps({"grid_k": 1}))
        r = runner.invoke(main, ["simulate", "--config", str(cfg)])
        assert r.exit_code != 0
        assert "bad config" in r.output

    def test_bad_n0_value(self, runner):
        r = runner.invoke(main, ["simulate", "--n0", "six"])
        assert r.exit_code != 0
        assert "not an integer" in r.output


class TestCampaignCommands:
    def test_full_offline_flow(self, runner, tmp_path):
        cand, obs = write_inputs(tmp_path)
        data = str(tmp_path / "store")
        base = ["campaign", "--data-dir", data]

        r = runner.invoke(main, base + [
            "create", str(cand), "--id", "demo", "--delta", "0.12", "--b", "3",
            "--min-fit-n", "5", "--fix-tau2", "0",
        ])
        assert r.exit_code == 0, r.output
        assert "created campaign demo with 100 candidates" in r.output

        r = runner.invoke(main, base + ["ingest", "demo", str(obs)])
        assert r.exit_code == 0, r.output
        report = json.loads(r.output)
        assert report["fit"]["converged"] is True

        r = runner.invoke(main, base + ["propose", "demo"])
        assert r.exit_code == 0, r.output
        proposal = json.loads(r.output)
        assert len(proposal["ids"]) == 3

        r = runner.invoke(main, base + [
            "review", "demo", proposal["pid"], "amend",
            "--exclude", proposal["ids"][0],
        ])
        assert r.exit_code == 0, r.output
        assert "amended" in r.output
        assert "design size 15" in r.output

        r = runner.invoke(main, base + ["report", "demo", "0"])
        assert r.exit_code == 0, r.output
        assert json.loads(r.output)["round"] == 0

        out_file = tmp_path / "surface.json"
        r = runner.invoke(main, base + [
            "surface", "demo", "pv", "--out", str(out_file),
        ])
        assert r.exit_code == 0, r.output
        surf = json.loads(out_file.read_text())
        assert len(surf["values"]) == 100

    def test_surface_to_stdout(self, runner, tmp_path):
        cand, obs = write_inputs(tmp_path)
        data = str(tmp_path / "store")
        base = ["campaign", "--data-dir", data]
        runner.invoke(main, base + [
            "create", str(cand), "--id", "demo", "--delta", "0.12", "--b", "3",
            "--min-fit-n", "5", "--fix-tau2", "0",
        ])
        runner.invoke(main, base + ["ingest", "demo", str(obs)])
        r = runner.invoke(main, base + ["surface", "demo", "exceedance", "--c", "0.5"])
        assert r.exit_code == 0, r.output
        assert json.loads(r.output)["threshold"] == 0.5

    def test_duplicate_create_fails_cleanly(self, runner, tmp_path):
        cand, _ = write_inputs(tmp_path)
        data = str(tmp_path / "store")
        base = ["campaign", "--data-dir", data]
        args = base + ["create", str(cand), "--id", "demo", "--delta", "0.1", "--b", "2"]
        assert runner.invoke(main, args).exit_code == 0
        r = runner.invoke(main, args)
        assert r.exit_code != 0
        assert "already exists" in r.output

    def test_unknown_campaign_fails_cleanly(self, runner, tmp_path):
        r = runner.invoke(
            main, ["campaign", "--data-dir", str(tmp_path / "s"), "report", "ghost", "0"]
        )
        assert r.exit_code != 0
        assert "no campaign" in r.output

    def test_propose_before_fit_fails_cleanly(self, runner, tmp_path):
        cand, _ = write_inputs(tmp_path)
        data = str(tmp_path / "store")
        base = ["campaign", "--data-dir", data]
        runner.invoke(main, base + [
            "create", str(cand), "--id", "demo", "--delta", "0.1", "--b", "2",
        ])
        r = runner.invoke(main, base + ["propose", "demo"])
        assert r.exit_code != 0
        assert "ingest observations first" in r.output
