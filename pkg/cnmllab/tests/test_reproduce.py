import csv
import json

import numpy as np
import pytest

from cnmllab.adapters.config import reproduction_defaults
from cnmllab.adapters.writers import OutputDir
from cnmllab.checks import SuiteSettings, run_suite
from cnmllab.domain.grid import ParameterGrid
from cnmllab.domain.reports import OptimConfig
from cnmllab.experiments.reproduce import CSV_COLUMNS, run_reproduction, summarize, write_reproduction
from cnmllab.families import BinomialModel


@pytest.fixture(scope="module")
def small_runs():
    grid = ParameterGrid.from_step(0.1, 0.1, 9)
    return run_reproduction(BinomialModel(N=1, M=5), grid, [5, 20], OptimConfig())


class TestSmallReproduction:

    def test_projection_dominates_cnml3(self, small_runs):
        for run in small_runs:
            assert run.converged
            bound = run.projection.gap_nats + 1e-12
            assert np.all(run.bpcnml3.values <= run.cnml3.values - run.projection.objective_nats + bound)

    def test_cnml3_risk_is_symmetric(self, small_runs):
        for run in small_runs:
            np.testing.assert_allclose(run.cnml3.values, run.cnml3.values[::-1], atol=1e-12)

    def test_summary(self, small_runs):
        doc = summarize(small_runs)
        assert doc["converged"] is True
        assert [r["M"] for r in doc["runs"]] == [5, 20]

    def test_files(self, small_runs, tmp_path):
        out = OutputDir(tmp_path)
        write_reproduction(out, small_runs)
        with open(tmp_path / "reproduce_M5.csv", newline="", encoding="utf-8") as f:
            rows = list(csv.reader(f))
        assert rows[0] == ["theta", *CSV_COLUMNS]
        assert len(rows) == 10
        for name in ("reproduce_M20_bpcnml3_prior.csv", "reproduce_M20_lip_prior.csv", "reproduce.gp"):
            assert (tmp_path / name).exists()
        summary = json.loads((tmp_path / "reproduce_summary.json").read_text())
        assert summary["runs"][1]["lip"]["functional"] == "cmi"
        assert "reproduce_M5.csv" in (tmp_path / "reproduce.gp").read_text()


@pytest.mark.slow
class TestFullReproduction:

    def test_defaults(self):
        cfg = reproduction_defaults()
        grid = cfg.build_grid()
        runs = run_reproduction(cfg.build_model(grid), grid, cfg.sizes(), cfg.optimizer.build())
        doc = summarize(runs)
        assert doc["converged"] and doc["absdiff_decreasing"]
        for run in runs:
            assert run.projection.gap_nats <= 1e-8 and run.lip.gap_nats <= 1e-8
            assert np.all(run.bpcnml3.values <= run.cnml3.values + 1e-9)
            np.testing.assert_allclose(run.cnml3.values, run.cnml3.values[::-1], atol=1e-10)

    def test_spread_shrinks(self):
        reports = run_suite(SuiteSettings(), ["theorem1"])
        assert all(r.passed for r in reports), [(r.name, r.statistic) for r in reports if not r.passed]
