"""
KL risk of CNML3 against its Bayes projection (BPCNML3) and the Bayes
predictive of the latent information prior (BPDLIP), one run per M.
"""
from __future__ import annotations
from dataclasses import dataclass, field
import logging
import time
from typing import List, Sequence

import numpy as np
from tqdm import tqdm

# - own - #
from cnmllab.adapters.writers import OutputDir, gnuplot_script
from cnmllab.domain.grid import GridPrior, ParameterGrid
from cnmllab.domain.model import SufficientModel
from cnmllab.domain.reports import OptimConfig, OptimReport, json_number
from cnmllab.domain.table import RiskCurve
from cnmllab.measures.info_measures import risk_curve
from cnmllab.optim.simplex import bayes_project, fit_lip
from cnmllab.predictors.bayes import bayes_predictive
from cnmllab.predictors.cnml import cnml3

logger = logging.getLogger(__name__)

CSV_COLUMNS = ("risk_cnml3", "risk_bpcnml3", "risk_bpdlip", "absdiff_bp_lip")


@dataclass(frozen=True)
class ReproductionRun:
    M: int
    cnml3: RiskCurve
    bpcnml3: RiskCurve
    bpdlip: RiskCurve
    projection: OptimReport
    lip: OptimReport
    projection_prior: GridPrior = field(repr=False)
    lip_prior: GridPrior = field(repr=False)
    seconds: float = 0.0

    @property
    def absdiff(self) -> np.ndarray:
        return np.abs(self.bpcnml3.values - self.bpdlip.values)

    @property
    def max_absdiff(self) -> float:
        return float(self.absdiff.max())

    @property
    def converged(self) -> bool:
        return self.projection.converged and self.lip.converged

    def rows(self):
        for i, theta in enumerate(self.cnml3.grid.atoms):
            yield theta, self.cnml3.values[i], self.bpcnml3.values[i], self.bpdlip.values[i], self.absdiff[i]

    def summary(self) -> dict:
        return {
            "M": self.M,
            "max_absdiff_bp_lip": json_number(self.max_absdiff),
            "max_excess_bpcnml3_over_cnml3": json_number(float(np.max(self.bpcnml3.values - self.cnml3.values))),
            "projection": self.projection.to_json(),
            "lip": self.lip.to_json(),
            "seconds": self.seconds,
        }


def reproduce_one(model: SufficientModel, grid: ParameterGrid, cfg: OptimConfig = OptimConfig()) -> ReproductionRun:
    t0 = time.perf_counter()
    q = cnml3(model)
    proj_prior, proj_report = bayes_project(q, model, grid, cfg)
    lip_prior, lip_report = fit_lip(model, grid, cfg)

    run = ReproductionRun(
        M=model.M,
        cnml3=risk_curve(q, model, grid),
        bpcnml3=risk_curve(bayes_predictive(proj_prior, model, "bpcnml3"), model, grid),
        bpdlip=risk_curve(bayes_predictive(lip_prior, model, "bpdlip"), model, grid),
        projection=proj_report,
        lip=lip_report,
        projection_prior=proj_prior,
        lip_prior=lip_prior,
        seconds=time.perf_counter() - t0,
    )
    logger.info("M=%d: max |BPCNML3 - BPDLIP| = %.6e in %.1fs", run.M, run.max_absdiff, run.seconds)
    return run


def run_reproduction(model: SufficientModel, grid: ParameterGrid, M_list: Sequence[int],
                     cfg: OptimConfig = OptimConfig(), *, progress: bool = False) -> List[ReproductionRun]:
    runs: List[ReproductionRun] = []
    for M in tqdm(M_list, desc="reproduce", unit="M", disable=not progress):
        runs.append(reproduce_one(model.with_sizes(M=M), grid, cfg))
    return runs


def summarize(runs: Sequence[ReproductionRun]) -> dict:
    diffs = [r.max_absdiff for r in runs]
    return {
        "runs": [r.summary() for r in runs],
        "absdiff_decreasing": all(b < a for a, b in zip(diffs, diffs[1:])),
        "converged": all(r.converged for r in runs),
        "seconds": sum(r.seconds for r in runs),
    }


def write_reproduction(out: OutputDir, runs: Sequence[ReproductionRun]) -> dict:
    names = []
    for run in runs:
        name = f"reproduce_M{run.M}.csv"
        out.write_csv(name, ("theta",) + CSV_COLUMNS, run.rows())
        out.write_prior(f"reproduce_M{run.M}_bpcnml3_prior.csv", run.projection_prior)
        out.write_prior(f"reproduce_M{run.M}_lip_prior.csv", run.lip_prior)
        names.append(name)
    summary = summarize(runs)
    out.write_json("reproduce_summary.json", summary)
    out.write_text("reproduce.gp", gnuplot_script(names, CSV_COLUMNS))
    return summary
