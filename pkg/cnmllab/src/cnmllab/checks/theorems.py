import logging
from typing import List, Sequence

import numpy as np

# - own - #
from cnmllab.domain.errors import ContractError, DomainError, QuadratureError
from cnmllab.domain.grid import GridPrior, ParameterGrid
from cnmllab.domain.model import SufficientModel
from cnmllab.domain.reports import CheckReport
from cnmllab.families.gaussian_location import GaussianLocationModel
from cnmllab.measures.info_measures import conditional_mutual_information, projection_divergence
from cnmllab.predictors.cnml import cnml3
from .constants import gaussian_b1_value, gaussian_cstar

logger = logging.getLogger(__name__)

QUADRATURE_TOLERANCE = 1e-6
SPREAD_FLOOR = 1e-10


def projection_sums(model: SufficientModel, priors: Sequence[GridPrior]) -> np.ndarray:
    """D(pi, CNML3) + CMI(pi) for each prior."""
    q = cnml3(model)
    return np.array([projection_divergence(p, q, model) + conditional_mutual_information(p, model) for p in priors])


def _same_grid(grid: ParameterGrid, priors: Sequence[GridPrior]):
    if not priors:
        raise DomainError("need at least one prior")
    if any(p.grid != grid for p in priors):
        raise ContractError("every prior must live on the check grid")


def theorem1_spread(model: SufficientModel, grid: ParameterGrid, priors: Sequence[GridPrior],
                    M_list: Sequence[int], name: str = "theorem1.spread") -> List[CheckReport]:
    """
    Spread max - min of D(pi, CNML3) + CMI(pi) over the prior sample, one report
    per M. A report passes when its spread is strictly below the previous one.
    """
    _same_grid(grid, priors)
    if not M_list or any(b <= a for a, b in zip(M_list, M_list[1:])):
        raise DomainError(f"M_list must be non-empty and strictly ascending, got {list(M_list)}")

    reports, prev = [], None
    for M in M_list:
        s = projection_sums(model.with_sizes(M=M), priors)
        spread = float(s.max() - s.min())
        logger.info("%s M=%d: spread %.6e", name, M, spread)
        reports.append(CheckReport(
            name=f"{name}.M{M}",
            statistic=spread,
            reference=prev,
            tolerance=0.0,
            passed=prev is None or spread < prev,
            detail=f"S in [{s.min():.12g}, {s.max():.12g}] over {len(priors)} priors",
        ))
        prev = spread
    return reports


def gaussian_theorem2_check(grid: ParameterGrid, N: int, M: int, priors: Sequence[GridPrior],
                            order: int = 64, sigma2: float = 1.0,
                            tolerance: float = QUADRATURE_TOLERANCE, name: str = "theorem2.constancy") -> CheckReport:
    """
    D + CMI for the gaussian location model is the same for every prior. Runs
    the quadrature at order and 2*order; their disagreement is the error estimate.
    """
    _same_grid(grid, priors)
    if grid.is_vector:
        raise DomainError("gaussian location grids are scalar")

    def sums(n_nodes: int) -> np.ndarray:
        model = GaussianLocationModel(N=N, M=M, sigma2=sigma2, order=n_nodes, center=grid.midpoint())
        return projection_sums(model, priors)

    coarse, fine = sums(order), sums(2 * order)
    quad_err = float(np.max(np.abs(coarse - fine)))
    if quad_err > tolerance:
        raise QuadratureError(quad_err, tolerance)

    spread = float(fine.max() - fine.min())
    measured = float(fine.mean())
    b1 = gaussian_b1_value(N, M)
    detail = (
        f"C* measured {measured:.12g} (closed form {gaussian_cstar(N, M):.12g}); "
        f"log normalizer {measured - b1:.12g}; bias {b1:.12g}; quadrature error {quad_err:.3e}"
    )
    return CheckReport.within(name, spread, 0.0, max(10.0 * quad_err, SPREAD_FLOOR), detail=detail)


def measured_cstar(grid: ParameterGrid, N: int, M: int, priors: Sequence[GridPrior],
                   order: int = 64, sigma2: float = 1.0) -> float:
    model = GaussianLocationModel(N=N, M=M, sigma2=sigma2, order=order, center=grid.midpoint())
    return float(projection_sums(model, priors).mean())
