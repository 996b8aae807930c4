"""
Normalized maximum likelihood and its three conditional variants.

Each variant normalizes, row by row, the plug-in likelihood its regret
subtracts:

    flavor 1   mult(k) p(j | th(k)) p(k | th(k))          th(k)   from y^M alone
    flavor 2   mult(k) p(j | th(j,k)) p(k | th(j,k))      th(j,k) pooled
    flavor 3   mult(k) p(k | th(j,k))

so CNML-i has conditional regret-i equal to log Z_i(j) at every k.
The observed factor uses the kernel only; mult(j) is constant along a row.
"""
import logging
from typing import Any

import numpy as np
from scipy.special import logsumexp

# - own - #
from cnmllab.domain.errors import ContractError, DegenerateRowError, NumericalError
from cnmllab.domain.model import SufficientModel
from cnmllab.domain.table import ConditionalTable
from cnmllab.domain.tags import RegretFlavor

logger = logging.getLogger(__name__)

# rows whose node-sum log normalizer is further than this from the per-row integral
COVERAGE_TOL = 1e-8


def plugin_log_code(flavor, model: SufficientModel) -> np.ndarray:
    """Log plug-in likelihood of the given regret flavor over (j, k), (J, K)."""
    flavor = RegretFlavor.of(flavor)
    J, K = len(model.observed), len(model.future)

    if flavor is RegretFlavor.FUTURE_ONLY:
        theta_hat = model.future_mle_vector()
        future = model.plugin_future_log_pmf(theta_hat)
        with np.errstate(divide="ignore"):
            observed = model.plugin_observed_log_kernel(theta_hat)
        code = observed + future[None, :]
    else:
        theta_hat = model.pooled_mle_table()
        with np.errstate(divide="ignore"):
            code = model.plugin_future_log_pmf(theta_hat)
            if flavor is RegretFlavor.JOINT:
                code = code + model.plugin_observed_log_kernel(theta_hat)

    code = np.broadcast_to(code, (J, K))
    if np.any(np.isnan(code)) or np.any(code == np.inf):
        raise NumericalError(f"plug-in code of flavor {flavor.value} is not finite for {model!r}")
    return np.ascontiguousarray(code)


def _row_log_normalizers(code: np.ndarray, model: SufficientModel) -> np.ndarray:
    with np.errstate(divide="ignore"):
        log_z = logsumexp(code, axis=1)
    dead = np.flatnonzero(~np.isfinite(log_z))
    if dead.size:
        j = model.observed.labels[dead[0]]
        raise DegenerateRowError(j)
    return log_z


def _check_coverage(flavor: RegretFlavor, model: SufficientModel, log_z: np.ndarray, name: str) -> None:
    """Warn about rows whose node sum misses the per-row integral of the plug-in code."""
    exact = model.plugin_row_log_normalizers(flavor)
    if exact is None:
        return
    err = np.abs(log_z - exact)
    missed = int(np.count_nonzero(err > COVERAGE_TOL))
    if missed:
        worst = int(np.argmax(err))
        logger.warning(
            "%s: the future nodes miss %d of %d rows (worst log Z error %.3e at j=%r); those rows are normalized over the nodes",
            name, missed, len(log_z), err[worst], model.observed.labels[worst],
        )


def _normalized(code: np.ndarray, model: SufficientModel, name: str, flavor: RegretFlavor) -> ConditionalTable:
    log_z = _row_log_normalizers(code, model)
    _check_coverage(flavor, model, log_z, name)
    log_q = code - log_z[:, None]
    logger.debug("%s: %dx%d table, log Z in [%.6g, %.6g]", name, *log_q.shape, log_z.min(), log_z.max())
    return ConditionalTable(log_q=log_q, rows=model.observed.labels, cols=model.future.labels, name=name)


def nml(model: SufficientModel) -> ConditionalTable:
    """NML of y^M: a single row over the empty observation."""
    if model.N != 0:
        raise ContractError(f"nml needs N = 0, got N = {model.N}; use with_sizes(N=0)")
    return _normalized(plugin_log_code(RegretFlavor.FUTURE_MARGINAL, model), model, "nml", RegretFlavor.FUTURE_MARGINAL)


def cnml1(model: SufficientModel) -> ConditionalTable:
    """Rows may put zero mass (-inf) on k whose future-only MLE makes x^N impossible."""
    return _normalized(plugin_log_code(RegretFlavor.FUTURE_ONLY, model), model, "cnml1", RegretFlavor.FUTURE_ONLY)


def cnml2(model: SufficientModel) -> ConditionalTable:
    return _normalized(plugin_log_code(RegretFlavor.JOINT, model), model, "cnml2", RegretFlavor.JOINT)


def cnml3(model: SufficientModel) -> ConditionalTable:
    return _normalized(plugin_log_code(RegretFlavor.FUTURE_MARGINAL, model), model, "cnml3", RegretFlavor.FUTURE_MARGINAL)


def cnml3_log_normalizers(model: SufficientModel) -> np.ndarray:
    """
    log Z_3(j) for every observed statistic, (J,). Quadrature families integrate
    each row on its own rather than summing over the shared future nodes.
    """
    exact = model.plugin_row_log_normalizers(RegretFlavor.FUTURE_MARGINAL)
    if exact is not None:
        return np.array(exact)
    return _row_log_normalizers(plugin_log_code(RegretFlavor.FUTURE_MARGINAL, model), model)


def cnml3_log_normalizer(model: SufficientModel, j: Any) -> float:
    """
    log sum_k mult(k) p(k | th(j,k)). This is the minimax conditional regret-3,
    attained by CNML3 at every (j, k).
    """
    row = model.statistic_index(j, model.N)
    return float(cnml3_log_normalizers(model)[row])


def regret_table(flavor, model: SufficientModel, q: ConditionalTable) -> np.ndarray:
    """
    -log q(k|j) + log plug-in(j, k) over (J, K). Cells where the plug-in
    likelihood is zero carry -inf: they are impossible under the plug-in code
    and never attain the row maximum.
    """
    q.check_aligned(model)
    code = plugin_log_code(flavor, model)
    with np.errstate(invalid="ignore"):
        out = code - q.log_q
    return np.where(np.isneginf(code), -np.inf, out)


def regret(flavor, model: SufficientModel, q: ConditionalTable, j: Any, k: Any) -> float:
    a = model.statistic_index(j, model.N)
    b = model.statistic_index(k, model.M)
    return float(regret_table(flavor, model, q)[a, b])
