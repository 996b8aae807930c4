"""
Information functionals over a SufficientModel, all in nats.

Every quantity is an exact finite sum over sufficient statistics (quadrature
nodes for the gaussian location model). Risks of predictors that miss mass
are +inf, never NaN.
"""
from __future__ import annotations
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import logging
from typing import Any

import numpy as np

# - own - #
from cnmllab.domain.grid import GridPrior, ParameterGrid
from cnmllab.domain.model import SufficientModel
from cnmllab.domain.table import ConditionalTable, RiskCurve
from cnmllab.domain.tags import RegretFlavor
from cnmllab.predictors.bayes import bayes_predictive
from cnmllab.predictors.cnml import cnml3_log_normalizers, plugin_log_code

logger = logging.getLogger(__name__)

CURVE_CHUNK = 32


def expected_log_ratio(a_obs: np.ndarray, a_fut: np.ndarray, log_table: np.ndarray) -> np.ndarray:
    """
    sum_j p(j|theta_i) sum_k p(k|theta_i) [log p(k|theta_i) - log_table(j, k)] per atom, (I,).

    a_obs (I, J) and a_fut (I, K) are log pmfs; log_table is (J, K). A -inf cell
    of log_table that carries mass under some theta_i makes that atom +inf.
    """
    with np.errstate(invalid="ignore", over="ignore"):
        p_obs = np.exp(a_obs)
        p_fut = np.exp(a_fut)
        neg_entropy = np.sum(np.where(p_fut > 0, p_fut * a_fut, 0.0), axis=1)
        missing = np.isneginf(log_table)
        cross = p_fut @ np.where(missing, 0.0, log_table).T
        inner = neg_entropy[:, None] - cross
        if missing.any():
            inner = np.where(p_fut @ missing.T.astype(float) > 0, np.inf, inner)
        return np.sum(np.where(p_obs > 0, p_obs * inner, 0.0), axis=1)


def _weighted_sum(weights: np.ndarray, values: np.ndarray) -> float:
    """sum_i w_i v_i over the support of w; 0 * inf counts as 0."""
    support = weights > 0
    return float(np.sum(weights[support] * values[support]))


def kl_risk(theta: Any, q: ConditionalTable, model: SufficientModel) -> float:
    q.check_aligned(model)
    a_obs = model.log_pmf_at(theta, model.N)[None, :]
    a_fut = model.log_pmf_at(theta, model.M)[None, :]
    return float(expected_log_ratio(a_obs, a_fut, q.log_q)[0])


def atom_risks(q: ConditionalTable, model: SufficientModel, grid: ParameterGrid) -> np.ndarray:
    """KL risk of q at every grid atom, (I,)."""
    q.check_aligned(model)
    return expected_log_ratio(model.log_pmf_matrix(grid, model.N), model.log_pmf_matrix(grid, model.M), q.log_q)


def risk_curve(q: ConditionalTable, model: SufficientModel, grid: ParameterGrid, *, max_workers: int = 4) -> RiskCurve:
    q.check_aligned(model)
    a_obs = model.log_pmf_matrix(grid, model.N)
    a_fut = model.log_pmf_matrix(grid, model.M)
    starts = list(range(0, len(grid), CURVE_CHUNK))

    def _one(s):
        return expected_log_ratio(a_obs[s:s + CURVE_CHUNK], a_fut[s:s + CURVE_CHUNK], q.log_q)

    with ThreadPoolExecutor(max_workers=max_workers) as ex:
        parts = list(ex.map(_one, starts))
    return RiskCurve(grid=grid, values=np.concatenate(parts), name=q.name)


def bayes_atom_risks(prior: GridPrior, model: SufficientModel) -> np.ndarray:
    """KL risk of the Bayes predictive of prior at every atom. Also the CMI gradient."""
    table = bayes_predictive(prior, model)
    return expected_log_ratio(
        model.log_pmf_matrix(prior.grid, model.N), model.log_pmf_matrix(prior.grid, model.M), table.log_q
    )


def conditional_mutual_information(prior: GridPrior, model: SufficientModel) -> float:
    """Bayes risk of the Bayes predictive; mutual information between theta and y^M given x^N."""
    return _weighted_sum(prior.weights, bayes_atom_risks(prior, model))


def mutual_information(prior: GridPrior, model: SufficientModel) -> float:
    """I(theta; Y^M) from the mixture of future pmfs. The observed block is ignored."""
    a_fut = model.log_pmf_matrix(prior.grid, model.M)
    p_fut = np.exp(a_fut)
    with np.errstate(divide="ignore"):
        log_mix = np.log(prior.weights @ p_fut)
    per_atom = expected_log_ratio(np.zeros((len(prior.grid), 1)), a_fut, log_mix[None, :])
    return _weighted_sum(prior.weights, per_atom)


def projection_divergence(prior: GridPrior, q: ConditionalTable, model: SufficientModel) -> float:
    """
    KL from the joint p_pi(j, k) to q(k|j) p_pi(j), written per atom as
    risk(theta_i, q) - risk(theta_i, p_pi) and averaged under pi.
    """
    q.check_aligned(model)
    rho = atom_risks(q, model, prior.grid)
    r = bayes_atom_risks(prior, model)
    with np.errstate(invalid="ignore"):
        d = np.where(np.isinf(rho), np.inf, rho - r)
    return _weighted_sum(prior.weights, d)


# ---------- CNML3 decomposition ----------

def _bias_rows(model: SufficientModel, a_obs: np.ndarray, a_fut: np.ndarray) -> np.ndarray:
    return expected_log_ratio(a_obs, a_fut, plugin_log_code(RegretFlavor.FUTURE_MARGINAL, model))


def bias_term(model: SufficientModel, theta: Any) -> float:
    """E_theta log p(y^M | theta) / p(y^M | th(x^N, y^M)); -M/(2(N+M)) for the gaussian location model."""
    a_obs = model.log_pmf_at(theta, model.N)[None, :]
    a_fut = model.log_pmf_at(theta, model.M)[None, :]
    return float(_bias_rows(model, a_obs, a_fut)[0])


@dataclass(frozen=True)
class Cnml3Decomposition:
    bias: float
    normalizer: float
    neg_cmi: float

    @property
    def total(self) -> float:
        return self.bias + self.normalizer + self.neg_cmi


def cnml3_decomposition(prior: GridPrior, model: SufficientModel) -> Cnml3Decomposition:
    """
    D(pi, CNML3) = sum pi E log p/p(th) + sum pi E log Z(x) - CMI(pi), each term
    computed on its own.
    """
    a_obs = model.log_pmf_matrix(prior.grid, model.N)
    a_fut = model.log_pmf_matrix(prior.grid, model.M)
    bias = _weighted_sum(prior.weights, _bias_rows(model, a_obs, a_fut))
    log_z = cnml3_log_normalizers(model)
    normalizer = _weighted_sum(prior.weights, np.exp(a_obs) @ log_z)
    return Cnml3Decomposition(
        bias=bias,
        normalizer=normalizer,
        neg_cmi=-conditional_mutual_information(prior, model),
    )
