import logging

import numpy as np
from scipy.special import logsumexp

# - own - #
from cnmllab.domain.errors import DegeneratePriorError
from cnmllab.domain.grid import GridPrior
from cnmllab.domain.model import SufficientModel
from cnmllab.domain.table import ConditionalTable

logger = logging.getLogger(__name__)


def log_weights(weights: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(weights)


def mixture_log_joint(log_w: np.ndarray, log_pmf_obs: np.ndarray, log_pmf_fut: np.ndarray) -> np.ndarray:
    """
    log p_pi(j, k) = log sum_i w_i p(j | theta_i) p(k | theta_i), (J, K).

    log_pmf_obs is (I, J), log_pmf_fut is (I, K); zero weights enter as -inf.
    """
    terms = log_w[:, None, None] + log_pmf_obs[:, :, None] + log_pmf_fut[:, None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        return logsumexp(terms, axis=0)


def bayes_predictive(prior: GridPrior, model: SufficientModel, name: str = "bayes") -> ConditionalTable:
    """p_pi(k | j) = p_pi(j, k) / p_pi(j) with future multiplicities folded in."""
    a_obs = model.log_pmf_matrix(prior.grid, model.N)
    a_fut = model.log_pmf_matrix(prior.grid, model.M)
    joint = mixture_log_joint(log_weights(prior.weights), a_obs, a_fut)
    with np.errstate(divide="ignore"):
        marginal = logsumexp(joint, axis=1)
    dead = np.flatnonzero(~np.isfinite(marginal))
    if dead.size:
        raise DegeneratePriorError(model.observed.labels[dead[0]])
    logger.debug("%s: %d atoms, %d in support", name, len(prior.grid), prior.support().size)
    return ConditionalTable(
        log_q=joint - marginal[:, None],
        rows=model.observed.labels,
        cols=model.future.labels,
        name=name,
    )
