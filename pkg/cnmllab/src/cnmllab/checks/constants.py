"""Closed-form constants the checks compare against."""
import math
from typing import Sequence

import numpy as np
from scipy.special import xlogy

# - own - #
from cnmllab.domain.errors import DomainError
from cnmllab.families.multinomial import MultinomialModel
from .montecarlo import full_probabilities
from .special import log_minus_digamma


def gaussian_b1_value(N: int, M: int, d: int = 1) -> float:
    """Bias term of the unit-variance location model: -dM / (2(N+M)), free of theta."""
    return -d * M / (2.0 * (N + M))


def weibull_b1_value(N: int, M: int) -> float:
    """M (psi(N+M) - log(N+M)); same for every shape and for the exponential model."""
    if N + M < 1:
        raise DomainError("need N + M >= 1")
    return -M * log_minus_digamma(N + M)


def gaussian_cstar(N: int, M: int, d: int = 1) -> float:
    """log CNML3 normalizer plus bias term for the location model: d [log((N+M)/N) - M/(2(N+M))]."""
    if N < 1:
        raise DomainError("need N >= 1")
    return d * (math.log((N + M) / N) - M / (2.0 * (N + M)))


def multinomial_a4_bound(theta: Sequence[float], n: int) -> float:
    """(1/n) sum_j |(1-p_j)(1-2p_j)| / (6 p_j) over all d+1 categories."""
    p = full_probabilities(theta)
    return float(np.sum(np.abs((1 - p) * (1 - 2 * p)) / (6 * p)) / n)


def multinomial_mle_mse(theta: Sequence[float], n: int) -> float:
    """E |p_hat - p|^2 = (1/n) sum_j p_j (1 - p_j)."""
    p = full_probabilities(theta)
    return float(np.sum(p * (1 - p)) / n)


def exponential_mle_mse(k: int, theta: float) -> float:
    """E (k/S - theta)^2 = (k+2) theta^2 / ((k-1)(k-2)) for the rate MLE from k draws."""
    if int(k) != k or k < 3:
        raise DomainError("the rate MLE has finite mean square error only for k >= 3")
    return (k + 2) * theta * theta / ((k - 1) * (k - 2))


# ---------- exact enumeration over count vectors ----------

def _count_pmf(theta: Sequence[float], n: int):
    t = np.atleast_1d(np.asarray(theta, dtype=float))
    full_probabilities(t)
    model = MultinomialModel(d=t.size, N=0, M=n)
    counts = model.future.statistics.astype(float)
    return counts, np.exp(model.log_pmf_at(tuple(t), n))


def exact_likelihood_ratio(theta: Sequence[float], n: int) -> float:
    """E_theta G_n by summing over every count vector of size n."""
    p = full_probabilities(theta)
    counts, pmf = _count_pmf(theta, n)
    g = np.sum(xlogy(counts, counts / (n * p)), axis=1)
    return float(pmf @ g)


def exact_multinomial_mle_mse(theta: Sequence[float], n: int) -> float:
    p = full_probabilities(theta)
    counts, pmf = _count_pmf(theta, n)
    return float(pmf @ np.sum((counts / n - p) ** 2, axis=1))
