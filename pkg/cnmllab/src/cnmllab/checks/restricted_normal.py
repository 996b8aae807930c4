"""
Unit-variance normal with mean restricted to [-a, a]: the MLE is the sample
mean clipped to the interval, and the CNML3 normalizer depends on the
observed sum u.
"""
import math
from typing import NamedTuple, Optional, Tuple

import numpy as np
from scipy.special import ndtr

# - own - #
from cnmllab.domain.errors import ContractError, DomainError
from .montecarlo import DEFAULT_SAMPLES, _estimate


class RestrictedNormalizer(NamedTuple):
    value: float
    deviation_bound: float  # bound on |log Z(u) - log Z(0)|


def _phi(x):
    return np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)


def _check(N: int, M: int, a: float):
    if N < 1 or M < 1:
        raise DomainError("need N >= 1 and M >= 1")
    if not a > 0:
        raise DomainError("clip bound a must be positive")


def restricted_normal_cnml3_normalizer(N: int, M: int, a: float, u: float) -> RestrictedNormalizer:
    """Z(u) = 1 + (M/N) [Phi((aN - u)/sqrt M) - Phi((-aN - u)/sqrt M)]."""
    _check(N, M, a)
    s = math.sqrt(M)
    value = 1.0 + (M / N) * float(ndtr((a * N - u) / s) - ndtr((-a * N - u) / s))
    return RestrictedNormalizer(value=value, deviation_bound=a * N * abs(u) / M + u * u / (2.0 * M))


def restricted_normal_a4_tail(k: int, a: float, b: float, delta: float, theta: float) -> float:
    """
    int_c^inf phi(u) (u^2 + k (a^2 + theta^2)) du with c = sqrt(k) delta, in closed
    form c phi(c) + (1 + k (a^2 + theta^2)) Q(c). Bounds |E G_k - 1/2| for the
    clipped-mean model.
    """
    if not a > b > 0:
        raise DomainError("need a > b > 0")
    if not 0 < delta < a - b:
        raise DomainError("need 0 < delta < a - b")
    if abs(theta) > b:
        raise DomainError("need |theta| <= b")
    c = math.sqrt(k) * delta
    q = float(ndtr(-c))
    return c * float(_phi(c)) + (1.0 + k * (a * a + theta * theta)) * q


def restricted_normal_mle_mse_bound(k: int, a: float, b: float) -> float:
    """Upper bound on E (th(z^k) - theta)^2 uniformly over |theta| <= b."""
    if not a > b > 0:
        raise DomainError("need a > b > 0")
    return 8.0 * a * a / (math.sqrt(k) * (a - b)) * math.exp(-k * (a - b) ** 2 / 2.0) + 1.0 / k


def mc_restricted_normal_normalizer(N: int, M: int, a: float, u: float, samples: int = DEFAULT_SAMPLES,
                                    rng: Optional[np.random.Generator] = None) -> Tuple[float, float]:
    """
    Importance-sampling estimate of int p(y^M | th(x^N, y^M)) dy^M.

    Only the scaled future mean v = sqrt(M) ybar moves the MLE; the orthogonal
    directions integrate to one. The proposal is a wide normal around the peak
    of the unclipped integrand.
    """
    _check(N, M, a)
    if rng is None:
        raise ContractError("needs an explicit generator")
    s_m = math.sqrt(M)
    center = s_m * u / N
    scale = 3.0 * (N + M) / N + s_m * a

    def draw(g, b):
        v = g.normal(center, scale, size=b)
        th = np.clip((u + s_m * v) / (N + M), -a, a)
        proposal = _phi((v - center) / scale) / scale
        return _phi(v - s_m * th) / proposal

    return _estimate(draw, samples, rng)
