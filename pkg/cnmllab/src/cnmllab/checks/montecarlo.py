"""
Seeded Monte Carlo estimators for the closed-form constants.

Every estimator draws in fixed-size batches from a Philox generator, so a
(seed, samples) pair reproduces the estimate bit for bit. Standard errors
come from a batched Welford accumulator.
"""
from __future__ import annotations
from dataclasses import dataclass
import enum
import hashlib
import math
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy.special import xlogy

# - own - #
from cnmllab.domain.errors import ContractError, DomainError

DEFAULT_SAMPLES = 1_000_000
BATCH = 100_000
MIN_SAMPLES = 1000


class McFamily(enum.Enum):
    EXPONENTIAL = "exponential"
    WEIBULL = "weibull"
    GAUSSIAN = "gaussian"
    RESTRICTED_NORMAL = "restricted_normal"
    MULTINOMIAL = "multinomial"


def check_seed(name: str, global_seed: int) -> int:
    """64-bit seed of one named check, derived from the global seed."""
    digest = hashlib.blake2b(f"{int(global_seed)}:{name}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def check_rng(name: str, global_seed: int) -> Tuple[np.random.Generator, int]:
    seed = check_seed(name, global_seed)
    return np.random.Generator(np.random.Philox(seed)), seed


@dataclass
class RunningMoments:
    count: int = 0
    mean: float = 0.0
    m2: float = 0.0

    def update(self, batch: np.ndarray) -> None:
        batch = np.asarray(batch, dtype=float).reshape(-1)
        n_b = batch.size
        if n_b == 0:
            return
        mean_b = float(batch.mean())
        m2_b = float(np.sum((batch - mean_b) ** 2))
        n = self.count + n_b
        delta = mean_b - self.mean
        self.mean += delta * n_b / n
        self.m2 += m2_b + delta * delta * self.count * n_b / n
        self.count = n

    @property
    def variance(self) -> float:
        return self.m2 / (self.count - 1) if self.count > 1 else float("nan")

    @property
    def standard_error(self) -> float:
        return math.sqrt(self.variance / self.count) if self.count > 1 else float("nan")


def _estimate(draw: Callable[[np.random.Generator, int], np.ndarray], samples: int,
              rng: np.random.Generator, batch: int = BATCH) -> Tuple[float, float]:
    if int(samples) != samples or samples < MIN_SAMPLES:
        raise DomainError(f"need at least {MIN_SAMPLES} samples, got {samples!r}")
    moments = RunningMoments()
    left = int(samples)
    while left > 0:
        b = min(batch, left)
        moments.update(draw(rng, b))
        left -= b
    return moments.mean, moments.standard_error


def _gaussian_means(rng, b, theta, n, d):
    if n == 0:
        return np.zeros((b, d))
    return rng.normal(theta, 1.0 / math.sqrt(n), size=(b, d))


def mc_bias_term(family, theta: float, N: int, M: int, samples: int = DEFAULT_SAMPLES,
                 rng: Optional[np.random.Generator] = None, *, shape: Optional[float] = None,
                 clip: Optional[float] = None, d: int = 1) -> Tuple[float, float]:
    """
    Estimate and standard error of E_theta log p(y^M | theta) / p(y^M | th(x^N, y^M)).

    exponential: rate theta. weibull: scale theta, known shape. gaussian: unit
    variance, d independent coordinates. restricted_normal: the pooled mean
    clipped to [-clip, clip].
    """
    family = McFamily(family)
    if rng is None:
        raise ContractError("mc_bias_term needs an explicit generator")
    if N < 0 or M < 1:
        raise DomainError("need N >= 0 and M >= 1")

    if family is McFamily.GAUSSIAN or family is McFamily.RESTRICTED_NORMAL:
        if family is McFamily.RESTRICTED_NORMAL:
            if clip is None or not clip > 0:
                raise DomainError("restricted normal needs a positive clip bound")
            d = 1

        def draw(g, b):
            xbar = _gaussian_means(g, b, theta, N, d)
            ybar = g.normal(theta, 1.0 / math.sqrt(M), size=(b, d))
            th = (N * xbar + M * ybar) / (N + M)
            if clip is not None:
                th = np.clip(th, -clip, clip)
            return -0.5 * M * np.sum((ybar - theta) ** 2 - (ybar - th) ** 2, axis=1)

    elif family is McFamily.EXPONENTIAL:
        if not theta > 0:
            raise DomainError("exponential rate must be positive")

        def draw(g, b):
            s_x = g.exponential(1.0 / theta, size=(b, N)).sum(axis=1) if N else np.zeros(b)
            s_y = g.exponential(1.0 / theta, size=(b, M)).sum(axis=1)
            th = (N + M) / (s_x + s_y)
            return M * math.log(theta) - theta * s_y - M * np.log(th) + th * s_y

    elif family is McFamily.WEIBULL:
        if shape is None or not shape > 0 or not theta > 0:
            raise DomainError("weibull needs a positive shape and scale")

        def draw(g, b):
            t_x = ((theta * g.weibull(shape, size=(b, N))) ** shape).sum(axis=1) if N else np.zeros(b)
            t_y = ((theta * g.weibull(shape, size=(b, M))) ** shape).sum(axis=1)
            th_k = (t_x + t_y) / (N + M)  # th^shape
            return -M * shape * math.log(theta) - t_y / theta ** shape + M * np.log(th_k) + t_y / th_k

    else:
        raise ContractError(f"no bias-term sampler for {family.value}")

    return _estimate(draw, samples, rng)


def mc_likelihood_ratio(family, theta, k: int, samples: int = DEFAULT_SAMPLES,
                        rng: Optional[np.random.Generator] = None, *,
                        clip: Optional[float] = None) -> Tuple[float, float]:
    """Estimate and standard error of E_theta log p(z^k | th(z^k)) / p(z^k | theta)."""
    family = McFamily(family)
    if rng is None:
        raise ContractError("mc_likelihood_ratio needs an explicit generator")
    if k < 1:
        raise DomainError("k must be >= 1")

    if family is McFamily.MULTINOMIAL:
        p = full_probabilities(theta)

        def draw(g, b):
            c = g.multinomial(k, p, size=b)
            return np.sum(xlogy(c, c / (k * p)), axis=1)

    elif family is McFamily.RESTRICTED_NORMAL:
        if clip is None or not clip > 0:
            raise DomainError("restricted normal needs a positive clip bound")
        theta = float(theta)

        def draw(g, b):
            zbar = g.normal(theta, 1.0 / math.sqrt(k), size=b)
            th = np.clip(zbar, -clip, clip)
            return 0.5 * k * ((zbar - theta) ** 2 - (zbar - th) ** 2)

    else:
        raise ContractError(f"no likelihood-ratio sampler for {family.value}")

    return _estimate(draw, samples, rng)


def mc_restricted_normal_mse(k: int, a: float, theta: float, samples: int = DEFAULT_SAMPLES,
                             rng: Optional[np.random.Generator] = None) -> Tuple[float, float]:
    """E (th(z^k) - theta)^2 for the mean clipped to [-a, a]."""
    if rng is None:
        raise ContractError("needs an explicit generator")

    def draw(g, b):
        return (np.clip(g.normal(theta, 1.0 / math.sqrt(k), size=b), -a, a) - theta) ** 2

    return _estimate(draw, samples, rng)


def mc_exponential_mle_mse(k: int, theta: float, samples: int = DEFAULT_SAMPLES,
                           rng: Optional[np.random.Generator] = None) -> Tuple[float, float]:
    """E (k / S - theta)^2 with S a sum of k exponentials of rate theta."""
    if rng is None:
        raise ContractError("needs an explicit generator")

    def draw(g, b):
        s = g.gamma(k, 1.0 / theta, size=b)
        return (k / s - theta) ** 2

    return _estimate(draw, samples, rng)


def full_probabilities(theta: Sequence[float]) -> np.ndarray:
    """Explicit probabilities plus the implicit last one; must be interior."""
    t = np.atleast_1d(np.asarray(theta, dtype=float))
    p = np.append(t, 1.0 - t.sum())
    if np.any(p <= 0) or np.any(p >= 1):
        raise DomainError(f"{theta!r} is not an interior probability vector")
    return p
