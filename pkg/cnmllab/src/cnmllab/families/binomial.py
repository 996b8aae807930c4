from dataclasses import dataclass
from typing import Any, Hashable

import numpy as np
from scipy.special import gammaln, xlog1py, xlogy

# - own - #
from cnmllab.domain.errors import DomainError
from cnmllab.domain.model import Outcomes, SufficientModel
from cnmllab.domain.tags import Family


@dataclass(frozen=True)
class BinomialModel(SufficientModel):
    """Bernoulli trials reduced to the success count; theta is the success probability."""
    N: int
    M: int
    family = Family.BINOMIAL

    def __post_init__(self):
        self._check_sizes()

    def _build_outcomes(self, n: int) -> Outcomes:
        k = np.arange(n + 1)
        log_mult = gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)
        return Outcomes(n=n, statistics=k, log_multiplicity=log_mult, labels=tuple(int(v) for v in k))

    def _log_kernel(self, stats, theta, n):
        return xlogy(stats, theta) + xlog1py(n - stats, -theta)

    def _pooled_mle(self, j_stats, k_stats):
        return (j_stats + k_stats) / float(self.N + self.M)

    def _single_mle(self, stats, n):
        return stats / float(n)

    def _in_interior(self, theta):
        return (theta > 0.0) & (theta < 1.0)

    def _coerce_parameter(self, theta: Any) -> np.ndarray:
        t = np.asarray(theta, dtype=float)
        if t.ndim != 0:
            raise DomainError(f"binomial parameter must be a scalar, got {theta!r}")
        return t

    def _statistic_label(self, statistic: Any, n: int) -> Hashable:
        s = float(statistic)
        if s != int(s):
            raise DomainError(f"binomial statistic must be an integer count, got {statistic!r}")
        return int(s)

    def to_json(self) -> dict:
        return {"family": self.family.value, "N": self.N, "M": self.M}
