from dataclasses import dataclass
from math import comb
from typing import Any, Hashable, Iterator, Tuple

import numpy as np
from scipy.special import gammaln, xlogy

# - own - #
from cnmllab.domain.errors import CapacityError, DomainError
from cnmllab.domain.model import Outcomes, SufficientModel
from cnmllab.domain.tags import Family

DEFAULT_MAX_OUTCOMES = 2_000_000


def count_vectors(n: int, d: int) -> Iterator[Tuple[int, ...]]:
    """
    Stars and bars: (c_1..c_d, c_last) with c_last = n - sum, in lexicographic
    order of the explicit counts.
    """
    def rec(prefix, remaining, slots):
        if slots == 0:
            yield prefix + (remaining,)
            return
        for c in range(remaining + 1):
            yield from rec(prefix + (c,), remaining - c, slots - 1)

    yield from rec((), n, d)


@dataclass(frozen=True)
class MultinomialModel(SufficientModel):
    """
    Categorical draws over d+1 categories reduced to count vectors.

    theta holds the d explicit probabilities; the last category carries
    1 - sum(theta). Statistics are full count vectors of length d+1; callers may
    pass only the d explicit counts.
    """
    d: int
    N: int
    M: int
    max_outcomes: int = DEFAULT_MAX_OUTCOMES
    family = Family.MULTINOMIAL

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise DomainError(f"d must be a positive integer, got {self.d!r}")
        self._check_sizes()

    def outcome_count(self, n: int) -> int:
        return comb(n + self.d, self.d)

    def _build_outcomes(self, n: int) -> Outcomes:
        count = self.outcome_count(n)
        if count > self.max_outcomes:
            raise CapacityError(f"multinomial d={self.d} n={n} enumeration", count, self.max_outcomes)
        labels = tuple(count_vectors(n, self.d))
        stats = np.array(labels, dtype=np.int64).reshape(len(labels), self.d + 1)
        log_mult = gammaln(n + 1) - gammaln(stats + 1).sum(axis=-1)
        return Outcomes(n=n, statistics=stats, log_multiplicity=log_mult, labels=labels)

    def _full(self, theta: np.ndarray) -> np.ndarray:
        last = np.clip(1.0 - theta.sum(axis=-1, keepdims=True), 0.0, 1.0)
        return np.concatenate([theta, last], axis=-1)

    def _log_kernel(self, stats, theta, n):
        return xlogy(stats, self._full(np.asarray(theta, dtype=float))).sum(axis=-1)

    def _pooled_mle(self, j_stats, k_stats):
        return (j_stats[..., : self.d] + k_stats[..., : self.d]) / float(self.N + self.M)

    def _single_mle(self, stats, n):
        return stats[..., : self.d] / float(n)

    def _in_interior(self, theta):
        return np.all(theta > 0.0, axis=-1) & (theta.sum(axis=-1) < 1.0)

    def _coerce_parameter(self, theta: Any) -> np.ndarray:
        t = np.asarray(theta, dtype=float)
        if t.shape != (self.d,):
            raise DomainError(f"multinomial parameter must have {self.d} explicit probabilities, got {theta!r}")
        return t

    def _statistic_label(self, statistic: Any, n: int) -> Hashable:
        counts = [int(c) for c in np.atleast_1d(statistic)]
        if len(counts) == self.d:
            counts.append(n - sum(counts))
        if len(counts) != self.d + 1 or any(c < 0 for c in counts) or sum(counts) != n:
            raise DomainError(f"{statistic!r} is not a count vector of size {n} over {self.d + 1} categories")
        return tuple(counts)

    def to_json(self) -> dict:
        return {"family": self.family.value, "d": self.d, "N": self.N, "M": self.M}
