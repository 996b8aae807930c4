from __future__ import annotations
from abc import ABC, abstractmethod
import dataclasses
from dataclasses import dataclass, field
from threading import RLock
from typing import Any, Dict, Hashable, Optional, Tuple, final

import numpy as np
from cachetools import LRUCache, cached

# - own - #
from .errors import DomainError
from .grid import ParameterGrid
from .tags import Family


@dataclass(frozen=True, eq=False)
class Outcomes:
    """
    Range of a sufficient statistic for one sample size n.

    statistics is (S,) for scalar statistics and (S, d+1) for count vectors;
    labels holds the same statistics as hashable python values, in the same order.
    """
    n: int
    statistics: np.ndarray = field(repr=False)
    log_multiplicity: np.ndarray = field(repr=False)
    labels: Tuple[Hashable, ...] = field(repr=False)
    _index: Dict[Hashable, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        assert len(self.labels) == self.statistics.shape[0] == self.log_multiplicity.shape[0], "ragged outcome arrays"
        self.statistics.setflags(write=False)
        self.log_multiplicity.setflags(write=False)
        object.__setattr__(self, "_index", {lab: i for i, lab in enumerate(self.labels)})

    def __len__(self) -> int:
        return len(self.labels)

    def index(self, label: Hashable) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise DomainError(f"statistic {label!r} is not in the range for n={self.n}") from None

    def pairs(self):
        """[(statistic, log-multiplicity), ...] in enumeration order."""
        return list(zip(self.labels, (float(v) for v in self.log_multiplicity)))


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


class SufficientModel(ABC):
    """
    A finite (N, M) experiment reduced to sufficient statistics.

    x^N is observed, y^M is to be predicted, both iid from p(.|theta). Everything
    downstream works on the statistic j of x^N and k of y^M. A statistic of
    sample size n carries a log multiplicity (log multinomial coefficient, or
    a quadrature log weight) and a log kernel (the theta dependent factor), and
    log_pmf = log_multiplicity + log_kernel sums to one over the range.

    Concrete families are frozen dataclasses, hence hashable, so the enumerations
    and pmf matrices below are memoized per model.
    """
    family: Family
    N: int
    M: int

    def _check_sizes(self):
        if int(self.N) != self.N or self.N < 0:
            raise DomainError(f"N must be a non-negative integer, got {self.N!r}")
        if int(self.M) != self.M or self.M < 1:
            raise DomainError(f"M must be a positive integer, got {self.M!r}")

    # ---------- hooks ----------

    @abstractmethod
    def _build_outcomes(self, n: int) -> Outcomes:
        raise NotImplementedError("Subclasses must implement this method")

    @abstractmethod
    def _log_kernel(self, stats: np.ndarray, theta: np.ndarray, n: int) -> np.ndarray:
        """
        Log of the theta dependent factor, broadcast over leading axes.
        theta may sit on the boundary (plug-in MLEs); 0*log 0 counts as 0.
        """
        raise NotImplementedError("Subclasses must implement this method")

    @abstractmethod
    def _pooled_mle(self, j_stats: np.ndarray, k_stats: np.ndarray) -> np.ndarray:
        raise NotImplementedError("Subclasses must implement this method")

    @abstractmethod
    def _single_mle(self, stats: np.ndarray, n: int) -> np.ndarray:
        raise NotImplementedError("Subclasses must implement this method")

    @abstractmethod
    def _in_interior(self, theta: np.ndarray) -> np.ndarray:
        """Boolean per parameter (leading axes of theta)."""
        raise NotImplementedError("Subclasses must implement this method")

    @abstractmethod
    def _coerce_parameter(self, theta: Any) -> np.ndarray:
        raise NotImplementedError("Subclasses must implement this method")

    @abstractmethod
    def _statistic_label(self, statistic: Any, n: int) -> Hashable:
        raise NotImplementedError("Subclasses must implement this method")

    @abstractmethod
    def to_json(self) -> dict:
        raise NotImplementedError("Subclasses must implement this method")

    @staticmethod
    def _as_parameter(theta_row: np.ndarray):
        """Back from array to the public parameter form (float or tuple)."""
        theta_row = np.asarray(theta_row, dtype=float)
        if theta_row.ndim == 0:
            return float(theta_row)
        return tuple(float(v) for v in theta_row)

    # ---------- template methods ----------

    @final
    @cached(cache=LRUCache(maxsize=256), lock=RLock())
    def enumerate_outcomes(self, n: int) -> Outcomes:
        if int(n) != n or n < 0:
            raise DomainError(f"sample size must be a non-negative integer, got {n!r}")
        return self._build_outcomes(int(n))

    @final
    @property
    def observed(self) -> Outcomes:
        return self.enumerate_outcomes(self.N)

    @final
    @property
    def future(self) -> Outcomes:
        return self.enumerate_outcomes(self.M)

    @final
    def parameter(self, theta: Any) -> np.ndarray:
        """Validated interior parameter as an array."""
        t = self._coerce_parameter(theta)
        if not bool(np.all(self._in_interior(t))):
            raise DomainError(f"parameter {theta!r} is not in the interior of the {self.family.value} parameter space")
        return t

    @final
    def check_grid(self, grid: ParameterGrid) -> np.ndarray:
        values = grid.values
        first = self._coerce_parameter(grid.atoms[0])
        if values.shape[1:] != first.shape:
            raise DomainError(f"grid atoms have shape {values.shape[1:]}, model expects {first.shape}")
        inside = self._in_interior(values)
        if not bool(np.all(inside)):
            bad = [grid.atoms[i] for i in np.flatnonzero(~inside)[:3]]
            raise DomainError(f"grid atoms outside the parameter interior: {bad}")
        return values

    @final
    def statistic_index(self, statistic: Any, n: int) -> int:
        """Position of a statistic in the enumeration for sample size n."""
        return self.enumerate_outcomes(n).index(self._statistic_label(statistic, n))

    @final
    def log_kernel(self, statistic: Any, theta: Any, n: int) -> float:
        t = self.parameter(theta)
        outcomes = self.enumerate_outcomes(n)
        i = self.statistic_index(statistic, n)
        return float(self._log_kernel(outcomes.statistics[i], t, n))

    @final
    def log_pmf(self, statistic: Any, theta: Any, n: int) -> float:
        t = self.parameter(theta)
        outcomes = self.enumerate_outcomes(n)
        i = self.statistic_index(statistic, n)
        return float(outcomes.log_multiplicity[i] + self._log_kernel(outcomes.statistics[i], t, n))

    @final
    def log_pmf_at(self, theta: Any, n: int) -> np.ndarray:
        """log p(s | theta) for every statistic s of sample size n, (S,)."""
        t = self.parameter(theta)
        outcomes = self.enumerate_outcomes(n)
        return outcomes.log_multiplicity + self._log_kernel(outcomes.statistics, t, n)

    @final
    @cached(cache=LRUCache(maxsize=64), lock=RLock())
    def log_pmf_matrix(self, grid: ParameterGrid, n: int) -> np.ndarray:
        """log p(s | theta_i) over grid atoms i and statistics s, (I, S), read only."""
        thetas = self.check_grid(grid)
        outcomes = self.enumerate_outcomes(n)
        stats = np.expand_dims(outcomes.statistics, 0)
        kernel = self._log_kernel(stats, np.expand_dims(thetas, 1), n)
        return _readonly(np.ascontiguousarray(outcomes.log_multiplicity[None, :] + kernel))

    @final
    def mle(self, j: Any, k: Any):
        js = self.observed.statistics[self.statistic_index(j, self.N)]
        ks = self.future.statistics[self.statistic_index(k, self.M)]
        return self._as_parameter(self._pooled_mle(js, ks))

    @final
    def mle_single(self, statistic: Any, n: int):
        if n < 1:
            raise DomainError("single-block MLE needs n >= 1")
        outcomes = self.enumerate_outcomes(n)
        s = outcomes.statistics[self.statistic_index(statistic, n)]
        return self._as_parameter(self._single_mle(s, n))

    # ---------- plug-in tables used by the predictors ----------

    @final
    @cached(cache=LRUCache(maxsize=64), lock=RLock())
    def pooled_mle_table(self) -> np.ndarray:
        """theta_hat(j, k) over (J, K[, d])."""
        js = np.expand_dims(self.observed.statistics, 1)
        ks = np.expand_dims(self.future.statistics, 0)
        return _readonly(np.ascontiguousarray(self._pooled_mle(js, ks)))

    @final
    @cached(cache=LRUCache(maxsize=64), lock=RLock())
    def future_mle_vector(self) -> np.ndarray:
        """theta_hat(k) from y^M alone, (K[, d])."""
        return _readonly(np.ascontiguousarray(self._single_mle(self.future.statistics, self.M)))

    @final
    def plugin_future_log_pmf(self, theta_hat: np.ndarray) -> np.ndarray:
        """log multiplicity(k) + log kernel(k | theta_hat[..., k]) for the future block."""
        fut = self.future
        return fut.log_multiplicity + self._log_kernel(fut.statistics, theta_hat, self.M)

    @final
    def plugin_observed_log_kernel(self, theta_hat: np.ndarray) -> np.ndarray:
        """log kernel(j | theta_hat[j, k]) for the observed block, (J, K)."""
        js = np.expand_dims(self.observed.statistics, 1)
        return self._log_kernel(js, theta_hat, self.N)

    def plugin_row_log_normalizers(self, flavor) -> Optional[np.ndarray]:
        """
        log of the plug-in code integrated over the whole future range, per
        observed statistic, (J,). None when the enumeration is exact, so that
        summing over the future statistics already is that integral.
        """
        return None

    # ---------- derived models ----------

    @final
    def with_sizes(self, N: int = None, M: int = None) -> "SufficientModel":
        return dataclasses.replace(self, N=self.N if N is None else N, M=self.M if M is None else M)
