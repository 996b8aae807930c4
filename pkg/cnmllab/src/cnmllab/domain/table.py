from __future__ import annotations
from dataclasses import dataclass, field
from typing import Hashable, Tuple

import numpy as np
from scipy.special import logsumexp

# - own - #
from .csvfmt import csv_text, fmt_number, fmt_point
from .errors import ContractError, DomainError
from .grid import ParameterGrid

ROW_SUM_TOL = 1e-10
LOG_PROB_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class ConditionalTable:
    """
    log q(k | j) over observed statistics j (rows) and future statistics k
    (columns), future multiplicities folded in. Zero mass is stored as -inf.
    """
    log_q: np.ndarray = field(repr=False)
    rows: Tuple[Hashable, ...] = field(repr=False)
    cols: Tuple[Hashable, ...] = field(repr=False)
    name: str = ""

    def __post_init__(self):
        log_q = np.array(self.log_q, dtype=float)
        if log_q.shape != (len(self.rows), len(self.cols)):
            raise ContractError(f"table shape {log_q.shape} does not match {len(self.rows)} rows x {len(self.cols)} cols")
        if np.any(np.isnan(log_q)):
            raise DomainError(f"table {self.name!r} contains NaN")
        if np.any(log_q > LOG_PROB_SLACK):
            raise DomainError(f"table {self.name!r} has log-probabilities above 0")
        sums = np.exp(logsumexp(log_q, axis=1))
        bad = np.flatnonzero(np.abs(sums - 1.0) > ROW_SUM_TOL)
        if bad.size:
            raise DomainError(f"table {self.name!r} row j={self.rows[bad[0]]!r} sums to {sums[bad[0]]!r}")
        log_q.setflags(write=False)
        object.__setattr__(self, "log_q", log_q)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.log_q.shape

    @property
    def q(self) -> np.ndarray:
        return np.exp(self.log_q)

    def prob(self, j: Hashable, k: Hashable) -> float:
        return float(np.exp(self.log_q[self.rows.index(j), self.cols.index(k)]))

    def check_aligned(self, model) -> None:
        """Raise ContractError unless rows/cols are the model's observed/future ranges."""
        if self.rows != model.observed.labels or self.cols != model.future.labels:
            raise ContractError(
                f"table {self.name!r} ({len(self.rows)}x{len(self.cols)}) is not aligned with "
                f"{type(model).__name__}(N={model.N}, M={model.M})"
            )

    def to_csv(self) -> str:
        def rows():
            for a, j in enumerate(self.rows):
                for b, k in enumerate(self.cols):
                    lq = float(self.log_q[a, b])
                    yield fmt_point(j), fmt_point(k), fmt_number(lq), fmt_number(float(np.exp(lq)))
        return csv_text(("j", "k", "log_q", "q"), rows())

    def __repr__(self):
        return f"<ConditionalTable {self.name} {self.shape[0]}x{self.shape[1]}>"


@dataclass(frozen=True, eq=False)
class RiskCurve:
    """KL risk (nats) per grid atom; +inf marks a predictor that misses mass."""
    grid: ParameterGrid
    values: np.ndarray = field(repr=False)
    name: str = ""

    def __post_init__(self):
        v = np.array(self.values, dtype=float).reshape(-1)
        if v.shape[0] != len(self.grid):
            raise ContractError("risk curve length differs from grid length")
        if np.any(np.isnan(v)):
            raise DomainError(f"risk curve {self.name!r} contains NaN")
        if np.any(v < -1e-10):
            raise DomainError(f"risk curve {self.name!r} has negative risk {v.min()!r}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def max_abs_diff(self, other: "RiskCurve") -> float:
        if other.grid != self.grid:
            raise ContractError("risk curves live on different grids")
        return float(np.max(np.abs(self.values - other.values)))

    def spread(self) -> float:
        return float(self.values.max() - self.values.min())

    def to_csv(self) -> str:
        rows = ((fmt_point(a), fmt_number(float(v))) for a, v in zip(self.grid.atoms, self.values))
        return csv_text(("theta", "risk"), rows)
