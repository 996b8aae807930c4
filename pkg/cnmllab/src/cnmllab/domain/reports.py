from __future__ import annotations
from dataclasses import dataclass, field
import math
from typing import Any, Optional, Sequence, Tuple, Union

# - own - #
from .errors import ConfigError
from .tags import Functional, StepRule

Number = Union[float, Tuple[float, ...]]

GAP_SLACK = 1e-12


def json_number(v: Any) -> Any:
    """Floats as JSON numbers; non-finite values as the strings "inf", "-inf", "nan"."""
    if isinstance(v, (tuple, list)):
        return [json_number(x) for x in v]
    if v is None or isinstance(v, (bool, int, str)):
        return v
    v = float(v)
    if math.isfinite(v):
        return v
    return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")


@dataclass(frozen=True)
class OptimConfig:
    max_iterations: int = 200_000
    gap_tolerance: float = 1e-8
    step_rule: StepRule = StepRule.MULTIPLICATIVE
    init: Union[str, Tuple[float, ...]] = "uniform"
    record_trace: bool = False
    # iterations between Newton finishing attempts; 0 turns them off
    polish_every: int = 100

    def __post_init__(self):
        if int(self.polish_every) != self.polish_every or self.polish_every < 0:
            raise ConfigError("polish_every must be an integer >= 0")
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 1:
            raise ConfigError("max_iterations must be an integer >= 1")
        if not self.gap_tolerance > 0:
            raise ConfigError("gap_tolerance must be positive")
        object.__setattr__(self, "step_rule", StepRule(self.step_rule))
        if isinstance(self.init, str):
            if self.init != "uniform":
                raise ConfigError(f"unknown init {self.init!r}; use 'uniform' or a weight vector")
        else:
            object.__setattr__(self, "init", tuple(float(w) for w in self.init))

    def warm_started(self, weights: Sequence[float]) -> "OptimConfig":
        return OptimConfig(
            max_iterations=self.max_iterations,
            gap_tolerance=self.gap_tolerance,
            step_rule=self.step_rule,
            init=tuple(float(w) for w in weights),
            record_trace=self.record_trace,
            polish_every=self.polish_every,
        )


@dataclass(frozen=True)
class OptimReport:
    """Outcome of one simplex fit. The gap is the Frank-Wolfe certificate in nats."""
    functional: Functional
    iterations: int
    objective_nats: float
    gap_nats: float
    converged: bool
    tolerance: float
    step_rule: StepRule = StepRule.MULTIPLICATIVE
    step: float = float("nan")
    trace: Tuple[float, ...] = field(default=(), repr=False)

    def __post_init__(self):
        assert self.gap_nats >= -GAP_SLACK, f"negative gap {self.gap_nats!r}"
        assert self.converged == (self.gap_nats <= self.tolerance), "converged flag disagrees with the gap"

    def to_json(self) -> dict:
        return {
            "functional": self.functional.value,
            "iterations": self.iterations,
            "objective_nats": json_number(self.objective_nats),
            "gap_nats": json_number(self.gap_nats),
            "converged": self.converged,
            "tolerance": self.tolerance,
            "step_rule": self.step_rule.value,
            "step": json_number(self.step),
            "trace": json_number(list(self.trace)),
        }


@dataclass(frozen=True)
class CheckReport:
    name: str
    statistic: Number
    reference: Optional[Number]
    tolerance: float
    passed: bool
    detail: str = ""
    seed: Optional[int] = None

    @classmethod
    def within(cls, name: str, statistic: float, reference: float, tolerance: float,
               detail: str = "", seed: Optional[int] = None) -> "CheckReport":
        """Passes when |statistic - reference| <= tolerance."""
        ok = bool(abs(statistic - reference) <= tolerance)
        return cls(name, float(statistic), float(reference), float(tolerance), ok, detail, seed)

    @classmethod
    def below(cls, name: str, statistic: float, bound: float, tolerance: float = 0.0,
              detail: str = "", seed: Optional[int] = None) -> "CheckReport":
        """Bound form: passes when statistic <= bound + tolerance."""
        ok = bool(statistic <= bound + tolerance)
        return cls(name, float(statistic), float(bound), float(tolerance), ok, detail, seed)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "statistic": json_number(self.statistic),
            "reference": json_number(self.reference),
            "tolerance": json_number(self.tolerance),
            "passed": self.passed,
            "detail": self.detail,
            "seed": self.seed,
        }
