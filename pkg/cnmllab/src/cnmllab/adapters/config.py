"""
JSON experiment configuration.

    {
      "version": 1,
      "model": {"family": "binomial", "N": 1, "M": 10},
      "grid": {"lo": 0.1, "step": 0.008, "count": 101},
      "M_list": [10, 100, 500],
      "optimizer": {"gap_tolerance": 1e-8},
      "bayes_priors": [{"name": "flat", "kind": "uniform"}],
      "output_dir": "out",
      "seed": 0,
      "checks": {"samples": 1000000, "tolerances": {"special.digamma_one": 1e-12}}
    }

The grid is {"lo", "hi", "count"}, {"lo", "step", "count"} or an explicit list
of atoms (numbers, or lists of d probabilities for multinomial models).
"""
from __future__ import annotations
import json
import logging
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

# - own - #
from cnmllab.checks.montecarlo import DEFAULT_SAMPLES, MIN_SAMPLES
from cnmllab.checks.suite import SuiteSettings
from cnmllab.domain.errors import ConfigError
from cnmllab.domain.grid import GridPrior, ParameterGrid
from cnmllab.domain.model import SufficientModel
from cnmllab.domain.reports import OptimConfig
from cnmllab.domain.tags import Family, StepRule
from cnmllab.families import model_from_json

logger = logging.getLogger(__name__)

SEED_LIMIT = 2**64


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class ModelSpec(_Strict):
    family: Family
    N: int = Field(ge=0)
    M: int = Field(ge=0)
    d: Optional[int] = Field(default=None, ge=1)
    sigma2: float = Field(default=1.0, gt=0)
    order: int = Field(default=64, ge=2)
    center: Optional[float] = None
    clip: Optional[float] = Field(default=None, gt=0)

    @model_validator(mode="after")
    def _family_fields(self):
        if self.family is Family.MULTINOMIAL and self.d is None:
            raise ValueError("multinomial model needs 'd'")
        if self.family is not Family.MULTINOMIAL and self.d is not None:
            raise ValueError(f"'d' is only valid for multinomial models, not {self.family.value}")
        return self

    def build(self, grid: Optional[ParameterGrid] = None) -> SufficientModel:
        """The gaussian quadrature is centred on the grid midpoint unless center is given."""
        spec = self.model_dump(exclude_none=True)
        spec["family"] = self.family.value
        if self.family is Family.GAUSSIAN_LOCATION and self.center is None and grid is not None and not grid.is_vector:
            spec["center"] = grid.midpoint()
        return model_from_json(spec)


class RangeGrid(_Strict):
    lo: float
    hi: float
    count: int = Field(ge=1)

    def build(self) -> ParameterGrid:
        return ParameterGrid.evenly_spaced(self.lo, self.hi, self.count)


class StepGrid(_Strict):
    lo: float
    step: float = Field(gt=0)
    count: int = Field(ge=1)

    def build(self) -> ParameterGrid:
        return ParameterGrid.from_step(self.lo, self.step, self.count)


GridSpec = Union[RangeGrid, StepGrid, List[Union[float, List[float]]]]


class OptimizerSpec(_Strict):
    max_iterations: int = Field(default=200_000, ge=1)
    gap_tolerance: float = Field(default=1e-8, gt=0)
    step_rule: StepRule = StepRule.MULTIPLICATIVE
    init: Union[Literal["uniform"], List[float]] = "uniform"
    record_trace: bool = False
    polish_every: int = Field(default=100, ge=0)

    def build(self) -> OptimConfig:
        init = self.init if isinstance(self.init, str) else tuple(self.init)
        return OptimConfig(
            max_iterations=self.max_iterations,
            gap_tolerance=self.gap_tolerance,
            step_rule=self.step_rule,
            init=init,
            record_trace=self.record_trace,
            polish_every=self.polish_every,
        )


class PriorSpec(_Strict):
    name: str = Field(min_length=1, pattern=r"^[A-Za-z0-9_.-]+$")
    kind: Optional[Literal["uniform"]] = None
    weights: Optional[List[float]] = None

    @model_validator(mode="after")
    def _one_form(self):
        if (self.kind is None) == (self.weights is None):
            raise ValueError(f"prior {self.name!r} needs exactly one of 'kind' or 'weights'")
        return self

    def build(self, grid: ParameterGrid) -> GridPrior:
        if self.kind == "uniform":
            return GridPrior.uniform(grid)
        return GridPrior(grid, self.weights)


class ChecksSpec(_Strict):
    samples: int = Field(default=DEFAULT_SAMPLES, ge=MIN_SAMPLES)
    tolerances: Dict[str, float] = Field(default_factory=dict)

    @field_validator("tolerances")
    @classmethod
    def _non_negative(cls, v):
        bad = {k: t for k, t in v.items() if not t >= 0}
        if bad:
            raise ValueError(f"tolerances must be non-negative: {bad}")
        return v


class ExperimentConfig(_Strict):
    version: Literal[1] = 1
    model: Optional[ModelSpec] = None
    grid: Optional[GridSpec] = None
    M_list: Optional[List[int]] = None
    optimizer: OptimizerSpec = OptimizerSpec()
    bayes_priors: List[PriorSpec] = Field(default_factory=list)
    output_dir: str = "out"
    seed: int = Field(default=0, ge=0, lt=SEED_LIMIT)
    checks: ChecksSpec = ChecksSpec()

    @field_validator("M_list")
    @classmethod
    def _ascending(cls, v):
        if v is not None:
            if not v:
                raise ValueError("M_list must not be empty")
            if any(m < 1 for m in v) or any(b <= a for a, b in zip(v, v[1:])):
                raise ValueError(f"M_list must be strictly ascending positive integers, got {v}")
        return v

    @field_validator("bayes_priors")
    @classmethod
    def _unique_names(cls, v):
        names = [p.name for p in v]
        if len(set(names)) != len(names):
            raise ValueError(f"bayes prior names must be unique, got {names}")
        return v

    # ---------- builders ----------

    def build_grid(self) -> ParameterGrid:
        if self.grid is None:
            raise ConfigError("config has no 'grid'")
        if isinstance(self.grid, list):
            return ParameterGrid.from_atoms(self.grid)
        return self.grid.build()

    def build_model(self, grid: Optional[ParameterGrid] = None) -> SufficientModel:
        if self.model is None:
            raise ConfigError("config has no 'model'")
        return self.model.build(grid)

    def build_priors(self, grid: ParameterGrid) -> Dict[str, GridPrior]:
        return {p.name: p.build(grid) for p in self.bayes_priors}

    def sizes(self) -> Tuple[int, ...]:
        """M values to sweep; the model's own M when no list is given."""
        if self.M_list is not None:
            return tuple(self.M_list)
        if self.model is None:
            raise ConfigError("config has neither 'M_list' nor 'model'")
        return (self.model.M,)

    def suite_settings(self) -> SuiteSettings:
        return SuiteSettings(seed=self.seed, samples=self.checks.samples, tolerances=dict(self.checks.tolerances))

    def with_seed(self, seed: Optional[int]) -> "ExperimentConfig":
        if seed is None:
            return self
        return ExperimentConfig.model_validate({**self.model_dump(), "seed": seed})


def parse_config(doc: dict) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(doc)
    except ValidationError as e:
        raise ConfigError(f"invalid config: {e}") from e


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"config {path} is not valid JSON: {e}") from e
    if not isinstance(doc, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    cfg = parse_config(doc)
    logger.debug("loaded config %s: %s", path, cfg)
    return cfg


def reproduction_defaults() -> ExperimentConfig:
    """Binomial, N = 1, atoms 0.1 + 0.008 i for i = 0..100, M in {10, 100, 500}."""
    return parse_config({
        "version": 1,
        "model": {"family": "binomial", "N": 1, "M": 10},
        "grid": {"lo": 0.1, "step": 0.008, "count": 101},
        "M_list": [10, 100, 500],
    })
