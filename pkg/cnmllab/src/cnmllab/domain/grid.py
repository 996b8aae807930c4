from __future__ import annotations
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np

# - own - #
from .errors import DomainError
from .csvfmt import csv_text, fmt_number, fmt_point

Atom = Union[float, Tuple[float, ...]]

SIMPLEX_SUM_TOL = 1e-12


@dataclass(frozen=True)
class ParameterGrid:
    """
    Ordered parameter atoms inside a compact set K.

    Atoms are scalars (binomial, gaussian location) or tuples holding the d
    explicit probabilities of a multinomial. The grid knows nothing about the
    model; models check that the atoms lie in their interior.
    """
    atoms: Tuple[Atom, ...]
    lo: Optional[float] = None
    hi: Optional[float] = None

    def __post_init__(self):
        if len(self.atoms) == 0:
            raise DomainError("grid must contain at least one atom")
        first = self.atoms[0]
        if isinstance(first, tuple):
            width = len(first)
            if any(not isinstance(a, tuple) or len(a) != width for a in self.atoms):
                raise DomainError("vector atoms must all have the same length")
            if len(set(self.atoms)) != len(self.atoms):
                raise DomainError("vector atoms must be pairwise distinct")
        else:
            values = np.asarray(self.atoms, dtype=float)
            if not np.all(np.isfinite(values)):
                raise DomainError("grid atoms must be finite")
            if np.any(np.diff(values) <= 0):
                raise DomainError("scalar atoms must be strictly increasing")

    # ---------- constructors ----------

    @classmethod
    def evenly_spaced(cls, lo: float, hi: float, count: int) -> "ParameterGrid":
        if count < 1:
            raise DomainError("count must be >= 1")
        if count > 1 and not hi > lo:
            raise DomainError("hi must exceed lo")
        atoms = tuple(float(x) for x in np.linspace(lo, hi, count))
        return cls(atoms=atoms, lo=float(lo), hi=float(hi if count > 1 else lo))

    @classmethod
    def from_step(cls, lo: float, step: float, count: int) -> "ParameterGrid":
        """Atoms lo + i*step, i = 0..count-1."""
        if count < 1 or step <= 0:
            raise DomainError("need count >= 1 and step > 0")
        atoms = tuple(float(lo + i * step) for i in range(count))
        return cls(atoms=atoms, lo=float(lo), hi=atoms[-1])

    @classmethod
    def from_atoms(cls, atoms: Iterable) -> "ParameterGrid":
        out = []
        for a in atoms:
            if isinstance(a, (list, tuple, np.ndarray)):
                out.append(tuple(float(v) for v in a))
            else:
                out.append(float(a))
        return cls(atoms=tuple(out))

    # ---------- accessors ----------

    def __len__(self) -> int:
        return len(self.atoms)

    @property
    def is_vector(self) -> bool:
        return isinstance(self.atoms[0], tuple)

    @property
    def values(self) -> np.ndarray:
        """(I,) for scalar atoms, (I, d) for vector atoms."""
        return np.asarray(self.atoms, dtype=float)

    def midpoint(self) -> float:
        assert not self.is_vector, "midpoint only defined for scalar grids"
        return 0.5 * (self.atoms[0] + self.atoms[-1])

    def labels(self) -> Tuple[str, ...]:
        return tuple(fmt_point(a) for a in self.atoms)


@dataclass(frozen=True, eq=False)
class GridPrior:
    """Probability vector over the atoms of a ParameterGrid."""
    grid: ParameterGrid
    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        w = np.array(self.weights, dtype=float).reshape(-1)
        if w.shape[0] != len(self.grid):
            raise DomainError(f"prior has {w.shape[0]} weights for a grid of {len(self.grid)} atoms")
        if np.any(~np.isfinite(w)) or np.any(w < 0.0) or np.any(w > 1.0 + SIMPLEX_SUM_TOL):
            raise DomainError("prior weights must lie in [0, 1]")
        if abs(w.sum() - 1.0) > SIMPLEX_SUM_TOL:
            raise DomainError(f"prior weights sum to {w.sum()!r}, not 1")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, grid: ParameterGrid) -> "GridPrior":
        n = len(grid)
        return cls(grid, np.full(n, 1.0 / n))

    @classmethod
    def point_mass(cls, grid: ParameterGrid, index: int) -> "GridPrior":
        w = np.zeros(len(grid))
        w[index] = 1.0
        return cls(grid, w)

    @classmethod
    def normalized(cls, grid: ParameterGrid, weights: Sequence[float]) -> "GridPrior":
        """Rescale non-negative weights to sum 1."""
        w = np.asarray(weights, dtype=float)
        total = w.sum()
        if not np.isfinite(total) or total <= 0 or np.any(w < 0):
            raise DomainError("weights must be non-negative with a positive finite sum")
        w = w / total
        # one more pass pins the sum to within an ulp or two of 1
        return cls(grid, w / w.sum())

    @classmethod
    def random(cls, grid: ParameterGrid, rng: np.random.Generator) -> "GridPrior":
        """Uniform draw from the simplex (Dirichlet(1,...,1))."""
        return cls.normalized(grid, rng.dirichlet(np.ones(len(grid))))

    def mix(self, other: "GridPrior", w: float) -> "GridPrior":
        """w*self + (1-w)*other."""
        if other.grid != self.grid:
            raise DomainError("cannot mix priors on different grids")
        return GridPrior.normalized(self.grid, w * self.weights + (1.0 - w) * other.weights)

    def support(self, threshold: float = 0.0) -> np.ndarray:
        return np.flatnonzero(self.weights > threshold)

    def to_csv(self) -> str:
        rows = ((fmt_point(a), fmt_number(float(w))) for a, w in zip(self.grid.atoms, self.weights))
        return csv_text(("theta", "weight"), rows)

    def __repr__(self):
        top = np.argsort(-self.weights)[:3]
        lead = ", ".join(f"{self.grid.labels()[i]}:{self.weights[i]:.4f}" for i in top)
        return f"<GridPrior atoms={len(self.grid)} top=[{lead}]>"
