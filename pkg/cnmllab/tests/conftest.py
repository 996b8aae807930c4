import numpy as np
import pytest

from cnmllab.domain.grid import GridPrior, ParameterGrid
from cnmllab.families import BinomialModel, GaussianLocationModel, MultinomialModel


@pytest.fixture
def bern11():
    """Bernoulli N=1, M=1: the hand-derived micro-tables."""
    return BinomialModel(N=1, M=1)


@pytest.fixture
def bern15():
    return BinomialModel(N=1, M=5)


@pytest.fixture
def tri():
    return MultinomialModel(d=2, N=2, M=3)


@pytest.fixture
def gauss():
    return GaussianLocationModel(N=1, M=2)


@pytest.fixture
def small_grid():
    return ParameterGrid.from_atoms((0.1, 0.3, 0.5, 0.7, 0.9))


@pytest.fixture
def three_grid():
    return ParameterGrid.from_atoms((0.1, 0.5, 0.9))


@pytest.fixture
def tri_grid():
    return ParameterGrid.from_atoms(((0.2, 0.3), (0.1, 0.1), (0.5, 0.25), (0.3, 0.6)))


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(20240917))


@pytest.fixture
def interior_prior(rng):
    """Draws random priors bounded away from the simplex faces."""
    def draw(grid: ParameterGrid) -> GridPrior:
        n = len(grid)
        return GridPrior.normalized(grid, 0.5 * rng.dirichlet(np.ones(n)) + 0.5 / n)
    return draw
