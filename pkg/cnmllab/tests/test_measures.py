import math

import numpy as np
import pytest

from cnmllab.domain.errors import ContractError
from cnmllab.domain.grid import GridPrior, ParameterGrid
from cnmllab.families import BinomialModel
from cnmllab.measures import (
    atom_risks,
    bayes_atom_risks,
    bias_term,
    cnml3_decomposition,
    conditional_mutual_information,
    kl_risk,
    mutual_information,
    projection_divergence,
    risk_curve,
)
from cnmllab.predictors import bayes_predictive, cnml1, cnml2, cnml3, nml


class TestRisk:

    def test_nml_closed_form(self):
        model = BinomialModel(N=0, M=1)
        expected = 0.3 * math.log(0.6) + 0.7 * math.log(1.4)
        assert kl_risk(0.3, nml(model), model) == pytest.approx(expected, rel=1e-12)

    def test_missing_mass_is_infinite(self, bern11, three_grid):
        assert kl_risk(0.5, cnml1(bern11), bern11) == math.inf
        assert np.all(np.isinf(atom_risks(cnml1(bern11), bern11, three_grid)))

    def test_curve_matches_atoms(self, bern15):
        grid = ParameterGrid.from_step(0.1, 0.008, 101)
        q = cnml2(bern15)
        curve = risk_curve(q, bern15, grid, max_workers=3)
        np.testing.assert_allclose(curve.values, atom_risks(q, bern15, grid), rtol=0, atol=1e-14)
        assert curve.name == "cnml2"

    def test_binomial_symmetry(self, bern15, small_grid):
        r = atom_risks(cnml3(bern15), bern15, small_grid)
        np.testing.assert_allclose(r, r[::-1], atol=1e-13)

    def test_point_mass_bayes_has_zero_risk_at_its_atom(self, bern15, small_grid):
        r = bayes_atom_risks(GridPrior.point_mass(small_grid, 2), bern15)
        assert r[2] == pytest.approx(0.0, abs=1e-14)
        assert np.all(r[[0, 1, 3, 4]] > 0)

    def test_misaligned(self, bern15, bern11):
        with pytest.raises(ContractError):
            kl_risk(0.5, cnml3(bern11), bern15)


class TestMutualInformation:

    def test_point_mass_has_none(self, bern15, small_grid):
        assert conditional_mutual_information(GridPrior.point_mass(small_grid, 0), bern15) == pytest.approx(0.0, abs=1e-14)

    def test_two_symmetric_atoms(self):
        model = BinomialModel(N=0, M=1)
        prior = GridPrior.uniform(ParameterGrid.from_atoms((0.1, 0.9)))
        h = -(0.1 * math.log(0.1) + 0.9 * math.log(0.9))
        assert mutual_information(prior, model) == pytest.approx(math.log(2) - h, rel=1e-12)

    def test_equals_cmi_without_observation(self, small_grid, interior_prior):
        model = BinomialModel(N=0, M=4)
        prior = interior_prior(small_grid)
        assert conditional_mutual_information(prior, model) == pytest.approx(mutual_information(prior, model), abs=1e-13)

    def test_cmi_concave_on_segments(self, bern15, small_grid, interior_prior, rng):
        for _ in range(100):
            a, b = interior_prior(small_grid), interior_prior(small_grid)
            t = float(rng.uniform())
            mid = conditional_mutual_information(a.mix(b, t), bern15)
            ends = t * conditional_mutual_information(a, bern15) + (1 - t) * conditional_mutual_information(b, bern15)
            assert mid >= ends - 1e-12


class TestProjectionDivergence:

    def test_zero_at_own_predictive(self, tri, tri_grid, interior_prior):
        prior = interior_prior(tri_grid)
        assert projection_divergence(prior, bayes_predictive(prior, tri), tri) == pytest.approx(0.0, abs=1e-12)

    def test_infinite_for_cnml1(self, bern11, three_grid):
        assert projection_divergence(GridPrior.uniform(three_grid), cnml1(bern11), bern11) == math.inf

    def test_positive_for_cnml3(self, bern15, small_grid):
        assert projection_divergence(GridPrior.uniform(small_grid), cnml3(bern15), bern15) > 0

    def test_convex_on_segments(self, bern15, small_grid, interior_prior, rng):
        q = cnml3(bern15)
        for _ in range(100):
            a, b = interior_prior(small_grid), interior_prior(small_grid)
            t = float(rng.uniform())
            mid = projection_divergence(a.mix(b, t), q, bern15)
            ends = t * projection_divergence(a, q, bern15) + (1 - t) * projection_divergence(b, q, bern15)
            assert mid <= ends + 1e-12


class TestDecomposition:

    def test_terms_add_up(self, bern15, small_grid, interior_prior):
        for _ in range(5):
            prior = interior_prior(small_grid)
            parts = cnml3_decomposition(prior, bern15)
            assert parts.total == pytest.approx(projection_divergence(prior, cnml3(bern15), bern15), abs=1e-12)

    def test_multinomial_terms_add_up(self, tri, tri_grid, interior_prior):
        prior = interior_prior(tri_grid)
        parts = cnml3_decomposition(prior, tri)
        assert parts.total == pytest.approx(projection_divergence(prior, cnml3(tri), tri), abs=1e-12)

    def test_gaussian_bias(self, gauss):
        # -M / (2 (N + M)) with N = 1, M = 2
        assert bias_term(gauss, 0.0) == pytest.approx(-1 / 3, abs=1e-7)
