import itertools
import logging

import numpy as np
import pytest

from cnmllab.checks import restricted_normal_cnml3_normalizer
from cnmllab.domain.errors import ContractError
from cnmllab.domain.grid import GridPrior, ParameterGrid
from cnmllab.domain.table import ConditionalTable
from cnmllab.families import BinomialModel, GaussianLocationModel
from cnmllab.predictors import bayes_predictive, cnml1, cnml2, cnml3, cnml3_log_normalizer, cnml3_log_normalizers, nml
from cnmllab.predictors.cnml import regret, regret_table

BUILDERS = {1: cnml1, 2: cnml2, 3: cnml3}


def _bern(theta, ones, n):
    return theta**ones * (1.0 - theta) ** (n - ones)


def _sequence_cnml(flavor, x, M):
    """CNML over raw 0/1 sequences of length M given the sequence x, summed back to counts."""
    N, j = len(x), sum(x)
    by_count = np.zeros(M + 1)
    for y in itertools.product((0, 1), repeat=M):
        k = sum(y)
        if flavor == 1:
            t = k / M
            by_count[k] += _bern(t, j, N) * _bern(t, k, M)
        else:
            t = (j + k) / (N + M)
            by_count[k] += _bern(t, k, M) * (_bern(t, j, N) if flavor == 2 else 1.0)
    return by_count / by_count.sum()


class TestMicroTables:
    """Bernoulli with one observation and one future symbol, worked by hand."""

    @pytest.mark.parametrize("flavor,row", [(3, [2 / 3, 1 / 3]), (2, [4 / 5, 1 / 5]), (1, [1.0, 0.0])])
    def test_rows(self, bern11, flavor, row):
        q = BUILDERS[flavor](bern11).q
        np.testing.assert_allclose(q[0], row, atol=1e-12)
        np.testing.assert_allclose(q[1], row[::-1], atol=1e-12)

    def test_nml(self, bern11):
        q = nml(bern11.with_sizes(N=0))
        assert q.shape == (1, 2)
        np.testing.assert_allclose(q.q[0], [0.5, 0.5], atol=1e-12)

    def test_cnml1_zero_is_minus_inf(self, bern11):
        assert cnml1(bern11).log_q[0, 1] == -np.inf

    def test_normalizer(self, bern11):
        assert cnml3_log_normalizer(bern11, 0) == pytest.approx(np.log(1.5))
        np.testing.assert_allclose(cnml3_log_normalizers(bern11), np.log([1.5, 1.5]))


class TestEqualizer:

    @pytest.mark.parametrize("flavor", [1, 2, 3])
    @pytest.mark.parametrize("model", [BinomialModel(N=1, M=5), BinomialModel(N=3, M=4)])
    def test_binomial_rows_are_flat(self, flavor, model):
        reg = regret_table(flavor, model, BUILDERS[flavor](model))
        for row in reg:
            finite = row[np.isfinite(row)]
            np.testing.assert_allclose(finite, finite[0], atol=1e-10)

    @pytest.mark.parametrize("flavor", [1, 2, 3])
    def test_multinomial_rows_are_flat(self, tri, flavor):
        reg = regret_table(flavor, tri, BUILDERS[flavor](tri))
        for row in reg:
            finite = row[np.isfinite(row)]
            assert finite.size > 0
            np.testing.assert_allclose(finite, finite[0], atol=1e-10)

    def test_cnml3_regret_is_log_normalizer(self, bern15):
        reg = regret_table(3, bern15, cnml3(bern15))
        np.testing.assert_allclose(reg, np.repeat(cnml3_log_normalizers(bern15)[:, None], 6, axis=1), atol=1e-10)

    def test_gaussian_cnml3_flat(self, gauss):
        reg = regret_table(3, gauss, cnml3(gauss))
        np.testing.assert_allclose(reg, reg[:, :1].repeat(reg.shape[1], axis=1), atol=1e-9)

    @pytest.mark.parametrize("N,M", [(1, 2), (1, 4), (1, 10), (3, 7)])
    def test_gaussian_normalizer_ignores_the_observed_mean(self, N, M):
        log_z = cnml3_log_normalizers(GaussianLocationModel(N=N, M=M))
        np.testing.assert_allclose(log_z, np.log((N + M) / N), rtol=0, atol=1e-10)

    def test_clipped_gaussian_normalizer(self):
        model = GaussianLocationModel(N=2, M=3, clip=1.0)
        expected = [restricted_normal_cnml3_normalizer(2, 3, 1.0, 2 * x).value for x in model.observed.labels]
        np.testing.assert_allclose(cnml3_log_normalizers(model), np.log(expected), rtol=0, atol=1e-9)

    def test_rows_the_future_nodes_miss_are_reported(self, caplog):
        with caplog.at_level(logging.WARNING, logger="cnmllab.predictors.cnml"):
            cnml3(GaussianLocationModel(N=1, M=4))
        assert any("future nodes miss" in r.getMessage() for r in caplog.records)

    @pytest.mark.parametrize("flavor", [1, 2, 3])
    @pytest.mark.parametrize("row", [0, 1])
    def test_perturbation_raises_max_regret(self, bern15, flavor, row):
        q = BUILDERS[flavor](bern15)
        base = regret_table(flavor, bern15, q)[row].max()
        p = q.q[row].copy()
        order = np.argsort(p)[::-1]
        src, dst = order[0], order[1]
        assert p[dst] > 0
        eps = 1e-3
        p[src] -= eps
        p[dst] += eps
        log_q = np.array(q.log_q)
        with np.errstate(divide="ignore"):
            log_q[row] = np.log(p)
        moved = ConditionalTable(log_q, q.rows, q.cols, name="moved")
        assert regret_table(flavor, bern15, moved)[row].max() > base + 1e-4

    def test_single_cell_lookup(self, bern15):
        q = cnml2(bern15)
        assert regret(2, bern15, q, 1, 3) == pytest.approx(regret_table(2, bern15, q)[1, 3])


class TestSequenceEquivalence:

    @pytest.mark.parametrize("flavor", [1, 2, 3])
    @pytest.mark.parametrize("M", range(1, 7))
    def test_counts_match_sequences(self, flavor, M):
        model = BinomialModel(N=2, M=M)
        q = BUILDERS[flavor](model).q
        for x in ((0, 0), (0, 1), (1, 1)):
            np.testing.assert_allclose(q[sum(x)], _sequence_cnml(flavor, x, M), atol=1e-12)

    @pytest.mark.parametrize("M", range(1, 7))
    def test_nml_matches_sequences(self, M):
        model = BinomialModel(N=0, M=M)
        np.testing.assert_allclose(nml(model).q[0], _sequence_cnml(3, (), M), atol=1e-12)


class TestContracts:

    def test_nml_needs_empty_observation(self, bern15):
        with pytest.raises(ContractError):
            nml(bern15)

    @pytest.mark.parametrize("flavor", [2, 3])
    def test_no_observation_is_nml(self, flavor):
        model = BinomialModel(N=0, M=4)
        np.testing.assert_allclose(BUILDERS[flavor](model).log_q, nml(model).log_q, atol=1e-14)

    def test_misaligned_table(self, bern15, bern11):
        with pytest.raises(ContractError):
            regret_table(3, bern15, cnml3(bern11))


class TestBayesPredictive:

    def test_point_mass_is_future_pmf(self, bern15, small_grid):
        q = bayes_predictive(GridPrior.point_mass(small_grid, 1), bern15)
        expected = np.exp(bern15.log_pmf_at(0.3, bern15.M))
        for row in q.q:
            np.testing.assert_allclose(row, expected, atol=1e-12)

    def test_two_atom_posterior(self, bern11):
        grid_prior = GridPrior.uniform(ParameterGrid.from_atoms((0.2, 0.6)))
        q = bayes_predictive(grid_prior, bern11)
        # posterior after one 1: weights 0.2 and 0.6 -> 1/4, 3/4
        assert q.prob(1, 1) == pytest.approx(0.25 * 0.2 + 0.75 * 0.6)
        # after one 0: 0.8 and 0.4 -> 2/3, 1/3
        assert q.prob(0, 1) == pytest.approx(2 / 3 * 0.2 + 1 / 3 * 0.6)

    def test_multinomial_rows_normalized(self, tri, tri_grid, interior_prior):
        q = bayes_predictive(interior_prior(tri_grid), tri)
        np.testing.assert_allclose(q.q.sum(axis=1), 1.0, atol=1e-12)
