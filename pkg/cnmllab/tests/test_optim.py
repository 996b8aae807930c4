import itertools

import numpy as np
import pytest
from scipy.optimize import minimize
from scipy.special import xlogy

from cnmllab.domain.errors import ContractError, InfeasibleProjectionError
from cnmllab.domain.grid import GridPrior, ParameterGrid
from cnmllab.domain.reports import OptimConfig
from cnmllab.domain.tags import Functional
from cnmllab.families import BinomialModel
from cnmllab.measures import atom_risks, bayes_atom_risks, conditional_mutual_information, projection_divergence
from cnmllab.optim import SimplexObjective, bayes_project, fit_lip, objective_gradient
from cnmllab.predictors import bayes_predictive, cnml1, cnml3


def _homogeneous(f, grid, w):
    w = np.asarray(w, dtype=float)
    return w.sum() * f(GridPrior.normalized(grid, w))


def _central_difference(f, grid, w, h=1e-6):
    out = np.empty_like(w)
    for i in range(w.size):
        up, down = w.copy(), w.copy()
        up[i] += h
        down[i] -= h
        out[i] = (_homogeneous(f, grid, up) - _homogeneous(f, grid, down)) / (2 * h)
    return out


def _lattice(atoms, steps):
    """Every prior on `atoms` atoms with weights in multiples of 1/steps, (B, atoms)."""
    bars = np.array(list(itertools.combinations(range(steps + atoms - 1), atoms - 1)))
    edges = np.hstack([np.full((len(bars), 1), -1), bars, np.full((len(bars), 1), steps + atoms - 1)])
    return (np.diff(edges, axis=1) - 1) / steps


def _batch_cmi(W, model, grid):
    """Conditional mutual information of every row of W at once."""
    p_obs = np.exp(model.log_pmf_matrix(grid, model.N))
    p_fut = np.exp(model.log_pmf_matrix(grid, model.M))
    own = xlogy(p_fut, p_fut).sum(axis=1)
    joint = np.einsum("bi,ij,ik->bjk", W, p_obs, p_fut)
    marginal = W @ p_obs
    return W @ own - xlogy(joint, joint).sum(axis=(1, 2)) + xlogy(marginal, marginal).sum(axis=1)


LATTICE_GRIDS = [(0.1, 0.5, 0.9), (0.1, 0.4, 0.6, 0.9)]


class TestGradient:

    def test_cmi_gradient(self, bern15, small_grid, interior_prior):
        def cmi(p):
            return conditional_mutual_information(p, bern15)
        for _ in range(50):
            prior = interior_prior(small_grid)
            numeric = _central_difference(cmi, small_grid, prior.weights.copy())
            np.testing.assert_allclose(objective_gradient("cmi", prior, bern15), numeric, rtol=1e-4, atol=1e-8)

    def test_projection_gradient(self, tri, tri_grid, interior_prior):
        q = cnml3(tri)

        def d(p):
            return projection_divergence(p, q, tri)
        for _ in range(10):
            prior = interior_prior(tri_grid)
            numeric = _central_difference(d, tri_grid, prior.weights.copy())
            np.testing.assert_allclose(objective_gradient("d", prior, tri, q), numeric, rtol=1e-4, atol=1e-8)

    def test_value_is_inner_product(self, bern15, small_grid, interior_prior):
        prior = interior_prior(small_grid)
        obj = SimplexObjective(Functional.CMI, bern15, small_grid)
        assert obj.value(prior.weights) == pytest.approx(conditional_mutual_information(prior, bern15), abs=1e-14)


class TestLatentInformationPrior:

    def test_single_atom(self, bern15):
        prior, report = fit_lip(bern15, ParameterGrid.from_atoms((0.4,)))
        assert prior.weights.tolist() == [1.0]
        assert report.converged and report.iterations == 0

    def test_batch_cmi_matches_measure(self, bern15, three_grid):
        W = _lattice(3, 10)
        for w, value in zip(W[::7], _batch_cmi(W[::7], bern15, three_grid)):
            assert value == pytest.approx(conditional_mutual_information(GridPrior(three_grid, w), bern15), abs=1e-13)

    @pytest.mark.parametrize("atoms", LATTICE_GRIDS)
    def test_beats_dense_lattice(self, bern15, atoms):
        grid = ParameterGrid.from_atoms(atoms)
        _, report = fit_lip(bern15, grid)
        assert report.converged
        best = float(_batch_cmi(_lattice(len(atoms), 100), bern15, grid).max())
        assert report.objective_nats >= best - 1e-10
        assert report.objective_nats - best <= 1e-4

    def test_newton_finish_reaches_tolerance(self):
        grid = ParameterGrid.from_step(0.1, 0.008, 101)
        prior, report = fit_lip(BinomialModel(N=1, M=10), grid, OptimConfig(max_iterations=2000))
        assert report.converged and report.gap_nats <= 1e-8
        assert prior.weights.sum() == pytest.approx(1.0, abs=1e-12)

    def test_agrees_with_slsqp(self, bern15, small_grid):
        prior, report = fit_lip(bern15, small_grid)
        n = len(small_grid)
        res = minimize(
            lambda w: -conditional_mutual_information(GridPrior.normalized(small_grid, np.clip(w, 0, None) + 1e-300), bern15),
            np.full(n, 1.0 / n),
            method="SLSQP",
            bounds=[(0.0, 1.0)] * n,
            constraints=({"type": "eq", "fun": lambda w: w.sum() - 1.0},),
            options={"ftol": 1e-14, "maxiter": 500},
        )
        assert report.objective_nats >= -res.fun - 1e-8
        assert report.objective_nats + res.fun <= 1e-4

    def test_equalizer_certificate(self, bern15, small_grid):
        prior, report = fit_lip(bern15, small_grid)
        r = bayes_atom_risks(prior, bern15)
        assert np.all(r <= report.objective_nats + report.gap_nats + 1e-12)

    def test_trace_is_monotone(self, tri, tri_grid):
        _, report = fit_lip(tri, tri_grid, OptimConfig(record_trace=True))
        trace = np.asarray(report.trace)
        assert trace.size == report.iterations + 1
        assert np.all(np.diff(trace) > 0)

    def test_warm_start_is_already_done(self, bern15, small_grid):
        cfg = OptimConfig()
        prior, _ = fit_lip(bern15, small_grid, cfg)
        _, again = fit_lip(bern15, small_grid, cfg.warm_started(prior.weights))
        assert again.converged and again.iterations <= 2

    def test_warm_start_length(self, bern15, small_grid):
        with pytest.raises(ContractError):
            fit_lip(bern15, small_grid, OptimConfig(init=(0.5, 0.5)))


class TestBayesProjection:

    def test_recovers_bayes_predictive(self, bern15, three_grid):
        target = GridPrior(three_grid, [0.2, 0.3, 0.5])
        prior, report = bayes_project(bayes_predictive(target, bern15), bern15, three_grid,
                                      OptimConfig(gap_tolerance=1e-11))
        assert report.converged
        assert report.objective_nats <= 1e-10
        np.testing.assert_allclose(prior.weights, target.weights, atol=1e-3)

    @pytest.mark.parametrize("atoms", LATTICE_GRIDS)
    def test_beats_dense_lattice(self, bern15, atoms):
        grid = ParameterGrid.from_atoms(atoms)
        q = cnml3(bern15)
        _, report = bayes_project(q, bern15, grid)
        assert report.converged
        W = _lattice(len(atoms), 100)
        best = float((W @ atom_risks(q, bern15, grid) - _batch_cmi(W, bern15, grid)).min())
        assert report.objective_nats <= best + 1e-10
        assert best - report.objective_nats <= 1e-4

    def test_newton_finish_reaches_tolerance(self):
        model = BinomialModel(N=1, M=10)
        grid = ParameterGrid.from_step(0.1, 0.008, 101)
        _, report = bayes_project(cnml3(model), model, grid, OptimConfig(max_iterations=2000))
        assert report.converged and report.gap_nats <= 1e-8

    def test_projection_dominates_cnml3(self, bern15, small_grid):
        q = cnml3(bern15)
        prior, report = bayes_project(q, bern15, small_grid)
        rho = atom_risks(q, bern15, small_grid)
        r = bayes_atom_risks(prior, bern15)
        assert np.all(r <= rho - report.objective_nats + report.gap_nats + 1e-12)

    def test_cnml1_is_infeasible(self, bern11, three_grid):
        with pytest.raises(InfeasibleProjectionError):
            bayes_project(cnml1(bern11), bern11, three_grid)

    def test_needs_table(self, bern15, three_grid):
        with pytest.raises(ContractError):
            SimplexObjective(Functional.D, bern15, three_grid)
        with pytest.raises(ContractError):
            SimplexObjective(Functional.CMI, bern15, three_grid, cnml3(bern15))


class TestFrankWolfe:

    @pytest.fixture
    def two_atoms(self):
        return ParameterGrid.from_atoms((0.2, 0.7))

    def test_lip_matches_multiplicative(self, bern15, two_atoms):
        _, eg = fit_lip(bern15, two_atoms)
        _, fw = fit_lip(bern15, two_atoms, OptimConfig(step_rule="frank_wolfe", gap_tolerance=1e-6, max_iterations=50))
        assert fw.converged
        assert fw.objective_nats == pytest.approx(eg.objective_nats, abs=1e-9)

    def test_projection_matches_multiplicative(self, bern15, two_atoms):
        q = cnml3(bern15)
        _, eg = bayes_project(q, bern15, two_atoms)
        _, fw = bayes_project(q, bern15, two_atoms, OptimConfig(step_rule="frank_wolfe", gap_tolerance=1e-6, max_iterations=50))
        assert fw.converged
        assert fw.objective_nats == pytest.approx(eg.objective_nats, abs=1e-9)
