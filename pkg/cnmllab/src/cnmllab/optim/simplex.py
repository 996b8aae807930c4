"""
Optimization over priors on a fixed ParameterGrid.

Two objectives share one machinery: the conditional mutual information
(maximized, latent information prior) and the projection divergence D to a
table q (minimized, Bayes projection). Both are homogeneous of degree one in
the raw weights, so f(w) = <w, grad f(w)> and the Frank-Wolfe gap is
max grad - f for CMI and f - min grad for D.

Both also share a Hessian, since D is linear minus CMI. Every polish_every
iterations the step rule hands its iterate to an active-set Newton finish;
first-order steps alone crawl once the optimum is sparse.
"""
import logging
from typing import Optional, Tuple
import warnings

import numpy as np
from scipy.linalg import LinAlgError, LinAlgWarning, solve
from scipy.optimize import minimize_scalar
from scipy.special import logsumexp

# - own - #
from cnmllab.domain.errors import ContractError, DomainError, InfeasibleProjectionError, NumericalError
from cnmllab.domain.grid import GridPrior, ParameterGrid
from cnmllab.domain.model import SufficientModel
from cnmllab.domain.reports import OptimConfig, OptimReport
from cnmllab.domain.table import ConditionalTable
from cnmllab.domain.tags import Functional, StepRule
from cnmllab.measures.info_measures import expected_log_ratio
from cnmllab.predictors.bayes import log_weights, mixture_log_joint

logger = logging.getLogger(__name__)

WEIGHT_FLOOR = 1e-300
LOG_FLOOR = float(np.log(WEIGHT_FLOOR))
ETA_START = 1.0
ETA_MAX = 1e8
ETA_MIN = 1e-30
LOG_EVERY = 1000

POLISH_STEPS = 400
POLISH_BACKTRACK = 40
POLISH_ENTER = 8
POLISH_RIDGE = 1e-10
DIAG_FLOOR = 1e-12
DROP_WEIGHT = 1e-15
VALUE_SLACK = 1e-13


class SimplexObjective:
    """Value, raw-weight gradient and Frank-Wolfe gap of CMI or D on one grid."""

    def __init__(self, functional: Functional, model: SufficientModel, grid: ParameterGrid,
                 q: Optional[ConditionalTable] = None):
        self.functional = Functional(functional)
        self.model = model
        self.grid = grid
        self.a_obs = model.log_pmf_matrix(grid, model.N)
        self.a_fut = model.log_pmf_matrix(grid, model.M)

        if self.functional is Functional.D:
            if q is None:
                raise ContractError("the projection objective needs a table q")
            q.check_aligned(model)
            # risk of q at each atom; an infinite one can never carry weight
            self.rho = expected_log_ratio(self.a_obs, self.a_fut, q.log_q)
            self.feasible = np.isfinite(self.rho)
            if not self.feasible.any():
                raise InfeasibleProjectionError(f"D is +inf for every prior: {q.name!r} misses mass at every atom")
        else:
            if q is not None:
                raise ContractError("the mutual information objective takes no table")
            self.rho = None
            self.feasible = np.ones(len(grid), dtype=bool)

    @property
    def maximize(self) -> bool:
        return self.functional.maximize

    def bayes_risks(self, weights: np.ndarray) -> np.ndarray:
        joint = mixture_log_joint(log_weights(weights), self.a_obs, self.a_fut)
        with np.errstate(divide="ignore"):
            marginal = logsumexp(joint, axis=1)
        if not np.all(np.isfinite(marginal)):
            raise NumericalError("mixture marginal vanished on an observed statistic")
        return expected_log_ratio(self.a_obs, self.a_fut, joint - marginal[:, None])

    def gradient(self, weights: np.ndarray) -> np.ndarray:
        r = self.bayes_risks(weights)
        if self.maximize:
            grad = r
        else:
            with np.errstate(invalid="ignore"):
                grad = np.where(self.feasible, self.rho - r, np.inf)
        if np.any(np.isnan(grad)) or not np.all(np.isfinite(grad[self.feasible])):
            bad = np.flatnonzero(~np.isfinite(grad) & self.feasible)
            raise NumericalError(f"non-finite {self.functional.value} gradient at atoms {bad[:5].tolist()}")
        return grad

    def value(self, weights: np.ndarray, grad: Optional[np.ndarray] = None) -> float:
        g = self.gradient(weights) if grad is None else grad
        support = weights > 0
        return float(np.sum(weights[support] * g[support]))

    def gap(self, value: float, grad: np.ndarray) -> float:
        if self.maximize:
            return float(np.max(grad) - value)
        return float(value - np.min(grad[self.feasible]))

    def better(self, new: float, old: float) -> bool:
        return new > old if self.maximize else new < old


def objective_gradient(functional, prior: GridPrior, model: SufficientModel,
                       q: Optional[ConditionalTable] = None) -> np.ndarray:
    """Analytic gradient of CMI or D in the raw prior weights (nats per unit weight)."""
    return SimplexObjective(Functional(functional), model, prior.grid, q).gradient(prior.weights)


# ---------- iteration ----------

def _floored(log_w: np.ndarray, feasible: np.ndarray) -> np.ndarray:
    """Normalize in the log domain; feasible atoms keep at least WEIGHT_FLOOR, the rest are zero."""
    log_w = np.where(feasible, log_w, -np.inf)
    log_w = log_w - logsumexp(log_w)
    log_w = np.where(feasible, np.maximum(log_w, LOG_FLOOR), -np.inf)
    return log_w - logsumexp(log_w)


def _initial_log_weights(obj: SimplexObjective, cfg: OptimConfig) -> np.ndarray:
    n = len(obj.grid)
    if cfg.init == "uniform":
        return _floored(np.zeros(n), obj.feasible)
    w = np.asarray(cfg.init, dtype=float)
    if w.shape != (n,):
        raise ContractError(f"warm start has {w.size} weights for a grid of {n} atoms")
    if np.any(~np.isfinite(w)) or np.any(w < 0) or not w[obj.feasible].sum() > 0:
        raise DomainError("warm start weights must be finite, non-negative and put mass on a feasible atom")
    return _floored(log_weights(w), obj.feasible)


def _multiplicative(obj: SimplexObjective, cfg: OptimConfig, log_w: np.ndarray):
    """Exponentiated gradient with backtracking; a step is taken only if it improves the objective."""
    sign = 1.0 if obj.maximize else -1.0
    w = np.exp(log_w)
    grad = obj.gradient(w)
    value = obj.value(w, grad)
    gap = obj.gap(value, grad)
    trace = [value] if cfg.record_trace else []
    eta, it = ETA_START, 0
    finished = False

    while gap > cfg.gap_tolerance and it < cfg.max_iterations:
        step = np.where(obj.feasible, grad - grad[obj.feasible].max(), 0.0)
        while True:
            cand = _floored(log_w + sign * eta * step, obj.feasible)
            w_new = np.exp(cand)
            g_new = obj.gradient(w_new)
            v_new = obj.value(w_new, g_new)
            if obj.better(v_new, value):
                break
            eta *= 0.5
            if eta < ETA_MIN:
                break
        if eta < ETA_MIN:
            polished = None if finished else _finish(obj, cfg, w, value, gap)
            if polished is None:
                logger.warning("multiplicative update stalled at iteration %d: gap %.3e", it, gap)
                break
            _retrace(trace, obj, polished[2], value)
            w, grad, value, gap = polished
            log_w = _floored(log_weights(w), obj.feasible)
            eta, finished = ETA_START, True
            continue
        finished = False

        log_w, w, grad, value = cand, w_new, g_new, v_new
        gap = obj.gap(value, grad)
        it += 1
        if cfg.record_trace:
            trace.append(value)
        if it % LOG_EVERY == 0:
            logger.debug("iter %d: %s=%.12g gap=%.3e eta=%.3e", it, obj.functional.value, value, gap, eta)
        eta = min(2.0 * eta, ETA_MAX)

        if _polish_due(cfg, it, gap):
            polished = _finish(obj, cfg, w, value, gap)
            if polished is not None:
                _retrace(trace, obj, polished[2], value)
                w, grad, value, gap = polished
                log_w = _floored(log_weights(w), obj.feasible)

    return w, value, gap, it, eta, trace


def _frank_wolfe(obj: SimplexObjective, cfg: OptimConfig, log_w: np.ndarray):
    """Vertex step toward the best gradient coordinate with a bounded line search."""
    w = np.exp(log_w)
    grad = obj.gradient(w)
    value = obj.value(w, grad)
    gap = obj.gap(value, grad)
    trace = [value] if cfg.record_trace else []
    gamma, it = float("nan"), 0
    finished = False
    sign = -1.0 if obj.maximize else 1.0

    while gap > cfg.gap_tolerance and it < cfg.max_iterations:
        if obj.maximize:
            s = int(np.argmax(grad))
        else:
            s = int(np.argmin(np.where(obj.feasible, grad, np.inf)))
        direction = -w.copy()
        direction[s] += 1.0

        def f(g):
            return sign * obj.value(np.clip(w + g * direction, 0.0, None))

        res = minimize_scalar(f, bounds=(0.0, 1.0), method="bounded", options={"xatol": 1e-12})
        w_new = np.clip(w + float(res.x) * direction, 0.0, None)
        w_new = w_new / w_new.sum()
        g_new = obj.gradient(w_new)
        v_new = obj.value(w_new, g_new)
        if not obj.better(v_new, value):
            polished = None if finished else _finish(obj, cfg, w, value, gap)
            if polished is None:
                logger.warning("frank-wolfe line search made no progress at iteration %d: gap %.3e", it, gap)
                break
            _retrace(trace, obj, polished[2], value)
            w, grad, value, gap = polished
            finished = True
            continue
        finished = False

        w, grad, value, gamma = w_new, g_new, v_new, float(res.x)
        gap = obj.gap(value, grad)
        it += 1
        if cfg.record_trace:
            trace.append(value)
        if it % LOG_EVERY == 0:
            logger.debug("iter %d: %s=%.12g gap=%.3e gamma=%.3e", it, obj.functional.value, value, gap, gamma)

        if _polish_due(cfg, it, gap):
            polished = _finish(obj, cfg, w, value, gap)
            if polished is not None:
                _retrace(trace, obj, polished[2], value)
                w, grad, value, gap = polished

    return w, value, gap, it, gamma, trace


# ---------- finishing phase ----------

def _curvature(obj: SimplexObjective, w: np.ndarray, idx: np.ndarray) -> np.ndarray:
    """
    Hessian of -CMI in the raw weights of atoms idx; D has the same one. It is
    the Gram matrix of the joint cells under 1/p_pi(j, k) minus that of the
    observed cells under 1/p_pi(j).
    """
    joint = mixture_log_joint(log_weights(w), obj.a_obs, obj.a_fut)
    with np.errstate(divide="ignore"):
        marginal = logsumexp(joint, axis=1)
    a_obs, a_fut = obj.a_obs[idx], obj.a_fut[idx]
    fut_mass = logsumexp(a_fut, axis=1)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        cells = np.exp(a_obs[:, :, None] + a_fut[:, None, :] - 0.5 * joint[None, :, :])
        rows = np.exp(a_obs + fut_mass[:, None] - 0.5 * marginal[None, :])
    cells = np.nan_to_num(cells.reshape(len(idx), -1), nan=0.0, posinf=0.0)
    rows = np.nan_to_num(rows, nan=0.0, posinf=0.0)
    return cells @ cells.T - rows @ rows.T


def _newton_direction(obj: SimplexObjective, w: np.ndarray, grad: np.ndarray, idx: np.ndarray, phi: float):
    """
    Newton step of phi * objective on atoms idx with sum(d) = 0, damped by a
    ridge proportional to the diagonal. Zero-weight atoms the step would push
    negative leave idx. Returns (d, idx), d None when no step exists.
    """
    while idx.size > 1:
        hess = _curvature(obj, w, idx)
        n = idx.size
        kkt = np.zeros((n + 1, n + 1))
        kkt[:n, :n] = hess + np.diag(POLISH_RIDGE * np.maximum(np.diag(hess), DIAG_FLOOR))
        kkt[:n, n] = 1.0
        kkt[n, :n] = 1.0
        rhs = np.zeros(n + 1)
        rhs[:n] = -phi * grad[idx]
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", LinAlgWarning)
                d = solve(kkt, rhs, assume_a="sym")[:n]
        except (LinAlgError, ValueError):
            return None, idx
        if not np.all(np.isfinite(d)):
            return None, idx
        stuck = (w[idx] <= 0) & (d < 0)
        if not stuck.any():
            return d, idx
        idx = idx[~stuck]
    return None, idx


def _polish(obj: SimplexObjective, cfg: OptimConfig, w: np.ndarray):
    """
    Active-set Newton under sum(w) = 1, started from the support of w. A step
    stops at the first weight it drives to zero and drops that atom; atoms
    whose gradient beats the current value enter a few at a time once the set
    is about as stationary as they are attractive. Returns (w, grad, value, gap)
    of the point with the smallest gap.
    """
    phi = -1.0 if obj.maximize else 1.0
    active = obj.feasible & (w > DROP_WEIGHT * w.max())
    w = np.where(active, w, 0.0)
    w = w / w.sum()
    grad = obj.gradient(w)
    value = obj.value(w, grad)
    gap = obj.gap(value, grad)
    best = (w, grad, value, gap)
    force_enter = False

    for _ in range(POLISH_STEPS):
        if gap <= cfg.gap_tolerance:
            break
        with np.errstate(invalid="ignore"):
            excess = np.where(obj.feasible, phi * (value - grad), -np.inf)
        outside = np.flatnonzero(~active & (excess > 0))
        if outside.size and (force_enter or np.max(np.abs(excess[active])) <= np.max(excess[outside])):
            active[outside[np.argsort(excess[outside])[::-1][:POLISH_ENTER]]] = True
        force_enter = False

        d, idx = _newton_direction(obj, w, grad, np.flatnonzero(active), phi)
        if d is None:
            break
        active[:] = False
        active[idx] = True

        neg = d < 0
        ratios = np.where(neg, w[idx] / np.where(neg, -d, 1.0), np.inf)
        block = int(np.argmin(ratios))
        t = min(1.0, float(ratios[block]))
        taken = None
        for _ in range(POLISH_BACKTRACK):
            w_try = w.copy()
            w_try[idx] = np.maximum(w[idx] + t * d, 0.0)
            if t == ratios[block]:
                w_try[idx[block]] = 0.0
            w_try = w_try / w_try.sum()
            try:
                g_try = obj.gradient(w_try)
            except NumericalError:
                t *= 0.5
                continue
            v_try = obj.value(w_try, g_try)
            gap_try = obj.gap(v_try, g_try)
            if _improves(obj, v_try, gap_try, value, gap):
                taken = (w_try, g_try, v_try, gap_try)
                break
            t *= 0.5
        if taken is None:
            if np.any(~active & (excess > 0)):
                force_enter = True
                continue
            break

        w, grad, value, gap = taken
        active = obj.feasible & (w > 0)
        if gap < best[3]:
            best = taken

    return best


def _polish_due(cfg: OptimConfig, it: int, gap: float) -> bool:
    return bool(cfg.polish_every) and it % cfg.polish_every == 0 and gap > cfg.gap_tolerance


def _finish(obj: SimplexObjective, cfg: OptimConfig, w: np.ndarray, value: float, gap: float):
    """Newton finish from w; None when disabled or when it does not improve on (value, gap)."""
    if not cfg.polish_every:
        return None
    polished = _polish(obj, cfg, w)
    if not _improves(obj, polished[2], polished[3], value, gap):
        logger.debug("newton finish kept %s=%.12g gap=%.3e", obj.functional.value, value, gap)
        return None
    logger.debug("newton finish: %s=%.12g gap=%.3e on %d atoms", obj.functional.value, polished[2],
                 polished[3], int(np.count_nonzero(polished[0])))
    return polished


def _retrace(trace: list, obj: SimplexObjective, new_value: float, value: float) -> None:
    """A finish is not an iteration: it overwrites the last trace entry when it improves it."""
    if trace and obj.better(new_value, value):
        trace[-1] = new_value


def _improves(obj: SimplexObjective, new_value: float, new_gap: float, value: float, gap: float) -> bool:
    """Strictly better, or equal up to rounding with a smaller gap."""
    if obj.better(new_value, value):
        return True
    return abs(new_value - value) <= VALUE_SLACK * max(1.0, abs(value)) and new_gap < gap


_STEP_RULES = {
    StepRule.MULTIPLICATIVE: _multiplicative,
    StepRule.FRANK_WOLFE: _frank_wolfe,
}


def optimize(obj: SimplexObjective, cfg: OptimConfig) -> Tuple[GridPrior, OptimReport]:
    log_w = _initial_log_weights(obj, cfg)
    w, value, gap, it, step, trace = _STEP_RULES[cfg.step_rule](obj, cfg, log_w)
    gap = max(gap, 0.0)
    converged = gap <= cfg.gap_tolerance
    if not converged and it >= cfg.max_iterations:
        logger.warning("%s fit hit the iteration cap %d with gap %.3e", obj.functional.value, it, gap)
    logger.info(
        "%s fit on %d atoms: %s=%.12g gap=%.3e after %d iterations (%s)",
        obj.functional.value, len(obj.grid), obj.functional.value, value, gap, it, cfg.step_rule.value,
    )
    report = OptimReport(
        functional=obj.functional,
        iterations=it,
        objective_nats=value,
        gap_nats=gap,
        converged=converged,
        tolerance=cfg.gap_tolerance,
        step_rule=cfg.step_rule,
        step=step,
        trace=tuple(trace),
    )
    return GridPrior.normalized(obj.grid, w), report


def fit_lip(model: SufficientModel, grid: ParameterGrid, cfg: OptimConfig = OptimConfig()) -> Tuple[GridPrior, OptimReport]:
    """Latent information prior: the grid prior maximizing the conditional mutual information."""
    return optimize(SimplexObjective(Functional.CMI, model, grid), cfg)


def bayes_project(q: ConditionalTable, model: SufficientModel, grid: ParameterGrid,
                  cfg: OptimConfig = OptimConfig()) -> Tuple[GridPrior, OptimReport]:
    """Grid prior whose Bayes predictive is closest to q in the projection divergence D."""
    return optimize(SimplexObjective(Functional.D, model, grid, q), cfg)
