"""
Named verification suite.

Checks are grouped into families (the name prefix before the first dot).
Each check owns a Philox stream seeded from (global seed, check name), so
results do not depend on which checks run or in which order.
"""
from __future__ import annotations
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
import logging
import math
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

# - own - #
from cnmllab.domain.errors import ConfigError
from cnmllab.domain.grid import GridPrior, ParameterGrid
from cnmllab.domain.reports import CheckReport
from cnmllab.families.binomial import BinomialModel
from cnmllab.families.gaussian_location import GaussianLocationModel
from cnmllab.families.multinomial import MultinomialModel
from cnmllab.measures.info_measures import bias_term, cnml3_decomposition, projection_divergence
from cnmllab.predictors.cnml import cnml3, cnml3_log_normalizers
from .constants import (
    exact_likelihood_ratio,
    exact_multinomial_mle_mse,
    exponential_mle_mse,
    gaussian_b1_value,
    gaussian_cstar,
    multinomial_a4_bound,
    multinomial_mle_mse,
    weibull_b1_value,
)
from .montecarlo import (
    DEFAULT_SAMPLES,
    check_rng,
    mc_bias_term,
    mc_exponential_mle_mse,
    mc_likelihood_ratio,
    mc_restricted_normal_mse,
)
from .polynomials import eval_f2, eval_f2_derivative, eval_fd
from .restricted_normal import (
    mc_restricted_normal_normalizer,
    restricted_normal_a4_tail,
    restricted_normal_cnml3_normalizer,
    restricted_normal_mle_mse_bound,
)
from .special import EULER_GAMMA, digamma, exponential_a4_value
from .theorems import gaussian_theorem2_check, measured_cstar, theorem1_spread

logger = logging.getLogger(__name__)

SE_MULTIPLIER = 3.0


@dataclass(frozen=True)
class SuiteSettings:
    seed: int = 0
    samples: int = DEFAULT_SAMPLES
    tolerances: Mapping[str, float] = field(default_factory=dict)

    def tolerance(self, name: str, default: float) -> float:
        return float(self.tolerances.get(name, default))

    def rng(self, name: str) -> Tuple[np.random.Generator, int]:
        return check_rng(name, self.seed)


@dataclass(frozen=True)
class Check:
    name: str
    run: Callable[[SuiteSettings], List[CheckReport]] = field(repr=False)

    @property
    def family(self) -> str:
        return self.name.split(".", 1)[0]


def _mc_within(s: SuiteSettings, name: str, estimate: Tuple[float, float], reference: float, seed: int,
               extra: str = "") -> CheckReport:
    est, se = estimate
    tol = s.tolerance(name, SE_MULTIPLIER * se)
    detail = f"MC {s.samples} samples, SE {se:.3e}" + (f"; {extra}" if extra else "")
    return CheckReport.within(name, est, reference, tol, detail=detail, seed=seed)


# ---------- special ----------

def _digamma_one(s):
    name = "special.digamma_one"
    return [CheckReport.within(name, digamma(1.0), -0.5772156649015329, s.tolerance(name, 1e-12))]


def _digamma_two(s):
    name = "special.digamma_two"
    return [CheckReport.within(name, digamma(2.0), 1.0 - EULER_GAMMA, s.tolerance(name, 1e-12))]


def _digamma_recurrence(s):
    name = "special.digamma_recurrence"
    rng, seed = s.rng(name)
    xs = rng.uniform(0.5, 1e3, size=200)
    worst = max(abs(digamma(x + 1.0) - digamma(x) - 1.0 / x) for x in xs)
    return [CheckReport.within(name, worst, 0.0, s.tolerance(name, 1e-12), detail="200 uniform x in [0.5, 1000]", seed=seed)]


# ---------- examples: exponential remainder and bias-term constants ----------

def _exponential_a4_k1(s):
    name = "examples.exponential_a4_k1"
    return [CheckReport.within(name, exponential_a4_value(1), EULER_GAMMA, s.tolerance(name, 1e-12))]


def _exponential_a4_asymptotic(s):
    name = "examples.exponential_a4_asymptotic"
    worst = max(abs(exponential_a4_value(k) - 0.5 - 1.0 / (12 * k)) * k * k for k in range(10, 101))
    return [CheckReport.below(name, worst, 1.0, s.tolerance(name, 0.0),
                              detail="max over k=10..100 of k^2 |value - 1/2 - 1/(12k)|")]


def _exponential_a4_monotone(s):
    name = "examples.exponential_a4_monotone"
    values = np.array([exponential_a4_value(k) for k in range(2, 201)])
    steepest = float(np.max(np.diff(values)))
    ok = steepest < 0 and values[-1] > 0.5
    return [CheckReport(name, steepest, 0.0, 0.0, bool(ok), detail=f"value(200) - 1/2 = {values[-1] - 0.5:.3e}")]


def _gaussian_b1(N, M, d=1):
    def run(s):
        name = f"examples.gaussian_b1.N{N}M{M}" + (f"d{d}" if d > 1 else "")
        rng, seed = s.rng(name)
        est = mc_bias_term("gaussian", 0.3, N, M, s.samples, rng, d=d)
        return [_mc_within(s, name, est, gaussian_b1_value(N, M, d), seed)]
    return run


def _weibull_b1(shape):
    def run(s):
        name = f"examples.weibull_b1.k{shape}"
        rng, seed = s.rng(name)
        est = mc_bias_term("weibull", 1.0, 2, 5, s.samples, rng, shape=shape)
        return [_mc_within(s, name, est, weibull_b1_value(2, 5), seed)]
    return run


def _exponential_b1_no_observations(s):
    name = "examples.exponential_b1_N0"
    rng, seed = s.rng(name)
    est = mc_bias_term("exponential", 1.0, 0, 4, s.samples, rng)
    return [_mc_within(s, name, est, -exponential_a4_value(4), seed)]


def _gaussian_bias_quadrature(s):
    name = "examples.gaussian_bias_quadrature"
    model = GaussianLocationModel(N=2, M=4)
    worst = max(abs(bias_term(model, theta) - gaussian_b1_value(2, 4)) for theta in (-0.7, 0.0, 0.4))
    return [CheckReport.within(name, worst, 0.0, s.tolerance(name, 1e-7), detail="quadrature order 64, theta in {-0.7, 0, 0.4}")]


def _exponential_mse(s):
    name = "examples.exponential_mle_mse"
    rng, seed = s.rng(name)
    est = mc_exponential_mle_mse(10, 2.0, s.samples, rng)
    return [_mc_within(s, name, est, exponential_mle_mse(10, 2.0), seed, extra="k=10, rate 2")]


# ---------- lemma3: multinomial likelihood ratio ----------

LEMMA3_CASES = (((0.1,), 100), ((0.05,), 10), ((0.1, 0.1), 200))


def _lemma3_case(theta, n):
    def run(s):
        label = "_".join(f"{t:g}" for t in theta)
        name = f"lemma3.likelihood_ratio.p{label}_n{n}"
        rng, seed = s.rng(name)
        d = len(theta)
        est, se = mc_likelihood_ratio("multinomial", theta, n, s.samples, rng)
        exact = exact_likelihood_ratio(theta, n)
        bound = multinomial_a4_bound(theta, n)
        return [
            CheckReport.below(name, abs(est - d / 2.0), bound, s.tolerance(name, SE_MULTIPLIER * se),
                              detail=f"MC E G_n {est:.6g} (SE {se:.2e}), exact {exact:.10g}", seed=seed),
            CheckReport.below(f"{name}.exact", abs(exact - d / 2.0), bound, s.tolerance(f"{name}.exact", 0.0),
                              detail="exact enumeration of count vectors"),
        ]
    return run


def _lemma3_mse(s):
    name = "lemma3.mle_mse"
    theta, n = (0.2, 0.3), 12
    return [CheckReport.within(name, exact_multinomial_mle_mse(theta, n), multinomial_mle_mse(theta, n),
                               s.tolerance(name, 1e-12), detail="theta=(0.2, 0.3), n=12")]


# ---------- lemma4: CNML3 normalizer of multinomials ----------

A_VALUES = (Fraction(0), Fraction(1), Fraction(5), Fraction(-2), Fraction(1, 2))
T_VALUES = (Fraction(0), Fraction(1), Fraction(10), Fraction(-3), Fraction(1, 3))
T_VECTORS = ((0, 0), (1, 2), (Fraction(1, 2), Fraction(1, 3)), (10, -3), (-3, Fraction(1, 3)))


def _f2_constancy(s):
    name = "lemma4.f2_constancy"
    bad = sum(
        len({eval_f2(M, a, t) for t in T_VALUES}) != 1
        for M in range(0, 21) for a in A_VALUES
    )
    return [CheckReport.within(name, bad, 0, s.tolerance(name, 0.0), detail="exact rationals, M<=20")]


def _fd_constancy(s):
    name = "lemma4.fd_constancy"
    bad = sum(
        len({eval_fd(2, M, a, t) for t in T_VECTORS}) != 1
        for M in range(0, 9) for a in A_VALUES
    )
    return [CheckReport.within(name, bad, 0, s.tolerance(name, 0.0), detail="exact rationals, d=2, M<=8")]


def _f2_recursion(s):
    name = "lemma4.f2_recursion"
    bad = 0
    for m in range(0, 7):
        for a in A_VALUES:
            for t in T_VALUES:
                lhs = eval_f2_derivative(m + 1, a, t)
                rhs = (m + 1) * (eval_f2(m, a + 1, t + 1) - eval_f2(m, a + 1, t))
                bad += lhs != rhs or lhs != 0
    return [CheckReport.within(name, bad, 0, s.tolerance(name, 0.0), detail="exact derivative, m<=6")]


def _binomial_normalizer(s):
    name = "lemma4.binomial_normalizer"
    worst = 0.0
    for N in range(1, 6):
        for M in range(1, 13):
            log_z = cnml3_log_normalizers(BinomialModel(N=N, M=M))
            for j in range(N + 1):
                exact = float(eval_f2(M, N, j) / Fraction(M + N) ** M)
                worst = max(worst, abs(math.exp(log_z[j]) - exact) / exact)
    return [CheckReport.within(name, worst, 0.0, s.tolerance(name, 1e-10), detail="relative error, N<=5, M<=12")]


def _multinomial_normalizer(s):
    name = "lemma4.multinomial_normalizer"
    worst, spread = 0.0, 0.0
    for N in range(1, 4):
        for M in range(1, 7):
            model = MultinomialModel(d=2, N=N, M=M)
            log_z = cnml3_log_normalizers(model)
            spread = max(spread, float(log_z.max() - log_z.min()))
            for row, counts in enumerate(model.observed.labels):
                exact = float(eval_fd(2, M, N, counts[:2]) / Fraction(M + N) ** M)
                worst = max(worst, abs(math.exp(log_z[row]) - exact) / exact)
    return [
        CheckReport.within(name, worst, 0.0, s.tolerance(name, 1e-10), detail="relative error, d=2, N<=3, M<=6"),
        CheckReport.within(f"{name}.constancy", spread, 0.0, s.tolerance(f"{name}.constancy", 1e-10),
                           detail="max spread of log Z over observed counts"),
    ]


# ---------- lemma5: restricted normal, likelihood ratio and MSE ----------

LEMMA5 = dict(a=2.0, b=1.0, delta=0.5, theta=1.0)


def _lemma5_tail(k):
    def run(s):
        name = f"lemma5.tail_bound.k{k}"
        rng, seed = s.rng(name)
        est, se = mc_likelihood_ratio("restricted_normal", LEMMA5["theta"], k, s.samples, rng, clip=LEMMA5["a"])
        bound = restricted_normal_a4_tail(k, **LEMMA5)
        return [CheckReport.below(name, abs(est - 0.5), bound, s.tolerance(name, SE_MULTIPLIER * se),
                                  detail=f"MC E G_k {est:.6g} (SE {se:.2e}), a=2 b=1 delta=0.5 theta=1", seed=seed)]
    return run


def _lemma5_decreasing(s):
    name = "lemma5.tail_decreasing"
    bounds = [restricted_normal_a4_tail(k, **LEMMA5) for k in (4, 16, 64)]
    steepest = max(b - a for a, b in zip(bounds, bounds[1:]))
    return [CheckReport(name, steepest, 0.0, 0.0, steepest < 0, detail=f"bounds at k=4,16,64: {bounds}")]


def _lemma5_mse(s):
    name = "lemma5.mle_mse"
    rng, seed = s.rng(name)
    est, se = mc_restricted_normal_mse(16, 2.0, 1.0, s.samples, rng)
    bound = restricted_normal_mle_mse_bound(16, 2.0, 1.0)
    return [CheckReport.below(name, est, bound, s.tolerance(name, SE_MULTIPLIER * se),
                              detail=f"k=16 a=2 b=1 theta=1, SE {se:.2e}", seed=seed)]


# ---------- lemma6: restricted normal CNML3 normalizer ----------

def _lemma6_normalizer(s):
    name = "lemma6.normalizer"
    rng, seed = s.rng(name)
    est = mc_restricted_normal_normalizer(1, 4, 1.0, 0.5, s.samples, rng)
    closed = restricted_normal_cnml3_normalizer(1, 4, 1.0, 0.5).value
    return [_mc_within(s, name, est, closed, seed, extra="N=1 M=4 a=1 u=0.5")]


def _lemma6_deviation(M):
    def run(s):
        name = f"lemma6.deviation.M{M}"
        rng, seed = s.rng(name)
        u = 0.5
        z_u, se = mc_restricted_normal_normalizer(1, M, 1.0, u, s.samples, rng)
        z_0 = restricted_normal_cnml3_normalizer(1, M, 1.0, 0.0).value
        bound = restricted_normal_cnml3_normalizer(1, M, 1.0, u).deviation_bound
        # delta method: SE of log Z(u)
        tol = s.tolerance(name, SE_MULTIPLIER * se / z_u)
        return [CheckReport.below(name, abs(math.log(z_u) - math.log(z_0)), bound, tol,
                                  detail=f"N=1 a=1 u={u}, MC Z(u) {z_u:.6g} (SE {se:.2e})", seed=seed)]
    return run


def _lemma6_decreasing(s):
    name = "lemma6.deviation_decreasing"
    bounds = [restricted_normal_cnml3_normalizer(1, M, 1.0, 0.5).deviation_bound for M in (4, 16, 64)]
    steepest = max(b - a for a, b in zip(bounds, bounds[1:]))
    return [CheckReport(name, steepest, 0.0, 0.0, steepest < 0, detail=f"bounds at M=4,16,64: {bounds}")]


# ---------- theorem1 / theorem2 ----------

THEOREM1_M = (10, 100, 500)
THEOREM1_RATIO = 0.2


def reproduction_grid() -> ParameterGrid:
    return ParameterGrid.from_step(0.1, 0.008, 101)


def theorem1_priors(grid: ParameterGrid, rng: np.random.Generator, random_count: int = 20) -> List[GridPrior]:
    priors = [GridPrior.random(grid, rng) for _ in range(random_count)]
    for idx in np.linspace(0, len(grid) - 1, 5).round().astype(int):
        priors.append(GridPrior.point_mass(grid, int(idx)))
    return priors


def _theorem1(s):
    name = "theorem1.spread"
    rng, seed = s.rng(name)
    grid = reproduction_grid()
    reports = theorem1_spread(BinomialModel(N=1, M=THEOREM1_M[0]), grid, theorem1_priors(grid, rng), THEOREM1_M, name=name)
    reports = [CheckReport(r.name, r.statistic, r.reference, r.tolerance, r.passed, r.detail, seed) for r in reports]
    ratio = reports[-1].statistic / reports[0].statistic
    reports.append(CheckReport.below(f"{name}.ratio", ratio, THEOREM1_RATIO, s.tolerance(f"{name}.ratio", 0.0),
                                     detail=f"spread(M={THEOREM1_M[-1]}) / spread(M={THEOREM1_M[0]})", seed=seed))
    return reports


def _theorem1_decomposition(s):
    name = "theorem1.decomposition"
    rng, seed = s.rng(name)
    model = BinomialModel(N=1, M=10)
    grid = reproduction_grid()
    worst = 0.0
    for _ in range(5):
        prior = GridPrior.random(grid, rng)
        d = projection_divergence(prior, cnml3(model), model)
        worst = max(worst, abs(d - cnml3_decomposition(prior, model).total))
    return [CheckReport.within(name, worst, 0.0, s.tolerance(name, 1e-10), detail="5 random priors, N=1 M=10", seed=seed)]


THEOREM2_GRID = ParameterGrid.from_atoms((-1.0, 0.0, 1.0))


def theorem2_priors() -> List[GridPrior]:
    return [
        GridPrior.uniform(THEOREM2_GRID),
        GridPrior.point_mass(THEOREM2_GRID, 1),
        GridPrior(THEOREM2_GRID, np.array([0.2, 0.5, 0.3])),
    ]


def _theorem2(s):
    name = "theorem2.constancy"
    report = gaussian_theorem2_check(THEOREM2_GRID, 1, 2, theorem2_priors(), name=name)
    tol = s.tolerance(name, report.tolerance)
    return [CheckReport.within(name, report.statistic, 0.0, tol, detail=report.detail)]


def _theorem2_cstar(s):
    name = "theorem2.cstar"
    measured = measured_cstar(THEOREM2_GRID, 1, 2, theorem2_priors())
    return [CheckReport.within(name, measured, gaussian_cstar(1, 2), s.tolerance(name, 1e-6),
                               detail="N=1 M=2 sigma2=1, closed form log 3 - 1/3")]


CHECKS: Tuple[Check, ...] = (
    Check("special.digamma_one", _digamma_one),
    Check("special.digamma_two", _digamma_two),
    Check("special.digamma_recurrence", _digamma_recurrence),
    Check("examples.exponential_a4_k1", _exponential_a4_k1),
    Check("examples.exponential_a4_asymptotic", _exponential_a4_asymptotic),
    Check("examples.exponential_a4_monotone", _exponential_a4_monotone),
    Check("examples.gaussian_b1.N1M1", _gaussian_b1(1, 1)),
    Check("examples.gaussian_b1.N3M7", _gaussian_b1(3, 7)),
    Check("examples.gaussian_b1.N2M3d2", _gaussian_b1(2, 3, d=2)),
    Check("examples.weibull_b1.k1", _weibull_b1(1)),
    Check("examples.weibull_b1.k2", _weibull_b1(2)),
    Check("examples.exponential_b1_N0", _exponential_b1_no_observations),
    Check("examples.gaussian_bias_quadrature", _gaussian_bias_quadrature),
    Check("examples.exponential_mle_mse", _exponential_mse),
    *(Check("lemma3.likelihood_ratio.p{}_n{}".format("_".join(f"{t:g}" for t in th), n), _lemma3_case(th, n))
      for th, n in LEMMA3_CASES),
    Check("lemma3.mle_mse", _lemma3_mse),
    Check("lemma4.f2_constancy", _f2_constancy),
    Check("lemma4.fd_constancy", _fd_constancy),
    Check("lemma4.f2_recursion", _f2_recursion),
    Check("lemma4.binomial_normalizer", _binomial_normalizer),
    Check("lemma4.multinomial_normalizer", _multinomial_normalizer),
    *(Check(f"lemma5.tail_bound.k{k}", _lemma5_tail(k)) for k in (4, 16, 64)),
    Check("lemma5.tail_decreasing", _lemma5_decreasing),
    Check("lemma5.mle_mse", _lemma5_mse),
    Check("lemma6.normalizer", _lemma6_normalizer),
    *(Check(f"lemma6.deviation.M{M}", _lemma6_deviation(M)) for M in (4, 16, 64)),
    Check("lemma6.deviation_decreasing", _lemma6_decreasing),
    Check("theorem1.spread", _theorem1),
    Check("theorem1.decomposition", _theorem1_decomposition),
    Check("theorem2.constancy", _theorem2),
    Check("theorem2.cstar", _theorem2_cstar),
)


def families() -> Tuple[str, ...]:
    return tuple(dict.fromkeys(c.family for c in CHECKS))


def select(only: Optional[Sequence[str]] = None) -> List[Check]:
    """Checks whose family or exact name is in only; all of them when only is empty."""
    if not only:
        return list(CHECKS)
    names = {c.name for c in CHECKS}
    unknown = [o for o in only if o not in names and o not in families()]
    if unknown:
        raise ConfigError(f"unknown checks {unknown}; families are {list(families())}")
    wanted = set(only)
    return [c for c in CHECKS if c.name in wanted or c.family in wanted]


def run_suite(settings: SuiteSettings = SuiteSettings(), only: Optional[Sequence[str]] = None, *,
              max_workers: int = 4, progress: bool = False) -> List[CheckReport]:
    """Run the selected checks concurrently; reports come back in registration order."""
    checks = select(only)
    results: Dict[int, List[CheckReport]] = {}
    with ThreadPoolExecutor(max_workers=max_workers) as ex:
        futs = {ex.submit(c.run, settings): i for i, c in enumerate(checks)}
        with tqdm(total=len(checks), desc="verify", unit="check", disable=not progress) as bar:
            for fut, i in futs.items():
                results[i] = fut.result()
                bar.update(1)
    reports = [r for i in range(len(checks)) for r in results[i]]
    failed = [r.name for r in reports if not r.passed]
    if failed:
        logger.warning("%d of %d checks failed: %s", len(failed), len(reports), ", ".join(failed))
    else:
        logger.info("all %d checks passed", len(reports))
    return reports
