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
    check_rng,
    check_seed,
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
from .special import digamma, exponential_a4_value, log_minus_digamma
from .suite import SuiteSettings, families, run_suite, select
from .theorems import gaussian_theorem2_check, measured_cstar, projection_sums, theorem1_spread

__all__ = [
    "SuiteSettings",
    "check_rng",
    "check_seed",
    "digamma",
    "eval_f2",
    "eval_f2_derivative",
    "eval_fd",
    "exact_likelihood_ratio",
    "exact_multinomial_mle_mse",
    "exponential_a4_value",
    "exponential_mle_mse",
    "families",
    "gaussian_b1_value",
    "gaussian_cstar",
    "gaussian_theorem2_check",
    "log_minus_digamma",
    "mc_bias_term",
    "mc_exponential_mle_mse",
    "mc_likelihood_ratio",
    "mc_restricted_normal_mse",
    "mc_restricted_normal_normalizer",
    "measured_cstar",
    "multinomial_a4_bound",
    "multinomial_mle_mse",
    "projection_sums",
    "restricted_normal_a4_tail",
    "restricted_normal_cnml3_normalizer",
    "restricted_normal_mle_mse_bound",
    "run_suite",
    "select",
    "theorem1_spread",
    "weibull_b1_value",
]
