from cnmllab.predictors.cnml import regret, regret_table
from .info_measures import (
    Cnml3Decomposition,
    atom_risks,
    bayes_atom_risks,
    bias_term,
    cnml3_decomposition,
    conditional_mutual_information,
    expected_log_ratio,
    kl_risk,
    mutual_information,
    projection_divergence,
    risk_curve,
)

__all__ = [
    "Cnml3Decomposition",
    "atom_risks",
    "bayes_atom_risks",
    "bias_term",
    "cnml3_decomposition",
    "conditional_mutual_information",
    "expected_log_ratio",
    "kl_risk",
    "mutual_information",
    "projection_divergence",
    "regret",
    "regret_table",
    "risk_curve",
]
