from .bayes import bayes_predictive, mixture_log_joint
from .cnml import (
    cnml1,
    cnml2,
    cnml3,
    cnml3_log_normalizer,
    cnml3_log_normalizers,
    nml,
    plugin_log_code,
    regret,
    regret_table,
)

__all__ = [
    "bayes_predictive",
    "cnml1",
    "cnml2",
    "cnml3",
    "cnml3_log_normalizer",
    "cnml3_log_normalizers",
    "mixture_log_joint",
    "nml",
    "plugin_log_code",
    "regret",
    "regret_table",
]
