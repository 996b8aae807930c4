import enum
from functools import total_ordering


class Family(enum.Enum):
    BINOMIAL = "binomial"
    MULTINOMIAL = "multinomial"
    GAUSSIAN_LOCATION = "gaussian_location"


class StepRule(enum.Enum):
    MULTIPLICATIVE = "multiplicative"
    FRANK_WOLFE = "frank_wolfe"


class Functional(enum.Enum):
    """Objective over the prior simplex."""
    CMI = "cmi"  # maximized: latent information prior
    D = "d"      # minimized: Bayes projection

    @property
    def maximize(self) -> bool:
        return self is Functional.CMI


@total_ordering
class RegretFlavor(enum.Enum):
    """
    Which plug-in code length the conditional regret subtracts.
    FUTURE_ONLY uses the MLE of y^M alone, JOINT uses the pooled MLE in the
    joint likelihood, FUTURE_MARGINAL uses the pooled MLE in the future likelihood.
    """
    FUTURE_ONLY = 1
    JOINT = 2
    FUTURE_MARGINAL = 3

    @classmethod
    def of(cls, flavor) -> "RegretFlavor":
        if isinstance(flavor, RegretFlavor):
            return flavor
        return cls(int(flavor))

    def __lt__(self, other):
        if not isinstance(other, RegretFlavor):
            return NotImplemented
        return self.value < other.value
