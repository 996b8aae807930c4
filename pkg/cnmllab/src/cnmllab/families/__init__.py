from typing import Any, Dict

# - own - #
from cnmllab.domain.errors import ConfigError
from cnmllab.domain.model import SufficientModel
from cnmllab.domain.tags import Family
from .binomial import BinomialModel
from .gaussian_location import GaussianLocationModel
from .multinomial import MultinomialModel, count_vectors

__all__ = [
    "BinomialModel",
    "GaussianLocationModel",
    "MultinomialModel",
    "count_vectors",
    "model_from_json",
]


def model_from_json(spec: Dict[str, Any]) -> SufficientModel:
    """Build a model from its JSON form ({"family": ..., "N": ..., "M": ..., family fields})."""
    try:
        family = Family(spec["family"])
        N, M = int(spec["N"]), int(spec["M"])
    except (KeyError, ValueError, TypeError) as e:
        raise ConfigError(f"invalid model spec {spec!r}: {e}") from e

    if family is Family.BINOMIAL:
        return BinomialModel(N=N, M=M)
    if family is Family.MULTINOMIAL:
        if "d" not in spec:
            raise ConfigError("multinomial model needs 'd'")
        return MultinomialModel(d=int(spec["d"]), N=N, M=M)
    return GaussianLocationModel(
        N=N,
        M=M,
        sigma2=float(spec.get("sigma2", 1.0)),
        order=int(spec.get("order", 64)),
        center=float(spec.get("center", 0.0)),
        clip=None if spec.get("clip") is None else float(spec["clip"]),
    )
