from dataclasses import dataclass
import logging
from threading import RLock
from typing import Any, Hashable, Optional

import numpy as np
from cachetools import LRUCache, cached
from scipy.integrate import quad
from scipy.special import logsumexp, roots_hermitenorm

# - own - #
from cnmllab.domain.errors import DegenerateRowError, DomainError
from cnmllab.domain.model import Outcomes, SufficientModel
from cnmllab.domain.tags import Family, RegretFlavor

logger = logging.getLogger(__name__)

LOG_2PI = float(np.log(2.0 * np.pi))
# node masses of the sampling density at centre and centre +- 2 sd must sum to 1 within this
RESOLUTION_TOL = 1e-8
RESOLUTION_SHIFTS = (-2.0, 0.0, 2.0)
# per-row integration range, in standard deviations of the widest piece
ROW_HALF_WIDTH = 14.0


@dataclass(frozen=True)
class GaussianLocationModel(SufficientModel):
    """
    N(theta, sigma2) with known variance, reduced to the sample mean.

    The mean of n draws is N(theta, sigma2/n); its range is replaced by
    Gauss-Hermite nodes centre + s_n z_i with Lebesgue log weights, so that
    sums over nodes play the role of the integrals. The scale is
    s_n = sqrt(kappa * sigma2 / n) with kappa = (N+M)/N: the sampling densities
    have variance sigma2/n while the CNML3 integrand in the future mean is
    wider by the factor (N+M)/N, and kappa sits at their geometric mean.
    At the default order 64 the sampling densities are resolved to ~1e-8 or
    better for (N+M)/N <= 3; building the nodes logs a warning when they are not.

    The plug-in code of a row far from the centre peaks where the shared future
    nodes are sparse, so the normalizers come from a per-row integral
    (plugin_row_log_normalizers) instead of the node sums.

    With clip = a the MLE is the sample mean clipped to [-a, a] (restricted
    mean) and the parameter interior is (-a, a).
    """
    N: int
    M: int
    sigma2: float = 1.0
    order: int = 64
    center: float = 0.0
    clip: Optional[float] = None
    family = Family.GAUSSIAN_LOCATION

    def __post_init__(self):
        self._check_sizes()
        if not self.sigma2 > 0:
            raise DomainError("sigma2 must be positive")
        if int(self.order) != self.order or self.order < 2:
            raise DomainError("quadrature order must be an integer >= 2")
        if self.clip is not None and not self.clip > 0:
            raise DomainError("clip bound must be positive")

    @property
    def kappa(self) -> float:
        if self.N == 0:
            return 2.0
        return (self.N + self.M) / self.N

    def node_scale(self, n: int) -> float:
        return float(np.sqrt(self.kappa * self.sigma2 / n))

    def _build_outcomes(self, n: int) -> Outcomes:
        if n == 0:
            return Outcomes(n=0, statistics=np.zeros(1), log_multiplicity=np.zeros(1), labels=(0.0,))
        z, w = roots_hermitenorm(self.order)
        if np.any(w <= 0):
            raise DomainError(f"quadrature order {self.order} underflows its outer weights")
        s = self.node_scale(n)
        nodes = self.center + s * z
        # w sums to sqrt(2 pi); w_i * s / (sqrt(2 pi) phi(z_i)) is the Lebesgue weight
        log_mult = np.log(w) + np.log(s) + 0.5 * z**2
        err = self._resolution_error(nodes, log_mult, n)
        if err > RESOLUTION_TOL:
            logger.warning(
                "quadrature order %d resolves the mean of %d draws only to %.1e at (N+M)/N = %.4g; raise the order",
                self.order, n, err, self.kappa,
            )
        return Outcomes(n=n, statistics=nodes, log_multiplicity=log_mult, labels=tuple(float(v) for v in nodes))

    def _resolution_error(self, nodes: np.ndarray, log_mult: np.ndarray, n: int) -> float:
        """Largest |1 - node mass| of the sampling density near the centre."""
        thetas = self.center + np.array(RESOLUTION_SHIFTS) * np.sqrt(self.sigma2 / n)
        log_mass = logsumexp(log_mult[None, :] + self._log_kernel(nodes[None, :], thetas[:, None], n), axis=1)
        return float(np.max(np.abs(np.expm1(log_mass))))

    def _log_kernel(self, stats, theta, n):
        if n == 0:
            return np.zeros(np.broadcast(stats, theta).shape)
        return -0.5 * (LOG_2PI + np.log(self.sigma2 / n)) - n * (stats - theta) ** 2 / (2.0 * self.sigma2)

    def _clip(self, theta):
        if self.clip is None:
            return theta
        return np.clip(theta, -self.clip, self.clip)

    def _pooled_mle(self, j_stats, k_stats):
        return self._clip((self.N * j_stats + self.M * k_stats) / float(self.N + self.M))

    def _single_mle(self, stats, n):
        return self._clip(np.asarray(stats, dtype=float))

    def _in_interior(self, theta):
        inside = np.isfinite(theta)
        if self.clip is not None:
            inside &= np.abs(theta) < self.clip
        return inside

    def _coerce_parameter(self, theta: Any) -> np.ndarray:
        t = np.asarray(theta, dtype=float)
        if t.ndim != 0:
            raise DomainError(f"gaussian location parameter must be a scalar, got {theta!r}")
        return t

    def _statistic_label(self, statistic: Any, n: int) -> Hashable:
        return float(statistic)

    # ---------- per-row normalizers ----------

    def _row_width(self, flavor: RegretFlavor) -> float:
        """Standard deviation, in the future mean, of a row's plug-in code without clipping."""
        N, M = self.N, self.M
        if flavor is RegretFlavor.FUTURE_ONLY:
            return float(np.sqrt(self.sigma2 / N))
        if flavor is RegretFlavor.JOINT:
            return float(np.sqrt(self.sigma2 * (N + M) / (N * M)))
        return float(np.sqrt(self.sigma2 / M) * (N + M) / N)

    def _row_log_code(self, flavor: RegretFlavor, x, k):
        """Plug-in log code at observed mean x and any future mean k, Lebesgue measure in k."""
        if flavor is RegretFlavor.FUTURE_ONLY:
            theta = self._single_mle(k, self.M)
            return self._log_kernel(x, theta, self.N) + self._log_kernel(k, theta, self.M)
        theta = self._pooled_mle(x, k)
        code = self._log_kernel(k, theta, self.M)
        if flavor is RegretFlavor.JOINT:
            code = code + self._log_kernel(x, theta, self.N)
        return code

    def _clipped_row_log_normalizer(self, flavor: RegretFlavor, x: float) -> float:
        a, N, M = self.clip, self.N, self.M
        if flavor is RegretFlavor.FUTURE_ONLY:
            bends = (-a, a)
        else:
            # where the pooled mean crosses -a and a
            bends = ((-(N + M) * a - N * x) / M, ((N + M) * a - N * x) / M)
        anchors = sorted({x, float(np.clip(x, -a, a)), *bends})
        half = ROW_HALF_WIDTH * max(self._row_width(flavor), float(np.sqrt(self.sigma2 / M)))
        peak = max(float(self._row_log_code(flavor, x, p)) for p in anchors)

        def integrand(k):
            return float(np.exp(self._row_log_code(flavor, x, k) - peak))

        value, _ = quad(integrand, anchors[0] - half, anchors[-1] + half, points=anchors,
                        epsabs=1e-14, epsrel=1e-12, limit=500)
        if not value > 0:
            raise DegenerateRowError(x)
        return peak + float(np.log(value))

    @cached(cache=LRUCache(maxsize=64), lock=RLock())
    def plugin_row_log_normalizers(self, flavor) -> Optional[np.ndarray]:
        """
        Without clipping a row's code is a gaussian in the future mean around
        the observed mean, so Hermite nodes centred there at its width are
        exact. Clipping bends it where the plug-in MLE hits -a or a; those rows
        are integrated adaptively with the bends as breakpoints. The N = 0 row
        keeps the node sum.
        """
        if self.N == 0:
            return None
        flavor = RegretFlavor.of(flavor)
        x = np.asarray(self.observed.statistics, dtype=float)
        if self.clip is None:
            z, w = roots_hermitenorm(self.order)
            tau = self._row_width(flavor)
            log_w = np.log(w) + np.log(tau) + 0.5 * z**2
            code = self._row_log_code(flavor, x[:, None], x[:, None] + tau * z[None, :])
            out = logsumexp(code + log_w[None, :], axis=1)
        else:
            out = np.array([self._clipped_row_log_normalizer(flavor, float(v)) for v in x])
        out.setflags(write=False)
        return out

    def to_json(self) -> dict:
        out = {"family": self.family.value, "N": self.N, "M": self.M, "sigma2": self.sigma2,
               "order": self.order, "center": self.center}
        if self.clip is not None:
            out["clip"] = self.clip
        return out
