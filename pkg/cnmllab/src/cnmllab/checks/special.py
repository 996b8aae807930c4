import math

# - own - #
from cnmllab.domain.errors import DomainError

EULER_GAMMA = 0.57721566490153286061
ASYMPTOTIC_FROM = 8.0

# B_2n / (2n) for n = 1..7
_SERIES = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)


def _tail(x: float) -> float:
    """log x - psi(x) - 1/(2x) for x >= ASYMPTOTIC_FROM, Horner in 1/x^2."""
    r = 1.0 / (x * x)
    acc = 0.0
    for c in reversed(_SERIES):
        acc = acc * r + c
    return acc * r


def _shift(x: float):
    """Upward recurrence: returns (x + m, sum_{i<m} 1/(x+i)) with x + m >= ASYMPTOTIC_FROM."""
    harmonic = 0.0
    while x < ASYMPTOTIC_FROM:
        harmonic += 1.0 / x
        x += 1.0
    return x, harmonic


def digamma(x: float) -> float:
    """psi(x) = d/dx log Gamma(x) for x > 0."""
    x = float(x)
    if not x > 0 or not math.isfinite(x):
        raise DomainError(f"digamma needs a finite x > 0, got {x!r}")
    y, harmonic = _shift(x)
    return math.log(y) - 0.5 / y - _tail(y) - harmonic


def log_minus_digamma(x: float) -> float:
    """log x - psi(x), without the cancellation of subtracting two large numbers."""
    x = float(x)
    if not x > 0 or not math.isfinite(x):
        raise DomainError(f"log_minus_digamma needs a finite x > 0, got {x!r}")
    y, harmonic = _shift(x)
    return math.log(x / y) + 0.5 / y + _tail(y) + harmonic


def exponential_a4_value(k: int) -> float:
    """k (log k - psi(k)); tends to 1/2 from above."""
    if int(k) != k or k < 1:
        raise DomainError(f"k must be a positive integer, got {k!r}")
    return k * log_minus_digamma(k)
