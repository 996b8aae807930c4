"""
Exact rational evaluation of the polynomials behind the CNML3 normalizer of
(d+1)-nomial models. With a = N and t the explicit observed counts,
f(M, a, t) / (N + M)^M is the normalizer; it does not depend on t.
"""
from fractions import Fraction
from math import comb, factorial, prod
from typing import Sequence, Union

# - own - #
from cnmllab.domain.errors import CapacityError, DomainError
from cnmllab.families.multinomial import count_vectors

Rational = Union[int, Fraction, str]

DEFAULT_MAX_TERMS = 1_000_000


def _q(v: Rational) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(v)


def _check_order(M: int):
    if int(M) != M or M < 0:
        raise DomainError(f"M must be a non-negative integer, got {M!r}")


def eval_f2(M: int, a: Rational, t: Rational) -> Fraction:
    """sum_i C(M, i) (t+i)^i (M+a-t-i)^(M-i); 0^0 = 1, so M = 0 gives 1."""
    _check_order(M)
    a, t = _q(a), _q(t)
    return sum((comb(M, i) * (t + i) ** i * (M + a - t - i) ** (M - i) for i in range(M + 1)), Fraction(0))


def eval_f2_derivative(M: int, a: Rational, t: Rational) -> Fraction:
    """d/dt of eval_f2, differentiated term by term."""
    _check_order(M)
    a, t = _q(a), _q(t)
    total = Fraction(0)
    for i in range(M + 1):
        u, v = t + i, M + a - t - i
        if i > 0:
            total += comb(M, i) * i * u ** (i - 1) * v ** (M - i)
        if i < M:
            total -= comb(M, i) * (M - i) * u ** i * v ** (M - i - 1)
    return total


def eval_fd(d: int, M: int, a: Rational, t: Sequence[Rational], max_terms: int = DEFAULT_MAX_TERMS) -> Fraction:
    """
    The d-variable analogue: sum over i_1..i_d >= 0 with sum <= M of
    multinomial(M; i, M - sum i) prod (t_l + i_l)^(i_l) (M + a - sum (t_l + i_l))^(M - sum i).
    d = 1 reduces to eval_f2.
    """
    _check_order(M)
    if int(d) != d or d < 1:
        raise DomainError(f"d must be a positive integer, got {d!r}")
    if len(t) != d:
        raise DomainError(f"need {d} values of t, got {len(t)}")
    terms = comb(M + d, d)
    if terms > max_terms:
        raise CapacityError(f"f^({d + 1}) with M={M}", terms, max_terms)

    a, t = _q(a), [_q(v) for v in t]
    m_fact = factorial(M)
    total = Fraction(0)
    for counts in count_vectors(M, d):
        idx, rest = counts[:d], counts[d]
        coef = m_fact // (factorial(rest) * prod(factorial(i) for i in idx))
        term = Fraction(coef)
        shift = Fraction(0)
        for tl, il in zip(t, idx):
            term *= (tl + il) ** il
            shift += tl + il
        total += term * (M + a - shift) ** rest
    return total
