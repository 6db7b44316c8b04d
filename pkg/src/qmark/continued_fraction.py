from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Tuple

from mpmath import mpf

from src.numerics.precision import working_precision, mpf_to_fraction
from src.qmark.models import LazyReal, RealInput
from src.utils.constants import GUARD_BITS, SERIES_CUTOFF_BITS
from src.utils.exceptions import DomainError, PrecisionLossError, ValidationError


@dataclass(frozen=True)
class ContinuedFraction:
    quotients: Tuple[int, ...]

    def __post_init__(self):
        if not self.quotients:
            raise ValidationError("a continued fraction needs at least one quotient")
        if self.quotients[0] < 0 or any(a < 1 for a in self.quotients[1:]):
            raise ValidationError(f"invalid partial quotients {list(self.quotients)}")

    def canonical(self) -> "ContinuedFraction":
        quotients = list(self.quotients)
        if len(quotients) > 1 and quotients[-1] == 1:
            quotients.pop()
            quotients[-1] += 1
        return ContinuedFraction(tuple(quotients))

    def digit_sum(self) -> int:
        return sum(self.quotients)

    def to_rational(self) -> Fraction:
        return cf_to_rational(self)

    def __str__(self):
        head, tail = self.quotients[0], self.quotients[1:]
        if not tail:
            return f"[{head}]"
        return f"[{head};{','.join(str(a) for a in tail)}]"


def cf_of_rational(x) -> ContinuedFraction:
    x = Fraction(x)
    if x < 0:
        raise DomainError(f"cf_of_rational needs x >= 0, got {x}")
    quotients = []
    num, den = x.numerator, x.denominator
    while den:
        a, rem = divmod(num, den)
        quotients.append(a)
        num, den = den, rem
    return ContinuedFraction(tuple(quotients))


def cf_to_rational(cf) -> Fraction:
    quotients = cf.quotients if isinstance(cf, ContinuedFraction) else tuple(cf)
    value = Fraction(quotients[-1])
    for a in reversed(quotients[:-1]):
        value = a + 1 / value
    return value


def stable_bits(prec: int) -> int:
    # all-ones digits grow denominators fastest per unit of digit sum: q^2 ~ 2^(1.39 S)
    return (139 * (prec + SERIES_CUTOFF_BITS + 2)) // 100 + GUARD_BITS


def _digits_until(x: Fraction, prec: int, known_bits: Optional[int]) -> Tuple[List[int], bool]:
    target = prec + SERIES_CUTOFF_BITS
    digits, total = [], 0
    q_prev, q = 1, 0
    num, den = x.numerator, x.denominator
    while den and total <= target:
        a, rem = divmod(num, den)
        digits.append(a)
        total += a
        q_prev, q = q, a * q + q_prev
        if known_bits is not None and rem and 2 * q.bit_length() > known_bits - 4 and total <= target:
            raise PrecisionLossError(
                f"continued fraction digits beyond {len(digits)} are not determined by {known_bits} bits",
                required_bits=stable_bits(prec),
            )
        num, den = den, rem
    return digits, den == 0


def cf_of_real(x: RealInput, prec: int, known_bits: Optional[int] = None) -> Tuple[List[int], bool]:
    """Leading partial quotients of ``x`` until their sum passes ``prec + 8``.

    Returns the digits and whether they expand ``x`` exactly. Rationals, floats
    and mpf values are exact dyadics unless ``known_bits`` marks them as
    approximations; a LazyReal is evaluated at enough bits to fix every digit.
    """
    if isinstance(x, LazyReal):
        bits = stable_bits(prec)
        return _digits_until(mpf_to_fraction(x.at(bits)), prec, bits)
    if isinstance(x, (int, Fraction, float)):
        value = Fraction(x)
    elif isinstance(x, str):
        value = Fraction(x)
    else:
        value = mpf_to_fraction(x if isinstance(x, mpf) else mpf(x))
    if value < 0:
        raise DomainError(f"continued fraction expansion needs x >= 0, got {value}")
    return _digits_until(value, prec, known_bits)


def real_to_mpf(x: RealInput, prec: int) -> mpf:
    if isinstance(x, LazyReal):
        return x.at(prec)
    with working_precision(prec):
        if isinstance(x, Fraction):
            return mpf(x.numerator) / x.denominator
        return +mpf(x)
