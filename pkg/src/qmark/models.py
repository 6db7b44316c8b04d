from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Union

from mpmath import mp, mpf

from src.numerics.precision import working_precision
from src.utils.exceptions import ValidationError


@dataclass(frozen=True)
class DyadicValue:
    numerator: int
    exponent: int

    def __post_init__(self):
        if self.exponent < 0 or not 0 <= self.numerator <= 2 ** self.exponent:
            raise ValidationError(f"{self.numerator}/2^{self.exponent} is not a dyadic value in [0, 1]")

    @classmethod
    def from_parts(cls, numerator: int, exponent: int) -> "DyadicValue":
        if numerator == 0:
            return cls(0, 0)
        while numerator % 2 == 0 and exponent > 0:
            numerator //= 2
            exponent -= 1
        return cls(numerator, exponent)

    @classmethod
    def from_fraction(cls, value: Fraction) -> "DyadicValue":
        value = Fraction(value)
        exponent = value.denominator.bit_length() - 1
        if value.denominator != 1 << exponent:
            raise ValidationError(f"{value} is not dyadic")
        return cls.from_parts(value.numerator, exponent)

    def doubled(self) -> "DyadicValue":
        if self.exponent == 0:
            return DyadicValue.from_parts(2 * self.numerator, 0)
        return DyadicValue.from_parts(self.numerator, self.exponent - 1)

    def to_fraction(self) -> Fraction:
        return Fraction(self.numerator, 1 << self.exponent)

    def to_mpf(self, prec: int) -> mpf:
        with working_precision(prec):
            return mp.ldexp(mpf(self.numerator), -self.exponent)

    def __str__(self):
        if self.exponent == 0:
            return str(self.numerator)
        return f"{self.numerator}/2^{self.exponent}"


@dataclass(frozen=True)
class LazyReal:
    """A real known by a rule that yields it at whatever precision is active."""
    name: str
    evaluate: Callable[[], mpf]

    def at(self, prec: int) -> mpf:
        with working_precision(prec):
            return +self.evaluate()

    def __str__(self):
        return self.name


NAMED_REALS = {
    "golden": LazyReal("golden", lambda: mp.phi),
    "golden_conjugate": LazyReal("golden_conjugate", lambda: mp.phi - 1),
    "sqrt2": LazyReal("sqrt2", lambda: mp.sqrt(2)),
    "e": LazyReal("e", lambda: mp.e),
    "pi": LazyReal("pi", lambda: mp.pi),
}

RealInput = Union[int, Fraction, float, mpf, LazyReal]


def parse_real(text: str) -> Union[Fraction, LazyReal]:
    """Accepts ``p/q``, integers, decimals (kept exact) and the named constants."""
    cleaned = text.strip()
    if cleaned in NAMED_REALS:
        return NAMED_REALS[cleaned]
    try:
        return Fraction(cleaned)
    except (ValueError, ZeroDivisionError) as e:
        raise ValidationError(f"Cannot read '{text}' as a real: {e}")
