"""Precision scoping and small conversion helpers shared by every module.

BigReal and BigComplex values are ``mpmath.mpf`` and ``mpmath.mpc``. A value
carries the precision of the ``working_precision`` scope that produced it;
operations take their target precision explicitly and never read the global
mpmath setting.
"""
from contextlib import contextmanager
from fractions import Fraction
from typing import Union

from mpmath import mp, mpf, mpc

from src.utils.constants import SERIES_CUTOFF_BITS

BigReal = mpf
BigComplex = mpc
RealLike = Union[int, Fraction, float, str, mpf]


@contextmanager
def working_precision(prec: int):
    if prec < 2:
        raise ValueError(f"precision must be at least 2 bits, got {prec}")
    with mp.workprec(prec):
        yield


def series_cutoff(prec: int) -> mpf:
    """Terms below this magnitude end a series summed at ``prec`` bits."""
    return mp.ldexp(mpf(1), -prec - SERIES_CUTOFF_BITS)


def half_prec_tolerance(prec: int) -> mpf:
    return mp.ldexp(mpf(1), -(prec // 2))


def to_mpf(x: RealLike) -> mpf:
    if isinstance(x, Fraction):
        return mpf(x.numerator) / x.denominator
    return mpf(x)


def to_mpc(z) -> mpc:
    if isinstance(z, Fraction):
        return mpc(to_mpf(z))
    if isinstance(z, complex):
        return mpc(z.real, z.imag)
    return mpc(z)


def mpf_to_fraction(x: mpf) -> Fraction:
    """Exact conversion; every finite mpf is a dyadic rational."""
    man, exp = (x if isinstance(x, mpf) else mpf(x)).man_exp
    if exp >= 0:
        return Fraction(int(man) << exp)
    return Fraction(int(man), 1 << -exp)


def parse_complex(text: str) -> mpc:
    """Parse ``a+bi`` / ``a-bi`` / ``bi`` / ``a`` at the current precision."""
    cleaned = text.replace(" ", "").replace("j", "i")
    if not cleaned.endswith("i"):
        return mpc(mpf(cleaned), 0)
    body = cleaned[:-1]
    split = max(body.rfind("+"), body.rfind("-"))
    # a sign right after an exponent marker belongs to the exponent
    while split > 0 and body[split - 1] in "eE":
        split = max(body.rfind("+", 0, split - 1), body.rfind("-", 0, split - 1))
    if split <= 0:
        imag = body if body not in ("", "+", "-") else body + "1"
        return mpc(0, mpf(imag))
    real_part, imag_part = body[:split], body[split:]
    if imag_part in ("+", "-"):
        imag_part += "1"
    return mpc(mpf(real_part), mpf(imag_part))


def decimal_digits_agreeing(a, b) -> int:
    diff = abs(a - b)
    if diff == 0:
        return int(mp.dps)
    return max(0, int(mp.floor(-mp.log10(diff))))
