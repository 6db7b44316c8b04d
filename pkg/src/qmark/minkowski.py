"""Minkowski's question mark function.

For ``x = [a0; a1, a2, ...]`` the distribution function is
``F(x) = 1 - 2^-a0 + 2^-(a0+a1) - ...``, ending at the last partial quotient,
and ``?(x) = 2 F(x)`` on [0, 1]. Rationals map to dyadic rationals, so every
rational input has an exact image as well as the truncated real one.
"""
from fractions import Fraction
from typing import Callable, Dict, List, Union

import numpy as np
from mpmath import mp, mpf

from src.numerics.precision import working_precision, mpf_to_fraction
from src.numerics.quadrature import QuadratureResult
from src.qmark.continued_fraction import cf_of_rational, cf_of_real, cf_to_rational, real_to_mpf
from src.qmark.models import DyadicValue, LazyReal, RealInput
from src.tree.calkin_wilf import stern_brocot_level
from src.utils.constants import DOUBLE_BITS, GUARD_BITS, MAX_DYADIC_BITS
from src.utils.exceptions import DomainError, SizeLimitError
from src.utils.logger import get_logger

logger = get_logger("qmark.minkowski")


def _alternating_dyadic_sum(digits: List[int], prec: int) -> mpf:
    with working_precision(prec + GUARD_BITS):
        total = mpf(1)
        exponent, sign = 0, -1
        for a in digits:
            exponent += a
            total += sign * mp.ldexp(mpf(1), -exponent)
            sign = -sign
    return total


def F_exact(x) -> DyadicValue:
    digits = cf_of_rational(x).quotients
    total = sum(digits)
    if total > MAX_DYADIC_BITS:
        raise SizeLimitError(f"F({x}) needs {total} bits exactly; use F_eval", limit=MAX_DYADIC_BITS)
    numerator = 1 << total
    exponent, sign = 0, -1
    for a in digits:
        exponent += a
        numerator += sign * (1 << (total - exponent))
        sign = -sign
    return DyadicValue.from_parts(numerator, total)


def F_eval(x: RealInput, prec: int, known_bits=None) -> mpf:
    digits, _ = cf_of_real(x, prec, known_bits)
    return _alternating_dyadic_sum(digits, prec)


def _check_unit_interval(x: RealInput):
    value = real_to_mpf(x, 64)
    if value < 0 or value > 1:
        raise DomainError(f"?(x) is evaluated on [0, 1]; got {mp.nstr(value, 10)}")


def qmark_exact(x) -> DyadicValue:
    _check_unit_interval(Fraction(x))
    return F_exact(x).doubled()


def qmark_eval(x: RealInput, prec: int, known_bits=None) -> mpf:
    _check_unit_interval(x)
    with working_precision(prec + GUARD_BITS):
        return 2 * F_eval(x, prec, known_bits)


def _runs(bits: str) -> List[int]:
    runs, current, length = [], "0", 0
    for bit in bits:
        if bit == current:
            length += 1
        else:
            runs.append(length)
            current, length = bit, 1
    runs.append(length)
    return runs


def _decode_runs(bits: str) -> Fraction:
    # ?([0; a1, a2, ...]) has binary runs 0^(a1-1) 1^a2 0^a3 ...
    if "1" not in bits:
        return Fraction(0)
    runs = _runs(bits)
    quotients = [0, runs[0] + 1] + runs[1:]
    return cf_to_rational(quotients)


def qmark_inverse(y, prec: int) -> Union[Fraction, mpf]:
    """Run-length decoding of the binary expansion of ``y`` into partial quotients.

    Dyadic inputs (every mpf, and rationals with power-of-two denominators)
    give the exact rational preimage; other rationals and named reals are
    expanded to ``prec + 16`` bits and return a BigReal.
    """
    if isinstance(y, LazyReal):
        y = mpf_to_fraction(y.at(prec + 2 * GUARD_BITS))
    elif isinstance(y, mpf):
        y = mpf_to_fraction(y)
    else:
        y = Fraction(y)
    if y < 0 or y > 1:
        raise DomainError(f"qmark_inverse needs y in [0, 1], got {y}")
    if y == 1:
        return Fraction(1)

    exponent = y.denominator.bit_length() - 1
    if y.denominator == 1 << exponent:
        bits = format(y.numerator, f"0{exponent}b") if exponent else ""
        return _decode_runs(bits)

    width = prec + 16
    truncated = (y.numerator << width) // y.denominator
    x = _decode_runs(format(truncated, f"0{width}b"))
    with working_precision(prec):
        return mpf(x.numerator) / x.denominator


def _bisect(lo: Fraction, hi: Fraction, prec: int) -> mpf:
    def gap(x):
        return qmark_eval(x, prec) - real_to_mpf(x, prec + GUARD_BITS)

    lo_sign = gap(lo) > 0
    width = Fraction(1, 1 << prec)
    steps = 0
    while hi - lo > width:
        mid = (lo + hi) / 2
        if (gap(mid) > 0) == lo_sign:
            lo = mid
        else:
            hi = mid
        steps += 1
    logger.debug(f"Fixed-point bisection finished after {steps} steps")
    return real_to_mpf((lo + hi) / 2, prec)


def fixed_points(prec: int) -> List[mpf]:
    """The two solutions of ?(x) = x in (0, 1) other than 0, 1/2 and 1."""
    first = _bisect(Fraction(1, 3), Fraction(9, 20), prec)
    second = _bisect(Fraction(11, 20), Fraction(2, 3), prec)
    return [first, second]


def check_distribution_eq(x, prec: int, shift: int = 3) -> Dict[str, mpf]:
    """Residuals of 2F(x) = F(x-1) + 1 or 2F(x) = F(x/(1-x)), and of the shift law."""
    x = Fraction(x)
    if x <= 0:
        raise DomainError(f"check_distribution_eq needs x > 0, got {x}")
    with working_precision(prec + GUARD_BITS):
        doubled = 2 * F_eval(x, prec)
        if x >= 1:
            functional = doubled - F_eval(x - 1, prec) - 1
        else:
            functional = doubled - F_eval(x / (1 - x), prec)
        weight = mp.ldexp(mpf(1), -shift)
        shifted = F_eval(x + shift, prec) - (1 - weight + weight * F_eval(x, prec))
    return {"functional": abs(functional), "shift": abs(shifted)}


def check_halving(x, prec: int) -> mpf:
    """Residual of ?(x/(x+1)) = ?(x)/2 on [0, 1]."""
    x = Fraction(x)
    with working_precision(prec + GUARD_BITS):
        return abs(qmark_eval(x / (x + 1), prec) - qmark_eval(x, prec) / 2)


def _midpoint_mean(omega: Callable, level: int) -> Union[float, complex]:
    p, q = stern_brocot_level(level)
    mean = np.mean(omega(p / q))
    return complex(mean) if np.iscomplexobj(mean) else float(mean)


def dyadic_midpoint_quadrature(omega: Callable, n: int) -> QuadratureResult:
    """``2^-n sum_k omega(?^-1((2k+1)/2^(n+1)))`` in double precision.

    The reported error is twice the gap to the level n-1 rule plus float rounding.

    The preimages of the odd dyadics of depth ``n+1`` are the Stern-Brocot
    mediants of that depth, so ``omega`` receives them as one float array.
    """
    value = _midpoint_mean(omega, n + 1)
    coarse = _midpoint_mean(omega, n)
    with working_precision(DOUBLE_BITS):
        fine, rough = mp.mpmathify(value), mp.mpmathify(coarse)
        error = 2 * abs(fine - rough) + mp.ldexp(abs(fine), -40)
        result = QuadratureResult(fine, error, 2 ** n, 2 ** n + 2 ** (n - 1))
    logger.debug(f"Midpoint rule at depth {n}: {value!r} (error {result.error})")
    return result


def salem_exponent(prec: int = 53) -> mpf:
    """Hölder exponent log 2 / (2 log gamma) of ?, gamma the golden ratio."""
    with working_precision(prec):
        return mp.ln2 / (2 * mp.log(mp.phi))
