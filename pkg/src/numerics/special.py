"""Special functions at arbitrary precision.

Series are summed until a term drops below ``2^(-prec-8)``. Library routines
from mpmath are used where a closed scheme exists (zeta, gamma); the
polylogarithm at 1/2 and the Bessel functions of order 0 and 1 are summed
here because their truncation and cancellation rules are part of the
contract.
"""
from functools import lru_cache
from math import comb
from typing import List, Tuple

from mpmath import mp, mpf, mpc

from src.numerics.precision import working_precision, series_cutoff, to_mpc
from src.utils.constants import POLE_PROXIMITY, DOUBLE_BITS
from src.utils.exceptions import PrecisionLossError, PoleError
from src.utils.logger import get_logger

logger = get_logger("numerics.special")


def polylog_half(L: int, prec: int) -> mpf:
    if L < 1:
        raise ValueError(f"polylog_half needs L >= 1, got {L}")
    with working_precision(prec + 16):
        cutoff = series_cutoff(prec)
        total = mpf(0)
        weight = mpf(1)
        n = 0
        while True:
            n += 1
            weight /= 2
            term = weight / mpf(n) ** L
            total += term
            if term < cutoff:
                break
    return total


def polylog_half_table(max_L: int, prec: int) -> List[mpf]:
    """c_0 .. c_max_L in one pass over n; c_0 = sum 2^-n = 1."""
    with working_precision(prec + 16):
        cutoff = series_cutoff(prec)
        table = [mpf(0)] * (max_L + 1)
        weight = mpf(1)
        n = 0
        while weight >= cutoff:
            n += 1
            weight /= 2
            inverse = mpf(1) / n
            term = weight
            for L in range(max_L + 1):
                if term < cutoff:
                    break
                table[L] += term
                term *= inverse
    logger.debug(f"polylog table up to L={max_L} summed over {n} terms at {prec} bits")
    return table


@lru_cache(maxsize=None)
def _fubini_prefix(L: int) -> Tuple[int, ...]:
    values = [1]
    for k in range(1, L + 1):
        values.append(sum(comb(k, s) * values[s] for s in range(k)))
    return tuple(values)


def fubini_numbers(L: int) -> List[int]:
    if L < 0:
        raise ValueError(f"fubini needs L >= 0, got {L}")
    return list(_fubini_prefix(L))


def fubini(L: int) -> int:
    return fubini_numbers(L)[L]


def bessel_cancellation_bits(x) -> int:
    # the alternating series sums terms of size up to I_nu(x) <= e^x
    return int(mp.ceil(abs(mpf(x)) / mp.ln2))


def bessel_j(order: int, x, prec: int) -> mpf:
    if order not in (0, 1):
        raise ValueError(f"bessel_j supports orders 0 and 1, got {order}")
    x = x if isinstance(x, mpf) else mpf(x)
    if x < 0:
        raise ValueError("bessel_j is restricted to x >= 0")
    lost = bessel_cancellation_bits(x)
    if lost > prec // 2:
        raise PrecisionLossError(
            f"J_{order}({mp.nstr(x, 8)}) loses {lost} bits to cancellation at {prec} bits",
            required_bits=2 * lost + 16,
        )
    with working_precision(prec + lost + 16):
        cutoff = series_cutoff(prec)
        half = x / 2
        square = -(half * half)
        term = mpf(1) if order == 0 else half
        total = term
        k = 0
        while True:
            k += 1
            term = term * square / (k * (k + order))
            total += term
            if abs(term) < cutoff and k > abs(half):
                break
    return total


def _near(s: mpc, point) -> bool:
    return abs(s - point) < POLE_PROXIMITY


def zeta_value(s, prec: int = DOUBLE_BITS):
    with working_precision(prec + 16):
        s = to_mpc(s)
        if _near(s, 1):
            raise PoleError(f"zeta has a pole at s=1 (got {s})", pole=1)
        value = mp.zeta(s)
    return value


def gamma_value(s, prec: int = DOUBLE_BITS):
    with working_precision(prec + 16):
        s = to_mpc(s)
        nearest = int(mp.nint(s.real))
        if nearest <= 0 and _near(s, nearest):
            raise PoleError(f"gamma has a pole at s={nearest} (got {s})", pole=nearest)
        value = mp.gamma(s)
    return value


def zeta_and_gamma(s, prec: int = DOUBLE_BITS):
    return zeta_value(s, prec), gamma_value(s, prec)
