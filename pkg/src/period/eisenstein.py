"""The weight-two Eisenstein series G_1(z) = pi^2/3 - 8 pi^2 sum sigma_1(n) q^n, q = e^(2 pi i z).

(i / 2 pi) G_1 solves the second three-term equation of G on the upper half-plane.
"""
from math import ceil, log
from typing import Dict, Tuple

import numpy as np
from mpmath import mp, mpc, mpf

from src.numerics.precision import working_precision, to_mpc, to_mpf
from src.numerics.special import gamma_value, zeta_value
from src.utils.constants import GUARD_BITS
from src.utils.exceptions import ConvergenceError, DomainError
from src.utils.logger import get_logger

logger = get_logger("period.eisenstein")

MIN_IMAGINARY_PART = 0.05


def divisor_sums(count: int) -> np.ndarray:
    """sigma_1(n) for 0 <= n <= count by a sieve (sigma_1(0) = 0)."""
    sigma = np.zeros(count + 1, dtype=np.int64)
    for d in range(1, count + 1):
        sigma[d::d] += d
    return sigma


def terms_needed(imaginary: float, prec: int) -> int:
    # |q|^n n^2 below 2^-prec
    decay = 2 * np.pi * imaginary
    n = ceil(prec * log(2) / decay) + 1
    return int(n + ceil(2 * log(n + 1) / decay)) + 4


def eisenstein_G1(z, prec: int = 53, terms: int = None) -> mpc:
    with working_precision(prec + GUARD_BITS):
        z = to_mpc(z)
        if z.imag == 0:
            raise DomainError("G_1 is defined off the real axis only")
        if z.imag < 0:
            return mp.conj(eisenstein_G1(mp.conj(z), prec, terms))
        if z.imag < MIN_IMAGINARY_PART:
            raise ConvergenceError(f"q-series converges too slowly at Im z = {mp.nstr(z.imag, 5)}",
                                   iterations=terms)
        count = terms or terms_needed(float(z.imag), prec)
        sigma = divisor_sums(count)
        q = mp.exp(2j * mp.pi * z)
        total = mpc(0)
        power = mpc(1)
        for n in range(1, count + 1):
            power *= q
            total += int(sigma[n]) * power
        value = mp.pi ** 2 / 3 - 8 * mp.pi ** 2 * total
    return value


def check_eisenstein(z, prec: int = 53) -> Dict[str, mpf]:
    """Residuals of the three-term equation for f = (i / 2 pi) G_1, of periodicity and of
    G_1(-1/z) = z^2 G_1(z) - 2 pi i z."""
    with working_precision(prec + GUARD_BITS):
        z = to_mpc(z)
        scale = 1j / (2 * mp.pi)
        f = lambda point: scale * eisenstein_G1(point, prec)
        here = f(z)
        three_term = -1 / (1 - z) - f(1 / (1 - z)) / (1 - z) ** 2 + 2 * f(z + 1) - here
        periodic = eisenstein_G1(z + 1, prec) - eisenstein_G1(z, prec)
        modular = eisenstein_G1(-1 / z, prec) - z ** 2 * eisenstein_G1(z, prec) + 2j * mp.pi * z
    return {"three_term": abs(three_term), "periodic": abs(periodic), "quasi_modular": abs(modular)}


def _on_imaginary_axis(y: mpf, prec: int) -> mpf:
    """G_1(iy) - pi^2/3, through G_1(iy) = -y^-2 G_1(i/y) + 2 pi / y for y < 1."""
    if y >= 1:
        return (eisenstein_G1(mpc(0, y), prec) - mp.pi ** 2 / 3).real
    mirrored = eisenstein_G1(mpc(0, 1 / y), prec).real
    return -mirrored / y ** 2 + 2 * mp.pi / y - mp.pi ** 2 / 3


def eisenstein_mellin(s, prec: int = 53) -> Tuple[mpf, mpf]:
    """(int_0^inf (G_1(iy) - pi^2/3) y^(s-1) dy, -8 pi^2 (2 pi)^-s Gamma(s) zeta(s) zeta(s-1)) for s > 2."""
    s = to_mpf(s)
    if s <= 2:
        raise DomainError(f"The Mellin integral converges for s > 2 only, got {mp.nstr(s, 6)}")
    with working_precision(prec + GUARD_BITS):
        numeric = mp.quad(lambda y: _on_imaginary_axis(y, prec) * y ** (s - 1), [0, 1, mp.inf])
        closed = (-8 * mp.pi ** 2 * (2 * mp.pi) ** (-s) * gamma_value(s, prec)
                  * zeta_value(s, prec) * zeta_value(s - 1, prec)).real
    logger.debug(f"Mellin transform at s={mp.nstr(s, 6)}: numeric {mp.nstr(numeric, 15)}, closed {mp.nstr(closed, 15)}")
    return numeric, closed
