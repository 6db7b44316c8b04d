from fractions import Fraction
from math import ceil, log

from mpmath import mp, mpc, mpf

from src.numerics.precision import working_precision, to_mpc, to_mpf
from src.numerics.special import gamma_value, zeta_value
from src.padic.chain import check_prime
from src.padic.distribution import mu_closed_form
from src.utils.constants import DOUBLE_BITS
from src.utils.exceptions import DomainError
from src.utils.logger import get_logger

logger = get_logger("padic.zeta")


def _check_strip(s: mpc):
    if not -1 < s.real < 1:
        raise DomainError(f"Z_p(s) converges for -1 < Re s < 1 only, got Re s = {mp.nstr(s.real, 6)}")


def Z_p(p: int, s, prec: int = DOUBLE_BITS) -> mpc:
    """int |u|_p^s d mu_p = (p-1)^2 / ((p - p^-s)(p - p^s))."""
    check_prime(p)
    with working_precision(prec + 16):
        s = to_mpc(s)
        _check_strip(s)
        return (p - 1) ** 2 / ((p - mpf(p) ** (-s)) * (p - mpf(p) ** s))


def shell_weight(p: int, k: int) -> Fraction:
    """mu_p(ord u = k) = mu(0, k) - mu(0, k+1)."""
    return mu_closed_form(p, 0, k) - mu_closed_form(p, 0, k + 1)


def unit_measure(p: int) -> Fraction:
    return shell_weight(p, 0)


def Z_p_shell_sum(p: int, s, prec: int = DOUBLE_BITS) -> mpc:
    """sum_k mu_p(ord u = k) p^(-ks) over both signs of k."""
    check_prime(p)
    with working_precision(prec + 16):
        s = to_mpc(s)
        _check_strip(s)
        # shell k contributes about p^(-|k| (1 - |Re s|))
        decay = (1 - abs(float(s.real))) * log(p)
        shells = int(ceil((prec + 8) * log(2) / decay)) + 2
        total = to_mpf(unit_measure(p))
        base = mpf(p)
        for k in range(1, shells + 1):
            total += to_mpf(shell_weight(p, k)) * base ** (-k * s)
            total += to_mpf(shell_weight(p, -k)) * base ** (k * s)
    logger.debug(f"Z_{p}({mp.nstr(s, 6)}) summed over {2 * shells + 1} shells")
    return total


def local_factor(p: int, s, prec: int = DOUBLE_BITS) -> mpc:
    """((p+1)/(p-1)) Z_p(s), the local integral of the measure rescaled so that the units have measure 1."""
    with working_precision(prec + 16):
        return mpf(p + 1) / (p - 1) * Z_p(p, s, prec)


def local_factor_euler(p: int, s, prec: int = DOUBLE_BITS) -> mpc:
    """(1 - p^-2) / ((1 - p^(-s-1)) (1 - p^(s-1)))."""
    check_prime(p)
    with working_precision(prec + 16):
        s = to_mpc(s)
        base = mpf(p)
        return (1 - base ** -2) / ((1 - base ** (-s - 1)) * (1 - base ** (s - 1)))


def zeta_T(s, prec: int = DOUBLE_BITS) -> mpc:
    """(12/pi^2) (2 pi)^-s cos(pi s / 2) Gamma(s) zeta(s) zeta(s+1)."""
    with working_precision(prec + 16):
        s = to_mpc(s)
        value = (12 / mp.pi ** 2 * (2 * mp.pi) ** (-s) * mp.cos(mp.pi * s / 2)
                 * gamma_value(s, prec) * zeta_value(s, prec) * zeta_value(s + 1, prec))
    return value


def zeta_T_product_form(s, prec: int = DOUBLE_BITS) -> mpc:
    """(6/pi^2) zeta(s+1) zeta(1-s), the product of the local factors over all p."""
    with working_precision(prec + 16):
        s = to_mpc(s)
        return 6 / mp.pi ** 2 * zeta_value(s + 1, prec) * zeta_value(1 - s, prec)
