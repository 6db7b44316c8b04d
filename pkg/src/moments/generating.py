"""Exponential generating functions of the moments.

``m(t) = sum m_L t^L / L! = int_0^1 e^(xt) d?(x)`` is entire and satisfies
``m(t) = e^t m(-t)``; ``M(t) = m(t) / (2 - e^t)`` generates the M_L and has its
nearest pole at log 2, which fixes the growth of M_L.
"""
from math import comb, factorial
from typing import Tuple

import numpy as np
from mpmath import mp, mpf

from src.moments.models import AsymptoticEstimate, KinneyEstimate, MomentTable, SeriesEstimate
from src.numerics.precision import working_precision, to_mpf
from src.numerics.quadrature import QuadratureResult
from src.qmark.minkowski import dyadic_midpoint_quadrature
from src.utils.constants import ENVELOPE_CONSTANT, MIDPOINT_DEPTH, POLE_GUARD
from src.utils.exceptions import PoleError, TailBoundError
from src.utils.logger import get_logger

logger = get_logger("moments.generating")


def _series(table: MomentTable, t: mpf, shift: int) -> SeriesEstimate:
    """sum_(L >= shift) m_L t^(L-shift) / (L-shift)! with a bound for the dropped terms."""
    N = table.order
    x = abs(t)
    if x >= N + 2 - shift:
        raise TailBoundError(f"|t| = {mp.nstr(x, 6)} is beyond the reach of an order-{N} table",
                             iterations=N)
    value = mpf(0)
    error = mpf(0)
    size = mpf(0)
    power = mpf(1)
    for L in range(shift, N + 1):
        k = L - shift
        if k > 0:
            power = power * t / k
        term = table.m[L] * power
        value += term
        size += abs(term)
        error += table.err[L] * abs(power)
    # m_L <= m_N for L > N
    head = (table.m[N] + table.err[N]) * x ** (N + 1 - shift) / factorial(N + 1 - shift)
    tail = head / (1 - x / (N + 2 - shift))
    rounding = mp.ldexp(size, -table.prec)
    return SeriesEstimate(value=value, error=error + tail + rounding, tail=tail, terms=N + 1 - shift)


def mgf(t, table: MomentTable, reflect: bool = True) -> SeriesEstimate:
    """m(t); for t < 0 the positive series at -t is used through m(t) = e^t m(-t) unless ``reflect`` is off."""
    with working_precision(table.work_prec):
        t = to_mpf(t)
        if t >= 0 or not reflect:
            return _series(table, t, 0)
        mirrored = _series(table, -t, 0)
        scale = mp.exp(t)
        return SeriesEstimate(value=scale * mirrored.value, error=scale * mirrored.error,
                              tail=scale * mirrored.tail, terms=mirrored.terms)


def mgf_derivative(t, table: MomentTable, reflect: bool = True) -> SeriesEstimate:
    """m'(t); for t < 0 through m'(t) = e^t (m(-t) - m'(-t))."""
    with working_precision(table.work_prec):
        t = to_mpf(t)
        if t >= 0 or not reflect:
            return _series(table, t, 1)
        value = _series(table, -t, 0)
        slope = _series(table, -t, 1)
        scale = mp.exp(t)
        return SeriesEstimate(value=scale * (value.value - slope.value), error=scale * (value.error + slope.error),
                              tail=scale * (value.tail + slope.tail), terms=slope.terms)


def Mgf(t, table: MomentTable) -> SeriesEstimate:
    with working_precision(table.work_prec):
        t = to_mpf(t)
        if abs(t - mp.ln2) < POLE_GUARD:
            raise PoleError(f"M(t) has a simple pole at log 2 (got t = {mp.nstr(t, 12)})", pole=float(mp.ln2))
        inner = mgf(t, table)
        denominator = 2 - mp.exp(t)
        return SeriesEstimate(value=inner.value / denominator, error=inner.error / abs(denominator),
                              tail=inner.tail / abs(denominator), terms=inner.terms)


def mgf_quadrature(t: float, n: int = MIDPOINT_DEPTH, derivative: bool = False) -> QuadratureResult:
    """int_0^1 x^d e^(xt) d?(x), d = 0 or 1, by the Stern-Brocot midpoint rule."""
    power = 1 if derivative else 0
    return dyadic_midpoint_quadrature(lambda x: x ** power * np.exp(x * t), n)


def mgf_envelope(t, table: MomentTable) -> Tuple[mpf, SeriesEstimate, mpf]:
    """(C^(2 sqrt t), m(-t), K C^(sqrt t)) with C = exp(-sqrt(log 2))."""
    with working_precision(table.work_prec):
        t = to_mpf(t)
        C = mp.exp(-mp.sqrt(mp.ln2))
        lower = C ** (2 * mp.sqrt(t))
        upper = ENVELOPE_CONSTANT * C ** mp.sqrt(t)
    value = mgf(-t, table)
    if value.error > value.value / 10:
        raise TailBoundError(f"m(-{mp.nstr(t, 6)}) is not resolved by an order-{table.order} table",
                             iterations=table.order)
    return lower, value, upper


def asymptotic_constant(table: MomentTable) -> AsymptoticEstimate:
    """kappa = m(log 2) / (2 log 2) with M_L ~ kappa L! / log(2)^L."""
    with working_precision(table.work_prec):
        inner = mgf(mp.ln2, table)
        scale = 2 * mp.ln2
        kappa = SeriesEstimate(value=inner.value / scale, error=inner.error / scale, tail=inner.tail / scale,
                               terms=inner.terms)
        ratios, ratio_errors = [], []
        for L in range(table.order + 1):
            weight = mp.ln2 ** L / factorial(L)
            ratios.append(table.M[L] * weight)
            propagated = mp.fsum(comb(L, i) * table.B[L - i] * table.err[i] for i in range(L + 1))
            ratio_errors.append(propagated * weight)
    logger.info(f"Asymptotic constant kappa = {mp.nstr(kappa.value, 20)} (+- {mp.nstr(kappa.error, 3)})")
    return AsymptoticEstimate(kappa=kappa, ratios=ratios, ratio_errors=ratio_errors)


def kinney_constant(table: MomentTable, depth: int = MIDPOINT_DEPTH) -> KinneyEstimate:
    """alpha = 1 / (2 int_0^1 log2(1+x) d?(x)) by the moment series and by midpoint quadrature.

    The moment route uses ``log(1+x) = log 2 - sum_k ((1-x)/2)^k / k`` and the
    reflection ``int (1-x)^k d? = m_k``; the quadrature route takes one
    Richardson step over two midpoint depths.
    """
    N = table.order
    with working_precision(table.work_prec):
        reflected = mp.fsum(table.m[k] / (k * mp.ldexp(mpf(1), k)) for k in range(1, N + 1))
        propagated = mp.fsum(table.err[k] / (k * mp.ldexp(mpf(1), k)) for k in range(1, N + 1))
        tail = (table.m[N] + table.err[N]) / ((N + 1) * mp.ldexp(mpf(1), N))
        series = SeriesEstimate(value=(mp.ln2 - reflected) / mp.ln2, error=(propagated + tail) / mp.ln2,
                                tail=tail / mp.ln2, terms=N)

    omega = lambda x: np.log2(1.0 + x)
    fine = dyadic_midpoint_quadrature(omega, depth)
    coarse = dyadic_midpoint_quadrature(omega, depth - 1)
    with working_precision(table.work_prec):
        extrapolated = 2 * fine.value - coarse.value
        quadrature = SeriesEstimate(value=extrapolated, error=2 * abs(fine.value - coarse.value), terms=2 ** depth)
        alpha = 1 / (2 * series.value)

    estimate = KinneyEstimate(alpha=alpha, integral_series=series, integral_quadrature=quadrature)
    logger.info(f"Kinney constant {mp.nstr(alpha, 20)}; series and quadrature differ by "
                f"{mp.nstr(estimate.agreement, 3)}")
    return estimate
