"""The dyadic period function G(z) = sum_(L>=1) m_L z^(L-1).

G extends to the plane cut along (1, inf) through ``G(z) = int_0^1 x / (1 - xz) d?(x)``
and satisfies

    G(z) = 1/z + z^-2 G(1/z) + 2 G(z+1)                       (merged form)
    G(z) = -1/(1-z) - (1-z)^-2 G(1/(1-z)) + 2 G(z+1)
    G(z+1) = -z^-2 G(1/z + 1) - 1/z                            (symmetry)

Evaluation routes: the moment power series on |z| <= 1, the series over the
maps z -> 1/(z-n) on Re z <= 0, the merged equation at z - 1 elsewhere off
the cut, and midpoint quadrature of the integral.
"""
from typing import Dict, List

import numpy as np
import pandas as pd
from mpmath import mp, mpc, mpf

from src.moments.models import MomentTable
from src.numerics.precision import working_precision, to_mpc, series_cutoff
from src.period.models import EVAL_METHODS, PeriodEvaluation
from src.qmark.minkowski import dyadic_midpoint_quadrature
from src.tree.distribution import quadrature_dF
from src.utils.constants import CUT_PROXIMITY, DEFAULT_GEN, MAX_RECURSION_DEPTH, MIDPOINT_DEPTH
from src.utils.exceptions import BranchCutError, ConvergenceError, DomainError, ValidationError
from src.utils.logger import get_logger

logger = get_logger("period.dyadic")


def G_power_series(z, table: MomentTable) -> PeriodEvaluation:
    with working_precision(table.work_prec):
        z = to_mpc(z)
        r = abs(z)
        if r > 1:
            raise DomainError(f"The moment series diverges at |z| = {mp.nstr(r, 8)} > 1")
        N = table.order
        value = mpc(0)
        error = mpf(0)
        size = mpf(0)
        power, radius = mpc(1), mpf(1)
        for L in range(1, N + 1):
            term = table.m[L] * power
            value += term
            size += abs(term)
            error += table.err[L] * radius
            power *= z
            radius *= r

        # sum m_L = M_1 = 3/2 bounds what is left; radius is now |z|^N
        partial = mp.fsum(table.m[1:])
        if z == 1:
            return PeriodEvaluation(z=z, value=mpc(mpf(3) / 2), method="power-series",
                                    error=mp.ldexp(mpf(1), -table.prec))
        remaining = max(mpf(3) / 2 - partial, mpf(0)) + mp.fsum(table.err)
        tail = remaining * radius
        if r < 1:
            tail = min(tail, (table.m[N] + table.err[N]) * radius / (1 - r))
        error += tail + mp.ldexp(size, -table.prec)
    return PeriodEvaluation(z=z, value=value, method="power-series", error=error)


def G_rational_series(z, table: MomentTable) -> PeriodEvaluation:
    """-sum_n 2^-n [(z-n)^-1 + (z-n)^-2 G(1/(z-n))] for Re z <= 0.

    The n = 1 term goes through the symmetry law as ``+1/2 [w + w^2 G(w)]``,
    ``w = 1/(2-z)``, so every inner argument has modulus at most 1/2.
    """
    with working_precision(table.work_prec):
        z = to_mpc(z)
        if z.real > 0:
            raise DomainError(f"The rational series needs Re z <= 0, got {mp.nstr(z, 8)}")
        cutoff = series_cutoff(table.prec)

        w = 1 / (2 - z)
        inner = G_power_series(w, table)
        value = (w + w * w * inner.value) / 2
        error = abs(w) ** 2 * inner.error / 2

        weight = mpf(1) / 2
        n = 1
        while True:
            n += 1
            weight /= 2
            u = 1 / (z - n)
            bound = weight * (abs(u) + 2 * abs(u) ** 2)
            if bound < cutoff:
                # the remaining terms sum to less than this one
                error += bound
                break
            inner = G_power_series(u, table)
            value -= weight * (u + u * u * inner.value)
            error += weight * abs(u) ** 2 * inner.error
    return PeriodEvaluation(z=z, value=value, method="rational-series", error=error)


def _distance_to_cut(z: mpc) -> mpf:
    if z.real > 1:
        return abs(z.imag)
    return abs(z - 1)


def G_quadrature(z, n: int = MIDPOINT_DEPTH) -> PeriodEvaluation:
    """Midpoint quadrature of int_0^1 x / (1 - xz) d?(x) in double precision."""
    z = to_mpc(z)
    if z.imag == 0 and z.real > 1:
        raise BranchCutError(f"G is not defined on the cut (1, inf), got z = {mp.nstr(z.real, 8)}")
    if _distance_to_cut(z) < CUT_PROXIMITY:
        logger.warning(f"z = {mp.nstr(z, 8)} lies within {CUT_PROXIMITY} of the cut; quadrature is unreliable")
    point = complex(z)
    result = dyadic_midpoint_quadrature(lambda x: x / (1 - x * point), n)
    return PeriodEvaluation(z=z, value=mpc(result.value), method="quadrature", error=result.error)


def _auto(z: mpc, table: MomentTable, depth: int) -> PeriodEvaluation:
    if z == 1 or abs(z) <= mpf(1) / 2:
        return G_power_series(z, table)
    if z.real <= 0:
        return G_rational_series(z, table)
    if z.imag == 0 and z.real > 1:
        raise BranchCutError(f"G is not defined on the cut (1, inf), got z = {mp.nstr(z.real, 8)}")
    if depth >= MAX_RECURSION_DEPTH:
        raise ConvergenceError(f"Three-term recursion from z = {mp.nstr(z, 8)} exceeded depth {depth}",
                               iterations=depth)

    # G(z) = (G(z-1) - 1/(z-1) - (z-1)^-2 G(1/(z-1))) / 2
    w = z - 1
    left = _auto(w, table, depth + 1)
    inner = _auto(1 / w, table, depth + 1)
    value = (left.value - 1 / w - inner.value / (w * w)) / 2
    error = (left.error + inner.error / abs(w) ** 2) / 2
    return PeriodEvaluation(z=z, value=value, method="three-term", error=error)


def G_eval(z, table: MomentTable, method: str = "auto") -> PeriodEvaluation:
    if method not in EVAL_METHODS:
        raise ValidationError(f"Unknown evaluation method '{method}', expected one of {EVAL_METHODS}")
    if method == "power-series":
        return G_power_series(z, table)
    if method == "rational-series":
        return G_rational_series(z, table)
    if method == "quadrature":
        return G_quadrature(z)
    with working_precision(table.work_prec):
        return _auto(to_mpc(z), table, 0)


def check_three_term(z, table: MomentTable) -> Dict[str, mpf]:
    """Residuals of the merged equation, the second three-term equation and the symmetry law at z."""
    with working_precision(table.work_prec):
        z = to_mpc(z)
        G = lambda point: G_eval(point, table)
        here, shifted, inverse = G(z), G(z + 1), G(1 / z)
        reflected, mirrored = G(1 / (1 - z)), G(1 / z + 1)

        merged = 1 / z + inverse.value / z ** 2 + 2 * shifted.value - here.value
        second = -1 / (1 - z) - reflected.value / (1 - z) ** 2 + 2 * shifted.value - here.value
        symmetry = shifted.value + mirrored.value / z ** 2 + 1 / z

        bound = max(
            inverse.error / abs(z) ** 2 + 2 * shifted.error + here.error,
            reflected.error / abs(1 - z) ** 2 + 2 * shifted.error + here.error,
            shifted.error + mirrored.error / abs(z) ** 2,
        )
    return {"merged": abs(merged), "second": abs(second), "symmetry": abs(symmetry), "bound": bound}


def moment_transform(z, table: MomentTable, generation: int = DEFAULT_GEN) -> Dict[str, object]:
    """M(z) = 1 + z G(z), M0(z) = 1 + z G(z+1) and the residual of M(z) = M(z/(z-1)) / (1-z).

    For real z < 0, ``M0(z) = int_0^inf dF(x) / (1 - xz)`` is also returned from
    the generation average.
    """
    with working_precision(table.work_prec):
        z = to_mpc(z)
        transform = 1 + z * G_eval(z, table).value
        shifted = 1 + z * G_eval(z + 1, table).value
        image = z / (z - 1)
        mirrored = 1 + image * G_eval(image, table).value
        result = {"M": transform, "M0": shifted, "symmetry": abs(transform - mirrored / (1 - z))}
    if z.imag == 0 and z.real < 0:
        point = float(z.real)
        result["M0_quadrature"] = quadrature_dF(lambda x: 1.0 / (1.0 - x * point), generation)
    return result


def contraction_bound(prec: int = 53) -> mpf:
    """sum 2^-n n^-2 = pi^2/12 - log(2)^2/2, the sup-norm of H on [-1, 0]."""
    with working_precision(prec):
        return mp.pi ** 2 / 12 - mp.ln2 ** 2 / 2


def homogeneous_sup(points: int = 101, prec: int = 53) -> mpf:
    """max over a grid of [-1, 0] of sum_n 2^-n (z-n)^-2, the homogeneous map applied to 1."""
    with working_precision(prec):
        cutoff = series_cutoff(prec)
        best = mpf(0)
        for j in range(points):
            z = -mpf(j) / (points - 1)
            total, weight, n = mpf(0), mpf(1), 0
            while weight >= cutoff:
                n += 1
                weight /= 2
                total += weight / (z - n) ** 2
            best = max(best, total)
    return best


def default_grid() -> List[complex]:
    """Twenty points with Re z <= -1."""
    return [complex(-1 - 0.5 * a, 0.5 * b) for a in range(5) for b in range(4)]


def residual_grid(table: MomentTable, points: List[complex] = None) -> pd.DataFrame:
    rows = []
    for point in points or default_grid():
        residuals = check_three_term(point, table)
        rows.append({
            "z": str(point),
            "merged": float(residuals["merged"]),
            "second": float(residuals["second"]),
            "symmetry": float(residuals["symmetry"]),
            "bound": float(residuals["bound"]),
        })
    frame = pd.DataFrame(rows)
    logger.info(f"Residual grid over {len(frame)} points: max "
                f"{np.max(frame[['merged', 'second', 'symmetry']].to_numpy()):.3e}")
    return frame
