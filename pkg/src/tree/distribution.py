from fractions import Fraction
from typing import Callable, List

import numpy as np
from mpmath import mpf

from src.numerics.precision import working_precision, mpf_to_fraction
from src.numerics.quadrature import QuadratureResult
from src.qmark.minkowski import F_exact
from src.tree.calkin_wilf import generation_arrays
from src.tree.models import Deviation
from src.utils.constants import DOUBLE_BITS, MAX_EMPIRICAL_GENERATION
from src.utils.exceptions import DomainError, SizeLimitError
from src.utils.logger import get_logger

logger = get_logger("tree.distribution")

INT64_SAFE = 1 << 62


def _as_fraction(x) -> Fraction:
    if isinstance(x, mpf):
        return mpf_to_fraction(x)
    return Fraction(x)


def count_at_most(numerators: np.ndarray, denominators: np.ndarray, x: Fraction) -> int:
    p, q = x.numerator, x.denominator
    if int(numerators.max()) * q < INT64_SAFE and int(denominators.max()) * p < INT64_SAFE:
        return int(np.count_nonzero(numerators * q <= denominators * p))
    return sum(1 for a, b in zip(numerators.tolist(), denominators.tolist()) if a * q <= b * p)


def empirical_cdf(n: int, x) -> Fraction:
    """F_n(x) = 2^(1-n) #{members of generation n <= x}, exactly."""
    x = _as_fraction(x)
    if x < 0:
        raise DomainError(f"empirical_cdf needs x >= 0, got {x}")
    a, b = generation_arrays(n)
    return Fraction(count_at_most(a, b, x), 2 ** (n - 1))


def _generation_average(omega: Callable, n: int, domain: str, folded: bool) -> float:
    a, b = generation_arrays(n)
    x = a / b
    if domain == "unit":
        below = x[a < b]
        return 4.0 * float(np.sum(omega(below))) / 2 ** n
    if folded:
        below = x[a < b]
        total = float(np.sum(omega(below) + omega(1.0 / below)))
        if n == 1:
            total = float(np.sum(omega(x)))
        return 2.0 * total / 2 ** n
    return 2.0 * float(np.sum(omega(x))) / 2 ** n


def quadrature_dF(omega: Callable, n: int, domain: str = "half-line", folded: bool = False) -> QuadratureResult:
    """Double precision generation average of ``omega`` against dF, with the n+1 average as error estimate.

    ``domain="unit"`` integrates against d? on [0, 1]; ``domain="half-line"``
    against dF on [0, inf), optionally through F(x) + F(1/x) = 1 so that only
    members below 1 are sampled. ``omega`` acts on float arrays.
    """
    if domain not in ("unit", "half-line"):
        raise DomainError(f"unknown quadrature domain '{domain}'")
    if n + 1 > MAX_EMPIRICAL_GENERATION:
        raise SizeLimitError(f"quadrature_dF needs n + 1 <= {MAX_EMPIRICAL_GENERATION}",
                             limit=MAX_EMPIRICAL_GENERATION - 1)
    value = _generation_average(omega, n, domain, folded)
    finer = _generation_average(omega, n + 1, domain, folded)
    with working_precision(DOUBLE_BITS):
        result = QuadratureResult(mpf(value), abs(mpf(finer) - mpf(value)), 2 ** (n - 1), 3 * 2 ** (n - 1))
    logger.debug(f"Generation {n} average over {domain}: {value!r} (error {result.error})")
    return result


def deviation_sweep(n: int, points: int = 10 ** 4, upper: int = 4) -> List[Deviation]:
    """delta_n(x) = F(x) - F_n(x) on the grid x_j = j * upper / points, 0 <= j < points.

    Counts are exact: member a/b lies below x_j from index ceil(a * points / (b * upper)) on.
    """
    a, b = generation_arrays(n)
    first_index = -((-a * points) // (b * upper))
    inside = first_index[first_index < points]
    counts = np.cumsum(np.bincount(inside, minlength=points))
    scale = 2 ** (n - 1)

    deviations = []
    for j in range(points):
        x = Fraction(j * upper, points)
        delta = F_exact(x).to_fraction() - Fraction(int(counts[j]), scale)
        deviations.append(Deviation(n=n, x=x, delta=delta))
    worst = max(abs(d.delta) for d in deviations)
    logger.info(f"Deviation sweep n={n}: sup |delta| = {float(worst):.3e} on {points} points "
                f"(bound {2.0 ** -n:.3e})")
    return deviations
