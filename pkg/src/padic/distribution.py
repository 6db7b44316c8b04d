"""Limit shares mu_p(z, nu) of the tree inside p-adic discs, in closed form and by enumeration."""
from fractions import Fraction
from typing import Iterable, Tuple

import numpy as np
import sympy

from src.padic.chain import check_prime, make_state, orbit, outside_state, stationary, valuation
from src.padic.models import MuComparison
from src.tree.calkin_wilf import generation_arrays
from src.utils.exceptions import DomainError, InadmissiblePairError, SizeLimitError, ValidationError
from src.utils.logger import get_logger

logger = get_logger("padic.distribution")

ZERO_VALUATION = 10 ** 6
MAX_PARITY_GENERATION = 20


def _valuations(values: np.ndarray, p: int) -> np.ndarray:
    work = np.abs(values)
    zero = work == 0
    work = np.where(zero, 1, work)
    result = np.zeros(len(work), dtype=np.int64)
    while True:
        divisible = work % p == 0
        if not divisible.any():
            break
        result += divisible
        work = np.where(divisible, work // p, work)
    result[zero] = ZERO_VALUATION
    return result


def empirical_mu(p: int, z, nu: int, n: int) -> Fraction:
    """F_n(z, nu) = 2^(1-n) #{a/b in generation n : ord_p(a/b - z) >= nu}."""
    check_prime(p)
    z = Fraction(z)
    a, b = generation_arrays(n)
    r, s = z.numerator, z.denominator
    # ord(a/b - r/s) = ord(as - rb) - ord(b) - ord(s)
    orders = _valuations(a * s - r * b, p) - _valuations(b, p) - valuation(p, s)
    count = int(np.count_nonzero(orders >= nu))
    return Fraction(count, 2 ** (n - 1))


def mu_closed_form(p: int, z, nu: int) -> Fraction:
    check_prime(p)
    z = Fraction(z)
    if z == 0:
        if nu <= 0:
            return 1 - Fraction(1, p ** (1 - nu) + p ** (-nu))
        return Fraction(1, p ** nu + p ** (nu - 1))
    v = valuation(p, z)
    if v >= nu:
        raise InadmissiblePairError(f"ord_{p}({z}) = {v} is not below nu = {nu}; use z = 0")
    if v >= 0:
        return Fraction(1, p ** nu + p ** (nu - 1))
    exponent = nu - 2 * v
    return Fraction(1, p ** exponent + p ** (exponent - 1))


def mu_from_chain(p: int, z, nu: int) -> Fraction:
    """mu_p(z, nu) as the stationary share of the disc in its orbit."""
    z = Fraction(z)
    if z == 0 and nu <= 0:
        # {ord x >= nu} is the complement of G(0, nu - 1)
        chain = orbit(p, 1 - nu)
        return 1 - stationary(chain)[chain.index(outside_state(p, 1 - nu))]
    state = make_state(p, z, nu)
    v = valuation(p, z)
    kappa = nu if z == 0 or v >= 0 else nu - 2 * v
    chain = orbit(p, kappa)
    if state not in chain.states:
        raise ValidationError(f"{state} is missing from the orbit of kappa = {kappa}")
    return stationary(chain)[chain.index(state)]


def compare_mu(p: int, z, nu: int, generations: Iterable[int] = (12, 16, 20)) -> MuComparison:
    closed = mu_closed_form(p, z, nu)
    empirical = {n: empirical_mu(p, z, nu, n) for n in generations}
    comparison = MuComparison(p=p, z=Fraction(z), nu=nu, closed=closed, empirical=empirical)
    logger.info(f"mu_{p}({z}, {nu}) = {closed}; deviations {comparison.deviations()}")
    return comparison


def even_odd_counts(n: int) -> Tuple[int, int]:
    """(E(n), O(n)): members of generation n with a or b even, and with both odd."""
    if n < 1:
        raise DomainError(f"generation index must be >= 1, got {n}")
    sign = 1 if n % 2 == 0 else -1
    return (2 ** n + 2 * sign) // 3, (2 ** (n - 1) - 2 * sign) // 3


def even_odd_enumerated(n: int) -> Tuple[int, int]:
    if n > MAX_PARITY_GENERATION:
        raise SizeLimitError(f"even_odd_enumerated is limited to n <= {MAX_PARITY_GENERATION}",
                             limit=MAX_PARITY_GENERATION)
    a, b = generation_arrays(n)
    even = int(np.count_nonzero((a % 2 == 0) | (b % 2 == 0)))
    return even, len(a) - even


def mu_parity_p2() -> Fraction:
    """mu_2(0, 0) from the two-state recurrence (E, O) -> (E + 2 O, E).

    The even share of generation n tends to the normalized eigenvector of the
    eigenvalue 2; half of the even members have ord_2 > 0 and reciprocity
    gives the same share for ord_2 < 0.
    """
    recurrence = sympy.Matrix([[1, 2], [1, 0]])
    for value, _, vectors in recurrence.eigenvects():
        if value == 2:
            vector = vectors[0]
            break
    else:
        raise ValidationError("The parity recurrence has no eigenvalue 2")
    even_share = sympy.nsimplify(vector[0] / (vector[0] + vector[1]))
    positive = Fraction(int(even_share.p), int(even_share.q)) / 2
    return 1 - positive
