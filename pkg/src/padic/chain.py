"""Finite Markov chains of the p-adic distribution of the Calkin-Wilf tree.

A parent ``a/b`` has the children ``a/b + 1`` and ``(a/b) / (1 + a/b)``, so the
share ``F_n(B)`` of generation ``n`` lying in a disc ``B`` satisfies

    F_(n+1)(B) = F_n(tau B) / 2 + F_n(sigma B) / 2,   tau B = B - 1,   sigma B = {y / (1 - y) : y in B}

Both maps send discs of the projective line to discs, and the discs reached
from ``{ord_p(x) <= -kappa}`` form a finite orbit of ``p^kappa + p^(kappa-1)``
states.
"""
import math
from collections import deque
from fractions import Fraction
from typing import List, Optional, Tuple, Union

import numpy as np
import sympy
from tqdm import tqdm

from src.padic.models import AdmissiblePair, MarkovOrbit
from src.utils.constants import MAX_ORBIT_SIZE
from src.utils.exceptions import DomainError, InadmissiblePairError, SizeLimitError, ValidationError
from src.utils.logger import get_logger

logger = get_logger("padic.chain")

Valuation = Union[int, float]


def check_prime(p: int):
    if not sympy.isprime(p):
        raise ValidationError(f"p must be prime, got {p}")


def valuation(p: int, x) -> Valuation:
    x = Fraction(x)
    if x == 0:
        return math.inf
    v = 0
    numerator, denominator = abs(x.numerator), x.denominator
    while numerator % p == 0:
        numerator //= p
        v += 1
    while denominator % p == 0:
        denominator //= p
        v -= 1
    return v


def reduce_center(p: int, i, kappa: int) -> Fraction:
    """Canonical center ``u / p^lambda``, ``0 <= u < p^(kappa + lambda)``, of the ball of radius exponent kappa around i."""
    i = Fraction(i)
    if i == 0:
        if kappa <= 0:
            raise InadmissiblePairError(f"(0, {kappa}) is not admissible: the center 0 needs kappa > 0")
        return Fraction(0)
    v = valuation(p, i)
    if v >= kappa:
        raise InadmissiblePairError(f"({i}, {kappa}) is not admissible: ord_{p}({i}) = {v} >= {kappa}")
    lam = max(0, -v)
    modulus = p ** (kappa + lam)
    scaled = i * p ** lam
    u = scaled.numerator * pow(scaled.denominator, -1, modulus) % modulus
    return Fraction(u, p ** lam)


def make_state(p: int, i, kappa: int) -> AdmissiblePair:
    return AdmissiblePair(p=p, center=reduce_center(p, i, kappa), kappa=kappa)


def outside_state(p: int, kappa: int) -> AdmissiblePair:
    if kappa < 1:
        raise InadmissiblePairError(f"G(0, {-kappa}) needs kappa >= 1")
    return AdmissiblePair(p=p, center=Fraction(0), kappa=kappa, outside=True)


def contains(state: AdmissiblePair, x) -> bool:
    v = valuation(state.p, x) if state.outside else valuation(state.p, Fraction(x) - state.center)
    if state.outside:
        return v <= -state.kappa
    return v >= state.kappa


def transitions(state: AdmissiblePair) -> Tuple[AdmissiblePair, AdmissiblePair]:
    """(tau(state), sigma(state))."""
    p, kappa = state.p, state.kappa
    if state.outside:
        # {ord x <= -kappa} - 1 is itself; y / (1 - y) maps it onto the ball around -1
        return state, make_state(p, -1, kappa)

    i = state.center
    shifted = make_state(p, i - 1, kappa)
    if i == 1:
        # the ball around 1 contains the pole of y / (1 - y)
        return shifted, outside_state(p, kappa)
    kappa0 = kappa - 2 * valuation(p, 1 - i)
    return shifted, make_state(p, i / (1 - i), kappa0)


def _sort_key(state: AdmissiblePair):
    return (0 if state.outside else 1, state.kappa, state.center)


def orbit(p: int, kappa: int, progress: bool = False) -> MarkovOrbit:
    check_prime(p)
    if kappa < 1:
        raise DomainError(f"orbit needs kappa >= 1, got {kappa}")
    expected = p ** kappa + p ** (kappa - 1)
    if expected > MAX_ORBIT_SIZE:
        raise SizeLimitError(f"Orbit of p={p}, kappa={kappa} has {expected} states, guard is {MAX_ORBIT_SIZE}",
                             limit=MAX_ORBIT_SIZE)

    # 1. breadth-first search from the outside state
    start = outside_state(p, kappa)
    found = {start: 0}
    order = [start]
    edges = []
    queue = deque([start])
    bar = tqdm(total=expected, desc=f"orbit p={p} kappa={kappa}", disable=not progress)
    while queue:
        state = queue.popleft()
        bar.update(1)
        pair = transitions(state)
        for image in pair:
            if image not in found:
                found[image] = len(order)
                order.append(image)
                queue.append(image)
        edges.append((state, pair))
    bar.close()

    # 2. canonical ordering, outside state first
    states = sorted(order, key=_sort_key)
    position = {state: k for k, state in enumerate(states)}
    tau = [0] * len(states)
    sigma = [0] * len(states)
    for state, (t, s) in edges:
        tau[position[state]] = position[t]
        sigma[position[state]] = position[s]

    if len(states) != expected:
        logger.warning(f"Orbit of p={p}, kappa={kappa} has {len(states)} states, expected {expected}")
    logger.debug(f"Orbit p={p} kappa={kappa}: {len(states)} states")
    return MarkovOrbit(p=p, kappa=kappa, states=states, tau=tau, sigma=sigma)


def markov_matrix(p: int, kappa: int = 1) -> MarkovOrbit:
    """The chain on F_p U {inf} for kappa = 1: states G(0, -1), F(0, 1), ..., F(p-1, 1)."""
    return orbit(p, kappa)


def is_primitive(chain: MarkovOrbit, max_power: Optional[int] = None) -> Optional[int]:
    """Smallest m with P^m entrywise positive, searched up to 4 * size."""
    size = len(chain)
    limit = max_power or 4 * size
    A = np.zeros((size, size), dtype=np.int64)
    for k in range(size):
        A[k, chain.tau[k]] = 1
        A[k, chain.sigma[k]] = 1
    power = A.copy()
    for m in range(1, limit + 1):
        if power.all():
            return m
        power = ((power @ A) > 0).astype(np.int64)
    return None


def stationary(chain: MarkovOrbit) -> List[Fraction]:
    """The uniform vector, checked to be the left fixed point of P."""
    if not chain.is_doubly_stochastic():
        raise ValidationError(f"Columns of the p={chain.p}, kappa={chain.kappa} chain do not sum to 1")
    if is_primitive(chain) is None:
        raise ValidationError(f"The p={chain.p}, kappa={chain.kappa} chain is not primitive")
    return [Fraction(1, len(chain)) for _ in chain.states]


def characteristic_polynomial(chain: MarkovOrbit, symbol: str = "x") -> sympy.Expr:
    x = sympy.Symbol(symbol)
    P = sympy.Matrix([[sympy.Rational(v.numerator, v.denominator) for v in row] for row in chain.matrix()])
    return P.charpoly(x).as_expr()


def chain_distribution(chain: MarkovOrbit, n: int) -> List[Fraction]:
    """F_n on every state, started from generation 1 = {1}."""
    if n < 1:
        raise DomainError(f"generation index must be >= 1, got {n}")
    v = [Fraction(1) if contains(state, 1) else Fraction(0) for state in chain.states]
    half = Fraction(1, 2)
    for _ in range(n - 1):
        v = [half * (v[chain.tau[k]] + v[chain.sigma[k]]) for k in range(len(v))]
    return v


def power_iteration(chain: MarkovOrbit, steps: int) -> List[Fraction]:
    """max_k |F_n(state_k) - 1/size| for n = 1..steps."""
    uniform = Fraction(1, len(chain))
    v = chain_distribution(chain, 1)
    half = Fraction(1, 2)
    distances = []
    for n in range(1, steps + 1):
        if n > 1:
            v = [half * (v[chain.tau[k]] + v[chain.sigma[k]]) for k in range(len(v))]
        distances.append(max(abs(value - uniform) for value in v))
    return distances


def second_eigenvalue_modulus(chain: MarkovOrbit) -> float:
    """Largest |lambda| over the spectrum with the Perron root 1 removed once."""
    x = sympy.Symbol("x")
    roots = sympy.Poly(characteristic_polynomial(chain, "x"), x).nroots(n=30)
    roots.sort(key=lambda r: abs(complex(r) - 1))
    return max(abs(complex(r)) for r in roots[1:])


def decay_ratio(chain: MarkovOrbit, start: int = 40, stop: int = 200) -> float:
    """Mean per-step contraction of the distance to uniform between two generations."""
    if not 1 <= start < stop:
        raise DomainError(f"need 1 <= start < stop, got {start}, {stop}")
    distances = power_iteration(chain, stop)
    first, last = distances[start - 1], distances[stop - 1]
    if last == 0:
        return 0.0
    ratio = math.exp((math.log(last.numerator) - math.log(last.denominator)
                      - math.log(first.numerator) + math.log(first.denominator)) / (stop - start))
    logger.debug(f"Decay ratio {ratio:.6f} over generations {start}..{stop} for p={chain.p}")
    return ratio
